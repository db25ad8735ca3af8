//! Multiplicity-induced-dominancy (MID) pole placement for single-delay
//! linear delay-differential equations of retarded type
//!
//! ```text
//! y⁽ⁿ⁾(t) + a_{n-1} y⁽ⁿ⁻¹⁾(t) + … + a_0 y(t)
//!         + α_{n-1} y⁽ⁿ⁻¹⁾(t − τ) + … + α_0 y(t − τ) = 0
//! ```
//!
//! with characteristic quasipolynomial
//! `Δ(s) = sⁿ + Σ a_k sᵏ + e^{−sτ} Σ α_k sᵏ`.
//!
//! The crate is organised by task:
//!
//! - [`quasipoly`]: representation and analytic evaluation of `Δ` and its derivatives.
//! - [`synthesis`]: the closed-form coefficients that place a real root of
//!   multiplicity `2n`, normalization maps, the linear-system oracle and the
//!   binomial identity suite.
//! - [`hypergeom`]: Kummer's function `M(a, b, z)` and the factorization of
//!   the normalized quasipolynomial.
//! - [`rootfinder`]: argument-principle root counting, root location and
//!   dominance checks.
//! - [`ddesim`]: method-of-steps simulation and decay-rate fitting.
//! - [`designs`]: the second-order delayed-velocity and wind-tunnel designs.

mod dd;
pub mod ddesim;
pub mod designs;
pub mod export;
pub mod hypergeom;
pub mod quadrature;
pub mod quasipoly;
pub mod rootfinder;
pub mod svg;
pub mod synthesis;

pub use num_complex::Complex64;

pub use ddesim::{
    build_scenario, fit_decay_rate, simulate, History, Scenario, SimError, SimulationSpec,
    SimulationTrace,
};
pub use designs::{
    design_second_order, design_wind_tunnel, real_root_r0, ControllerDesign, DesignError,
    SecondOrderDesign,
};
pub use hypergeom::{
    factored_delta, kummer_integral, kummer_m, wynn_root_sides, HypergeomError, KummerParams,
    WynnFamily,
};
pub use quasipoly::{
    poly_exp_integral, NormalizedQuasipolynomial, QuasipolyError, RetardedQuasipolynomial,
    StripCountBound,
};
pub use rootfinder::{
    count_roots, find_roots, spectral_abscissa, verify_dominance, DominanceReport, Rectangle,
    RootError, RootRecord, SpectrumReport,
};
pub use synthesis::{
    binomial_suite, certify_multiplicity, denormalize, dominant_root_from_coeff, normalize,
    normalized_coefficients, oracle_normalized_coefficients, synthesize, SynthesisError,
    SynthesisResult,
};
