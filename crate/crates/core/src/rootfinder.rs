//! Root counting by the argument principle and root location by recursive
//! rectangle subdivision with Newton refinement.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use rayon::prelude::*;
use thiserror::Error;

use crate::hypergeom::{kummer_m, kummer_m_with_magnitude, KummerParams};
use crate::quasipoly::{QuasipolyError, RetardedQuasipolynomial, StripCountBound};
use crate::synthesis::{certify_multiplicity, SynthesisError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("rectangle must have re_min < re_max and im_min < im_max with finite bounds")]
    InvalidRectangle,
    #[error("tolerance must lie in (0, 1e-3], got {0}")]
    InvalidTolerance(f64),
    #[error("a root lies on the contour near {0}")]
    BoundaryRoot(Complex64),
    #[error("argument tracking did not converge along the contour")]
    NoPhaseConvergence,
    #[error("function value is not finite at {0}")]
    NonFinite(Complex64),
    #[error("Newton iteration diverged")]
    NewtonDivergence,
    #[error("{0} is not a root")]
    NotARoot(f64),
    #[error("half-height must be positive and finite, got {0}")]
    InvalidHeight(f64),
    #[error("no roots found in the search region")]
    NoRoots,
    #[error("{0} subregion(s) could not be resolved")]
    Unresolved(usize),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Quasipoly(#[from] QuasipolyError),
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self, RootError> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// Square of half-width `half` centred at `c`.
    pub fn square(c: Complex64, half: f64) -> Self {
        Self {
            re_min: c.re - half,
            re_max: c.re + half,
            im_min: c.im - half,
            im_max: c.im + half,
        }
    }

    pub fn validate(&self) -> Result<(), RootError> {
        let finite = [self.re_min, self.re_max, self.im_min, self.im_max]
            .iter()
            .all(|v| v.is_finite());
        if finite && self.re_min < self.re_max && self.im_min < self.im_max {
            Ok(())
        } else {
            Err(RootError::InvalidRectangle)
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, s: Complex64) -> bool {
        s.re >= self.re_min && s.re <= self.re_max && s.im >= self.im_min && s.im <= self.im_max
    }

    pub fn dilated(&self, by: f64) -> Self {
        Self {
            re_min: self.re_min - by,
            re_max: self.re_max + by,
            im_min: self.im_min - by,
            im_max: self.im_max + by,
        }
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn split(&self, fx: f64, fy: f64) -> Vec<Rectangle> {
        let x = self.re_min + fx * self.width();
        let y = self.im_min + fy * self.height();
        let (w, h) = (self.width(), self.height());
        let xs = if h <= 2.0 * w {
            vec![(self.re_min, x), (x, self.re_max)]
        } else {
            vec![(self.re_min, self.re_max)]
        };
        let ys = if w <= 2.0 * h {
            vec![(self.im_min, y), (y, self.im_max)]
        } else {
            vec![(self.im_min, self.im_max)]
        };
        let mut out = Vec::with_capacity(4);
        for &(a, b) in &xs {
            for &(c, d) in &ys {
                out.push(Rectangle {
                    re_min: a,
                    re_max: b,
                    im_min: c,
                    im_max: d,
                });
            }
        }
        out
    }
}

/// A function analytic on the search region.
pub trait Analytic {
    fn value(&self, s: Complex64) -> Complex64;
    fn derivative(&self, s: Complex64) -> Complex64;
    /// Sum of the moduli of the terms making up `value(s)`; a computed value
    /// smaller than a few ulps of this cannot be told apart from zero.
    fn magnitude(&self, s: Complex64) -> f64;
    /// Absolute rounding error of `value(s)`.
    fn noise_floor(&self, s: Complex64) -> f64 {
        f64::EPSILON * self.magnitude(s)
    }
    /// Rough rate at which the phase advances per unit arc length beyond the
    /// polynomial contribution.
    fn phase_rate(&self) -> f64 {
        1.0
    }
}

impl Analytic for RetardedQuasipolynomial {
    fn value(&self, s: Complex64) -> Complex64 {
        self.eval(s)
    }

    fn derivative(&self, s: Complex64) -> Complex64 {
        self.eval_derivative(s, 1).expect("first derivative is always supported")
    }

    fn magnitude(&self, s: Complex64) -> f64 {
        self.derivative_magnitude(s, 0)
            .expect("order zero is always supported")
    }

    fn phase_rate(&self) -> f64 {
        self.tau().max(1.0)
    }
}

/// `Δ(s) / (s − c)^m` for a root `c` of multiplicity at least `m`.
///
/// Near `c` the quotient is evaluated from the Taylor expansion of `Δ` with
/// the first `m` coefficients dropped, which removes the rounding noise that
/// otherwise splits a multiple root into a cluster.
pub struct Deflated<'a> {
    qp: &'a RetardedQuasipolynomial,
    center: Complex64,
    m: usize,
    radius: f64,
    coeffs: Vec<Complex64>,
    mags: Vec<f64>,
}

const DEFLATION_TERMS: usize = 60;

impl<'a> Deflated<'a> {
    pub fn new(qp: &'a RetardedQuasipolynomial, center: Complex64, m: usize) -> Self {
        let total = m + DEFLATION_TERMS;
        let coeffs = qp.taylor_coefficients(center, total)[m..].to_vec();
        let mags = qp.taylor_magnitudes(center, total)[m..].to_vec();
        Self {
            qp,
            center,
            m,
            radius: 2.0 / qp.tau(),
            coeffs,
            mags,
        }
    }

    pub fn multiplicity(&self) -> usize {
        self.m
    }
}

impl Analytic for Deflated<'_> {
    fn value(&self, s: Complex64) -> Complex64 {
        let w = s - self.center;
        if w.norm() < self.radius {
            self.coeffs
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c)
        } else {
            self.qp.eval(s) / w.powu(self.m as u32)
        }
    }

    fn derivative(&self, s: Complex64) -> Complex64 {
        let w = s - self.center;
        if w.norm() < self.radius {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, c) in self.coeffs.iter().enumerate().skip(1).rev() {
                acc = acc * w + c * i as f64;
            }
            acc
        } else {
            let d = self.qp.eval_derivative(s, 1).expect("first derivative");
            (d - self.qp.eval(s) * self.m as f64 / w) / w.powu(self.m as u32)
        }
    }

    fn magnitude(&self, s: Complex64) -> f64 {
        let w = s - self.center;
        let r = w.norm();
        if r < self.radius {
            self.mags.iter().rev().fold(0.0, |acc, c| acc * r + c)
        } else {
            self.qp.magnitude(s) / r.powi(self.m as i32)
        }
    }

    fn phase_rate(&self) -> f64 {
        self.qp.phase_rate()
    }
}

/// `M(a, b, ·)` as an analytic function.
pub struct KummerFunction {
    pub params: KummerParams,
}

impl Analytic for KummerFunction {
    fn value(&self, s: Complex64) -> Complex64 {
        kummer_m(&self.params, s).unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn derivative(&self, s: Complex64) -> Complex64 {
        let p = KummerParams {
            a: self.params.a + 1.0,
            b: self.params.b + 1.0,
            ..self.params
        };
        let m = kummer_m(&p, s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        m * (self.params.a / self.params.b)
    }

    fn magnitude(&self, s: Complex64) -> f64 {
        kummer_m_with_magnitude(&self.params, s)
            .map(|v| v.magnitude)
            .unwrap_or(f64::NAN)
    }
}

const BOUNDARY_FACTOR: f64 = 64.0;
const MAX_PHASE_STEP: f64 = PI / 4.0;
const MAX_SEGMENT_DEPTH: usize = 40;
const DILATION: f64 = 1e-6;
const DILATION_RETRIES: usize = 3;

struct Tracker<'f, F: ?Sized> {
    f: &'f F,
    max_step: f64,
}

impl<F: Analytic + ?Sized> Tracker<'_, F> {
    fn sample(&self, s: Complex64) -> Result<Complex64, RootError> {
        let v = self.f.value(s);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(RootError::NonFinite(s));
        }
        if v.norm() <= BOUNDARY_FACTOR * self.f.noise_floor(s) {
            return Err(RootError::BoundaryRoot(s));
        }
        Ok(v)
    }

    fn winding(&self, r: &Rectangle) -> Result<f64, RootError> {
        let c = r.corners();
        let mut total = 0.0;
        for i in 0..4 {
            total += self.edge(c[i], c[(i + 1) % 4])?;
        }
        Ok(total / (2.0 * PI))
    }

    fn edge(&self, a: Complex64, b: Complex64) -> Result<f64, RootError> {
        let len = (b - a).norm();
        let pieces = (16.0 + 4.0 * len * self.f.phase_rate()).ceil().min(1e6) as usize;
        let mut total = 0.0;
        let mut u = a;
        let mut fu = self.sample(a)?;
        for i in 1..=pieces {
            let v = if i == pieces {
                b
            } else {
                a + (b - a) * (i as f64 / pieces as f64)
            };
            let fv = self.sample(v)?;
            total += self.segment(u, fu, v, fv, 0)?;
            u = v;
            fu = fv;
        }
        Ok(total)
    }

    fn segment(
        &self,
        u: Complex64,
        fu: Complex64,
        v: Complex64,
        fv: Complex64,
        depth: usize,
    ) -> Result<f64, RootError> {
        let mid = 0.5 * (u + v);
        let fm = self.sample(mid)?;
        let d = (fv / fu).arg();
        let d1 = (fm / fu).arg();
        let d2 = (fv / fm).arg();
        if d1.abs() <= self.max_step && d2.abs() <= self.max_step && (d1 + d2 - d).abs() < 1.0 {
            return Ok(d1 + d2);
        }
        if depth >= MAX_SEGMENT_DEPTH {
            return Err(RootError::NoPhaseConvergence);
        }
        Ok(self.segment(u, fu, mid, fm, depth + 1)? + self.segment(mid, fm, v, fv, depth + 1)?)
    }
}

/// Number of zeros of `f` inside `r`, counted with multiplicity.
///
/// If a zero is detected on the contour the rectangle is dilated by `1e-6`
/// and the count repeated, up to three times.
pub fn count_zeros<F: Analytic + ?Sized>(f: &F, r: &Rectangle) -> Result<i64, RootError> {
    count_zeros_dilating(f, r).map(|(k, _)| k)
}

/// [`count_zeros`] also returning the (possibly dilated) rectangle that was used.
pub fn count_zeros_dilating<F: Analytic + ?Sized>(
    f: &F,
    r: &Rectangle,
) -> Result<(i64, Rectangle), RootError> {
    r.validate()?;
    let mut last = RootError::NoPhaseConvergence;
    for attempt in 0..=DILATION_RETRIES {
        let rect = r.dilated(DILATION * attempt as f64);
        for step in [MAX_PHASE_STEP, MAX_PHASE_STEP / 4.0] {
            let tracker = Tracker { f, max_step: step };
            match tracker.winding(&rect) {
                Ok(w) => {
                    let k = w.round();
                    if (w - k).abs() < 0.2 {
                        return Ok((k as i64, rect));
                    }
                    last = RootError::NoPhaseConvergence;
                }
                Err(e @ RootError::BoundaryRoot(_)) => {
                    last = e;
                    break;
                }
                Err(e @ RootError::NoPhaseConvergence) => last = e,
                Err(e) => return Err(e),
            }
        }
    }
    Err(last)
}

/// One located root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRecord {
    pub re: f64,
    pub im: f64,
    pub multiplicity: usize,
    pub residual: f64,
    #[serde(skip)]
    pub newton_iters: usize,
}

impl RootRecord {
    pub fn location(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// A subregion whose zeros could not be isolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnresolvedRegion {
    pub rectangle: Rectangle,
    pub count: i64,
}

/// Zeros of an analytic function in a rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSet {
    pub total_count: i64,
    pub roots: Vec<RootRecord>,
    pub unresolved: Vec<UnresolvedRegion>,
}

const LEAF_DIAMETER: f64 = 0.1;
const CLUSTER_DIAMETER: f64 = 1e-4;
const MAX_SUBDIVISION_DEPTH: usize = 64;
const MAX_NEWTON: usize = 100;
const CENTROID_POINTS: usize = 128;
const SPLITS: [(f64, f64); 4] = [
    (0.4619, 0.5383),
    (0.5417, 0.4573),
    (0.3769, 0.6271),
    (0.6137, 0.3829),
];

fn check_tolerance(tol: f64) -> Result<(), RootError> {
    if tol > 0.0 && tol <= 1e-3 {
        Ok(())
    } else {
        Err(RootError::InvalidTolerance(tol))
    }
}

/// Locates all zeros of `f` in `rect` to absolute tolerance `tol`.
pub fn find_zeros<F: Analytic + Sync + ?Sized>(
    f: &F,
    rect: &Rectangle,
    tol: f64,
) -> Result<ZeroSet, RootError> {
    check_tolerance(tol)?;
    let (total, used) = count_zeros_dilating(f, rect)?;
    let mut frontier = vec![(used, total, 0usize)];
    let mut roots = Vec::new();
    let mut unresolved = Vec::new();

    while !frontier.is_empty() {
        let steps: Vec<Step> = frontier
            .par_iter()
            .filter(|(_, count, _)| *count > 0)
            .map(|&(r, count, depth)| step(f, r, count, depth, tol))
            .collect();
        frontier = Vec::new();
        for s in steps {
            match s {
                Step::Split(children) => frontier.extend(children),
                Step::Root(rec) => roots.push(rec),
                Step::Unresolved(region) => unresolved.push(region),
            }
        }
    }

    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut merged: Vec<RootRecord> = Vec::with_capacity(roots.len());
    for rec in roots {
        match merged.last_mut() {
            Some(prev) if (prev.location() - rec.location()).norm() < 10.0 * tol => {
                let lost = prev.multiplicity.min(rec.multiplicity);
                prev.multiplicity = prev.multiplicity.max(rec.multiplicity);
                let half = 10.0 * tol;
                unresolved.push(UnresolvedRegion {
                    rectangle: Rectangle::square(rec.location(), half),
                    count: lost as i64,
                });
            }
            _ => merged.push(rec),
        }
    }

    Ok(ZeroSet {
        total_count: total,
        roots: merged,
        unresolved,
    })
}

enum Step {
    Split(Vec<(Rectangle, i64, usize)>),
    Root(RootRecord),
    Unresolved(UnresolvedRegion),
}

fn step<F: Analytic + Sync + ?Sized>(
    f: &F,
    r: Rectangle,
    count: i64,
    depth: usize,
    tol: f64,
) -> Step {
    let diam = r.diameter();
    let cluster_cell = CLUSTER_DIAMETER * (1.0 + r.center().norm());
    let leaf = (diam < LEAF_DIAMETER && (count == 1 || diam < cluster_cell))
        || depth >= MAX_SUBDIVISION_DEPTH;
    if !leaf {
        if let Some(children) = subdivide(f, &r, count) {
            return Step::Split(children.into_iter().map(|(c, k)| (c, k, depth + 1)).collect());
        }
    }
    match resolve_leaf(f, &r, count as usize, tol) {
        Some(rec) => Step::Root(rec),
        None => Step::Unresolved(UnresolvedRegion { rectangle: r, count }),
    }
}

fn subdivide<F: Analytic + ?Sized>(
    f: &F,
    r: &Rectangle,
    count: i64,
) -> Option<Vec<(Rectangle, i64)>> {
    'fractions: for &(fx, fy) in &SPLITS {
        let children = r.split(fx, fy);
        let mut counted = Vec::with_capacity(children.len());
        for c in children {
            match count_zeros_exact(f, &c) {
                Ok(k) if k >= 0 => counted.push((c, k)),
                _ => continue 'fractions,
            }
        }
        if counted.iter().map(|(_, k)| k).sum::<i64>() == count {
            return Some(counted);
        }
    }
    None
}

/// Count without dilation, so that sibling rectangles tile their parent exactly.
fn count_zeros_exact<F: Analytic + ?Sized>(f: &F, r: &Rectangle) -> Result<i64, RootError> {
    for step in [MAX_PHASE_STEP, MAX_PHASE_STEP / 4.0] {
        let w = Tracker { f, max_step: step }.winding(r)?;
        let k = w.round();
        if (w - k).abs() < 0.2 {
            return Ok(k as i64);
        }
    }
    Err(RootError::NoPhaseConvergence)
}

fn resolve_leaf<F: Analytic + ?Sized>(
    f: &F,
    r: &Rectangle,
    count: usize,
    tol: f64,
) -> Option<RootRecord> {
    let m = count as f64;
    let fence = r.dilated(r.diameter());
    let mut s = r.center();
    let mut iters = 0;
    for _ in 0..MAX_NEWTON {
        let v = f.value(s);
        if v.norm() <= BOUNDARY_FACTOR * f.noise_floor(s) {
            break;
        }
        let d = f.derivative(s);
        let step = m * v / d;
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        let next = s - step;
        if !fence.contains(next) {
            if count == 1 {
                return None;
            }
            break;
        }
        s = next;
        iters += 1;
        if step.norm() <= 1e-3 * tol * (1.0 + s.norm()) {
            break;
        }
    }
    if !r.contains(s) {
        if count == 1 {
            return None;
        }
        s = r.center();
    }

    let mut rho = 3.0 * tol;
    let limit = 2.0 * r.diameter();
    let mut located = None;
    while rho <= limit {
        if let Ok(k) = count_zeros(f, &Rectangle::square(s, rho)) {
            if k > count as i64 {
                return None;
            }
            if k == count as i64 {
                if count == 1 {
                    located = Some(s);
                    break;
                }
                if count_zeros(f, &Rectangle::square(s, 2.0 * rho)).ok() == Some(k) {
                    if let Some(c) = contour_centroid(f, s, 1.5 * rho, count) {
                        located = Some(c);
                        break;
                    }
                }
            }
        }
        rho *= 4.0;
    }
    let s = located?;
    Some(RootRecord {
        re: s.re,
        im: s.im,
        multiplicity: count,
        residual: f.value(s).norm(),
        newton_iters: iters,
    })
}

/// `(1/m) (1/2πi) ∮ s f'(s)/f(s) ds` on the circle `|s − c| = radius`.
fn contour_centroid<F: Analytic + ?Sized>(
    f: &F,
    c: Complex64,
    radius: f64,
    m: usize,
) -> Option<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..CENTROID_POINTS {
        let theta = 2.0 * PI * k as f64 / CENTROID_POINTS as f64;
        let w = Complex64::from_polar(radius, theta);
        let s = c + w;
        let ratio = f.derivative(s) / f.value(s);
        acc += w * w * ratio;
    }
    let shift = acc / (CENTROID_POINTS as f64 * m as f64);
    if shift.re.is_finite() && shift.im.is_finite() && shift.norm() <= radius {
        Some(c + shift)
    } else {
        None
    }
}

/// Number of roots of `qp` inside `rect`, counted with multiplicity.
pub fn count_roots(qp: &RetardedQuasipolynomial, rect: &Rectangle) -> Result<i64, RootError> {
    count_zeros(qp, rect)
}

/// Number of roots of `qp(s) / (s − s₀)^m` inside `rect`.
pub fn count_roots_deflated(
    qp: &RetardedQuasipolynomial,
    s0: f64,
    m: usize,
    rect: &Rectangle,
) -> Result<i64, RootError> {
    count_zeros(&Deflated::new(qp, Complex64::new(s0, 0.0), m), rect)
}

/// Roots of a quasipolynomial in a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub rectangle: Rectangle,
    pub total_count: i64,
    pub roots: Vec<RootRecord>,
    pub strip_bound: StripCountBound,
    pub unresolved: Vec<UnresolvedRegion>,
}

impl SpectrumReport {
    pub fn located_count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.unresolved.is_empty() && self.located_count() as i64 == self.total_count
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spectrum serialization cannot fail")
    }
}

pub fn find_roots(
    qp: &RetardedQuasipolynomial,
    rect: &Rectangle,
    tol: f64,
) -> Result<SpectrumReport, RootError> {
    let set = find_zeros(qp, rect, tol)?;
    Ok(SpectrumReport {
        rectangle: *rect,
        total_count: set.total_count,
        roots: set.roots,
        strip_bound: qp.polya_szego_bound(rect.im_min, rect.im_max)?,
        unresolved: set.unresolved,
    })
}

/// Largest real part among the roots found in the search rectangles.
pub fn spectral_abscissa(
    qp: &RetardedQuasipolynomial,
    search: &[Rectangle],
    tol: f64,
) -> Result<f64, RootError> {
    let mut best: Option<f64> = None;
    for rect in search {
        let report = find_roots(qp, rect, tol)?;
        if !report.unresolved.is_empty() {
            return Err(RootError::Unresolved(report.unresolved.len()));
        }
        for r in &report.roots {
            best = Some(best.map_or(r.re, |b| b.max(r.re)));
        }
    }
    best.ok_or(RootError::NoRoots)
}

/// Positive root `R` of `rⁿ = Σ (|a_k| + e^{−τσ} |α_k|) rᵏ`. Every root with
/// `Re s ≥ σ` satisfies `|s| ≤ R`.
pub fn apriori_root_radius(qp: &RetardedQuasipolynomial, sigma: f64) -> f64 {
    let e = (-qp.tau() * sigma).exp();
    let c: Vec<f64> = qp
        .a()
        .iter()
        .zip(qp.alpha())
        .map(|(a, al)| a.abs() + e * al.abs())
        .collect();
    positive_root(&c)
}

fn positive_root(c: &[f64]) -> f64 {
    let n = c.len() as i32;
    let g = |r: f64| r.powi(n) - c.iter().enumerate().map(|(k, ck)| ck * r.powi(k as i32)).sum::<f64>();
    let mut hi = 1.0 + c.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0;
    if c.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    while g(hi) <= 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// Outcome of [`verify_dominance`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub s0: f64,
    pub multiplicity: usize,
    pub dominant: bool,
    pub count: i64,
    pub rectangle: Rectangle,
    pub apriori_radius: f64,
    pub covers_apriori_region: bool,
    pub roots_per_unit_height: f64,
    pub status: String,
}

const MULTIPLICITY_TOL: f64 = 1e-8;

/// Counts the roots other than `s₀` in `[s₀ + ε, s₀ + 100/τ] × [−H, H]`.
///
/// `s₀` is first deflated out with its certified multiplicity so that the
/// count is not disturbed by rounding near the multiple root. When the
/// returned rectangle contains the a-priori disc of radius
/// `apriori_radius`, no root with real part above `s₀` can lie outside it.
pub fn verify_dominance(
    qp: &RetardedQuasipolynomial,
    s0: f64,
    half_height: f64,
) -> Result<DominanceReport, RootError> {
    if !(half_height > 0.0 && half_height.is_finite()) {
        return Err(RootError::InvalidHeight(half_height));
    }
    let m = certify_multiplicity(qp, s0, MULTIPLICITY_TOL)?;
    if m == 0 {
        return Err(RootError::NotARoot(s0));
    }
    let tau = qp.tau();
    let rect = Rectangle::new(
        s0 + 1e-6 * (1.0 + s0.abs()),
        s0 + 100.0 / tau,
        -half_height,
        half_height,
    )?;
    let count = count_roots_deflated(qp, s0, m, &rect)?;
    let radius = apriori_root_radius(qp, s0);
    Ok(DominanceReport {
        s0,
        multiplicity: m,
        dominant: count == 0,
        count,
        rectangle: rect,
        apriori_radius: radius,
        covers_apriori_region: radius <= rect.re_max && radius <= half_height,
        roots_per_unit_height: tau / (2.0 * PI),
        status: "verified within region".to_string(),
    })
}

/// Exact root count in a horizontal strip together with the rectangle used
/// and the Pólya–Szegő interval it must fall into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripCount {
    pub count: i64,
    pub rectangle: Rectangle,
    pub bound: StripCountBound,
}

/// Counts all roots with `alpha ≤ Im s ≤ beta`.
///
/// The strip is closed off on the left where the delayed term provably
/// dominates and on the right beyond the a-priori radius for `Re s ≥ 0`.
pub fn count_in_strip(
    qp: &RetardedQuasipolynomial,
    alpha: f64,
    beta: f64,
) -> Result<StripCount, RootError> {
    let bound = qp.polya_szego_bound(alpha, beta)?;
    let height = alpha.abs().max(beta.abs());
    let left = left_root_free_abscissa(qp, height);
    let right = apriori_root_radius(qp, 0.0).max(0.0);
    let rect = Rectangle::new(-left - 1.0, right + 1.0, alpha, beta)?;
    let count = count_roots(qp, &rect)?;
    Ok(StripCount { count, rectangle: rect, bound })
}

/// `X ≥ 0` such that no root has `Re s ≤ −X` and `|Im s| ≤ height`.
pub fn left_root_free_abscissa(qp: &RetardedQuasipolynomial, height: f64) -> f64 {
    let Some(d) = qp.alpha().iter().rposition(|&c| c != 0.0) else {
        let c: Vec<f64> = qp.a().iter().map(|v| v.abs()).collect();
        return positive_root(&c);
    };
    let tau = qp.tau();
    let alpha = qp.alpha();
    let ad = alpha[d].abs();
    let lower_q = |x: f64| {
        ad * x.powi(d as i32)
            - (0..d)
                .map(|k| alpha[k].abs() * x.powi(k as i32))
                .sum::<f64>()
    };
    let upper_p = |r: f64| {
        r.powi(qp.n() as i32)
            + qp.a()
                .iter()
                .enumerate()
                .map(|(k, a)| a.abs() * r.powi(k as i32))
                .sum::<f64>()
    };
    let holds = |x: f64| {
        let q = lower_q(x);
        q > 0.0 && tau * x + q.ln() > upper_p(x.hypot(height)).ln() + std::f64::consts::LN_2
    };
    let rq = 1.0
        + (0..d)
            .map(|k| alpha[k].abs() / ad)
            .fold(0.0, f64::max);
    let monotone_from = (2.0 * rq).max(2.0 * qp.n() as f64 / tau).max(1.0);
    let step = 0.25 / tau;
    let mut x = 0.0;
    let mut last_fail = None;
    while x <= monotone_from {
        if !holds(x) {
            last_fail = Some(x);
        }
        x += step;
    }
    while !holds(x) {
        last_fail = Some(x);
        x += step;
    }
    match last_fail {
        None => 0.0,
        Some(f) => f + step,
    }
}
