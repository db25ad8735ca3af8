//! Binomial coefficients and the identities the closed-form coefficients rest on.

use std::sync::OnceLock;

use super::SynthesisError;

/// Exact `C(n, k)` when it fits in a `u128`.
pub fn binom_u128(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// `C(n, k)` as `f64`, exact whenever the value is representable.
pub fn binom_f64(n: u64, k: u64) -> f64 {
    match binom_u128(n, k) {
        Some(v) => v as f64,
        None => {
            let k = k.min(n - k);
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        }
    }
}

/// Falling factorial `n! / (n − k)!`; zero when `k > n`.
pub fn falling_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    ((n - k + 1)..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// Signed integer binomial with `C(n, k) = 0` outside `0 ≤ k ≤ n`.
pub fn binom_i(n: i64, k: i64) -> i128 {
    if n < 0 || k < 0 || k > n {
        return 0;
    }
    pascal()[n as usize][k as usize]
}

const PASCAL_ROWS: usize = 65;

fn pascal() -> &'static Vec<Vec<i128>> {
    static TABLE: OnceLock<Vec<Vec<i128>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<i128>> = Vec::with_capacity(PASCAL_ROWS);
        for n in 0..PASCAL_ROWS {
            let mut row = vec![1i128; n + 1];
            for k in 1..n {
                row[k] = rows[n - 1][k - 1] + rows[n - 1][k];
            }
            rows.push(row);
        }
        rows
    })
}

fn sign(e: i64) -> i128 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Summary of an exhaustive identity sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityReport {
    pub max_index: usize,
    pub cases_checked: usize,
}

/// Checks the binomial identities used when deriving the closed-form
/// coefficients, exhaustively for every index tuple up to `max_index`.
///
/// - shifting: `C(k, j) C(j, ℓ) = C(k, ℓ) C(k − ℓ, j − ℓ)`
/// - alternating Kronecker sum: `Σ_j (−1)^{j+ℓ} C(k, j) C(j, ℓ) = δ_{kℓ}`
/// - inverse binomial matrix: `[(−1)^{j−k} C(j, k)]` is its own inverse
/// - partial alternating sum: `Σ_{j≤ℓ} (−1)^j C(k, j) = (−1)^ℓ C(k − 1, ℓ)`
/// - `Σ_{ℓ=0}^{k} (−1)^ℓ C(n + k − j, ℓ) C(n + k − ℓ, n) = C(j, k)` for `j ≤ n`
/// - Vandermonde: `C(k, j) = Σ_{m≤ℓ} C(ℓ, m) C(k − ℓ, j − m)` for `ℓ ≤ k`
pub fn binomial_suite(max_index: usize) -> Result<IdentityReport, SynthesisError> {
    if max_index > 30 {
        return Err(SynthesisError::IndexTooLarge { max_index, limit: 30 });
    }
    let m = max_index as i64;
    let mut cases = 0usize;
    let fail = |identity: &'static str, indices: String| {
        Err(SynthesisError::IdentityViolation { identity, indices })
    };

    for k in 0..=m {
        for j in 0..=m {
            for l in 0..=m {
                cases += 1;
                if binom_i(k, j) * binom_i(j, l) != binom_i(k, l) * binom_i(k - l, j - l) {
                    return fail("shifting", format!("k={k}, j={j}, l={l}"));
                }
            }
        }
    }

    for k in 0..=m {
        for l in 0..=m {
            cases += 1;
            let s: i128 = (0..=m).map(|j| sign(j + l) * binom_i(k, j) * binom_i(j, l)).sum();
            if s != i128::from(k == l) {
                return fail("alternating Kronecker sum", format!("k={k}, l={l}"));
            }
        }
    }

    for j in 0..=m {
        for l in 0..=m {
            cases += 1;
            let s: i128 = (0..=m)
                .map(|k| binom_i(j, k) * sign(k - l) * binom_i(k, l))
                .sum();
            if s != i128::from(j == l) {
                return fail("inverse binomial matrix", format!("j={j}, l={l}"));
            }
        }
    }

    for k in 1..=m {
        for l in 0..=m {
            cases += 1;
            let s: i128 = (0..=l).map(|j| sign(j) * binom_i(k, j)).sum();
            if s != sign(l) * binom_i(k - 1, l) {
                return fail("partial alternating sum", format!("k={k}, l={l}"));
            }
        }
    }

    for n in 0..=m {
        for j in 0..=n {
            for k in 0..=m {
                cases += 1;
                let s: i128 = (0..=k)
                    .map(|l| sign(l) * binom_i(n + k - j, l) * binom_i(n + k - l, n))
                    .sum();
                if s != binom_i(j, k) {
                    return fail("alternating convolution", format!("n={n}, j={j}, k={k}"));
                }
            }
        }
    }

    for k in 0..=m {
        for j in 0..=m {
            for l in 0..=k {
                cases += 1;
                let s: i128 = (0..=l).map(|i| binom_i(l, i) * binom_i(k - l, j - i)).sum();
                if s != binom_i(k, j) {
                    return fail("Vandermonde", format!("k={k}, j={j}, l={l}"));
                }
            }
        }
    }

    Ok(IdentityReport {
        max_index,
        cases_checked: cases,
    })
}
