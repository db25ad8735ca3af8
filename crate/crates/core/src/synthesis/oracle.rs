//! Independent computation of the normalized coefficients from the linear
//! conditions `Δ̃⁽ᵏ⁾(0) = 0`, `k = 0..2n`, solved in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::binomial::binom_i;
use super::SynthesisError;

/// Largest order for which the system entries fit comfortably in `i64`.
pub const ORACLE_MAX_ORDER: usize = 12;

/// The `2n × 2n` system in the unknowns `p_k = P̃⁽ᵏ⁾(0)`, `q_k = Q̃⁽ᵏ⁾(0)`.
#[derive(Debug, Clone)]
pub struct LinearSystemOracle {
    n: usize,
    matrix: Vec<Vec<i64>>,
    rhs: Vec<i64>,
}

fn sgn(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

fn c(n: i64, k: i64) -> i64 {
    binom_i(n, k) as i64
}

impl LinearSystemOracle {
    pub fn build(n: usize) -> Result<Self, SynthesisError> {
        if n == 0 {
            return Err(SynthesisError::ZeroOrder);
        }
        if n > ORACLE_MAX_ORDER {
            return Err(SynthesisError::OrderTooLarge {
                n,
                max: ORACLE_MAX_ORDER,
            });
        }
        let dim = 2 * n;
        let ni = n as i64;
        let mut matrix = vec![vec![0i64; dim]; dim];
        let mut rhs = vec![0i64; dim];
        for k in 0..dim {
            let ki = k as i64;
            if k < n {
                matrix[k][k] = 1;
            }
            for j in 0..n.min(k + 1) {
                let ji = j as i64;
                matrix[k][n + j] = sgn(ki - ji) * c(ki, ji);
            }
            if k == n {
                rhs[k] = -(1..=ni).product::<i64>();
            }
        }
        Ok(Self { n, matrix, rhs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn rhs(&self) -> &[i64] {
        &self.rhs
    }

    /// `A_{jk} = (−1)^{j−k} C(j, k)` for `j, k < n`.
    pub fn block_a(&self) -> Vec<Vec<i64>> {
        let n = self.n as i64;
        (0..n)
            .map(|j| (0..n).map(|k| sgn(j - k) * c(j, k)).collect())
            .collect()
    }

    /// `B_{jk} = (−1)^{n+j−k} C(n + j, k)`, the lower-right block.
    pub fn block_b(&self) -> Vec<Vec<i64>> {
        let n = self.n as i64;
        (0..n)
            .map(|j| (0..n).map(|k| sgn(n + j - k) * c(n + j, k)).collect())
            .collect()
    }

    /// `C_{jk} = (−1)^{n−k+j} C(n, k − j)`, so that `B = A · C`.
    pub fn block_c(&self) -> Vec<Vec<i64>> {
        let n = self.n as i64;
        (0..n)
            .map(|j| (0..n).map(|k| sgn(n - k + j) * c(n, k - j)).collect())
            .collect()
    }

    /// Exact determinant of [`block_b`](Self::block_b) by fraction-free elimination.
    pub fn determinant_b(&self) -> BigInt {
        let b = self.block_b();
        bareiss_determinant(&b)
    }

    /// Solves the system exactly, returning `(p, q)`.
    pub fn solve(&self) -> Result<(Vec<BigRational>, Vec<BigRational>), SynthesisError> {
        let dim = 2 * self.n;
        let mut m: Vec<Vec<BigRational>> = self
            .matrix
            .iter()
            .zip(&self.rhs)
            .map(|(row, &r)| {
                row.iter()
                    .chain(std::iter::once(&r))
                    .map(|&v| BigRational::from_integer(BigInt::from(v)))
                    .collect()
            })
            .collect();
        for col in 0..dim {
            let pivot = (col..dim)
                .filter(|&r| !m[r][col].is_zero())
                .max_by(|&x, &y| m[x][col].abs().cmp(&m[y][col].abs()))
                .ok_or(SynthesisError::SingularSystem)?;
            m.swap(col, pivot);
            let inv = BigRational::one() / m[col][col].clone();
            for v in m[col].iter_mut() {
                *v = v.clone() * inv.clone();
            }
            for r in 0..dim {
                if r != col && !m[r][col].is_zero() {
                    let factor = m[r][col].clone();
                    for k in col..=dim {
                        let delta = factor.clone() * m[col][k].clone();
                        m[r][k] = m[r][k].clone() - delta;
                    }
                }
            }
        }
        let x: Vec<BigRational> = m.into_iter().map(|row| row[dim].clone()).collect();
        let (p, q) = x.split_at(self.n);
        Ok((p.to_vec(), q.to_vec()))
    }
}

fn bareiss_determinant(a: &[Vec<i64>]) -> BigInt {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    if n == 0 {
        return BigInt::one();
    }
    sign * &m[n - 1][n - 1]
}

/// Normalized coefficients `(b, β)` recovered from the exact oracle solution
/// via `b_k = p_k / k!` and `β_k = q_k / k!`.
pub fn oracle_normalized_coefficients(n: usize) -> Result<(Vec<f64>, Vec<f64>), SynthesisError> {
    let (p, q) = LinearSystemOracle::build(n)?.solve()?;
    let scale = |v: Vec<BigRational>| -> Vec<f64> {
        let mut fact = BigInt::one();
        v.into_iter()
            .enumerate()
            .map(|(k, x)| {
                if k > 0 {
                    fact *= BigInt::from(k);
                }
                let y = x / BigRational::from_integer(fact.clone());
                y.to_f64().unwrap_or(f64::NAN)
            })
            .collect()
    };
    Ok((scale(p), scale(q)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracle_order_two() {
        let (b, beta) = oracle_normalized_coefficients(2).unwrap();
        assert_eq!(b, vec![6.0, -4.0]);
        assert_eq!(beta, vec![-6.0, -2.0]);
    }

    #[test]
    fn block_factorization() {
        for n in 1..=8 {
            let o = LinearSystemOracle::build(n).unwrap();
            let (a, b, cm) = (o.block_a(), o.block_b(), o.block_c());
            for i in 0..n {
                for j in 0..n {
                    let s: i64 = (0..n).map(|k| a[i][k] * cm[k][j]).sum();
                    assert_eq!(s, b[i][j], "n={n} ({i},{j})");
                }
            }
            let expected = if n % 2 == 0 { 1 } else { -1 };
            assert_eq!(o.determinant_b(), BigInt::from(expected));
        }
    }

    #[test]
    fn lower_block_matches_system() {
        let o = LinearSystemOracle::build(4).unwrap();
        let b = o.block_b();
        for j in 0..4 {
            for k in 0..4 {
                assert_eq!(o.matrix()[4 + j][4 + k], b[j][k]);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_order() {
        assert!(LinearSystemOracle::build(0).is_err());
        assert!(LinearSystemOracle::build(13).is_err());
    }
}
