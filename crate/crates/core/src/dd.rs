//! Double-double arithmetic (an unevaluated sum `hi + lo` of two `f64`),
//! enough for evaluating a quasipolynomial to about 30 significant digits.

use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};
const FRAC_PI_2: Dd = Dd {
    hi: std::f64::consts::FRAC_PI_2,
    lo: 6.123_233_995_736_766e-17,
};

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Dd { hi: p, lo: a.mul_add(b, -p) }
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = Dd::prod(q1, d);
        let r = (self - p).hi / d;
        quick_two_sum(q1, r)
    }

    fn scale(self, factor: f64) -> Self {
        Dd {
            hi: self.hi * factor,
            lo: self.lo * factor,
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2 * Dd::from_f64(k)).scale(1.0 / 64.0);
        let mut term = Dd::ONE;
        let mut sum = Dd::ONE;
        for i in 1..=16 {
            term = (term * r).div_f64(i as f64);
            sum = sum + term;
        }
        for _ in 0..6 {
            sum = sum * sum;
        }
        // 2^k split in two factors so that neither overflows on its own.
        let half = (k / 2.0).floor();
        sum.scale(2f64.powi(half as i32)).scale(2f64.powi((k - half) as i32))
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(self) -> (Self, Self) {
        let j = (self.hi / FRAC_PI_2.hi).round();
        let r = self - FRAC_PI_2 * Dd::from_f64(j);
        let r2 = r * r;
        let mut term = r;
        let mut sin = r;
        let mut i = 1.0;
        while i < 29.0 {
            term = -(term * r2).div_f64((i + 1.0) * (i + 2.0));
            sin = sin + term;
            i += 2.0;
        }
        let mut term = Dd::ONE;
        let mut cos = Dd::ONE;
        let mut i = 0.0;
        while i < 28.0 {
            term = -(term * r2).div_f64((i + 1.0) * (i + 2.0));
            cos = cos + term;
            i += 2.0;
        }
        match (j as i64).rem_euclid(4) {
            0 => (sin, cos),
            1 => (cos, -sin),
            2 => (-sin, -cos),
            _ => (-cos, sin),
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let r = quick_two_sum(s, e + t);
        quick_two_sum(r.hi, r.lo + f)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = Dd::prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

/// Complex number with double-double parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct DdComplex {
    pub re: Dd,
    pub im: Dd,
}

impl DdComplex {
    pub const ZERO: DdComplex = DdComplex {
        re: Dd::ZERO,
        im: Dd::ZERO,
    };

    pub fn new(re: f64, im: f64) -> Self {
        DdComplex {
            re: Dd::from_f64(re),
            im: Dd::from_f64(im),
        }
    }

    pub fn add_real(self, x: f64) -> Self {
        DdComplex {
            re: self.re + Dd::from_f64(x),
            im: self.im,
        }
    }

    pub fn exp(self) -> Self {
        let m = self.re.exp();
        let (s, c) = self.im.sin_cos();
        DdComplex { re: m * c, im: m * s }
    }

    pub fn to_c64(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for DdComplex {
    type Output = DdComplex;
    fn add(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Mul for DdComplex {
    type Output = DdComplex;
    fn mul(self, o: DdComplex) -> DdComplex {
        DdComplex {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(x: Dd, hi: f64, lo: f64) -> bool {
        x.hi == hi && (x.lo - lo).abs() < 4e-30
    }

    #[test]
    fn elementary_functions_match_reference() {
        let x = Dd::from_f64(0.512_820_512_820_514_6);
        let e = x.exp();
        assert!(close(e, 1.669_994_800_282_485_8, -1.216_259_938_424_914_5e-17), "{e:?}");
        let (s, c) = x.sin_cos();
        assert!(close(s, 0.490_636_888_896_857_7, 1.930_548_169_362_283_5e-17));
        assert!(close(c, 0.871_364_127_821_206_9, -2.301_765_326_938_143_6e-17));
    }

    #[test]
    fn large_arguments_stay_finite() {
        assert!(Dd::from_f64(700.0).exp().to_f64().is_finite());
        assert_eq!(Dd::from_f64(-800.0).exp(), Dd::ZERO);
        let (s, c) = Dd::from_f64(100.0).sin_cos();
        assert!((s.to_f64() - 100f64.sin()).abs() < 1e-15);
        assert!((c.to_f64() - 100f64.cos()).abs() < 1e-15);
    }
}
