//! Double-double arithmetic.
//!
//! A value is the unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`, giving
//! roughly 32 significant digits. Only the operations needed by the series
//! evaluators are provided: the four basic operations, `exp`, `ln`, and
//! ln-Gamma / reciprocal Gamma for positive arguments.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

pub(crate) const LN2: Dd = Dd {
    hi: 0.6931471805599453,
    lo: 2.3190468138462996e-17,
};

const HALF_LN_2PI: Dd = Dd {
    hi: 0.9189385332046728,
    lo: -3.8782941580672414e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    #[inline]
    pub fn prod(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Dd { hi, lo }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        if !hi.is_finite() {
            return Dd { hi, lo: 0.0 };
        }
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Dd::renorm(p, e + self.lo * b)
    }

    #[inline]
    pub fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let (s, f) = two_sum(self.hi, -p);
        let q2 = (s + (f - e + self.lo)) / b;
        Dd::renorm(q1, q2)
    }

    #[inline]
    pub fn sqr(self) -> Self {
        self * self
    }

    /// Multiplies by `2^k` exactly (barring over/underflow).
    fn ldexp(self, k: i32) -> Self {
        // split so that neither half of the scale factor overflows
        let k1 = k / 2;
        let k2 = k - k1;
        let s1 = 2f64.powi(k1);
        let s2 = 2f64.powi(k2);
        Dd {
            hi: self.hi * s1 * s2,
            lo: self.lo * s1 * s2,
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.79 {
            return Dd::from_f64(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Dd::ZERO;
        }
        const SQUARINGS: i32 = 10;
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).ldexp(-SQUARINGS);

        // expm1(r) by Taylor; |r| < 3.4e-4 so 11 terms reach 1e-40
        let mut term = r;
        let mut sum = r;
        for i in 2..=11 {
            term = (term * r).div_f64(i as f64);
            sum = sum + term;
        }
        // (1 + e)^2 - 1 = e (2 + e), keeps the small quantity explicit
        for _ in 0..SQUARINGS {
            sum = sum * (sum + Dd::from_f64(2.0));
        }
        (sum + Dd::ONE).ldexp(k as i32)
    }

    /// Natural logarithm of a positive value (one Newton step on `exp`).
    pub fn ln(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::from_f64(f64::NAN);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // scale into [1, 2) so exp(-y) stays far from the subnormal range
        let e = self.hi.log2().floor() as i32;
        let m = self.ldexp(-e);
        let y = Dd::from_f64(m.hi.ln());
        y + m * (-y).exp() - Dd::ONE + LN2.mul_f64(e as f64)
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Dd::from_f64(s1);
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::from_f64(q3)
    }
}

/// Stirling coefficients B_{2j} / (2j (2j - 1)) for j = 1..=15.
fn stirling_coefficients() -> &'static [Dd; 15] {
    static COEFFS: OnceLock<[Dd; 15]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        const BERNOULLI: [(f64, f64); 15] = [
            (1.0, 6.0),
            (-1.0, 30.0),
            (1.0, 42.0),
            (-1.0, 30.0),
            (5.0, 66.0),
            (-691.0, 2730.0),
            (7.0, 6.0),
            (-3617.0, 510.0),
            (43867.0, 798.0),
            (-174611.0, 330.0),
            (854513.0, 138.0),
            (-236364091.0, 2730.0),
            (8553103.0, 6.0),
            (-23749461029.0, 870.0),
            (8615841276005.0, 14322.0),
        ];
        let mut out = [Dd::ZERO; 15];
        for (j, (num, den)) in BERNOULLI.iter().enumerate() {
            let two_j = 2.0 * (j as f64 + 1.0);
            out[j] = Dd::from_f64(*num) / Dd::from_f64(den * two_j * (two_j - 1.0));
        }
        out
    })
}

const STIRLING_MIN: f64 = 25.0;

/// Stirling series for ln Gamma(y) without the leading terms, valid for y >= 25.
fn stirling_tail(y: Dd) -> Dd {
    let c = stirling_coefficients();
    let inv = Dd::ONE / y;
    let inv2 = inv.sqr();
    let mut s = c[14];
    for cj in c[..14].iter().rev() {
        s = s * inv2 + *cj;
    }
    s * inv
}

/// Shifts `x` up to at least 25, returning the shifted argument and the
/// product x (x+1) ... (x+k-1).
fn shift_up(x: Dd) -> (Dd, Dd) {
    let mut y = x;
    let mut prod = Dd::ONE;
    while y.hi < STIRLING_MIN {
        prod = prod * y;
        y = y + Dd::ONE;
    }
    (y, prod)
}

/// ln Gamma(x) for x > 0.
pub(crate) fn ln_gamma(x: Dd) -> Dd {
    let (y, prod) = shift_up(x);
    let lg = (y - Dd::from_f64(0.5)) * y.ln() - y + HALF_LN_2PI + stirling_tail(y);
    if prod.hi == 1.0 && prod.lo == 0.0 {
        lg
    } else {
        lg - prod.ln()
    }
}

/// 1 / Gamma(x) for x > 0. Underflows to zero beyond x ~ 171.
pub(crate) fn rgamma(x: Dd) -> Dd {
    let (y, prod) = shift_up(x);
    // 1/Gamma(y) = exp(y - (y - 1/2) ln y - ln(2 pi)/2 - tail)
    let arg = y - (y - Dd::from_f64(0.5)) * y.ln() - HALF_LN_2PI - stirling_tail(y);
    prod * arg.exp()
}
