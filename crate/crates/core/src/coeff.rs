//! Exact Gaussian rationals `a + b·i` with `a, b ∈ ℚ`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An element of `ℚ(i)`. Both parts are kept in lowest terms with a positive
/// denominator by `BigRational`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussRational {
    re: BigRational,
    im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn from_ints(re: i64, im: i64) -> Self {
        GaussRational::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    /// `(re_num/re_den) + (im_num/im_den)·i`.
    pub fn from_fracs(re_num: i64, re_den: i64, im_num: i64, im_den: i64) -> Self {
        GaussRational::new(
            BigRational::new(re_num.into(), re_den.into()),
            BigRational::new(im_num.into(), im_den.into()),
        )
    }

    pub fn real(r: BigRational) -> Self {
        GaussRational::new(r, BigRational::zero())
    }

    pub fn int(v: i64) -> Self {
        GaussRational::from_ints(v, 0)
    }

    pub fn i() -> Self {
        GaussRational::from_ints(0, 1)
    }

    pub fn re(&self) -> &BigRational {
        &self.re
    }

    pub fn im(&self) -> &BigRational {
        &self.im
    }

    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    /// `|self|²`, exact.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm_sqr();
        Some(GaussRational::new(&self.re / &n, -&self.im / &n))
    }

    /// Natural log of the modulus as a float; `-inf` for zero. Works for
    /// numerators and denominators far outside the `f64` range.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let n = self.norm_sqr();
        0.5 * (ln_bigint(n.numer()) - ln_bigint(n.denom()))
    }
}

fn ln_bigint(v: &BigInt) -> f64 {
    let v = v.abs();
    let bits = v.bits();
    if bits <= 1000 {
        let f: f64 = num_traits::ToPrimitive::to_f64(&v).unwrap_or(f64::INFINITY);
        return f.ln();
    }
    let shift = bits - 64;
    let top: BigInt = &v >> shift;
    let f: f64 = num_traits::ToPrimitive::to_f64(&top).unwrap_or(f64::MAX);
    f.ln() + (shift as f64) * std::f64::consts::LN_2
}

impl Zero for GaussRational {
    fn zero() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::zero())
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl One for GaussRational {
    fn one() -> Self {
        GaussRational::new(BigRational::one(), BigRational::zero())
    }
}

impl From<i64> for GaussRational {
    fn from(v: i64) -> Self {
        GaussRational::int(v)
    }
}

impl From<BigRational> for GaussRational {
    fn from(r: BigRational) -> Self {
        GaussRational::real(r)
    }
}

impl<'a> Add<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl<'a> Sub<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl<'a> Mul<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl<'a> Div<&'a GaussRational> for &'a GaussRational {
    type Output = GaussRational;
    /// Panics on division by zero, like the rational types it wraps.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &GaussRational) -> GaussRational {
        let inv = rhs.inv().expect("division by zero Gaussian rational");
        self * &inv
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-&self.re, -&self.im)
    }
}

impl Neg for GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re, -self.im)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for GaussRational {
            type Output = GaussRational;
            fn $m(self, rhs: GaussRational) -> GaussRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&GaussRational> for GaussRational {
    fn add_assign(&mut self, rhs: &GaussRational) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&GaussRational> for GaussRational {
    fn sub_assign(&mut self, rhs: &GaussRational) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

/// Renders `re` and `im` as exact rational strings such as `"-1/2"`.
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRational {
    /// Prints in the input syntax, e.g. `3`, `-1/2*i`, `(1/2-1/3*i)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let re = rational_string(&self.re);
        let im_abs = rational_string(&self.im.abs());
        match (self.re.is_zero(), self.im.is_zero()) {
            (true, true) => write!(f, "0"),
            (false, true) => write!(f, "{re}"),
            (true, false) => {
                let sign = if self.im.is_negative() { "-" } else { "" };
                if self.im.abs().is_one() {
                    write!(f, "{sign}i")
                } else {
                    write!(f, "{sign}{im_abs}*i")
                }
            }
            (false, false) => {
                let sign = if self.im.is_negative() { "-" } else { "+" };
                if self.im.abs().is_one() {
                    write!(f, "({re}{sign}i)")
                } else {
                    write!(f, "({re}{sign}{im_abs}*i)")
                }
            }
        }
    }
}
