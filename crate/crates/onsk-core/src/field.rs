//! Scalars and the evaluation point.
//!
//! Everything downstream works over [`Gaussian<T>`], a complex number with
//! components in an exact field `T`. The crate root pins `T` to big rationals.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// A commutative field with owned and by-reference arithmetic.
pub trait Field:
    Clone
    + PartialEq
    + fmt::Debug
    + Send
    + Sync
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    /// Multiplicative inverse, `None` at zero.
    fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(Self::one() / self)
        }
    }

    fn from_i64(v: i64) -> Self;

    /// Integer power; negative exponents invert. Panics on `0^(-n)`.
    fn powi(&self, e: i64) -> Self {
        let mut base = if e < 0 {
            self.inv().expect("negative power of zero")
        } else {
            self.clone()
        };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }
}

impl Field for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
}

impl Field for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

/// `re + i·im` over a real field `T`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Gaussian<T> {
    pub re: T,
    pub im: T,
}

impl<T: Field> Gaussian<T> {
    pub fn new(re: T, im: T) -> Self {
        Gaussian { re, im }
    }

    pub fn real(re: T) -> Self {
        Gaussian { re, im: T::zero() }
    }

    pub fn i() -> Self {
        Gaussian { re: T::zero(), im: T::one() }
    }

    pub fn conj(&self) -> Self {
        Gaussian { re: self.re.clone(), im: -self.im.clone() }
    }

    /// `re² + im²`.
    pub fn norm_sqr(&self) -> T {
        self.re.clone() * &self.re + self.im.clone() * &self.im
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    fn mul_ref(&self, rhs: &Self) -> Self {
        if self.im.is_zero() {
            if rhs.im.is_zero() {
                return Gaussian::real(self.re.clone() * &rhs.re);
            }
            return Gaussian {
                re: self.re.clone() * &rhs.re,
                im: self.re.clone() * &rhs.im,
            };
        }
        if rhs.im.is_zero() {
            return Gaussian {
                re: self.re.clone() * &rhs.re,
                im: self.im.clone() * &rhs.re,
            };
        }
        Gaussian {
            re: self.re.clone() * &rhs.re - self.im.clone() * &rhs.im,
            im: self.re.clone() * &rhs.im + self.im.clone() * &rhs.re,
        }
    }

    fn div_ref(&self, rhs: &Self) -> Self {
        assert!(!rhs.is_zero(), "division by zero");
        if rhs.im.is_zero() {
            return Gaussian {
                re: self.re.clone() / &rhs.re,
                im: self.im.clone() / &rhs.re,
            };
        }
        let n = rhs.norm_sqr();
        let num = self.mul_ref(&rhs.conj());
        Gaussian { re: num.re / &n, im: num.im / &n }
    }
}

impl<T: Field> Zero for Gaussian<T> {
    fn zero() -> Self {
        Gaussian { re: T::zero(), im: T::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl<T: Field> One for Gaussian<T> {
    fn one() -> Self {
        Gaussian::real(T::one())
    }
}

impl<T: Field> Neg for Gaussian<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Gaussian { re: -self.re, im: -self.im }
    }
}

impl<T: Field> Neg for &Gaussian<T> {
    type Output = Gaussian<T>;
    fn neg(self) -> Gaussian<T> {
        -self.clone()
    }
}

macro_rules! gaussian_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl<T: Field> $tr<&Gaussian<T>> for &Gaussian<T> {
            type Output = Gaussian<T>;
            fn $m(self, rhs: &Gaussian<T>) -> Gaussian<T> {
                let f: fn(&Gaussian<T>, &Gaussian<T>) -> Gaussian<T> = $body;
                f(self, rhs)
            }
        }
        impl<T: Field> $tr<&Gaussian<T>> for Gaussian<T> {
            type Output = Gaussian<T>;
            fn $m(self, rhs: &Gaussian<T>) -> Gaussian<T> {
                (&self).$m(rhs)
            }
        }
        impl<T: Field> $tr<Gaussian<T>> for Gaussian<T> {
            type Output = Gaussian<T>;
            fn $m(self, rhs: Gaussian<T>) -> Gaussian<T> {
                (&self).$m(&rhs)
            }
        }
        impl<T: Field> $tr<Gaussian<T>> for &Gaussian<T> {
            type Output = Gaussian<T>;
            fn $m(self, rhs: Gaussian<T>) -> Gaussian<T> {
                self.$m(&rhs)
            }
        }
    };
}

gaussian_binop!(Add, add, |a, b| Gaussian {
    re: a.re.clone() + &b.re,
    im: a.im.clone() + &b.im
});
gaussian_binop!(Sub, sub, |a, b| Gaussian {
    re: a.re.clone() - &b.re,
    im: a.im.clone() - &b.im
});
gaussian_binop!(Mul, mul, |a, b| a.mul_ref(b));
gaussian_binop!(Div, div, |a, b| a.div_ref(b));

impl<T: Field> Field for Gaussian<T> {
    fn from_i64(v: i64) -> Self {
        Gaussian::real(T::from_i64(v))
    }
}

/// Exact rational.
pub type Rational = BigRational;

/// Gaussian rational, the ground field.
pub type Scalar = Gaussian<Rational>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn sc(n: i64, d: i64) -> Scalar {
    Scalar::real(rat(n, d))
}

pub fn sci(n: i64) -> Scalar {
    Scalar::from_i64(n)
}

impl Scalar {
    pub fn from_rational(r: Rational) -> Self {
        Scalar::real(r)
    }

    /// Upper bound for `|self|` as a rational (sum of component magnitudes).
    pub fn abs_upper(&self) -> Rational {
        self.re.abs() + self.im.abs()
    }

    /// Lower bound for `|self|`.
    pub fn abs_lower(&self) -> Rational {
        let (a, b) = (self.re.abs(), self.im.abs());
        if a > b {
            a
        } else {
            b
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        use num_traits::ToPrimitive;
        (self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

fn fmt_rat(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

impl fmt::Display for Gaussian<Rational> {
    /// Canonical `re_num/re_den+im_num/im_den*i`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let im = fmt_rat(&self.im);
        let sep = if im.starts_with('-') { "" } else { "+" };
        write!(f, "{}{}{}*i", fmt_rat(&self.re), sep, im)
    }
}

fn parse_rat(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(s.to_string());
    let s = s.trim();
    if s.is_empty() || s.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

impl FromStr for Gaussian<Rational> {
    type Err = Error;

    /// Accepts `a/b`, `a`, `c/d*i`, `a/b+c/d*i`, `a/b-c/d*i`. Floats are rejected.
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Parse(s.clone());
        if let Some(body) = s.strip_suffix("*i") {
            // split at the last sign that is not the leading one
            let cut = body
                .char_indices()
                .skip(1)
                .filter(|&(_, c)| c == '+' || c == '-')
                .map(|(i, _)| i)
                .last();
            match cut {
                Some(i) => {
                    let re = parse_rat(&body[..i])?;
                    let im_str = body[i..].trim_start_matches('+');
                    Ok(Scalar::new(re, parse_rat(im_str)?))
                }
                None => Ok(Scalar::new(Rational::zero(), parse_rat(body)?)),
            }
        } else if s.ends_with('i') {
            Err(bad())
        } else {
            Ok(Scalar::real(parse_rat(&s)?))
        }
    }
}

/// The evaluation point `(t, z, ε, μ)` and its derived constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub t: Rational,
    pub z: Scalar,
    pub eps: i8,
    pub mu: i8,
    /// `q^{1/2} = iμt`.
    pub qhalf: Scalar,
    /// `q = −t²`.
    pub q: Scalar,
    /// `p = iεt^{−2}`.
    pub p: Scalar,
}

pub fn make_params(t: Rational, z: Scalar, eps: i8, mu: i8) -> Result<Params> {
    if t.is_zero() || t.abs().is_one() {
        return Err(Error::Genericity(format!("t = {t}")));
    }
    if z.is_zero() {
        return Err(Error::Genericity("z = 0".into()));
    }
    if eps.abs() != 1 || mu.abs() != 1 {
        return Err(Error::Genericity("signs must be ±1".into()));
    }
    let tt = Scalar::real(t.clone());
    let qhalf = Scalar::new(Rational::zero(), t.clone() * rat(mu as i64, 1));
    let q = -(tt.clone() * &tt);
    let p = Scalar::new(Rational::zero(), rat(eps as i64, 1) / (t.clone() * &t));
    Ok(Params { t, z, eps, mu, qhalf, q, p })
}

impl Params {
    /// Same `t, ε, μ` at a new spectral parameter.
    pub fn with_z(&self, z: Scalar) -> Params {
        Params { z, ..self.clone() }
    }

    pub fn t_scalar(&self) -> Scalar {
        Scalar::real(self.t.clone())
    }

    pub fn qpow(&self, m: i64) -> Scalar {
        self.q.powi(m)
    }

    /// `q + q^{−1}`.
    pub fn qsum(&self) -> Scalar {
        self.q.clone() + self.q.inv().unwrap()
    }

    /// `q − q^{−1}`.
    pub fn qdiff(&self) -> Scalar {
        self.q.clone() - self.q.inv().unwrap()
    }

    /// `Γ = (t² − t^{−2})² / (4(t² + t^{−2}))`.
    pub fn gamma(&self) -> Scalar {
        let t2 = self.t_scalar().powi(2);
        let ti2 = t2.inv().unwrap();
        let d = t2.clone() - &ti2;
        d.clone() * &d / (sci(4) * (t2 + ti2))
    }

    pub fn eps_s(&self) -> Scalar {
        sci(self.eps as i64)
    }

    pub fn mu_s(&self) -> Scalar {
        sci(self.mu as i64)
    }
}

/// `(a + bi)² / (a² + b²)`, a Gaussian rational of modulus one.
pub fn unit_circle_point(a: i64, b: i64) -> Result<Scalar> {
    if a == 0 && b == 0 {
        return Err(Error::DegenerateInput("(0, 0)".into()));
    }
    let w = Scalar::new(rat(a, 1), rat(b, 1));
    let n = Scalar::real(rat(a * a + b * b, 1));
    Ok(w.clone() * &w / n)
}
