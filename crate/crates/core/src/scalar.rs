//! Number types the evaluators are generic over.
//!
//! * `f64` for fast evaluation,
//! * [`LogWeight`] for partition functions whose magnitude leaves the `f64` range,
//! * [`Surd`] for exact arithmetic in a quadratic field `Q(sqrt(r))`, which is
//!   closed under every operation the reductions need when the inputs are rational.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A commutative semiring element usable as a configuration weight.
pub trait Weight: Clone + fmt::Debug + Add<Output = Self> + Mul<Output = Self> {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_positive(&self) -> bool;
}

/// A weight that also supports the field operations and square roots
/// used by the reductions.
pub trait Scalar:
    Weight + PartialOrd + Sub<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn from_ratio(numer: i64, denom: i64) -> Self;

    /// Square root, or `None` when it is not representable in this number type.
    fn sqrt(&self) -> Option<Self>;

    fn to_f64(&self) -> f64;

    fn powi(&self, exp: i64) -> Self {
        let mut base = if exp < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = exp.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_positive(&self) -> bool {
        *self > 0.0 && self.is_finite()
    }
}

impl Scalar for f64 {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        numer as f64 / denom as f64
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn powi(&self, exp: i64) -> Self {
        match i32::try_from(exp) {
            Ok(e) => f64::powi(*self, e),
            Err(_) => self.powf(exp as f64),
        }
    }
}

/// A non-negative real stored by its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub fn from_value(x: f64) -> Self {
        LogWeight(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }
}

impl Add for LogWeight {
    type Output = LogWeight;
    fn add(self, rhs: LogWeight) -> LogWeight {
        let (hi, lo) = if self.0 >= rhs.0 {
            (self.0, rhs.0)
        } else {
            (rhs.0, self.0)
        };
        if hi == f64::NEG_INFINITY {
            return LogWeight(hi);
        }
        LogWeight(hi + (lo - hi).exp().ln_1p())
    }
}

impl Mul for LogWeight {
    type Output = LogWeight;
    #[allow(clippy::suspicious_arithmetic_impl)] // product of weights is a sum of logs
    fn mul(self, rhs: LogWeight) -> LogWeight {
        LogWeight(self.0 + rhs.0)
    }
}

impl Weight for LogWeight {
    fn zero() -> Self {
        LogWeight(f64::NEG_INFINITY)
    }
    fn one() -> Self {
        LogWeight(0.0)
    }
    fn is_positive(&self) -> bool {
        self.0.is_finite()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Radicand {
    /// No irrational part has been introduced yet.
    None,
    /// Square-free integer `r > 1`.
    Root(BigInt),
    /// Two different quadratic fields were mixed; the value is meaningless.
    Conflict,
}

/// Exact element `a + b * sqrt(r)` of a quadratic field over the rationals.
///
/// `r` is a canonical square-free integer fixed by the first irrational square
/// root taken. Mixing elements of two different fields poisons the result,
/// which [`Surd::check`] reports.
#[derive(Clone, Debug)]
pub struct Surd {
    rational: BigRational,
    irrational: BigRational,
    radicand: Radicand,
}

impl Surd {
    pub fn from_rational(q: BigRational) -> Self {
        Surd {
            rational: q,
            irrational: BigRational::zero(),
            radicand: Radicand::None,
        }
    }

    pub fn from_integer(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(n.into()))
    }

    /// Parses `"3"`, `"-1.25"`, `"2.5e-3"` or `"7/11"` exactly.
    pub fn parse(text: &str) -> Result<Self> {
        parse_rational(text).map(Self::from_rational)
    }

    /// Exact rational equal to the shortest decimal that round-trips `x`.
    pub fn from_f64_decimal(x: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::domain(format!("{x} is not a finite number")));
        }
        Self::parse(&format!("{x}"))
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.rational
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.irrational
    }

    pub fn radicand(&self) -> Option<&BigInt> {
        match &self.radicand {
            Radicand::Root(r) if !self.irrational.is_zero() => Some(r),
            _ => None,
        }
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero() && self.radicand != Radicand::Conflict
    }

    /// Fails if the value was produced by mixing incompatible radicands.
    pub fn check(&self) -> Result<()> {
        if self.radicand == Radicand::Conflict {
            Err(Error::domain(
                "exact mode needs two different square roots; not representable in one quadratic field",
            ))
        } else {
            Ok(())
        }
    }

    fn effective_radicand(&self) -> Radicand {
        match &self.radicand {
            Radicand::Root(_) if self.irrational.is_zero() => Radicand::None,
            other => other.clone(),
        }
    }

    fn merged(a: &Surd, b: &Surd) -> Radicand {
        match (a.effective_radicand(), b.effective_radicand()) {
            (Radicand::Conflict, _) | (_, Radicand::Conflict) => Radicand::Conflict,
            (Radicand::None, other) | (other, Radicand::None) => other,
            (Radicand::Root(x), Radicand::Root(y)) => {
                if x == y {
                    Radicand::Root(x)
                } else {
                    Radicand::Conflict
                }
            }
        }
    }

    fn radicand_rational(r: &Radicand) -> BigRational {
        match r {
            Radicand::Root(n) => BigRational::from_integer(n.clone()),
            _ => BigRational::zero(),
        }
    }

    /// Sign of the exact value: -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        let sa = rational_sign(&self.rational);
        let sb = match self.effective_radicand() {
            Radicand::Root(_) => rational_sign(&self.irrational),
            _ => 0,
        };
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        let s = Self::radicand_rational(&self.radicand);
        let a2 = &self.rational * &self.rational;
        let b2s = &self.irrational * &self.irrational * s;
        match a2.cmp(&b2s) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => 0,
        }
    }

    fn conjugate(&self) -> Surd {
        Surd {
            rational: self.rational.clone(),
            irrational: -self.irrational.clone(),
            radicand: self.radicand.clone(),
        }
    }

    fn recip(&self) -> Surd {
        let s = Self::radicand_rational(&self.effective_radicand());
        let norm = &self.rational * &self.rational - &self.irrational * &self.irrational * s;
        assert!(!norm.is_zero(), "division by zero in exact arithmetic");
        let c = self.conjugate();
        Surd {
            rational: c.rational / &norm,
            irrational: c.irrational / &norm,
            radicand: c.radicand,
        }
    }
}

fn rational_sign(q: &BigRational) -> i32 {
    if q.is_positive() {
        1
    } else if q.is_negative() {
        -1
    } else {
        0
    }
}

/// Splits `m > 0` into `(k, r)` with `m = k^2 * r`.
///
/// Trial division removes square factors of primes below 10^5; a remaining
/// cofactor is folded only when it is itself a perfect square.
fn square_free_split(m: &BigInt) -> (BigInt, BigInt) {
    let mut rest = m.clone();
    let mut k = BigInt::one();
    let mut r = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(100_000u32);
    while &p * &p <= rest && p < limit {
        let mut count = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            count += 1;
        }
        for _ in 0..count / 2 {
            k *= &p;
        }
        if count % 2 == 1 {
            r *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    let root = rest.sqrt();
    if &root * &root == rest {
        k *= root;
    } else {
        r *= rest;
    }
    (k, r)
}

impl PartialEq for Surd {
    fn eq(&self, other: &Self) -> bool {
        if self.radicand == Radicand::Conflict || other.radicand == Radicand::Conflict {
            return false;
        }
        (self.clone() - other.clone()).signum() == 0
    }
}

impl PartialOrd for Surd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let diff = self.clone() - other.clone();
        if diff.radicand == Radicand::Conflict {
            return None;
        }
        Some(diff.signum().cmp(&0))
    }
}

impl Add for Surd {
    type Output = Surd;
    fn add(self, rhs: Surd) -> Surd {
        let radicand = Surd::merged(&self, &rhs);
        Surd {
            rational: self.rational + rhs.rational,
            irrational: self.irrational + rhs.irrational,
            radicand,
        }
    }
}

impl Sub for Surd {
    type Output = Surd;
    fn sub(self, rhs: Surd) -> Surd {
        self + (-rhs)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            rational: -self.rational,
            irrational: -self.irrational,
            radicand: self.radicand,
        }
    }
}

impl Mul for Surd {
    type Output = Surd;
    fn mul(self, rhs: Surd) -> Surd {
        let radicand = Surd::merged(&self, &rhs);
        if self.irrational.is_zero() && rhs.irrational.is_zero() {
            return Surd {
                rational: self.rational * rhs.rational,
                irrational: BigRational::zero(),
                radicand,
            };
        }
        let s = Surd::radicand_rational(&radicand);
        let rational = &self.rational * &rhs.rational + &self.irrational * &rhs.irrational * s;
        let irrational = &self.rational * &rhs.irrational + &self.irrational * &rhs.rational;
        Surd {
            rational,
            irrational,
            radicand,
        }
    }
}

impl Div for Surd {
    type Output = Surd;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Surd) -> Surd {
        self * rhs.recip()
    }
}

impl Weight for Surd {
    fn zero() -> Self {
        Surd::from_integer(0)
    }
    fn one() -> Self {
        Surd::from_integer(1)
    }
    fn is_positive(&self) -> bool {
        self.radicand != Radicand::Conflict && self.signum() > 0
    }
}

impl Scalar for Surd {
    fn from_ratio(numer: i64, denom: i64) -> Self {
        Surd::from_rational(BigRational::new(numer.into(), denom.into()))
    }

    fn sqrt(&self) -> Option<Self> {
        if !self.is_rational() || self.rational.is_negative() {
            return None;
        }
        if self.rational.is_zero() {
            return Some(Surd::zero());
        }
        // sqrt(n/d) = sqrt(n*d)/d
        let n = self.rational.numer();
        let d = self.rational.denom();
        let (k, r) = square_free_split(&(n * d));
        let coeff = BigRational::new(k, d.clone());
        if r.is_one() {
            Some(Surd::from_rational(coeff))
        } else {
            Some(Surd {
                rational: BigRational::zero(),
                irrational: coeff,
                radicand: Radicand::Root(r),
            })
        }
    }

    fn to_f64(&self) -> f64 {
        let a = ratio_to_f64(&self.rational);
        match self.effective_radicand() {
            Radicand::Root(r) => a + ratio_to_f64(&self.irrational) * r.to_f64().unwrap_or(f64::NAN).sqrt(),
            Radicand::None => a,
            Radicand::Conflict => f64::NAN,
        }
    }
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator or denominator beyond f64 range: compare bit lengths
        let shift = q.numer().bits() as i64 - q.denom().bits() as i64;
        let scaled = if shift > 0 {
            BigRational::new(q.numer().clone(), q.denom() << (shift as usize))
        } else {
            BigRational::new(q.numer() << ((-shift) as usize), q.denom().clone())
        };
        scaled.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
    })
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.effective_radicand() {
            Radicand::Conflict => write!(f, "<incompatible radicands>"),
            Radicand::None => write!(f, "{}", self.rational),
            Radicand::Root(r) => {
                if self.rational.is_zero() {
                    write!(f, "{}*sqrt({})", self.irrational, r)
                } else {
                    write!(f, "{} + {}*sqrt({})", self.rational, self.irrational, r)
                }
            }
        }
    }
}

/// Parses a decimal (`"-1.25"`, `"2e-3"`) or fraction (`"7/11"`) exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let text = text.trim();
    let bad = || Error::domain(format!("cannot parse {text:?} as an exact rational"));
    if let Some((n, d)) = text.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (text, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().map_err(|_| bad())?;
    let digits = digits / 10;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        q = -q;
    }
    Ok(q)
}

/// `true` iff `x` is the square of an integer.
#[cfg(test)]
fn is_perfect_square(x: &BigInt) -> bool {
    if x.sign() == num_bigint::Sign::Minus {
        return false;
    }
    let r = x.sqrt();
    &r * &r == *x
}
