//! Scalar fields used by every computation: `f64` for float mode and
//! [`Exact`] (the number field Q(√2)) for exact mode.
//!
//! Mixing modes is ruled out statically: every matrix, subspace and form is
//! generic over a single `T: Scalar`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Float => f.write_str("float"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Input(format!("unknown scalar mode `{other}`"))),
        }
    }
}

/// Field operations plus the handful of transcendental functions the chart
/// models need. Exact scalars return `None` from `exp`/`sin`/`cos`/`sqrt`
/// whenever the value leaves Q(√2).
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const MODE: Mode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_ratio(p: i64, q: i64) -> Self;
    fn sqrt2() -> Self;
    /// Float values only convert in float mode.
    fn from_f64(v: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;
    /// True zero test. Float mode compares against `0.0`; tolerance-aware
    /// decisions go through [`Scalar::negligible`].
    fn is_zero(&self) -> bool;
    fn signum(&self) -> i32;

    fn sqrt(&self) -> Option<Self>;
    fn exp(&self) -> Option<Self>;
    fn sin(&self) -> Option<Self>;
    fn cos(&self) -> Option<Self>;

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Zero test relative to `scale`. Exact scalars ignore the tolerance.
    fn negligible(&self, tol: f64, scale: f64) -> bool {
        match Self::MODE {
            Mode::Exact => self.is_zero(),
            Mode::Float => self.magnitude() <= tol * scale.max(f64::MIN_POSITIVE),
        }
    }

    fn recip(&self) -> Self {
        Self::one() / self.clone()
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        p as f64 / q as f64
    }
    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }
    fn from_f64(v: f64) -> Option<Self> {
        Some(v)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn signum(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
    fn sqrt(&self) -> Option<Self> {
        (*self >= 0.0).then(|| f64::sqrt(*self))
    }
    fn exp(&self) -> Option<Self> {
        Some(f64::exp(*self))
    }
    fn sin(&self) -> Option<Self> {
        Some(f64::sin(*self))
    }
    fn cos(&self) -> Option<Self> {
        Some(f64::cos(*self))
    }
    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Number(n) => n
                .as_f64()
                .ok_or_else(|| Error::Input(format!("bad float entry {n}"))),
            Value::String(s) => Exact::from_str(s).map(|e| e.to_f64()),
            other => Err(Error::Input(format!("bad float entry {other}"))),
        }
    }
}

/// An element `a + b·√2` of Q(√2) with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Exact {
    a: BigRational,
    b: BigRational,
}

impl Exact {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Exact { a, b }
    }

    pub fn rational(a: BigRational) -> Self {
        Exact {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn sqrt2_part(&self) -> &BigRational {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    fn conj(&self) -> Exact {
        Exact {
            a: self.a.clone(),
            b: -self.b.clone(),
        }
    }

    /// a² − 2b², the field norm.
    fn norm(&self) -> BigRational {
        &self.a * &self.a - BigRational::from_integer(2.into()) * &self.b * &self.b
    }
}

fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    (&rn * &rn == *n && &rd * &rd == *d).then(|| BigRational::new(rn, rd))
}

fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // numerator/denominator may individually overflow f64
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Input(format!("bad rational `{s}`"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s).map_err(|_| bad())?,
        )),
    }
}

impl FromStr for Exact {
    type Err = Error;

    /// Accepts `p/q`, `p`, `p/q*sqrt2`, and `p/q+r/s*sqrt2` (also with `-`).
    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(body) = s.strip_suffix("*sqrt2") else {
            return Ok(Exact::rational(parse_rational(&s)?));
        };
        // split the rational part from the sqrt2 coefficient at the last sign
        // that is not the leading one
        let split = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(i, _)| i)
            .last();
        match split {
            Some(i) => {
                let a = parse_rational(&body[..i])?;
                let b = parse_rational(body[i..].trim_start_matches('+'))?;
                Ok(Exact::new(a, b))
            }
            None => Ok(Exact::new(BigRational::zero(), parse_rational(body)?)),
        }
    }
}

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return f.write_str(&format_rational(&self.a));
        }
        if self.a.is_zero() {
            return write!(f, "{}*sqrt2", format_rational(&self.b));
        }
        let sign = if self.b.is_negative() { "" } else { "+" };
        write!(
            f,
            "{}{}{}*sqrt2",
            format_rational(&self.a),
            sign,
            format_rational(&self.b)
        )
    }
}

impl fmt::Debug for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Add for Exact {
    type Output = Exact;
    fn add(self, rhs: Exact) -> Exact {
        Exact {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
        }
    }
}

impl Sub for Exact {
    type Output = Exact;
    fn sub(self, rhs: Exact) -> Exact {
        Exact {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
        }
    }
}

impl Mul for Exact {
    type Output = Exact;
    fn mul(self, rhs: Exact) -> Exact {
        let two = BigRational::from_integer(2.into());
        Exact {
            a: &self.a * &rhs.a + two * &self.b * &rhs.b,
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Div for Exact {
    type Output = Exact;
    fn div(self, rhs: Exact) -> Exact {
        let n = rhs.norm();
        assert!(!n.is_zero(), "division by zero in Q(sqrt2)");
        let num = self * rhs.conj();
        Exact {
            a: num.a / &n,
            b: num.b / n,
        }
    }
}

impl Neg for Exact {
    type Output = Exact;
    fn neg(self) -> Exact {
        Exact {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl Scalar for Exact {
    const MODE: Mode = Mode::Exact;

    fn zero() -> Self {
        Exact::rational(BigRational::zero())
    }
    fn one() -> Self {
        Exact::rational(BigRational::one())
    }
    fn from_i64(v: i64) -> Self {
        Exact::rational(BigRational::from_integer(v.into()))
    }
    fn from_ratio(p: i64, q: i64) -> Self {
        Exact::rational(BigRational::new(p.into(), q.into()))
    }
    fn sqrt2() -> Self {
        Exact::new(BigRational::zero(), BigRational::one())
    }
    fn from_f64(_: f64) -> Option<Self> {
        None
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + std::f64::consts::SQRT_2 * rational_to_f64(&self.b)
    }
    fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }
    fn signum(&self) -> i32 {
        let sa = if self.a.is_zero() { 0 } else if self.a.is_positive() { 1 } else { -1 };
        let sb = if self.b.is_zero() { 0 } else if self.b.is_positive() { 1 } else { -1 };
        if sa == 0 || sb == 0 || sa == sb {
            return if sa != 0 { sa } else { sb };
        }
        // opposite signs: compare a² with 2b²
        let n = self.norm();
        if n.is_positive() {
            sa
        } else {
            sb
        }
    }
    fn sqrt(&self) -> Option<Self> {
        if self.signum() < 0 {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        // (c + d√2)² = c² + 2d² + 2cd·√2
        let disc = rational_sqrt(&self.norm())?;
        let two = BigRational::from_integer(2.into());
        for s in [disc.clone(), -disc] {
            let c2 = (&self.a + &s) / &two;
            if let Some(c) = rational_sqrt(&c2) {
                let candidates = if c.is_zero() {
                    let d2 = &self.a / &two;
                    rational_sqrt(&d2).map(|d| vec![Exact::new(c.clone(), d)]).unwrap_or_default()
                } else {
                    let d = &self.b / (&two * &c);
                    vec![Exact::new(c.clone(), d.clone()), Exact::new(-c.clone(), -d)]
                };
                for cand in candidates {
                    if cand.signum() >= 0 && cand.clone() * cand.clone() == *self {
                        return Some(cand);
                    }
                }
            }
        }
        None
    }
    fn exp(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn sin(&self) -> Option<Self> {
        self.is_zero().then(Self::zero)
    }
    fn cos(&self) -> Option<Self> {
        self.is_zero().then(Self::one)
    }
    fn to_json(&self) -> Value {
        Value::String(self.to_string())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => Exact::from_str(s),
            Value::Number(n) if n.is_i64() => Ok(Exact::from_i64(n.as_i64().unwrap_or(0))),
            other => Err(Error::Input(format!(
                "exact entries must be rational strings, got {other}"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(s: &str) -> Exact {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let r = Exact::sqrt2();
        assert_eq!(r.clone() * r, Exact::from_i64(2));
    }

    #[test]
    fn division_rationalizes() {
        let x = Exact::one() / Exact::sqrt2();
        assert_eq!(x, ex("1/2*sqrt2"));
        assert!((x.to_f64() - 1.0 / std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn signum_handles_mixed_signs() {
        assert_eq!(ex("3/2-1/1*sqrt2").signum(), 1); // 1.5 - 1.414
        assert_eq!(ex("1/1-1/1*sqrt2").signum(), -1);
        assert_eq!(ex("-2/1+3/2*sqrt2").signum(), 1);
        assert_eq!(Exact::zero().signum(), 0);
    }

    #[test]
    fn exact_sqrt_of_squares() {
        assert_eq!(Exact::from_ratio(9, 4).sqrt(), Some(Exact::from_ratio(3, 2)));
        assert_eq!(Exact::from_i64(2).sqrt(), Some(Exact::sqrt2()));
        assert_eq!(Exact::from_i64(8).sqrt(), Some(ex("2*sqrt2")));
        // (1 + √2)² = 3 + 2√2
        assert_eq!(ex("3/1+2/1*sqrt2").sqrt(), Some(ex("1/1+1/1*sqrt2")));
        assert_eq!(Exact::from_i64(3).sqrt(), None);
        assert_eq!(Exact::from_i64(-1).sqrt(), None);
    }

    #[test]
    fn format_parse_roundtrip() {
        for s in ["1/2", "-3/1", "0/1", "1/3*sqrt2", "-1/2-5/7*sqrt2", "4/1+1/1*sqrt2"] {
            let v = ex(s);
            assert_eq!(ex(&v.to_string()), v, "{s}");
        }
        assert_eq!(Exact::from_i64(7).to_string(), "7/1");
    }

    #[test]
    fn transcendental_only_at_zero() {
        assert_eq!(Exact::zero().exp(), Some(Exact::one()));
        assert_eq!(Exact::one().exp(), None);
        assert_eq!(Exact::zero().cos(), Some(Exact::one()));
        assert_eq!(Exact::zero().sin(), Some(Exact::zero()));
    }
}
