//! Exact rationals used for distances, probabilities and distance parameters.

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = Ratio<i64>;

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// Parses `"3/8"`, `"0.25"`, `"1"` or `"1e-1"`-free decimal strings into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let s = text.trim();
    let bad = |msg: &str| Error::InvalidParameters(format!("cannot parse {s:?} as a rational: {msg}"));
    if s.is_empty() {
        return Err(bad("empty"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let den: i64 = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if den == 0 {
            return Err(bad("zero denominator"));
        }
        return Ok(Rational::new(num, den));
    }
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad("no digits"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad("unexpected character"));
    }
    if frac_part.len() > 15 {
        return Err(bad("too many decimal places"));
    }
    let den = 10i64.pow(frac_part.len() as u32);
    let int_val: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| bad("overflow"))? };
    let frac_val: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| bad("overflow"))? };
    let num = int_val.checked_mul(den).and_then(|v| v.checked_add(frac_val)).ok_or_else(|| bad("overflow"))?;
    Ok(Rational::new(if negative { -num } else { num }, den))
}

/// `"num/den"`, always with an explicit denominator.
pub fn format_exact(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Decimal rendering to six places.
pub fn format_decimal(r: &Rational) -> String {
    format!("{:.6}", to_f64(r))
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Smallest integer `>= r`; `r` must be non-negative.
pub fn ceil_u64(r: &Rational) -> u64 {
    let c = r.ceil();
    debug_assert!(*c.numer() >= 0);
    c.to_integer() as u64
}

pub fn check_epsilon(eps: &Rational) -> Result<()> {
    if *eps <= Rational::zero() || *eps >= Rational::one() {
        return Err(Error::InvalidEpsilon(format_exact(eps)));
    }
    Ok(())
}

/// JSON rendering of an exact value: `{"exact": "1/4", "decimal": "0.250000"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExactValue {
    pub exact: String,
    pub decimal: String,
}

impl From<&Rational> for ExactValue {
    fn from(r: &Rational) -> Self {
        ExactValue { exact: format_exact(r), decimal: format_decimal(r) }
    }
}

impl From<Rational> for ExactValue {
    fn from(r: Rational) -> Self {
        ExactValue::from(&r)
    }
}
