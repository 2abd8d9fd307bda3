//! Exact rational arithmetic and the precision policy for sampled points.
//!
//! Every real quantity in this crate — sampled points, β, orbit values,
//! cylinder endpoints, convergents — is an [`ExactRational`]. Arithmetic is
//! exact (no rounding ever), so interval-containment tests downstream are
//! decided by integer comparisons, not by floating-point luck.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational: normalized, positive denominator.
/// (`num_rational::BigRational` guarantees both invariants.)
pub type ExactRational = BigRational;

/// Parse a finite decimal string (optional sign, optional fractional part)
/// into the exact rational numerator/10^k.
///
/// Errors name the offending character position (0-based).
pub fn rational_from_decimal(s: &str) -> Result<ExactRational> {
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(Error::Parse("empty decimal string".into()));
    }
    let mut pos = 0usize;
    let negative = match bytes[0] {
        b'+' => {
            pos = 1;
            false
        }
        b'-' => {
            pos = 1;
            true
        }
        _ => false,
    };
    let int_start = pos;
    while pos < bytes.len() && bytes[pos].is_ascii_digit() {
        pos += 1;
    }
    if pos == int_start {
        return Err(Error::Parse(format!(
            "expected digit at position {pos} in {s:?}"
        )));
    }
    let int_part = &s[int_start..pos];
    let mut frac_part = "";
    if pos < bytes.len() {
        if bytes[pos] != b'.' {
            return Err(Error::Parse(format!(
                "unexpected character {:?} at position {pos} in {s:?}",
                bytes[pos] as char
            )));
        }
        pos += 1;
        let frac_start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if pos == frac_start {
            return Err(Error::Parse(format!(
                "expected digit after decimal point at position {pos} in {s:?}"
            )));
        }
        frac_part = &s[frac_start..pos];
        if pos < bytes.len() {
            return Err(Error::Parse(format!(
                "unexpected character {:?} at position {pos} in {s:?}",
                bytes[pos] as char
            )));
        }
    }
    let digits: String = format!("{int_part}{frac_part}");
    let numerator =
        BigUint::parse_bytes(digits.as_bytes(), 10).expect("digit string was validated above");
    let mut numerator = BigInt::from_biguint(Sign::Plus, numerator);
    if negative {
        numerator = -numerator;
    }
    let denominator = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(BigRational::new(numerator, denominator))
}

/// Exact floor: the greatest integer ≤ x.
pub fn floor_ratio(x: &ExactRational) -> BigInt {
    x.floor().to_integer()
}

/// Exact ceiling: the least integer ≥ x.
pub fn ceil_ratio(x: &ExactRational) -> BigInt {
    x.ceil().to_integer()
}

/// Render x as a plain decimal string with `digits` fractional digits,
/// truncated toward zero (exact prefix of the decimal expansion).
pub fn to_decimal_string(x: &ExactRational, digits: usize) -> String {
    let negative = x.is_negative();
    let abs = x.abs();
    let int = abs.floor().to_integer();
    let frac = &abs - BigRational::from_integer(int.clone());
    let scaled = (&frac * BigRational::from_integer(BigInt::from(10u32).pow(digits as u32)))
        .floor()
        .to_integer();
    let mut frac_digits = scaled.to_string();
    while frac_digits.len() < digits {
        frac_digits.insert(0, '0');
    }
    let sign = if negative { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac_digits}")
    }
}

/// Approximate log2 of a positive rational, for budget sizing only.
/// Exact checks elsewhere never rely on this value.
pub fn approx_log2(x: &ExactRational) -> f64 {
    assert!(x.is_positive(), "approx_log2 needs a positive rational");
    match x.to_f64() {
        Some(v) if v.is_finite() && v > 0.0 => v.log2(),
        _ => {
            let num_bits = x.numer().bits() as f64;
            let den_bits = x.denom().bits() as f64;
            num_bits - den_bits
        }
    }
}

/// Precision budget for sampled points: how many random bits a sample
/// carries and how many must remain unconsumed before an answer is trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PrecisionPolicy {
    pub input_bits: usize,
    pub guard_bits: usize,
}

impl PrecisionPolicy {
    pub fn new(input_bits: usize, guard_bits: usize) -> Result<Self> {
        if guard_bits < 64 {
            return Err(Error::Plan(format!(
                "guard_bits = {guard_bits} < 64 minimum"
            )));
        }
        if input_bits < guard_bits {
            return Err(Error::Plan(format!(
                "input_bits = {input_bits} < guard_bits = {guard_bits}"
            )));
        }
        Ok(Self {
            input_bits,
            guard_bits,
        })
    }

    /// Default sizing for expansions to depth `n_max` in base β:
    /// ⌈n·log₂β⌉ + 256 input bits, 256 guard bits.
    pub fn default_for(beta: &ExactRational, n_max: usize) -> Self {
        let bits = (n_max as f64 * approx_log2(beta)).ceil().max(0.0) as usize;
        Self {
            input_bits: bits + 256,
            guard_bits: 256,
        }
    }

    /// Exact budget check for depth n in base β = B/C:
    /// n·log₂β + guard_bits ≤ input_bits, i.e. B^n·2^guard ≤ C^n·2^input.
    pub fn allows_depth(&self, beta: &ExactRational, n: usize) -> bool {
        let b = beta.numer().magnitude();
        let c = beta.denom().magnitude();
        let lhs = b.pow(n as u32) << self.guard_bits;
        let rhs = c.pow(n as u32) << self.input_bits;
        lhs <= rhs
    }
}

/// Convenience constructors used across tests and the CLI.
pub fn ratio(n: i64, d: i64) -> ExactRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> ExactRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn rational_is_zero(x: &ExactRational) -> bool {
    x.is_zero()
}

pub fn one() -> ExactRational {
    BigRational::one()
}
