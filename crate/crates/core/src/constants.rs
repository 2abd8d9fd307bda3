//! Transcendental constants as exact-rational enclosures.
//!
//! Rate-constant signs downstream must not flip on constant error, so π²,
//! log 2 and log β are produced as intervals [lo, hi] of exact rationals
//! whose width is provably below the requested tolerance:
//!
//!   * π = 16·atan(1/5) − 4·atan(1/239) (Machin), each arctangent summed as
//!     an alternating series whose truncation error is bounded by the first
//!     omitted term;
//!   * log 2 = 2·atanh(1/3) and log(p/q) = e·log 2 + 2·atanh((z−1)/(z+1))
//!     after scaling z = (p/q)·2^{−e} into [3/4, 3/2], with the geometric
//!     tail bound u^{2m+3}/((2m+3)(1−u²));
//!   * √5 (for the golden-ratio domain bound) by integer square root.
//!
//! All interval endpoints are exact rationals; no floating point enters
//! until a caller asks for a midpoint.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{to_decimal_string, ExactRational};

/// A closed interval of exact rationals known to contain the target value.
#[derive(Debug, Clone, PartialEq)]
pub struct Enclosure {
    pub lo: ExactRational,
    pub hi: ExactRational,
}

impl Enclosure {
    pub fn new(lo: ExactRational, hi: ExactRational) -> Self {
        assert!(lo <= hi, "enclosure endpoints out of order");
        Self { lo, hi }
    }

    pub fn point(v: ExactRational) -> Self {
        Self {
            lo: v.clone(),
            hi: v,
        }
    }

    pub fn width(&self) -> ExactRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> ExactRational {
        (&self.lo + &self.hi) / ExactRational::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        self.midpoint()
            .to_f64()
            .expect("enclosure midpoint fits f64")
    }

    pub fn contains(&self, v: &ExactRational) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    /// Decimal rendering of the midpoint, for reports.
    pub fn decimal(&self, digits: usize) -> String {
        to_decimal_string(&self.midpoint(), digits)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.lo + &other.lo, &self.hi + &other.hi)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.lo - &other.hi, &self.hi - &other.lo)
    }

    pub fn neg(&self) -> Self {
        Self::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        Self::new(lo, hi)
    }

    /// Division by an interval strictly above zero.
    pub fn div(&self, other: &Self) -> Self {
        assert!(
            other.lo.is_positive(),
            "enclosure division requires a positive divisor"
        );
        let candidates = [
            &self.lo / &other.lo,
            &self.lo / &other.hi,
            &self.hi / &other.lo,
            &self.hi / &other.hi,
        ];
        let lo = candidates.iter().min().unwrap().clone();
        let hi = candidates.iter().max().unwrap().clone();
        Self::new(lo, hi)
    }

    pub fn scale(&self, k: &ExactRational) -> Self {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Self::new(a, b)
        } else {
            Self::new(b, a)
        }
    }
}

fn pow10(digits: usize) -> BigInt {
    BigInt::from(10u32).pow(digits as u32)
}

fn eps_rational(digits: usize) -> ExactRational {
    ExactRational::new(BigInt::one(), pow10(digits))
}

/// atan(1/k) for integer k ≥ 2, to within `eps`, by the alternating series
/// Σ (−1)^j / ((2j+1) k^{2j+1}). Consecutive partial sums bracket the limit.
fn atan_inv(k: u64, eps: &ExactRational) -> Enclosure {
    let k2 = ExactRational::from_integer(BigInt::from(k * k));
    let mut term = ExactRational::new(BigInt::one(), BigInt::from(k));
    let mut power = term.clone();
    let mut sum = ExactRational::zero();
    let mut j = 0u32;
    loop {
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        power /= &k2;
        let next = &power / ExactRational::from_integer(BigInt::from(2 * j + 3));
        if &next <= eps {
            // Last added term had sign (−1)^j; the remainder has the
            // opposite sign and magnitude ≤ next.
            return if j % 2 == 0 {
                Enclosure::new(&sum - &next, sum)
            } else {
                Enclosure::new(sum.clone(), sum + next)
            };
        }
        term = next;
        j += 1;
    }
}

/// atanh(u) for rational u ∈ (0, 1), to within the geometric tail bound.
fn atanh_small(u: &ExactRational, eps: &ExactRational) -> Enclosure {
    assert!(u.is_positive() && u < &ExactRational::one());
    let u2 = u * u;
    let one_minus_u2 = ExactRational::one() - &u2;
    let mut power = u.clone();
    let mut sum = ExactRational::zero();
    let mut j = 0u32;
    loop {
        sum += &power / ExactRational::from_integer(BigInt::from(2 * j + 1));
        power *= &u2;
        // Tail after the term just added: Σ_{i>j} u^{2i+1}/(2i+1)
        //   ≤ u^{2j+3} / ((2j+3)(1−u²)).
        let bound = &power / (ExactRational::from_integer(BigInt::from(2 * j + 3)) * &one_minus_u2);
        if &bound <= eps {
            return Enclosure::new(sum.clone(), sum + bound);
        }
        j += 1;
    }
}

/// π to within 10^{−digits}, by Machin's formula.
pub fn pi(digits: usize) -> Enclosure {
    let eps = eps_rational(digits + 4);
    let a5 = atan_inv(5, &eps);
    let a239 = atan_inv(239, &eps);
    a5.scale(&ExactRational::from_integer(BigInt::from(16)))
        .sub(&a239.scale(&ExactRational::from_integer(BigInt::from(4))))
}

/// π² to within roughly 10^{−digits}.
pub fn pi_squared(digits: usize) -> Enclosure {
    let p = pi(digits + 2);
    p.mul(&p)
}

/// log 2 = 2·atanh(1/3).
pub fn ln2(digits: usize) -> Enclosure {
    let eps = eps_rational(digits + 4);
    let third = ExactRational::new(BigInt::one(), BigInt::from(3));
    atanh_small(&third, &eps).scale(&ExactRational::from_integer(BigInt::from(2)))
}

/// Natural log of a positive rational, to within roughly 10^{−digits}.
///
/// Scales x by a power of two into [3/4, 3/2], where the atanh argument
/// (z−1)/(z+1) lies in [−1/7, 1/5] and the series converges fast.
pub fn ln_rational(x: &ExactRational, digits: usize) -> Result<Enclosure> {
    if !x.is_positive() {
        return Err(Error::Domain(format!(
            "log of non-positive rational {x} is undefined"
        )));
    }
    let eps = eps_rational(digits + 4);
    let one = ExactRational::one();
    let two = ExactRational::from_integer(BigInt::from(2));
    let hi_band = ExactRational::new(BigInt::from(3), BigInt::from(2));
    let lo_band = ExactRational::new(BigInt::from(3), BigInt::from(4));
    let mut z = x.clone();
    let mut e: i64 = 0;
    while z > hi_band {
        z /= &two;
        e += 1;
    }
    while z < lo_band {
        z *= &two;
        e -= 1;
    }
    let u = (&z - &one) / (&z + &one);
    let series = if u.is_zero() {
        Enclosure::point(ExactRational::zero())
    } else if u.is_positive() {
        atanh_small(&u, &eps).scale(&two)
    } else {
        atanh_small(&(-u), &eps).scale(&two).neg()
    };
    if e == 0 {
        return Ok(series);
    }
    let l2 = ln2(digits + 4);
    Ok(series.add(&l2.scale(&ExactRational::from_integer(BigInt::from(e)))))
}

/// √5 to within 10^{−digits}, by integer square root of 5·10^{2d}.
pub fn sqrt5(digits: usize) -> Enclosure {
    let scale = pow10(digits);
    let n = (BigInt::from(5) * &scale * &scale).sqrt();
    let lo = ExactRational::new(n.clone(), scale.clone());
    let hi = ExactRational::new(n + BigInt::one(), scale);
    Enclosure::new(lo, hi)
}

/// 2·log((1+√5)/2): the lower edge of the Lyapunov-spectrum domain.
pub fn golden_gamma_min(digits: usize) -> Enclosure {
    let s5 = sqrt5(digits + 4);
    let two = ExactRational::from_integer(BigInt::from(2));
    let g_lo = (ExactRational::one() + &s5.lo) / &two;
    let g_hi = (ExactRational::one() + &s5.hi) / &two;
    let ln_lo = ln_rational(&g_lo, digits + 4).expect("golden ratio is positive");
    let ln_hi = ln_rational(&g_hi, digits + 4).expect("golden ratio is positive");
    Enclosure::new(&ln_lo.lo * &two, &ln_hi.hi * &two)
}

/// π²/(6·log 2): −P′(1), also the critical log β where the Lochs constant
/// reaches 1.
pub fn critical_log_beta(digits: usize) -> Enclosure {
    let num = pi_squared(digits + 4);
    let den = ln2(digits + 4).scale(&ExactRational::from_integer(BigInt::from(6)));
    num.div(&den)
}

/// Default working precision inherited by every constant downstream.
pub const DEFAULT_DIGITS: usize = 64;
