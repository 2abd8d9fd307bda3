//! β-expansions over exact rationals.
//!
//! For β > 1 the transformation T(x) = βx − [βx] generates digits
//! ε_{k+1} = [β·T^k x] ∈ {0, …, ⌈β⌉−1}, giving x = Σ ε_k β^{−k}. Alongside
//! the digits we carry the follower recursion
//!
//!   r_0 = 1,   r_{k+1} = min(β·r_k − ε_{k+1}, 1),
//!
//! which yields the exact depth-n cylinder: the set of points sharing the
//! first n digits of x is [ω_n, ω_n + r_n·β^{−n}) with ω_n = Σ_{k≤n} ε_k β^{−k}.
//! A digit string is admissible precisely when every r_k stays positive, so
//! the same recursion drives exhaustive admissible-word counting.

use num_bigint::{BigInt, BigUint};
use num_traits::{Euclid, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{approx_log2, ceil_ratio, floor_ratio, ExactRational};

/// A β-orbit prefix: digits, exact orbit values, and follower lengths.
#[derive(Debug, Clone)]
pub struct BetaOrbit {
    pub beta: ExactRational,
    pub x: ExactRational,
    /// ε_1..ε_n.
    pub digits: Vec<BigUint>,
    /// T^k x for k = 0..=n (orbit[0] = x).
    pub orbit: Vec<ExactRational>,
    /// r_0..r_n with r_0 = 1.
    pub followers: Vec<ExactRational>,
}

impl BetaOrbit {
    pub fn depth(&self) -> usize {
        self.digits.len()
    }

    /// ω_m = Σ_{k≤m} ε_k β^{−k}, reconstructed exactly from the orbit:
    /// ω_m = x − T^m x · β^{−m}.
    pub fn omega(&self, m: usize) -> ExactRational {
        assert!(m <= self.depth());
        let beta_pow = pow_rational(&self.beta, m);
        &self.x - &self.orbit[m] / &beta_pow
    }

    /// First index k ≥ 1 with T^k x = 0, if the expansion terminates within
    /// the computed depth.
    pub fn terminated_at(&self) -> Option<usize> {
        self.orbit
            .iter()
            .skip(1)
            .position(|v| v.is_zero())
            .map(|i| i + 1)
    }
}

/// The interval of points sharing a digit prefix: [left, left + length).
#[derive(Debug, Clone)]
pub struct BetaCylinder {
    pub left: ExactRational,
    pub length: ExactRational,
    pub depth: usize,
}

impl BetaCylinder {
    pub fn right(&self) -> ExactRational {
        &self.left + &self.length
    }

    pub fn contains(&self, x: &ExactRational) -> bool {
        &self.left <= x && *x < self.right()
    }
}

pub(crate) fn pow_rational(beta: &ExactRational, n: usize) -> ExactRational {
    let num = beta.numer().pow(n as u32);
    let den = beta.denom().pow(n as u32);
    ExactRational::new(num, den)
}

fn check_beta(beta: &ExactRational) -> Result<()> {
    if beta <= &ExactRational::one() {
        return Err(Error::Domain(format!("beta = {beta} must exceed 1")));
    }
    Ok(())
}

/// Compute the first n digits of x in base β with orbit and followers.
pub fn beta_digits(x: &ExactRational, beta: &ExactRational, n: usize) -> Result<BetaOrbit> {
    check_beta(beta)?;
    if x.is_negative() || x >= &ExactRational::one() {
        return Err(Error::Domain(format!("x = {x} must lie in [0,1)")));
    }
    if n == 0 {
        return Err(Error::Domain("depth n must be at least 1".into()));
    }
    let digit_cap = ceil_ratio(beta) - BigInt::one();
    let mut digits = Vec::with_capacity(n);
    let mut orbit = Vec::with_capacity(n + 1);
    let mut followers = Vec::with_capacity(n + 1);
    orbit.push(x.clone());
    followers.push(ExactRational::one());
    for k in 0..n {
        let scaled = beta * &orbit[k];
        let digit = floor_ratio(&scaled);
        debug_assert!(digit >= BigInt::zero() && digit <= digit_cap);
        let next = &scaled - ExactRational::from_integer(digit.clone());
        debug_assert!(!next.is_negative() && next < ExactRational::one());
        let r_next = {
            let grown = beta * &followers[k] - ExactRational::from_integer(digit.clone());
            if grown > ExactRational::one() {
                ExactRational::one()
            } else {
                grown
            }
        };
        debug_assert!(r_next.is_positive());
        digits.push(digit.to_biguint().expect("digits are non-negative"));
        orbit.push(next);
        followers.push(r_next);
    }
    Ok(BetaOrbit {
        beta: beta.clone(),
        x: x.clone(),
        digits,
        orbit,
        followers,
    })
}

/// The cylinder of the orbit's full digit prefix.
pub fn cylinder(orbit: &BetaOrbit) -> BetaCylinder {
    cylinder_at(orbit, orbit.depth()).expect("full depth is always available")
}

/// The cylinder of the first m digits, m ≤ depth.
pub fn cylinder_at(orbit: &BetaOrbit, m: usize) -> Result<BetaCylinder> {
    if m > orbit.depth() {
        return Err(Error::Range(format!(
            "cylinder depth {m} exceeds computed depth {}",
            orbit.depth()
        )));
    }
    let beta_pow = pow_rational(&orbit.beta, m);
    let length = &orbit.followers[m] / &beta_pow;
    let left = orbit.omega(m);
    Ok(BetaCylinder {
        left,
        length,
        depth: m,
    })
}

/// Length of the zero run immediately after position n: the count of
/// consecutive zero digits ε_{n+1}, ε_{n+2}, … before the first nonzero.
///
/// The orbit must have been computed beyond position n; if every digit in
/// the window is zero the run cannot be resolved and an error says whether
/// that is because the expansion terminated (infinite run) or because the
/// window is too short.
pub fn zero_run(orbit: &BetaOrbit, n: usize) -> Result<usize> {
    if n >= orbit.depth() {
        return Err(Error::Range(format!(
            "zero run at position {n} needs digits beyond it; depth is {}",
            orbit.depth()
        )));
    }
    for j in n..orbit.depth() {
        if !orbit.digits[j].is_zero() {
            return Ok(j - n);
        }
    }
    if orbit.orbit[orbit.depth()].is_zero() {
        Err(Error::Window(format!(
            "expansion terminated at or before depth {}; the zero run after position {n} is infinite",
            orbit.depth()
        )))
    } else {
        Err(Error::Window(format!(
            "all digits in ({n}, {}] are zero; extend the window",
            orbit.depth()
        )))
    }
}

/// Count admissible depth-n digit strings by depth-first subdivision via the
/// follower recursion (a word is admissible iff r stays positive throughout).
pub fn count_admissible(beta: &ExactRational, n: usize) -> Result<u64> {
    check_beta(beta)?;
    if n == 0 {
        return Ok(1);
    }
    if n > 14 {
        return Err(Error::Resource(format!(
            "depth {n} exceeds the exhaustive-enumeration cap of 14"
        )));
    }
    // Counting bound: at most β^{n+1}/(β−1) words exist; refuse enumerations
    // that cannot finish at desk scale.
    let log2_count = approx_log2(beta) * (n as f64 + 1.0);
    if log2_count > 27.0 {
        return Err(Error::Resource(format!(
            "beta = {beta}, n = {n} admits ~2^{log2_count:.0} words; too many to enumerate"
        )));
    }
    fn recurse(beta: &ExactRational, r: &ExactRational, remaining: usize) -> u64 {
        if remaining == 0 {
            return 1;
        }
        let scaled = beta * r;
        // Admissible digits d are exactly the integers 0 ≤ d < β·r.
        let top = ceil_ratio(&scaled) - BigInt::one();
        let top = top.to_u64().expect("digit cap fits u64 under the budget");
        let mut total = 0u64;
        for d in 0..=top {
            let grown = &scaled - ExactRational::from_integer(BigInt::from(d));
            debug_assert!(grown.is_positive());
            let r_next = if grown > ExactRational::one() {
                ExactRational::one()
            } else {
                grown
            };
            total += recurse(beta, &r_next, remaining - 1);
        }
        total
    }
    Ok(recurse(beta, &ExactRational::one(), n))
}

/// Exact digit engine over raw integers, for Monte Carlo hot paths.
///
/// For x = xnum/xden and β = bnum/bden the orbit value T^k x has exact
/// denominator xden·bden^k; tracking only its numerator turns each step into
/// two big-integer multiplications and one division. The depth-n cylinder
/// over the common denominator W = xden·bnum^n has
///
///   left  = (xnum·bnum^n − onum) / W,
///   right = left + rnum·xden / W,
///
/// because orbit_n·β^{−n} = onum/(xden·bnum^n) (the bden powers cancel) and
/// r_n·β^{−n} = rnum/bnum^n.
#[derive(Debug, Clone)]
pub(crate) struct DigitEngine {
    bnum: BigInt,
    bden: BigInt,
    xnum: BigInt,
    xden: BigInt,
    /// Numerator of T^k x over xden·bden^k.
    onum: BigInt,
    /// xden·bden^{k+1} at the start of each step (denominator after stepping).
    oden_next: BigInt,
    /// Numerator of r_k over bden^k.
    rnum: BigInt,
    rden_next: BigInt,
    /// bnum^k.
    bnum_pow: BigInt,
    depth: usize,
}

impl DigitEngine {
    pub(crate) fn new(x: &ExactRational, beta: &ExactRational) -> Self {
        let bnum = beta.numer().clone();
        let bden = beta.denom().clone();
        let xnum = x.numer().clone();
        let xden = x.denom().clone();
        Self {
            oden_next: &xden * &bden,
            rden_next: bden.clone(),
            onum: xnum.clone(),
            rnum: BigInt::one(),
            bnum_pow: BigInt::one(),
            bnum,
            bden,
            xnum,
            xden,
            depth: 0,
        }
    }

    pub(crate) fn depth(&self) -> usize {
        self.depth
    }

    pub(crate) fn orbit_is_zero(&self) -> bool {
        self.onum.is_zero()
    }

    /// Advance one digit; returns ε_{k+1}.
    pub(crate) fn step(&mut self) -> BigInt {
        let scaled = &self.bnum * &self.onum;
        let digit = scaled.div_euclid(&self.oden_next);
        self.onum = scaled - &digit * &self.oden_next;
        let r_scaled = &self.bnum * &self.rnum - &digit * &self.rden_next;
        self.rnum = if r_scaled > self.rden_next {
            self.rden_next.clone()
        } else {
            r_scaled
        };
        self.oden_next *= &self.bden;
        self.rden_next *= &self.bden;
        self.bnum_pow *= &self.bnum;
        self.depth += 1;
        digit
    }

    /// Exact cylinder numerators at the current depth over W = xden·bnum^n:
    /// (left numerator, right numerator, W). The orbit numerator over W is
    /// also returned since x − ω_n = onum/W.
    pub(crate) fn cylinder_numerators(&self) -> (BigInt, BigInt, BigInt, BigInt) {
        let w = &self.xden * &self.bnum_pow;
        let left = &self.xnum * &self.bnum_pow - &self.onum;
        let right = &left + &self.rnum * &self.xden;
        (left, right, w, self.onum.clone())
    }
}
