//! Continued fractions over exact rationals.
//!
//! The Gauss map T(x) = 1/x − [1/x] generates partial quotients
//! a_{k+1} = [1/T^k x]; on a rational x this is the Euclidean algorithm on
//! (denominator, numerator) and terminates. Convergents follow
//!
//!   p_k = a_k p_{k−1} + p_{k−2},   q_k = a_k q_{k−1} + q_{k−2},
//!
//! seeded with p_{−1}=1, q_{−1}=0, p_0=0, q_0=1, and satisfy the determinant
//! identity p_k q_{k−1} − p_{k−1} q_k = (−1)^{k−1}. The depth-m cylinder —
//! all points whose expansion opens with a_1..a_m — is the interval between
//! p_m/q_m and (p_m+p_{m−1})/(q_m+q_{m−1}), of exact length
//! 1/(q_m(q_m+q_{m−1})), oriented by the parity of m.

use num_bigint::{BigInt, BigUint};
use num_traits::{Euclid, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Partial quotients with convergents and the exact Gauss-orbit remainder.
#[derive(Debug, Clone)]
pub struct CFState {
    pub x: ExactRational,
    /// a_1..a_m.
    pub quotients: Vec<BigUint>,
    /// p_{−1}, p_0, p_1, …, p_m (index k+1 holds p_k).
    p: Vec<BigInt>,
    /// q_{−1}, q_0, q_1, …, q_m.
    q: Vec<BigInt>,
    /// T^m x as an exact rational; zero iff the expansion terminated.
    pub remainder: ExactRational,
    /// Set when the rational input's expansion terminated at depth m.
    pub exhausted: bool,
}

impl CFState {
    pub fn depth(&self) -> usize {
        self.quotients.len()
    }

    /// p_k for k ∈ [−1, m].
    pub fn p(&self, k: isize) -> &BigInt {
        &self.p[(k + 1) as usize]
    }

    /// q_k for k ∈ [−1, m].
    pub fn q(&self, k: isize) -> &BigInt {
        &self.q[(k + 1) as usize]
    }

    /// The convergent p_k/q_k for k ∈ [0, m].
    pub fn convergent(&self, k: usize) -> ExactRational {
        ExactRational::new(self.p(k as isize).clone(), self.q(k as isize).clone())
    }

    /// Reconstruct x from depth-m data: x = (p_m + p_{m−1}·t)/(q_m + q_{m−1}·t)
    /// with t the stored remainder. Exact by construction.
    pub fn reconstruct(&self) -> ExactRational {
        let m = self.depth() as isize;
        let t = &self.remainder;
        let num = ExactRational::from_integer(self.p(m).clone())
            + ExactRational::from_integer(self.p(m - 1).clone()) * t;
        let den = ExactRational::from_integer(self.q(m).clone())
            + ExactRational::from_integer(self.q(m - 1).clone()) * t;
        num / den
    }
}

/// A continued-fraction cylinder: unordered endpoint pair plus parity.
#[derive(Debug, Clone)]
pub struct CFCylinder {
    pub depth: usize,
    pub endpoint_a: ExactRational,
    pub endpoint_b: ExactRational,
    pub length: ExactRational,
}

impl CFCylinder {
    /// Closed hull (lo, hi) of the endpoint pair.
    pub fn hull(&self) -> (ExactRational, ExactRational) {
        if self.endpoint_a <= self.endpoint_b {
            (self.endpoint_a.clone(), self.endpoint_b.clone())
        } else {
            (self.endpoint_b.clone(), self.endpoint_a.clone())
        }
    }
}

/// Partial quotients of x ∈ (0,1) up to m_max, stopping early (with the
/// `exhausted` flag) when the expansion terminates.
pub fn cf_digits(x: &ExactRational, m_max: usize) -> Result<CFState> {
    if !x.is_positive() || x >= &ExactRational::one() {
        return Err(Error::Domain(format!("x = {x} must lie in (0,1)")));
    }
    let mut num = x.numer().clone();
    let mut den = x.denom().clone();
    let mut quotients = Vec::new();
    let mut p = vec![BigInt::one(), BigInt::zero()];
    let mut q = vec![BigInt::zero(), BigInt::one()];
    while quotients.len() < m_max && !num.is_zero() {
        // 1/x_k = den/num: quotient digit and Euclid step.
        let a = den.div_euclid(&num);
        let rem = den - &a * &num;
        den = num;
        num = rem;
        let k = p.len();
        let new_p = &a * &p[k - 1] + &p[k - 2];
        let new_q = &a * &q[k - 1] + &q[k - 2];
        p.push(new_p);
        q.push(new_q);
        quotients.push(a.to_biguint().expect("quotients are positive"));
    }
    let exhausted = num.is_zero();
    let remainder = if exhausted {
        ExactRational::zero()
    } else {
        ExactRational::new(num, den)
    };
    Ok(CFState {
        x: x.clone(),
        quotients,
        p,
        q,
        remainder,
        exhausted,
    })
}

/// The depth-m cylinder of the state's quotient prefix. Depth 0 is the whole
/// interval, endpoints 0/1 and 1/1, length 1 (the sentinels produce it).
pub fn cf_cylinder(state: &CFState, m: usize) -> Result<CFCylinder> {
    if m > state.depth() {
        return Err(Error::Range(format!(
            "cylinder depth {m} exceeds available quotients {}",
            state.depth()
        )));
    }
    let k = m as isize;
    let qm = state.q(k);
    let qm1 = state.q(k - 1);
    let endpoint_a = ExactRational::new(state.p(k).clone(), qm.clone());
    let endpoint_b = ExactRational::new(state.p(k) + state.p(k - 1), qm + qm1);
    let length = ExactRational::new(BigInt::one(), qm * (qm + qm1));
    debug_assert_eq!((&endpoint_a - &endpoint_b).abs(), length);
    debug_assert_eq!(endpoint_a < endpoint_b, m % 2 == 0);
    Ok(CFCylinder {
        depth: m,
        endpoint_a,
        endpoint_b,
        length,
    })
}

/// |x − p_n/q_n| exactly, asserting the two-sided Diophantine bound
/// 1/(2q_{n+1}²) ≤ |x − p_n/q_n| ≤ 1/q_n². For a terminated expansion at
/// exactly depth n the gap is 0 and the lower half (which needs q_{n+1}) is
/// vacuous.
pub fn diophantine_gap(state: &CFState, n: usize) -> Result<ExactRational> {
    let m = state.depth();
    if n > m {
        return Err(Error::Range(format!(
            "gap at depth {n} needs {n} quotients; only {m} available"
        )));
    }
    if n == m && !state.exhausted {
        return Err(Error::Range(format!(
            "gap lower bound at depth {n} needs quotient {}; raise m_max",
            n + 1
        )));
    }
    let gap = (&state.x - state.convergent(n)).abs();
    let qn = state.q(n as isize);
    let upper = ExactRational::new(BigInt::one(), qn * qn);
    assert!(gap <= upper, "Diophantine upper bound violated");
    if n < m {
        let qn1 = state.q(n as isize + 1);
        let lower = ExactRational::new(BigInt::one(), BigInt::from(2) * qn1 * qn1);
        assert!(gap >= lower, "Diophantine lower bound violated");
    } else {
        debug_assert!(gap.is_zero());
    }
    Ok(gap)
}

/// Exact partition accounting at fixed depth with quotient cutoff A: returns
/// (Σ lengths of all depth-n cylinders with digits ≤ A, defect), where
/// defect is the exact total length of everything missed. The two always add
/// to 1: cylinders of a fixed depth partition the unit interval.
///
/// The tail beyond digit A below a prefix with data (p', q', p, q) is the
/// interval between the limit endpoint p/q and the first excluded child
/// endpoint ((A+1)p+p′)/((A+1)q+q′); its exact length is
/// 1/(q·((A+1)q+q′)) by the determinant identity.
pub fn partition_check(depth: usize, cutoff: u64) -> Result<(ExactRational, ExactRational)> {
    if depth == 0 || depth > 4 {
        return Err(Error::Domain(
            "exact partition accounting supports depth 1..=4".into(),
        ));
    }
    let nodes = (cutoff as f64).powi(depth as i32);
    if nodes > 2e5 {
        return Err(Error::Resource(format!(
            "exact partition sum over ~{nodes:.0} words exceeds the budget"
        )));
    }
    fn recurse(
        p_prev: &BigInt,
        q_prev: &BigInt,
        p: &BigInt,
        q: &BigInt,
        remaining: usize,
        cutoff: u64,
        sum: &mut ExactRational,
        defect: &mut ExactRational,
    ) {
        if remaining == 0 {
            *sum += ExactRational::new(BigInt::one(), q * (q + q_prev));
            return;
        }
        for a in 1..=cutoff {
            let a = BigInt::from(a);
            let cp = &a * p + p_prev;
            let cq = &a * q + q_prev;
            recurse(p, q, &cp, &cq, remaining - 1, cutoff, sum, defect);
        }
        let a1 = BigInt::from(cutoff + 1);
        let tail_den = q * (&a1 * q + q_prev);
        *defect += ExactRational::new(BigInt::one(), tail_den);
    }
    let mut sum = ExactRational::zero();
    let mut defect = ExactRational::zero();
    recurse(
        &BigInt::one(),
        &BigInt::zero(),
        &BigInt::zero(),
        &BigInt::one(),
        depth,
        cutoff,
        &mut sum,
        &mut defect,
    );
    Ok((sum, defect))
}

/// Total length of all depth-n cylinders with digits ≤ A, as an f64 lower
/// bound computed from the exact defect tails (1 − Σ tails − float slack).
/// Integer work stays in u128; supports the depth ≤ 3, A ≤ 1000 regime.
pub fn tiling_lower_bound(depth: usize, cutoff: u64) -> Result<f64> {
    if depth == 0 || depth > 3 || cutoff == 0 || cutoff > 1000 {
        return Err(Error::Domain(
            "tiling bound supports depth 1..=3, cutoff 1..=1000".into(),
        ));
    }
    fn defect(p_prev: u128, q_prev: u128, p: u128, q: u128, remaining: usize, a_max: u128) -> f64 {
        let tail = 1.0 / ((q * ((a_max + 1) * q + q_prev)) as f64);
        if remaining == 1 {
            return tail;
        }
        let mut total = tail;
        for a in 1..=a_max {
            let cp = a * p + p_prev;
            let cq = a * q + q_prev;
            total += defect(p, q, cp, cq, remaining - 1, a_max);
        }
        total
    }
    let missing = defect(1, 0, 0, 1, depth, cutoff as u128);
    // Generous slack for the ~cutoff^2 float additions.
    Ok(1.0 - missing - 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;
    use num_traits::FromPrimitive;
    use num_traits::ToPrimitive;

    fn quotients_u64(state: &CFState) -> Vec<u64> {
        state
            .quotients
            .iter()
            .map(|a| a.to_u64().unwrap())
            .collect()
    }

    #[test]
    fn three_eighths_expansion() {
        let state = cf_digits(&ratio(3, 8), 10).unwrap();
        assert_eq!(quotients_u64(&state), vec![2, 1, 2]);
        assert!(state.exhausted);
        assert_eq!(state.convergent(1), ratio(1, 2));
        assert_eq!(state.convergent(2), ratio(1, 3));
        assert_eq!(state.convergent(3), ratio(3, 8));
        assert_eq!(state.reconstruct(), ratio(3, 8));
    }

    #[test]
    fn fibonacci_denominators() {
        // x = F_19/F_20: the quotient stream is all ones (with Euclid's
        // canonical trailing 2 at exhaustion), so truncations see only ones
        // and the q_k walk the Fibonacci numbers.
        let state = cf_digits(&ratio(4181, 6765), 10).unwrap();
        let qs = quotients_u64(&state);
        assert!(qs.iter().all(|&a| a == 1), "{qs:?}");
        assert!(!state.exhausted);
        let fib = [1u64, 2, 3, 5, 8, 13, 21, 34];
        for (k, f) in fib.iter().enumerate() {
            assert_eq!(state.q(k as isize + 1), &BigInt::from(*f));
        }
        let full = cf_digits(&ratio(4181, 6765), 30).unwrap();
        assert!(full.exhausted);
        assert_eq!(*quotients_u64(&full).last().unwrap(), 2);
        assert_eq!(full.convergent(full.depth()), ratio(4181, 6765));
    }

    #[test]
    fn pi_fragment_quotients() {
        // 355/113 − 3 = 16/113.
        let state = cf_digits(&ratio(16, 113), 10).unwrap();
        assert_eq!(quotients_u64(&state), vec![7, 16]);
    }

    #[test]
    fn truncation_before_termination() {
        let state = cf_digits(&ratio(3, 8), 2).unwrap();
        assert_eq!(quotients_u64(&state), vec![2, 1]);
        assert!(!state.exhausted);
        assert_eq!(state.reconstruct(), ratio(3, 8));
        assert!(cf_digits(&ratio(0, 1), 5).is_err());
        assert!(cf_digits(&ratio(9, 8), 5).is_err());
    }

    #[test]
    fn determinant_identity_holds() {
        let state = cf_digits(&ratio(355, 1130), 20).unwrap();
        for k in 1..=state.depth() as isize {
            let det = state.p(k) * state.q(k - 1) - state.p(k - 1) * state.q(k);
            let expect = if (k - 1) % 2 == 0 { 1 } else { -1 };
            assert_eq!(det, BigInt::from(expect));
        }
    }

    #[test]
    fn cylinder_examples() {
        let state = cf_digits(&ratio(2, 3), 5).unwrap();
        let cyl = cf_cylinder(&state, 1).unwrap();
        assert_eq!(cyl.endpoint_a, ratio(1, 1));
        assert_eq!(cyl.endpoint_b, ratio(1, 2));
        assert_eq!(cyl.length, ratio(1, 2));

        let state = cf_digits(&ratio(3, 8), 5).unwrap();
        let cyl = cf_cylinder(&state, 3).unwrap();
        assert_eq!(cyl.endpoint_a, ratio(3, 8));
        assert_eq!(cyl.endpoint_b, ratio(4, 11));
        assert_eq!(cyl.length, ratio(1, 88));
        let (lo, hi) = cyl.hull();
        assert!(lo < hi && lo == ratio(4, 11));

        let empty = cf_cylinder(&state, 0).unwrap();
        assert_eq!(empty.endpoint_a, ratio(0, 1));
        assert_eq!(empty.endpoint_b, ratio(1, 1));
        assert_eq!(empty.length, ratio(1, 1));
        assert!(cf_cylinder(&state, 4).is_err());
    }

    #[test]
    fn cylinder_squeeze_bounds() {
        let state = cf_digits(&ratio(355, 1130), 12).unwrap();
        for m in 1..=state.depth() {
            let cyl = cf_cylinder(&state, m).unwrap();
            let qm = state.q(m as isize);
            let upper = ExactRational::new(BigInt::one(), qm * qm);
            let lower = ExactRational::new(BigInt::one(), BigInt::from(2) * qm * qm);
            assert!(cyl.length <= upper && cyl.length >= lower);
        }
    }

    #[test]
    fn diophantine_gap_examples() {
        let state = cf_digits(&ratio(3, 8), 10).unwrap();
        assert_eq!(diophantine_gap(&state, 1).unwrap(), ratio(1, 8));
        assert_eq!(diophantine_gap(&state, 3).unwrap(), ratio(0, 1));
        assert!(diophantine_gap(&state, 4).is_err());
        let truncated = cf_digits(&ratio(4181, 6765), 5).unwrap();
        assert!(diophantine_gap(&truncated, 5).is_err());
        assert!(diophantine_gap(&truncated, 4).is_ok());
    }

    #[test]
    fn exact_partition_sums_to_one() {
        for depth in 1..=3 {
            let (sum, defect) = partition_check(depth, 6).unwrap();
            assert_eq!(&sum + &defect, ExactRational::one(), "depth {depth}");
            assert!(sum < ExactRational::one());
        }
        // Depth 1 closed form: Σ_{a≤A} 1/(a(a+1)) = 1 − 1/(A+1).
        let (sum, defect) = partition_check(1, 9).unwrap();
        assert_eq!(sum, ratio(9, 10));
        assert_eq!(defect, ratio(1, 10));
        assert!(partition_check(3, 100).is_err());
    }

    #[test]
    fn tiling_approaches_full_measure() {
        let t = tiling_lower_bound(3, 1000).unwrap();
        assert!(t >= 0.99, "tiling bound {t}");
        let coarse = tiling_lower_bound(3, 50).unwrap();
        assert!(coarse < t);
        let exact = tiling_lower_bound(1, 9).unwrap();
        assert!((exact - 0.9).abs() < 1e-6);
        assert!(ExactRational::from_f64(t).is_some());
    }
}
