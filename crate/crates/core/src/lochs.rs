//! The Lochs counter: how many continued-fraction digits the first n
//! β-digits determine.
//!
//! k_n(x) = sup{m ≥ 0 : J_n(x) ⊆ I_m(x)}, where J_n is the depth-n β-cylinder
//! of x and I_m its depth-m CF cylinder (I_0 = [0,1]). Containment is decided
//! on closed hulls with exact rational comparisons; the half-open boundary
//! conventions of the two cylinder families differ only on a measure-zero
//! set of endpoint collisions, which the exact tests detect and report
//! rather than resolve by fiat.
//!
//! Each value ships with a certificate: the endpoint comparisons proving
//! J_n ⊆ I_k and the failed comparison for I_{k+1}. When the input's finite
//! continued fraction is exhausted while containment still holds, the value
//! is only a lower bound and the certificate says so (`truncated`).

use num_bigint::BigInt;
use num_traits::Euclid;
use num_traits::ToPrimitive;

use crate::beta::{beta_digits, cylinder_at, BetaCylinder, DigitEngine};
use crate::cf::{cf_cylinder, cf_digits, CFCylinder, CFState};
use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Which endpoint comparison failed for the first non-containing depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// Exact endpoint comparisons for one containment test J ⊆ hull(I_m).
#[derive(Debug, Clone)]
pub struct ContainmentWitness {
    pub cf_depth: usize,
    pub j_left: ExactRational,
    pub j_right: ExactRational,
    pub i_low: ExactRational,
    pub i_high: ExactRational,
    pub contained: bool,
    /// Set on a failing witness: the side whose inequality broke.
    pub failed_side: Option<Side>,
    /// An endpoint of J coincided exactly with an endpoint of I.
    pub boundary_collision: bool,
}

impl ContainmentWitness {
    /// Record the four hull endpoints and the comparison outcome.
    pub fn build(j: &BetaCylinder, i: &CFCylinder) -> Self {
        let (i_low, i_high) = i.hull();
        let j_left = j.left.clone();
        let j_right = j.right();
        let left_ok = i_low <= j_left;
        let right_ok = j_right <= i_high;
        let contained = left_ok && right_ok;
        let failed_side = if contained {
            None
        } else if !left_ok {
            Some(Side::Left)
        } else {
            Some(Side::Right)
        };
        let boundary_collision = j_left == i_low || j_right == i_high;
        Self {
            cf_depth: i.depth,
            j_left,
            j_right,
            i_low,
            i_high,
            contained,
            failed_side,
            boundary_collision,
        }
    }

    /// Re-run the comparisons from the stored rationals.
    pub fn verify(&self) -> bool {
        let left_ok = self.i_low <= self.j_left;
        let right_ok = self.j_right <= self.i_high;
        (left_ok && right_ok) == self.contained
    }
}

/// k_n(x) with its proof obligations.
#[derive(Debug, Clone)]
pub struct LochsCertificate {
    pub n: usize,
    pub k: usize,
    pub witness_in: ContainmentWitness,
    /// None exactly when `truncated` (no failing depth could be tested).
    pub witness_out: Option<ContainmentWitness>,
    /// The continued fraction ran out while containment still held; `k` is
    /// then only a lower bound.
    pub truncated: bool,
}

impl LochsCertificate {
    pub fn boundary_collision(&self) -> bool {
        self.witness_in.boundary_collision
            || self
                .witness_out
                .as_ref()
                .is_some_and(|w| w.boundary_collision)
    }
}

/// Closed-hull containment of a β-cylinder in a CF cylinder.
pub fn cylinder_contained(j: &BetaCylinder, i: &CFCylinder) -> bool {
    let (lo, hi) = i.hull();
    lo <= j.left && j.right() <= hi
}

fn check_orbit_alive(orbit: &crate::beta::BetaOrbit, n: usize) -> Result<()> {
    if let Some(j) = orbit.terminated_at() {
        if j < n {
            return Err(Error::DegenerateSample(format!(
                "beta-orbit terminated at depth {j} < {n}; digits beyond carry no information"
            )));
        }
    }
    Ok(())
}

/// k_n(x) for a single depth, with certificate.
pub fn kn(x: &ExactRational, beta: &ExactRational, n: usize) -> Result<LochsCertificate> {
    let series = kn_series(x, beta, n)?;
    Ok(series.into_iter().last().expect("n ≥ 1 yields entries"))
}

/// k_1..k_{n_max} in one pass. The CF depth pointer only moves forward
/// (β-cylinders nest, so k_n is nondecreasing). The series stops early at
/// the first truncated entry: once the finite CF is exhausted while
/// containment holds, every deeper value is the same lower bound.
pub fn kn_series(
    x: &ExactRational,
    beta: &ExactRational,
    n_max: usize,
) -> Result<Vec<LochsCertificate>> {
    let orbit = beta_digits(x, beta, n_max)?;
    check_orbit_alive(&orbit, n_max)?;
    let state = cf_digits(x, usize::MAX)?;
    let mut out = Vec::with_capacity(n_max);
    let mut k = 0usize;
    for n in 1..=n_max {
        let j = cylinder_at(&orbit, n)?;
        let mut truncated = false;
        loop {
            if k + 1 > state.depth() {
                truncated = true;
                break;
            }
            let candidate = cf_cylinder(&state, k + 1)?;
            if cylinder_contained(&j, &candidate) {
                k += 1;
            } else {
                break;
            }
        }
        let witness_in = ContainmentWitness::build(&j, &cf_cylinder(&state, k)?);
        debug_assert!(witness_in.contained);
        let witness_out = if truncated {
            None
        } else {
            let w = ContainmentWitness::build(&j, &cf_cylinder(&state, k + 1)?);
            debug_assert!(!w.contained);
            Some(w)
        };
        out.push(LochsCertificate {
            n,
            k,
            witness_in,
            witness_out,
            truncated,
        });
        if truncated {
            break;
        }
    }
    Ok(out)
}

/// The cylinder-length lower bound at the failing depth: whenever
/// J_n ⊄ I_{k+1}, the β-cylinder cannot be shorter than 1/(6·q_{k+3}²).
/// Returns the exact truth of that inequality for this certificate.
pub fn failure_bound_check(
    cert: &LochsCertificate,
    state: &CFState,
    cyl: &BetaCylinder,
) -> Result<bool> {
    if cert.truncated {
        return Err(Error::Range(
            "failure bound needs a non-truncated certificate".into(),
        ));
    }
    debug_assert_eq!(cert.n, cyl.depth);
    let needed = cert.k + 3;
    if needed > state.depth() {
        return Err(Error::Range(format!(
            "failure bound at k = {} needs quotient {needed}; only {} available",
            cert.k,
            state.depth()
        )));
    }
    let q = state.q(needed as isize);
    let bound = ExactRational::new(BigInt::from(1), BigInt::from(6) * q * q);
    Ok(cyl.length >= bound)
}

/// Per-n outcome of the fast Monte Carlo path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnOutcome {
    /// k_n decided exactly.
    Value(u32),
    /// CF exhausted while containment held; k_n is undecided.
    Truncated,
    /// β-orbit terminated strictly before this depth.
    Terminated,
}

/// Forward-only walker pairing the β-digit engine with an on-demand
/// continued fraction: the integer hot path behind the Monte Carlo
/// experiments. Depths must be visited in increasing order.
pub(crate) struct SampleWalk {
    pub(crate) engine: DigitEngine,
    pub(crate) cf: IncrementalCf,
    k: usize,
    truncated: bool,
    terminated: Option<usize>,
}

impl SampleWalk {
    pub(crate) fn new(x: &ExactRational, beta: &ExactRational) -> Self {
        Self {
            engine: DigitEngine::new(x, beta),
            cf: IncrementalCf::new(x),
            k: 0,
            truncated: false,
            terminated: None,
        }
    }

    /// Advance to β-depth n and return the Lochs outcome there.
    pub(crate) fn advance_to(&mut self, n: usize) -> KnOutcome {
        while self.engine.depth() < n {
            self.engine.step();
            if self.terminated.is_none() && self.engine.orbit_is_zero() {
                self.terminated = Some(self.engine.depth());
            }
        }
        if self.terminated.is_some_and(|j| j < n) {
            return KnOutcome::Terminated;
        }
        if self.truncated {
            return KnOutcome::Truncated;
        }
        let (j_left, j_right, w, _) = self.engine.cylinder_numerators();
        loop {
            match self.cf.hull(self.k + 1) {
                Some((lo_n, lo_d, hi_n, hi_d)) => {
                    // i_lo ≤ j_left  ⟺  lo_n·w ≤ j_left·lo_d  (positive dens)
                    let left_ok = &lo_n * &w <= &j_left * &lo_d;
                    let right_ok = &j_right * &hi_d <= &hi_n * &w;
                    if left_ok && right_ok {
                        self.k += 1;
                    } else {
                        break;
                    }
                }
                None => {
                    self.truncated = true;
                    return KnOutcome::Truncated;
                }
            }
        }
        KnOutcome::Value(self.k as u32)
    }
}

/// k_n at each requested depth (ascending), over raw integers. Equivalent to
/// [`kn_series`] (unit-tested against it) but without certificate
/// materialization and with an incremental Euclid that produces quotients
/// only as the forward pointer needs them.
pub fn kn_values_at(x: &ExactRational, beta: &ExactRational, ns: &[usize]) -> Vec<KnOutcome> {
    debug_assert!(ns.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(!ns.is_empty());
    let mut walk = SampleWalk::new(x, beta);
    ns.iter().map(|&n| walk.advance_to(n)).collect()
}

/// Euclid on demand: quotients and convergents of a rational in (0,1),
/// extended only as deep as requested.
pub(crate) struct IncrementalCf {
    num: BigInt,
    den: BigInt,
    p: Vec<BigInt>,
    q: Vec<BigInt>,
    exhausted: bool,
}

impl IncrementalCf {
    pub(crate) fn new(x: &ExactRational) -> Self {
        Self {
            num: x.numer().clone(),
            den: x.denom().clone(),
            p: vec![BigInt::from(1), BigInt::from(0)],
            q: vec![BigInt::from(0), BigInt::from(1)],
            exhausted: false,
        }
    }

    pub(crate) fn depth(&self) -> usize {
        self.p.len() - 2
    }

    /// Ensure m quotients exist; false if the expansion ended first.
    pub(crate) fn extend_to(&mut self, m: usize) -> bool {
        while self.depth() < m {
            if self.num.to_u32() == Some(0) {
                self.exhausted = true;
                return false;
            }
            let a = self.den.div_euclid(&self.num);
            let rem = &self.den - &a * &self.num;
            self.den = std::mem::replace(&mut self.num, rem);
            let k = self.p.len();
            let new_p = &a * &self.p[k - 1] + &self.p[k - 2];
            let new_q = &a * &self.q[k - 1] + &self.q[k - 2];
            self.p.push(new_p);
            self.q.push(new_q);
        }
        true
    }

    /// Convergent numerator/denominator pair (p_m, q_m), extending if needed.
    pub(crate) fn convergent(&mut self, m: usize) -> Option<(BigInt, BigInt)> {
        if !self.extend_to(m) {
            return None;
        }
        Some((self.p[m + 1].clone(), self.q[m + 1].clone()))
    }

    /// Closed hull of the depth-m cylinder as (lo_num, lo_den, hi_num, hi_den),
    /// or None when fewer than m quotients exist.
    pub(crate) fn hull(&mut self, m: usize) -> Option<(BigInt, BigInt, BigInt, BigInt)> {
        if !self.extend_to(m) {
            return None;
        }
        let pm = &self.p[m + 1];
        let pm1 = &self.p[m];
        let qm = &self.q[m + 1];
        let qm1 = &self.q[m];
        let (a_n, a_d) = (pm.clone(), qm.clone());
        let (b_n, b_d) = (pm + pm1, qm + qm1);
        if m % 2 == 0 {
            Some((a_n, a_d, b_n, b_d))
        } else {
            Some((b_n, b_d, a_n, a_d))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beta::cylinder;
    use crate::rational::{ratio, rational_from_decimal};
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn generic_near(base: ExactRational, shift_num: i64, shift_den_pow: u32) -> ExactRational {
        base + ExactRational::new(
            BigInt::from(shift_num),
            BigInt::from(2u8).pow(shift_den_pow),
        )
    }

    #[test]
    fn leading_zero_digit_pins_k_to_zero() {
        // ε_1 = 0 under β=2 gives J_1 = [0, 1/2), contained in no I(a_1).
        let x = generic_near(ratio(3, 8), 7, 40);
        let cert = kn(&x, &ratio(2, 1), 1).unwrap();
        assert_eq!(cert.k, 0);
        assert!(!cert.truncated);
        assert!(cert.witness_in.contained);
        let out = cert.witness_out.as_ref().unwrap();
        assert_eq!(out.failed_side, Some(Side::Left));
        assert_eq!(out.cf_depth, 1);
    }

    #[test]
    fn two_decimal_digits_decide_by_endpoints() {
        let x = generic_near(ratio(1, 4), 13, 100);
        let cert = kn(&x, &ratio(10, 1), 2).unwrap();
        // J_2 has length 10^{-2}; verify the witnesses independently.
        assert!(cert.witness_in.verify());
        assert!(cert.witness_out.as_ref().unwrap().verify());
        assert_eq!(
            &cert.witness_in.j_right - &cert.witness_in.j_left,
            ratio(1, 100)
        );
        assert!(cert.k >= 1);
    }

    #[test]
    fn series_is_monotone_and_consistent() {
        let x = rational_from_decimal("0.7853981633974483096156608458198757").unwrap();
        let series = kn_series(&x, &ratio(10, 1), 20).unwrap();
        assert_eq!(series.len(), 20);
        for pair in series.windows(2) {
            assert!(pair[0].k <= pair[1].k);
        }
        let single = kn(&x, &ratio(10, 1), 7).unwrap();
        assert_eq!(single.k, series[6].k);
        assert_eq!(single.n, 7);
    }

    #[test]
    fn exhausted_cf_truncates() {
        // x = 2/7 has the 2-quotient expansion [3, 2]. With base 98 the
        // orbit lands on zero at step 1, so J_1 = [2/7, 29/98) sits inside
        // the deepest hull [2/7, 3/10] with its left edge on the endpoint;
        // the counter runs off the end of the quotient list.
        let x = ratio(2, 7);
        let series = kn_series(&x, &ratio(98, 1), 1).unwrap();
        assert_eq!(series.len(), 1);
        let last = series.last().unwrap();
        assert!(last.truncated);
        assert!(last.witness_out.is_none());
        assert_eq!(last.k, 2);
        assert!(last.boundary_collision());
    }

    #[test]
    fn rational_input_settles_without_truncation() {
        // x = 3/8 never terminates under base 3 (orbit cycles 3/8 -> 1/8),
        // and the deepest hull [3/8, 2/5] always loses its left edge to the
        // cylinder, so the counter settles below the quotient count forever.
        let x = ratio(3, 8);
        let series = kn_series(&x, &ratio(3, 1), 40).unwrap();
        assert_eq!(series.len(), 40, "no truncation ever happens");
        let last = series.last().unwrap();
        assert!(!last.truncated);
        assert_eq!(last.k, 2);
        assert!(last.witness_out.is_some());
    }

    #[test]
    fn terminated_orbit_is_degenerate() {
        let err = kn(&ratio(1, 4), &ratio(10, 1), 6).unwrap_err();
        assert!(matches!(err, Error::DegenerateSample(_)), "{err}");
    }

    #[test]
    fn failure_bound_on_random_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let beta = ratio(10, 1);
        for _ in 0..40 {
            let x = ratio(rng.gen_range(1..(1u64 << 50)) as i64, 1 << 50);
            let orbit = beta_digits(&x, &beta, 12).unwrap();
            if orbit.terminated_at().is_some() {
                continue;
            }
            let cert = kn(&x, &beta, 12).unwrap();
            if cert.truncated {
                continue;
            }
            let state = cf_digits(&x, usize::MAX).unwrap();
            if cert.k + 3 > state.depth() {
                continue;
            }
            let cyl = cylinder(&orbit);
            assert!(failure_bound_check(&cert, &state, &cyl).unwrap());
        }
    }

    #[test]
    fn fast_path_matches_certificates() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for trial in 0..60 {
            let x = ratio(rng.gen_range(1..(1u64 << 48)) as i64, 1 << 48);
            let beta = if trial % 2 == 0 {
                ratio(10, 1)
            } else {
                ratio(5, 2)
            };
            let ns: Vec<usize> = vec![1, 3, 7, 12];
            let fast = kn_values_at(&x, &beta, &ns);
            match kn_series(&x, &beta, 12) {
                Ok(series) => {
                    for (i, &n) in ns.iter().enumerate() {
                        if let Some(cert) = series.iter().find(|c| c.n == n) {
                            if cert.truncated {
                                assert_eq!(fast[i], KnOutcome::Truncated);
                            } else {
                                assert_eq!(fast[i], KnOutcome::Value(cert.k as u32), "n={n} x={x}");
                            }
                        } else {
                            // Series stopped early at a truncation before n.
                            assert_eq!(fast[i], KnOutcome::Truncated);
                        }
                    }
                }
                Err(Error::DegenerateSample(_)) => {
                    assert!(fast.iter().any(|o| matches!(o, KnOutcome::Terminated)));
                }
                Err(e) => panic!("unexpected error {e}"),
            }
        }
    }

    #[test]
    fn incremental_cf_matches_batch() {
        let x = ratio(355, 1130);
        let state = cf_digits(&x, usize::MAX).unwrap();
        let mut inc = IncrementalCf::new(&x);
        for m in 1..=state.depth() {
            let (p, q) = inc.convergent(m).unwrap();
            assert_eq!(&p, state.p(m as isize));
            assert_eq!(&q, state.q(m as isize));
        }
        assert!(inc.convergent(state.depth() + 1).is_none());
    }
}
