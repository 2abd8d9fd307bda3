//! Monte Carlo experiments: deviation-set decay of k_n/n, zero-run tails,
//! head-to-head approximation quality of continued-fraction convergents
//! versus β-truncations, and the mean Lochs ratio.
//!
//! Samples are dyadic rationals with a fixed number of uniform bits, drawn
//! from a seeded stream, so identical plans reproduce identical results
//! bit-for-bit. Per-sample pipelines run in parallel; tallies are exact
//! integer counts folded in sample order, so thread count cannot change any
//! output. A sample whose continued fraction or β-orbit cannot support a
//! requested depth is discarded and counted, never silently truncated.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::beta::DigitEngine;
use crate::error::{Error, Result};
use crate::lochs::{kn_values_at, IncrementalCf, KnOutcome};
use crate::rates::{lochs_constant, rate_constants_at, Tier};
use crate::rational::{ExactRational, PrecisionPolicy};

/// Reproducible sampling recipe: seed, sample count, input precision, base.
#[derive(Debug, Clone)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    pub policy: PrecisionPolicy,
    pub beta: ExactRational,
}

impl SamplePlan {
    pub fn new(
        seed: u64,
        count: usize,
        beta: ExactRational,
        policy: PrecisionPolicy,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::Plan("sample count must be at least 1".into()));
        }
        let one = ExactRational::new(1.into(), 1.into());
        if beta <= one {
            return Err(Error::Domain(format!("beta must exceed 1; got {beta}")));
        }
        Ok(Self {
            seed,
            count,
            policy,
            beta,
        })
    }

    /// Plan with the default precision budget for depth `n_max`.
    pub fn for_depth(seed: u64, count: usize, beta: ExactRational, n_max: usize) -> Result<Self> {
        let policy = PrecisionPolicy::default_for(&beta, n_max);
        Self::new(seed, count, beta, policy)
    }

    /// Refuse the run up front when the precision budget cannot support
    /// depth n.
    pub fn check_budget(&self, n: usize) -> Result<()> {
        if self.policy.allows_depth(&self.beta, n) {
            Ok(())
        } else {
            Err(Error::Plan(format!(
                "depth {n} exceeds the precision budget ({} input bits, {} guard bits)",
                self.policy.input_bits, self.policy.guard_bits
            )))
        }
    }

    fn beta_f64(&self) -> f64 {
        self.beta.to_f64().unwrap_or(f64::NAN)
    }
}

/// The plan's dyadic sample set: `count` points of `input_bits` uniform
/// bits each, in (0,1), deterministic in the seed. Zero draws are rejected
/// and redrawn so every point is strictly positive.
pub fn sample_points(plan: &SamplePlan) -> Vec<ExactRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let bits = plan.policy.input_bits;
    let bytes = bits.div_ceil(8);
    let excess = bytes * 8 - bits;
    let den = BigInt::one() << bits;
    let mut buf = vec![0u8; bytes];
    (0..plan.count)
        .map(|_| loop {
            rng.fill_bytes(&mut buf);
            let k = BigUint::from_bytes_le(&buf) >> excess;
            if !k.is_zero() {
                return ExactRational::new(k.into(), den.clone());
            }
        })
        .collect()
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(hits: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    // Empty and full tallies pin the corresponding endpoint exactly; the
    // algebraic form only reaches 0/1 up to float rounding.
    let lo = if hits == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if hits == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

const WILSON_Z: f64 = 1.959_963_984_540_054;

/// One row of a deviation series.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationEntry {
    pub n: usize,
    pub measure_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub used: u64,
    pub discarded: u64,
}

/// Least-squares decay fit of log-estimates against n.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub slope: f64,
    pub intercept: f64,
    pub used_points: usize,
    pub residuals: Vec<f64>,
}

/// Empirical measure of {|k_n/n − a| ≥ ε} across depths, on one coupled
/// sample set.
#[derive(Debug, Clone, Serialize)]
pub struct DeviationSeries {
    pub beta: f64,
    pub epsilon: f64,
    /// Midpoint of the a(β) enclosure the event compares against.
    pub a: f64,
    pub entries: Vec<DeviationEntry>,
    /// Σ_n measure_estimate over the requested depths: the
    /// complete-convergence diagnostic (finite by construction here; the
    /// interesting content is its stabilization as depths grow).
    pub partial_sum: f64,
    pub fit: Option<FitReport>,
    /// max(θ1, θ2) from the rate constants when ε is inside their domain.
    pub theory_bound: Option<f64>,
}

fn validate_depths(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::Plan("need at least one depth".into()));
    }
    if ns[0] == 0 {
        return Err(Error::Domain("depths start at 1".into()));
    }
    if !ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Plan("depths must be strictly increasing".into()));
    }
    Ok(())
}

/// Fraction of samples with |k_n/n − a(β)| ≥ ε at each depth.
pub fn deviation_measure(plan: &SamplePlan, epsilon: f64, ns: &[usize]) -> Result<DeviationSeries> {
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive; got {epsilon}"
        )));
    }
    validate_depths(ns)?;
    plan.check_budget(*ns.last().expect("nonempty"))?;
    let a = lochs_constant(&plan.beta)?.to_f64();
    let samples = sample_points(plan);
    let per_sample: Vec<Vec<KnOutcome>> = samples
        .par_iter()
        .map(|x| kn_values_at(x, &plan.beta, ns))
        .collect();
    let mut hits = vec![0u64; ns.len()];
    let mut used = vec![0u64; ns.len()];
    let mut discarded = vec![0u64; ns.len()];
    for outcomes in &per_sample {
        for (i, out) in outcomes.iter().enumerate() {
            match out {
                KnOutcome::Value(k) => {
                    used[i] += 1;
                    let ratio = *k as f64 / ns[i] as f64;
                    if (ratio - a).abs() >= epsilon {
                        hits[i] += 1;
                    }
                }
                KnOutcome::Truncated | KnOutcome::Terminated => discarded[i] += 1,
            }
        }
    }
    let mut entries = Vec::with_capacity(ns.len());
    for i in 0..ns.len() {
        if used[i] == 0 {
            return Err(Error::DegenerateSample(format!(
                "all {} samples discarded at depth {}",
                plan.count, ns[i]
            )));
        }
        let (ci_low, ci_high) = wilson_ci(hits[i], used[i], WILSON_Z);
        entries.push(DeviationEntry {
            n: ns[i],
            measure_estimate: hits[i] as f64 / used[i] as f64,
            ci_low,
            ci_high,
            hits: hits[i],
            used: used[i],
            discarded: discarded[i],
        });
    }
    let partial_sum = entries.iter().map(|e| e.measure_estimate).sum();
    let theory_bound = match rate_constants_at(&plan.beta, epsilon, Tier::Coarse) {
        Ok(rc) => Some(rc.theta1.value.max(rc.theta2.value)),
        Err(Error::Domain(_)) => None,
        Err(e) => return Err(e),
    };
    let mut series = DeviationSeries {
        beta: plan.beta_f64(),
        epsilon,
        a,
        entries,
        partial_sum,
        fit: None,
        theory_bound,
    };
    series.fit = decay_fit(&series).ok();
    Ok(series)
}

/// OLS slope of log(measure_estimate) against n, ignoring zero-hit rows.
pub fn decay_fit(series: &DeviationSeries) -> Result<FitReport> {
    let pts: Vec<(f64, f64)> = series
        .entries
        .iter()
        .filter(|e| e.hits > 0)
        .map(|e| (e.n as f64, e.measure_estimate.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!(
            "decay fit needs ≥ 3 depths with nonzero estimates; have {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom <= 0.0 {
        return Err(Error::Fit("degenerate abscissae in decay fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let residuals = pts
        .iter()
        .map(|&(x, y)| y - (intercept + slope * x))
        .collect();
    Ok(FitReport {
        slope,
        intercept,
        used_points: pts.len(),
        residuals,
    })
}

/// One row of the zero-run tail table.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroRunEntry {
    pub i: usize,
    pub measure_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub hits: u64,
    pub used: u64,
    pub discarded: u64,
    /// β^{1−i}/(β−1): the analytic ceiling the estimate is compared to.
    pub bound: f64,
}

/// Empirical measure of {l_n ≥ i} for each i, with the analytic bound.
pub fn zero_run_tail(plan: &SamplePlan, n: usize, i_list: &[usize]) -> Result<Vec<ZeroRunEntry>> {
    if i_list.is_empty() {
        return Err(Error::Plan("need at least one run length".into()));
    }
    if !i_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Plan(
            "run lengths must be strictly increasing".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Domain("depth n starts at 1".into()));
    }
    let i_max = *i_list.last().expect("nonempty");
    plan.check_budget(n + i_max)?;
    let samples = sample_points(plan);
    // Run length of zeros after position n, capped at i_max; a terminated
    // orbit legitimately yields zeros forever, so no discards arise here.
    let runs: Vec<usize> = samples
        .par_iter()
        .map(|x| {
            let mut engine = DigitEngine::new(x, &plan.beta);
            for _ in 0..n {
                engine.step();
            }
            let mut run = 0usize;
            while run < i_max {
                if engine.step().is_zero() {
                    run += 1;
                } else {
                    break;
                }
            }
            run
        })
        .collect();
    let beta_f = plan.beta_f64();
    let total = plan.count as u64;
    let mut out = Vec::with_capacity(i_list.len());
    for &i in i_list {
        let hits = runs.iter().filter(|&&r| r >= i).count() as u64;
        let (ci_low, ci_high) = wilson_ci(hits, total, WILSON_Z);
        out.push(ZeroRunEntry {
            i,
            measure_estimate: hits as f64 / total as f64,
            ci_low,
            ci_high,
            hits,
            used: total,
            discarded: 0,
            bound: beta_f.powi(1 - i as i32) / (beta_f - 1.0),
        });
    }
    Ok(out)
}

/// One row of the approximation comparison: convergent p_n/q_n versus the
/// β-truncation at the same index n.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxEntry {
    pub n: usize,
    /// Fraction with |x − p_n/q_n| ≤ x − x_n (ties included).
    pub fraction_cf_better: f64,
    /// Fraction with x − x_n ≤ |x − p_n/q_n| (ties included).
    pub fraction_beta_better: f64,
    pub fraction_ties: f64,
    pub cf_better: u64,
    pub beta_better: u64,
    pub ties: u64,
    pub used: u64,
    pub discarded: u64,
}

#[derive(Clone, Copy)]
enum Verdict {
    Cf,
    Beta,
    Tie,
    Discarded,
}

/// Exact head-to-head comparison at each requested index. Both events are
/// inclusive, so on non-discarded samples
/// fraction_cf_better + fraction_beta_better − fraction_ties = 1 exactly.
pub fn approx_compare(plan: &SamplePlan, ns: &[usize]) -> Result<Vec<ApproxEntry>> {
    validate_depths(ns)?;
    plan.check_budget(*ns.last().expect("nonempty"))?;
    let samples = sample_points(plan);
    let verdicts: Vec<Vec<Verdict>> = samples
        .par_iter()
        .map(|x| {
            let mut engine = DigitEngine::new(x, &plan.beta);
            let mut cf = IncrementalCf::new(x);
            let xnum = x.numer().clone();
            let xden = x.denom().clone();
            let mut terminated: Option<usize> = None;
            ns.iter()
                .map(|&n| {
                    while engine.depth() < n {
                        engine.step();
                        if terminated.is_none() && engine.orbit_is_zero() {
                            terminated = Some(engine.depth());
                        }
                    }
                    if terminated.is_some_and(|j| j <= n) {
                        return Verdict::Discarded;
                    }
                    let (p, q) = match cf.convergent(n) {
                        Some(pq) => pq,
                        None => return Verdict::Discarded,
                    };
                    let (_, _, w, onum) = engine.cylinder_numerators();
                    // |x − p/q| = |xnum·q − p·xden|/(xden·q);
                    // x − x_n = onum/W with W = xden·β_num^n. Cross-multiply.
                    let cf_err = (&xnum * &q - &p * &xden).abs();
                    let lhs = cf_err * w;
                    let rhs = onum * q * &xden;
                    match lhs.cmp(&rhs) {
                        std::cmp::Ordering::Less => Verdict::Cf,
                        std::cmp::Ordering::Greater => Verdict::Beta,
                        std::cmp::Ordering::Equal => Verdict::Tie,
                    }
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(ns.len());
    for (i, &n) in ns.iter().enumerate() {
        let (mut cf_b, mut beta_b, mut ties, mut used, mut disc) = (0u64, 0u64, 0u64, 0u64, 0u64);
        for v in &verdicts {
            match v[i] {
                Verdict::Cf => {
                    cf_b += 1;
                    used += 1;
                }
                Verdict::Beta => {
                    beta_b += 1;
                    used += 1;
                }
                Verdict::Tie => {
                    cf_b += 1;
                    beta_b += 1;
                    ties += 1;
                    used += 1;
                }
                Verdict::Discarded => disc += 1,
            }
        }
        if used == 0 {
            return Err(Error::DegenerateSample(format!(
                "all {} samples discarded at index {n}",
                plan.count
            )));
        }
        out.push(ApproxEntry {
            n,
            fraction_cf_better: cf_b as f64 / used as f64,
            fraction_beta_better: beta_b as f64 / used as f64,
            fraction_ties: ties as f64 / used as f64,
            cf_better: cf_b,
            beta_better: beta_b,
            ties,
            used,
            discarded: disc,
        });
    }
    Ok(out)
}

/// Sample mean and standard deviation of k_n/n.
#[derive(Debug, Clone, Serialize)]
pub struct MeanReport {
    pub n: usize,
    pub mean: f64,
    pub std: f64,
    pub used: u64,
    pub discarded: u64,
}

pub fn lochs_mean(plan: &SamplePlan, n: usize) -> Result<MeanReport> {
    if n == 0 {
        return Err(Error::Domain("depth n starts at 1".into()));
    }
    plan.check_budget(n)?;
    let samples = sample_points(plan);
    let ns = [n];
    let ratios: Vec<Option<f64>> = samples
        .par_iter()
        .map(|x| match kn_values_at(x, &plan.beta, &ns)[0] {
            KnOutcome::Value(k) => Some(k as f64 / n as f64),
            _ => None,
        })
        .collect();
    let used: Vec<f64> = ratios.iter().flatten().copied().collect();
    let discarded = (ratios.len() - used.len()) as u64;
    if used.is_empty() {
        return Err(Error::DegenerateSample(format!(
            "all {} samples discarded at depth {n}",
            plan.count
        )));
    }
    let m = used.len() as f64;
    let mean = used.iter().sum::<f64>() / m;
    let var = if used.len() > 1 {
        used.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(MeanReport {
        n,
        mean,
        std: var.sqrt(),
        used: used.len() as u64,
        discarded,
    })
}

/// Monte Carlo moment estimate of (1/n)·log E[q_n^{2t}], the sampling-side
/// counterpart of the cylinder-sum pressure at 1−t.
#[derive(Debug, Clone, Serialize)]
pub struct McPressure {
    pub two_t: f64,
    pub depth: usize,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub used: u64,
    pub discarded: u64,
}

/// log of a positive big integer, stable for values far beyond f64 range.
fn ln_bigint(q: &BigInt) -> f64 {
    let direct = q.to_f64().unwrap_or(f64::INFINITY);
    if direct.is_finite() {
        return direct.ln();
    }
    let bits = q.bits();
    let shift = bits - 64;
    let top = (q >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// (max + log Σ exp(s−max)) − log m, i.e. log of the mean of exp(s_i).
fn log_mean_exp(s: &[f64]) -> f64 {
    let m = s.len() as f64;
    let peak = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    peak + s.iter().map(|v| (v - peak).exp()).sum::<f64>().ln() - m.ln()
}

const BOOTSTRAP_RESAMPLES: usize = 200;

/// Estimates (1/n)·log E[q_n^{2t}] over uniform dyadic samples, with a
/// seeded 200-resample bootstrap interval. The moment diverges at 2t ≥ 1,
/// so that is a domain error; fewer than 10³ samples is a plan error.
pub fn pressure_mc(two_t: f64, depth: usize, samples: usize, seed: u64) -> Result<McPressure> {
    if !two_t.is_finite() || two_t >= 1.0 {
        return Err(Error::Domain(format!(
            "moment exponent 2t must be finite and below 1 (E[q_n^{{2t}}] diverges); got {two_t}"
        )));
    }
    if depth == 0 || depth > 512 {
        return Err(Error::Domain(format!(
            "depth must be in 1..=512; got {depth}"
        )));
    }
    if samples < 1000 {
        return Err(Error::Plan(format!(
            "Monte Carlo moment needs at least 10^3 samples; got {samples}"
        )));
    }
    // Enough uniform bits that a depth-n quotient string almost surely
    // exists: quotients accrue ~0.58 per bit on average, with 128 guard.
    let policy = PrecisionPolicy {
        input_bits: (4 * depth + 128).max(256),
        guard_bits: 0,
    };
    let plan = SamplePlan {
        seed,
        count: samples,
        policy,
        beta: ExactRational::new(2.into(), 1.into()),
    };
    let points = sample_points(&plan);
    let logs: Vec<Option<f64>> = points
        .par_iter()
        .map(|x| {
            let mut cf = IncrementalCf::new(x);
            if !cf.extend_to(depth) {
                return None;
            }
            let (_, q) = cf.convergent(depth)?;
            Some(two_t * ln_bigint(&q))
        })
        .collect();
    let s: Vec<f64> = logs.iter().flatten().copied().collect();
    let discarded = (logs.len() - s.len()) as u64;
    if s.is_empty() {
        return Err(Error::DegenerateSample(format!(
            "all {samples} samples lacked {depth} partial quotients"
        )));
    }
    let n = depth as f64;
    let estimate = log_mean_exp(&s) / n;
    let mut boot = ChaCha8Rng::seed_from_u64(seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut stats = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    let mut resample = vec![0.0f64; s.len()];
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in resample.iter_mut() {
            *slot = s[(boot.next_u64() % s.len() as u64) as usize];
        }
        stats.push(log_mean_exp(&resample) / n);
    }
    stats.sort_by(|a, b| a.total_cmp(b));
    Ok(McPressure {
        two_t,
        depth,
        estimate,
        ci_low: stats[4],
        ci_high: stats[BOOTSTRAP_RESAMPLES - 5],
        used: s.len() as u64,
        discarded,
    })
}
