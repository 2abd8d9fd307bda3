//! Rate constants derived from the pressure: the four Diophantine-digit
//! exponents θ1(ε), θ2(ε), θ, θ*, the Lyapunov-style transform τ(γ), the
//! slope of the pressure at 1, and the Lochs ratio constant a(β).
//!
//! a(β) = 6·log 2·log β / π² is computed as a decimal-interval enclosure.
//! The exponents are infima of one-dimensional objectives built from log β
//! and pressure values; each evaluation carries an uncertainty combining
//! the certified grid bracket, the depth-convergence gap, and the
//! cutoff-bias correction with its model residual, so the sign of each
//! constant can be asserted or refused honestly.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use crate::constants::{
    critical_log_beta, golden_gamma_min, ln2, ln_rational, pi_squared, Enclosure, DEFAULT_DIGITS,
};
use crate::error::{Error, Result};
use crate::pressure::levels_bracket;
use crate::rational::ExactRational;

/// Lochs ratio constant a(β) = 6·log 2·log β / π² as a certified enclosure.
pub fn lochs_constant(beta: &ExactRational) -> Result<Enclosure> {
    let one = ExactRational::new(1.into(), 1.into());
    if beta <= &one {
        return Err(Error::Domain(format!(
            "the ratio constant needs beta > 1; got {beta}"
        )));
    }
    let digits = DEFAULT_DIGITS;
    let log_beta = ln_rational(beta, digits)?;
    let num = ln2(digits)
        .mul(&log_beta)
        .scale(&ExactRational::new(6.into(), 1.into()));
    Ok(num.div(&pi_squared(digits)))
}

/// Accuracy/cost tier for pressure evaluations inside the optimizers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    /// Fast: used to locate minima.
    Coarse,
    /// Slow: used for the reported values and sign decisions.
    Certify,
}

fn tier_params(tier: Tier) -> (usize, u32, usize) {
    match tier {
        Tier::Coarse => (9, 256, 1024),
        Tier::Certify => (10, 1000, 16384),
    }
}

/// A pressure value with cutoff-bias correction and stacked uncertainty.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RefinedPressure {
    pub theta: f64,
    pub value: f64,
    pub uncertainty: f64,
}

fn step_of(levels: &[crate::pressure::LevelBracket]) -> (f64, f64, f64) {
    let n = levels.len();
    let last = levels[n - 1];
    let prev = levels[n - 2];
    let lo = last.log_lo - prev.log_hi;
    let hi = last.log_hi - prev.log_lo;
    let mid = 0.5 * (lo + hi);
    let before = levels[n - 3];
    let prev_mid = 0.5 * ((prev.log_lo - before.log_hi) + (prev.log_hi - before.log_lo));
    (mid, 0.5 * (hi - lo), (mid - prev_mid).abs())
}

fn table() -> &'static Mutex<HashMap<(u64, u8), RefinedPressure>> {
    static TABLE: OnceLock<Mutex<HashMap<(u64, u8), RefinedPressure>>> = OnceLock::new();
    TABLE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Pressure P(θ) with the leading cutoff bias removed.
///
/// The level-step estimate at cutoff A misses mass that scales like
/// A^{1−2θ}, so the halved-cutoff difference, amplified by
/// 1/(2^{2θ−1} − 1), extrapolates the bias away. The residual between the
/// extrapolations from the (A, A/2) and (A/2, A/4) pairs measures how well
/// that model holds and is charged to the uncertainty, together with the
/// certified grid brackets, the depth-convergence gap, and a tenth of the
/// correction itself. Results are memoized per (θ, tier).
pub fn pressure_refined(theta: f64, tier: Tier) -> Result<RefinedPressure> {
    let key = (theta.to_bits(), tier as u8);
    let mut map = table().lock().expect("pressure table poisoned");
    if let Some(hit) = map.get(&key) {
        return Ok(*hit);
    }
    let (depth, cutoff, cells) = tier_params(tier);
    let full = levels_bracket(theta, depth, cutoff, cells)?;
    let half = levels_bracket(theta, depth, cutoff.div_ceil(2), cells)?;
    let quarter = levels_bracket(theta, depth, cutoff.div_ceil(4), cells)?;
    let (s_full, hw_full, gap) = step_of(&full);
    let (s_half, hw_half, _) = step_of(&half);
    let (s_quarter, _, _) = step_of(&quarter);
    let geo = 2.0f64.powf(2.0 * theta - 1.0) - 1.0;
    let corr = (s_full - s_half) / geo;
    let value = s_full + corr;
    let previous = s_half + (s_half - s_quarter) / geo;
    let residual = (value - previous).abs();
    let refined = RefinedPressure {
        theta,
        value,
        uncertainty: hw_full + hw_half + gap + 0.1 * corr.abs() + residual,
    };
    map.insert(key, refined);
    Ok(refined)
}

/// Sign of a computed constant after honest error accounting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Negative,
    Positive,
    Indeterminate,
}

/// One optimized constant: value, stacked uncertainty, minimizing t.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateValue {
    pub value: f64,
    pub uncertainty: f64,
    pub t_argmin: f64,
}

impl RateValue {
    pub fn sign(&self) -> Sign {
        if self.value + self.uncertainty < 0.0 {
            Sign::Negative
        } else if self.value - self.uncertainty > 0.0 {
            Sign::Positive
        } else {
            Sign::Indeterminate
        }
    }

    /// Error (for exit-code mapping) unless the enclosure is wholly negative.
    pub fn certify_negative(&self, label: &str) -> Result<()> {
        match self.sign() {
            Sign::Negative => Ok(()),
            _ => Err(Error::IndeterminateSign(format!(
                "{label} = {:.3e} ± {:.1e} does not exclude zero",
                self.value, self.uncertainty
            ))),
        }
    }
}

/// The four exponents for one base and tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct RateConstants {
    pub beta: f64,
    pub epsilon: f64,
    /// Midpoint of the a(β) enclosure.
    pub a: f64,
    pub theta1: RateValue,
    pub theta2: RateValue,
    pub theta: RateValue,
    pub theta_star: RateValue,
}

#[derive(Clone, Copy)]
enum Kind {
    Theta1,
    Theta2,
    ThetaPlain,
    ThetaStar,
}

fn objective(
    kind: Kind,
    t: f64,
    log_beta: f64,
    a: f64,
    eps: f64,
    tier: Tier,
) -> Result<(f64, f64)> {
    match kind {
        Kind::Theta1 => {
            let p = pressure_refined(1.0 + t, tier)?;
            let c = a + eps;
            Ok((
                (t * log_beta + c * p.value) / (1.0 + t),
                c * p.uncertainty / (1.0 + t),
            ))
        }
        Kind::Theta2 => {
            let p = pressure_refined(1.0 - t, tier)?;
            let c = a - eps;
            Ok((-t * log_beta + c * p.value, c * p.uncertainty))
        }
        Kind::ThetaPlain => {
            let p = pressure_refined(1.0 - t, tier)?;
            Ok((-t * log_beta + p.value, p.uncertainty))
        }
        Kind::ThetaStar => {
            let p = pressure_refined(1.0 + t, tier)?;
            Ok((
                (t * log_beta + p.value) / (1.0 + t),
                p.uncertainty / (1.0 + t),
            ))
        }
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Grid scan then golden-section refinement; the objective is not assumed
/// convex globally, so the scan picks the basin first.
fn minimize<F: Fn(f64) -> Result<f64>>(f: F, grid: &[f64]) -> Result<(f64, f64)> {
    let mut best = (f64::INFINITY, 0usize);
    let mut vals = Vec::with_capacity(grid.len());
    for (i, &t) in grid.iter().enumerate() {
        let v = f(t)?;
        let v = if v.is_finite() { v } else { f64::INFINITY };
        if v < best.0 {
            best = (v, i);
        }
        vals.push(v);
    }
    let i = best.1;
    let mut a = grid[i.saturating_sub(1)];
    let mut b = grid[(i + 1).min(grid.len() - 1)];
    if a >= b {
        return Ok((grid[i], best.0));
    }
    const PHI_INV: f64 = 0.618_033_988_749_894_8;
    let mut c = b - PHI_INV * (b - a);
    let mut d = a + PHI_INV * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    for _ in 0..24 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - PHI_INV * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + PHI_INV * (b - a);
            fd = f(d)?;
        }
    }
    let (t, v) = if fc < fd { (c, fc) } else { (d, fd) };
    if v < best.0 {
        Ok((t, v))
    } else {
        Ok((grid[i], best.0))
    }
}

fn optimize_kind(kind: Kind, log_beta: f64, a: f64, eps: f64, tier: Tier) -> Result<RateValue> {
    let grid = match kind {
        Kind::Theta1 | Kind::ThetaStar => log_grid(1e-3, 50.0, 28),
        Kind::Theta2 | Kind::ThetaPlain => log_grid(1e-3, 0.4995, 24),
    };
    let (t_star, _) = minimize(
        |t| objective(kind, t, log_beta, a, eps, Tier::Coarse).map(|(v, _)| v),
        &grid,
    )?;
    let (value, uncertainty) = objective(kind, t_star, log_beta, a, eps, tier)?;
    Ok(RateValue {
        value,
        uncertainty,
        t_argmin: t_star,
    })
}

/// All four exponents at the certification tier.
pub fn rate_constants(beta: &ExactRational, epsilon: f64) -> Result<RateConstants> {
    rate_constants_at(beta, epsilon, Tier::Certify)
}

/// All four exponents at an explicit tier (the coarse tier is useful for
/// smoke tests; reported numbers should use [`rate_constants`]).
pub fn rate_constants_at(beta: &ExactRational, epsilon: f64, tier: Tier) -> Result<RateConstants> {
    let a_enc = lochs_constant(beta)?;
    let a = a_enc.to_f64();
    if !epsilon.is_finite() || epsilon <= 0.0 {
        return Err(Error::Domain(format!(
            "epsilon must be positive; got {epsilon}"
        )));
    }
    if epsilon >= a {
        return Err(Error::Domain(format!(
            "epsilon = {epsilon} must stay below the ratio constant a = {a:.6}"
        )));
    }
    let log_beta = ln_rational(beta, DEFAULT_DIGITS)?.to_f64();
    let theta1 = optimize_kind(Kind::Theta1, log_beta, a, epsilon, tier)?;
    let theta2 = optimize_kind(Kind::Theta2, log_beta, a, epsilon, tier)?;
    let theta = optimize_kind(Kind::ThetaPlain, log_beta, a, epsilon, tier)?;
    let theta_star = optimize_kind(Kind::ThetaStar, log_beta, a, epsilon, tier)?;
    Ok(RateConstants {
        beta: num_traits::ToPrimitive::to_f64(beta).unwrap_or(f64::NAN),
        epsilon,
        a,
        theta1,
        theta2,
        theta,
        theta_star,
    })
}

/// τ(γ) = inf_{t} (tγ + P(t)) / γ, defined for γ at or above twice the log
/// of the golden ratio (below that the infimum diverges).
pub fn lyapunov_tau(gamma: f64) -> Result<RateValue> {
    lyapunov_tau_at(gamma, Tier::Certify)
}

pub fn lyapunov_tau_at(gamma: f64, tier: Tier) -> Result<RateValue> {
    let floor = golden_gamma_min(DEFAULT_DIGITS).to_f64();
    if !gamma.is_finite() || gamma < floor {
        return Err(Error::Domain(format!(
            "tau needs gamma ≥ 2·log((√5+1)/2) ≈ {floor:.10}; got {gamma}"
        )));
    }
    let grid = log_grid(0.55, 50.0, 28);
    let (t_star, _) = minimize(
        |t| pressure_refined(t, Tier::Coarse).map(|p| t * gamma + p.value),
        &grid,
    )?;
    if t_star >= grid[grid.len() - 2] {
        return Err(Error::Range(format!(
            "tau minimizer for gamma = {gamma} exceeds the search range"
        )));
    }
    let p = pressure_refined(t_star, tier)?;
    Ok(RateValue {
        value: (t_star * gamma + p.value) / gamma,
        uncertainty: p.uncertainty / gamma,
        t_argmin: t_star,
    })
}

/// Central-difference slope of the pressure at θ=1, with two step sizes
/// reported and combined by Richardson extrapolation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeReport {
    pub estimate: f64,
    pub h_coarse: f64,
    pub h_fine: f64,
    pub d_coarse: f64,
    pub d_fine: f64,
    pub uncertainty: f64,
}

pub fn pressure_derivative_at_1() -> Result<DerivativeReport> {
    let tier = Tier::Coarse;
    let (h1, h2) = (0.1, 0.05);
    let diff = |h: f64| -> Result<(f64, f64)> {
        let up = pressure_refined(1.0 + h, tier)?;
        let dn = pressure_refined(1.0 - h, tier)?;
        Ok((
            (up.value - dn.value) / (2.0 * h),
            (up.uncertainty + dn.uncertainty) / (2.0 * h),
        ))
    };
    let (d1, _) = diff(h1)?;
    let (d2, u2) = diff(h2)?;
    let estimate = (4.0 * d2 - d1) / 3.0;
    Ok(DerivativeReport {
        estimate,
        h_coarse: h1,
        h_fine: h2,
        d_coarse: d1,
        d_fine: d2,
        uncertainty: (d2 - estimate).abs() + u2,
    })
}

/// log β compared against the threshold π²/(6·log 2) that separates the
/// sign regimes of θ and θ*.
pub fn supercritical(beta: &ExactRational) -> Result<bool> {
    let lb = ln_rational(beta, DEFAULT_DIGITS)?;
    let crit = critical_log_beta(DEFAULT_DIGITS);
    Ok(lb.lo > crit.hi)
}
