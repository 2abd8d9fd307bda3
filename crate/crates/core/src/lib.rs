//! Exact-arithmetic β-expansions and continued fractions, the Lochs
//! counter k_n(x) with containment certificates, cylinder-sum pressure
//! evaluation with certified brackets, the derived Diophantine rate
//! constants, and reproducible Monte Carlo experiments over them.
//!
//! Everything numerical is anchored to exact rational arithmetic: digit
//! computations never round, cylinder containment is decided by integer
//! cross-multiplication, and floating point appears only in pressure
//! estimates (with explicit enclosures) and in Monte Carlo summaries.

pub mod beta;
pub mod cf;
pub mod constants;
pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod lochs;
pub mod pressure;
pub mod rates;
pub mod rational;

pub use beta::{
    beta_digits, count_admissible, cylinder, cylinder_at, zero_run, BetaCylinder, BetaOrbit,
};
pub use cf::{
    cf_cylinder, cf_digits, diophantine_gap, partition_check, tiling_lower_bound, CFCylinder,
    CFState,
};
pub use constants::{Enclosure, DEFAULT_DIGITS};
pub use error::{Error, Result};
pub use experiments::{
    approx_compare, decay_fit, deviation_measure, lochs_mean, sample_points, wilson_ci,
    ApproxEntry, DeviationEntry, DeviationSeries, FitReport, MeanReport, SamplePlan, ZeroRunEntry,
};
pub use experiments::{pressure_mc, zero_run_tail, McPressure};
pub use fixtures::{fixture_by_name, pi_fixture, PI_FIXTURE_SHA256, PI_MINUS_3_DIGITS};
pub use lochs::{
    cylinder_contained, failure_bound_check, kn, kn_series, kn_values_at, ContainmentWitness,
    KnOutcome, LochsCertificate, Side,
};
pub use pressure::{
    enumerate_small, levels_bracket, pressure, pressure_with_cells, LevelBracket, PressureEstimate,
};
pub use rates::{
    lochs_constant, lyapunov_tau, lyapunov_tau_at, pressure_derivative_at_1, pressure_refined,
    rate_constants, rate_constants_at, supercritical, DerivativeReport, RateConstants, RateValue,
    RefinedPressure, Sign, Tier,
};
pub use rational::{rational_from_decimal, to_decimal_string, ExactRational, PrecisionPolicy};
