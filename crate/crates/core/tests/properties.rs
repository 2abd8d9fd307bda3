//! Randomized property suites over the exact-arithmetic core: every case is
//! checked with rational comparisons (no floats in any assertion), and a
//! single violation fails the suite. Sample streams are seeded, so failures
//! reproduce bit-for-bit.

use betacf_core::{
    beta_digits, cf_cylinder, cf_digits, count_admissible, cylinder_at, cylinder_contained,
    diophantine_gap, failure_bound_check, kn_series, kn_values_at, zero_run, zero_run_tail,
    ContainmentWitness, ExactRational, KnOutcome, SamplePlan,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CASES: usize = 10_000;

fn ratio(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n.into(), d.into())
}

/// β^k as an exact rational, k ≥ 0.
fn pow_rational(beta: &ExactRational, k: usize) -> ExactRational {
    ExactRational::new(beta.numer().pow(k as u32), beta.denom().pow(k as u32))
}

fn rng_for(suite: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xB37A_0000 + suite)
}

/// Random x ∈ (0,1) with a denominator up to 2^den_bits (not only dyadic).
fn random_point(rng: &mut ChaCha8Rng, den_bits: u32) -> ExactRational {
    let den = (rng.next_u64() >> (64 - den_bits)).max(2);
    let num = 1 + rng.next_u64() % (den - 1);
    ExactRational::new(BigInt::from(num), BigInt::from(den))
}

/// Mixed bag of bases: the three enumeration bases, two integers, and a
/// random small rational in (1, 9).
fn random_beta(rng: &mut ChaCha8Rng) -> ExactRational {
    match rng.next_u64() % 6 {
        0 => ratio(3, 2),
        1 => ratio(1_618_033_988, 1_000_000_000),
        2 => ratio(5, 2),
        3 => ratio(2, 1),
        4 => ratio(10, 1),
        _ => {
            let q = 1 + rng.next_u64() % 64;
            let p = q + 1 + rng.next_u64() % (8 * q);
            ExactRational::new(BigInt::from(p), BigInt::from(q))
        }
    }
}

/// Cylinder length obeys β^{−(n+l_n+1)} ≤ |J_n| ≤ β^{−n}, checked by exact
/// cross multiplication. Cases where the zero run cannot be resolved inside
/// the window are skipped and counted.
#[test]
fn cylinder_length_two_sided_bounds() {
    let mut rng = rng_for(1);
    let mut skipped = 0usize;
    for _ in 0..CASES {
        let x = random_point(&mut rng, 40);
        let beta = random_beta(&mut rng);
        let n = 1 + (rng.next_u64() % 8) as usize;
        let window = n + 48;
        let orbit = beta_digits(&x, &beta, window).unwrap();
        let j = cylinder_at(&orbit, n).unwrap();
        // upper: |J_n| · β^n ≤ 1
        let one = ExactRational::one();
        assert!(
            &j.length * pow_rational(&beta, n) <= one,
            "upper bound failed at x={x} beta={beta} n={n}"
        );
        match zero_run(&orbit, n) {
            Ok(l) => {
                // lower: |J_n| · β^{n+l+1} ≥ 1
                assert!(
                    &j.length * pow_rational(&beta, n + l + 1) >= one,
                    "lower bound failed at x={x} beta={beta} n={n} l={l}"
                );
            }
            Err(_) => skipped += 1,
        }
    }
    assert!(
        skipped < CASES / 20,
        "too many unresolved zero runs: {skipped}"
    );
}

/// Admissible word counts sit between β^n and β^{n+1}/(β−1): exhaustively
/// for the three pinned bases to depth 12, and for random small bases to
/// depth 5, compared in exact arithmetic.
#[test]
fn admissible_word_count_bounds() {
    let check = |beta: &ExactRational, n: usize| {
        let count = count_admissible(beta, n).unwrap();
        let count = ExactRational::from_integer(count.into());
        let lower = pow_rational(beta, n);
        let upper = pow_rational(beta, n + 1) / (beta - ExactRational::one());
        assert!(
            lower <= count && count <= upper,
            "count bounds failed at beta={beta} n={n}: {count}"
        );
    };
    for beta in [
        ratio(3, 2),
        ratio(1_618_033_988, 1_000_000_000),
        ratio(5, 2),
    ] {
        for n in 1..=12 {
            check(&beta, n);
        }
    }
    let mut rng = rng_for(2);
    for _ in 0..CASES {
        let q = 1 + rng.next_u64() % 32;
        let p = q + 1 + rng.next_u64() % (3 * q);
        let beta = ExactRational::new(BigInt::from(p), BigInt::from(q));
        let n = 1 + (rng.next_u64() % 5) as usize;
        check(&beta, n);
    }
}

/// p_k q_{k−1} − p_{k−1} q_k = (−1)^{k−1} at every depth of every random
/// expansion.
#[test]
fn convergent_determinant_identity() {
    let mut rng = rng_for(3);
    for _ in 0..CASES {
        let x = random_point(&mut rng, 48);
        let state = cf_digits(&x, usize::MAX).unwrap();
        for k in 0..=state.depth() as isize {
            let det = state.p(k) * state.q(k - 1) - state.p(k - 1) * state.q(k);
            let want = if k % 2 == 0 {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            assert_eq!(det, want, "determinant failed at x={x} k={k}");
        }
    }
}

/// 1/(2q_{n+1}²) ≤ |x − p_n/q_n| ≤ 1/q_n² at every interior depth; the
/// checked division is exact and the gap function asserts both sides.
#[test]
fn convergent_gap_two_sided_sandwich() {
    let mut rng = rng_for(4);
    for _ in 0..CASES {
        let x = random_point(&mut rng, 40);
        let state = cf_digits(&x, usize::MAX).unwrap();
        for n in 0..state.depth() {
            let gap = diophantine_gap(&state, n).unwrap();
            assert!(gap.is_positive(), "interior gap must be positive");
        }
        let m = state.depth();
        assert!(state.exhausted);
        assert!(diophantine_gap(&state, m).unwrap().is_zero());
    }
}

/// Containment of J_n in the nested CF cylinders is decided identically by
/// the interval test, the witness record, and the integer fast path; the
/// witnessed k is pinned from both sides (inside at k, outside at k+1).
#[test]
fn containment_equivalence_and_fast_path_agreement() {
    let mut rng = rng_for(5);
    let depths = [1usize, 2, 3, 4, 5];
    let mut skipped = 0usize;
    for _ in 0..CASES {
        let x = random_point(&mut rng, 36);
        let beta = random_beta(&mut rng);
        let orbit = match beta_digits(&x, &beta, 5) {
            Ok(o) => o,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        if orbit.terminated_at().is_some() {
            skipped += 1;
            continue;
        }
        let series = kn_series(&x, &beta, 5).unwrap();
        let fast = kn_values_at(&x, &beta, &depths);
        let state = cf_digits(&x, usize::MAX).unwrap();
        for (i, cert) in series.iter().enumerate() {
            match fast[i] {
                KnOutcome::Value(k) => {
                    assert!(!cert.truncated);
                    assert_eq!(cert.k as u32, k, "paths disagree at x={x} beta={beta}");
                }
                KnOutcome::Truncated => assert!(cert.truncated),
                KnOutcome::Terminated => unreachable!("terminated orbits are skipped"),
            }
            let j = cylinder_at(&orbit, cert.n).unwrap();
            // inside at every m ≤ k, outside at k+1 (when the data exists)
            for m in 0..=cert.k {
                let i_m = cf_cylinder(&state, m).unwrap();
                let w = ContainmentWitness::build(&j, &i_m);
                assert_eq!(w.contained, cylinder_contained(&j, &i_m));
                assert!(w.contained && w.verify());
            }
            if cert.k + 1 <= state.depth() {
                let i_next = cf_cylinder(&state, cert.k + 1).unwrap();
                let w = ContainmentWitness::build(&j, &i_next);
                assert_eq!(w.contained, cylinder_contained(&j, &i_next));
                assert!(!w.contained && w.verify());
            }
        }
        if series.last().map(|c| c.truncated) != Some(true) {
            assert_eq!(series.len(), depths.len());
        }
    }
    assert!(skipped < CASES / 10, "too many skipped samples: {skipped}");
}

/// Whenever containment fails at depth k+1, the β-cylinder is no shorter
/// than 1/(6·q_{k+3}²); insufficient continued-fraction data is a Range
/// refusal, never a silent pass.
#[test]
fn short_cylinder_failure_bound() {
    let mut rng = rng_for(6);
    let mut checked = 0usize;
    for _ in 0..CASES {
        let x = random_point(&mut rng, 36);
        let beta = random_beta(&mut rng);
        let orbit = match beta_digits(&x, &beta, 6) {
            Ok(o) => o,
            Err(_) => continue,
        };
        if orbit.terminated_at().is_some() {
            continue;
        }
        let series = kn_series(&x, &beta, 6).unwrap();
        let state = cf_digits(&x, usize::MAX).unwrap();
        for cert in &series {
            if cert.truncated {
                continue;
            }
            let cyl = cylinder_at(&orbit, cert.n).unwrap();
            if cert.k + 3 <= state.depth() {
                assert!(
                    failure_bound_check(cert, &state, &cyl).unwrap(),
                    "failure bound violated at x={x} beta={beta} n={}",
                    cert.n
                );
                checked += 1;
            } else {
                assert!(failure_bound_check(cert, &state, &cyl).is_err());
            }
        }
    }
    assert!(checked > CASES, "bound exercised too rarely: {checked}");
}

/// Estimated zero-run tail measures sit below β^{1−i}/(β−1): the Wilson
/// lower end of each estimate never clears the proven ceiling.
#[test]
fn zero_run_tail_measure_bound() {
    let configs = [
        (ratio(10, 1), 20usize, 101u64),
        (ratio(2, 1), 20, 202),
        (ratio(3, 2), 15, 303),
        (ratio(5, 2), 15, 404),
    ];
    let i_list = [0usize, 1, 2, 3, 4, 5, 6];
    for (beta, n, seed) in configs {
        let plan = SamplePlan::for_depth(seed, 2_500, beta.clone(), n + 16).unwrap();
        let entries = zero_run_tail(&plan, n, &i_list).unwrap();
        assert_eq!(entries.len(), i_list.len());
        for e in &entries {
            assert!(
                e.ci_low <= e.bound,
                "tail estimate clears the ceiling at beta={beta} i={}: {} > {}",
                e.i,
                e.ci_low,
                e.bound
            );
            assert!(e.measure_estimate <= 1.0 && e.ci_low <= e.measure_estimate);
        }
        // tails are nonincreasing in i by inclusion of events
        for w in entries.windows(2) {
            assert!(w[1].measure_estimate <= w[0].measure_estimate);
        }
    }
}

/// The counter is nondecreasing in n, never exceeds the quotient count, and
/// every reported value carries self-verifying inside/outside witnesses.
#[test]
fn counter_monotone_with_certificates() {
    let mut rng = rng_for(8);
    let mut skipped = 0usize;
    for _ in 0..CASES {
        let x = random_point(&mut rng, 36);
        let beta = random_beta(&mut rng);
        let series = match kn_series(&x, &beta, 6) {
            Ok(s) => s,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let state = cf_digits(&x, usize::MAX).unwrap();
        let mut prev = 0usize;
        for cert in &series {
            assert!(cert.k >= prev, "counter decreased at x={x} beta={beta}");
            prev = cert.k;
            assert!(cert.k <= state.depth());
            assert!(cert.witness_in.contained && cert.witness_in.verify());
            match &cert.witness_out {
                Some(w) => {
                    assert!(!w.contained && w.verify());
                    assert!(!cert.truncated);
                }
                None => assert!(cert.truncated),
            }
        }
    }
    assert!(skipped < CASES / 10, "too many skipped samples: {skipped}");
}
