//! Inverse-CDF sampling over tails and a reproducible Monte Carlo check of
//! selection expectations.
//!
//! Uniform variates are exact rationals `x / 2^64` from a ChaCha12 stream,
//! so the inverse-CDF comparison `q_j > u` is exact and the whole estimate
//! is bit-reproducible from `(seed, trial index)` on every platform.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::model::{selection_expectation, Instance, ModelError, Selection, TailDistribution, ValueGrid};
use crate::rational::{format_decimal, format_decimal_sqrt, format_rational, Rational};
use crate::serial::TRIAL_FORMAT;

/// Name and parameterization of the pseudo-random source, recorded in every
/// report: ChaCha12, 64-bit seed, stream id = trial index, word position 0.
pub const PRNG_CONTRACT: &str = "chacha12/seed64/stream-per-trial";

/// Largest grid value `l_j` whose tail still exceeds `u`: the inverse CDF
/// read off the tail probabilities (`q_0 = 1`, so `u < 1` always lands).
pub fn sample_variable(grid: &ValueGrid, dist: &TailDistribution, u: &Rational) -> Rational {
    assert!(!u.is_negative() && *u < Rational::one(), "u must lie in [0, 1)");
    for j in (1..grid.d()).rev() {
        if dist.tail(j) > *u {
            return grid.value(j).clone();
        }
    }
    grid.value(0).clone()
}

/// Sampling statistics for one (instance, selection) pair.
///
/// `mean` and `stderr` are decimals with 12 significant digits,
/// round-half-even, rendered from exact integer counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialReport {
    pub format_tag: String,
    pub mean: String,
    pub stderr: String,
    pub trials: u64,
    pub seed: u64,
    pub exact_reference: Option<String>,
    pub prng: String,
}

impl TrialReport {
    pub fn to_canonical_string(&self) -> String {
        let mut text = serde_json::to_string(self).expect("trial reports always serialize");
        text.push('\n');
        text
    }
}

fn u64_to_unit_rational(x: u64) -> Rational {
    Rational::new(BigInt::from(x), BigInt::one() << 64u32)
}

/// Samples each selected variable independently per trial and accumulates
/// the minimum; mean and standard error come from exact per-grid-value
/// counts, with the exact expectation attached for comparison.
pub fn monte_carlo_estimate(
    instance: &Instance,
    selection: &Selection,
    trials: u64,
    seed: u64,
) -> Result<TrialReport, ModelError> {
    assert!(trials >= 2, "need at least two trials");
    let exact = selection_expectation(instance, selection)?;
    let grid = instance.grid();
    let selected: Vec<&TailDistribution> = match (instance, selection) {
        (Instance::Binary(inst), Selection::Bits(bits)) => bits
            .iter()
            .enumerate()
            .map(|(i, &b)| inst.option(i, b))
            .collect(),
        (Instance::Subset(inst), Selection::Choose(chosen)) => {
            chosen.iter().map(|&i| &inst.items()[i]).collect()
        }
        _ => unreachable!("selection_expectation validated the pairing"),
    };
    let mut counts = vec![0u64; grid.d()];
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    // Every selected variable consumes exactly one u64 per trial, so the
    // stream layout is independent of the sampled values.
    for trial in 0..trials {
        rng.set_stream(trial);
        rng.set_word_pos(0);
        let mut min_index = grid.d() - 1;
        for dist in &selected {
            let u = u64_to_unit_rational(rng.next_u64());
            // Inline inverse CDF on indices (sample_variable returns values).
            let mut index = 0;
            for j in (1..grid.d()).rev() {
                if dist.tail(j) > u {
                    index = j;
                    break;
                }
            }
            min_index = min_index.min(index);
        }
        counts[min_index] += 1;
    }
    // Exact first and second moments from the counts.
    let trials_rat = Rational::from_integer(BigInt::from(trials));
    let mut sum = Rational::zero();
    let mut sum_sq = Rational::zero();
    for (j, &count) in counts.iter().enumerate() {
        if count == 0 {
            continue;
        }
        let c = Rational::from_integer(BigInt::from(count));
        let value = grid.value(j);
        sum += &c * value;
        sum_sq += &c * value * value;
    }
    let mean = &sum / &trials_rat;
    // Sample variance: (sum_sq - trials * mean^2) / (trials - 1).
    let variance = (&sum_sq - &trials_rat * &mean * &mean)
        / Rational::from_integer(BigInt::from(trials - 1));
    let variance = if variance.is_negative() {
        Rational::zero()
    } else {
        variance
    };
    let stderr_sq = &variance / &trials_rat;
    Ok(TrialReport {
        format_tag: TRIAL_FORMAT.to_owned(),
        mean: format_decimal(&mean, 12),
        stderr: format_decimal_sqrt(&stderr_sq, 12),
        trials,
        seed,
        exact_reference: Some(format_rational(&exact)),
        prng: PRNG_CONTRACT.to_owned(),
    })
}

/// |mean - exact| <= multiplier * stderr, evaluated on the decimal renderings
/// (the acceptance criterion's tolerance dwarfs the rendering error).
pub fn within_stderr_band(report: &TrialReport, exact: &Rational, multiplier: u32) -> bool {
    let mean = parse_decimal(&report.mean);
    let stderr = parse_decimal(&report.stderr);
    let deviation = (mean - exact).abs();
    deviation <= stderr * Rational::from_integer(BigInt::from(multiplier))
}

fn parse_decimal(text: &str) -> Rational {
    let (sign, rest) = match text.strip_prefix('-') {
        Some(rest) => (-1i32, rest),
        None => (1, text),
    };
    let (int_part, frac_part) = rest.split_once('.').unwrap_or((rest, ""));
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = digits.parse().expect("decimal renderings parse");
    let denom = BigInt::from(10u32).pow(frac_part.len() as u32);
    Rational::new(numer * BigInt::from(sign), denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BinaryInstance;
    use crate::rational::{rat, rat_int};
    use crate::seeded::tiny_example;

    fn grid_013() -> ValueGrid {
        ValueGrid::new(vec![rat_int(0), rat_int(1), rat_int(3)]).unwrap()
    }

    fn dist(tails: &[Rational]) -> TailDistribution {
        TailDistribution::new(tails.to_vec(), tails.len() + 1).unwrap()
    }

    #[test]
    fn inverse_cdf_thresholds() {
        let grid = grid_013();
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        assert_eq!(sample_variable(&grid, &d, &rat(3, 5)), rat_int(0));
        assert_eq!(sample_variable(&grid, &d, &rat(3, 10)), rat_int(1));
        assert_eq!(sample_variable(&grid, &d, &rat(1, 10)), rat_int(3));
        // u = 0 returns the top of the support (largest j with q_j > 0).
        assert_eq!(sample_variable(&grid, &d, &rat_int(0)), rat_int(3));
        let zero = dist(&[rat_int(0), rat_int(0)]);
        assert_eq!(sample_variable(&grid, &zero, &rat_int(0)), rat_int(0));
    }

    #[test]
    fn low_discrepancy_frequencies_match_tails() {
        // Deterministic u = (2i+1)/(2N): frequencies of {>= l_j} match q_j
        // within 1%.
        let grid = grid_013();
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        let n = 100_000u64;
        let mut at_least = [0u64; 3];
        for i in 0..n {
            let u = Rational::new(BigInt::from(2 * i + 1), BigInt::from(2 * n));
            let v = sample_variable(&grid, &d, &u);
            for (j, l) in grid.values().iter().enumerate() {
                if v >= *l {
                    at_least[j] += 1;
                }
            }
        }
        let tolerance = rat(1, 100);
        for j in 1..3 {
            let freq = rat(at_least[j] as i64, n as i64);
            let q = d.tail(j);
            assert!(
                (freq - q).abs() <= tolerance,
                "tail {j} frequency off by more than 1%"
            );
        }
    }

    #[test]
    fn deterministic_instance_has_zero_stderr() {
        let grid = grid_013();
        let zeros = dist(&[rat_int(0), rat_int(0)]);
        let inst = Instance::Binary(
            BinaryInstance::new(grid, vec![[zeros.clone(), zeros]]).unwrap(),
        );
        let report =
            monte_carlo_estimate(&inst, &Selection::Bits(vec![false]), 100, 7).unwrap();
        assert_eq!(report.mean, "0");
        assert_eq!(report.stderr, "0");
        assert_eq!(report.exact_reference.as_deref(), Some("0"));
    }

    #[test]
    fn same_seed_reproduces_bit_identically() {
        let instance = tiny_example();
        let sel = Selection::Bits(vec![false, true, false]);
        let a = monte_carlo_estimate(&instance, &sel, 2_000, 42).unwrap();
        let b = monte_carlo_estimate(&instance, &sel, 2_000, 42).unwrap();
        assert_eq!(a.to_canonical_string(), b.to_canonical_string());
        let c = monte_carlo_estimate(&instance, &sel, 2_000, 43).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn estimate_lands_near_exact() {
        let instance = tiny_example();
        let sel = Selection::Bits(vec![false, true, false]);
        let exact = selection_expectation(&instance, &sel).unwrap();
        let report = monte_carlo_estimate(&instance, &sel, 20_000, 11).unwrap();
        assert!(within_stderr_band(&report, &exact, 4));
    }
}
