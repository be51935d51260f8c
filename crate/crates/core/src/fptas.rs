//! Approximation scheme for min-min selection at fixed support size:
//! scaled-log rounding plus a reachability table over integer tuples, with
//! selection reconstruction and exact re-evaluation.
//!
//! With scale `gamma = epsilon/(6n)`, every finite log component is rounded
//! down to an integer in `[x-2, x]`. The componentwise sums reachable by
//! selections form a table of at most `(T+2)^(d-1)` tuples per stage, where
//! `T` bounds every achievable finite sum. Minimizing over reachable tuples
//! and re-scoring the reconstructed selection exactly yields a value within
//! a factor `e^(2n*gamma) <= 1 + epsilon/2` of the optimum.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::interval::{ln_interval, Interval};
use crate::model::{
    f_eval, min_combine, selection_expectation, to_log_vector, Instance, LogComponent, LogVector,
    ModelError, Selection,
};
use crate::rational::{floor_int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FptasError {
    #[error("epsilon must satisfy 0 < epsilon <= 1, got {0}")]
    EpsilonOutOfRange(String),
    #[error("certified interval too wide at {0} bits; retry with more precision")]
    PrecisionInsufficient(u32),
    #[error("the approximation scheme requires l_0 >= 0")]
    GridNegative,
    #[error("rounded table bound T = {0} does not fit the table index type")]
    BoundOverflow(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl FptasError {
    pub fn code(&self) -> &'static str {
        match self {
            FptasError::EpsilonOutOfRange(_) => "EPSILON_OUT_OF_RANGE",
            FptasError::PrecisionInsufficient(_) => "PRECISION_INSUFFICIENT",
            FptasError::GridNegative => "GRID_NEGATIVE",
            FptasError::BoundOverflow(_) => "BOUND_OVERFLOW",
            FptasError::Model(e) => e.code(),
        }
    }
}

/// Approximation quality and the log precision used for rounding.
#[derive(Debug, Clone)]
pub struct FptasConfig {
    epsilon: Rational,
    pub log_precision: u32,
}

impl FptasConfig {
    pub fn new(epsilon: Rational) -> Result<Self, FptasError> {
        if !epsilon.is_positive() || epsilon > Rational::one() {
            return Err(FptasError::EpsilonOutOfRange(epsilon.to_string()));
        }
        Ok(FptasConfig {
            epsilon,
            log_precision: 32,
        })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// The scale factor `gamma = epsilon / (6n)`; never stored, always derived.
    pub fn gamma(&self, n: usize) -> Rational {
        &self.epsilon / Rational::from_integer(BigInt::from(6 * n as u64))
    }

    /// The guaranteed approximation ratio `1 + epsilon`.
    pub fn ratio_bound(&self) -> Rational {
        Rational::one() + &self.epsilon
    }
}

/// One distribution's rounded log vector: integers in `{0, …, T, T+1}` where
/// `T+1` encodes an infinite component (a zero tail probability).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundedVector {
    pub components: Vec<u64>,
}

/// Rounded vectors for a whole instance, one group per pair (two entries)
/// or per item (one entry), together with the shared bound `T`.
#[derive(Debug, Clone)]
pub struct Rounding {
    pub t: u64,
    pub groups: Vec<Vec<RoundedVector>>,
}

impl Rounding {
    pub fn sentinel(&self) -> u64 {
        self.t + 1
    }
}

fn all_tails(instance: &Instance) -> Vec<&Rational> {
    let mut tails = Vec::new();
    match instance {
        Instance::Binary(inst) => {
            for pair in inst.pairs() {
                for dist in pair {
                    tails.extend(dist.tails().iter());
                }
            }
        }
        Instance::Subset(inst) => {
            for item in inst.items() {
                tails.extend(item.tails().iter());
            }
        }
    }
    tails
}

/// An integer `T` certified to lie in `[g, g+2]` for
/// `g = gamma^-1 ln(1/p*)`, where `p*` is the product of every nonzero tail
/// probability in the input. No achievable finite component sum exceeds `g`,
/// hence none exceeds `T`.
pub fn compute_t(instance: &Instance, gamma: &Rational, precision: u32) -> Result<u64, FptasError> {
    assert!(gamma.is_positive());
    let tails: Vec<&Rational> = all_tails(instance)
        .into_iter()
        .filter(|q| !q.is_zero())
        .collect();
    let count_bits = 64 - (tails.len() as u64 + 1).leading_zeros();
    let inv_gamma_mag = (gamma.denom().bits() as i64 - gamma.numer().bits() as i64 + 1).max(0);
    let bits = precision.max(16) + count_bits + inv_gamma_mag as u32;
    // gamma^-1 * sum(-ln q) with every term certified.
    let mut total = Interval::zero();
    for q in tails {
        if q.is_one() {
            continue;
        }
        total = total.add(&ln_interval(q, bits).neg());
    }
    let total = total.scale(&gamma.recip());
    if total.width() > Rational::new(BigInt::one(), BigInt::from(2)) {
        return Err(FptasError::PrecisionInsufficient(precision));
    }
    // T = ceil(hi) >= g, and T <= lo + width + 1 <= g + 2.
    let t = -floor_int(&-total.hi().clone());
    if t.is_negative() {
        return Ok(0);
    }
    u64::try_from(t.clone()).map_err(|_| FptasError::BoundOverflow(t.to_string()))
}

/// Rounds one distribution's log vector down to integers in `[x-2, x]`,
/// clamped at zero; zero tails become the sentinel `t + 1`.
fn round_distribution(
    log_vector: &LogVector,
    t: u64,
) -> Result<RoundedVector, FptasError> {
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    let components = log_vector
        .components()
        .iter()
        .map(|component| match component {
            LogComponent::Infinite => Ok(t + 1),
            LogComponent::Finite(interval) => {
                if interval.width() > Rational::one() {
                    return Err(FptasError::PrecisionInsufficient(0));
                }
                // Midpoint is within 1/2 of the true component, so
                // floor(mid - 1/2) lands in [x-2, x].
                let rounded = floor_int(&(interval.midpoint() - &half));
                let clamped = if rounded.is_negative() {
                    BigInt::zero()
                } else {
                    rounded
                };
                let value = u64::try_from(clamped).expect("component below T fits in u64");
                debug_assert!(value <= t, "certified rounding exceeded T");
                Ok(value.min(t))
            }
        })
        .collect::<Result<Vec<u64>, FptasError>>()?;
    Ok(RoundedVector { components })
}

/// Rounded vectors for every option of every pair (binary) or every item
/// (subset), plus the certified bound `T`.
pub fn round_vectors(instance: &Instance, config: &FptasConfig) -> Result<Rounding, FptasError> {
    if !instance.grid().nonnegative() {
        return Err(FptasError::GridNegative);
    }
    let gamma = config.gamma(instance.n());
    // Absolute width of each log component must be below 1/2 for the
    // midpoint rule; 2 + ceil(log2(1/gamma)) bits of ln precision suffice.
    let inv_gamma_mag = (gamma.denom().bits() as i64 - gamma.numer().bits() as i64 + 1).max(0);
    let precision = config.log_precision.max(3 + inv_gamma_mag as u32).max(16);
    let t = compute_t(instance, &gamma, precision)?;
    let round_group = |dists: &[&crate::model::TailDistribution]| {
        dists
            .iter()
            .map(|dist| {
                let lv = to_log_vector(dist, &gamma, precision)?;
                round_distribution(&lv, t)
            })
            .collect::<Result<Vec<_>, FptasError>>()
    };
    let groups = match instance {
        Instance::Binary(inst) => inst
            .pairs()
            .iter()
            .map(|pair| round_group(&[&pair[0], &pair[1]]))
            .collect::<Result<Vec<_>, _>>()?,
        Instance::Subset(inst) => inst
            .items()
            .iter()
            .map(|item| round_group(&[item]))
            .collect::<Result<Vec<_>, _>>()?,
    };
    Ok(Rounding { t, groups })
}

fn saturating_tuple_add(a: &[u64], b: &[u64], sentinel: u64) -> Vec<u64> {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            if x == sentinel || y == sentinel {
                sentinel
            } else {
                (x + y).min(sentinel)
            }
        })
        .collect()
}

/// One reachable state: the choice and predecessor that produced it, plus
/// the exact tails and expectation of the stored path prefix.
///
/// Carrying the exact prefix lets tuple collisions resolve toward the
/// cheaper path, so a rounding collision can only ever improve the answer;
/// the approximation guarantee holds for any path consistent with a tuple.
#[derive(Debug, Clone)]
pub struct PathState {
    pub choice: usize,
    pub prev: (usize, Vec<u64>),
    pub tails: crate::model::TailDistribution,
    pub expectation: Rational,
}

/// Reachability table: for each stage (and selected count, in the subset
/// variant), the set of achievable rounded sums with one back pointer each.
#[derive(Debug)]
pub struct DpTable {
    /// stages[s] maps (count m, tuple) -> the stored path state.
    /// For the binary variant m is always 0.
    pub stages: Vec<BTreeMap<(usize, Vec<u64>), PathState>>,
    pub t: u64,
}

impl DpTable {
    /// Number of addressable cells in the dense table the sparse map stands
    /// in for: stages x counts x (T+2)^(d-1).
    pub fn dense_cells(&self, dim: usize, counts: usize) -> u128 {
        let base = (self.t as u128) + 2;
        let tuple_space = base.saturating_pow(dim as u32);
        (self.stages.len() as u128)
            .saturating_mul(counts as u128)
            .saturating_mul(tuple_space)
    }

    pub fn reached_states(&self) -> u64 {
        self.stages.iter().map(|s| s.len() as u64).sum()
    }
}

fn build_table(
    instance: &Instance,
    rounding: &Rounding,
    track_count: bool,
    k: usize,
) -> Result<DpTable, FptasError> {
    let sentinel = rounding.sentinel();
    let grid = instance.grid();
    let dim = rounding.groups[0][0].components.len();
    let n = rounding.groups.len();
    let option_tails = |stage: usize, choice: usize| -> &crate::model::TailDistribution {
        match instance {
            Instance::Binary(inst) => inst.option(stage, choice == 1),
            Instance::Subset(inst) => &inst.items()[stage],
        }
    };
    // The empty prefix: all tails 1, expectation l_{d-1} by telescoping.
    let ones = crate::model::TailDistribution::new(vec![Rational::one(); dim], dim + 1)?;
    let root = PathState {
        choice: usize::MAX,
        prev: (0, Vec::new()),
        expectation: crate::model::expectation(grid, &ones)?,
        tails: ones,
    };
    let mut stages: Vec<BTreeMap<(usize, Vec<u64>), PathState>> = Vec::with_capacity(n + 1);
    let mut origin = BTreeMap::new();
    origin.insert((0, vec![0u64; dim]), root);
    stages.push(origin);
    for (stage, group) in rounding.groups.iter().enumerate() {
        let previous = stages.last().unwrap();
        let mut next: BTreeMap<(usize, Vec<u64>), PathState> = BTreeMap::new();
        let mut offer = |key: (usize, Vec<u64>), state: PathState| {
            // Colliding paths keep the exactly-cheaper prefix; ties keep the
            // first writer, which makes reconstruction deterministic.
            match next.entry(key) {
                std::collections::btree_map::Entry::Vacant(slot) => {
                    slot.insert(state);
                }
                std::collections::btree_map::Entry::Occupied(mut slot) => {
                    if state.expectation < slot.get().expectation {
                        slot.insert(state);
                    }
                }
            }
        };
        for ((m, tuple), prev_state) in previous.iter() {
            if track_count {
                // Skip this item.
                offer(
                    (*m, tuple.clone()),
                    PathState {
                        choice: 0,
                        prev: (*m, tuple.clone()),
                        tails: prev_state.tails.clone(),
                        expectation: prev_state.expectation.clone(),
                    },
                );
                // Take it, if the budget allows.
                if *m < k {
                    let sum = saturating_tuple_add(tuple, &group[0].components, sentinel);
                    let tails = min_combine(&prev_state.tails, option_tails(stage, 1))?;
                    let expectation = crate::model::expectation(grid, &tails)?;
                    offer(
                        (*m + 1, sum),
                        PathState {
                            choice: 1,
                            prev: (*m, tuple.clone()),
                            tails,
                            expectation,
                        },
                    );
                }
            } else {
                for (choice, vector) in group.iter().enumerate() {
                    let sum = saturating_tuple_add(tuple, &vector.components, sentinel);
                    let tails = min_combine(&prev_state.tails, option_tails(stage, choice))?;
                    let expectation = crate::model::expectation(grid, &tails)?;
                    offer(
                        (0, sum),
                        PathState {
                            choice,
                            prev: (0, tuple.clone()),
                            tails,
                            expectation,
                        },
                    );
                }
            }
        }
        stages.push(next);
    }
    Ok(DpTable {
        stages,
        t: rounding.t,
    })
}

fn reconstruct(table: &DpTable, final_key: &(usize, Vec<u64>)) -> Vec<usize> {
    let mut choices = Vec::with_capacity(table.stages.len() - 1);
    let mut key = final_key.clone();
    for stage in (1..table.stages.len()).rev() {
        let state = table.stages[stage]
            .get(&key)
            .expect("final key reachable by construction");
        choices.push(state.choice);
        key = state.prev.clone();
    }
    choices.reverse();
    choices
}

fn tuple_to_log_vector(tuple: &[u64], sentinel: u64, gamma: &Rational) -> LogVector {
    let components = tuple
        .iter()
        .map(|&c| {
            if c == sentinel {
                LogComponent::Infinite
            } else {
                LogComponent::Finite(Interval::point(Rational::from_integer(BigInt::from(c))))
            }
        })
        .collect();
    LogVector::new(components, gamma.clone())
}

/// Outcome of one scheme run: the reconstructed selection, a certified
/// enclosure of the table objective at the winning tuple, the exact value
/// of the selection, and table statistics.
#[derive(Debug, Clone)]
pub struct FptasSolution {
    pub selection: Selection,
    pub bound: Interval,
    pub exact_value: Rational,
    pub t: u64,
    pub dense_cells: u128,
    pub reached_states: u64,
}

fn run_scheme(instance: &Instance, config: &FptasConfig) -> Result<FptasSolution, FptasError> {
    let rounding = round_vectors(instance, config)?;
    let sentinel = rounding.sentinel();
    let gamma = config.gamma(instance.n());
    let (track_count, k) = match instance {
        Instance::Binary(_) => (false, 0),
        Instance::Subset(inst) => (true, inst.k()),
    };
    let table = build_table(instance, &rounding, track_count, k)?;
    // Every state already carries the exact expectation of its stored path,
    // so the final minimization compares exact rationals; interval data never
    // decides the reported value. Lexicographic tuple order breaks ties.
    let final_stage = table.stages.last().unwrap();
    let mut best: Option<(&(usize, Vec<u64>), &PathState)> = None;
    for (key, state) in final_stage.iter() {
        if track_count && key.0 != k {
            continue;
        }
        let better = match &best {
            None => true,
            Some((_, incumbent)) => state.expectation < incumbent.expectation,
        };
        if better {
            best = Some((key, state));
        }
    }
    let (key, state) = best.expect("stage n always has reachable tuples");
    let choices = reconstruct(&table, key);
    let selection = if track_count {
        Selection::Choose(
            choices
                .iter()
                .enumerate()
                .filter(|(_, &c)| c == 1)
                .map(|(i, _)| i)
                .collect(),
        )
    } else {
        Selection::Bits(choices.iter().map(|&c| c == 1).collect())
    };
    let exact_value = state.expectation.clone();
    debug_assert_eq!(exact_value, selection_expectation(instance, &selection)?);
    let bound = f_eval(
        instance.grid(),
        &tuple_to_log_vector(&key.1, sentinel, &gamma),
        config.log_precision.max(16),
    )?;
    debug_assert!(exact_value <= bound.hi().clone());
    let dim = instance.grid().d() - 1;
    let counts = if track_count { k + 1 } else { 1 };
    Ok(FptasSolution {
        selection,
        bound,
        exact_value,
        t: table.t,
        dense_cells: table.dense_cells(dim, counts),
        reached_states: table.reached_states(),
    })
}

/// Approximation scheme for min-min binary selection; requires `l_0 >= 0`
/// and `0 < epsilon <= 1`. The returned exact value is within `1 + epsilon`
/// of the optimum.
pub fn dp_min_min_binary(
    instance: &Instance,
    config: &FptasConfig,
) -> Result<FptasSolution, FptasError> {
    assert!(matches!(instance, Instance::Binary(_)), "binary instance expected");
    run_scheme(instance, config)
}

/// Approximation scheme for min-min subset selection (choose exactly k).
pub fn dp_min_min_subset(
    instance: &Instance,
    config: &FptasConfig,
) -> Result<FptasSolution, FptasError> {
    assert!(matches!(instance, Instance::Subset(_)), "subset instance expected");
    run_scheme(instance, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{solve_exact, Objective, SolveBudget};
    use crate::model::{BinaryInstance, SubsetInstance, TailDistribution, ValueGrid};
    use crate::rational::{rat, rat_int};
    use crate::seeded::{fixture_i1, fixture_s1};

    fn dist(tails: &[Rational]) -> TailDistribution {
        TailDistribution::new(tails.to_vec(), tails.len() + 1).unwrap()
    }

    fn grid_013() -> ValueGrid {
        ValueGrid::new(vec![rat_int(0), rat_int(1), rat_int(3)]).unwrap()
    }

    #[test]
    fn t_is_bracketed() {
        // All probabilities 1: p* = 1, T in {0, 1, 2}.
        let grid = ValueGrid::new(vec![rat_int(0), rat_int(1)]).unwrap();
        let ones = Instance::Binary(
            BinaryInstance::new(
                grid.clone(),
                vec![[dist(&[rat_int(1)]), dist(&[rat_int(1)])]],
            )
            .unwrap(),
        );
        let t = compute_t(&ones, &rat_int(1), 32).unwrap();
        assert!(t <= 2);

        // Single tail 1/2 at gamma 1: T in [ln 2, ln 2 + 2] -> {1, 2}.
        let halves = Instance::Binary(
            BinaryInstance::new(grid, vec![[dist(&[rat(1, 2)]), dist(&[rat_int(1)])]]).unwrap(),
        );
        let t = compute_t(&halves, &rat_int(1), 32).unwrap();
        assert!((1..=2).contains(&t), "T = {t}");
    }

    #[test]
    fn t_tracks_the_log_oracle_on_a_fixture() {
        // gamma = eps/(6n) with eps = 1/2, n = 3; compare against a
        // doubled-precision enclosure of gamma^-1 ln(1/p*).
        let instance = fixture_i1();
        let gamma = FptasConfig::new(rat(1, 2)).unwrap().gamma(instance.n());
        let t = compute_t(&instance, &gamma, 48).unwrap();
        let mut total = Interval::zero();
        for q in all_tails(&instance) {
            assert!(!q.is_zero());
            total = total.add(&ln_interval(q, 128).neg());
        }
        let enclosure = total.scale(&gamma.recip());
        let t_rat = Rational::from_integer(BigInt::from(t));
        assert!(&t_rat >= enclosure.lo());
        assert!(t_rat <= enclosure.hi() + rat_int(2));
    }

    #[test]
    fn rounding_examples() {
        // One pair, tails (1, 1/2): component for q=1 rounds to 0.
        let grid = grid_013();
        let instance = Instance::Binary(
            BinaryInstance::new(
                grid,
                vec![
                    [dist(&[rat_int(1), rat(1, 2)]), dist(&[rat(1, 2), rat(1, 2)])],
                    [dist(&[rat_int(1), rat_int(1)]), dist(&[rat_int(1), rat_int(0)])],
                ],
            )
            .unwrap(),
        );
        // epsilon = 1 and n = 2 give gamma = 1/12; x = 12 ln 2 = 8.3177...
        // for the 1/2 tails, so the rounded value must be 7 or 8.
        let config = FptasConfig::new(rat_int(1)).unwrap();
        let rounding = round_vectors(&instance, &config).unwrap();
        assert_eq!(rounding.groups[0][0].components[0], 0); // q = 1
        let rounded_half = rounding.groups[0][0].components[1];
        assert!(
            rounded_half == 7 || rounded_half == 8,
            "got {rounded_half}"
        );
        // Zero tail maps to the sentinel.
        assert_eq!(rounding.groups[1][1].components[1], rounding.sentinel());
    }

    #[test]
    fn rounding_soundness_against_doubled_precision() {
        let instance = fixture_i1();
        let config = FptasConfig::new(rat(3, 10)).unwrap();
        let gamma = config.gamma(instance.n());
        let rounding = round_vectors(&instance, &config).unwrap();
        let Instance::Binary(inst) = &instance else {
            panic!()
        };
        for (i, pair) in inst.pairs().iter().enumerate() {
            for (s, dist) in pair.iter().enumerate() {
                let lv = to_log_vector(dist, &gamma, 96).unwrap();
                for (j, component) in lv.components().iter().enumerate() {
                    let c = rounding.groups[i][s].components[j];
                    let LogComponent::Finite(x) = component else {
                        assert_eq!(c, rounding.sentinel());
                        continue;
                    };
                    let c_rat = Rational::from_integer(BigInt::from(c));
                    assert!(&c_rat <= x.hi(), "c <= x violated");
                    assert!(x.lo() <= &(c_rat + rat_int(2)), "x <= c+2 violated");
                }
            }
        }
    }

    #[test]
    fn single_pair_returns_exact_minimum() {
        let grid = grid_013();
        let instance = Instance::Binary(
            BinaryInstance::new(
                grid,
                vec![[
                    dist(&[rat(1, 2), rat(1, 4)]),
                    dist(&[rat(99, 200), rat(1, 4)]),
                ]],
            )
            .unwrap(),
        );
        // The two options are nearly tied; exact re-scoring must still pick
        // the true minimum.
        let config = FptasConfig::new(rat_int(1)).unwrap();
        let solution = dp_min_min_binary(&instance, &config).unwrap();
        let exact = solve_exact(&instance, Objective::MinMin, &SolveBudget::default()).unwrap();
        assert_eq!(solution.exact_value, exact.value);
    }

    #[test]
    fn absorbing_zero_option_is_found() {
        let grid = grid_013();
        let zero = dist(&[rat_int(0), rat_int(0)]);
        let other = dist(&[rat_int(1), rat(9, 10)]);
        let instance = Instance::Binary(
            BinaryInstance::new(grid, vec![[other.clone(), zero], [other.clone(), other]])
                .unwrap(),
        );
        let config = FptasConfig::new(rat(1, 2)).unwrap();
        let solution = dp_min_min_binary(&instance, &config).unwrap();
        // Selecting the all-zero option pins the minimum at l_0 = 0.
        assert_eq!(solution.exact_value, rat_int(0));
    }

    #[test]
    fn negative_grid_is_rejected() {
        let grid = ValueGrid::new(vec![rat_int(-1), rat_int(1)]).unwrap();
        let instance = Instance::Binary(
            BinaryInstance::new(grid, vec![[dist(&[rat(1, 2)]), dist(&[rat(1, 3)])]]).unwrap(),
        );
        let config = FptasConfig::new(rat(1, 2)).unwrap();
        let err = dp_min_min_binary(&instance, &config).unwrap_err();
        assert_eq!(err.code(), "GRID_NEGATIVE");
    }

    #[test]
    fn epsilon_validation() {
        assert!(FptasConfig::new(rat(1, 10)).is_ok());
        assert!(FptasConfig::new(rat_int(1)).is_ok());
        assert_eq!(
            FptasConfig::new(rat_int(0)).unwrap_err().code(),
            "EPSILON_OUT_OF_RANGE"
        );
        assert_eq!(
            FptasConfig::new(rat(11, 10)).unwrap_err().code(),
            "EPSILON_OUT_OF_RANGE"
        );
        assert_eq!(
            FptasConfig::new(rat(-1, 2)).unwrap_err().code(),
            "EPSILON_OUT_OF_RANGE"
        );
    }

    #[test]
    fn subset_forced_and_singleton_cases() {
        let Instance::Subset(s1) = fixture_s1() else {
            panic!()
        };
        let items = s1.items().to_vec();
        let grid = s1.grid().clone();
        let n = items.len();

        let forced = Instance::Subset(SubsetInstance::new(grid.clone(), items.clone(), n).unwrap());
        let config = FptasConfig::new(rat(1, 2)).unwrap();
        let solution = dp_min_min_subset(&forced, &config).unwrap();
        let exact = solve_exact(&forced, Objective::MinMin, &SolveBudget::default()).unwrap();
        assert_eq!(solution.exact_value, exact.value);
        assert_eq!(solution.selection, Selection::Choose((0..n).collect()));

        let single = Instance::Subset(SubsetInstance::new(grid, items, 1).unwrap());
        let solution = dp_min_min_subset(&single, &config).unwrap();
        let exact = solve_exact(&single, Objective::MinMin, &SolveBudget::default()).unwrap();
        // k = 1 with exact re-scoring returns the true minimum item.
        assert_eq!(solution.exact_value, exact.value);
    }

    #[test]
    fn reachability_is_complete_on_small_instances() {
        let instance = fixture_i1();
        let config = FptasConfig::new(rat(1, 2)).unwrap();
        let rounding = round_vectors(&instance, &config).unwrap();
        let table = build_table(&instance, &rounding, false, 0).unwrap();
        let sentinel = rounding.sentinel();
        let n = instance.n();
        for mask in 0u32..(1 << n) {
            let mut sum = vec![0u64; instance.grid().d() - 1];
            for i in 0..n {
                let choice = (mask >> i) & 1;
                sum = saturating_tuple_add(
                    &sum,
                    &rounding.groups[i][choice as usize].components,
                    sentinel,
                );
            }
            assert!(
                table.stages[n].contains_key(&(0, sum)),
                "selection {mask:b} unreachable"
            );
        }
    }

    #[test]
    fn table_stage_zero_is_exactly_the_origin() {
        let instance = fixture_i1();
        let config = FptasConfig::new(rat_int(1)).unwrap();
        let rounding = round_vectors(&instance, &config).unwrap();
        let table = build_table(&instance, &rounding, false, 0).unwrap();
        assert_eq!(table.stages[0].len(), 1);
        let key = table.stages[0].keys().next().unwrap();
        assert_eq!(key, &(0, vec![0, 0]));
        // Every later entry has a consistent predecessor.
        for s in 1..table.stages.len() {
            for (key, state) in &table.stages[s] {
                assert!(table.stages[s - 1].contains_key(&state.prev));
                let sum = saturating_tuple_add(
                    &state.prev.1,
                    &rounding.groups[s - 1][state.choice].components,
                    rounding.sentinel(),
                );
                assert_eq!(&sum, &key.1);
            }
        }
    }
}
