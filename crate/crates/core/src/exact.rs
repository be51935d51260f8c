//! Brute-force exact optimizers and the independent joint-outcome oracle.
//!
//! Everything here is ground truth for the other solver modules: no pruning,
//! no shortcuts in the oracle, deterministic lexicographic tie-breaking.

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::model::{
    negate_instance, selection_expectation, Instance, ModelError, Selection, TailDistribution,
    ValueGrid,
};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinMin,
    MaxMin,
    MinMax,
    MaxMax,
}

impl Objective {
    /// The expectation-of-maximum objectives run as their minimum duals on a
    /// sign-flipped instance.
    pub fn needs_negation(self) -> bool {
        matches!(self, Objective::MinMax | Objective::MaxMax)
    }

    /// Direction of optimization after any negation has been applied.
    fn reduced(self) -> ReducedObjective {
        match self {
            Objective::MinMin | Objective::MaxMax => ReducedObjective::Minimize,
            Objective::MaxMin | Objective::MinMax => ReducedObjective::Maximize,
        }
    }

    pub fn is_minimizing(self) -> bool {
        matches!(self, Objective::MinMin | Objective::MinMax)
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::MinMin => "min-min",
            Objective::MaxMin => "max-min",
            Objective::MinMax => "min-max",
            Objective::MaxMax => "max-max",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ReducedObjective {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy)]
pub enum Aggregate {
    Min,
    Max,
}

/// Enumeration caps; exceeding one is a typed error, never silent truncation.
#[derive(Debug, Clone)]
pub struct SolveBudget {
    /// Maximum number of pairs for 2^n binary enumeration.
    pub max_binary_n: usize,
    /// Maximum C(n, k) for subset enumeration.
    pub max_subset_combinations: u64,
    /// Maximum d^n for the joint-outcome oracle.
    pub max_joint_outcomes: u64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            max_binary_n: 24,
            max_subset_combinations: 10_000_000,
            max_joint_outcomes: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolveError {
    #[error("enumeration budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SolveError {
    pub fn code(&self) -> &'static str {
        match self {
            SolveError::BudgetExceeded(_) => "BUDGET_EXCEEDED",
            SolveError::Model(e) => e.code(),
        }
    }
}

/// An optimal selection, its exact value, and how many selections attain it.
///
/// `optima_count` is populated only by exhaustive enumeration; solvers that
/// inspect a candidate subset leave it `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub selection: Selection,
    pub value: Rational,
    pub optima_count: Option<u64>,
}

fn enumerate_selections(
    instance: &Instance,
    budget: &SolveBudget,
) -> Result<Vec<Selection>, SolveError> {
    match instance {
        Instance::Binary(inst) => {
            let n = inst.n();
            if n > budget.max_binary_n {
                return Err(SolveError::BudgetExceeded(format!(
                    "2^{n} binary selections exceed the configured cap of 2^{}",
                    budget.max_binary_n
                )));
            }
            // Lexicographic over the bit-string (chi_1, ..., chi_n).
            Ok((0u64..(1u64 << n))
                .map(|c| {
                    Selection::Bits((0..n).map(|i| (c >> (n - 1 - i)) & 1 == 1).collect())
                })
                .collect())
        }
        Instance::Subset(inst) => {
            let n = inst.n();
            let k = inst.k();
            let count = binomial(n as u64, k as u64);
            if count > budget.max_subset_combinations {
                return Err(SolveError::BudgetExceeded(format!(
                    "C({n}, {k}) = {count} subsets exceed the configured cap of {}",
                    budget.max_subset_combinations
                )));
            }
            Ok((0..n).combinations(k).map(Selection::Choose).collect())
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut result: u128 = 1;
    for i in 0..k {
        result = result * u128::from(n - i) / u128::from(i + 1);
        if result > u128::from(u64::MAX) {
            return u64::MAX;
        }
    }
    result as u64
}

fn solve_enumerating(
    instance: &Instance,
    direction: ReducedObjective,
    budget: &SolveBudget,
) -> Result<SolveResult, SolveError> {
    let mut best: Option<(Selection, Rational, u64)> = None;
    for selection in enumerate_selections(instance, budget)? {
        let value = selection_expectation(instance, &selection)?;
        best = Some(match best {
            None => (selection, value, 1),
            Some((s, v, count)) => {
                let improves = match direction {
                    ReducedObjective::Minimize => value < v,
                    ReducedObjective::Maximize => value > v,
                };
                if improves {
                    (selection, value, 1)
                } else if value == v {
                    (s, v, count + 1)
                } else {
                    (s, v, count)
                }
            }
        });
    }
    let (selection, value, optima_count) = best.expect("instances are never empty");
    Ok(SolveResult {
        selection,
        value,
        optima_count: Some(optima_count),
    })
}

/// Exact optimum over all selections of `instance` under `obj`.
///
/// Ties break to the lexicographically smallest bit-string (binary) or
/// sorted index set (subset).
pub fn solve_exact(
    instance: &Instance,
    obj: Objective,
    budget: &SolveBudget,
) -> Result<SolveResult, SolveError> {
    if obj.needs_negation() {
        let negated = negate_instance(instance);
        let mut result = solve_enumerating(&negated, obj.reduced(), budget)?;
        result.value = -result.value;
        return Ok(result);
    }
    solve_enumerating(instance, obj.reduced(), budget)
}

/// Enumerates every joint outcome of independent draws and averages the
/// aggregate exactly. Deliberately ignorant of the tail-product shortcut;
/// this is the oracle that validates it.
pub fn joint_outcome_oracle(
    grid: &ValueGrid,
    dists: &[&TailDistribution],
    aggregate: Aggregate,
    budget: &SolveBudget,
) -> Result<Rational, SolveError> {
    assert!(!dists.is_empty());
    for dist in dists {
        if dist.dimension() != grid.d() {
            return Err(ModelError::DimensionMismatch {
                expected: grid.d(),
                got: dist.dimension(),
            }
            .into());
        }
    }
    let d = grid.d() as u64;
    let outcomes = d.checked_pow(dists.len() as u32);
    match outcomes {
        Some(count) if count <= budget.max_joint_outcomes => {}
        _ => {
            return Err(SolveError::BudgetExceeded(format!(
                "{}^{} joint outcomes exceed the configured cap of {}",
                d,
                dists.len(),
                budget.max_joint_outcomes
            )))
        }
    }
    let weights: Vec<Vec<Rational>> = dists.iter().map(|dist| dist.atom_weights()).collect();
    let mut total = Rational::zero();
    let mut indices = vec![0usize; dists.len()];
    loop {
        let mut weight = Rational::from_integer(1.into());
        let mut zero = false;
        for (var, &idx) in indices.iter().enumerate() {
            let w = &weights[var][idx];
            if w.is_zero() {
                zero = true;
                break;
            }
            weight *= w;
        }
        if !zero {
            let extreme = match aggregate {
                Aggregate::Min => indices.iter().copied().min().unwrap(),
                Aggregate::Max => indices.iter().copied().max().unwrap(),
            };
            total += weight * grid.value(extreme);
        }
        // Mixed-radix increment.
        let mut pos = 0;
        loop {
            if pos == indices.len() {
                return Ok(total);
            }
            indices[pos] += 1;
            if indices[pos] < grid.d() {
                break;
            }
            indices[pos] = 0;
            pos += 1;
        }
    }
}

/// True iff the optimum under `obj` is at most `theta` (minimizing
/// objectives) or at least `theta` (maximizing objectives); comparisons are
/// exact and inclusive.
pub fn decide_threshold(
    instance: &Instance,
    obj: Objective,
    theta: &Rational,
    budget: &SolveBudget,
) -> Result<bool, SolveError> {
    let result = solve_exact(instance, obj, budget)?;
    Ok(if obj.is_minimizing() {
        result.value <= *theta
    } else {
        result.value >= *theta
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BinaryInstance, SubsetInstance, TailDistribution, ValueGrid};
    use crate::rational::{rat, rat_int};

    fn grid_013() -> ValueGrid {
        ValueGrid::new(vec![rat_int(0), rat_int(1), rat_int(3)]).unwrap()
    }

    fn dist(tails: &[Rational]) -> TailDistribution {
        TailDistribution::new(tails.to_vec(), tails.len() + 1).unwrap()
    }

    fn single_pair_instance() -> Instance {
        // E[option 0] = 1, E[option 1] = 3/8.
        let pairs = vec![[
            dist(&[rat(1, 2), rat(1, 4)]),
            dist(&[rat(1, 4), rat(1, 16)]),
        ]];
        Instance::Binary(BinaryInstance::new(grid_013(), pairs).unwrap())
    }

    #[test]
    fn single_pair_picks_smaller_expectation() {
        let instance = single_pair_instance();
        let result = solve_exact(&instance, Objective::MinMin, &SolveBudget::default()).unwrap();
        assert_eq!(result.selection, Selection::Bits(vec![true]));
        assert_eq!(result.value, rat(3, 8));
        assert_eq!(result.optima_count, Some(1));

        let result = solve_exact(&instance, Objective::MaxMin, &SolveBudget::default()).unwrap();
        assert_eq!(result.selection, Selection::Bits(vec![false]));
        assert_eq!(result.value, rat_int(1));
    }

    #[test]
    fn identical_pairs_tie_everywhere() {
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        let pairs = vec![[d.clone(), d.clone()], [d.clone(), d.clone()], [d.clone(), d]];
        let instance = Instance::Binary(BinaryInstance::new(grid_013(), pairs).unwrap());
        let result = solve_exact(&instance, Objective::MinMin, &SolveBudget::default()).unwrap();
        assert_eq!(result.optima_count, Some(8));
        // Lexicographically smallest tie-break: all-false bits.
        assert_eq!(result.selection, Selection::Bits(vec![false; 3]));
        // Value is the threefold min: tails [1/8, 1/64] -> 1/8 + 2/64 = 5/32.
        assert_eq!(result.value, rat(5, 32));
    }

    #[test]
    fn forced_subset_and_singleton() {
        let items = vec![
            dist(&[rat(1, 2), rat(1, 4)]),
            dist(&[rat(2, 3), rat(1, 5)]),
            dist(&[rat(1, 3), rat(1, 7)]),
        ];
        let all = Instance::Subset(SubsetInstance::new(grid_013(), items.clone(), 3).unwrap());
        let result = solve_exact(&all, Objective::MinMin, &SolveBudget::default()).unwrap();
        assert_eq!(result.selection, Selection::Choose(vec![0, 1, 2]));
        assert_eq!(result.optima_count, Some(1));

        // k = 1 reduces to the smallest individual expectation.
        let one = Instance::Subset(SubsetInstance::new(grid_013(), items, 1).unwrap());
        let result = solve_exact(&one, Objective::MinMin, &SolveBudget::default()).unwrap();
        let direct: Vec<Rational> = (0..3)
            .map(|i| {
                crate::model::selection_expectation(&one, &Selection::Choose(vec![i])).unwrap()
            })
            .collect();
        assert_eq!(result.value, direct.iter().min().unwrap().clone());
        let Selection::Choose(chosen) = &result.selection else {
            panic!("subset result expected");
        };
        assert_eq!(chosen.len(), 1);
    }

    #[test]
    fn oracle_collapses_for_single_variable() {
        let grid = grid_013();
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        let by_oracle =
            joint_outcome_oracle(&grid, &[&d], Aggregate::Min, &SolveBudget::default()).unwrap();
        assert_eq!(by_oracle, crate::model::expectation(&grid, &d).unwrap());
    }

    #[test]
    fn oracle_matches_tail_product_for_iid_pair() {
        let grid = grid_013();
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        let by_oracle =
            joint_outcome_oracle(&grid, &[&d, &d], Aggregate::Min, &SolveBudget::default())
                .unwrap();
        assert_eq!(by_oracle, rat(3, 8));
    }

    #[test]
    fn oracle_budget_is_enforced() {
        let grid = grid_013();
        let d = dist(&[rat(1, 2), rat(1, 4)]);
        let dists: Vec<&TailDistribution> = std::iter::repeat(&d).take(4).collect();
        let tight = SolveBudget {
            max_joint_outcomes: 80, // 3^4 = 81
            ..SolveBudget::default()
        };
        let err = joint_outcome_oracle(&grid, &dists, Aggregate::Min, &tight).unwrap_err();
        assert_eq!(err.code(), "BUDGET_EXCEEDED");
    }

    #[test]
    fn threshold_decisions_are_inclusive() {
        let instance = single_pair_instance();
        let budget = SolveBudget::default();
        assert!(!decide_threshold(&instance, Objective::MinMin, &rat(1, 4), &budget).unwrap());
        assert!(decide_threshold(&instance, Objective::MinMin, &rat(3, 8), &budget).unwrap());
        assert!(decide_threshold(&instance, Objective::MinMin, &rat(1, 2), &budget).unwrap());
        assert!(decide_threshold(&instance, Objective::MaxMin, &rat_int(1), &budget).unwrap());
        assert!(!decide_threshold(&instance, Objective::MaxMin, &rat(9, 8), &budget).unwrap());
    }

    #[test]
    fn duality_against_direct_enumeration() {
        let instance = single_pair_instance();
        let budget = SolveBudget::default();
        let min_max = solve_exact(&instance, Objective::MinMax, &budget).unwrap();
        let max_min_neg =
            solve_exact(&negate_instance(&instance), Objective::MaxMin, &budget).unwrap();
        assert_eq!(min_max.value, -max_min_neg.value);

        let max_max = solve_exact(&instance, Objective::MaxMax, &budget).unwrap();
        let min_min_neg =
            solve_exact(&negate_instance(&instance), Objective::MinMin, &budget).unwrap();
        assert_eq!(max_max.value, -min_min_neg.value);
    }
}
