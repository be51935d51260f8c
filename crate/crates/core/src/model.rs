//! Value grids, tail distributions, instances, selections, exact
//! expectations, and the scaled-log view of a distribution.
//!
//! A distribution over the shared grid `l_0 < … < l_{d-1}` is stored as its
//! tail probabilities `q_j = Pr{Y >= l_j}` for `j = 1..d-1` (`q_0 = 1` is
//! implicit). Tails make independence composable: the minimum of independent
//! variables has tails equal to the componentwise product.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::interval::{exp_of_interval, ln_interval, Interval};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("grid values must be strictly increasing")]
    NotStrictlyIncreasing,
    #[error("a grid needs at least two values, got {0}")]
    TooFewValues(usize),
    #[error("tail probability at position {0} is outside [0, 1]")]
    OutOfRange(usize),
    #[error("tail probabilities must be nonincreasing (violated at position {0})")]
    NotNonincreasing(usize),
    #[error("expected {expected} tail probabilities, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("distribution dimension {got} does not match grid dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("selection is invalid for this instance: {0}")]
    InvalidSelection(String),
    #[error("log precision must be at least 16 bits, got {0}")]
    BadPrecision(u32),
    #[error("an instance needs at least one pair/item")]
    EmptyInstance,
    #[error("subset size k={k} must satisfy 1 <= k <= n={n}")]
    BadSubsetSize { k: usize, n: usize },
}

impl ModelError {
    /// Stable machine-readable code for diagnostics and tests.
    pub fn code(&self) -> &'static str {
        match self {
            ModelError::NotStrictlyIncreasing => "NOT_STRICTLY_INCREASING",
            ModelError::TooFewValues(_) => "TOO_FEW_VALUES",
            ModelError::OutOfRange(_) => "OUT_OF_RANGE",
            ModelError::NotNonincreasing(_) => "NOT_NONINCREASING",
            ModelError::WrongLength { .. } => "WRONG_LENGTH",
            ModelError::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            ModelError::InvalidSelection(_) => "INVALID_SELECTION",
            ModelError::BadPrecision(_) => "BAD_PRECISION",
            ModelError::EmptyInstance => "EMPTY_INSTANCE",
            ModelError::BadSubsetSize { .. } => "BAD_SUBSET_SIZE",
        }
    }
}

/// The shared, strictly increasing support values `l_0 < … < l_{d-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueGrid {
    values: Vec<Rational>,
    nonnegative: bool,
}

impl ValueGrid {
    pub fn new(values: Vec<Rational>) -> Result<Self, ModelError> {
        if values.len() < 2 {
            return Err(ModelError::TooFewValues(values.len()));
        }
        for pair in values.windows(2) {
            if pair[0] >= pair[1] {
                return Err(ModelError::NotStrictlyIncreasing);
            }
        }
        let nonnegative = !values[0].is_negative();
        Ok(ValueGrid {
            values,
            nonnegative,
        })
    }

    pub fn d(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &Rational {
        &self.values[j]
    }

    /// True iff `l_0 >= 0`; approximation guarantees require it.
    pub fn nonnegative(&self) -> bool {
        self.nonnegative
    }
}

/// A distribution described by its tails `q_1 >= … >= q_{d-1}` on some grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailDistribution {
    tails: Vec<Rational>,
}

impl TailDistribution {
    pub fn new(tails: Vec<Rational>, d: usize) -> Result<Self, ModelError> {
        if tails.len() != d - 1 {
            return Err(ModelError::WrongLength {
                expected: d - 1,
                got: tails.len(),
            });
        }
        let one = Rational::one();
        let mut previous = one.clone();
        for (idx, q) in tails.iter().enumerate() {
            if q.is_negative() || *q > one {
                return Err(ModelError::OutOfRange(idx + 1));
            }
            if *q > previous {
                return Err(ModelError::NotNonincreasing(idx + 1));
            }
            previous = q.clone();
        }
        Ok(TailDistribution { tails })
    }

    pub fn tails(&self) -> &[Rational] {
        &self.tails
    }

    /// `q_j` for `j = 0..d-1`; `q_0` is the implicit 1.
    pub fn tail(&self, j: usize) -> Rational {
        if j == 0 {
            Rational::one()
        } else {
            self.tails[j - 1].clone()
        }
    }

    pub fn dimension(&self) -> usize {
        self.tails.len() + 1
    }

    /// Atom weights `w_j = q_j - q_{j+1}` (with `q_0 = 1`, `q_d = 0`), one per
    /// grid value; they are nonnegative and sum to one.
    pub fn atom_weights(&self) -> Vec<Rational> {
        let d = self.dimension();
        let mut weights = Vec::with_capacity(d);
        for j in 0..d {
            let upper = self.tail(j);
            let lower = if j + 1 < d {
                self.tail(j + 1)
            } else {
                Rational::zero()
            };
            weights.push(upper - lower);
        }
        weights
    }
}

/// Exact expectation `l_0 + sum_j (l_j - l_{j-1}) q_j` by summation by parts.
pub fn expectation(grid: &ValueGrid, dist: &TailDistribution) -> Result<Rational, ModelError> {
    if dist.dimension() != grid.d() {
        return Err(ModelError::DimensionMismatch {
            expected: grid.d(),
            got: dist.dimension(),
        });
    }
    let mut total = grid.value(0).clone();
    for j in 1..grid.d() {
        total += (grid.value(j) - grid.value(j - 1)) * dist.tail(j);
    }
    Ok(total)
}

/// Distribution of `min(A, B)` for independent `A`, `B`: tails multiply.
pub fn min_combine(
    a: &TailDistribution,
    b: &TailDistribution,
) -> Result<TailDistribution, ModelError> {
    if a.dimension() != b.dimension() {
        return Err(ModelError::DimensionMismatch {
            expected: a.dimension(),
            got: b.dimension(),
        });
    }
    let tails = a
        .tails
        .iter()
        .zip(&b.tails)
        .map(|(x, y)| x * y)
        .collect();
    Ok(TailDistribution { tails })
}

/// Choose one distribution from each of `n` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryInstance {
    grid: ValueGrid,
    pairs: Vec<[TailDistribution; 2]>,
}

impl BinaryInstance {
    pub fn new(grid: ValueGrid, pairs: Vec<[TailDistribution; 2]>) -> Result<Self, ModelError> {
        if pairs.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        for pair in &pairs {
            for dist in pair {
                if dist.dimension() != grid.d() {
                    return Err(ModelError::DimensionMismatch {
                        expected: grid.d(),
                        got: dist.dimension(),
                    });
                }
            }
        }
        Ok(BinaryInstance { grid, pairs })
    }

    pub fn grid(&self) -> &ValueGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[[TailDistribution; 2]] {
        &self.pairs
    }

    pub fn option(&self, pair: usize, choice: bool) -> &TailDistribution {
        &self.pairs[pair][usize::from(choice)]
    }
}

/// Choose `k` of `n` distributions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetInstance {
    grid: ValueGrid,
    items: Vec<TailDistribution>,
    k: usize,
}

impl SubsetInstance {
    pub fn new(
        grid: ValueGrid,
        items: Vec<TailDistribution>,
        k: usize,
    ) -> Result<Self, ModelError> {
        if items.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        if k < 1 || k > items.len() {
            return Err(ModelError::BadSubsetSize { k, n: items.len() });
        }
        for item in &items {
            if item.dimension() != grid.d() {
                return Err(ModelError::DimensionMismatch {
                    expected: grid.d(),
                    got: item.dimension(),
                });
            }
        }
        Ok(SubsetInstance { grid, items, k })
    }

    pub fn grid(&self) -> &ValueGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn items(&self) -> &[TailDistribution] {
        &self.items
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instance {
    Binary(BinaryInstance),
    Subset(SubsetInstance),
}

impl Instance {
    pub fn grid(&self) -> &ValueGrid {
        match self {
            Instance::Binary(b) => b.grid(),
            Instance::Subset(s) => s.grid(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Instance::Binary(b) => b.n(),
            Instance::Subset(s) => s.n(),
        }
    }
}

/// A concrete choice: one bit per pair, or a sorted set of `k` item indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Selection {
    /// `bits[i]` picks the second option of pair `i` when true.
    Bits(Vec<bool>),
    /// Sorted, distinct item indices (0-based).
    Choose(Vec<usize>),
}

impl Selection {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Selection::Bits(bits)
    }

    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        Selection::Choose(indices)
    }
}

/// The distributions a selection picks, in pair/item order.
pub fn selected_distributions<'a>(
    instance: &'a Instance,
    sel: &Selection,
) -> Result<Vec<&'a TailDistribution>, ModelError> {
    match (instance, sel) {
        (Instance::Binary(inst), Selection::Bits(bits)) => {
            if bits.len() != inst.n() {
                return Err(ModelError::InvalidSelection(format!(
                    "expected {} bits, got {}",
                    inst.n(),
                    bits.len()
                )));
            }
            Ok(bits
                .iter()
                .enumerate()
                .map(|(i, &b)| inst.option(i, b))
                .collect())
        }
        (Instance::Subset(inst), Selection::Choose(chosen)) => {
            if chosen.len() != inst.k() {
                return Err(ModelError::InvalidSelection(format!(
                    "expected {} indices, got {}",
                    inst.k(),
                    chosen.len()
                )));
            }
            let mut seen = vec![false; inst.n()];
            for &idx in chosen {
                if idx >= inst.n() {
                    return Err(ModelError::InvalidSelection(format!(
                        "index {idx} out of range for n={}",
                        inst.n()
                    )));
                }
                if seen[idx] {
                    return Err(ModelError::InvalidSelection(format!(
                        "duplicate index {idx}"
                    )));
                }
                seen[idx] = true;
            }
            Ok(chosen.iter().map(|&i| &inst.items()[i]).collect())
        }
        _ => Err(ModelError::InvalidSelection(
            "selection kind does not match instance kind".to_owned(),
        )),
    }
}

/// Tails of the minimum over the selected variables (componentwise product).
pub fn selection_tails(
    instance: &Instance,
    sel: &Selection,
) -> Result<TailDistribution, ModelError> {
    let dists = selected_distributions(instance, sel)?;
    let mut combined = dists[0].clone();
    for dist in &dists[1..] {
        combined = min_combine(&combined, dist)?;
    }
    Ok(combined)
}

/// Exact `E[min over the selected variables]`.
pub fn selection_expectation(
    instance: &Instance,
    sel: &Selection,
) -> Result<Rational, ModelError> {
    let combined = selection_tails(instance, sel)?;
    expectation(instance.grid(), &combined)
}

/// One component of a scaled-log vector: a certified enclosure of
/// `-gamma^-1 ln q_j`, or infinite when `q_j = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum LogComponent {
    Finite(Interval),
    Infinite,
}

impl LogComponent {
    pub fn is_finite(&self) -> bool {
        matches!(self, LogComponent::Finite(_))
    }
}

/// The scaled-log view `L_j = -gamma^-1 ln q_j` of a distribution.
///
/// Minima of independent variables correspond to componentwise sums of
/// these vectors, which is what both the approximation scheme and the
/// zonotope solver exploit.
#[derive(Debug, Clone, PartialEq)]
pub struct LogVector {
    components: Vec<LogComponent>,
    gamma: Rational,
}

impl LogVector {
    pub fn new(components: Vec<LogComponent>, gamma: Rational) -> Self {
        assert!(gamma.is_positive(), "gamma must be positive");
        LogVector { components, gamma }
    }

    pub fn components(&self) -> &[LogComponent] {
        &self.components
    }

    pub fn gamma(&self) -> &Rational {
        &self.gamma
    }
}

/// Builds the scaled-log view with certified componentwise enclosures.
///
/// Each finite component interval has width at most
/// `2^-precision * max(1, |L_j|)`; zero tails map to [`LogComponent::Infinite`].
pub fn to_log_vector(
    dist: &TailDistribution,
    gamma: &Rational,
    precision: u32,
) -> Result<LogVector, ModelError> {
    assert!(gamma.is_positive(), "gamma must be positive");
    if precision < 16 {
        return Err(ModelError::BadPrecision(precision));
    }
    let inv_gamma_mag = (gamma.denom().bits() as i64 - gamma.numer().bits() as i64 + 1).max(0);
    let ln_bits = precision + 1 + inv_gamma_mag as u32;
    let neg_inv_gamma = -gamma.recip();
    let components = dist
        .tails()
        .iter()
        .map(|q| {
            if q.is_zero() {
                LogComponent::Infinite
            } else {
                LogComponent::Finite(ln_interval(q, ln_bits).scale(&neg_inv_gamma))
            }
        })
        .collect();
    Ok(LogVector {
        components,
        gamma: gamma.clone(),
    })
}

/// Certified enclosure of `f(L) = l_0 + sum_j (l_j - l_{j-1}) e^(-gamma L_j)`.
///
/// Infinite components contribute nothing to their term. `bits` controls the
/// relative precision of each exponential.
pub fn f_eval(grid: &ValueGrid, log_vector: &LogVector, bits: u32) -> Result<Interval, ModelError> {
    if log_vector.components.len() != grid.d() - 1 {
        return Err(ModelError::DimensionMismatch {
            expected: grid.d() - 1,
            got: log_vector.components.len(),
        });
    }
    let neg_gamma = -log_vector.gamma.clone();
    let mut total = Interval::point(grid.value(0).clone());
    for (j, component) in log_vector.components.iter().enumerate() {
        let gap = grid.value(j + 1) - grid.value(j);
        match component {
            LogComponent::Infinite => {}
            LogComponent::Finite(interval) => {
                let factor = exp_of_interval(&interval.scale(&neg_gamma), bits);
                total = total.add(&factor.scale(&gap));
            }
        }
    }
    Ok(total)
}

/// Componentwise sum of log vectors; any infinite component wins.
pub fn log_vector_sum(vectors: &[&LogVector]) -> LogVector {
    assert!(!vectors.is_empty());
    let gamma = vectors[0].gamma.clone();
    let dim = vectors[0].components.len();
    let mut components = vec![LogComponent::Finite(Interval::zero()); dim];
    for vector in vectors {
        assert_eq!(vector.gamma, gamma, "mixed scale factors in log sum");
        assert_eq!(vector.components.len(), dim);
        for (acc, item) in components.iter_mut().zip(&vector.components) {
            *acc = match (&*acc, item) {
                (LogComponent::Finite(a), LogComponent::Finite(b)) => {
                    LogComponent::Finite(a.add(b))
                }
                _ => LogComponent::Infinite,
            };
        }
    }
    LogVector { components, gamma }
}

fn negate_grid(grid: &ValueGrid) -> ValueGrid {
    let values = grid.values().iter().rev().map(|v| -v.clone()).collect();
    ValueGrid::new(values).expect("negated grid stays strictly increasing")
}

fn negate_distribution(dist: &TailDistribution) -> TailDistribution {
    // New tails q'_j = Pr{-Y >= -l_{d-1-j}} = 1 - q_{d-j}.
    let one = Rational::one();
    let tails: Vec<Rational> = dist.tails().iter().rev().map(|q| &one - q).collect();
    TailDistribution { tails }
}

/// Sign-flips an instance: `E[max of originals] = -E[min of negated]` for
/// every selection, and applying it twice is the identity.
pub fn negate_instance(instance: &Instance) -> Instance {
    match instance {
        Instance::Binary(inst) => {
            let grid = negate_grid(inst.grid());
            let pairs = inst
                .pairs()
                .iter()
                .map(|[a, b]| [negate_distribution(a), negate_distribution(b)])
                .collect();
            Instance::Binary(BinaryInstance::new(grid, pairs).expect("negation preserves validity"))
        }
        Instance::Subset(inst) => {
            let grid = negate_grid(inst.grid());
            let items = inst.items().iter().map(negate_distribution).collect();
            Instance::Subset(
                SubsetInstance::new(grid, items, inst.k()).expect("negation preserves validity"),
            )
        }
    }
}
