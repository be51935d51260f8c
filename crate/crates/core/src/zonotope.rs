//! Exact max-min selection at d = 3 via planar zonotope geometry.
//!
//! In log space (scale 1) a binary instance's achievable sums form the
//! Minkowski sum of `n` segments, a zonotope; the expectation is a convex
//! function of the log sum, so the maximum over selections is attained at a
//! zonotope vertex. The subset variant slices the zonotope with the
//! hyperplane "sum of coefficients = k", whose vertices are exactly the
//! top-k sets of some direction.
//!
//! Coordinates are logarithms, hence irrational: predicates run on certified
//! intervals, and whenever a sign cannot be certified both resolutions are
//! kept. Correctness never rests on the predicates — the candidate set is a
//! superset of the vertex labels and every candidate is re-scored with exact
//! rational arithmetic.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_traits::Zero;
use thiserror::Error;

use crate::exact::{solve_exact, Objective, SolveBudget, SolveError, SolveResult};
use crate::interval::{ln_interval, Interval, Sign};
use crate::model::{selection_expectation, Instance, ModelError, Selection};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ZonotopeError {
    #[error("geometric path supports d = 3 only, got d = {0}")]
    DimensionUnsupported(usize),
    #[error("zero tail probability not removable by preprocessing: {0}")]
    ZeroProbabilityUnhandled(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl ZonotopeError {
    pub fn code(&self) -> &'static str {
        match self {
            ZonotopeError::DimensionUnsupported(_) => "DIMENSION_UNSUPPORTED",
            ZonotopeError::ZeroProbabilityUnhandled(_) => "ZERO_PROBABILITY_UNHANDLED",
            ZonotopeError::Model(e) => e.code(),
        }
    }
}

/// ln precision for predicate coordinates.
#[derive(Debug, Clone)]
pub struct ZonotopeConfig {
    pub log_precision: u32,
    /// Budget for the brute-force fallback taken when avoidable zero tails
    /// keep the instance off the geometric path.
    pub fallback_budget: SolveBudget,
}

impl Default for ZonotopeConfig {
    fn default() -> Self {
        ZonotopeConfig {
            log_precision: 64,
            fallback_budget: SolveBudget::default(),
        }
    }
}

pub type PlanarPoint = [Interval; 2];

/// A candidate log-space point labeled with the selection that reaches it.
#[derive(Debug, Clone)]
pub struct LabeledPoint {
    pub coords: PlanarPoint,
    pub label: Selection,
}

/// A finite superset of the vertex labels of the relevant polytope.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    pub points: Vec<LabeledPoint>,
}

fn rot90(v: &PlanarPoint) -> PlanarPoint {
    [v[1].neg(), v[0].clone()]
}

fn dot(u: &PlanarPoint, v: &PlanarPoint) -> Interval {
    u[0].mul(&v[0]).add(&u[1].mul(&v[1]))
}

fn sub(u: &PlanarPoint, v: &PlanarPoint) -> PlanarPoint {
    [u[0].sub(&v[0]), u[1].sub(&v[1])]
}

fn add(u: &PlanarPoint, v: &PlanarPoint) -> PlanarPoint {
    [u[0].add(&v[0]), u[1].add(&v[1])]
}

fn axis_directions() -> Vec<PlanarPoint> {
    let one = Interval::point(Rational::from_integer(1.into()));
    let minus = Interval::point(Rational::from_integer((-1).into()));
    let zero = Interval::zero();
    vec![
        [one.clone(), zero.clone()],
        [zero.clone(), one.clone()],
        [minus.clone(), zero.clone()],
        [zero, minus],
    ]
}

/// Per-generator endpoint choice on the arc just after an event direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ArcChoice {
    Forced(bool),
    Both,
}

/// Which endpoint of segment `g` maximizes `w . x` for `w` just after `u`
/// (rotating counterclockwise).
///
/// `structural` marks the generator that defined the event: its dot product
/// with `u` is zero by construction even though intervals cannot show it,
/// and the flip direction is known from which side of the normal `u` is.
fn arc_choice(u: &PlanarPoint, g: &PlanarPoint, structural: Option<bool>) -> ArcChoice {
    if let Some(positive_side) = structural {
        // After rot90(g) the product w.g turns negative (derivative -|g|^2),
        // after -rot90(g) positive; a possibly-zero generator keeps both.
        let norm_sq = dot(g, g);
        return match norm_sq.sign() {
            Sign::Positive => ArcChoice::Forced(positive_side),
            Sign::Zero => ArcChoice::Forced(false),
            _ => ArcChoice::Both,
        };
    }
    match dot(u, g).sign() {
        Sign::Positive => ArcChoice::Forced(true),
        Sign::Negative => ArcChoice::Forced(false),
        Sign::Zero => {
            // Exactly perpendicular: break the tie by the derivative along
            // the sweep, i.e. the sign of rot90(u) . g.
            match dot(&rot90(u), g).sign() {
                Sign::Positive => ArcChoice::Forced(true),
                Sign::Negative => ArcChoice::Forced(false),
                // Zero generator: both endpoints coincide.
                Sign::Zero => ArcChoice::Forced(false),
                Sign::Ambiguous => ArcChoice::Both,
            }
        }
        Sign::Ambiguous => ArcChoice::Both,
    }
}

fn expand_choices(choices: &[ArcChoice]) -> Vec<Vec<bool>> {
    let mut labels = vec![Vec::with_capacity(choices.len())];
    for choice in choices {
        match choice {
            ArcChoice::Forced(b) => {
                for label in &mut labels {
                    label.push(*b);
                }
            }
            ArcChoice::Both => {
                let mut doubled = Vec::with_capacity(labels.len() * 2);
                for label in labels {
                    let mut with_true = label.clone();
                    with_true.push(true);
                    doubled.push(with_true);
                    let mut with_false = label;
                    with_false.push(false);
                    doubled.push(with_false);
                }
                labels = doubled;
            }
        }
    }
    labels
}

/// All hull vertices of the Minkowski sum of planar segments, as labeled
/// candidate points.
///
/// Each event direction (a normal of some generator, plus the four axes)
/// starts an arc of directions on which the extremal endpoint choice per
/// segment is constant; the arc states enumerate every vertex. Ambiguous
/// predicate signs retain both resolutions, so with exact (zero-width)
/// inputs the output is exactly the vertex set, and with interval inputs it
/// is a superset of the vertex labels.
///
/// Endpoint coordinates passed as identical intervals are taken to enclose
/// the same real, so their difference is exactly zero; callers encode known
/// coordinate equalities by sharing enclosures.
pub fn minkowski_vertices(segments: &[(PlanarPoint, PlanarPoint)]) -> CandidateSet {
    let generator_of = |(a, b): &(PlanarPoint, PlanarPoint)| -> PlanarPoint {
        [0, 1].map(|c| {
            if a[c] == b[c] {
                Interval::zero()
            } else {
                b[c].sub(&a[c])
            }
        })
    };
    let generators: Vec<PlanarPoint> = segments.iter().map(generator_of).collect();
    // A segment whose endpoint enclosures coincide is a point: its endpoint
    // choice is immaterial, so pin it instead of letting the straddling
    // difference interval spawn both branches at every event.
    let is_point: Vec<bool> = segments.iter().map(|(a, b)| a == b).collect();
    let mut events: Vec<(PlanarPoint, Option<(usize, bool)>)> = Vec::new();
    for (i, g) in generators.iter().enumerate() {
        if is_point[i] {
            continue;
        }
        let normal = rot90(g);
        events.push((normal.clone(), Some((i, false))));
        events.push(([normal[0].neg(), normal[1].neg()], Some((i, true))));
    }
    for axis in axis_directions() {
        events.push((axis, None));
    }
    let mut labels: BTreeSet<Vec<bool>> = BTreeSet::new();
    for (u, structural) in &events {
        let choices: Vec<ArcChoice> = generators
            .iter()
            .enumerate()
            .map(|(j, g)| {
                if is_point[j] {
                    return ArcChoice::Forced(false);
                }
                let tag = match structural {
                    Some((i, side)) if *i == j => Some(*side),
                    _ => None,
                };
                arc_choice(u, g, tag)
            })
            .collect();
        labels.extend(expand_choices(&choices));
    }
    let points = labels
        .into_iter()
        .map(|bits| {
            let mut coords = [Interval::zero(), Interval::zero()];
            for (i, &b) in bits.iter().enumerate() {
                let endpoint = if b { &segments[i].1 } else { &segments[i].0 };
                coords = add(&coords, endpoint);
            }
            LabeledPoint {
                coords,
                label: Selection::Bits(bits),
            }
        })
        .collect();
    CandidateSet { points }
}

/// Pairwise comparison of sweep keys, `Greater` meaning "certainly ranks
/// above in the current direction".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum KeyOrder {
    Greater,
    Less,
    Unknown,
}

/// Every distinct top-k set met while a direction sweeps the circle, with
/// both resolutions kept wherever a comparison cannot be certified.
pub fn topk_sweep_candidates(points: &[PlanarPoint], k: usize) -> Vec<Vec<usize>> {
    let n = points.len();
    assert!(k >= 1 && k <= n, "k out of range");
    if k == n {
        return vec![(0..n).collect()];
    }
    // Events where the ranking of i and j can change: directions normal to
    // p_i - p_j, in both orientations.
    let mut events: Vec<(PlanarPoint, Option<(usize, usize, bool)>)> = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sub(&points[i], &points[j]);
            let normal = rot90(&d);
            // After rot90(d): w.(p_i - p_j) turns negative, j outranks i.
            events.push((normal.clone(), Some((i, j, false))));
            // After -rot90(d): i outranks j.
            events.push(([normal[0].neg(), normal[1].neg()], Some((i, j, true))));
        }
    }
    for axis in axis_directions() {
        events.push((axis, None));
    }
    let mut subsets: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (u, structural) in &events {
        let keys: Vec<Interval> = points.iter().map(|p| dot(u, p)).collect();
        let order = |a: usize, b: usize| -> KeyOrder {
            if let Some((i, j, i_first)) = structural {
                if (a, b) == (*i, *j) {
                    return if *i_first {
                        KeyOrder::Greater
                    } else {
                        KeyOrder::Less
                    };
                }
                if (a, b) == (*j, *i) {
                    return if *i_first {
                        KeyOrder::Less
                    } else {
                        KeyOrder::Greater
                    };
                }
            }
            if keys[b].certainly_lt(&keys[a]) {
                KeyOrder::Greater
            } else if keys[a].certainly_lt(&keys[b]) {
                KeyOrder::Less
            } else {
                KeyOrder::Unknown
            }
        };
        // certainly-in: fewer than k others may outrank it;
        // certainly-out: at least k others certainly outrank it.
        let mut cert_in = Vec::new();
        let mut boundary = Vec::new();
        for l in 0..n {
            let mut may_outrank = 0usize;
            let mut certainly_outrank = 0usize;
            for m in 0..n {
                if m == l {
                    continue;
                }
                match order(l, m) {
                    KeyOrder::Greater => {}
                    KeyOrder::Less => {
                        may_outrank += 1;
                        certainly_outrank += 1;
                    }
                    KeyOrder::Unknown => {
                        may_outrank += 1;
                    }
                }
            }
            if may_outrank < k {
                cert_in.push(l);
            } else if certainly_outrank < k {
                boundary.push(l);
            }
        }
        debug_assert!(cert_in.len() <= k, "certified-in set exceeded k");
        let need = k - cert_in.len();
        if need == 0 {
            subsets.insert(cert_in.clone());
            continue;
        }
        for completion in boundary.iter().copied().combinations(need) {
            let mut subset = cert_in.clone();
            subset.extend(completion);
            subset.sort_unstable();
            subsets.insert(subset);
        }
    }
    subsets.into_iter().collect()
}

/// Coordinates `j in {1, …, d-1}` that can carry geometry: a coordinate is
/// dead when every selection forces its tail product to zero.
struct Preprocessed {
    live: Vec<usize>,
    /// A zero tail survives at a live coordinate, so the geometric model
    /// cannot represent the instance; fall back to enumeration.
    avoidable_zero: bool,
}

fn preprocess(instance: &Instance) -> Preprocessed {
    let d = instance.grid().d();
    let mut live = Vec::new();
    let mut avoidable_zero = false;
    for j in 1..d {
        let dead = match instance {
            Instance::Binary(inst) => inst
                .pairs()
                .iter()
                .any(|pair| pair[0].tail(j).is_zero() && pair[1].tail(j).is_zero()),
            Instance::Subset(inst) => {
                let positive = inst
                    .items()
                    .iter()
                    .filter(|item| !item.tail(j).is_zero())
                    .count();
                positive < inst.k()
            }
        };
        if dead {
            continue;
        }
        let any_zero = match instance {
            Instance::Binary(inst) => inst
                .pairs()
                .iter()
                .any(|pair| pair.iter().any(|d| d.tail(j).is_zero())),
            Instance::Subset(inst) => inst.items().iter().any(|item| item.tail(j).is_zero()),
        };
        if any_zero {
            avoidable_zero = true;
        }
        live.push(j);
    }
    Preprocessed {
        live,
        avoidable_zero,
    }
}

/// Log-space coordinate (gamma = 1) of one tail: -ln q as an interval.
fn log_coord(q: &Rational, bits: u32) -> Interval {
    ln_interval(q, bits).neg()
}

fn binary_segments(
    inst: &crate::model::BinaryInstance,
    live: &[usize],
    bits: u32,
) -> Vec<(PlanarPoint, PlanarPoint)> {
    assert_eq!(live.len(), 2);
    inst.pairs()
        .iter()
        .map(|pair| {
            let point = |dist: &crate::model::TailDistribution| -> PlanarPoint {
                [
                    log_coord(&dist.tail(live[0]), bits),
                    log_coord(&dist.tail(live[1]), bits),
                ]
            };
            (point(&pair[0]), point(&pair[1]))
        })
        .collect()
}

/// The labeled candidate set for a binary instance on the planar path; also
/// the statistic the scaling suite tracks. Requires d = 3 and tails that
/// leave both coordinates live and finite.
pub fn binary_candidates(
    instance: &Instance,
    config: &ZonotopeConfig,
) -> Result<CandidateSet, ZonotopeError> {
    let Instance::Binary(inst) = instance else {
        panic!("binary instance expected");
    };
    if instance.grid().d() != 3 {
        return Err(ZonotopeError::DimensionUnsupported(instance.grid().d()));
    }
    let pre = preprocess(instance);
    if pre.avoidable_zero || pre.live.len() != 2 {
        return Err(ZonotopeError::ZeroProbabilityUnhandled(
            "candidate enumeration needs both coordinates live".into(),
        ));
    }
    let segments = binary_segments(inst, &pre.live, config.log_precision);
    Ok(minkowski_vertices(&segments))
}

fn fallback_exact(
    instance: &Instance,
    budget: &SolveBudget,
) -> Result<SolveResult, ZonotopeError> {
    match solve_exact(instance, Objective::MaxMin, budget) {
        Ok(result) => Ok(result),
        Err(SolveError::BudgetExceeded(msg)) => Err(ZonotopeError::ZeroProbabilityUnhandled(
            format!("brute-force fallback exceeded its budget: {msg}"),
        )),
        Err(SolveError::Model(e)) => Err(e.into()),
    }
}

fn rescore_labels(
    instance: &Instance,
    labels: impl IntoIterator<Item = Selection>,
) -> Result<SolveResult, ZonotopeError> {
    let mut best: Option<(Selection, Rational)> = None;
    for label in labels {
        let value = selection_expectation(instance, &label)?;
        let better = match &best {
            None => true,
            Some((incumbent_sel, incumbent)) => {
                value > *incumbent || (value == *incumbent && label < *incumbent_sel)
            }
        };
        if better {
            best = Some((label, value));
        }
    }
    let (selection, value) = best.expect("candidate sets are never empty");
    Ok(SolveResult {
        selection,
        value,
        optima_count: None,
    })
}

/// Exact max-min solver for binary selection at d = 3.
///
/// Candidates come from the zonotope sweep over the pairs' log segments;
/// each is re-scored exactly, so interval slack can only add candidates,
/// never corrupt the reported optimum.
pub fn solve_maxmin_binary(
    instance: &Instance,
    config: &ZonotopeConfig,
) -> Result<SolveResult, ZonotopeError> {
    let Instance::Binary(inst) = instance else {
        panic!("binary instance expected");
    };
    if instance.grid().d() != 3 {
        return Err(ZonotopeError::DimensionUnsupported(instance.grid().d()));
    }
    let pre = preprocess(instance);
    if pre.avoidable_zero {
        return fallback_exact(instance, &config.fallback_budget);
    }
    let n = inst.n();
    match pre.live.len() {
        0 => {
            // Every term vanishes for every selection: constant objective.
            let selection = Selection::Bits(vec![false; n]);
            let value = selection_expectation(instance, &selection)?;
            Ok(SolveResult {
                selection,
                value,
                optima_count: None,
            })
        }
        1 => {
            let j = pre.live[0];
            // One live coordinate: the "zonotope" is an interval; the
            // extremes pick per pair the larger (or smaller) log value.
            let bits = config.log_precision;
            let mut labels: BTreeSet<Vec<bool>> = BTreeSet::new();
            for maximize in [false, true] {
                let per_pair: Vec<ArcChoice> = inst
                    .pairs()
                    .iter()
                    .map(|pair| {
                        let g = log_coord(&pair[1].tail(j), bits)
                            .sub(&log_coord(&pair[0].tail(j), bits));
                        match (g.sign(), maximize) {
                            (Sign::Positive, true) | (Sign::Negative, false) => {
                                ArcChoice::Forced(true)
                            }
                            (Sign::Positive, false) | (Sign::Negative, true) => {
                                ArcChoice::Forced(false)
                            }
                            (Sign::Zero, _) => ArcChoice::Forced(false),
                            (Sign::Ambiguous, _) => ArcChoice::Both,
                        }
                    })
                    .collect();
                labels.extend(expand_choices(&per_pair));
            }
            rescore_labels(instance, labels.into_iter().map(Selection::Bits))
        }
        2 => {
            let segments = binary_segments(inst, &pre.live, config.log_precision);
            let candidates = minkowski_vertices(&segments);
            rescore_labels(instance, candidates.points.into_iter().map(|p| p.label))
        }
        _ => unreachable!("d = 3 has at most two tail coordinates"),
    }
}

/// Exact max-min solver for subset selection at d = 3, via top-k candidate
/// sets of the sliced zonotope.
///
/// Every vertex of the slice has integral coefficients (at most one
/// coefficient is fractional on a zonotope edge, and the hyperplane forces
/// it to an integer), so the sweep's top-k families cover all vertices.
pub fn solve_maxmin_subset(
    instance: &Instance,
    config: &ZonotopeConfig,
) -> Result<SolveResult, ZonotopeError> {
    let Instance::Subset(inst) = instance else {
        panic!("subset instance expected");
    };
    if instance.grid().d() != 3 {
        return Err(ZonotopeError::DimensionUnsupported(instance.grid().d()));
    }
    let n = inst.n();
    let k = inst.k();
    if k == n {
        let selection = Selection::Choose((0..n).collect());
        let value = selection_expectation(instance, &selection)?;
        return Ok(SolveResult {
            selection,
            value,
            optima_count: None,
        });
    }
    let pre = preprocess(instance);
    if pre.avoidable_zero {
        return fallback_exact(instance, &config.fallback_budget);
    }
    let bits = config.log_precision;
    match pre.live.len() {
        0 => {
            let selection = Selection::Choose((0..k).collect());
            let value = selection_expectation(instance, &selection)?;
            Ok(SolveResult {
                selection,
                value,
                optima_count: None,
            })
        }
        1 => {
            // Maximizing f wants small tails sums in one direction or the
            // other; embed the single coordinate on the x axis and sweep.
            let j = pre.live[0];
            let points: Vec<PlanarPoint> = inst
                .items()
                .iter()
                .map(|item| [log_coord(&item.tail(j), bits), Interval::zero()])
                .collect();
            let subsets = topk_sweep_candidates(&points, k);
            rescore_labels(instance, subsets.into_iter().map(Selection::Choose))
        }
        2 => {
            let points: Vec<PlanarPoint> = inst
                .items()
                .iter()
                .map(|item| {
                    [
                        log_coord(&item.tail(pre.live[0]), bits),
                        log_coord(&item.tail(pre.live[1]), bits),
                    ]
                })
                .collect();
            let subsets = topk_sweep_candidates(&points, k);
            rescore_labels(instance, subsets.into_iter().map(Selection::Choose))
        }
        _ => unreachable!("d = 3 has at most two tail coordinates"),
    }
}
