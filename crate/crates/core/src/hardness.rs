//! Generators for the reductions that make min-min selection hard:
//! subset-sum into d = 3 binary selection, and CNF satisfiability into
//! variable-d binary or subset selection with a constant-factor gap.
//!
//! The CNF constructions are exact: every probability and grid value is a
//! closed-form rational in `p` and `v = p^-n`, so their gap promises hold by
//! rational arithmetic alone. The subset-sum construction needs rounded
//! exponentials; it emits a decision threshold together with a certificate
//! that the yes/no separation survived the rounding, retrying at doubled
//! precision until the certificate holds.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::interval::{exp_interval, Interval};
use crate::model::{
    BinaryInstance, Instance, ModelError, SubsetInstance, TailDistribution, ValueGrid,
};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardnessError {
    #[error("atom location {0} is not a grid value")]
    LocationNotOnGrid(String),
    #[error("atom weights sum to {0}, expected exactly 1")]
    WeightsDontSumToOne(String),
    #[error("could not certify the decision threshold: {0}")]
    CertificationFailed(String),
    #[error("precision must be at least 16 bits, got {0}")]
    BadPrecision(u32),
    #[error("invalid generator input: {0}")]
    BadInput(String),
    #[error("DIMACS parse error at line {line}: {message}")]
    Dimacs { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl HardnessError {
    pub fn code(&self) -> &'static str {
        match self {
            HardnessError::LocationNotOnGrid(_) => "LOCATION_NOT_ON_GRID",
            HardnessError::WeightsDontSumToOne(_) => "WEIGHTS_DONT_SUM_TO_ONE",
            HardnessError::CertificationFailed(_) => "CERTIFICATION_FAILED",
            HardnessError::BadPrecision(_) => "BAD_PRECISION",
            HardnessError::BadInput(_) => "BAD_INPUT",
            HardnessError::Dimacs { .. } => "PARSE_ERROR",
            HardnessError::Model(e) => e.code(),
        }
    }
}

/// A CNF formula over variables 1..=num_vars; literals are signed indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<i64>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<i64>>) -> Result<Self, HardnessError> {
        if num_vars < 1 {
            return Err(HardnessError::BadInput("need at least one variable".into()));
        }
        if clauses.is_empty() {
            return Err(HardnessError::BadInput("need at least one clause".into()));
        }
        let mut normalized = Vec::with_capacity(clauses.len());
        for (idx, clause) in clauses.into_iter().enumerate() {
            if clause.is_empty() {
                return Err(HardnessError::BadInput(format!("clause {idx} is empty")));
            }
            let mut lits = clause;
            lits.sort_unstable();
            lits.dedup();
            for &lit in &lits {
                if lit == 0 || lit.unsigned_abs() as usize > num_vars {
                    return Err(HardnessError::BadInput(format!(
                        "literal {lit} out of range in clause {idx}"
                    )));
                }
                if lits.contains(&-lit) {
                    return Err(HardnessError::BadInput(format!(
                        "clause {idx} contains both {lit} and {}",
                        -lit
                    )));
                }
            }
            normalized.push(lits);
        }
        Ok(CnfFormula {
            num_vars,
            clauses: normalized,
        })
    }

    /// Parses DIMACS CNF: comment lines `c …`, a header `p cnf <vars>
    /// <clauses>`, then whitespace-separated literals with `0` terminators.
    pub fn parse_dimacs(text: &str) -> Result<Self, HardnessError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses: Vec<Vec<i64>> = Vec::new();
        let mut current: Vec<i64> = Vec::new();
        for (line_idx, line) in text.lines().enumerate() {
            let line_no = line_idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
                continue;
            }
            if trimmed.starts_with('p') {
                if header.is_some() {
                    return Err(HardnessError::Dimacs {
                        line: line_no,
                        message: "duplicate header".into(),
                    });
                }
                let fields: Vec<&str> = trimmed.split_whitespace().collect();
                if fields.len() != 4 || fields[1] != "cnf" {
                    return Err(HardnessError::Dimacs {
                        line: line_no,
                        message: "expected `p cnf <vars> <clauses>`".into(),
                    });
                }
                let vars = fields[2].parse().map_err(|_| HardnessError::Dimacs {
                    line: line_no,
                    message: "bad variable count".into(),
                })?;
                let count = fields[3].parse().map_err(|_| HardnessError::Dimacs {
                    line: line_no,
                    message: "bad clause count".into(),
                })?;
                header = Some((vars, count));
                continue;
            }
            if header.is_none() {
                return Err(HardnessError::Dimacs {
                    line: line_no,
                    message: "clause before header".into(),
                });
            }
            for token in trimmed.split_whitespace() {
                let lit: i64 = token.parse().map_err(|_| HardnessError::Dimacs {
                    line: line_no,
                    message: format!("bad literal {token:?}"),
                })?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(lit);
                }
            }
        }
        let Some((num_vars, expected)) = header else {
            return Err(HardnessError::Dimacs {
                line: 0,
                message: "missing header".into(),
            });
        };
        if !current.is_empty() {
            return Err(HardnessError::Dimacs {
                line: 0,
                message: "unterminated clause at end of input".into(),
            });
        }
        if clauses.len() != expected {
            return Err(HardnessError::Dimacs {
                line: 0,
                message: format!("header promises {expected} clauses, found {}", clauses.len()),
            });
        }
        CnfFormula::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<i64>] {
        &self.clauses
    }

    /// The membership indicator: 1 if the literal occurs in clause `s`.
    pub fn contains(&self, literal: i64, s: usize) -> bool {
        self.clauses[s].contains(&literal)
    }

    /// Truth-table satisfiability; usable up to ~20 variables.
    pub fn satisfiable(&self) -> bool {
        (0u64..(1 << self.num_vars)).any(|assignment| self.satisfied_by_mask(assignment))
    }

    pub fn satisfied_by_mask(&self, assignment: u64) -> bool {
        self.clauses.iter().all(|clause| {
            clause.iter().any(|&lit| {
                let var = lit.unsigned_abs() as usize;
                let value = (assignment >> (var - 1)) & 1 == 1;
                if lit > 0 {
                    value
                } else {
                    !value
                }
            })
        })
    }
}

/// Point masses (weight, location); the construction-side notation that
/// converts to the tail-form input convention at the boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomList {
    pub atoms: Vec<(Rational, Rational)>,
}

/// Converts atoms to tail form over `grid`: `q_j` is the total weight at
/// locations at or above `l_j`. Duplicate locations merge; weights must be
/// positive and sum to exactly one, and every location must be a grid value.
pub fn atoms_to_tails(
    atoms: &AtomList,
    grid: &ValueGrid,
) -> Result<TailDistribution, HardnessError> {
    let d = grid.d();
    let mut mass = vec![Rational::zero(); d];
    let mut total = Rational::zero();
    for (weight, location) in &atoms.atoms {
        if !weight.is_positive() {
            return Err(HardnessError::BadInput(format!(
                "atom weight {weight} is not positive"
            )));
        }
        let idx = grid
            .values()
            .iter()
            .position(|l| l == location)
            .ok_or_else(|| HardnessError::LocationNotOnGrid(location.to_string()))?;
        mass[idx] += weight;
        total += weight;
    }
    if !total.is_one() {
        return Err(HardnessError::WeightsDontSumToOne(total.to_string()));
    }
    let mut tails = Vec::with_capacity(d - 1);
    let mut suffix = Rational::zero();
    for idx in (1..d).rev() {
        suffix += &mass[idx];
        tails.push(suffix.clone());
    }
    tails.reverse();
    Ok(TailDistribution::new(tails, d)?)
}

/// The decision attached to a generated instance: a single threshold, or a
/// promised gap between the satisfiable and unsatisfiable optima.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecisionBound {
    Threshold(Rational),
    Gap { upper: Rational, lower: Rational },
}

/// Construction parameters, kept for audit and re-verification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GenerationParams {
    SubsetSum {
        z: Vec<u64>,
        target: u64,
        m: u64,
        gamma: Rational,
        precision: u32,
    },
    Cnf {
        variant: CnfVariant,
        p: Rational,
        v: Rational,
        r: Rational,
        num_vars: usize,
        num_clauses: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CnfVariant {
    Binary,
    Subset,
}

/// Certified ordering `yes_upper < theta < no_lower` for a subset-sum
/// reduction: `yes_upper` bounds every target-sum expectation from above,
/// `no_lower` bounds every off-target expectation from below, both for the
/// emitted (rounded) instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdCertificate {
    pub yes_upper: Rational,
    pub no_lower: Rational,
    pub certification_bits: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedDecision {
    pub instance: Instance,
    pub bound: DecisionBound,
    pub params: GenerationParams,
    pub certificate: Option<ThresholdCertificate>,
}

fn round_down_to_bits(x: &Rational, bits: u32) -> Rational {
    let num = (x.numer().clone() << bits).div_floor(x.denom());
    Rational::new(num, BigInt::one() << bits)
}

fn round_up_to_bits(x: &Rational, bits: u32) -> Rational {
    let num = (x.numer().clone() << bits).div_ceil(x.denom());
    Rational::new(num, BigInt::one() << bits)
}

/// Emitted tail for `e^x` (x <= 0): the enclosure midpoint rounded down to
/// `bits`, clamped into (0, 1].
fn emitted_exp(x: &Rational, bits: u32) -> Rational {
    if x.is_zero() {
        return Rational::one();
    }
    let enclosure = exp_interval(x, bits + 4);
    let rounded = round_down_to_bits(&enclosure.midpoint(), bits);
    if rounded.is_positive() {
        rounded.min(Rational::one())
    } else {
        // Extremely small values keep one ulp so tails stay positive.
        Rational::new(BigInt::one(), BigInt::one() << bits)
    }
}

struct SubsetSumShape {
    gamma: Rational,
    m: u64,
    n: usize,
    sum_z: u64,
}

fn subset_sum_tails(
    z: &[u64],
    target: u64,
    bits: u32,
) -> (SubsetSumShape, Rational, Vec<[TailDistribution; 2]>) {
    let n = z.len();
    let m = z.iter().copied().max().unwrap_or(0).max(1);
    let nm = (n as u64) * m;
    let gamma = Rational::new(BigInt::one(), BigInt::from(2 * nm));
    // l_2 - l_1 approximates e^(2 gamma (nM - T)) = e^((nM-T)/(nM)), rounded
    // up so the grid stays strictly increasing even when the value is tiny.
    let exponent = Rational::new(
        BigInt::from(nm as i128 - target as i128),
        BigInt::from(nm),
    );
    let l2_gap = round_up_to_bits(&exp_interval(&exponent, bits + 4).midpoint(), bits);
    let neg_gamma = -gamma.clone();
    let pairs = z
        .iter()
        .map(|&zi| {
            let exp_of = |units: u64| -> Rational {
                emitted_exp(&(&neg_gamma * Rational::from_integer(BigInt::from(units))), bits)
            };
            let q10 = Rational::one();
            let q20 = exp_of(2 * m);
            let q11 = exp_of(zi);
            let q21 = exp_of(2 * m - zi).min(q11.clone());
            [
                TailDistribution::new(vec![q10, q20], 3).expect("valid tails by construction"),
                TailDistribution::new(vec![q11, q21], 3).expect("valid tails by construction"),
            ]
        })
        .collect();
    (
        SubsetSumShape {
            gamma,
            m,
            n,
            sum_z: z.iter().sum(),
        },
        l2_gap,
        pairs,
    )
}

/// Per-side expectation bounds for the emitted instance as a function of the
/// selected sum sigma, accounting for tail rounding through per-pair ratio
/// enclosures.
struct SeparationBounds {
    ratio1: Interval,
    ratio2: Interval,
    l2_gap: Rational,
    gamma: Rational,
    two_nm: u64,
    bits: u32,
}

impl SeparationBounds {
    fn new(
        z: &[u64],
        shape: &SubsetSumShape,
        l2_gap: &Rational,
        pairs: &[[TailDistribution; 2]],
        bits: u32,
    ) -> Self {
        let neg_gamma = -shape.gamma.clone();
        let ratio_for = |q: &Rational, units: u64| -> Interval {
            let ideal = exp_interval(
                &(&neg_gamma * Rational::from_integer(BigInt::from(units))),
                bits,
            );
            Interval::new(q / ideal.hi(), q / ideal.lo())
        };
        let mut ratio1 = Interval::point(Rational::one());
        let mut ratio2 = Interval::point(Rational::one());
        for (i, &zi) in z.iter().enumerate() {
            let r10 = ratio_for(&pairs[i][0].tail(1), 0);
            let r11 = ratio_for(&pairs[i][1].tail(1), zi);
            let r20 = ratio_for(&pairs[i][0].tail(2), 2 * shape.m);
            let r21 = ratio_for(&pairs[i][1].tail(2), 2 * shape.m - zi);
            ratio1 = ratio1.mul(&r10.hull(&r11));
            ratio2 = ratio2.mul(&r20.hull(&r21));
        }
        SeparationBounds {
            ratio1,
            ratio2,
            l2_gap: l2_gap.clone(),
            gamma: shape.gamma.clone(),
            two_nm: 2 * (shape.n as u64) * shape.m,
            bits,
        }
    }

    /// Enclosure of the expectation of any selection with sum sigma.
    fn expectation_range(&self, sigma: u64) -> Interval {
        let neg_gamma = -self.gamma.clone();
        let first = exp_interval(
            &(&neg_gamma * Rational::from_integer(BigInt::from(sigma))),
            self.bits,
        );
        let second_exponent =
            &neg_gamma * Rational::from_integer(BigInt::from(self.two_nm as i128 - sigma as i128));
        let second = exp_interval(&second_exponent, self.bits);
        first
            .mul(&self.ratio1)
            .add(&second.mul(&self.ratio2).scale(&self.l2_gap))
    }
}

/// Reduces a subset-sum question (does some subset of `z` sum to `target`?)
/// to min-min binary selection at d = 3.
///
/// The emitted threshold theta separates target-sum selections from all
/// others with a certified margin; `decide_threshold` on the instance then
/// answers the subset-sum question exactly.
pub fn gen_subset_sum(
    z: &[u64],
    target: u64,
    precision: u32,
) -> Result<GeneratedDecision, HardnessError> {
    if z.is_empty() {
        return Err(HardnessError::BadInput("need at least one weight".into()));
    }
    if precision < 16 {
        return Err(HardnessError::BadPrecision(precision));
    }
    let mut bits = precision;
    for _attempt in 0..6 {
        let (shape, l2_gap, pairs) = subset_sum_tails(z, target, bits);
        let cert_bits = bits + 16;
        let bounds = SeparationBounds::new(z, &shape, &l2_gap, &pairs, cert_bits);
        let yes_upper = bounds.expectation_range(target).hi().clone();
        // Every achievable off-target sum, plus the adjacent sums the
        // threshold is nominally placed against.
        let mut no_candidates: Vec<u64> = (0..=shape.sum_z).filter(|&s| s != target).collect();
        if target > 0 {
            no_candidates.push(target - 1);
        }
        no_candidates.push(target + 1);
        no_candidates.sort_unstable();
        no_candidates.dedup();
        let no_lower = no_candidates
            .iter()
            .map(|&s| bounds.expectation_range(s).lo().clone())
            .min()
            .expect("candidate sums are never empty");
        if yes_upper < no_lower {
            let theta = (&yes_upper + &no_lower) / Rational::from_integer(BigInt::from(2));
            let grid = ValueGrid::new(vec![
                Rational::zero(),
                Rational::one(),
                Rational::one() + &l2_gap,
            ])?;
            let instance = Instance::Binary(BinaryInstance::new(grid, pairs)?);
            return Ok(GeneratedDecision {
                instance,
                bound: DecisionBound::Threshold(theta),
                params: GenerationParams::SubsetSum {
                    z: z.to_vec(),
                    target,
                    m: shape.m,
                    gamma: shape.gamma,
                    precision: bits,
                },
                certificate: Some(ThresholdCertificate {
                    yes_upper,
                    no_lower,
                    certification_bits: cert_bits,
                }),
            });
        }
        bits *= 2;
    }
    Err(HardnessError::CertificationFailed(format!(
        "separation not certified after retries up to {bits} bits"
    )))
}

/// Recomputes a subset-sum certificate from the emitted artifacts and checks
/// the ordering `yes_upper < theta < no_lower`.
pub fn verify_threshold_certificate(decision: &GeneratedDecision) -> Result<bool, HardnessError> {
    let GenerationParams::SubsetSum {
        z,
        target,
        m,
        gamma,
        precision: _,
    } = &decision.params
    else {
        return Err(HardnessError::BadInput(
            "certificate verification applies to subset-sum outputs".into(),
        ));
    };
    let Some(certificate) = &decision.certificate else {
        return Ok(false);
    };
    let DecisionBound::Threshold(theta) = &decision.bound else {
        return Ok(false);
    };
    let Instance::Binary(inst) = &decision.instance else {
        return Ok(false);
    };
    let l2_gap = inst.grid().value(2) - inst.grid().value(1);
    let shape = SubsetSumShape {
        gamma: gamma.clone(),
        m: *m,
        n: z.len(),
        sum_z: z.iter().sum(),
    };
    let bounds = SeparationBounds::new(
        z,
        &shape,
        &l2_gap,
        inst.pairs(),
        certificate.certification_bits,
    );
    let yes_upper = bounds.expectation_range(*target).hi().clone();
    let mut no_candidates: Vec<u64> = (0..=shape.sum_z).filter(|&s| s != *target).collect();
    if *target > 0 {
        no_candidates.push(*target - 1);
    }
    no_candidates.push(*target + 1);
    no_candidates.sort_unstable();
    no_candidates.dedup();
    let no_lower = no_candidates
        .iter()
        .map(|&s| bounds.expectation_range(s).lo().clone())
        .min()
        .expect("candidate sums are never empty");
    Ok(yes_upper == certificate.yes_upper
        && no_lower == certificate.no_lower
        && certificate.yes_upper < *theta
        && *theta < certificate.no_lower)
}

fn rational_pow(base: &Rational, exponent: i64) -> Rational {
    base.pow(exponent as i32)
}

/// The CNF gap constructions share one atom recipe; `slots` enumerates the
/// per-slot location discounts for a given item.
fn cnf_item(
    p: &Rational,
    v: &Rational,
    total_slots: usize,
    discount: impl Fn(usize) -> bool,
) -> AtomList {
    let one = Rational::one();
    let mut atoms = Vec::with_capacity(total_slots + 1);
    for s in 0..total_slots {
        let weight = (&one - p) * rational_pow(p, s as i64);
        let shift = if discount(s) { 1 } else { 0 };
        let location = rational_pow(v, s as i64 - shift);
        atoms.push((weight, location));
    }
    // Residual mass: the construction caps the top atom at the highest grid
    // value v^(total_slots - 1); placing it any higher would add a constant
    // to every expectation and destroy the gap.
    atoms.push((
        rational_pow(p, total_slots as i64),
        rational_pow(v, total_slots as i64 - 1),
    ));
    AtomList { atoms }
}

fn cnf_grid(v: &Rational, top_power: i64) -> Result<ValueGrid, HardnessError> {
    let values = (-1..=top_power).map(|s| rational_pow(v, s)).collect();
    Ok(ValueGrid::new(values)?)
}

fn check_ratio(r: &Rational) -> Result<(), HardnessError> {
    if *r <= Rational::one() {
        return Err(HardnessError::BadInput(format!(
            "approximation ratio must exceed 1, got {r}"
        )));
    }
    Ok(())
}

/// CNF-SAT to min-min binary selection with an r-factor gap: satisfiable
/// formulas yield an optimum below 1/r, unsatisfiable ones at least 1.
pub fn gen_cnf_binary(
    formula: &CnfFormula,
    r: &Rational,
) -> Result<GeneratedDecision, HardnessError> {
    check_ratio(r)?;
    let n = formula.num_vars();
    let c = formula.num_clauses();
    let p = (r * Rational::from_integer(BigInt::from(c as u64 + 1))).recip();
    let v = rational_pow(&p, -(n as i64));
    let grid = cnf_grid(&v, c as i64 - 1)?;
    let mut pairs = Vec::with_capacity(n);
    for i in 1..=n {
        let var = i as i64;
        let option = |literal: i64| -> Result<TailDistribution, HardnessError> {
            let atoms = cnf_item(&p, &v, c, |s| formula.contains(literal, s));
            atoms_to_tails(&atoms, &grid)
        };
        pairs.push([option(-var)?, option(var)?]);
    }
    let instance = Instance::Binary(BinaryInstance::new(grid, pairs)?);
    Ok(GeneratedDecision {
        instance,
        bound: DecisionBound::Gap {
            upper: r.recip(),
            lower: Rational::one(),
        },
        params: GenerationParams::Cnf {
            variant: CnfVariant::Binary,
            p,
            v,
            r: r.clone(),
            num_vars: n,
            num_clauses: c,
        },
        certificate: None,
    })
}

/// CNF-SAT to min-min subset selection (choose n of 2n variables) with an
/// r-factor gap. Pairing gadget slots force any below-1 selection to take
/// exactly one variable from each pair.
pub fn gen_cnf_subset(
    formula: &CnfFormula,
    r: &Rational,
) -> Result<GeneratedDecision, HardnessError> {
    check_ratio(r)?;
    let n = formula.num_vars();
    let c = formula.num_clauses();
    let p = (r * Rational::from_integer(BigInt::from((n + c + 1) as u64))).recip();
    let v = rational_pow(&p, -(n as i64));
    let grid = cnf_grid(&v, (c + n) as i64 - 1)?;
    let mut items = Vec::with_capacity(2 * n);
    for i in 1..=n {
        let var = i as i64;
        let option = |literal: i64| -> Result<TailDistribution, HardnessError> {
            // Slots 0..c carry clause membership; slots c..c+n carry the
            // pairing gadget, one slot per pair (slot c + i - 1 for pair i).
            let atoms = cnf_item(&p, &v, c + n, |s| {
                if s < c {
                    formula.contains(literal, s)
                } else {
                    s - c == i - 1
                }
            });
            atoms_to_tails(&atoms, &grid)
        };
        items.push(option(-var)?);
        items.push(option(var)?);
    }
    let instance = Instance::Subset(SubsetInstance::new(grid, items, n)?);
    Ok(GeneratedDecision {
        instance,
        bound: DecisionBound::Gap {
            upper: r.recip(),
            lower: Rational::one(),
        },
        params: GenerationParams::Cnf {
            variant: CnfVariant::Subset,
            p,
            v,
            r: r.clone(),
            num_vars: n,
            num_clauses: c,
        },
        certificate: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{decide_threshold, solve_exact, Objective, SolveBudget};
    use crate::model::selection_expectation;
    use crate::model::Selection;
    use crate::rational::{rat, rat_int};

    #[test]
    fn atoms_to_tails_basics() {
        let grid = ValueGrid::new(vec![rat_int(0), rat_int(1), rat_int(3)]).unwrap();
        // Everything at l_0: all tails zero.
        let atoms = AtomList {
            atoms: vec![(rat_int(1), rat_int(0))],
        };
        let tails = atoms_to_tails(&atoms, &grid).unwrap();
        assert_eq!(tails.tails(), &[rat_int(0), rat_int(0)]);

        let grid = ValueGrid::new(vec![rat(1, 4), rat_int(1)]).unwrap();
        let atoms = AtomList {
            atoms: vec![(rat(3, 4), rat(1, 4)), (rat(1, 4), rat_int(1))],
        };
        let tails = atoms_to_tails(&atoms, &grid).unwrap();
        assert_eq!(tails.tails(), &[rat(1, 4)]);
    }

    #[test]
    fn atoms_to_tails_rejections() {
        let grid = ValueGrid::new(vec![rat_int(0), rat_int(1)]).unwrap();
        let off_grid = AtomList {
            atoms: vec![(rat_int(1), rat(1, 2))],
        };
        assert_eq!(
            atoms_to_tails(&off_grid, &grid).unwrap_err().code(),
            "LOCATION_NOT_ON_GRID"
        );
        let short = AtomList {
            atoms: vec![(rat(1, 2), rat_int(0))],
        };
        assert_eq!(
            atoms_to_tails(&short, &grid).unwrap_err().code(),
            "WEIGHTS_DONT_SUM_TO_ONE"
        );
    }

    #[test]
    fn atoms_round_trip_expectation() {
        // expectation(grid, atoms_to_tails(A)) = sum of w*x over A.
        let grid = ValueGrid::new(vec![rat_int(0), rat(1, 2), rat_int(2), rat_int(5)]).unwrap();
        let atoms = AtomList {
            atoms: vec![
                (rat(1, 6), rat_int(0)),
                (rat(1, 3), rat_int(2)),
                (rat(1, 4), rat(1, 2)),
                (rat(1, 4), rat_int(5)),
            ],
        };
        let tails = atoms_to_tails(&atoms, &grid).unwrap();
        let direct: Rational = atoms.atoms.iter().map(|(w, x)| w * x).sum();
        assert_eq!(crate::model::expectation(&grid, &tails).unwrap(), direct);
    }

    #[test]
    fn dimacs_round_trip() {
        let text = "c tiny example\np cnf 3 2\n1 -2 0\n2 3 0\n";
        let formula = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(formula.num_vars(), 3);
        assert_eq!(formula.clauses(), &[vec![-2, 1], vec![2, 3]]);
        assert!(formula.satisfiable());

        assert!(CnfFormula::parse_dimacs("p cnf 1 1\n1 -1 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("1 0\n").is_err());
        assert!(CnfFormula::parse_dimacs("p cnf 1 2\n1 0\n").is_err());
    }

    #[test]
    fn cnf_binary_worked_example() {
        // F = (X1), r = 2: p = 1/4, v = 4, grid {1/4, 1}.
        let formula = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let result = gen_cnf_binary(&formula, &rat_int(2)).unwrap();
        let GenerationParams::Cnf { p, v, .. } = &result.params else {
            panic!()
        };
        assert_eq!(p, &rat(1, 4));
        assert_eq!(v, &rat_int(4));
        let Instance::Binary(inst) = &result.instance else {
            panic!()
        };
        assert_eq!(inst.grid().values(), &[rat(1, 4), rat_int(1)]);
        // Y_{1,1} = atoms {(3/4, 1/4), (1/4, 1)} -> E = 7/16;
        // Y_{1,0} = all mass at 1 -> E = 1.
        let e1 = selection_expectation(&result.instance, &Selection::Bits(vec![true])).unwrap();
        let e0 = selection_expectation(&result.instance, &Selection::Bits(vec![false])).unwrap();
        assert_eq!(e1, rat(7, 16));
        assert_eq!(e0, rat_int(1));
        let opt = solve_exact(&result.instance, Objective::MinMin, &SolveBudget::default())
            .unwrap()
            .value;
        assert_eq!(opt, rat(7, 16));
        assert!(opt < rat(1, 2));
    }

    #[test]
    fn cnf_binary_unsatisfiable_floor() {
        let formula = CnfFormula::new(1, vec![vec![1], vec![-1]]).unwrap();
        assert!(!formula.satisfiable());
        let result = gen_cnf_binary(&formula, &rat_int(2)).unwrap();
        let opt = solve_exact(&result.instance, Objective::MinMin, &SolveBudget::default())
            .unwrap()
            .value;
        assert!(opt >= rat_int(1));
    }

    #[test]
    fn cnf_binary_tail_identities() {
        // Pr{Y_{i,1} >= v^s} = p^(s+1) if X_i in C_s else p^s, and the
        // mirrored identity for Y_{i,0}.
        let formula = CnfFormula::new(3, vec![vec![1, -2], vec![2, 3], vec![-1, -3]]).unwrap();
        let r = rat(5, 2);
        let result = gen_cnf_binary(&formula, &r).unwrap();
        let GenerationParams::Cnf { p, .. } = &result.params else {
            panic!()
        };
        let Instance::Binary(inst) = &result.instance else {
            panic!()
        };
        let c = formula.num_clauses();
        for i in 1..=formula.num_vars() {
            for s in 0..c {
                // grid index of v^s is s + 1 (index 0 holds v^-1).
                let tail_idx = s + 1;
                for (option, literal) in [(0usize, -(i as i64)), (1usize, i as i64)] {
                    let expected = if formula.contains(literal, s) {
                        rational_pow(p, s as i64 + 1)
                    } else {
                        rational_pow(p, s as i64)
                    };
                    assert_eq!(
                        inst.pairs()[i - 1][option].tail(tail_idx),
                        expected,
                        "identity failed at i={i}, s={s}, option={option}"
                    );
                }
            }
        }
    }

    #[test]
    fn cnf_subset_worked_example() {
        // F = (X1), r = 2: p = 1/6, one pair, k = 1.
        let formula = CnfFormula::new(1, vec![vec![1]]).unwrap();
        let result = gen_cnf_subset(&formula, &rat_int(2)).unwrap();
        let GenerationParams::Cnf { p, .. } = &result.params else {
            panic!()
        };
        assert_eq!(p, &rat(1, 6));
        let Instance::Subset(inst) = &result.instance else {
            panic!()
        };
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.k(), 1);
        // Item 1 is Y_{1,1} (the satisfying option).
        let e_true =
            selection_expectation(&result.instance, &Selection::Choose(vec![1])).unwrap();
        let e_false =
            selection_expectation(&result.instance, &Selection::Choose(vec![0])).unwrap();
        assert!(e_true < rat(1, 2));
        assert!(e_false >= rat_int(1));
    }

    #[test]
    fn cnf_subset_pair_gadget() {
        // Two variables, clause (X1 or X2), k = 2: taking both options of one
        // pair leaves the other pair's gadget slot undiscounted and the
        // expectation at 1 or above.
        let formula = CnfFormula::new(2, vec![vec![1, 2]]).unwrap();
        let result = gen_cnf_subset(&formula, &rat_int(2)).unwrap();
        let Instance::Subset(_) = &result.instance else {
            panic!()
        };
        // Items: [Y1_0, Y1_1, Y2_0, Y2_1].
        let both_of_pair_one =
            selection_expectation(&result.instance, &Selection::Choose(vec![0, 1])).unwrap();
        assert!(both_of_pair_one >= rat_int(1));
        // One per pair satisfying the clause: X1 = true, X2 = false.
        let satisfying =
            selection_expectation(&result.instance, &Selection::Choose(vec![1, 2])).unwrap();
        assert!(satisfying < rat(1, 2));
        // One per pair but violating the clause: X1 = X2 = false.
        let violating =
            selection_expectation(&result.instance, &Selection::Choose(vec![0, 2])).unwrap();
        assert!(violating >= rat_int(1));
    }

    #[test]
    fn subset_sum_reduction_decides_correctly() {
        let budget = SolveBudget::default();
        let yes = gen_subset_sum(&[1, 2], 3, 32).unwrap();
        let DecisionBound::Threshold(theta) = &yes.bound else {
            panic!()
        };
        assert!(decide_threshold(&yes.instance, Objective::MinMin, theta, &budget).unwrap());
        assert!(verify_threshold_certificate(&yes).unwrap());

        let no = gen_subset_sum(&[2, 2], 3, 32).unwrap();
        let DecisionBound::Threshold(theta) = &no.bound else {
            panic!()
        };
        assert!(!decide_threshold(&no.instance, Objective::MinMin, theta, &budget).unwrap());
        assert!(verify_threshold_certificate(&no).unwrap());
    }

    #[test]
    fn subset_sum_degenerate_all_zero() {
        let decision = gen_subset_sum(&[0], 0, 32).unwrap();
        let DecisionBound::Threshold(theta) = &decision.bound else {
            panic!()
        };
        // Both options are identical; the empty sum hits the target.
        assert!(decide_threshold(
            &decision.instance,
            Objective::MinMin,
            theta,
            &SolveBudget::default()
        )
        .unwrap());
    }

    #[test]
    fn subset_sum_trivial_no_instance() {
        // Target beyond n*M: still emitted, decision is no.
        let decision = gen_subset_sum(&[1, 1], 5, 32).unwrap();
        let DecisionBound::Threshold(theta) = &decision.bound else {
            panic!()
        };
        assert!(!decide_threshold(
            &decision.instance,
            Objective::MinMin,
            theta,
            &SolveBudget::default()
        )
        .unwrap());
        assert!(verify_threshold_certificate(&decision).unwrap());
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert_eq!(
            gen_subset_sum(&[], 0, 32).unwrap_err().code(),
            "BAD_INPUT"
        );
        assert_eq!(
            gen_subset_sum(&[1], 1, 8).unwrap_err().code(),
            "BAD_PRECISION"
        );
        let formula = CnfFormula::new(1, vec![vec![1]]).unwrap();
        assert_eq!(
            gen_cnf_binary(&formula, &rat_int(1)).unwrap_err().code(),
            "BAD_INPUT"
        );
    }
}
