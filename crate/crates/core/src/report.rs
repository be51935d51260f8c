//! Scaling-shape suites: machine-readable reports plus plot-ready CSV.
//!
//! Three suites measure how the solvers scale on seeded inputs: table size
//! against 1/epsilon for the approximation scheme, candidate counts against
//! n for the planar sweep, and wall time against n for brute force. Only
//! the timing columns vary between runs; every structural column is
//! deterministic in the seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::exact::{solve_exact, Objective, SolveBudget};
use crate::fptas::{dp_min_min_binary, FptasConfig};
use crate::model::Instance;
use crate::rational::{rat, Rational};
use crate::seeded::{random_binary, InstanceRecipe};
use crate::zonotope::{binary_candidates, ZonotopeConfig};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("unknown bench suite {0:?}")]
    UnknownSuite(String),
    #[error("suite failed: {0}")]
    SuiteFailed(String),
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::UnknownSuite(_) => "UNKNOWN_SUITE",
            ReportError::SuiteFailed(_) => "SUITE_FAILED",
        }
    }
}

/// One suite's output: a CSV table and a flat summary map.
#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub csv: String,
    pub summary: BTreeMap<String, String>,
}

pub fn known_suites() -> &'static [&'static str] {
    &["fptas", "zonotope", "exact"]
}

pub fn bench_suite(name: &str) -> Result<SuiteReport, ReportError> {
    match name {
        "fptas" => fptas_suite(),
        "zonotope" => zonotope_suite(),
        "exact" => exact_suite(),
        other => Err(ReportError::UnknownSuite(other.to_owned())),
    }
}

/// Least-squares slope of ln(y) against ln(x).
pub fn fit_log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let lx = x.ln();
        let ly = y.ln();
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn fptas_suite() -> Result<SuiteReport, ReportError> {
    let epsilons: Vec<Rational> = vec![rat(1, 1), rat(1, 2), rat(1, 4), rat(1, 8)];
    let seeds = [11u64, 12, 13];
    let n = 6;
    let mut csv = String::from("suite,epsilon,seed,n,t,dense_cells,reached_states\n");
    let mut mean_cells: Vec<(f64, f64)> = Vec::new();
    for epsilon in &epsilons {
        let mut cells_total = 0f64;
        for &seed in &seeds {
            let instance = Instance::Binary(random_binary(&InstanceRecipe::new(seed, n, 3)));
            let config = FptasConfig::new(epsilon.clone())
                .map_err(|e| ReportError::SuiteFailed(e.to_string()))?;
            let solution = dp_min_min_binary(&instance, &config)
                .map_err(|e| ReportError::SuiteFailed(e.to_string()))?;
            writeln!(
                csv,
                "fptas,{},{},{},{},{},{}",
                epsilon, seed, n, solution.t, solution.dense_cells, solution.reached_states
            )
            .expect("writing to a string");
            cells_total += solution.dense_cells as f64;
        }
        let eps_f = rational_to_f64(epsilon);
        mean_cells.push((eps_f, cells_total / seeds.len() as f64));
    }
    let slope = fit_log_log_slope(&mean_cells);
    let mut summary = BTreeMap::new();
    summary.insert(
        "fitted_epsilon_exponent".to_owned(),
        format!("{slope:.4}"),
    );
    summary.insert("expected_exponent".to_owned(), "-2".to_owned());
    Ok(SuiteReport {
        name: "fptas".to_owned(),
        csv,
        summary,
    })
}

fn zonotope_suite() -> Result<SuiteReport, ReportError> {
    let sizes = [4usize, 8, 12, 16, 20, 24];
    let seeds = [21u64, 22, 23];
    let mut csv = String::from("suite,n,seed,candidates,linear_bound\n");
    let mut worst_ratio = 0f64;
    for &n in &sizes {
        for &seed in &seeds {
            let instance = Instance::Binary(random_binary(&InstanceRecipe::new(seed, n, 3)));
            let candidates = binary_candidates(&instance, &ZonotopeConfig::default())
                .map_err(|e| ReportError::SuiteFailed(e.to_string()))?;
            let count = candidates.points.len();
            writeln!(csv, "zonotope,{n},{seed},{count},{}", 2 * n)
                .expect("writing to a string");
            worst_ratio = worst_ratio.max(count as f64 / (2 * n) as f64);
        }
    }
    let mut summary = BTreeMap::new();
    // Exactly parallel generators (equal tail ratios across coordinates)
    // leave predicates ambiguous, and both resolutions are kept; the count
    // may exceed 2n by that over-emission but stays linear.
    summary.insert(
        "max_candidates_over_2n".to_owned(),
        format!("{worst_ratio:.4}"),
    );
    Ok(SuiteReport {
        name: "zonotope".to_owned(),
        csv,
        summary,
    })
}

fn exact_suite() -> Result<SuiteReport, ReportError> {
    let sizes = [8usize, 10, 12, 14];
    let seeds = [31u64, 32];
    let mut csv = String::from("suite,n,seed,selections,micros\n");
    for &n in &sizes {
        for &seed in &seeds {
            let instance = Instance::Binary(random_binary(&InstanceRecipe::new(seed, n, 3)));
            let start = Instant::now();
            solve_exact(&instance, Objective::MinMin, &SolveBudget::default())
                .map_err(|e| ReportError::SuiteFailed(e.to_string()))?;
            let micros = start.elapsed().as_micros();
            writeln!(csv, "exact,{n},{seed},{},{micros}", 1u64 << n)
                .expect("writing to a string");
        }
    }
    let mut summary = BTreeMap::new();
    summary.insert("selections_growth".to_owned(), "2^n".to_owned());
    Ok(SuiteReport {
        name: "exact".to_owned(),
        csv,
        summary,
    })
}

fn rational_to_f64(value: &Rational) -> f64 {
    let num: f64 = value.numer().to_string().parse().unwrap_or(f64::NAN);
    let den: f64 = value.denom().to_string().parse().unwrap_or(f64::NAN);
    num / den
}
