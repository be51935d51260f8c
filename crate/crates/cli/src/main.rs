//! `mesp` — solve, generate, verify, and benchmark expectation-of-minimum
//! selection instances.
//!
//! Exit codes: 0 success, 1 input error (parsing, validation, unsupported
//! flag combinations), 2 resource error (enumeration budgets, precision or
//! certification failures).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mesp_core::exact::{
    decide_threshold, joint_outcome_oracle, solve_exact, Aggregate, Objective, SolveBudget,
    SolveError,
};
use mesp_core::fptas::{dp_min_min_binary, dp_min_min_subset, FptasConfig, FptasError};
use mesp_core::hardness::{gen_cnf_binary, gen_cnf_subset, gen_subset_sum, CnfFormula};
use mesp_core::model::{negate_instance, selected_distributions, Instance};
use mesp_core::rational::{format_rational, parse_rational};
use mesp_core::report::bench_suite;
use mesp_core::sample::monte_carlo_estimate;
use mesp_core::serial::{
    parse_any_instance, parse_solution, serialize_instance, GeneratedDocument, OracleDocument,
    SolutionDocument,
};
use mesp_core::zonotope::{solve_maxmin_binary, solve_maxmin_subset, ZonotopeConfig, ZonotopeError};

#[derive(Parser)]
#[command(
    name = "mesp",
    version,
    about = "Selection of discrete distributions optimizing the expectation of the minimum"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance with the chosen algorithm and objective.
    Solve {
        #[arg(long, value_enum)]
        alg: Algorithm,
        #[arg(long, value_enum)]
        objective: ObjectiveArg,
        /// Approximation quality for --alg fptas, a rational in (0, 1].
        #[arg(long)]
        epsilon: Option<String>,
        /// Write the solution document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Instance document (bare or generated).
        input: PathBuf,
    },
    /// Emit hardness-reduction instances with certified decision data.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Monte Carlo check of a solution document against the exact value.
    Verify {
        /// Solution document holding the selection to sample.
        #[arg(long)]
        selection: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        input: PathBuf,
    },
    /// Joint-outcome expectation by exhaustive enumeration (the oracle).
    Oracle {
        #[arg(long)]
        selection: PathBuf,
        #[arg(long, value_enum, default_value_t = AggregateArg::Min)]
        aggregate: AggregateArg,
        input: PathBuf,
    },
    /// Decide a generated document's threshold question exactly.
    Decide {
        /// Generated document with an embedded threshold.
        input: PathBuf,
    },
    /// Run a scaling suite and emit CSV plus a summary.
    Bench {
        #[arg(long)]
        suite: String,
        /// Directory for <suite>.csv; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    /// Subset-sum reduction: d = 3 binary instance plus threshold.
    SubsetSum {
        /// Comma-separated nonnegative integers.
        #[arg(long)]
        z: String,
        #[arg(long)]
        target: u64,
        #[arg(long, default_value_t = 32)]
        precision: u32,
        /// Emit only the bare instance document.
        #[arg(long)]
        instance_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CNF satisfiability gap reduction from a DIMACS file.
    Cnf {
        #[arg(long)]
        dimacs: PathBuf,
        /// Gap ratio r > 1, a rational such as 2 or 5/2.
        #[arg(long)]
        ratio: String,
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long)]
        instance_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algorithm {
    Exact,
    Fptas,
    Zonotope,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    MinMin,
    MaxMin,
    MinMax,
    MaxMax,
}

impl ObjectiveArg {
    fn to_objective(self) -> Objective {
        match self {
            ObjectiveArg::MinMin => Objective::MinMin,
            ObjectiveArg::MaxMin => Objective::MaxMin,
            ObjectiveArg::MinMax => Objective::MinMax,
            ObjectiveArg::MaxMax => Objective::MaxMax,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AggregateArg {
    Min,
    Max,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Binary,
    Subset,
}

/// Failures split by exit code: 1 for input problems, 2 for exhausted
/// budgets or precision.
enum Failure {
    Input(String),
    Resource(String),
}

impl Failure {
    fn from_code(code: &str, message: String) -> Self {
        match code {
            "BUDGET_EXCEEDED" | "PRECISION_INSUFFICIENT" | "CERTIFICATION_FAILED"
            | "ZERO_PROBABILITY_UNHANDLED" | "BOUND_OVERFLOW" => Failure::Resource(message),
            _ => Failure::Input(message),
        }
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(Failure::Resource(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Solve {
            alg,
            objective,
            epsilon,
            out,
            input,
        } => solve_command(alg, objective, epsilon, out, input),
        Command::Generate { kind } => generate_command(kind),
        Command::Verify {
            selection,
            trials,
            seed,
            out,
            input,
        } => verify_command(selection, trials, seed, out, input),
        Command::Oracle {
            selection,
            aggregate,
            input,
        } => oracle_command(selection, aggregate, input),
        Command::Decide { input } => decide_command(input),
        Command::Bench { suite, out } => bench_command(&suite, out),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let text = read_file(path)?;
    parse_any_instance(&text).map_err(|e| Failure::from_code(e.code(), e.to_string()))
}

fn emit(out: Option<PathBuf>, content: &str) -> CliResult {
    match out {
        Some(path) => fs::write(&path, content)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn solve_command(
    alg: Algorithm,
    objective: ObjectiveArg,
    epsilon: Option<String>,
    out: Option<PathBuf>,
    input: PathBuf,
) -> CliResult {
    let instance = load_instance(&input)?;
    let obj = objective.to_objective();
    let doc = match alg {
        Algorithm::Exact => {
            let result = solve_exact(&instance, obj, &SolveBudget::default())
                .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
            let mut doc = SolutionDocument::new("exact", obj.name(), &result.selection, &result.value);
            doc.optima_count = result.optima_count;
            doc
        }
        Algorithm::Fptas => {
            if !matches!(obj, Objective::MinMin) {
                return Err(Failure::Input(
                    "the approximation scheme handles --objective min-min only".into(),
                ));
            }
            let epsilon_text = epsilon.ok_or_else(|| {
                Failure::Input("--alg fptas requires --epsilon (a rational in (0, 1])".into())
            })?;
            let epsilon = parse_rational(&epsilon_text)
                .map_err(|e| Failure::Input(format!("bad --epsilon: {e}")))?;
            let config = FptasConfig::new(epsilon)
                .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
            let solution = match &instance {
                Instance::Binary(_) => dp_min_min_binary(&instance, &config),
                Instance::Subset(_) => dp_min_min_subset(&instance, &config),
            }
            .map_err(|e| match &e {
                FptasError::GridNegative => Failure::Input(format!(
                    "{e}: approximation guarantees assume a nonnegative value grid"
                )),
                _ => Failure::from_code(e.code(), e.to_string()),
            })?;
            let mut doc = SolutionDocument::new(
                "fptas",
                obj.name(),
                &solution.selection,
                &solution.exact_value,
            );
            doc.epsilon = Some(format_rational(config.epsilon()));
            doc.ratio_bound = Some(format_rational(&config.ratio_bound()));
            doc
        }
        Algorithm::Zonotope => {
            if !matches!(obj, Objective::MaxMin | Objective::MinMax) {
                return Err(Failure::Input(
                    "the zonotope solver handles --objective max-min (or min-max via negation)"
                        .into(),
                ));
            }
            let (target, negated) = if matches!(obj, Objective::MinMax) {
                (negate_instance(&instance), true)
            } else {
                (instance.clone(), false)
            };
            let config = ZonotopeConfig::default();
            let solved = match &target {
                Instance::Binary(_) => solve_maxmin_binary(&target, &config),
                Instance::Subset(_) => solve_maxmin_subset(&target, &config),
            };
            match solved {
                Ok(mut result) => {
                    if negated {
                        result.value = -result.value;
                    }
                    SolutionDocument::new("zonotope", obj.name(), &result.selection, &result.value)
                }
                Err(ZonotopeError::DimensionUnsupported(d)) => {
                    // Geometric path is planar-only; enumeration answers
                    // exactly for other support sizes.
                    let result = solve_exact(&instance, obj, &SolveBudget::default())
                        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
                    let mut doc = SolutionDocument::new(
                        "zonotope",
                        obj.name(),
                        &result.selection,
                        &result.value,
                    );
                    doc.optima_count = result.optima_count;
                    doc.note = Some(format!(
                        "geometric path supports d = 3 only (instance has d = {d}); exact enumeration used"
                    ));
                    doc
                }
                Err(e) => return Err(Failure::from_code(e.code(), e.to_string())),
            }
        }
    };
    emit(out, &doc.to_canonical_string())
}

fn generate_command(kind: GenerateKind) -> CliResult {
    match kind {
        GenerateKind::SubsetSum {
            z,
            target,
            precision,
            instance_only,
            out,
        } => {
            let weights = z
                .split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<u64>()
                        .map_err(|e| Failure::Input(format!("bad --z entry {tok:?}: {e}")))
                })
                .collect::<Result<Vec<u64>, Failure>>()?;
            let decision = gen_subset_sum(&weights, target, precision)
                .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
            let content = if instance_only {
                serialize_instance(&decision.instance)
            } else {
                GeneratedDocument::from_decision(&decision).to_canonical_string()
            };
            emit(out, &content)
        }
        GenerateKind::Cnf {
            dimacs,
            ratio,
            variant,
            instance_only,
            out,
        } => {
            let text = read_file(&dimacs)?;
            let formula = CnfFormula::parse_dimacs(&text)
                .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
            let ratio = parse_rational(&ratio)
                .map_err(|e| Failure::Input(format!("bad --ratio: {e}")))?;
            let decision = match variant {
                VariantArg::Binary => gen_cnf_binary(&formula, &ratio),
                VariantArg::Subset => gen_cnf_subset(&formula, &ratio),
            }
            .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
            let content = if instance_only {
                serialize_instance(&decision.instance)
            } else {
                GeneratedDocument::from_decision(&decision).to_canonical_string()
            };
            emit(out, &content)
        }
    }
}

fn verify_command(
    selection: PathBuf,
    trials: u64,
    seed: u64,
    out: Option<PathBuf>,
    input: PathBuf,
) -> CliResult {
    if trials < 2 {
        return Err(Failure::Input("--trials must be at least 2".into()));
    }
    let instance = load_instance(&input)?;
    let solution_text = read_file(&selection)?;
    let solution = parse_solution(&solution_text)
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let sel = solution
        .selection()
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let report = monte_carlo_estimate(&instance, &sel, trials, seed)
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    emit(out, &report.to_canonical_string())
}

fn oracle_command(selection: PathBuf, aggregate: AggregateArg, input: PathBuf) -> CliResult {
    let instance = load_instance(&input)?;
    let solution_text = read_file(&selection)?;
    let solution = parse_solution(&solution_text)
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let sel = solution
        .selection()
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let dists = selected_distributions(&instance, &sel)
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let aggregate = match aggregate {
        AggregateArg::Min => Aggregate::Min,
        AggregateArg::Max => Aggregate::Max,
    };
    let value = joint_outcome_oracle(
        instance.grid(),
        &dists,
        aggregate,
        &SolveBudget::default(),
    )
    .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let doc = OracleDocument::new(
        match aggregate {
            Aggregate::Min => "min",
            Aggregate::Max => "max",
        },
        &value,
    );
    print!("{}", doc.to_canonical_string());
    Ok(())
}

fn decide_command(input: PathBuf) -> CliResult {
    let text = read_file(&input)?;
    let doc: GeneratedDocument = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("cannot parse generated document: {e}")))?;
    let decision = doc
        .into_decision()
        .map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let mesp_core::hardness::DecisionBound::Threshold(theta) = &decision.bound else {
        return Err(Failure::Input(
            "document carries a gap promise, not a decision threshold".into(),
        ));
    };
    let answer = decide_threshold(
        &decision.instance,
        Objective::MinMin,
        theta,
        &SolveBudget::default(),
    )
    .map_err(map_solve_error)?;
    println!(
        "{}",
        serde_json::json!({
            "format_tag": "mesp-decision-v1",
            "theta": format_rational(theta),
            "answer": answer,
        })
    );
    Ok(())
}

fn map_solve_error(e: SolveError) -> Failure {
    Failure::from_code(e.code(), e.to_string())
}

fn bench_command(suite: &str, out: Option<PathBuf>) -> CliResult {
    let report = bench_suite(suite).map_err(|e| Failure::from_code(e.code(), e.to_string()))?;
    let summary = serde_json::json!({
        "format_tag": "mesp-bench-v1",
        "suite": report.name,
        "summary": report.summary,
    });
    match out {
        Some(dir) => {
            fs::create_dir_all(&dir)
                .map_err(|e| Failure::Input(format!("cannot create {}: {e}", dir.display())))?;
            let csv_path = dir.join(format!("{}.csv", report.name));
            fs::write(&csv_path, &report.csv)
                .map_err(|e| Failure::Input(format!("cannot write {}: {e}", csv_path.display())))?;
            println!("{summary}");
        }
        None => {
            print!("{}", report.csv);
            println!("{summary}");
        }
    }
    Ok(())
}
