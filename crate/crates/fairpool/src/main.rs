//! Command-line surface: model validation, fair pooling runs, fairness
//! checks, Monte-Carlo benchmarking, and DOT export.
//!
//! Exit codes: 0 ok/fair, 1 validation error, 2 unfair, 3 I/O error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairpool::aggregation::{AggregationRule, PoolingOptions, TieBreak};
use fairpool::bench::{self, BenchConfig};
use fairpool::document::{check_mutual_consistency, ModelDocument};
use fairpool::dot;
use fairpool::fair_pooling::{compare_algorithms, pooling_removal, removal_pooling};
use fairpool::fairness::{check_fair_bruteforce, check_fair_lemma1, FairnessPartition};
use fairpool::opinion::{pool_root_distributions, WeightVector};

const EXIT_OK: u8 = 0;
const EXIT_VALIDATION: u8 = 1;
const EXIT_UNFAIR: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(
    name = "fairpool",
    version,
    about = "Pool expert causal diagrams under counterfactual fairness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check model documents individually and for mutual consistency.
    Validate {
        /// Model document files (JSON).
        files: Vec<PathBuf>,
    },
    /// Pool expert models into a counterfactually fair diagram.
    Pool(PoolArgs),
    /// Check counterfactual fairness of a single model.
    CheckFair(CheckFairArgs),
    /// Monte-Carlo comparison of the two algorithms on random ensembles.
    Bench(BenchArgs),
    /// Render a model document as Graphviz DOT.
    Export(ExportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    RemovalPooling,
    PoolingRemoval,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    StrictMajority,
    Quota,
    Unanimity,
    WeightedMajority,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    Alphabetical,
    Random,
}

#[derive(Args)]
struct PoolArgs {
    /// Model document files, one per expert.
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "pooling-removal")]
    algorithm: AlgorithmArg,
    #[arg(long, value_enum, default_value = "strict-majority")]
    rule: RuleArg,
    /// Quota threshold in (0, 1]; only with --rule quota.
    #[arg(long)]
    quota_threshold: Option<f64>,
    /// Comma-separated expert weights; only with --rule weighted-majority.
    #[arg(long, value_delimiter = ',')]
    weights: Vec<f64>,
    /// Protected attribute names.
    #[arg(long, required = true, value_delimiter = ',')]
    protected: Vec<String>,
    #[arg(long, value_enum, default_value = "alphabetical")]
    tie_break: TieBreakArg,
    /// Seed for the random tie-break order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write the pooled diagram as DOT to this path.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Linearly pool the experts' exogenous root distributions as well.
    #[arg(long)]
    with_distributions: bool,
}

#[derive(Args)]
struct CheckFairArgs {
    file: PathBuf,
    #[arg(long, required = true, value_delimiter = ',')]
    protected: Vec<String>,
    /// Exhaustive check over the structural model instead of the
    /// diagram-level condition; requires equations in the document.
    #[arg(long)]
    brute_force: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 3)]
    experts: usize,
    #[arg(long, default_value_t = 7)]
    vars: usize,
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExportArgs {
    file: PathBuf,
    /// Protected attribute names to highlight.
    #[arg(long, value_delimiter = ',')]
    protected: Vec<String>,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Validate { files } => cmd_validate(&files),
        Command::Pool(args) => cmd_pool(&args),
        Command::CheckFair(args) => cmd_check_fair(&args),
        Command::Bench(args) => cmd_bench(&args),
        Command::Export(args) => cmd_export(&args),
    };
    ExitCode::from(code)
}

/// Reads and parses one document. JSON syntax and I/O problems are exit 3,
/// schema problems exit 1.
fn load_document(path: &Path) -> Result<ModelDocument, u8> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        EXIT_IO
    })?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| {
        eprintln!("{}: malformed JSON: {e}", path.display());
        EXIT_IO
    })?;
    serde_json::from_value(value).map_err(|e| {
        eprintln!("{}: invalid model document: {e}", path.display());
        EXIT_VALIDATION
    })
}

fn load_documents(paths: &[PathBuf]) -> Result<Vec<(String, ModelDocument)>, u8> {
    let mut docs = Vec::new();
    for p in paths {
        docs.push((p.display().to_string(), load_document(p)?));
    }
    Ok(docs)
}

fn cmd_validate(files: &[PathBuf]) -> u8 {
    if files.is_empty() {
        eprintln!("no input files");
        return EXIT_VALIDATION;
    }
    let docs = match load_documents(files) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let mut problems = Vec::new();
    for (name, doc) in &docs {
        for p in doc.validate() {
            problems.push(format!("{name}: {p}"));
        }
    }
    problems.extend(check_mutual_consistency(&docs));
    if problems.is_empty() {
        println!(
            "ok: {} document(s) valid and mutually consistent",
            docs.len()
        );
        EXIT_OK
    } else {
        for p in &problems {
            println!("error: {p}");
        }
        EXIT_VALIDATION
    }
}

fn build_rule(args: &PoolArgs) -> Result<AggregationRule, String> {
    match args.rule {
        RuleArg::StrictMajority => Ok(AggregationRule::StrictMajority),
        RuleArg::Unanimity => Ok(AggregationRule::Unanimity),
        RuleArg::Quota => {
            let threshold = args
                .quota_threshold
                .ok_or("--rule quota requires --quota-threshold")?;
            Ok(AggregationRule::Quota { threshold })
        }
        RuleArg::WeightedMajority => {
            if args.weights.is_empty() {
                return Err("--rule weighted-majority requires --weights".into());
            }
            Ok(AggregationRule::WeightedMajority {
                weights: args.weights.clone(),
            })
        }
    }
}

fn cmd_pool(args: &PoolArgs) -> u8 {
    if args.files.is_empty() {
        eprintln!("no input files");
        return EXIT_VALIDATION;
    }
    let docs = match load_documents(&args.files) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let mut problems: Vec<String> = Vec::new();
    for (name, doc) in &docs {
        for p in doc.validate() {
            problems.push(format!("{name}: {p}"));
        }
    }
    problems.extend(check_mutual_consistency(&docs));
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("error: {p}");
        }
        return EXIT_VALIDATION;
    }
    let diagrams: Vec<_> = docs
        .iter()
        .map(|(_, d)| d.to_diagram().expect("validated above"))
        .collect();
    let endogenous = diagrams[0].endogenous_subdiagram().endogenous();
    let predictor = docs[0].1.predictor.clone();
    let partition =
        match FairnessPartition::new(&endogenous, predictor, args.protected.iter().cloned()) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_VALIDATION;
            }
        };
    let rule = match build_rule(args) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let tie_break = match args.tie_break {
        TieBreakArg::Alphabetical => TieBreak::Alphabetical,
        TieBreakArg::Random => TieBreak::SeededRandom { seed: args.seed },
    };
    let options = PoolingOptions::new(rule, tie_break);

    let report_value = match args.algorithm {
        AlgorithmArg::RemovalPooling => removal_pooling(&diagrams, &partition, &options)
            .map(|r| serde_json::to_value(&r).expect("report serialization")),
        AlgorithmArg::PoolingRemoval => pooling_removal(&diagrams, &partition, &options)
            .map(|r| serde_json::to_value(&r).expect("report serialization")),
        AlgorithmArg::Both => compare_algorithms(&diagrams, &partition, &options)
            .map(|r| serde_json::to_value(&r).expect("report serialization")),
    };
    let mut report_value = match report_value {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };

    if args.with_distributions {
        let models: Result<Vec<_>, _> = docs.iter().map(|(_, d)| d.to_scm(true)).collect();
        let pooled = models.and_then(|ms| {
            let w = match WeightVector::new(args.weights.clone()) {
                Ok(w) if w.len() == ms.len() => w,
                _ => WeightVector::uniform(ms.len())?,
            };
            pool_root_distributions(&ms, &w)
        });
        match pooled {
            Ok(dists) => {
                report_value.as_object_mut().unwrap().insert(
                    "pooled_root_distributions".into(),
                    serde_json::to_value(dists).unwrap(),
                );
            }
            Err(e) => {
                eprintln!("error: cannot pool distributions: {e}");
                return EXIT_VALIDATION;
            }
        }
    }

    if let Some(path) = &args.dot {
        let dot_text = match args.algorithm {
            AlgorithmArg::Both => None,
            _ => {
                let diagram: fairpool::CausalDiagram =
                    serde_json::from_value(report_value.get("pooled_diagram").unwrap().clone())
                        .expect("report diagram");
                let removed: BTreeSet<String> =
                    serde_json::from_value(report_value.get("removed_vertices").unwrap().clone())
                        .expect("report removed set");
                Some(dot::diagram_to_dot(
                    &diagram,
                    Some(&partition.predictor),
                    &partition.protected,
                    &removed,
                ))
            }
        };
        if let Some(text) = dot_text {
            if let Err(e) = fs::write(path, text) {
                eprintln!("{}: {e}", path.display());
                return EXIT_IO;
            }
        } else {
            eprintln!("error: --dot is not available with --algorithm both");
            return EXIT_VALIDATION;
        }
    }

    println!(
        "{}",
        serde_json::to_string_pretty(&report_value).expect("report serialization")
    );
    EXIT_OK
}

fn cmd_check_fair(args: &CheckFairArgs) -> u8 {
    let doc = match load_document(&args.file) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let problems = doc.validate();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("error: {p}");
        }
        return EXIT_VALIDATION;
    }
    let diagram = doc.to_diagram().expect("validated above");
    let partition = match FairnessPartition::new(
        &diagram.endogenous_subdiagram().endogenous(),
        doc.predictor.clone(),
        args.protected.iter().cloned(),
    ) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };

    if args.brute_force {
        let model = match doc.to_scm(true) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_VALIDATION;
            }
        };
        match check_fair_bruteforce(&model, &partition) {
            Ok(verdict) => {
                println!("{}", serde_json::to_string_pretty(&verdict).unwrap());
                if verdict.fair {
                    EXIT_OK
                } else {
                    EXIT_UNFAIR
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_VALIDATION
            }
        }
    } else {
        match check_fair_lemma1(&diagram.endogenous_subdiagram(), &partition) {
            Ok(result) => {
                println!("{}", serde_json::to_string_pretty(&result).unwrap());
                if result.holds {
                    EXIT_OK
                } else {
                    EXIT_UNFAIR
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_VALIDATION
            }
        }
    }
}

fn cmd_bench(args: &BenchArgs) -> u8 {
    let config = BenchConfig {
        experts: args.experts,
        vars: args.vars,
        edge_prob: args.edge_prob,
        trials: args.trials,
        seed: args.seed,
    };
    match bench::run(&config) {
        Ok(result) => {
            print!("{}", bench::to_csv(&result.rows));
            eprintln!(
                "empty-rate removal-pooling={:.4} pooling-removal={:.4}",
                result.empty_rate_removal_pooling, result.empty_rate_pooling_removal
            );
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_VALIDATION
        }
    }
}

fn cmd_export(args: &ExportArgs) -> u8 {
    let doc = match load_document(&args.file) {
        Ok(d) => d,
        Err(code) => return code,
    };
    let diagram = match doc.to_diagram() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_VALIDATION;
        }
    };
    let protected: BTreeSet<String> = args.protected.iter().cloned().collect();
    let text = dot::diagram_to_dot(&diagram, Some(&doc.predictor), &protected, &BTreeSet::new());
    match &args.output {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("{}: {e}", path.display());
                return EXIT_IO;
            }
            EXIT_OK
        }
        None => {
            print!("{text}");
            EXIT_OK
        }
    }
}
