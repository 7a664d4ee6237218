//! `uniclass`: generate bipartite unitaries, classify them, decompose them
//! and run batch studies. JSON goes to stdout, human-readable notes to stderr.
//!
//! Exit codes: 0 success, 1 internal failure or a study with violations,
//! 2 usage or parse error, 3 invalid operator, 4 no block decomposition.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use uniclass_core::blocksvd::{canonicalize, compute_block_svd, has_block_svd};
use uniclass_core::classify::{ClassifyOptions, CLASS_NAMES, DEFAULT_BUDGET};
use uniclass_core::json::{from_json, to_json};
use uniclass_core::study::{run_study, Generator, StudySpec};
use uniclass_core::tangent::{enveloping_report, mblockdiag_report, variety_dim_formulas};
use uniclass_core::{classify_all_with, BipartiteOperator, Error, Tolerances};

#[derive(Parser, Debug)]
#[command(name = "uniclass", version, about = "Classify bipartite unitaries by the channels they induce")]
struct Cli {
    /// Entrywise comparison tolerance.
    #[arg(long, global = true, default_value_t = Tolerances::default().eq_tol)]
    eq_tol: f64,
    /// Eigenvalue clustering tolerance.
    #[arg(long, global = true, default_value_t = Tolerances::default().spec_tol)]
    spec_tol: f64,
    /// Search budget for the mixed-unitary test.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "UNICLASS_SEED")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw an operator from a named generator.
    Generate(GenerateArgs),
    /// Run every membership test and print the class report.
    Classify {
        /// Operator JSON file, or `-` for stdin.
        input: PathBuf,
    },
    /// Block-diagonal SVD, or the commutator that rules it out.
    Blocksvd {
        input: PathBuf,
        #[arg(long, value_enum, ignore_case = true, default_value_t = SideArg::A)]
        side: SideArg,
    },
    /// Tangent and variety dimensions.
    Dimension {
        #[command(subcommand)]
        mode: DimensionMode,
    },
    /// Batch study over shapes and generators.
    Study {
        /// Study spec JSON.
        spec: PathBuf,
        /// Also write the per-cell table as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct GenerateArgs {
    /// haar, product, block_diag_A, block_diag_B, const, circulant,
    /// both_block, eb_example, b_not_a or counterexample.
    generator: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Number of distinct blocks (block_diag_A, block_diag_B).
    #[arg(long)]
    p: Option<usize>,
    /// Environment multiplicity, `k = n·r` (const).
    #[arg(long)]
    r: Option<usize>,
    /// Fixture name (counterexample).
    #[arg(long)]
    name: Option<String>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum DimensionMode {
    /// Enveloping tangent dimension at a block-diagonal operator.
    Enveloping { input: PathBuf },
    /// Closed-form variety dimensions.
    Formulas {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
    /// Numeric dimension of the block-diagonal matrix variety.
    Mblockdiag {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "UPPER")]
enum SideArg {
    A,
    B,
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) | Error::InvalidParameter(_) | Error::Dimension(_) => 2,
            Error::NotUnitary(_) | Error::NotUnitalMember(_) => 3,
            Error::NotBlockDiagonal(_) => 4,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type CmdResult = std::result::Result<u8, Failure>;

fn read_input(path: &Path) -> std::result::Result<String, Failure> {
    if path == Path::new("-") {
        std::io::read_to_string(std::io::stdin()).map_err(|e| usage(format!("stdin: {e}")))
    } else {
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
    }
}

fn read_operator(path: &Path) -> std::result::Result<BipartiteOperator, Failure> {
    Ok(from_json(&read_input(path)?)?)
}

fn generate(args: &GenerateArgs, seed: u64) -> CmdResult {
    let mut params = BTreeMap::new();
    if let Some(p) = args.p {
        params.insert("p".to_string(), json!(p));
    }
    if let Some(r) = args.r {
        params.insert("r".to_string(), json!(r));
    }
    if let Some(name) = &args.name {
        params.insert("name".to_string(), json!(name));
    }
    let gen = Generator::parse(&args.generator, &params)?;
    let (n, k) = match (gen.fixed_shape(), args.n, args.k) {
        (Some(shape), None, None) => shape,
        (Some(shape), n, k) if n.unwrap_or(shape.0) == shape.0 && k.unwrap_or(shape.1) == shape.1 => shape,
        (Some(shape), _, _) => return Err(usage(format!("fixture has fixed shape {shape:?}"))),
        (None, Some(n), Some(k)) => (n, k),
        (None, Some(n), None) => match gen {
            Generator::Const { r } => (n, n * r.unwrap_or(1)),
            Generator::EbExample => (n, n),
            _ => return Err(usage("--k is required")),
        },
        (None, None, _) => return Err(usage("--n is required")),
    };
    if n == 0 || k == 0 {
        return Err(usage("dimensions must be positive"));
    }
    let u = gen.generate(n, k, seed)?;
    let text = to_json(&u);
    match &args.out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?,
        None => println!("{text}"),
    }
    let label = gen.params_label();
    eprintln!(
        "generated {}{} at (n, k) = ({n}, {k}), seed {seed}",
        gen.name(),
        if label.is_empty() { String::new() } else { format!(" [{label}]") }
    );
    Ok(0)
}

fn classify(input: &Path, tol: &Tolerances, opts: &ClassifyOptions) -> CmdResult {
    let u = read_operator(input)?;
    let report = classify_all_with(&u, tol, opts)?;
    println!("{}", to_json(&report));
    eprintln!("classes at (n, k) = ({}, {}):", report.n, report.k);
    for name in CLASS_NAMES {
        if let Some(v) = report.get(name) {
            let flag = if v.heuristic { " (heuristic)" } else { "" };
            eprintln!("  {name:<16} {}{flag}", v.value.as_str());
        }
    }
    Ok(0)
}

fn blocksvd(input: &Path, side: SideArg, tol: &Tolerances) -> CmdResult {
    let u = read_operator(input)?;
    let x = match side {
        SideArg::A => u,
        SideArg::B => u.swap_factors(),
    };
    let side = format!("{side:?}");
    let check = has_block_svd(&x, tol);
    if let Some(w) = check.witness.filter(|_| !check.holds) {
        println!(
            "{}",
            to_json(&json!({
                "side": side,
                "holds": false,
                "family": w.family.as_str(),
                "first": w.first,
                "second": w.second,
                "norm": w.norm,
                "description": w.describe(x.n()),
                "violations": check
                    .violations
                    .iter()
                    .map(|v| json!({
                        "family": v.family.as_str(),
                        "first": v.first,
                        "second": v.second,
                        "norm": v.norm,
                    }))
                    .collect::<Vec<_>>(),
            }))
        );
        eprintln!("no block-diagonal SVD on side {side}: {}", w.describe(x.n()));
        return Ok(4);
    }
    let d = canonicalize(&compute_block_svd(&x, tol)?);
    println!("{}", to_json(&d));
    eprintln!("block-diagonal SVD on side {side} with {} term(s)", d.len());
    Ok(0)
}

fn dimension(mode: &DimensionMode, tol: &Tolerances, seed: u64) -> CmdResult {
    let value = match mode {
        DimensionMode::Enveloping { input } => {
            let r = enveloping_report(&read_operator(input)?, tol)?;
            eprintln!("enveloping dimension: analytic {}, numeric {}", r.analytic, r.numeric);
            serde_json::to_value(r).expect("report serializes")
        }
        DimensionMode::Formulas { n, k } => {
            let f = variety_dim_formulas(*n, *k)?;
            for (name, v) in &f {
                let flag = if v.conjecture { " (conjecture)" } else { "" };
                eprintln!("  {name:<26} {}{flag}", v.value);
            }
            json!({ "n": n, "k": k, "formulas": f })
        }
        DimensionMode::Mblockdiag { n, k } => {
            let r = mblockdiag_report(*n, *k, seed, tol)?;
            eprintln!("block-diagonal matrix variety: formula {}, numeric {}", r.analytic, r.numeric);
            serde_json::to_value(r).expect("report serializes")
        }
    };
    println!("{}", to_json(&value));
    Ok(0)
}

fn study(spec_path: &Path, csv: Option<&Path>, tol: &Tolerances, opts: &ClassifyOptions, seed: Option<u64>) -> CmdResult {
    let mut spec: StudySpec = from_json(&read_input(spec_path)?)?;
    spec.seed = spec.seed.or(seed);
    let summary = run_study(&spec, tol, opts)?;
    if let Some(path) = csv {
        std::fs::write(path, summary.to_csv())
            .map_err(|e| Failure { code: 1, message: format!("{}: {e}", path.display()) })?;
    }
    println!("{}", to_json(&summary));
    eprintln!(
        "{} cells, {} samples: {} inclusion violations, {} inconsistencies, {} label failures, {} errors, {} obstructed cells",
        summary.cells,
        summary.samples,
        summary.inclusion_violations,
        summary.inconsistencies,
        summary.label_failures,
        summary.errors,
        summary.obstructions
    );
    for row in summary.rows.iter().filter(|r| !r.examples.is_empty()) {
        eprintln!("  cell {} ({}, {}) {}: {}", row.cell, row.n, row.k, row.generator, row.examples.join("; "));
    }
    Ok(if summary.is_clean() { 0 } else { 1 })
}

fn run(cli: &Cli) -> CmdResult {
    let tol = Tolerances::new(cli.eq_tol, cli.spec_tol, Tolerances::default().rank_tol_factor)?;
    let mut opts = ClassifyOptions { budget: cli.budget, ..ClassifyOptions::default() };
    if let Some(s) = cli.seed {
        opts.seed = s;
    }
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Generate(args) => generate(args, seed),
        Command::Classify { input } => classify(input, &tol, &opts),
        Command::Blocksvd { input, side } => blocksvd(input, *side, &tol),
        Command::Dimension { mode } => dimension(mode, &tol, seed),
        Command::Study { spec, csv } => study(spec, csv.as_deref(), &tol, &opts, cli.seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
