use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use bnsl::grover_sim::QueryLedger;
use bnsl::harness::{self, Suite};
use bnsl::po_dp::MAX_SCAN_MEMBERS;
use bnsl::{
    bic_scores, brute_force_dags, brute_force_orders, cover_size, downsets_per_member,
    prune_dominated, read_scores, solve_cover, solve_dp, write_scores, BicOptions, BlockPartition,
    CostReport, CoverStrategy, Dag, DiscreteDataset, Error, ScoreTable, SeedTree,
};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;

mod output;

#[derive(Parser)]
#[command(
    name = "bnsl",
    version,
    about = "Exact Bayesian network structure learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute BIC local scores from a CSV of discrete data.
    Score {
        data: PathBuf,
        #[arg(long, default_value_t = 2)]
        max_indegree: usize,
        /// Drop parent sets dominated by a subset with at least the same score.
        #[arg(long)]
        prune: bool,
        /// Score file to write; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find a highest-scoring DAG.
    Solve {
        scores: PathBuf,
        #[arg(long, value_enum, default_value_t = Algo::Dp)]
        algo: Algo,
        /// Block size of the cover; chosen automatically if absent.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Assign nodes to blocks by a seeded shuffle instead of index order.
        #[arg(long)]
        shuffle_blocks: bool,
        /// Edge list to write; standard output if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// DOT file; defaults to the edge list path with a `.dot` extension.
        #[arg(long)]
        dot: Option<PathBuf>,
        /// How `cover-grover` maximizes over cover members.
        #[arg(long, value_enum, default_value_t = GroverMode::Sim)]
        grover_mode: GroverMode,
        /// Key-value report of the run.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Cover size, downset counts and cost figures for `n` nodes.
    CoverStats {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Number of local scores `F` used by the bounds.
        #[arg(long, default_value_t = 0)]
        f: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run an acceptance suite.
    Bench {
        #[arg(long, value_enum)]
        suite: BenchSuite,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Dp,
    Cover,
    CoverGrover,
    BruteOrders,
    BruteDags,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GroverMode {
    Sim,
    CostModel,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Kv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BenchSuite {
    Oracle,
    Grover,
    Scaling,
}

/// Criteria that did not hold.
#[derive(Debug)]
struct SuiteFailed(Vec<String>);

impl fmt::Display for SuiteFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "failed: {}", self.0.join("; "))
    }
}

impl std::error::Error for SuiteFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<SuiteFailed>().is_some() {
        return 1;
    }
    match err.downcast_ref::<Error>() {
        Some(
            Error::InstanceTooLarge { .. }
            | Error::InvalidK { .. }
            | Error::StrategyUnavailable(_)
            | Error::DomainTooLarge { .. }
            | Error::TooManyEntries { .. },
        ) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Score {
            data,
            max_indegree,
            prune,
            out,
        } => cmd_score(&data, max_indegree, prune, out.as_deref()),
        Command::Solve {
            scores,
            algo,
            k,
            seed,
            shuffle_blocks,
            out,
            dot,
            grover_mode,
            report,
        } => {
            let opts = SolveOpts {
                algo,
                k,
                seed,
                shuffle_blocks,
                grover_mode,
            };
            cmd_solve(
                &scores,
                &opts,
                out.as_deref(),
                dot.as_deref(),
                report.as_deref(),
            )
        }
        Command::CoverStats {
            n,
            k,
            f,
            format,
            report,
        } => cmd_cover_stats(n, k, f, format, report.as_deref()),
        Command::Bench {
            suite,
            seed,
            format,
            report,
        } => cmd_bench(suite, seed, format, report.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_score(
    data: &Path,
    max_indegree: usize,
    prune: bool,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let file = fs::File::open(data).with_context(|| format!("opening {}", data.display()))?;
    let dataset = DiscreteDataset::from_csv(io::BufReader::new(file))?;
    let opts = BicOptions {
        max_indegree,
        ..Default::default()
    };
    let mut table: ScoreTable = bic_scores(&dataset, &opts)?;
    if prune {
        table = prune_dominated(&table);
    }
    let text = write_scores(&table, dataset.names())?;
    match out {
        Some(path) => write_text(path, &text)?,
        None => print!("{text}"),
    }
    // Keep standard output clean for the score file itself.
    let log = |line: String| {
        if out.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    };
    log(format!("F = {}", table.total_entries()));
    for (i, name) in dataset.names().iter().enumerate() {
        log(format!("|C_{name}| = {}", table.entries(i).len()));
    }
    Ok(())
}

/// Even block size minimizing the outer work of the cover search within the
/// strategy's caps: `D * |P|` for a scan, `D * sqrt|P|` for quantum search.
fn auto_k(n: usize, quantum: bool, member_cap: usize) -> anyhow::Result<usize> {
    let mut best: Option<(f64, usize)> = None;
    for k in (2..=n).step_by(2) {
        let m = cover_size(n, k)?.to_f64().unwrap_or(f64::INFINITY);
        let d = downsets_per_member(n, k)?.to_f64().unwrap_or(f64::INFINITY);
        if m > member_cap as f64 || d > bnsl::po_dp::MAX_DOWNSETS as f64 {
            continue;
        }
        let work = if quantum { d * m.sqrt() } else { d * m };
        if best.is_none_or(|(w, _)| work < w) {
            best = Some((work, k));
        }
    }
    match best {
        Some((_, k)) => Ok(k),
        None if n < 2 => Err(Error::InvalidK { n, k: 2 }.into()),
        None => Err(Error::InstanceTooLarge {
            what: "cover for every block size",
            value: format!("n = {n}"),
            cap: format!("{member_cap} members"),
        }
        .into()),
    }
}

struct SolveOpts {
    algo: Algo,
    k: Option<usize>,
    seed: u64,
    shuffle_blocks: bool,
    grover_mode: GroverMode,
}

fn cmd_solve(
    scores: &Path,
    opts: &SolveOpts,
    out: Option<&Path>,
    dot: Option<&Path>,
    report: Option<&Path>,
) -> anyhow::Result<()> {
    let SolveOpts {
        algo,
        k,
        seed,
        shuffle_blocks,
        grover_mode,
    } = *opts;
    let file = fs::File::open(scores).with_context(|| format!("opening {}", scores.display()))?;
    let (table, names): (ScoreTable, Vec<String>) = read_scores(io::BufReader::new(file))?;
    let n = table.n();
    let seeds = SeedTree::new(seed);
    let mut kv = vec![
        ("algo".to_string(), algo_name(algo).to_string()),
        ("n".into(), n.to_string()),
    ];

    let (score, dag, ledger): (f64, Dag, Option<QueryLedger>) = match algo {
        Algo::Dp => {
            let s = solve_dp(&table)?;
            (s.score, s.dag, None)
        }
        Algo::BruteOrders => {
            let s = brute_force_orders(&table)?;
            kv.push(("candidates".into(), s.candidates.to_string()));
            (s.score, s.dag, None)
        }
        Algo::BruteDags => {
            let s = brute_force_dags(&table)?;
            kv.push(("candidates".into(), s.candidates.to_string()));
            (s.score, s.dag, None)
        }
        Algo::Cover | Algo::CoverGrover => {
            let strategy = match (algo, grover_mode) {
                (Algo::Cover, _) => CoverStrategy::ClassicalScan,
                (_, GroverMode::Sim) => CoverStrategy::GroverSim,
                (_, GroverMode::CostModel) => CoverStrategy::GroverCostModel,
            };
            let cap = match strategy {
                CoverStrategy::GroverSim => bnsl::grover_sim::SIM_MAX_DOMAIN,
                _ => MAX_SCAN_MEMBERS,
            };
            let k = match k {
                Some(k) => k,
                None => auto_k(n, strategy != CoverStrategy::ClassicalScan, cap)?,
            };
            let partition = if shuffle_blocks {
                BlockPartition::shuffled(n, k, &mut seeds.child("partition").rng())?
            } else {
                BlockPartition::canonical(n, k)?
            };
            let mut rng = seeds.child("cover-search").rng();
            let s = solve_cover(&table, &partition, strategy, &mut rng)?;
            kv.push(("k".into(), k.to_string()));
            kv.push(("cover_size".into(), partition.cover_size().to_string()));
            kv.push(("member_index".into(), s.member_index.to_string()));
            (s.score, s.dag, Some(s.ledger))
        }
    };

    if !dag.is_acyclic() {
        bail!(SuiteFailed(vec!["solver returned a cyclic graph".into()]));
    }
    let rescored = table.total_score(&dag)?;
    if (rescored - score).abs() > harness::TOLERANCE {
        bail!(SuiteFailed(vec![format!(
            "reported score {score} but the DAG scores {rescored}"
        )]));
    }

    println!("score = {score:.9}");
    println!("arcs = {}", dag.arc_count());
    let edges = output::edge_list(&dag, &names);
    match out {
        Some(path) => {
            write_text(path, &edges)?;
            let dot_path = dot
                .map(Path::to_path_buf)
                .unwrap_or_else(|| path.with_extension("dot"));
            write_text(&dot_path, &output::dot(&dag, &names))?;
        }
        None => {
            print!("{edges}");
            if let Some(path) = dot {
                write_text(path, &output::dot(&dag, &names))?;
            }
        }
    }
    if let Some(ledger) = &ledger {
        println!("classical_evals = {}", ledger.classical_evals);
        println!(
            "charged_quantum_queries = {}",
            ledger.charged_quantum_queries
        );
        if ledger.oracle_applications > 0 {
            println!("oracle_applications = {}", ledger.oracle_applications);
        }
    }
    if let Some(path) = report {
        kv.push(("score".into(), format!("{score:.9}")));
        kv.push(("arcs".into(), dag.arc_count().to_string()));
        let mut text: String = kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
        if let Some(ledger) = &ledger {
            text.push_str(&ledger.to_kv());
        }
        write_text(path, &text)?;
    }
    Ok(())
}

fn algo_name(algo: Algo) -> &'static str {
    match algo {
        Algo::Dp => "dp",
        Algo::Cover => "cover",
        Algo::CoverGrover => "cover-grover",
        Algo::BruteOrders => "brute-orders",
        Algo::BruteDags => "brute-dags",
    }
}

fn cmd_cover_stats(
    n: usize,
    k: usize,
    f: u64,
    format: Format,
    report: Option<&Path>,
) -> anyhow::Result<()> {
    let cost = CostReport::new(n, f, k)?;
    match format {
        Format::Text => print!("{cost}"),
        Format::Kv => print!("{}", cost.to_kv()),
    }
    if let Some(path) = report {
        write_text(path, &cost.to_kv())?;
    }
    Ok(())
}

fn cmd_bench(
    suite: BenchSuite,
    seed: u64,
    format: Format,
    report: Option<&Path>,
) -> anyhow::Result<()> {
    let suite = match suite {
        BenchSuite::Oracle => Suite::Oracle,
        BenchSuite::Grover => Suite::Grover,
        BenchSuite::Scaling => Suite::Scaling,
    };
    let reports = harness::run_suite(suite, seed);
    let mut kv = format!("seed = {seed}\n");
    for r in &reports {
        match format {
            Format::Text => print!("{r}"),
            Format::Kv => print!("{}", r.to_kv()),
        }
        kv.push_str(&r.to_kv());
    }
    if suite == Suite::Scaling {
        let table = output::scaling_table(&[8, 12, 16, 20, 24, 32, 48], 4)?;
        if format == Format::Text {
            print!("{table}");
        }
    }
    if let Some(path) = report {
        write_text(path, &kv)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.summary())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(SuiteFailed(failed).into())
    }
}
