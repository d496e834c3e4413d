use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dmdst_core::bench::{run_case, runs_at, BenchRow, Family};
use dmdst_core::config::DEFAULT_EPSILON;
use dmdst_core::{
    read_graph, serialize_graph, solve, verify_report, Algorithm, Config, Digraph, Profile, SolveReport,
};

/// Exit status for unreadable or invalid input.
const EXIT_INPUT: u8 = 2;
/// Exit status for solver defects, including rejected certificates.
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "dmdst", version, about = "Minimum-degree spanning in-trees of directed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated instance in the graph file format.
    Generate(GenerateArgs),
    /// Solve an instance and print the JSON report.
    Solve(SolveArgs),
    /// Check a report against its graph; exit 1 on the first violation.
    Verify(VerifyArgs),
    /// Run a matrix of instances and algorithms.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_family)]
    family: Family,
    /// Vertex count (ignored by `blocker`).
    #[arg(long, default_value_t = 10)]
    n: usize,
    /// Generator seed; DMDST_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra edges for `random` (default 2n, capped).
    #[arg(long)]
    extra: Option<usize>,
    /// Hub degree for `blocker`.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Door and leaf fan-out for `blocker`.
    #[arg(long, default_value_t = 2)]
    fanout: usize,
    /// Output file (stdout if absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    #[arg(long, default_value = "local", value_parser = parse_algorithm)]
    algo: Algorithm,
    #[arg(long, default_value = "practical", value_parser = parse_profile)]
    profile: Profile,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Recorded in the config echo; DMDST_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Include potential and layer traces.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct VerifyArgs {
    graph: PathBuf,
    report: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated families.
    #[arg(long, value_delimiter = ',', value_parser = parse_family, default_value = "random")]
    family: Vec<Family>,
    /// Comma-separated vertex counts.
    #[arg(long, value_delimiter = ',', default_value = "10,50")]
    sizes: Vec<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Comma-separated algorithms.
    #[arg(long, value_delimiter = ',', value_parser = parse_algorithm, default_value = "local,augment")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value = "practical", value_parser = parse_profile)]
    profile: Profile,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Also write the rows as JSON to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse()
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_profile(s: &str) -> Result<Profile, String> {
    s.parse()
}

/// An error with the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn input(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INPUT,
            error: error.into(),
        }
    }

    fn internal(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: EXIT_INTERNAL,
            error: error.into(),
        }
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn env_seed(seed: u64) -> Result<u64, Failure> {
    match std::env::var("DMDST_SEED") {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Failure::input(anyhow::anyhow!("DMDST_SEED is not an integer: `{s}`"))),
        Err(_) => Ok(seed),
    }
}

fn load_graph(path: &Path) -> Result<Digraph, Failure> {
    let file = File::open(path)
        .with_context(|| format!("cannot open {}", path.display()))
        .map_err(Failure::input)?;
    read_graph(file)
        .with_context(|| format!("invalid graph {}", path.display()))
        .map_err(Failure::input)
}

fn resolve_config(n: usize, profile: Profile, epsilon: f64, seed: u64) -> Result<Config, Failure> {
    Config::new(n, profile, epsilon)
        .map(|c| c.with_seed(seed))
        .map_err(Failure::input)
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Failure::input),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("cannot write to stdout")
            .map_err(Failure::internal),
    }
}

fn cmd_generate(args: GenerateArgs) -> CmdResult {
    let seed = env_seed(args.seed)?;
    let g = match args.family {
        Family::Random => {
            let cap = args.n.saturating_sub(1).pow(2);
            let extra = args.extra.unwrap_or((2 * args.n).min(cap));
            dmdst_core::gen_random(args.n, extra, seed).map_err(Failure::input)?
        }
        Family::Blocker => dmdst_core::gen_blocker(args.k, args.fanout, seed).map_err(Failure::input)?,
        _ if args.n == 0 => return Err(Failure::input(anyhow::anyhow!("--n must be at least 1"))),
        family => family.instance(args.n, seed).map_err(Failure::input)?,
    };
    write_output(args.out.as_deref(), &serialize_graph(&g))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_solve(args: SolveArgs) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let cfg = resolve_config(g.n(), args.profile, args.epsilon, env_seed(args.seed)?)?;
    let report = solve(&g, args.algo, &cfg, args.trace).map_err(|e| {
        if e.is_input_error() {
            Failure::input(e)
        } else {
            Failure::internal(e)
        }
    })?;
    let mut text = serde_json::to_string_pretty(&report).map_err(Failure::internal)?;
    text.push('\n');
    write_output(None, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> CmdResult {
    let g = load_graph(&args.graph)?;
    let text = std::fs::read_to_string(&args.report)
        .with_context(|| format!("cannot read {}", args.report.display()))
        .map_err(Failure::input)?;
    let report: SolveReport = serde_json::from_str(&text)
        .with_context(|| format!("invalid report {}", args.report.display()))
        .map_err(Failure::input)?;
    match verify_report(&g, &report) {
        Ok(()) => {
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Err(v) => {
            eprintln!("{v}");
            Ok(ExitCode::from(1))
        }
    }
}

fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<9} {:>6} {:>7} {:>6} {:<8} {:>5} {:>5} {:>9} {:>6} {:>6} {:>7} {:>8}\n",
        "family", "n", "m", "seed", "algo", "d0", "delta", "bound", "opt", "gap", "iters", "ms"
    );
    for r in rows {
        let bound = r.lower_bound.map_or("-".to_string(), |b| b.to_string());
        let opt = r.oracle.map_or("-".to_string(), |o| o.to_string());
        out.push_str(&format!(
            "{:<9} {:>6} {:>7} {:>6} {:<8} {:>5} {:>5} {:>9} {:>6} {:>6.3} {:>7} {:>8}\n",
            r.family.name(),
            r.n,
            r.m,
            r.seed,
            r.algorithm.name(),
            r.delta_initial,
            r.delta_final,
            bound,
            opt,
            r.gap,
            r.iterations,
            r.wall_time_ms
        ));
    }
    out
}

fn cmd_bench(args: BenchArgs) -> CmdResult {
    let invalid = |msg: &str| Failure::input(anyhow::anyhow!("invalid bench matrix: {msg}"));
    if args.family.is_empty() || args.sizes.is_empty() || args.seeds.is_empty() || args.algos.is_empty() {
        return Err(invalid("every dimension needs at least one value"));
    }
    if args.sizes.contains(&0) {
        return Err(invalid("sizes must be positive"));
    }
    let seed_offset = std::env::var("DMDST_SEED").ok().map(|_| env_seed(0)).transpose()?;
    // validates epsilon once, before any work starts
    resolve_config(2, args.profile, args.epsilon, 0)?;
    let mut cases = Vec::new();
    for &family in &args.family {
        for &n in &args.sizes {
            for &seed in &args.seeds {
                for &algo in &args.algos {
                    if runs_at(algo, n) {
                        cases.push((family, n, seed_offset.map_or(seed, |s| s.wrapping_add(seed)), algo));
                    }
                }
            }
        }
    }
    if cases.is_empty() {
        return Err(invalid("no runnable rows (exact needs n <= 12)"));
    }
    let (profile, epsilon) = (args.profile, args.epsilon);
    let rows: Vec<BenchRow> = cases
        .par_iter()
        .map(|&(family, n, seed, algo)| {
            run_case(family, n, seed, algo, |n| {
                Config::new(n, profile, epsilon).expect("epsilon validated above")
            })
            .map_err(|e| match e {
                dmdst_core::bench::BenchError::Generate(e) => Failure::input(e),
                dmdst_core::bench::BenchError::Solve(e) if e.is_input_error() => Failure::input(e),
                dmdst_core::bench::BenchError::Solve(e) => Failure::internal(e),
            })
        })
        .collect::<Result<_, _>>()?;
    write_output(None, &format_table(&rows))?;
    if let Some(path) = &args.json {
        let mut text = serde_json::to_string_pretty(&rows).map_err(Failure::internal)?;
        text.push('\n');
        write_output(Some(path), &text)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            log::debug!("exiting with status {}", f.code);
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
