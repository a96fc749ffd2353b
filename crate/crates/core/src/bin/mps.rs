use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mps_core::heuristic::{run_heuristic, HeuristicSolution};
use mps_core::instance::{generate_instance, paper_base_instance, parse_instance, Dimensions, GeneratorRanges};
use mps_core::milp::{solve_milp, MilpConfig, MilpOutcome, MilpStatus, NodeOrder};
use mps_core::oracle::{enumerate_exact, OracleLimits, OracleObjective};
use mps_core::report::{compare_models, render_replay, render_report, replay, ReportFormat};
use mps_core::schedule::{build_linear_model, parse_schedule, ModelLayout};
use mps_core::search::{multi_start, SearchConfig, SearchOutcome};
use mps_core::{Error, Instance, Result};

/// Master production scheduling with lot-quantized materials.
#[derive(Debug, Parser)]
#[command(name = "mps", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate an instance document.
    Gen(GenArgs),
    /// Solve an instance with one model.
    Solve(SolveArgs),
    /// Run all three models and compare them.
    Compare(CompareArgs),
    /// Exhaustively solve a tiny instance.
    Oracle(OracleArgs),
    /// Recompute totals and costs for a given schedule.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
struct InstanceSource {
    /// Instance JSON file.
    #[arg(long, conflicts_with = "base_case")]
    instance: Option<PathBuf>,
    /// Use the built-in six-product case with materials drawn from this seed.
    #[arg(long, value_name = "MATERIAL_SEED")]
    base_case: Option<u64>,
}

impl InstanceSource {
    fn load(&self) -> Result<Instance> {
        match (&self.instance, self.base_case) {
            (Some(path), _) => parse_instance(&fs::read_to_string(path)?),
            (None, Some(seed)) => Ok(paper_base_instance(seed)),
            (None, None) => Err(Error::Validation("pass --instance <file> or --base-case <seed>".into())),
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl OutputArgs {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    products: usize,
    #[arg(long, default_value_t = 27)]
    materials: usize,
    #[arg(long, default_value_t = 6)]
    periods: usize,
    /// Emit the six-product base case (materials from --seed) instead.
    #[arg(long)]
    base_case: bool,
    /// Capacity headroom over mean net demand.
    #[arg(long)]
    slack: Option<f64>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NodeOrderArg {
    BestBound,
    DepthFirst,
}

#[derive(Debug, Args)]
struct MilpArgs {
    /// Branch-and-bound node limit.
    #[arg(long, default_value_t = 100_000)]
    node_limit: usize,
    /// Relative optimality gap; 0 proves optimality.
    #[arg(long, default_value_t = 0.0)]
    gap: f64,
    #[arg(long, default_value_t = 1e-6)]
    int_tol: f64,
    #[arg(long, value_enum, default_value = "best-bound")]
    node_order: NodeOrderArg,
}

impl MilpArgs {
    fn config(&self) -> MilpConfig {
        MilpConfig {
            node_limit: self.node_limit,
            gap_tol: self.gap,
            int_tol: self.int_tol,
            node_order: match self.node_order {
                NodeOrderArg::BestBound => NodeOrder::BestBound,
                NodeOrderArg::DepthFirst => NodeOrder::DepthFirst,
            },
            ..MilpConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Master seed for multi-start search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    /// Objective evaluations per start.
    #[arg(long, default_value_t = 20_000)]
    budget: usize,
    /// Transfer sizes, comma separated, strictly decreasing.
    #[arg(long, value_delimiter = ',', default_value = "1000,100,10,1")]
    ladder: Vec<f64>,
    /// Do not start a search from the integer linear model's schedule.
    #[arg(long)]
    no_milp_start: bool,
    /// Worker threads for independent starts (0 = all cores).
    #[arg(long, env = "MPS_THREADS", default_value_t = 0)]
    threads: usize,
    /// Print the per-start value trace to stderr.
    #[arg(long)]
    trace: bool,
}

impl SearchArgs {
    fn config(&self, integer_mode: bool) -> SearchConfig {
        SearchConfig {
            starts: self.starts,
            seed: self.seed,
            budget: self.budget,
            integer_mode,
            ladder: self.ladder.clone(),
            include_milp_start: !self.no_milp_start,
            threads: self.threads,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModelArg {
    /// Integer linear model only.
    Milp,
    /// Integer linear model followed by lot rounding.
    Heuristic,
    /// Multi-start search, integer mode.
    NlpInt,
    /// Multi-start search, relaxed mode.
    NlpRelaxed,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[arg(long, value_enum)]
    model: ModelArg,
    #[command(flatten)]
    milp: MilpArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[command(flatten)]
    milp: MilpArgs,
    #[command(flatten)]
    search: SearchArgs,
    /// table-text, csv or structured.
    #[arg(long, default_value = "table-text")]
    format: String,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ObjectiveArg {
    Linear,
    True,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    source: InstanceSource,
    #[arg(long, value_enum, default_value = "true")]
    objective: ObjectiveArg,
    /// Refuse to enumerate more schedules than this.
    #[arg(long, default_value_t = 1_000_000)]
    limit: u64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    #[command(flatten)]
    source: InstanceSource,
    /// Schedule JSON file.
    #[arg(long)]
    schedule: PathBuf,
    /// table-text, csv or structured.
    #[arg(long, default_value = "table-text")]
    format: String,
    #[command(flatten)]
    out: OutputArgs,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct MilpReport {
    outcome: MilpOutcome,
    schedule: Option<mps_core::ProductionSchedule>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum SolveReport {
    Milp(MilpReport),
    Heuristic(HeuristicSolution),
    Search(SearchOutcome),
}

fn run_gen(args: &GenArgs) -> Result<()> {
    let inst = if args.base_case {
        paper_base_instance(args.seed)
    } else {
        let mut ranges = GeneratorRanges::default();
        if let Some(s) = args.slack {
            ranges.slack_factor = s;
        }
        generate_instance(args.seed, Dimensions::new(args.products, args.materials, args.periods), &ranges)?
    };
    args.out.emit(&inst.to_json())
}

fn run_solve(args: &SolveArgs) -> Result<()> {
    let inst = args.source.load()?;
    let report = match args.model {
        ModelArg::Milp => {
            let outcome = solve_milp(&build_linear_model(&inst, true), &args.milp.config())?;
            if outcome.status == MilpStatus::Infeasible {
                return Err(Error::Infeasible("the integer linear model has no solution".into()));
            }
            let schedule = outcome.values.as_ref().map(|v| ModelLayout::of(&inst).schedule(v, true));
            let limit_hit = outcome.status == MilpStatus::NodeLimit;
            args.out.emit(&json(&SolveReport::Milp(MilpReport { outcome, schedule })))?;
            if limit_hit {
                return Err(Error::NodeLimit {
                    limit: args.milp.node_limit,
                });
            }
            return Ok(());
        }
        ModelArg::Heuristic => SolveReport::Heuristic(run_heuristic(&inst, &args.milp.config())?),
        ModelArg::NlpInt | ModelArg::NlpRelaxed => {
            let cfg = args.search.config(matches!(args.model, ModelArg::NlpInt));
            let outcome = multi_start(&inst, &cfg)?;
            if args.search.trace {
                eprint!("{}", outcome.trace());
            }
            SolveReport::Search(outcome)
        }
    };
    args.out.emit(&json(&report))
}

fn run_compare(args: &CompareArgs) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let inst = args.source.load()?;
    let report = compare_models(&inst, &args.milp.config(), &args.search.config(true))?;
    args.out.emit(&render_report(&report, format))
}

fn run_oracle(args: &OracleArgs) -> Result<()> {
    let inst = args.source.load()?;
    let limits = OracleLimits {
        max_schedules: args.limit,
        objective: match args.objective {
            ObjectiveArg::Linear => OracleObjective::Linear,
            ObjectiveArg::True => OracleObjective::True,
        },
    };
    let out = enumerate_exact(&inst, &limits)?;
    args.out.emit(&json(&out))
}

fn run_replay(args: &ReplayArgs) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let inst = args.source.load()?;
    let doc = parse_schedule(&fs::read_to_string(&args.schedule)?)?;
    let note = doc.note.clone();
    let sched = doc.into();
    let report = replay(&inst, &sched, note)?;
    args.out.emit(&render_replay(&report, format))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Solve(a) => run_solve(a),
        Command::Compare(a) => run_compare(a),
        Command::Oracle(a) => run_oracle(a),
        Command::Replay(a) => run_replay(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

