use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lnat::extension::write_grid;
use lnat::harness::{
    instance_from_name, run_experiment, run_replication, verify_structure, write_csv, ExperimentConfig, InstanceSpec,
    StructureSource,
};
use lnat::oracles::make_instance;
use lnat::solvers::ConstantsProfile;

#[derive(Parser)]
#[command(name = "lnat", version, about = "Noisy L-natural convex minimization over integer boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single replication and print its report.
    Solve(RunArgs),
    /// Run replicated solves and write one CSV row per replication.
    Experiment(RunArgs),
    /// Check L-natural convexity and print structural constants; exit 0 iff convex.
    Check(CheckArgs),
    /// Export a generated instance as a grid table.
    Gen(GenArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    profile: Option<ConstantsProfile>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    reps: Option<u64>,
    /// Prefix the CSV with a generation-time comment line.
    #[arg(long)]
    timestamp: bool,
}

#[derive(Args)]
struct InstanceArgs {
    /// separable, pairwise, spurious_local, diagonal_trap, hard_family or crn.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 3)]
    n: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Member index for hard_family.
    #[arg(long, default_value_t = 0)]
    index: usize,
    /// Scale for hard_family.
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Scenario spread for crn.
    #[arg(long, default_value_t = 1)]
    spread: i64,
}

impl InstanceArgs {
    fn spec(&self) -> lnat::Result<Option<InstanceSpec>> {
        let Some(name) = &self.instance else { return Ok(None) };
        let kind = instance_from_name(name, self.index, self.epsilon, self.spread)?;
        Ok(Some(InstanceSpec { kind, d: self.d, n: self.n, seed: self.seed }))
    }
}

#[derive(Args)]
struct CheckArgs {
    /// Grid table file (`d N` header, then `x_1 .. x_d value` lines).
    #[arg(long, conflicts_with = "instance")]
    grid: Option<PathBuf>,
    #[command(flatten)]
    inst: InstanceArgs,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(args: &RunArgs) -> lnat::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(p) = args.profile {
        cfg.algorithm.profile = p;
    }
    if let Some(r) = args.reps {
        cfg.replications = r;
    }
    if let Some(o) = &args.out {
        cfg.output = Some(o.clone());
    }
    cfg.timestamp |= args.timestamp;
    cfg.validate()?;
    Ok(cfg)
}

fn output(path: Option<&PathBuf>) -> lnat::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cli: Cli) -> lnat::Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => {
            let cfg = load(&args)?;
            let (row, report) = run_replication(&cfg, 0)?;
            println!("solution: {}", row.solution);
            println!("f: {} (optimum {})", row.f_value, row.optimum_value);
            println!("good: {}", row.good);
            println!("cost: {}", row.cost);
            println!("iterations: {}", report.iterations);
            println!("params: {}", serde_json::to_string(&report.params).expect("serializable"));
            for e in &report.epoch_log {
                println!(
                    "epoch {}: eps={} iterations={} cost={} point={:?}",
                    e.epoch, e.epsilon, e.iterations, e.cost, e.point.0
                );
            }
        }
        Command::Experiment(args) => {
            let cfg = load(&args)?;
            let summary = run_experiment(&cfg)?;
            write_csv(&summary, output(cfg.output.as_ref())?)?;
            eprintln!(
                "good frequency {:.4} over {} replications (threshold {:.4}): {}",
                summary.good_frequency,
                summary.rows.len(),
                summary.threshold,
                if summary.pass { "PASS" } else { "FAIL" }
            );
            eprintln!(
                "cost mean {:.1}, median {}, p90 {}",
                summary.mean_cost, summary.median_cost, summary.p90_cost
            );
        }
        Command::Check(args) => {
            let spec = args.inst.spec()?;
            let report = match (&args.grid, &spec) {
                (Some(path), _) => verify_structure(StructureSource::Grid(path))?,
                (None, Some(spec)) => verify_structure(StructureSource::Instance(spec))?,
                (None, None) => {
                    return Err(lnat::Error::Parameter("check needs --grid or --instance".into()))
                }
            };
            println!("{report}");
            return Ok(if report.is_lnatural { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
        Command::Gen(args) => {
            let spec = args
                .inst
                .spec()?
                .ok_or_else(|| lnat::Error::Parameter("gen needs --instance".into()))?;
            let f = make_instance(&spec.kind, &spec.domain()?, spec.seed)?;
            let mut out = output(args.out.as_ref())?;
            write_grid(&f, &mut out)?;
            out.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
