use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use orgsim::oracle::{enumerate, OracleProblem};
use orgsim::output::{summary_table, write_outputs, Emit};
use orgsim::scenario::{parse_incentive, GridAxes, ScenarioFile, Strategy, Structure};
use orgsim::simulation::{run_cell, run_grid, RunOptions};
use orgsim::{Error, IncentiveScheme};

#[derive(Parser)]
#[command(name = "orgsim", version, about = "Simulate autonomous task allocation on NK landscapes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment or a scenario grid and write results.
    Run(Box<RunArgs>),
    /// Check a scenario file without running it.
    Validate {
        /// Scenario file (TOML).
        scenario: PathBuf,
    },
    /// Print brute-force reference tables for a tiny random problem.
    Oracle {
        #[arg(long)]
        n: usize,
        /// Dependencies per decision.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    PaperGrid,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EmitKind {
    Csv,
    Json,
    Beliefs,
    Trades,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (TOML); omitted keys use the model defaults.
    scenario: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// k2, k5 or file:<matrix path>
    #[arg(long, value_parser = parse_structure)]
    structure: Option<Structure>,
    /// individualistic, balanced, altruistic or alpha=<v>
    #[arg(long, value_parser = parse_incentive)]
    incentive: Option<IncentiveScheme>,
    /// utility, interdependence or benchmark
    #[arg(long, value_parser = parse_strategy)]
    strategy: Option<Strategy>,
    /// Replications per cell (S).
    #[arg(long)]
    reps: Option<u64>,
    /// Periods per replication (T).
    #[arg(long)]
    horizon: Option<u32>,
    /// Auction interval.
    #[arg(long)]
    tau: Option<u32>,
    /// Standard deviation of utility-bid noise.
    #[arg(long)]
    sigma: Option<f64>,
    /// Uniform per-agent capacity.
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output directory (default: `results`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Files to write.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EmitKind::Csv, EmitKind::Json])]
    emit: Vec<EmitKind>,
}

fn parse_structure(s: &str) -> Result<Structure, String> {
    s.parse()
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

/// Exit status for a failed command: 2 for bad input, 3 for aborted runs.
fn report(err: Error) -> ExitCode {
    eprintln!("error: {err}");
    match err {
        Error::Invariant { .. } => ExitCode::from(3),
        e if e.is_config() => ExitCode::from(2),
        _ => ExitCode::FAILURE,
    }
}

fn load(path: Option<&PathBuf>) -> Result<ScenarioFile, Error> {
    match path {
        Some(p) => ScenarioFile::load(p),
        None => ScenarioFile::parse("", std::path::Path::new("")),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let file = load(args.scenario.as_ref())?;
    let mut base = file.config.clone();
    if let Some(v) = args.n {
        base.n = v;
    }
    if let Some(v) = args.m {
        base.m = v;
        base.capacities = vec![base.capacities.first().copied().unwrap_or(5); v];
    }
    if let Some(v) = args.capacity {
        base.capacities = vec![v; base.m];
    }
    if let Some(v) = args.reps {
        base.replications = v;
    }
    if let Some(v) = args.horizon {
        base.horizon = v;
    }
    if let Some(v) = args.tau {
        base.tau = v;
    }
    if let Some(v) = args.sigma {
        base.sigma = v;
    }
    if let Some(v) = args.seed {
        base.seed = v;
    }
    if let Some(v) = &args.structure {
        base.structure = v.clone();
    }
    if let Some(v) = args.incentive {
        base.incentive = v;
    }
    if let Some(v) = args.strategy {
        base.strategy = v;
    }

    let mut grid = match args.preset {
        Some(Preset::PaperGrid) => Some(GridAxes::standard()),
        None => file.grid.clone(),
    };
    if let Some(axes) = grid.as_mut() {
        if let Some(v) = &args.structure {
            axes.structures = vec![v.clone()];
        }
        if let Some(v) = args.incentive {
            axes.incentives = vec![v];
        }
        if let Some(v) = args.strategy {
            axes.strategies = vec![v];
        }
    }

    let effective = ScenarioFile {
        config: base.clone(),
        grid: grid.clone(),
        out: None,
    };
    effective.validate()?;

    let options = RunOptions {
        record_beliefs: args.emit.contains(&EmitKind::Beliefs),
        jobs: args.jobs,
    };
    let results = match &grid {
        Some(axes) => run_grid(&base, axes, &options)?,
        None => vec![run_cell(&base, 0, &options)?],
    };

    let emit = Emit {
        csv: args.emit.contains(&EmitKind::Csv),
        json: args.emit.contains(&EmitKind::Json),
        beliefs: args.emit.contains(&EmitKind::Beliefs),
        trades: args.emit.contains(&EmitKind::Trades),
    };
    let out = args
        .out
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("results"));
    let written = write_outputs(&out, &results, emit)?;
    print!("{}", summary_table(&results));
    for path in written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_validate(path: PathBuf) -> Result<(), Error> {
    let file = ScenarioFile::load(&path)?;
    file.validate()?;
    let c = &file.config;
    println!("n            = {}", c.n);
    println!("m            = {}", c.m);
    println!("structure    = {}", c.structure);
    println!("incentive    = alpha {} / beta {}", c.incentive.alpha, c.incentive.beta);
    println!("strategy     = {}", c.strategy);
    println!("tau          = {}", c.tau);
    println!("horizon      = {}", c.horizon);
    println!("replications = {}", c.replications);
    println!("sigma        = {}", c.sigma);
    println!("capacities   = {:?}", c.capacities);
    println!("seed         = {}", c.seed);
    if let Some(out) = &file.out {
        println!("out          = {}", out.display());
    }
    if let Some(axes) = &file.grid {
        println!("grid cells   = {}", axes.len());
        for (k, cell) in axes.cells(c).iter().enumerate() {
            println!("  {k:>3} {}", cell.label());
        }
    }
    Ok(())
}

fn cmd_oracle(n: usize, k: usize, seed: u64) -> Result<(), Error> {
    let problem = OracleProblem::seeded(n, k, seed)?;
    print!("{}", enumerate(problem).render());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(*args),
        Command::Validate { scenario } => cmd_validate(scenario),
        Command::Oracle { n, k, seed } => cmd_oracle(n, k, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}
