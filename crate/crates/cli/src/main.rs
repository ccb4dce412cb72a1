use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mirelay::experiment::{self, Experiment, OutputFormat};
use mirelay::scenario::Scenario;
use mirelay::{Duplex, Scheme};

/// Rates and parameter searches for relayed magnetic-induction links.
#[derive(Debug, Parser)]
#[command(name = "mirelay", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rates of every scheme at the `[point]` of the scenario.
    Evaluate(Common),
    /// Best rate per relay position at one distance.
    SweepPosition(Common),
    /// Optimum per distance, with the link without relay for reference.
    SweepDistance(Common),
    /// Full search at one distance; writes the rate surfaces.
    Optimize(Common),
    /// Normalized combined SNR spectra at the optimum of a few relay positions.
    SnrProfile(Common),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Plotdata,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir` of the scenario.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relaying schemes to compute (af, ff, df); overrides the scenario and
    /// leaves out the link without relay.
    #[arg(long, value_delimiter = ',')]
    scheme: Vec<String>,
    /// Duplex modes to report (hd, fd); overrides the scenario.
    #[arg(long, value_delimiter = ',')]
    duplex: Vec<String>,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Reserved. Every computation is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn execute(experiment: Experiment, args: Common) -> Result<(), String> {
    let mut scenario = Scenario::load(&args.config).map_err(|e| e.to_string())?;
    if !args.scheme.is_empty() {
        scenario.schemes = args
            .scheme
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        scenario.include_direct = false;
    }
    if !args.duplex.is_empty() {
        scenario.duplex = args
            .duplex
            .iter()
            .map(|s| s.parse::<Duplex>())
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
    }
    if let Some(out) = args.out {
        scenario.output_dir = out;
    }
    if args.jobs == Some(0) {
        return Err("--jobs must be at least 1".into());
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = args.jobs {
        pool = pool.num_threads(jobs);
    }
    let pool = pool.build().map_err(|e| e.to_string())?;

    let report = pool
        .install(|| experiment::run(&scenario, experiment))
        .map_err(|e| e.to_string())?;
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Plotdata => OutputFormat::PlotData,
    };
    let files = experiment::render(&report, format).map_err(|e| e.to_string())?;
    let written = experiment::write_outputs(&scenario.output_dir, &files).map_err(|e| e.to_string())?;

    print!("{}", experiment::summary(&report));
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Evaluate(a) => (Experiment::Evaluate, a),
        Command::SweepPosition(a) => (Experiment::SweepPosition, a),
        Command::SweepDistance(a) => (Experiment::SweepDistance, a),
        Command::Optimize(a) => (Experiment::Optimize, a),
        Command::SnrProfile(a) => (Experiment::SnrProfile, a),
    };
    match execute(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
