use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fogcache::experiment::{self, Clustering, ExperimentOutput, ExperimentSpec, SweepAxis};
use fogcache::params::units;
use fogcache::{SchemeId, SystemParams};

/// Social-aware cooperative caching experiments.
#[derive(Parser)]
#[command(name = "fogcache", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment at its base parameters (any sweep is ignored).
    Run(RunArgs),
    /// Run an experiment across its sweep axis.
    Sweep(RunArgs),
    /// Check invariants and, on small instances, the exhaustive oracle.
    Verify {
        spec: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Write the pairwise social graph of a generated scenario as CSV.
    DumpSocial {
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    spec: PathBuf,
    /// Results file; defaults to the spec's `output`, then `results.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Default)]
struct Overrides {
    /// Cache capacity per F-AP in GB.
    #[arg(long)]
    capacity_gb: Option<f64>,
    /// Zipf skewness.
    #[arg(long)]
    eta: Option<f64>,
    /// Social loss weight.
    #[arg(long)]
    delta: Option<f64>,
    /// Delay weight of the objective.
    #[arg(long)]
    mu: Option<f64>,
    /// Replaces the seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replaces the scheme list; repeat for several schemes.
    #[arg(long = "scheme")]
    schemes: Vec<SchemeId>,
    #[arg(long)]
    clustering: Option<Clustering>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) -> Result<()> {
        let p = &mut spec.params;
        if let Some(c) = self.capacity_gb {
            p.capacity = units::gb_to_bits(c);
        }
        if let Some(eta) = self.eta {
            p.zipf_eta = eta;
        }
        if let Some(delta) = self.delta {
            p.social_delta = delta;
        }
        if let Some(mu) = self.mu {
            p.weight = mu;
        }
        if let Some(seed) = self.seed {
            spec.seeds = vec![seed];
        }
        if !self.schemes.is_empty() {
            spec.schemes = self.schemes.clone();
        }
        if let Some(c) = self.clustering {
            spec.clustering = c;
        }
        spec.validate()?;
        Ok(())
    }
}

fn load_spec(path: &Path, overrides: &Overrides) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(path).with_context(|| format!("loading {}", path.display()))?;
    overrides.apply(&mut spec)?;
    Ok(spec)
}

fn summarize(spec: &ExperimentSpec, out: &ExperimentOutput, path: &Path) {
    println!(
        "{} rows from {} cells ({} clustering) -> {}",
        out.rows.len(),
        out.cells.len(),
        spec.clustering.as_str(),
        path.display()
    );
    for cell in &out.cells {
        let value = cell.sweep_value.map(|v| format!("value {v}, ")).unwrap_or_default();
        println!(
            "  {value}seed {}: partition {} ({} passes)",
            cell.seed, cell.partition, cell.hcg_passes
        );
    }
    for &scheme in &spec.schemes {
        let objs: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.objective)
            .collect();
        let delays: Vec<f64> = out
            .rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.delay_seconds)
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
        println!(
            "  {scheme:<13} mean objective {:.6e}  mean delay {:.6e} s",
            mean(&objs),
            mean(&delays)
        );
    }
}

fn run(args: &RunArgs, sweep: bool) -> Result<()> {
    let mut spec = load_spec(&args.spec, &args.overrides)?;
    if sweep {
        if spec.sweep.axis == SweepAxis::None {
            bail!("{} has no sweep axis; use `run` instead", args.spec.display());
        }
    } else {
        spec = spec.without_sweep();
    }
    let out_path = args
        .out
        .clone()
        .or_else(|| spec.output.clone())
        .unwrap_or_else(|| PathBuf::from("results.csv"));
    let out = experiment::run_experiment(&spec)?;
    experiment::write_csv(&out.rows, &out_path)?;
    experiment::write_trace(&out.traces, experiment::trace_path(&out_path))?;
    summarize(&spec, &out, &out_path);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Sweep(args) => run(args, true),
        Command::Verify { spec, overrides } => load_spec(spec, overrides).and_then(|spec| {
            let report = experiment::verify(&spec)?;
            print!("{report}");
            if !report.all_passed() {
                bail!("verification failed");
            }
            println!("all {} checks passed", report.checks.len());
            Ok(())
        }),
        Command::DumpSocial { config, seed, out } => (|| {
            let params = SystemParams::load(config)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
                    experiment::dump_social(&params, *seed, file)?;
                }
                None => experiment::dump_social(&params, *seed, std::io::stdout().lock())?,
            }
            Ok(())
        })(),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
