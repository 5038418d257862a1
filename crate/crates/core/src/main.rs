use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use ssd_core::anisotropy::{default_ratios, min_stabilizer_search, Anisotropy, StabilizerGrid};
use ssd_core::config::{Scenario, ScenarioConfig};
use ssd_core::convergence::{convergence_study, Level};
use ssd_core::output::{write_outputs, OutputLock};
use ssd_core::presets::{preset, PRESET_IDS};
use ssd_core::scheme::SchemeVariant;
use ssd_core::vec2::Vec2;
use ssd_core::Result;

#[derive(Parser)]
#[command(name = "ssd", version, about = "Solid-state dewetting on curved substrates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Corrected,
    Uncorrected,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write snapshots.csv, series.csv and meta.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        /// One of the built-in presets; --config takes precedence.
        #[arg(long)]
        preset: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        scheme: Option<Scheme>,
        /// Override the end time.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Manifold-distance convergence study with Δt = h².
    Converge {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// Refinement exponents k for h = 2^-k.
        #[arg(long, value_delimiter = ',', default_value = "3,4,5")]
        levels: Vec<u32>,
        #[arg(long, default_value_t = 7)]
        reference: u32,
        #[arg(long, default_value_t = 0.5)]
        t_eval: f64,
        #[arg(long, default_value = "target/ssd-cache")]
        cache: PathBuf,
    },
    /// Check the stability inequality on a direction grid and search the
    /// smallest constant stabilizer per direction.
    CertifyAnisotropy {
        #[arg(long, default_value = "l4")]
        name: String,
        #[arg(long, default_value_t = 360)]
        grid: usize,
    },
    /// List the built-in presets.
    Presets,
}

fn load(config: Option<PathBuf>, id: Option<String>) -> Result<ScenarioConfig> {
    match (config, id) {
        (Some(path), _) => ScenarioConfig::load(&path),
        (None, Some(id)) => preset(&id),
        (None, None) => Err(ssd_core::SsdError::InvalidParameter("give --config or --preset".into())),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, preset: id, out, seed, scheme, t_end } => {
            let mut cfg = load(config, id)?;
            if let Some(s) = seed {
                cfg.solver.seed = s;
            }
            if let Some(s) = scheme {
                cfg.scheme = match s {
                    Scheme::Corrected => SchemeVariant::Corrected,
                    Scheme::Uncorrected => SchemeVariant::Uncorrected,
                };
            }
            if let Some(t) = t_end {
                cfg.t_end = t;
            }
            cfg.validate()?;
            let _lock = OutputLock::acquire(&out)?;
            let scenario = Scenario::<f64>::build(&cfg)?;
            let start = Instant::now();
            let steps = cfg.steps();
            let result = scenario.run_with(|m, islands| {
                if m > 0 && m % (steps / 20).max(1) == 0 {
                    log::info!("step {m}/{steps}, {} island(s)", islands.len());
                }
            })?;
            let elapsed = start.elapsed().as_secs_f64();
            write_outputs(&out, &cfg, &result, elapsed)?;
            let last = result.series.last().expect("initial record");
            println!(
                "{} steps in {elapsed:.2}s: W = {:.12e}, M = {:.12e}, islands = {}",
                result.steps, last.energy, last.mass, last.islands
            );
            println!("wrote {}", out.display());
        }
        Command::Converge { config, preset: id, levels, reference, t_eval, cache } => {
            let base = load(config, id)?;
            let levels: Vec<Level> = levels.into_iter().map(Level::dyadic).collect();
            let report = convergence_study(&base, &levels, Level::dyadic(reference), t_eval, Some(&cache))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
        }
        Command::CertifyAnisotropy { name, grid } => {
            let a = Anisotropy::<f64>::by_name(&name)?;
            let cert = a.certify(grid, &default_ratios(8))?;
            println!("{name}: min stability gap {:e} over {grid}x{grid}x8 samples", cert.min_gap);
            let mut worst: f64 = 0.0;
            for i in 0..grid.min(72) {
                let th = std::f64::consts::TAU * i as f64 / grid.min(72) as f64;
                let n = Vec2::new(th.cos(), th.sin());
                let alpha = min_stabilizer_search(&a, n, StabilizerGrid { directions: grid, ..Default::default() })?;
                worst = worst.max(alpha);
            }
            println!("{name}: largest minimal constant stabilizer over sampled normals {worst:.6}");
        }
        Command::Presets => {
            for id in PRESET_IDS {
                let cfg = preset(id)?;
                println!("{id:14} {}", cfg.notes.unwrap_or_default());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
