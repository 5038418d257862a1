//! CSV and JSON outputs of a run, consumed by the plotting scripts.
//!
//! Numbers are written in Rust's shortest round-trip exponent form, so
//! identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs::{self, File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ScenarioConfig;
use crate::error::{Result, SsdError};
use crate::solver::{PinchEvent, RunResult};

pub const SNAPSHOT_HEADER: &str = "t,j,x,y,mu,island";
pub const SERIES_HEADER: &str = "t,W,M,c_l,c_r,iterations,mesh_ratio,islands";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> SsdError + '_ {
    move |source| SsdError::Io { path: path.display().to_string(), source }
}

/// Exclusive ownership of an output directory for the lifetime of a run.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
                Ok(Self { path })
            }
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => Err(SsdError::Locked(dir.display().to_string())),
            Err(e) => Err(io_err(&path)(e)),
        }
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

pub fn snapshots_csv(result: &RunResult<f64>) -> String {
    let mut s = String::from(SNAPSHOT_HEADER);
    s.push('\n');
    for snap in &result.snapshots {
        for (k, island) in snap.islands.iter().enumerate() {
            for (j, (p, mu)) in island.curve.nodes().iter().zip(&island.mu).enumerate() {
                writeln!(s, "{:e},{j},{:e},{:e},{:e},{k}", snap.time, p.x, p.y, mu).expect("string write");
            }
        }
    }
    s
}

pub fn series_csv(result: &RunResult<f64>) -> String {
    let mut s = String::from(SERIES_HEADER);
    s.push('\n');
    for r in &result.series {
        writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{},{:e},{}",
            r.time, r.energy, r.mass, r.c_l, r.c_r, r.iterations, r.mesh_ratio, r.islands
        )
        .expect("string write");
    }
    s
}

#[derive(Debug, Serialize)]
struct Meta<'a> {
    version: &'static str,
    seed: u64,
    preset: Option<&'a str>,
    notes: Option<&'a str>,
    steps: usize,
    halved_steps: usize,
    pinch_events: Vec<&'a PinchEvent>,
    config: &'a ScenarioConfig,
    wall_clock_seconds: f64,
}

pub fn meta_json(config: &ScenarioConfig, result: &RunResult<f64>, wall_clock_seconds: f64) -> String {
    let meta = Meta {
        version: env!("CARGO_PKG_VERSION"),
        seed: config.solver.seed,
        preset: config.preset.as_deref(),
        notes: config.notes.as_deref(),
        steps: result.steps,
        halved_steps: result.reports.iter().filter(|r| r.halved).count(),
        pinch_events: result.reports.iter().flat_map(|r| &r.pinch_events).collect(),
        config,
        wall_clock_seconds,
    };
    let mut s = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    s.push('\n');
    s
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))
}

/// Writes `snapshots.csv`, `series.csv` and `meta.json` into `dir`.
pub fn write_outputs(dir: &Path, config: &ScenarioConfig, result: &RunResult<f64>, wall_clock_seconds: f64) -> Result<()> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_file(&dir.join("snapshots.csv"), &snapshots_csv(result))?;
    write_file(&dir.join("series.csv"), &series_csv(result))?;
    write_file(&dir.join("meta.json"), &meta_json(config, result, wall_clock_seconds))
}
