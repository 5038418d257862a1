//! Mesh refinement study: manifold distance to a fine reference run at a
//! fixed time, with the reference cached on disk.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Scenario, ScenarioConfig};
use crate::diagnostics::manifold_distance;
use crate::error::{Result, SsdError};
use crate::geometry::PolygonalCurve;
use crate::scheme::SchemeState;
use crate::substrate::Substrate;
use crate::vec2::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub dt: f64,
}

impl Level {
    /// `h = 2^-k` with `Δt = h²`.
    pub fn dyadic(k: u32) -> Self {
        let n = 1usize << k;
        Self { n, dt: 1.0 / (n * n) as f64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelError {
    pub n: usize,
    pub dt: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub t_eval: f64,
    pub reference: Level,
    pub levels: Vec<LevelError>,
    /// `log(e_k / e_{k+1}) / log(h_k / h_{k+1})` for consecutive levels.
    pub orders: Vec<f64>,
    pub reference_from_cache: bool,
}

/// Linear-in-time interpolation between consecutive states; contact points
/// are interpolated in arclength and mapped onto the substrate.
pub fn interpolate<S: Substrate<f64> + ?Sized>(
    a: &SchemeState<f64>,
    b: &SchemeState<f64>,
    t: f64,
    sub: &S,
) -> Result<SchemeState<f64>> {
    if a.curve.nodes().len() != b.curve.nodes().len() {
        return Err(SsdError::LengthMismatch { expected: a.curve.nodes().len(), got: b.curve.nodes().len() });
    }
    let span = b.time - a.time;
    let w = if span > 0.0 { (t - a.time) / span } else { 0.0 };
    let mut nodes: Vec<Vec2<f64>> = a.curve.nodes().iter().zip(b.curve.nodes()).map(|(p, q)| p.lerp(*q, w)).collect();
    let mu = a.mu.iter().zip(&b.mu).map(|(x, y)| x + w * (y - x)).collect();
    let c_l = a.c_l + w * (b.c_l - a.c_l);
    let c_r = a.c_r + w * (b.c_r - a.c_r);
    let last = nodes.len() - 1;
    nodes[0] = sub.point(c_l);
    nodes[last] = sub.point(c_r);
    SchemeState::new(PolygonalCurve::new(nodes)?, mu, c_l, c_r, t)
}

fn level_config(base: &ScenarioConfig, level: Level, t_eval: f64) -> ScenarioConfig {
    let mut cfg = base.clone();
    cfg.n = Some(level.n);
    cfg.h = None;
    cfg.dt = level.dt;
    cfg.t_end = t_eval;
    cfg.output = None;
    cfg
}

/// The single film of `cfg` at `t_eval`.
pub fn state_at(cfg: &ScenarioConfig, t_eval: f64) -> Result<SchemeState<f64>> {
    let scenario = Scenario::<f64>::build(cfg)?;
    let mut prev: Option<SchemeState<f64>> = None;
    let mut found: Option<(SchemeState<f64>, SchemeState<f64>)> = None;
    let mut multiple = false;
    scenario.run_with(|_, islands| {
        if islands.len() != 1 {
            multiple = true;
            return;
        }
        let s = &islands[0];
        if found.is_none() {
            if let Some(p) = &prev {
                if s.time >= t_eval {
                    found = Some((p.clone(), s.clone()));
                }
            }
        }
        prev = Some(s.clone());
    })?;
    if multiple {
        return Err(SsdError::InvalidParameter("convergence study needs a single film throughout".into()));
    }
    match found {
        Some((a, b)) => interpolate(&a, &b, t_eval, scenario.substrate.as_ref()),
        None => prev.ok_or_else(|| SsdError::InvalidParameter("run produced no states".into())),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CachedState {
    nodes: Vec<[f64; 2]>,
    mu: Vec<f64>,
    c_l: f64,
    c_r: f64,
    time: f64,
}

impl CachedState {
    fn from_state(s: &SchemeState<f64>) -> Self {
        Self {
            nodes: s.curve.nodes().iter().map(|p| [p.x, p.y]).collect(),
            mu: s.mu.clone(),
            c_l: s.c_l,
            c_r: s.c_r,
            time: s.time,
        }
    }

    fn into_state(self) -> Result<SchemeState<f64>> {
        let nodes = self.nodes.iter().map(|p| Vec2::new(p[0], p[1])).collect();
        SchemeState::new(PolygonalCurve::new(nodes)?, self.mu, self.c_l, self.c_r, self.time)
    }
}

/// Bumped whenever a code change alters trajectories, invalidating old entries.
const CACHE_REVISION: u32 = 3;

/// Cache key for the state of `cfg` at `t_eval`.
pub fn cache_key(cfg: &ScenarioConfig, t_eval: f64) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_string(cfg).expect("config serializes").as_bytes());
    h.update(t_eval.to_bits().to_le_bytes());
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    h.update(CACHE_REVISION.to_le_bytes());
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn cached_state_at(cfg: &ScenarioConfig, t_eval: f64, cache: Option<&Path>) -> Result<(SchemeState<f64>, bool)> {
    let Some(dir) = cache else {
        return Ok((state_at(cfg, t_eval)?, false));
    };
    let path: PathBuf = dir.join(format!("{}.json", cache_key(cfg, t_eval)));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(cached) = serde_json::from_str::<CachedState>(&text) {
            return Ok((cached.into_state()?, true));
        }
        log::warn!("ignoring unreadable cache entry {}", path.display());
    }
    let state = state_at(cfg, t_eval)?;
    std::fs::create_dir_all(dir).map_err(|source| SsdError::Io { path: dir.display().to_string(), source })?;
    let text = serde_json::to_string(&CachedState::from_state(&state)).expect("state serializes");
    // write then rename so concurrent readers never see a partial file
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text).map_err(|source| SsdError::Io { path: tmp.display().to_string(), source })?;
    std::fs::rename(&tmp, &path).map_err(|source| SsdError::Io { path: path.display().to_string(), source })?;
    Ok((state, false))
}

/// Runs every level and the reference (concurrently) and measures errors.
pub fn convergence_study(
    base: &ScenarioConfig,
    levels: &[Level],
    reference: Level,
    t_eval: f64,
    cache: Option<&Path>,
) -> Result<ConvergenceReport> {
    let ref_cfg = level_config(base, reference, t_eval);
    let (reference_state, states) = rayon::join(
        || cached_state_at(&ref_cfg, t_eval, cache),
        || levels.par_iter().map(|&l| state_at(&level_config(base, l, t_eval), t_eval)).collect::<Result<Vec<_>>>(),
    );
    let (reference_state, reference_from_cache) = reference_state?;
    let states = states?;
    let sub = base.substrate.build::<f64>()?;
    let errors: Vec<LevelError> = levels
        .iter()
        .zip(&states)
        .map(|(l, s)| {
            Ok(LevelError { n: l.n, dt: l.dt, error: manifold_distance(s, &reference_state, sub.as_ref())? })
        })
        .collect::<Result<_>>()?;
    let orders = errors
        .windows(2)
        .map(|w| (w[0].error / w[1].error).ln() / (w[1].n as f64 / w[0].n as f64).ln())
        .collect();
    Ok(ConvergenceReport { t_eval, reference, levels: errors, orders, reference_from_cache })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::preset;
    use crate::substrate::Line;

    #[test]
    fn interpolation_weights() {
        let sub = Line::horizontal();
        let mk = |y: f64, c: f64, t: f64| {
            let nodes = vec![Vec2::new(-c, 0.0), Vec2::new(-1.0, y), Vec2::new(0.0, y), Vec2::new(1.0, y), Vec2::new(c, 0.0)];
            SchemeState::new(PolygonalCurve::new(nodes).unwrap(), vec![y; 5], -c, c, t).unwrap()
        };
        let a = mk(1.0, 2.0, 0.0);
        let b = mk(3.0, 3.0, 0.5);
        let m = interpolate(&a, &b, 0.125, &sub).unwrap();
        // a quarter of the way from a to b
        assert_eq!(m.curve.nodes()[2], Vec2::new(0.0, 1.5));
        assert_eq!(m.c_r, 2.25);
        assert_eq!(m.curve.last(), Vec2::new(2.25, 0.0));
        assert_eq!(interpolate(&a, &b, 0.0, &sub).unwrap().curve, a.curve);
    }

    #[test]
    fn dyadic_levels() {
        assert_eq!(Level::dyadic(3), Level { n: 8, dt: 1.0 / 64.0 });
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut base = preset("ex1_i").unwrap();
        base.t_end = 1.0 / 32.0;
        let cfg = level_config(&base, Level::dyadic(3), 1.0 / 32.0);
        let (fresh, hit) = cached_state_at(&cfg, 1.0 / 32.0, Some(dir.path())).unwrap();
        assert!(!hit);
        let (again, hit) = cached_state_at(&cfg, 1.0 / 32.0, Some(dir.path())).unwrap();
        assert!(hit);
        assert_eq!(fresh, again);
        assert_ne!(cache_key(&cfg, 1.0), cache_key(&cfg, 0.5));
    }
}
