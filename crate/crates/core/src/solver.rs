//! Picard iteration per time step, step retries, pinch-off and the run loop.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::anisotropy::Anisotropy;
use crate::error::{Result, SsdError};
use crate::geometry::{mesh_ratio, PolygonalCurve};
use crate::linalg::linear_solve;
use crate::real::Real;
use crate::scheme::{Iterate, SchemeParams, SchemeState, SchemeVariant, StepContext};
use crate::substrate::{project, Substrate};
use crate::vec2::Vec2;

/// Daughter curves shorter than this are not split off.
pub const MIN_DAUGHTER_ELEMENTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverParams {
    pub tol: f64,
    pub max_iters: usize,
    pub perturb_scale: f64,
    pub seed: u64,
    /// Distance below which an interior node triggers a split; `None` uses
    /// 0.2 × the current minimum element length, `Some(0.0)` disables splitting.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pinch_threshold: Option<f64>,
    /// Retry a non-converged step once as two half steps.
    pub retry_halving: bool,
    pub qtol: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 100,
            perturb_scale: 1e-8,
            seed: 0,
            pinch_threshold: None,
            retry_halving: true,
            qtol: 1e-12,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(SsdError::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(SsdError::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.perturb_scale >= 0.0) || !(self.qtol > 0.0) {
            return Err(SsdError::InvalidParameter("perturb_scale must be ≥ 0 and qtol > 0".into()));
        }
        Ok(())
    }
}

/// The physical model a film evolves under.
pub struct Model<'a, T: Real, S: Substrate<T> + ?Sized> {
    pub aniso: &'a Anisotropy<T>,
    pub sub: &'a S,
    pub sigma: T,
    pub eta: T,
    pub variant: SchemeVariant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinchEvent {
    pub time: f64,
    pub node: usize,
    pub contact: f64,
    pub mass_before: f64,
    pub mass_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iterations: usize,
    pub converged: bool,
    pub max_node_displacement_last_iter: f64,
    pub halved: bool,
    pub pinch_events: Vec<PinchEvent>,
}

/// `c^m + scale·N(0,1)` per contact point.
pub fn perturb_contacts<T: Real>(c_l: T, c_r: T, scale: f64, rng: &mut ChaCha8Rng) -> (T, T) {
    let a: f64 = rng.sample(StandardNormal);
    let b: f64 = rng.sample(StandardNormal);
    (c_l + T::lit(scale * a), c_r + T::lit(scale * b))
}

fn single_step<T: Real, S: Substrate<T> + ?Sized>(
    state: &SchemeState<T>,
    model: &Model<'_, T, S>,
    dt: T,
    params: &SolverParams,
    rng: &mut ChaCha8Rng,
) -> Result<(SchemeState<T>, StepReport)> {
    let sp = SchemeParams { sigma: model.sigma, eta: model.eta, dt };
    let qtol = T::lit(params.qtol);
    let ctx = StepContext::new(state, model.aniso, model.sub, sp, model.variant, qtol)?;
    let sub = model.sub;
    let n = state.element_count();

    let (c_l0, c_r0) = perturb_contacts(state.c_l, state.c_r, params.perturb_scale, rng);
    let mut it = Iterate::from_state(state);
    it.c_l = c_l0;
    it.c_r = c_r0;
    it.nodes[0] = sub.point(c_l0);
    it.nodes[n] = sub.point(c_r0);

    let tol = T::lit(params.tol);
    let mut disp = T::infinity();
    for iter in 1..=params.max_iters {
        let sys = ctx.assemble(&it)?;
        let u = linear_solve(&sys.matrix, &sys.rhs)?;
        let next = Iterate::from_vector(sys.dofs, &u);
        disp = T::zero();
        for j in 1..n {
            disp = disp.max((next.nodes[j] - it.nodes[j]).norm());
        }
        disp = disp.max((sub.point(next.c_l) - sub.point(it.c_l)).norm());
        disp = disp.max((sub.point(next.c_r) - sub.point(it.c_r)).norm());
        if !disp.is_finite() {
            break;
        }
        it = next;
        if disp <= tol {
            let mut nodes = it.nodes;
            nodes[0] = sub.point(it.c_l);
            nodes[n] = sub.point(it.c_r);
            let curve = PolygonalCurve::new(nodes)?;
            let next_state = SchemeState::new(curve, it.mu, it.c_l, it.c_r, state.time + dt)?;
            let report = StepReport {
                iterations: iter,
                converged: true,
                max_node_displacement_last_iter: disp.to_f64_lossy(),
                halved: false,
                pinch_events: Vec::new(),
            };
            return Ok((next_state, report));
        }
    }
    Err(SsdError::NoConvergence { iterations: params.max_iters, displacement: disp.to_f64_lossy() })
}

/// Advances one film by `dt`; on Picard failure retries once with two half
/// steps when enabled.
pub fn time_step<T: Real, S: Substrate<T> + ?Sized>(
    state: &SchemeState<T>,
    model: &Model<'_, T, S>,
    dt: T,
    params: &SolverParams,
    rng: &mut ChaCha8Rng,
) -> Result<(SchemeState<T>, StepReport)> {
    match single_step(state, model, dt, params, rng) {
        Err(SsdError::NoConvergence { iterations, displacement }) if params.retry_halving => {
            log::warn!(
                "no convergence after {iterations} iterations (displacement {displacement:e}) at t = {}; retrying with two half steps",
                state.time
            );
            let half = dt * T::lit(0.5);
            let (mid, r1) = single_step(state, model, half, params, rng)?;
            let (mut end, r2) = single_step(&mid, model, half, params, rng)?;
            end.time = state.time + dt;
            Ok((
                end,
                StepReport {
                    iterations: r1.iterations + r2.iterations,
                    converged: true,
                    max_node_displacement_last_iter: r2.max_node_displacement_last_iter,
                    halved: true,
                    pinch_events: Vec::new(),
                },
            ))
        }
        other => other,
    }
}

/// Splits the film at the interior node closest to (or furthest below) the
/// substrate when it comes within `threshold`. Both daughters keep their
/// nodes; the split node is projected onto the substrate and becomes a new
/// contact point of each.
pub fn detect_and_split_pinchoff<T: Real, S: Substrate<T> + ?Sized>(
    state: &SchemeState<T>,
    sub: &S,
    threshold: T,
) -> Result<Vec<SchemeState<T>>> {
    if !(threshold > T::zero()) {
        return Ok(vec![state.clone()]);
    }
    let n = state.element_count();
    if n < 2 * MIN_DAUGHTER_ELEMENTS {
        return Ok(vec![state.clone()]);
    }
    let nodes = state.curve.nodes();
    let span = state.c_r - state.c_l;
    let (lo, hi) = (state.c_l - span * T::lit(0.25), state.c_r + span * T::lit(0.25));
    // unit speed: a node is at least `min |p − r(c_i)| − step/2` from the arc
    let samples = 512usize;
    let step = (hi - lo) / T::from_usize_lossy(samples);
    let arc: Vec<Vec2<T>> = (0..=samples).map(|i| sub.point(lo + step * T::from_usize_lossy(i))).collect();
    let near = |p: Vec2<T>| arc.iter().map(|&q| (p - q).norm()).fold(T::infinity(), T::min);
    let mut best: Option<(usize, T, T)> = None;
    for (j, &p) in nodes.iter().enumerate().take(n - MIN_DAUGHTER_ELEMENTS + 1).skip(MIN_DAUGHTER_ELEMENTS) {
        let rough = near(p);
        if rough - step * T::lit(0.5) >= threshold {
            continue;
        }
        let c = match project(sub, p, lo, hi) {
            Ok(c) => c,
            // equidistant foot points only matter for nodes that could split
            Err(SsdError::AmbiguousProjection { .. }) if rough > threshold * T::lit(2.0) => continue,
            Err(e) => return Err(e),
        };
        let d = (p - sub.point(c)).dot(sub.normal(c));
        if d < threshold && best.map_or(true, |(_, _, bd)| d < bd) {
            best = Some((j, c, d));
        }
    }
    let Some((j, c, _)) = best else {
        return Ok(vec![state.clone()]);
    };
    if !(c > state.c_l && c < state.c_r) {
        return Ok(vec![state.clone()]);
    }
    let touch = sub.point(c);
    let mut left: Vec<Vec2<T>> = nodes[..=j].to_vec();
    let mut right: Vec<Vec2<T>> = nodes[j..].to_vec();
    left[j] = touch;
    right[0] = touch;
    let mu_l = state.mu[..=j].to_vec();
    let mu_r = state.mu[j..].to_vec();
    let a = SchemeState::new(PolygonalCurve::new(left)?, mu_l, state.c_l, c, state.time)?;
    let b = SchemeState::new(PolygonalCurve::new(right)?, mu_r, c, state.c_r, state.time)?;
    Ok(vec![a, b])
}

/// Pinch threshold for a state under the configured policy.
pub fn pinch_threshold<T: Real>(state: &SchemeState<T>, params: &SolverParams) -> T {
    match params.pinch_threshold {
        Some(t) => T::lit(t),
        None => {
            let hmin = state.curve.element_lengths().values().iter().copied().fold(T::infinity(), T::min);
            hmin * T::lit(0.2)
        }
    }
}

/// One recorded point of a run, totals over all islands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub time: f64,
    pub energy: f64,
    pub mass: f64,
    pub c_l: f64,
    pub c_r: f64,
    pub iterations: usize,
    pub mesh_ratio: f64,
    pub islands: usize,
}

#[derive(Debug, Clone)]
pub struct Snapshot<T> {
    pub time: T,
    pub islands: Vec<SchemeState<T>>,
}

#[derive(Debug, Clone)]
pub struct RunResult<T> {
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<Snapshot<T>>,
    pub reports: Vec<StepReport>,
    pub final_islands: Vec<SchemeState<T>>,
    pub steps: usize,
}

pub struct RunSpec<T> {
    pub dt: T,
    pub t_end: T,
    pub snapshot_every: usize,
}

pub fn record<T: Real, S: Substrate<T> + ?Sized>(
    islands: &[SchemeState<T>],
    model: &Model<'_, T, S>,
    time: T,
    iterations: usize,
    qtol: T,
) -> Result<SeriesRow> {
    let mut energy = T::zero();
    let mut mass = T::zero();
    let mut ratio = T::one();
    for s in islands {
        energy += crate::diagnostics::total_energy(s, model.aniso, model.sigma)?;
        mass += crate::diagnostics::total_mass(s, model.sub, qtol)?;
        ratio = ratio.max(mesh_ratio(&s.curve)?);
    }
    let c_l = islands.iter().map(|s| s.c_l).fold(T::infinity(), T::min);
    let c_r = islands.iter().map(|s| s.c_r).fold(T::neg_infinity(), T::max);
    Ok(SeriesRow {
        time: time.to_f64_lossy(),
        energy: energy.to_f64_lossy(),
        mass: mass.to_f64_lossy(),
        c_l: c_l.to_f64_lossy(),
        c_r: c_r.to_f64_lossy(),
        iterations,
        mesh_ratio: ratio.to_f64_lossy(),
        islands: islands.len(),
    })
}

/// Number of steps of size `dt` that reach `t_end` (the last step is not shortened).
pub fn step_count<T: Real>(dt: T, t_end: T) -> usize {
    let q = (t_end / dt).to_f64_lossy();
    let r = q.round();
    if (q - r).abs() <= 1e-9 * r.max(1.0) {
        r as usize
    } else {
        q.ceil() as usize
    }
}

/// Steps all islands from their common time to `t_end`, splitting on
/// pinch-off. `observer` sees every accepted state.
pub fn run<T: Real, S: Substrate<T> + ?Sized>(
    initial: Vec<SchemeState<T>>,
    model: &Model<'_, T, S>,
    spec: &RunSpec<T>,
    params: &SolverParams,
    mut observer: impl FnMut(usize, &[SchemeState<T>]),
) -> Result<RunResult<T>> {
    params.validate()?;
    if !(spec.dt > T::zero()) {
        return Err(SsdError::InvalidParameter(format!("time step must be positive, got {}", spec.dt)));
    }
    if !(spec.t_end >= T::zero()) {
        return Err(SsdError::InvalidParameter(format!("end time must be non-negative, got {}", spec.t_end)));
    }
    let qtol = T::lit(params.qtol);
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(params.seed);
    let steps = step_count(spec.dt, spec.t_end);
    let t0 = initial.first().map(|s| s.time).unwrap_or_else(T::zero);
    let mut islands = initial;
    let every = spec.snapshot_every.max(1);
    let mut series = vec![record(&islands, model, t0, 0, qtol)?];
    let mut snapshots = vec![Snapshot { time: t0, islands: islands.clone() }];
    let mut reports = Vec::with_capacity(steps);
    observer(0, &islands);
    for m in 1..=steps {
        let time = t0 + spec.dt * T::from_usize_lossy(m);
        let mut next = Vec::with_capacity(islands.len());
        let mut iterations = 0;
        let mut events = Vec::new();
        let mut last_disp: f64 = 0.0;
        let mut halved = false;
        for s in &islands {
            let (mut ns, rep) = time_step(s, model, spec.dt, params, &mut rng)
                .map_err(|e| SsdError::Step { step: m, source: Box::new(e) })?;
            ns.time = time;
            iterations = iterations.max(rep.iterations);
            last_disp = last_disp.max(rep.max_node_displacement_last_iter);
            halved |= rep.halved;
            let threshold = pinch_threshold(&ns, params);
            let parts = detect_and_split_pinchoff(&ns, model.sub, threshold)
                .map_err(|e| SsdError::Step { step: m, source: Box::new(e) })?;
            if parts.len() > 1 {
                let before = crate::diagnostics::total_mass(&ns, model.sub, qtol)?;
                let after: T = parts
                    .iter()
                    .map(|p| crate::diagnostics::total_mass(p, model.sub, qtol))
                    .sum::<Result<T>>()?;
                log::info!(
                    "pinch-off at t = {time}: mass {before} -> {after} (change {:e})",
                    (after - before).to_f64_lossy()
                );
                events.push(PinchEvent {
                    time: time.to_f64_lossy(),
                    node: parts[0].element_count(),
                    contact: parts[0].c_r.to_f64_lossy(),
                    mass_before: before.to_f64_lossy(),
                    mass_after: after.to_f64_lossy(),
                });
            }
            next.extend(parts);
        }
        islands = next;
        reports.push(StepReport {
            iterations,
            converged: true,
            max_node_displacement_last_iter: last_disp,
            halved,
            pinch_events: events,
        });
        series.push(record(&islands, model, time, iterations, qtol)?);
        if m % every == 0 || m == steps {
            snapshots.push(Snapshot { time, islands: islands.clone() });
        }
        observer(m, &islands);
    }
    Ok(RunResult { series, snapshots, reports, final_islands: islands, steps })
}
