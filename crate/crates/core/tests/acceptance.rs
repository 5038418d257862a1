//! Acceptance runs. Prints one PASS/FAIL line per criterion and a summary;
//! the exit status only reflects failures when `SSD_ACCEPTANCE_STRICT` is
//! set. Pass criterion names as arguments to run a subset. The convergence
//! reference runs are cached under `target/ssd-cache`.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ssd_core::anisotropy::{default_ratios, Anisotropy};
use ssd_core::config::{Scenario, ScenarioConfig, SubstrateSpec};
use ssd_core::convergence::{convergence_study, Level};
use ssd_core::diagnostics::corner_passage;
use ssd_core::film::FilmSpec;
use ssd_core::presets::preset;
use ssd_core::scheme::SchemeVariant;
use ssd_core::solver::RunResult;
use ssd_core::substrate::segment_area;
use ssd_core::vec2::{Mat2, Vec2};

const EX1: [&str; 4] = ["ex1_i", "ex1_ii", "ex1_iii", "ex1_iv"];
const CONVERGENCE_T: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

type Check = fn() -> ssd_core::Result<Outcome>;

fn run(cfg: &ScenarioConfig) -> ssd_core::Result<RunResult<f64>> {
    Scenario::<f64>::build(cfg)?.run()
}

fn with(id: &str, f: impl FnOnce(&mut ScenarioConfig)) -> ScenarioConfig {
    let mut cfg = preset(id).expect("built-in preset");
    f(&mut cfg);
    cfg
}

fn mass_drift(r: &RunResult<f64>) -> f64 {
    (r.series.last().unwrap().mass - r.series[0].mass).abs()
}

fn energy_stability() -> ssd_core::Result<Outcome> {
    let mut worst = f64::NEG_INFINITY;
    let mut where_ = String::new();
    let mut runs = 0;
    for id in EX1 {
        for k in [6, 8, 10, 12] {
            for variant in [SchemeVariant::Corrected, SchemeVariant::Uncorrected] {
                let cfg = with(id, |c| {
                    c.dt = 0.5f64.powi(k);
                    c.scheme = variant;
                });
                let r = run(&cfg)?;
                runs += 1;
                for w in r.series.windows(2) {
                    // increase relative to the allowed slack
                    let excess = (w[1].energy - w[0].energy) / w[0].energy.abs();
                    if excess > worst {
                        worst = excess;
                        where_ = format!("{id} dt=2^-{k} {variant:?} t={}", w[1].time);
                    }
                }
            }
        }
    }
    Ok(outcome(
        worst <= 1e-12,
        format!("{runs} runs, largest relative step increase {worst:.3e} ({where_}), bound 1e-12"),
    ))
}

fn mass_conservation() -> ssd_core::Result<Outcome> {
    let fine = 1e-11;
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ["ex1_i", "ex1_ii"] {
        let corrected = run(&with(id, |c| c.solver.tol = fine))?;
        let default_tol = run(&preset(id)?)?;
        let uncorrected = run(&with(id, |c| {
            c.solver.tol = fine;
            c.scheme = SchemeVariant::Uncorrected;
        }))?;
        let d_c = mass_drift(&corrected);
        let d_u = mass_drift(&uncorrected);

        let sub = preset(id)?.substrate.build::<f64>()?;
        let qtol = preset(id)?.solver.qtol;
        let mut residual: f64 = 0.0;
        for w in uncorrected.series.windows(2) {
            let f_l = segment_area(sub.as_ref(), w[0].c_l, w[1].c_l, qtol)?;
            let f_r = segment_area(sub.as_ref(), w[0].c_r, w[1].c_r, qtol)?;
            residual = residual.max((w[1].mass - w[0].mass - (f_r - f_l)).abs());
        }
        pass &= d_c <= 1e-10 && d_u > d_c && residual <= 10.0 * fine;
        parts.push(format!(
            "{id}: corrected |dM| {d_c:.2e} at tol {fine:e} ({:.2e} at tol 1e-9), uncorrected {d_u:.2e}, per-step budget residual {residual:.2e}",
            mass_drift(&default_tol)
        ));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn flat_degeneracy() -> ssd_core::Result<Outcome> {
    let mut trajectories = Vec::new();
    let mut worst_dm: f64 = 0.0;
    let tol = preset("ex1_i")?.solver.tol;
    for variant in [SchemeVariant::Corrected, SchemeVariant::Uncorrected] {
        let cfg = with("ex1_i", |c| {
            c.substrate = SubstrateSpec::Line;
            c.films = vec![FilmSpec::OffsetBand { c_left: -2.5, c_right: 2.5, thickness: 1.0 }];
            c.scheme = variant;
        });
        let scenario = Scenario::<f64>::build(&cfg)?;
        let mut nodes = Vec::new();
        let r = scenario.run_with(|_, islands| nodes.push(islands[0].curve.nodes().to_vec()))?;
        for w in r.series.windows(2) {
            worst_dm = worst_dm.max((w[1].mass - w[0].mass).abs());
        }
        trajectories.push(nodes);
    }
    let mut gap: f64 = 0.0;
    for (a, b) in trajectories[0].iter().zip(&trajectories[1]) {
        for (p, q) in a.iter().zip(b) {
            gap = gap.max((*p - *q).norm());
        }
    }
    let bound = 10.0 * tol;
    Ok(outcome(
        worst_dm <= bound && gap <= bound,
        format!("largest per-step |dM| {worst_dm:.2e}, largest node gap between variants {gap:.2e}, bound {bound:e}"),
    ))
}

fn convergence_order() -> ssd_core::Result<Outcome> {
    let cache = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("../ssd-cache");
    let levels: Vec<Level> = [3, 4, 5].into_iter().map(Level::dyadic).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ["ex1_i", "ex1_iii"] {
        let report = convergence_study(&preset(id)?, &levels, Level::dyadic(7), CONVERGENCE_T, Some(&cache))?;
        pass &= report.orders.iter().all(|o| (1.7..=2.3).contains(o));
        let errors: Vec<String> = report.levels.iter().map(|l| format!("{:.3e}", l.error)).collect();
        let orders: Vec<String> = report.orders.iter().map(|o| format!("{o:.2}")).collect();
        parts.push(format!("{id}: errors [{}] orders [{}]", errors.join(", "), orders.join(", ")));
    }
    Ok(outcome(pass, format!("t = {CONVERGENCE_T}, {} (window [1.7, 2.3])", parts.join("; "))))
}

fn iteration_economy() -> ssd_core::Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let runs = [
        ("ex2", preset("ex2")?),
        ("ex2 convex l4", with("ex2", |c| {
            c.substrate = SubstrateSpec::Circle { radius: 20.0, convex: true };
            c.anisotropy = "l4".into();
        })),
    ];
    for (name, cfg) in runs {
        let r = run(&cfg)?;
        let mut its: Vec<usize> = r.reports.iter().map(|s| s.iterations).collect();
        its.sort_unstable();
        let median = its[its.len() / 2];
        let max = *its.last().unwrap();
        pass &= median <= 15 && max <= 30;
        parts.push(format!("{name}: median {median}, max {max} over {} steps", its.len()));
    }
    Ok(outcome(pass, parts.join("; ")))
}

fn stability_certificate() -> ssd_core::Result<Outcome> {
    let ratios = default_ratios(8);
    let iso = Anisotropy::<f64>::isotropic().certify(360, &ratios)?;
    let l4 = Anisotropy::<f64>::l4().certify(360, &ratios)?;
    let a = Anisotropy::<f64>::isotropic();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut identity = true;
    for _ in 0..1000 {
        let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        identity &= a.zk_matrix(Vec2::new(th.cos(), th.sin()))? == Mat2::identity();
    }
    Ok(outcome(
        iso.min_gap >= -1e-12 && l4.min_gap >= -1e-12 && identity,
        format!(
            "min gap isotropic {:.3e}, l4 {:.3e} on 360x360x8; Z_k(isotropic) = I exactly at 1000 normals: {identity}",
            iso.min_gap, l4.min_gap
        ),
    ))
}

fn anisotropy_calculus() -> ssd_core::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut fd: f64 = 0.0;
    let mut euler: f64 = 0.0;
    let h = 1e-5;
    for a in [Anisotropy::<f64>::isotropic(), Anisotropy::<f64>::l4()] {
        for _ in 0..1000 {
            let th: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r: f64 = rng.gen_range(0.5..2.0);
            let p = Vec2::new(r * th.cos(), r * th.sin());
            let g = a.grad_gamma(p)?;
            let dx = (a.gamma(p + Vec2::new(h, 0.0))? - a.gamma(p - Vec2::new(h, 0.0))?) / (2.0 * h);
            let dy = (a.gamma(p + Vec2::new(0.0, h))? - a.gamma(p - Vec2::new(0.0, h))?) / (2.0 * h);
            fd = fd.max((g.x - dx).abs()).max((g.y - dy).abs());
            euler = euler.max((g.dot(p) - a.gamma(p)?).abs());
        }
    }
    Ok(outcome(
        fd <= 1e-8 && euler <= 1e-12,
        format!("isotropic and l4 at 1000 points each: gradient vs central differences {fd:.2e} (bound 1e-8), Euler identity {euler:.2e} (bound 1e-12)"),
    ))
}

fn example3_islands() -> ssd_core::Result<Outcome> {
    let convex = run(&preset("ex3_convex")?)?;
    let concave = run(&preset("ex3_concave")?)?;
    let pinch: Vec<String> = convex
        .reports
        .iter()
        .flat_map(|r| &r.pinch_events)
        .map(|e| format!("t = {}", e.time))
        .collect();
    let (a, b) = (convex.final_islands.len(), concave.final_islands.len());
    Ok(outcome(
        a == 2 && b == 1,
        format!(
            "convex: {a} islands at t = {} (pinch-off at {}), concave: {b} island at t = {}",
            convex.series.last().unwrap().time,
            if pinch.is_empty() { "none".to_string() } else { pinch.join(", ") },
            concave.series.last().unwrap().time
        ),
    ))
}

fn example5_corner() -> ssd_core::Result<Outcome> {
    let cfg = preset("ex5_corner")?;
    let scenario = Scenario::<f64>::build(&cfg)?;
    let mut trace = Vec::new();
    let mut t = 0.0;
    scenario.run_with(|m, islands| {
        t = m as f64 * cfg.dt;
        trace.push((t, islands[0].curve.first().x));
    })?;
    let window = 20.0;
    let Some(p) = corner_passage(&trace, -1.0, 1.0, window) else {
        return Ok(outcome(false, format!("edge did not pass x = -1 and x = 1 with {window} time units to spare by t = {t}")));
    };
    Ok(outcome(
        p.ratio() > 1.0,
        format!(
            "edge at x = -1 at t = {:.1}, x = 1 at t = {:.1}; slope over {window} before {:.4}, after {:.4}, ratio {:.3}",
            p.t_before,
            p.t_after,
            p.slope_before,
            p.slope_after,
            p.ratio()
        ),
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 9] = [
        ("energy stability", energy_stability),
        ("mass conservation", mass_conservation),
        ("flat substrate degeneracy", flat_degeneracy),
        ("convergence order", convergence_order),
        ("iteration economy", iteration_economy),
        ("stability certificate", stability_certificate),
        ("anisotropy calculus", anisotropy_calculus),
        ("example 3 islands", example3_islands),
        ("example 5 corner", example5_corner),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in checks {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!pass);
        println!(
            "{} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!("{failed} criterion(s) failed");
    if failed > 0 && std::env::var_os("SSD_ACCEPTANCE_STRICT").is_some() {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
