//! The paper's numerical examples as ready-made scenarios. Sizes, radii and
//! material parameters are the published ones; film placement, resolution and
//! end times are reconstructions and are recorded in each preset's notes.

use crate::config::{OutputConfig, ScenarioConfig, SubstrateSpec};
use crate::error::{Result, SsdError};
use crate::film::FilmSpec;
use crate::scheme::SchemeVariant;
use crate::solver::SolverParams;

pub const PRESET_IDS: [&str; 11] = [
    "ex1_i",
    "ex1_ii",
    "ex1_iii",
    "ex1_iv",
    "ex2",
    "ex3_convex",
    "ex3_concave",
    "ex4_iso",
    "ex4_aniso",
    "ex4_two_films",
    "ex5_corner",
];

fn base(id: &str, substrate: SubstrateSpec, films: Vec<FilmSpec>, n: usize, dt: f64, t_end: f64) -> ScenarioConfig {
    ScenarioConfig {
        preset: Some(id.into()),
        notes: None,
        anisotropy: "isotropic".into(),
        sigma: -(3f64.sqrt()) / 2.0,
        eta: 100.0,
        n: Some(n),
        h: None,
        dt,
        t_end,
        scheme: SchemeVariant::Corrected,
        solver: SolverParams::default(),
        substrate,
        films,
        output: None,
    }
}

fn example1(id: &str, convex: bool, symmetric: bool, anisotropy: &str) -> ScenarioConfig {
    let film = if symmetric {
        FilmSpec::OffsetBand { c_left: -2.5, c_right: 2.5, thickness: 1.0 }
    } else {
        FilmSpec::StepFilm { c_left: 0.0, c_right: 5.0, thickness: 1.0 }
    };
    let mut cfg = base(id, SubstrateSpec::Circle { radius: 20.0, convex }, vec![film], 32, 1.0 / 1024.0, 1.0);
    cfg.anisotropy = anisotropy.into();
    cfg.notes = Some(if symmetric {
        "5x1 film following the substrate, centred on the lowest (concave) or highest (convex) point; h = 2^-5, dt = 2^-10 and T = 1 chosen for desk runs".into()
    } else {
        "5x1 film with vertical side walls starting at the symmetry point, so it is not symmetric about its own centre normal; h = 2^-5, dt = 2^-10 and T = 1 chosen for desk runs".into()
    });
    cfg
}

fn example3(id: &str, convex: bool, t_end: f64) -> ScenarioConfig {
    let film = FilmSpec::OffsetBand { c_left: -21.0, c_right: 21.0, thickness: 0.5 };
    let mut cfg = base(id, SubstrateSpec::Circle { radius: 30.0, convex }, vec![film], 256, 1.0 / 128.0, t_end);
    cfg.notes = Some("42x0.5 film following the circle R = 30, centred on the symmetry point; N = 256, dt = 2^-7 and the end time chosen for desk runs".into());
    cfg
}

fn example4(id: &str, anisotropy: &str) -> ScenarioConfig {
    let film = FilmSpec::OffsetBand { c_left: 1.0, c_right: 5.0, thickness: 1.0 };
    let sub = SubstrateSpec::Cos { amplitude: 4.0, wavenumber: 0.25 };
    let mut cfg = base(id, sub, vec![film], 64, 1.0 / 64.0, 25.0);
    cfg.anisotropy = anisotropy.into();
    cfg.notes = Some("short 4x1 film placed off the crest of y = 4cos(x/4) so it can migrate; N = 64, dt = 2^-6, T = 25 (the published run reaches t = 1225)".into());
    cfg
}

/// Scenario for one of [`PRESET_IDS`].
pub fn preset(id: &str) -> Result<ScenarioConfig> {
    let cfg = match id {
        "ex1_i" => example1(id, false, true, "isotropic"),
        "ex1_ii" => example1(id, true, true, "isotropic"),
        "ex1_iii" => example1(id, false, false, "l4"),
        "ex1_iv" => example1(id, true, false, "l4"),
        "ex2" => {
            let mut cfg = example1(id, false, true, "isotropic");
            cfg.n = Some(128);
            cfg.dt = 1.0 / 16384.0;
            cfg.t_end = 0.25;
            cfg.notes = Some("case (i) geometry at h = 2^-7, dt = 2^-14; T = 0.25 chosen for desk runs".into());
            cfg
        }
        "ex3_convex" => example3(id, true, 100.0),
        "ex3_concave" => example3(id, false, 200.0),
        "ex4_iso" => example4(id, "isotropic"),
        "ex4_aniso" => example4(id, "l4"),
        "ex4_two_films" => {
            let films = vec![
                FilmSpec::OffsetBand { c_left: 2.0, c_right: 5.0, thickness: 0.5 },
                FilmSpec::OffsetBand { c_left: 12.0, c_right: 15.0, thickness: 0.5 },
            ];
            let sub = SubstrateSpec::Sin { amplitude: 3.0, wavenumber: std::f64::consts::TAU / 15.0 };
            let mut cfg = base(id, sub, films, 48, 1.0 / 64.0, 16.0);
            cfg.notes = Some("two 3x0.5 films on one period of the periodic substrate y = 3sin(2pi x/15); N = 48 per film, dt = 2^-6, T = 16".into());
            cfg
        }
        "ex5_corner" => {
            // left edge at x = -6 on the lower terrace, 60 along the substrate
            let c_left = -5.0 - std::f64::consts::FRAC_PI_2;
            let film = FilmSpec::StepFilm { c_left, c_right: c_left + 60.0, thickness: 2.0 };
            let mut cfg = base(id, SubstrateSpec::SmoothedCorner { radius: 1.0 }, vec![film], 192, 1.0 / 32.0, 240.0);
            cfg.output = Some(OutputConfig { snapshot_every: Some(32) });
            cfg.notes = Some("60x2 step film whose retracting edge starts at x = -6 below a step of height 2 made of two corner arcs of radius 1, so the edge reaches the corner near t = 100; the film top is the substrate raised by 2; N = 192, dt = 2^-5, T = 240".into());
            cfg
        }
        other => return Err(SsdError::UnknownPreset(other.into())),
    };
    Ok(cfg)
}
