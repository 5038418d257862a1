//! Scenario configuration: a TOML document that fully determines a run.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::anisotropy::Anisotropy;
use crate::error::{Result, SsdError};
use crate::film::{build_initial_film, FilmSpec};
use crate::real::Real;
use crate::scheme::{SchemeState, SchemeVariant};
use crate::solver::{run, Model, RunResult, RunSpec, SolverParams};
use crate::substrate::{ArclengthCurve, Circle, Line, ReparamOptions, SmoothedCorner, Substrate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SubstrateSpec {
    /// The x-axis, film above.
    Line,
    /// Circle through the origin with tangent `e₁` there. Concave puts the
    /// film inside the circle, convex outside.
    Circle { radius: f64, convex: bool },
    /// `y = amplitude · cos(wavenumber · x)`.
    Cos { amplitude: f64, wavenumber: f64 },
    /// `y = amplitude · sin(wavenumber · x)`.
    Sin { amplitude: f64, wavenumber: f64 },
    /// A unit step rounded by a concave and a convex arc of `radius`.
    SmoothedCorner { radius: f64 },
}

impl SubstrateSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(SsdError::Config { field: format!("substrate.{field}"), message: format!("must be positive, got {v}") })
            }
        };
        match *self {
            Self::Line => Ok(()),
            Self::Circle { radius, .. } => positive("radius", radius),
            Self::Cos { amplitude, wavenumber } | Self::Sin { amplitude, wavenumber } => {
                positive("amplitude", amplitude)?;
                positive("wavenumber", wavenumber)
            }
            Self::SmoothedCorner { radius } => positive("radius", radius),
        }
    }

    pub fn build<T: Real>(&self) -> Result<Arc<dyn Substrate<T>>> {
        self.validate()?;
        let opts = ReparamOptions::default();
        Ok(match *self {
            Self::Line => Arc::new(Line::horizontal()),
            Self::Circle { radius, convex } => {
                let r = T::lit(radius);
                Arc::new(if convex { Circle::convex(r) } else { Circle::concave(r) })
            }
            Self::Cos { amplitude, wavenumber } => Arc::new(ArclengthCurve::cosine(T::lit(amplitude), T::lit(wavenumber), opts)?),
            Self::Sin { amplitude, wavenumber } => Arc::new(ArclengthCurve::sine(T::lit(amplitude), T::lit(wavenumber), opts)?),
            Self::SmoothedCorner { radius } => Arc::new(SmoothedCorner::new(T::lit(radius))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write a snapshot every this many steps; by default at most 500 per run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
}

fn default_sigma() -> f64 {
    -(3f64.sqrt()) / 2.0
}

fn default_eta() -> f64 {
    100.0
}

fn default_anisotropy() -> String {
    "isotropic".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Reconstruction assumptions, copied into the run metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    #[serde(default = "default_anisotropy")]
    pub anisotropy: String,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    /// Elements per film; give either this or `h = 1/n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub scheme: SchemeVariant,
    #[serde(default)]
    pub solver: SolverParams,
    pub substrate: SubstrateSpec,
    pub films: Vec<FilmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn field(name: &str, message: impl Into<String>) -> SsdError {
    SsdError::Config { field: name.into(), message: message.into() }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| {
            let path = e.span().map(|s| text[..s.start].lines().count()).map(|l| format!("line {l}"));
            field(&path.unwrap_or_else(|| "document".into()), e.message().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SsdError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()).map_err(|source| SsdError::Io { path: path.display().to_string(), source })
    }

    /// Element count per film, from `n` or `h`.
    pub fn elements(&self) -> Result<usize> {
        match (self.n, self.h) {
            (Some(n), None) => Ok(n),
            (None, Some(h)) => {
                let n = (1.0 / h).round();
                if !(h > 0.0) || ((1.0 / h) - n).abs() > 1e-9 * n {
                    return Err(field("h", format!("1/h must be an integer, got h = {h}")));
                }
                Ok(n as usize)
            }
            (Some(_), Some(_)) => Err(field("n", "give either n or h, not both")),
            (None, None) => Err(field("n", "one of n or h is required")),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(field("dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(field("t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if self.elements()? < 4 {
            return Err(field("n", format!("need at least 4 elements, got {}", self.elements()?)));
        }
        if !self.sigma.is_finite() {
            return Err(field("sigma", "must be finite"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(field("eta", format!("must be positive, got {}", self.eta)));
        }
        Anisotropy::<f64>::by_name(&self.anisotropy).map_err(|e| field("anisotropy", e.to_string()))?;
        self.solver.validate().map_err(|e| field("solver", e.to_string()))?;
        self.substrate.validate()?;
        if self.films.is_empty() {
            return Err(field("films", "at least one film is required"));
        }
        for f in &self.films {
            f.validate()?;
        }
        if let Some(OutputConfig { snapshot_every: Some(0) }) = self.output {
            return Err(field("output.snapshot_every", "must be at least 1"));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        crate::solver::step_count(self.dt, self.t_end)
    }

    pub fn snapshot_every(&self) -> usize {
        self.output
            .as_ref()
            .and_then(|o| o.snapshot_every)
            .unwrap_or_else(|| self.steps().div_ceil(500).max(1))
    }
}

/// Everything a run needs, built from a validated config.
pub struct Scenario<T: Real> {
    pub config: ScenarioConfig,
    pub substrate: Arc<dyn Substrate<T>>,
    pub anisotropy: Anisotropy<T>,
    pub films: Vec<SchemeState<T>>,
}

impl<T: Real> Scenario<T> {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let substrate = config.substrate.build::<T>()?;
        let anisotropy = Anisotropy::by_name(&config.anisotropy)?;
        let n = config.elements()?;
        let films = config
            .films
            .iter()
            .map(|f| build_initial_film(f, substrate.as_ref(), n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { config: config.clone(), substrate, anisotropy, films })
    }

    pub fn model(&self) -> Model<'_, T, dyn Substrate<T>> {
        Model {
            aniso: &self.anisotropy,
            sub: self.substrate.as_ref(),
            sigma: T::lit(self.config.sigma),
            eta: T::lit(self.config.eta),
            variant: self.config.scheme,
        }
    }

    /// Runs to `t_end`; `observer` sees the islands after every step.
    pub fn run_with(&self, observer: impl FnMut(usize, &[SchemeState<T>])) -> Result<RunResult<T>> {
        let spec = RunSpec {
            dt: T::lit(self.config.dt),
            t_end: T::lit(self.config.t_end),
            snapshot_every: self.config.snapshot_every(),
        };
        run(self.films.clone(), &self.model(), &spec, &self.config.solver, observer)
    }

    pub fn run(&self) -> Result<RunResult<T>> {
        self.run_with(|_, _| {})
    }
}
