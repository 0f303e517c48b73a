//! Run configuration: a JSON file merged with command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use ternary_stab::hyers::IterationSettings;
use ternary_stab::scenario::CatalogueOptions;
use ternary_stab::{ControlFunction, Shape, TrifParams};

use crate::error::CliError;

pub const DEFAULT_SAMPLES: usize = 200;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_RADIUS: f64 = 2.0;

/// Inputs for the `bound` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundGrid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default = "default_norms")]
    pub norms: Vec<f64>,
}

fn default_norms() -> Vec<f64> {
    vec![0.5, 1.0, 2.0]
}

impl Default for BoundGrid {
    fn default() -> Self {
        BoundGrid {
            eps: None,
            p: None,
            delta: None,
            norms: default_norms(),
        }
    }
}

/// Everything that determines a run. Output paths are not part of the
/// serialized echo or the hash.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_d")]
    pub d: usize,
    #[serde(default = "default_l")]
    pub l: usize,
    #[serde(default = "default_side")]
    pub rows: usize,
    #[serde(default = "default_side")]
    pub cols: usize,
    /// Catalogue scenario kind, e.g. `"constant_noise"`. `None` selects the
    /// whole catalogue where that makes sense.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<String>,
    /// Replaces the scenario's own control for defect domination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub control: Option<ControlFunction>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Gap tolerance of the iteration.
    #[serde(default = "default_iteration_tol")]
    pub iteration_tol: f64,
    /// Tolerance of the algebraic checks.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Noise amplitudes; defaults depend on `(d, l)` and the iteration settings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalogue: Option<CatalogueOptions>,
    #[serde(default)]
    pub bound_only: bool,
    #[serde(default)]
    pub bound: BoundGrid,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

fn default_d() -> usize {
    3
}
fn default_l() -> usize {
    2
}
fn default_side() -> usize {
    2
}
fn default_samples() -> usize {
    DEFAULT_SAMPLES
}
fn default_n_max() -> usize {
    ternary_stab::hyers::DEFAULT_N_MAX
}
fn default_iteration_tol() -> f64 {
    ternary_stab::hyers::DEFAULT_TOL
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Command-line values that override the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub d: Option<usize>,
    pub l: Option<usize>,
    pub rows: Option<usize>,
    pub cols: Option<usize>,
    pub scenario: Option<String>,
    pub control: Option<ControlFunction>,
    pub samples: Option<usize>,
    pub n_max: Option<usize>,
    pub tol: Option<f64>,
    pub bound_only: bool,
    pub eps: Option<f64>,
    pub p: Option<f64>,
    pub delta: Option<f64>,
    pub norms: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("bad config: {e}")))
    }

    pub fn apply(&mut self, o: Overrides) {
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = o.$f { self.$f = v; } )* };
        }
        set!(d, l, rows, cols, samples, n_max, tol);
        if o.seed.is_some() {
            self.seed = o.seed;
        }
        if o.scenario.is_some() {
            self.scenario = o.scenario;
        }
        if o.control.is_some() {
            self.control = o.control;
        }
        if o.out.is_some() {
            self.out = o.out;
        }
        self.bound_only |= o.bound_only;
        if o.eps.is_some() {
            self.bound.eps = o.eps;
        }
        if o.p.is_some() {
            self.bound.p = o.p;
        }
        if o.delta.is_some() {
            self.bound.delta = o.delta;
        }
        if let Some(n) = o.norms {
            self.bound.norms = n;
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::Input("a seed is required (config field `seed` or --seed)".into()))
    }

    pub fn shape(&self) -> Result<Shape, CliError> {
        Ok(Shape::new(self.rows, self.cols)?)
    }

    pub fn params(&self) -> Result<TrifParams, CliError> {
        Ok(TrifParams::new(self.d, self.l)?)
    }

    pub fn iteration(&self) -> IterationSettings {
        IterationSettings {
            n_max: self.n_max,
            tol: self.iteration_tol,
        }
    }

    pub fn catalogue_options(&self, p: &TrifParams) -> CatalogueOptions {
        self.catalogue
            .unwrap_or_else(|| CatalogueOptions::scaled_for(p, &self.iteration()))
    }

    /// Checks the fields every command relies on.
    pub fn validate(&self) -> Result<(), CliError> {
        self.seed()?;
        if self.samples == 0 {
            return Err(CliError::Input("samples must be positive".into()));
        }
        for (name, v) in [
            ("tol", self.tol),
            ("iteration_tol", self.iteration_tol),
            ("radius", self.radius),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Input(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if let Some(c) = &self.control {
            c.validate()?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON echo, hex encoded.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Parses `constant:DELTA`, `pnorm:EPS,P` or a JSON control descriptor.
pub fn parse_control(s: &str) -> Result<ControlFunction, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| format!("bad control JSON: {e}"));
    }
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:VALUES or JSON, got `{s}`"))?;
    let nums = rest
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number `{v}`: {e}"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let cf = match (kind, nums.as_slice()) {
        ("constant", [delta]) => ControlFunction::constant(*delta),
        ("pnorm", [eps, p]) => ControlFunction::pnorm(*eps, *p),
        _ => {
            return Err(format!(
                "unsupported control `{s}`; use constant:DELTA or pnorm:EPS,P"
            ))
        }
    };
    cf.validate().map_err(|e| e.to_string())?;
    Ok(cf)
}
