//! Run configuration read from `--config <json>`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ambiguity::MpBenchConfig;
use crate::error::{Error, Result};
use crate::io::read_signal_csv;
use crate::spaces::Signal;
use crate::transforms::{params_for_name, TransformParams, TransformSpec};
use crate::uncertainty::{WeightConfig, WeightProfile};
use crate::window_design::{Objective, OptimizerConfig};
use crate::windows::{builtin_window, BuiltinWindow};

/// Overrides of the default grid parameters of the chosen transform.
/// Fields that do not apply to the transform are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridOverrides {
    pub n: Option<usize>,
    pub omega_max: Option<f64>,
    pub scale_min: Option<f64>,
    pub scale_max: Option<f64>,
    pub n_scales: Option<usize>,
    pub shear_max: Option<f64>,
    pub n_shears: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct DecayConfig {
    /// Observable block whose bound is scanned.
    pub block: usize,
    /// Direction for a self-adjoint block, the first axis by default.
    pub direction: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MinimizerConfig {
    pub n_list: Vec<usize>,
    /// Frequency-grid size of the 1D wavelet grid holding the family.
    pub grid_points: usize,
    /// Exponent `p` of the shift schedule `κ(n) = n^p`.
    pub kappa_exponent: f64,
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        MinimizerConfig {
            n_list: vec![4, 8, 16, 32],
            grid_points: 8192,
            kappa_exponent: 2.0,
        }
    }
}

/// Everything a command may need. Relative paths resolve against the
/// directory of the configuration file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `fstft`, `wavelet1d`, `shearlet` or `finwave`.
    pub transform: Option<String>,
    pub grid: GridOverrides,
    /// `builtin:gaussian`, `builtin:delta`, `builtin:flat`,
    /// `builtin:minimizer(n)` or a signal CSV path.
    pub window: Option<String>,
    pub weights: WeightConfig,
    /// Seed of every random choice; `--seed` takes precedence.
    pub seed: u64,
    /// Input signal CSV of `analyze`.
    pub signal: Option<PathBuf>,
    /// Input of `synthesize`: a phase-function CSV or a sparse JSON array.
    pub phase: Option<PathBuf>,
    pub objective: Objective,
    /// Also report the product of the global variances.
    pub product: bool,
    pub optimizer: OptimizerConfig,
    pub decay: DecayConfig,
    pub minimizer: MinimizerConfig,
    pub mp_bench: MpBenchConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Applies the command-line seed to every seeded component.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seed = s;
        }
        self.optimizer.seed = self.seed;
        self.mp_bench.seed = self.seed;
        self.mp_bench.optimizer.seed = self.seed;
        self
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn params(&self) -> Result<TransformParams> {
        let name = self
            .transform
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("the configuration needs a \"transform\"".into()))?;
        let mut p = params_for_name(name)?;
        let g = &self.grid;
        let reject = |field: &str| Error::InvalidArgument(format!("grid field {field:?} does not apply to {name}"));
        match &mut p {
            TransformParams::Fstft { n } | TransformParams::Finwave { n } => {
                for (f, set) in [
                    ("omega_max", g.omega_max.is_some()),
                    ("scale_min", g.scale_min.is_some()),
                    ("scale_max", g.scale_max.is_some()),
                    ("n_scales", g.n_scales.is_some()),
                    ("shear_max", g.shear_max.is_some()),
                    ("n_shears", g.n_shears.is_some()),
                ] {
                    if set {
                        return Err(reject(f));
                    }
                }
                *n = g.n.unwrap_or(*n);
            }
            TransformParams::Wavelet1d {
                n,
                omega_max,
                scale_min,
                scale_max,
                n_scales,
            } => {
                if g.shear_max.is_some() || g.n_shears.is_some() {
                    return Err(reject("shear_max/n_shears"));
                }
                *n = g.n.unwrap_or(*n);
                *omega_max = g.omega_max.unwrap_or(*omega_max);
                *scale_min = g.scale_min.unwrap_or(*scale_min);
                *scale_max = g.scale_max.unwrap_or(*scale_max);
                *n_scales = g.n_scales.unwrap_or(*n_scales);
            }
            TransformParams::Shearlet {
                n,
                omega_max,
                shear_max,
                n_shears,
                scale_min,
                scale_max,
                n_scales,
            } => {
                *n = g.n.unwrap_or(*n);
                *omega_max = g.omega_max.unwrap_or(*omega_max);
                *shear_max = g.shear_max.unwrap_or(*shear_max);
                *n_shears = g.n_shears.unwrap_or(*n_shears);
                *scale_min = g.scale_min.unwrap_or(*scale_min);
                *scale_max = g.scale_max.unwrap_or(*scale_max);
                *n_scales = g.n_scales.unwrap_or(*n_scales);
            }
        }
        Ok(p)
    }

    pub fn spec(&self) -> Result<TransformSpec> {
        TransformSpec::new(&self.params()?)
    }

    /// The window source, `builtin:gaussian` when none is configured.
    pub fn window_source(&self) -> &str {
        self.window.as_deref().unwrap_or("builtin:gaussian")
    }

    pub fn load_window(&self, spec: &TransformSpec) -> Result<Signal> {
        let src = self.window_source();
        if src.starts_with("builtin:") {
            builtin_window(spec, src.parse::<BuiltinWindow>()?)
        } else {
            read_signal_csv(&self.resolve(Path::new(src)), spec)
        }
    }

    pub fn weights(&self, spec: &TransformSpec) -> Result<WeightProfile> {
        WeightProfile::from_config(spec, &self.weights)
    }
}
