//! Uncertainty-minimizing windows: the asymptotic minimizer family of the
//! 1D wavelet transform and a projected-gradient window optimizer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Signal, C64};
use crate::transforms::{TransformKind, TransformParams, TransformSpec};
use crate::windows::smooth_bump;

mod optimizer;

pub use optimizer::{
    apply_constraint, block_kinds, fd_gradient_check, objective_and_gradient, objective_value, optimize_window,
    ConvergenceStatus, GradientCheck, Objective, OptimizeResult, OptimizerConfig, SupportConstraint, TraceRow,
};

/// Twice-differentiable bump supported in `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Bump {
    /// Cubic B-spline mapped from `[-2, 2]` onto `[0, 1]`.
    #[default]
    CubicBSpline,
    /// `exp(-1/(1-u²))`, infinitely differentiable.
    Smooth,
}

impl Bump {
    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0 && x < 1.0) {
            return 0.0;
        }
        match self {
            Bump::CubicBSpline => cubic_bspline(4.0 * x - 2.0),
            Bump::Smooth => smooth_bump(x, 0.0, 1.0),
        }
    }
}

/// Centered cubic B-spline, supported on `[-2, 2]`.
pub fn cubic_bspline(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        2.0 / 3.0 - a * a + 0.5 * a * a * a
    } else if a < 2.0 {
        (2.0 - a).powi(3) / 6.0
    } else {
        0.0
    }
}

/// `f̂_n(ω) = n^{-1/2} bump((ω − κ(n))/n)` with `κ(n) = n^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizerFamily {
    pub bump: Bump,
    /// Exponent `p` of the frequency shift schedule `κ(n) = n^p`.
    pub kappa_exponent: f64,
}

impl Default for MinimizerFamily {
    fn default() -> Self {
        MinimizerFamily {
            bump: Bump::CubicBSpline,
            kappa_exponent: 2.0,
        }
    }
}

impl MinimizerFamily {
    pub fn kappa(&self, n: usize) -> f64 {
        (n as f64).powf(self.kappa_exponent)
    }

    /// Spectral support `(κ(n), κ(n) + n)`.
    pub fn support(&self, n: usize) -> (f64, f64) {
        let k = self.kappa(n);
        (k, k + n as f64)
    }
}

/// Unit-norm window `f_n` on a 1D wavelet spec.
pub fn minimizer_window(family: &MinimizerFamily, n: usize, spec: &TransformSpec) -> Result<Signal> {
    if spec.kind != TransformKind::Wavelet1d {
        return Err(Error::InvalidArgument(
            "minimizer windows live on the 1D wavelet grid".into(),
        ));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("minimizer index must be ≥ 1".into()));
    }
    let (lo, hi) = family.support(n);
    let w = &spec.freq_space().axes()[0].positions;
    let top = w.last().copied().unwrap_or(0.0);
    if hi > top {
        return Err(Error::OffGrid(format!(
            "support ({lo}, {hi}) exceeds the frequency grid (max {top:.3})"
        )));
    }
    let scale = 1.0 / (n as f64).sqrt();
    let v: Vec<C64> = w
        .iter()
        .map(|&x| C64::new(scale * family.bump.eval((x - lo) / n as f64), 0.0))
        .collect();
    Ok(spec.from_freq(v)?.normalized()?.0)
}

/// Wavelet spec with an `n_points` frequency grid covering the family up to `n_max`.
pub fn minimizer_spec(family: &MinimizerFamily, n_max: usize, n_points: usize) -> Result<TransformSpec> {
    let omega_max = 1.25 * family.support(n_max).1;
    TransformSpec::new(&TransformParams::Wavelet1d {
        n: n_points,
        omega_max,
        scale_min: 0.0,
        scale_max: 0.0,
        n_scales: 1,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizerRow {
    pub n: usize,
    pub e_t1: f64,
    pub e_t2: f64,
    pub var_t1: f64,
    pub var_t2: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub grid_points: usize,
    pub omega_max: f64,
    pub rows: Vec<MinimizerRow>,
    pub max_abs_e_t1: f64,
    pub var_t1_decreasing: bool,
    pub var_t2_decreasing: bool,
    pub e_t2_decreasing: bool,
}

/// Samples needed across the narrowest bump before moments are trusted.
const MIN_SAMPLES_PER_BUMP: f64 = 8.0;

/// Moments of `f_n` for every `n` and strict-monotonicity flags.
pub fn verify_minimizer(family: &MinimizerFamily, n_list: &[usize], n_points: usize) -> Result<MinimizerReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "n_list must be non-empty and strictly increasing".into(),
        ));
    }
    let n_max = *n_list.last().unwrap_or(&1);
    let spec = minimizer_spec(family, n_max, n_points)?;
    let dw = spec.freq_space().axes()[0].step().unwrap_or(1.0);
    if (n_list[0] as f64) / dw < MIN_SAMPLES_PER_BUMP {
        return Err(Error::OffGrid(format!(
            "grid too coarse: the bump for n = {} spans {:.1} frequency samples",
            n_list[0],
            n_list[0] as f64 / dw
        )));
    }
    let obs = &spec.observables.blocks;
    let mut rows = Vec::new();
    for &n in n_list {
        let f = minimizer_window(family, n, &spec)?;
        let m1 = obs[0].moments(&f)?;
        let m2 = obs[1].moments(&f)?;
        rows.push(MinimizerRow {
            n,
            e_t1: m1.e[0].re,
            e_t2: m2.e[0].re,
            var_t1: m1.cov[(0, 0)].re,
            var_t2: m2.cov[(0, 0)].re,
        });
    }
    let dec = |f: fn(&MinimizerRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    Ok(MinimizerReport {
        grid_points: n_points,
        omega_max: spec.freq_space().axes()[0].positions.last().copied().unwrap_or(0.0),
        max_abs_e_t1: rows.iter().map(|r| r.e_t1.abs()).fold(0.0, f64::max),
        var_t1_decreasing: dec(|r| r.var_t1),
        var_t2_decreasing: dec(|r| r.var_t2),
        e_t2_decreasing: dec(|r| r.e_t2),
        rows,
    })
}
