//! Built-in and random windows for every transform.
//!
//! Finite groups use time-domain windows. Dilation groups use windows
//! defined by their spectrum, which vanishes near zero frequency so that
//! they are admissible.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::{Signal, C64};
use crate::transforms::{TransformKind, TransformSpec};
use crate::window_design::{minimizer_window, MinimizerFamily};

/// Built-in window names accepted by the CLI as `builtin:<name>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BuiltinWindow {
    Gaussian,
    Delta,
    Flat,
    Minimizer(usize),
}

impl FromStr for BuiltinWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix("builtin:").unwrap_or(s);
        match s {
            "gaussian" => Ok(BuiltinWindow::Gaussian),
            "delta" => Ok(BuiltinWindow::Delta),
            "flat" => Ok(BuiltinWindow::Flat),
            _ => {
                let n = s
                    .strip_prefix("minimizer(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|r| r.trim().parse::<usize>().ok())
                    .filter(|n| *n >= 1)
                    .ok_or_else(|| Error::Parse(format!("unknown builtin window {s:?}")))?;
                Ok(BuiltinWindow::Minimizer(n))
            }
        }
    }
}

impl fmt::Display for BuiltinWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuiltinWindow::Gaussian => write!(f, "builtin:gaussian"),
            BuiltinWindow::Delta => write!(f, "builtin:delta"),
            BuiltinWindow::Flat => write!(f, "builtin:flat"),
            BuiltinWindow::Minimizer(n) => write!(f, "builtin:minimizer({n})"),
        }
    }
}

/// Periodized discrete Gaussian `Σ_k exp(-π(x - kN)²/N)` on `Z/N`, centered at 0.
///
/// It is invariant under the unitary DFT, the finite analogue of the
/// Gaussian being its own Fourier transform.
pub fn periodized_gaussian(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..n)
        .map(|x| {
            (-6i64..=6)
                .map(|k| {
                    let d = x as f64 - k as f64 * nf;
                    (-PI * d * d / nf).exp()
                })
                .sum()
        })
        .collect()
}

/// Smooth bump `exp(-1/(1-u²))` on `(a, b)`.
pub fn smooth_bump(x: f64, a: f64, b: f64) -> f64 {
    let u = 2.0 * (x - a) / (b - a) - 1.0;
    if u.abs() < 1.0 {
        (-1.0 / (1.0 - u * u)).exp()
    } else {
        0.0
    }
}

fn omega_max(spec: &TransformSpec) -> f64 {
    spec.freq_space().axes()[0]
        .positions
        .iter()
        .fold(0.0, |m: f64, w| m.max(w.abs()))
}

fn unit(sig: Signal) -> Result<Signal> {
    Ok(sig.normalized()?.0)
}

fn from_spectrum(spec: &TransformSpec, f: impl Fn(&[f64]) -> C64) -> Result<Signal> {
    let fs = spec.freq_space().clone();
    let v: Vec<C64> = (0..fs.len()).map(|i| f(&fs.coords(i))).collect();
    unit(spec.from_freq(v)?)
}

/// A built-in window for a transform, normalized to unit norm.
pub fn builtin_window(spec: &TransformSpec, which: BuiltinWindow) -> Result<Signal> {
    let sp = spec.space.clone();
    let n = sp.len();
    match (spec.kind, which) {
        (TransformKind::Fstft | TransformKind::Finwave, BuiltinWindow::Gaussian) => {
            let g = periodized_gaussian(n);
            unit(Signal::new(sp, g.into_iter().map(|v| C64::new(v, 0.0)).collect())?)
        }
        (TransformKind::Fstft | TransformKind::Finwave, BuiltinWindow::Delta) => Ok(Signal::delta(sp, 0)),
        (TransformKind::Fstft, BuiltinWindow::Flat) => unit(Signal::from_fn(sp, |_| C64::new(1.0, 0.0))),
        (TransformKind::Finwave, BuiltinWindow::Flat) => {
            from_spectrum(spec, |k| C64::new(if k[0] == 0.0 { 0.0 } else { 1.0 }, 0.0))
        }
        (TransformKind::Wavelet1d | TransformKind::Shearlet, BuiltinWindow::Delta) => {
            let origin = sp.axes().iter().fold(0, |acc, a| acc * a.len() + a.len() / 2);
            let w0 = sp.weights()[0];
            Ok(Signal::delta(sp, origin).scaled(C64::new(1.0 / w0.sqrt(), 0.0)))
        }
        (TransformKind::Wavelet1d, BuiltinWindow::Gaussian) => {
            let wm = omega_max(spec);
            let (w0, s) = (0.5 * wm, wm / 16.0);
            from_spectrum(spec, |w| C64::new((-(w[0] - w0).powi(2) / (2.0 * s * s)).exp(), 0.0))
        }
        (TransformKind::Wavelet1d, BuiltinWindow::Flat) => {
            let wm = omega_max(spec);
            from_spectrum(spec, |w| {
                C64::new(if w[0] > 0.25 * wm && w[0] < 0.75 * wm { 1.0 } else { 0.0 }, 0.0)
            })
        }
        (TransformKind::Shearlet, BuiltinWindow::Gaussian) => {
            let wm = omega_max(spec);
            let (w0, s1, s2) = (0.5 * wm, wm / 16.0, wm / 8.0);
            from_spectrum(spec, |w| {
                C64::new(
                    (-(w[0] - w0).powi(2) / (2.0 * s1 * s1) - w[1] * w[1] / (2.0 * s2 * s2)).exp(),
                    0.0,
                )
            })
        }
        (TransformKind::Shearlet, BuiltinWindow::Flat) => {
            let wm = omega_max(spec);
            from_spectrum(spec, |w| {
                let inside = w[0] > 0.25 * wm && w[0] < 0.75 * wm && w[1].abs() < 0.25 * wm;
                C64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            })
        }
        (TransformKind::Wavelet1d, BuiltinWindow::Minimizer(k)) => {
            minimizer_window(&MinimizerFamily::default(), k, spec)
        }
        (_, BuiltinWindow::Minimizer(_)) => Err(Error::InvalidArgument(
            "the minimizer family is defined for the 1D wavelet transform".into(),
        )),
    }
}

/// A random smooth unit-norm admissible window.
///
/// Finite groups get random complex vectors. Dilation groups get compactly
/// supported spectral bumps on positive frequencies with a random position,
/// width, time shift and chirp.
pub fn random_window(spec: &TransformSpec, rng: &mut impl Rng) -> Result<Signal> {
    match spec.kind {
        TransformKind::Fstft | TransformKind::Finwave => {
            let v = (0..spec.space.len())
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            unit(Signal::new(spec.space.clone(), v)?)
        }
        TransformKind::Wavelet1d => {
            let wm = omega_max(spec);
            let a = rng.gen_range(0.15..0.35) * wm;
            let b = a + rng.gen_range(0.15..0.3) * wm;
            let t0 = rng.gen_range(-2.0..2.0);
            let beta = rng.gen_range(-0.5..0.5) / (b - a).powi(2);
            let c = 0.5 * (a + b);
            from_spectrum(spec, |w| {
                let phase = -w[0] * t0 + beta * (w[0] - c).powi(2);
                C64::from_polar(smooth_bump(w[0], a, b), phase)
            })
        }
        TransformKind::Shearlet => {
            let wm = omega_max(spec);
            let a = rng.gen_range(0.2..0.35) * wm;
            let b = a + rng.gen_range(0.2..0.35) * wm;
            let c2 = rng.gen_range(-0.1..0.1) * wm;
            let h2 = rng.gen_range(0.15..0.3) * wm;
            let (t1, t2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            from_spectrum(spec, |w| {
                let amp = smooth_bump(w[0], a, b) * smooth_bump(w[1], c2 - h2, c2 + h2);
                C64::from_polar(amp, -(w[0] * t1 + w[1] * t2))
            })
        }
    }
}

/// Project a finite-wavelet window onto `H₁ = {f̂(0) = 0}`.
pub fn remove_mean(spec: &TransformSpec, f: &Signal) -> Result<Signal> {
    let mut v = spec.to_freq(f)?;
    v[0] = C64::new(0.0, 0.0);
    spec.from_freq(v)
}
