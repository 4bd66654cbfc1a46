//! The four built-in transforms: representations, phase-space grids,
//! analysis, synthesis and canonical observables.
//!
//! Every representation factors as `π(g) = π₁(g₁) π_tail(h)` where `π₁` is
//! translation on the signal grid and `π_tail` acts in the frequency domain
//! (modulation, dilation, shear or reflection). Translation is multiplication
//! by `e^{-iω·g₁}`, exact for every real `g₁`, so analysis over the
//! translation grid is one inverse FFT per tail element.

mod analysis;
mod builtins;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec};
use crate::observables::MultiObservable;
use crate::spaces::{interp_bilinear, interp_linear, AxisKind, DomainMap, FourierMap, SampledSpace, Signal, C64};

pub use analysis::{analyze, calibrate, cocycle, group_convolve, synthesize, translation_factor};
pub use builtins::{default_params, params_for_name};

/// Which of the four built-in transforms a spec realizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformKind {
    Fstft,
    Wavelet1d,
    Shearlet,
    Finwave,
}

impl TransformKind {
    pub fn name(&self) -> &'static str {
        match self {
            TransformKind::Fstft => "fstft",
            TransformKind::Wavelet1d => "wavelet1d",
            TransformKind::Shearlet => "shearlet",
            TransformKind::Finwave => "finwave",
        }
    }

    /// Whether the group is finite, so identities hold to machine precision.
    pub fn is_finite(&self) -> bool {
        matches!(self, TransformKind::Fstft | TransformKind::Finwave)
    }
}

/// Grid parameters of a transform, as accepted from configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum TransformParams {
    /// Finite STFT over `Z/n`.
    Fstft { n: usize },
    /// Finite wavelet transform over the prime field `Z/n`.
    Finwave { n: usize },
    /// 1D wavelet on `n` time samples with Nyquist frequency `omega_max`,
    /// log-dilations sampled uniformly in `[scale_min, scale_max]`.
    Wavelet1d {
        n: usize,
        omega_max: f64,
        scale_min: f64,
        scale_max: f64,
        n_scales: usize,
    },
    /// Shearlet on an `n × n` grid with Nyquist frequency `omega_max`,
    /// shears in `[-shear_max, shear_max]` and log-dilations in `[scale_min, scale_max]`.
    Shearlet {
        n: usize,
        omega_max: f64,
        shear_max: f64,
        n_shears: usize,
        scale_min: f64,
        scale_max: f64,
        n_scales: usize,
    },
}

/// Discretized cross-section `G_z`: translations on the signal grid times a
/// list of tail elements, with a Haar weight per point.
#[derive(Clone, Debug)]
pub struct PhaseGrid {
    /// Number of translation samples (the signal grid size).
    pub n_translations: usize,
    /// Measure of one translation cell.
    pub translation_weight: f64,
    /// Tail elements `h` (translation block zero).
    pub tails: Vec<GroupElement>,
    /// Haar density times cell size of every tail element.
    pub tail_weights: Vec<f64>,
}

impl PhaseGrid {
    pub fn len(&self) -> usize {
        self.n_translations * self.tails.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(tail index, translation index)` of a flat grid index.
    pub fn split(&self, index: usize) -> (usize, usize) {
        (index / self.n_translations, index % self.n_translations)
    }

    pub fn weight(&self, index: usize) -> f64 {
        self.translation_weight * self.tail_weights[index / self.n_translations]
    }
}

/// Complex values over a [`PhaseGrid`], tail-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseFunction {
    pub values: Vec<C64>,
}

impl PhaseFunction {
    pub fn zeros(len: usize) -> Self {
        PhaseFunction {
            values: vec![C64::new(0.0, 0.0); len],
        }
    }

    /// Weighted `L²(G)` norm.
    pub fn norm(&self, grid: &PhaseGrid) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v.norm_sqr() * grid.weight(i))
            .sum::<f64>()
            .sqrt()
    }
}

/// A fully built transform: group, signal space, phase grid, observables.
#[derive(Debug)]
pub struct TransformSpec {
    pub kind: TransformKind,
    pub params: TransformParams,
    pub group: GroupSpec,
    pub space: Arc<SampledSpace>,
    pub fourier: Arc<FourierMap>,
    pub grid: PhaseGrid,
    pub observables: MultiObservable,
    /// Duflo–Moore multiplier on the frequency grid.
    pub duflo_moore: Vec<f64>,
    /// Resolution-of-identity constant `c` of the continuum (or finite) group.
    pub nominal_constant: f64,
    /// Angular frequency of every frequency sample, per axis (row-major).
    freq_angles: Vec<Vec<f64>>,
    /// Cyclic axis lengths, `None` for uniform axes.
    cyclic: Vec<Option<usize>>,
}

impl TransformSpec {
    pub fn new(params: &TransformParams) -> Result<Self> {
        builtins::build(params)
    }

    pub fn name(&self) -> &'static str {
        self.kind.name()
    }

    pub fn freq_space(&self) -> &Arc<SampledSpace> {
        self.fourier.target()
    }

    /// Frequency-domain values of a signal.
    pub fn to_freq(&self, f: &Signal) -> Result<Vec<C64>> {
        Ok(self.fourier.forward(f)?.into_values())
    }

    /// Signal from frequency-domain values.
    pub fn from_freq(&self, v: Vec<C64>) -> Result<Signal> {
        self.fourier.inverse(&Signal::new(self.freq_space().clone(), v)?)
    }

    /// `F[π_tail(h) f]` from `F[f]`; the translation block of `h` is ignored.
    pub fn tail_freq(&self, h: &GroupElement, fhat: &[C64]) -> Vec<C64> {
        let fs = self.freq_space();
        let c = &h.coords;
        match self.kind {
            TransformKind::Fstft => {
                let n = fhat.len();
                let q = c[1][0] as usize;
                (0..n).map(|k| fhat[(k + n - q) % n]).collect()
            }
            TransformKind::Finwave => {
                let n = fhat.len() as u64;
                let a = self.group.automorphism_matrix(0, h)[(0, 0)] as u64;
                (0..n).map(|q| fhat[(a * q % n) as usize]).collect()
            }
            TransformKind::Wavelet1d => {
                let ax = &fs.axes()[0];
                let (w0, dw) = (ax.positions[0], ax.step().unwrap_or(1.0));
                let mut src = reflect(fhat, c[2][0] != 0.0);
                let t = phase_slope(&src, 1, 1, dw);
                demodulate(&mut src, &ax.positions, &[0.0], t, 0.0);
                let (g2, amp) = (c[1][0], (0.5 * c[1][0]).exp());
                ax.positions
                    .iter()
                    .map(|&w| {
                        let xi = g2.exp() * w;
                        interp_linear(&src, w0, dw, xi) * amp * C64::from_polar(1.0, -xi * t)
                    })
                    .collect()
            }
            TransformKind::Shearlet => {
                let (a1, a2) = (&fs.axes()[0], &fs.axes()[1]);
                let (s, a) = (c[1][0], c[2][0]);
                let (ea, eh, amp) = (a.exp(), (0.5 * a).exp(), (0.75 * a).exp());
                let n2 = a2.len();
                let x = (a1.positions[0], a1.step().unwrap_or(1.0));
                let y = (a2.positions[0], a2.step().unwrap_or(1.0));
                let mut src = reflect(fhat, c[3][0] != 0.0);
                let (t1, t2) = (phase_slope(&src, n2, a1.len(), x.1), phase_slope(&src, 1, n2, y.1));
                demodulate(&mut src, &a1.positions, &a2.positions, t1, t2);
                let mut out = Vec::with_capacity(fhat.len());
                for &w1 in &a1.positions {
                    for &w2 in &a2.positions {
                        let (xi1, xi2) = (ea * w1, eh * (s * w1 + w2));
                        let v = interp_bilinear(&src, n2, x, y, xi1, xi2);
                        out.push(v * amp * C64::from_polar(1.0, -(xi1 * t1 + xi2 * t2)));
                    }
                }
                out
            }
        }
    }

    /// Multiply frequency values by the translation phase `e^{-iω·g₁}`.
    pub fn translate_freq(&self, g1: &[f64], v: &mut [C64]) {
        let phases: Vec<Vec<C64>> = self
            .freq_angles
            .iter()
            .zip(&self.cyclic)
            .zip(g1)
            .map(|((ang, cyc), &g)| match cyc {
                Some(n) => (0..*n)
                    .map(|k| {
                        let r = ((k as f64) * g).rem_euclid(*n as f64);
                        C64::from_polar(1.0, -2.0 * PI * r / *n as f64)
                    })
                    .collect(),
                None => ang.iter().map(|w| C64::from_polar(1.0, -w * g)).collect(),
            })
            .collect();
        let dims: Vec<usize> = phases.iter().map(Vec::len).collect();
        for (i, x) in v.iter_mut().enumerate() {
            let mut rem = i;
            let mut ph = C64::new(1.0, 0.0);
            for a in (0..dims.len()).rev() {
                ph *= phases[a][rem % dims[a]];
                rem /= dims[a];
            }
            *x *= ph;
        }
    }

    /// `F[π(g) f]` from `F[f]`.
    pub fn rep_freq(&self, g: &GroupElement, fhat: &[C64]) -> Vec<C64> {
        let mut out = self.tail_freq(g, fhat);
        self.translate_freq(&g.coords[0], &mut out);
        out
    }

    /// Fraction of the energy of `F[f]` that `π_tail(g)` moves outside the
    /// frequency grid. Zero on finite groups, where every action permutes samples.
    pub fn off_grid_fraction(&self, g: &GroupElement, fhat: &[C64]) -> f64 {
        let fs = self.freq_space();
        let c = &g.coords;
        let bounds = |k: usize| {
            let p = &fs.axes()[k].positions;
            (p[0].min(p[p.len() - 1]), p[0].max(p[p.len() - 1]))
        };
        let inside = |x: f64, (lo, hi): (f64, f64)| x >= lo && x <= hi;
        // The output at ω reads the (reflected) input at the warped frequency,
        // so input energy at ξ lands at the inverse warp of ξ.
        let lands = |i: usize| -> bool {
            let xi = fs.coords(i);
            match self.kind {
                TransformKind::Fstft | TransformKind::Finwave => true,
                TransformKind::Wavelet1d => {
                    let xi = if c[2][0] != 0.0 { -xi[0] } else { xi[0] };
                    inside((-c[1][0]).exp() * xi, bounds(0))
                }
                TransformKind::Shearlet => {
                    let (x1, x2) = if c[3][0] != 0.0 {
                        (-xi[0], -xi[1])
                    } else {
                        (xi[0], xi[1])
                    };
                    let (s, a) = (c[1][0], c[2][0]);
                    let w1 = (-a).exp() * x1;
                    let w2 = (-0.5 * a).exp() * x2 - s * w1;
                    inside(w1, bounds(0)) && inside(w2, bounds(1))
                }
            }
        };
        let (mut lost, mut total) = (0.0, 0.0);
        for (i, v) in fhat.iter().enumerate() {
            let e = v.norm_sqr();
            total += e;
            if !lands(i) {
                lost += e;
            }
        }
        if total > 0.0 {
            lost / total
        } else {
            0.0
        }
    }

    /// `π(g) f`, rejecting parameters that push more than
    /// [`OFF_GRID_ENERGY`] of the window's energy off the frequency grid.
    pub fn rep_apply(&self, g: &GroupElement, f: &Signal) -> Result<Signal> {
        self.group.validate(g)?;
        let fhat = self.to_freq(f)?;
        let lost = self.off_grid_fraction(g, &fhat);
        if lost > OFF_GRID_ENERGY {
            return Err(Error::OffGrid(format!(
                "π(g) moves {lost:.2e} of the energy off the frequency grid; parameters exceed the grid"
            )));
        }
        self.from_freq(self.rep_freq(g, &fhat))
    }

    /// `A f` as a signal.
    pub fn duflo_moore_apply(&self, f: &Signal) -> Result<Signal> {
        let mut v = self.to_freq(f)?;
        for (x, a) in v.iter_mut().zip(&self.duflo_moore) {
            *x *= *a;
        }
        self.from_freq(v)
    }

    /// `‖A f‖`, rejecting windows whose spectrum does not vanish at the
    /// singularity of `A` (zero frequency for dilation groups).
    pub fn admissible_norm(&self, f: &Signal) -> Result<f64> {
        let v = self.to_freq(f)?;
        if matches!(self.kind, TransformKind::Wavelet1d | TransformKind::Shearlet) {
            let peak = v.iter().map(|x| x.norm_sqr()).fold(0.0, f64::max);
            let fs = self.freq_space();
            let n_inner = fs.axes()[0].len();
            let inner = fs.axes()[1..].iter().map(|a| a.len()).product::<usize>();
            let lo = n_inner / 2 - 1;
            let edge = (0..inner)
                .flat_map(|i| [lo * inner + i, (lo + 1) * inner + i])
                .map(|k| v[k].norm_sqr())
                .fold(0.0, f64::max);
            if peak == 0.0 || edge > 1e-12 * peak {
                return Err(Error::Inadmissible(
                    "spectrum does not vanish at zero frequency, so ‖Af‖ diverges".into(),
                ));
            }
        }
        let w = self.freq_space().weights();
        Ok(v.iter()
            .zip(&self.duflo_moore)
            .zip(w)
            .map(|((x, a), w)| (x * *a).norm_sqr() * w)
            .sum::<f64>()
            .sqrt())
    }

    /// Group element of a flat phase-grid index.
    pub fn grid_element(&self, index: usize) -> GroupElement {
        let (t, i) = self.grid.split(index);
        let mut g = self.grid.tails[t].clone();
        g.coords[0] = self.space.coords(i);
        g
    }

    /// Flat phase-grid index of a group element, if it lies on the grid.
    pub fn locate(&self, g: &GroupElement) -> Option<usize> {
        let tail = self.grid.tails.iter().position(|h| {
            h.coords[1..]
                .iter()
                .zip(&g.coords[1..])
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs())))
        })?;
        let mut idx = 0;
        for (a, axis) in self.space.axes().iter().enumerate() {
            let step = axis.step().unwrap_or(1.0);
            let x = g.coords[0][a];
            let k = match axis.kind {
                AxisKind::Cyclic => x,
                AxisKind::Uniform { offset, .. } => x / step - offset,
                AxisKind::Tabulated => return None,
            };
            let kr = k.round();
            if (k - kr).abs() > 1e-9 || kr < 0.0 || kr >= axis.len() as f64 {
                return None;
            }
            idx = idx * axis.len() + kr as usize;
        }
        Some(tail * self.grid.n_translations + idx)
    }

    /// Check that a phase function lives on this spec's grid.
    pub fn check_grid(&self, f: &PhaseFunction) -> Result<()> {
        if f.values.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "phase function has {} values, grid has {}",
                f.values.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Column names of the group coordinates, block by block.
    pub fn coordinate_names(&self) -> Vec<String> {
        self.group
            .blocks
            .iter()
            .flat_map(|b| {
                (0..b.size).map(move |k| {
                    if b.size == 1 {
                        b.name.clone()
                    } else {
                        format!("{}_{}", b.name, k + 1)
                    }
                })
            })
            .collect()
    }
}

/// Exact reflection `ω ↦ -ω` of a symmetric frequency grid (all axes).
fn reflect(v: &[C64], on: bool) -> Vec<C64> {
    if on {
        v.iter().rev().copied().collect()
    } else {
        v.to_vec()
    }
}

/// Time center `t` of the average linear phase `e^{-iωt}` along one axis of
/// a row-major spectrum: `stride` separates neighbours along the axis, which
/// has `len` samples spaced by `dw`.
fn phase_slope(v: &[C64], stride: usize, len: usize, dw: f64) -> f64 {
    let z: C64 = (0..v.len())
        .filter(|i| (i / stride) % len + 1 < len)
        .map(|i| v[i].conj() * v[i + stride])
        .sum();
    -z.arg() / dw
}

/// Multiplies a spectrum on the grid `w1 × w2` by `e^{i(w1 t1 + w2 t2)}`,
/// removing the linear phase of a time shift before interpolation. Warping
/// the smooth envelope and restoring the phase at the warped frequency is
/// far more accurate than interpolating the oscillating spectrum itself.
fn demodulate(v: &mut [C64], w1: &[f64], w2: &[f64], t1: f64, t2: f64) {
    let n2 = w2.len();
    for (i, x) in v.iter_mut().enumerate() {
        *x *= C64::from_polar(1.0, w1[i / n2] * t1 + w2[i % n2] * t2);
    }
}

/// Fraction of the energy of `π(g)f` allowed to leave the frequency grid.
pub const OFF_GRID_ENERGY: f64 = 1e-2;

/// Convenience: `rep_apply` for a spec.
pub fn rep_apply(spec: &TransformSpec, g: &GroupElement, f: &Signal) -> Result<Signal> {
    spec.rep_apply(g, f)
}

/// Convenience: `duflo_moore_apply` for a spec.
pub fn duflo_moore_apply(spec: &TransformSpec, f: &Signal) -> Result<Signal> {
    spec.duflo_moore_apply(f)
}

/// Convenience: the canonical multi-observable of a spec.
pub fn canonical_observables(spec: &TransformSpec) -> &MultiObservable {
    &spec.observables
}
