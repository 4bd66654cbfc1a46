//! Sampled signal spaces, weighted inner products and unitary domain maps.
//!
//! A [`SampledSpace`] is a finite product of axes. Every sample carries a
//! measure weight, so `L²` norms of continuum signals are approximated by
//! weighted sums and finite groups use unit weights.

mod fourier;
mod interp;
mod warp;

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fourier::FourierMap;
pub use interp::{interp_bilinear, interp_linear};
pub use warp::{SlopeMap, WarpMap};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// How positions along an axis are laid out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum AxisKind {
    /// `Z/N`, positions `0..N` with unit weights.
    Cyclic,
    /// Uniform grid with positions `(k + offset) * step` and weight `step`.
    Uniform { offset: f64, step: f64 },
    /// Arbitrary strictly increasing positions with explicit weights.
    Tabulated,
}

/// One axis of a sampled space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub kind: AxisKind,
    pub positions: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Axis {
    /// Cyclic axis `Z/N` with unit weights.
    pub fn cyclic(name: &str, n: usize) -> Self {
        Axis {
            name: name.to_string(),
            kind: AxisKind::Cyclic,
            positions: (0..n).map(|k| k as f64).collect(),
            weights: vec![1.0; n],
        }
    }

    /// Uniform axis with positions `(k + offset) * step`, `k = 0..n`.
    pub fn uniform(name: &str, n: usize, offset: f64, step: f64) -> Self {
        Axis {
            name: name.to_string(),
            kind: AxisKind::Uniform { offset, step },
            positions: (0..n).map(|k| (k as f64 + offset) * step).collect(),
            weights: vec![step; n],
        }
    }

    /// Periodic time grid of length `n * step` centered at zero.
    pub fn centered(name: &str, n: usize, step: f64) -> Self {
        Self::uniform(name, n, -((n / 2) as f64), step)
    }

    /// Frequency grid shifted by half a sample so that zero is never sampled.
    pub fn half_offset(name: &str, n: usize, step: f64) -> Self {
        Self::uniform(name, n, -((n / 2) as f64) + 0.5, step)
    }

    /// Axis with explicit positions and weights.
    pub fn tabulated(name: &str, positions: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let axis = Axis {
            name: name.to_string(),
            kind: AxisKind::Tabulated,
            positions,
            weights,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Grid spacing of a uniform axis (1 for cyclic axes).
    pub fn step(&self) -> Option<f64> {
        match self.kind {
            AxisKind::Cyclic => Some(1.0),
            AxisKind::Uniform { step, .. } => Some(step),
            AxisKind::Tabulated => None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::InvalidSpace(format!("axis {} is empty", self.name)));
        }
        if self.positions.len() != self.weights.len() {
            return Err(Error::InvalidSpace(format!(
                "axis {}: {} positions but {} weights",
                self.name,
                self.positions.len(),
                self.weights.len()
            )));
        }
        if let Some(w) = self.weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidSpace(format!(
                "axis {} has non-positive weight {w}",
                self.name
            )));
        }
        if self.positions.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::InvalidSpace(format!(
                "axis {} positions are not strictly increasing",
                self.name
            )));
        }
        Ok(())
    }
}

/// Finite inner-product space modeling `L²(X)` on a product grid.
///
/// Samples are stored in row-major order: the last axis varies fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledSpace {
    axes: Vec<Axis>,
    weights: Vec<f64>,
}

impl SampledSpace {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidSpace("space needs at least one axis".into()));
        }
        for a in &axes {
            a.validate()?;
        }
        let mut weights = vec![1.0];
        for a in &axes {
            let mut next = Vec::with_capacity(weights.len() * a.len());
            for w in &weights {
                for aw in &a.weights {
                    next.push(w * aw);
                }
            }
            weights = next;
        }
        Ok(SampledSpace { axes, weights })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dims(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::len).collect()
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Measure weight of every sample, row-major.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Coordinates of the flat sample index along every axis.
    pub fn coords(&self, index: usize) -> Vec<f64> {
        let mut rem = index;
        let mut out = vec![0.0; self.axes.len()];
        for (a, axis) in self.axes.iter().enumerate().rev() {
            let n = axis.len();
            out[a] = axis.positions[rem % n];
            rem /= n;
        }
        out
    }

    /// Position of every sample along one axis, row-major.
    pub fn axis_positions(&self, axis: usize) -> Vec<f64> {
        let dims = self.dims();
        let inner: usize = dims[axis + 1..].iter().product();
        let n = dims[axis];
        (0..self.len())
            .map(|i| self.axes[axis].positions[(i / inner) % n])
            .collect()
    }

    /// Structural equality shortcut used by operations with a same-space precondition.
    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other) || **self == **other
    }
}

/// A complex coefficient vector living in a [`SampledSpace`].
#[derive(Clone, Debug)]
pub struct Signal {
    space: Arc<SampledSpace>,
    values: Vec<C64>,
}

impl Signal {
    pub fn new(space: Arc<SampledSpace>, values: Vec<C64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::SpaceMismatch(format!(
                "signal has {} values but space has {} samples",
                values.len(),
                space.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidArgument("signal has non-finite values".into()));
        }
        Ok(Signal { space, values })
    }

    pub fn zeros(space: Arc<SampledSpace>) -> Self {
        let n = space.len();
        Signal {
            space,
            values: vec![C64::new(0.0, 0.0); n],
        }
    }

    /// Unit-weight delta at a flat index.
    pub fn delta(space: Arc<SampledSpace>, index: usize) -> Self {
        let mut s = Self::zeros(space);
        s.values[index] = C64::new(1.0, 0.0);
        s
    }

    pub fn from_fn(space: Arc<SampledSpace>, f: impl Fn(&[f64]) -> C64) -> Self {
        let values = (0..space.len()).map(|i| f(&space.coords(i))).collect();
        Signal { space, values }
    }

    pub fn space(&self) -> &Arc<SampledSpace> {
        &self.space
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values
            .iter()
            .zip(self.space.weights())
            .map(|(v, w)| w * v.norm_sqr())
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Unit-norm copy together with the original norm.
    pub fn normalized(&self) -> Result<(Signal, f64)> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument("cannot normalize a zero signal".into()));
        }
        Ok((self.scaled(C64::new(1.0 / n, 0.0)), n))
    }

    pub fn scaled(&self, c: C64) -> Signal {
        Signal {
            space: self.space.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: C64, other: &Signal) -> Result<Signal> {
        check_same(&self.space, &other.space)?;
        Ok(Signal {
            space: self.space.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + c * b).collect(),
        })
    }

    /// Weighted norm of the difference.
    pub fn distance(&self, other: &Signal) -> Result<f64> {
        Ok(self.axpy(C64::new(-1.0, 0.0), other)?.norm())
    }
}

pub(crate) fn check_same(a: &Arc<SampledSpace>, b: &Arc<SampledSpace>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::SpaceMismatch(format!("dims {:?} vs {:?}", a.dims(), b.dims())))
    }
}

/// Weighted inner product `⟨f, h⟩ = Σ_k w_k f_k conj(h_k)`.
pub fn inner_product(f: &Signal, h: &Signal) -> Result<C64> {
    check_same(&f.space, &h.space)?;
    Ok(f.values
        .iter()
        .zip(&h.values)
        .zip(f.space.weights())
        .map(|((a, b), w)| a * b.conj() * *w)
        .sum())
}

/// A linear map between two sampled spaces, used to reach the domain in
/// which an observable acts as a multiplier.
pub trait DomainMap: Send + Sync + std::fmt::Debug {
    fn name(&self) -> &str;
    fn source(&self) -> &Arc<SampledSpace>;
    fn target(&self) -> &Arc<SampledSpace>;
    /// Apply the map to raw coefficients of the source space.
    fn forward_values(&self, x: &[C64]) -> Vec<C64>;
    /// Apply the inverse map to raw coefficients of the target space.
    fn inverse_values(&self, y: &[C64]) -> Vec<C64>;
    /// Whether the map is unitary up to floating point error.
    fn is_isometry(&self) -> bool;
    /// Relative accuracy class of round trips and norm preservation.
    fn accuracy(&self) -> f64 {
        1e-9
    }

    fn forward(&self, f: &Signal) -> Result<Signal> {
        check_same(f.space(), self.source())?;
        Ok(Signal {
            space: self.target().clone(),
            values: self.forward_values(f.values()),
        })
    }

    fn inverse(&self, f: &Signal) -> Result<Signal> {
        check_same(f.space(), self.target())?;
        Ok(Signal {
            space: self.source().clone(),
            values: self.inverse_values(f.values()),
        })
    }
}

/// The identity map of a space.
#[derive(Debug)]
pub struct IdentityMap {
    space: Arc<SampledSpace>,
}

impl IdentityMap {
    pub fn new(space: Arc<SampledSpace>) -> Self {
        IdentityMap { space }
    }
}

impl DomainMap for IdentityMap {
    fn name(&self) -> &str {
        "identity"
    }
    fn source(&self) -> &Arc<SampledSpace> {
        &self.space
    }
    fn target(&self) -> &Arc<SampledSpace> {
        &self.space
    }
    fn forward_values(&self, x: &[C64]) -> Vec<C64> {
        x.to_vec()
    }
    fn inverse_values(&self, y: &[C64]) -> Vec<C64> {
        y.to_vec()
    }
    fn is_isometry(&self) -> bool {
        true
    }
}

/// Unitary discrete Fourier map of a space (see [`FourierMap`]).
pub fn dft_map(space: Arc<SampledSpace>) -> Result<FourierMap> {
    FourierMap::new(space)
}

/// Scale warp `[W± f̂](c) = e^{-c/2} f̂(±e^{-c})` from one half of a frequency axis.
pub fn warping_map_scale(freq_axis: &Axis, positive: bool, n_c: usize) -> Result<WarpMap> {
    WarpMap::new(freq_axis, positive, n_c)
}

/// Slope transform `[Ψf](g₂, ω₁) = |ω₁|^{1/2} f̂(ω₁, -g₂ω₁)` on a 2D frequency grid.
pub fn slope_map(freq2d: Arc<SampledSpace>, slope_max: f64, n_slopes: usize) -> Result<SlopeMap> {
    SlopeMap::new(freq2d, slope_max, n_slopes)
}
