//! Interpolating change-of-variable maps: scale warp and slope transform.
//!
//! Both maps are defined by continuum formulas and realized with linear
//! interpolation, so norms and round trips hold to the documented accuracy
//! class of `1e-3` relative for smooth inputs, not to machine precision.

use std::sync::Arc;

use super::{interp_linear, Axis, AxisKind, DomainMap, SampledSpace, C64};
use crate::error::{Error, Result};

/// Scale warp `[W± f̂](c) = e^{-c/2} f̂(±e^{-c})` onto a uniform `c = -ln|ω|` grid.
#[derive(Debug)]
pub struct WarpMap {
    positive: bool,
    source: Arc<SampledSpace>,
    target: Arc<SampledSpace>,
    w0: f64,
    dw: f64,
    c0: f64,
    dc: f64,
}

impl WarpMap {
    /// `freq_axis` must be a half-offset uniform frequency axis of even length.
    /// The source space is its positive (or negative) half.
    pub fn new(freq_axis: &Axis, positive: bool, n_c: usize) -> Result<Self> {
        let (dw, n) = match freq_axis.kind {
            AxisKind::Uniform { step, offset } => {
                let n = freq_axis.len();
                if (offset - (-((n / 2) as f64) + 0.5)).abs() > 1e-12 || !n.is_multiple_of(2) {
                    return Err(Error::InvalidSpace(
                        "grid includes ω = 0; warping needs a half-offset frequency axis".into(),
                    ));
                }
                (step, n / 2)
            }
            _ => return Err(Error::InvalidSpace("warping needs a uniform frequency axis".into())),
        };
        if n_c < 2 {
            return Err(Error::InvalidArgument("warp grid needs at least 2 points".into()));
        }
        let half = if positive {
            Axis::uniform("w", n, 0.5, dw)
        } else {
            Axis::uniform("w", n, -(n as f64) + 0.5, dw)
        };
        let (w_min, w_max) = (0.5 * dw, (n as f64 - 0.5) * dw);
        let (c_lo, c_hi) = (-w_max.ln(), -w_min.ln());
        let dc = (c_hi - c_lo) / (n_c - 1) as f64;
        let c_axis = Axis::uniform("c", n_c, c_lo / dc, dc);
        let w0 = half.positions[0];
        Ok(WarpMap {
            positive,
            source: Arc::new(SampledSpace::new(vec![half])?),
            target: Arc::new(SampledSpace::new(vec![c_axis])?),
            w0,
            dw,
            c0: c_lo,
            dc,
        })
    }
}

impl DomainMap for WarpMap {
    fn name(&self) -> &str {
        if self.positive {
            "warp+"
        } else {
            "warp-"
        }
    }
    fn source(&self) -> &Arc<SampledSpace> {
        &self.source
    }
    fn target(&self) -> &Arc<SampledSpace> {
        &self.target
    }
    fn forward_values(&self, x: &[C64]) -> Vec<C64> {
        let sign = if self.positive { 1.0 } else { -1.0 };
        self.target.axes()[0]
            .positions
            .iter()
            .map(|&c| interp_linear(x, self.w0, self.dw, sign * (-c).exp()) * (-0.5 * c).exp())
            .collect()
    }
    fn inverse_values(&self, y: &[C64]) -> Vec<C64> {
        self.source.axes()[0]
            .positions
            .iter()
            .map(|&w| interp_linear(y, self.c0, self.dc, -w.abs().ln()) / w.abs().sqrt())
            .collect()
    }
    fn is_isometry(&self) -> bool {
        false
    }
    fn accuracy(&self) -> f64 {
        1e-3
    }
}

/// Slope transform `[Ψf](g₂, ω₁) = |ω₁|^{1/2} f̂(ω₁, -g₂ω₁)` on a uniform slope grid.
///
/// Source samples are ordered `(ω₁, ω₂)`, target samples `(g₂, ω₁)`.
#[derive(Debug)]
pub struct SlopeMap {
    source: Arc<SampledSpace>,
    target: Arc<SampledSpace>,
}

impl SlopeMap {
    pub fn new(freq2d: Arc<SampledSpace>, slope_max: f64, n_slopes: usize) -> Result<Self> {
        let axes = freq2d.axes();
        if axes.len() != 2 {
            return Err(Error::InvalidSpace("slope map needs a 2D frequency grid".into()));
        }
        if axes[0].positions.contains(&0.0) {
            return Err(Error::InvalidSpace("grid contains the ω₁ = 0 column".into()));
        }
        if axes.iter().any(|a| !matches!(a.kind, AxisKind::Uniform { .. })) {
            return Err(Error::InvalidSpace("slope map needs uniform frequency axes".into()));
        }
        if n_slopes < 2 || !(slope_max > 0.0) {
            return Err(Error::InvalidArgument(
                "slope grid needs ≥ 2 points and a positive range".into(),
            ));
        }
        let dg = 2.0 * slope_max / (n_slopes - 1) as f64;
        let g_axis = Axis::uniform("g2", n_slopes, -slope_max / dg, dg);
        let target = Arc::new(SampledSpace::new(vec![g_axis, axes[0].clone()])?);
        Ok(SlopeMap { source: freq2d, target })
    }
}

impl DomainMap for SlopeMap {
    fn name(&self) -> &str {
        "slope"
    }
    fn source(&self) -> &Arc<SampledSpace> {
        &self.source
    }
    fn target(&self) -> &Arc<SampledSpace> {
        &self.target
    }
    fn forward_values(&self, x: &[C64]) -> Vec<C64> {
        let w1 = &self.source.axes()[0].positions;
        let w2 = &self.source.axes()[1];
        let (y0, dy) = (w2.positions[0], w2.step().unwrap_or(1.0));
        let n2 = w2.len();
        let g = &self.target.axes()[0].positions;
        let mut out = Vec::with_capacity(g.len() * w1.len());
        for &gv in g {
            for (i, &w) in w1.iter().enumerate() {
                let row = &x[i * n2..(i + 1) * n2];
                out.push(interp_linear(row, y0, dy, -gv * w) * w.abs().sqrt());
            }
        }
        out
    }
    fn inverse_values(&self, y: &[C64]) -> Vec<C64> {
        let w1 = &self.source.axes()[0].positions;
        let w2 = &self.source.axes()[1].positions;
        let g_axis = &self.target.axes()[0];
        let (g0, dg) = (g_axis.positions[0], g_axis.step().unwrap_or(1.0));
        let n1 = w1.len();
        let mut out = Vec::with_capacity(n1 * w2.len());
        for (i, &a) in w1.iter().enumerate() {
            let column: Vec<C64> = (0..g_axis.len()).map(|k| y[k * n1 + i]).collect();
            for &b in w2 {
                out.push(interp_linear(&column, g0, dg, -b / a) / a.abs().sqrt());
            }
        }
        out
    }
    fn is_isometry(&self) -> bool {
        false
    }
    fn accuracy(&self) -> f64 {
        1e-3
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{interp_linear, Signal};

    /// Smooth bump supported on `(a, b)`.
    fn bump(x: f64, a: f64, b: f64) -> f64 {
        let u = 2.0 * (x - a) / (b - a) - 1.0;
        if u.abs() < 1.0 {
            (-1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }

    fn freq_axis() -> Axis {
        // Frequency axis of a 4096-point time grid with step 0.05.
        Axis::half_offset("w", 4096, 2.0 * std::f64::consts::PI / (4096.0 * 0.05))
    }

    fn warp_and_input(a: f64, b: f64, dil: f64) -> (WarpMap, Signal) {
        let map = WarpMap::new(&freq_axis(), true, 4096).unwrap();
        let sp = map.source().clone();
        let f = Signal::from_fn(sp, |w| C64::new((0.5 * dil).exp() * bump(w[0] * dil.exp(), a, b), 0.0));
        (map, f)
    }

    #[test]
    fn warp_maps_unit_interval_to_positive_scales() {
        let (map, f) = warp_and_input(0.2, 1.0, 0.0);
        let out = map.forward(&f).unwrap();
        let c = &map.target().axes()[0].positions;
        for (v, &cv) in out.values().iter().zip(c) {
            if cv < -1e-9 {
                assert!(v.norm() < 1e-12, "mass at c = {cv}");
            }
        }
        assert!(out.norm() > 0.5 * f.norm());
    }

    #[test]
    fn warp_is_isometric_within_accuracy_class() {
        let (map, f) = warp_and_input(1.0, 4.0, 0.0);
        let out = map.forward(&f).unwrap();
        assert!((out.norm() / f.norm() - 1.0).abs() < 1e-3);
        let back = map.inverse(&out).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-3 * f.norm());
    }

    #[test]
    fn warp_intertwines_dilation_with_translation() {
        let g2 = 0.6;
        let (map, f) = warp_and_input(1.0, 4.0, 0.0);
        let (_, fd) = warp_and_input(1.0, 4.0, g2);
        let wf = map.forward(&f).unwrap();
        let wfd = map.forward(&fd).unwrap();
        let c = &map.target().axes()[0];
        let (c0, dc) = (c.positions[0], c.step().unwrap());
        let shifted: Vec<C64> = c
            .positions
            .iter()
            .map(|&cv| interp_linear(wf.values(), c0, dc, cv - g2))
            .collect();
        let shifted = Signal::new(map.target().clone(), shifted).unwrap();
        assert!(shifted.distance(&wfd).unwrap() < 1e-3 * wf.norm());
    }

    #[test]
    fn warp_rejects_zero_frequency_grids() {
        let ax = Axis::uniform("w", 64, -32.0, 0.1);
        assert!(matches!(WarpMap::new(&ax, true, 64), Err(Error::InvalidSpace(_))));
    }

    fn freq2d() -> Arc<SampledSpace> {
        Arc::new(
            SampledSpace::new(vec![
                Axis::half_offset("w1", 512, 0.025),
                Axis::half_offset("w2", 512, 0.025),
            ])
            .unwrap(),
        )
    }

    fn sheared_bump(sp: &Arc<SampledSpace>, s: f64) -> Signal {
        Signal::from_fn(sp.clone(), |w| {
            C64::new(bump(w[0], 1.0, 3.0) * bump(w[1] + s * w[0], -1.0, 1.0), 0.0)
        })
    }

    #[test]
    fn slope_map_concentrates_lines_at_their_slope() {
        let sp = freq2d();
        let map = SlopeMap::new(sp.clone(), 1.5, 601).unwrap();
        let a = 0.7;
        let f = Signal::from_fn(sp, |w| {
            C64::new(bump(w[0], 1.0, 3.0) * bump(w[1] + a * w[0], -0.1, 0.1), 0.0)
        });
        let out = map.forward(&f).unwrap();
        let n1 = map.target().axes()[1].len();
        let g = &map.target().axes()[0].positions;
        let mass: Vec<f64> = (0..g.len())
            .map(|k| (0..n1).map(|i| out.values()[k * n1 + i].norm_sqr()).sum())
            .collect();
        let kmax = (0..g.len()).max_by(|&i, &j| mass[i].total_cmp(&mass[j])).unwrap();
        assert!((g[kmax] - a).abs() < 0.02, "peak at {}", g[kmax]);
    }

    #[test]
    fn slope_map_is_isometric_and_invertible_within_accuracy_class() {
        let sp = freq2d();
        let map = SlopeMap::new(sp.clone(), 1.5, 1201).unwrap();
        let f = sheared_bump(&sp, 0.0);
        let out = map.forward(&f).unwrap();
        assert!((out.norm() / f.norm() - 1.0).abs() < 1e-3);
        let back = map.inverse(&out).unwrap();
        assert!(back.distance(&f).unwrap() < 1e-3 * f.norm());
    }

    #[test]
    fn slope_map_intertwines_shear_with_translation() {
        let sp = freq2d();
        let map = SlopeMap::new(sp.clone(), 1.5, 1201).unwrap();
        let s = 0.3;
        let pf = map.forward(&sheared_bump(&sp, 0.0)).unwrap();
        let ps = map.forward(&sheared_bump(&sp, s)).unwrap();
        let g_axis = &map.target().axes()[0];
        let (g0, dg) = (g_axis.positions[0], g_axis.step().unwrap());
        let n1 = map.target().axes()[1].len();
        let mut shifted = vec![C64::new(0.0, 0.0); pf.values().len()];
        for i in 0..n1 {
            let column: Vec<C64> = (0..g_axis.len()).map(|k| pf.values()[k * n1 + i]).collect();
            for (k, &gv) in g_axis.positions.iter().enumerate() {
                shifted[k * n1 + i] = interp_linear(&column, g0, dg, gv - s);
            }
        }
        let shifted = Signal::new(map.target().clone(), shifted).unwrap();
        assert!(shifted.distance(&ps).unwrap() < 1e-3 * pf.norm());
    }

    #[test]
    fn slope_map_rejects_zero_column() {
        let sp = Arc::new(
            SampledSpace::new(vec![
                Axis::uniform("w1", 8, -4.0, 1.0),
                Axis::uniform("w2", 8, -4.0, 1.0),
            ])
            .unwrap(),
        );
        assert!(matches!(SlopeMap::new(sp, 1.0, 11), Err(Error::InvalidSpace(_))));
    }
}
