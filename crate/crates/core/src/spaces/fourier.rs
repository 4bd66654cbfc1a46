//! Unitary discrete Fourier map with per-axis sample offsets.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::{Axis, AxisKind, DomainMap, SampledSpace, C64};
use crate::error::{Error, Result};

/// Unitary DFT between a signal space and its frequency space.
///
/// Cyclic axes use the plain DFT `(1/√N) Σ_n x_n e^{-2πikn/N}`. Uniform axes of
/// even length map to angular frequencies `ω_j = (j - N/2 + ½)·2π/L`, so zero
/// frequency is never sampled, and the map
/// `f̂(ω_j) = √(Δt/Δω)/√N · Σ_n f(t_n) e^{-iω_j t_n}` is unitary for the
/// weighted inner products of both spaces.
pub struct FourierMap {
    source: Arc<SampledSpace>,
    target: Arc<SampledSpace>,
    plans: Vec<AxisPlan>,
}

struct AxisPlan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    pre_fwd: Vec<C64>,
    post_fwd: Vec<C64>,
    pre_inv: Vec<C64>,
    post_inv: Vec<C64>,
}

impl fmt::Debug for FourierMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierMap").field("dims", &self.source.dims()).finish()
    }
}

/// `e^{±2πi·num/n}` with the numerator reduced first for accuracy.
fn root(num: f64, n: usize, sign: f64) -> C64 {
    let r = num.rem_euclid(n as f64);
    C64::from_polar(1.0, sign * 2.0 * PI * r / n as f64)
}

impl FourierMap {
    pub fn new(source: Arc<SampledSpace>) -> Result<Self> {
        let mut planner = FftPlanner::new();
        let mut plans = Vec::new();
        let mut target_axes = Vec::new();
        for axis in source.axes() {
            let n = axis.len();
            let (alpha, beta, scale_f, scale_i, out_axis) = match axis.kind {
                AxisKind::Cyclic => {
                    let s = 1.0 / (n as f64).sqrt();
                    (0.0, 0.0, s, s, Axis::cyclic(&format!("k_{}", axis.name), n))
                }
                AxisKind::Uniform { offset, step } => {
                    if n % 2 != 0 {
                        return Err(Error::InvalidSpace(format!(
                            "uniform axis {} needs an even length for the half-offset frequency grid",
                            axis.name
                        )));
                    }
                    let dw = 2.0 * PI / (n as f64 * step);
                    let out = Axis::half_offset(&format!("w_{}", axis.name), n, dw);
                    let alpha = -((n / 2) as f64) + 0.5;
                    let sq = (n as f64).sqrt();
                    (alpha, offset, (step / dw).sqrt() / sq, (dw / step).sqrt() / sq, out)
                }
                AxisKind::Tabulated => {
                    return Err(Error::InvalidSpace(format!(
                        "axis {} is not uniform; the discrete Fourier map needs a uniform or cyclic grid",
                        axis.name
                    )))
                }
            };
            let ab = alpha * beta;
            plans.push(AxisPlan {
                fwd: planner.plan_fft_forward(n),
                inv: planner.plan_fft_inverse(n),
                pre_fwd: (0..n).map(|k| root(alpha * k as f64, n, -1.0)).collect(),
                post_fwd: (0..n).map(|j| root(j as f64 * beta + ab, n, -1.0) * scale_f).collect(),
                pre_inv: (0..n).map(|j| root(j as f64 * beta, n, 1.0)).collect(),
                post_inv: (0..n).map(|k| root(alpha * k as f64 + ab, n, 1.0) * scale_i).collect(),
            });
            target_axes.push(out_axis);
        }
        let target = Arc::new(SampledSpace::new(target_axes)?);
        Ok(FourierMap { source, target, plans })
    }

    fn apply(&self, x: &[C64], inverse: bool) -> Vec<C64> {
        let dims = self.source.dims();
        let mut data = x.to_vec();
        for (a, plan) in self.plans.iter().enumerate() {
            let n = dims[a];
            let inner: usize = dims[a + 1..].iter().product();
            let outer: usize = dims[..a].iter().product();
            let (pre, post, fft) = if inverse {
                (&plan.pre_inv, &plan.post_inv, &plan.inv)
            } else {
                (&plan.pre_fwd, &plan.post_fwd, &plan.fwd)
            };
            let mut buf = vec![C64::new(0.0, 0.0); n];
            let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
            for o in 0..outer {
                for i in 0..inner {
                    for k in 0..n {
                        buf[k] = data[(o * n + k) * inner + i] * pre[k];
                    }
                    fft.process_with_scratch(&mut buf, &mut scratch);
                    for k in 0..n {
                        data[(o * n + k) * inner + i] = buf[k] * post[k];
                    }
                }
            }
        }
        data
    }
}

impl DomainMap for FourierMap {
    fn name(&self) -> &str {
        "fourier"
    }
    fn source(&self) -> &Arc<SampledSpace> {
        &self.source
    }
    fn target(&self) -> &Arc<SampledSpace> {
        &self.target
    }
    fn forward_values(&self, x: &[C64]) -> Vec<C64> {
        self.apply(x, false)
    }
    fn inverse_values(&self, y: &[C64]) -> Vec<C64> {
        self.apply(y, true)
    }
    fn is_isometry(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{inner_product, Signal};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(space: &Arc<SampledSpace>, rng: &mut ChaCha8Rng) -> Signal {
        let v = (0..space.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Signal::new(space.clone(), v).unwrap()
    }

    #[test]
    fn delta_maps_to_constant_half() {
        let sp = Arc::new(SampledSpace::new(vec![Axis::cyclic("x", 4)]).unwrap());
        let f = FourierMap::new(sp.clone()).unwrap();
        let out = f.forward(&Signal::delta(sp, 0)).unwrap();
        for v in out.values() {
            assert!((v - C64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn round_trip_and_parseval_on_all_axis_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spaces = [
            SampledSpace::new(vec![Axis::cyclic("x", 17)]).unwrap(),
            SampledSpace::new(vec![Axis::centered("t", 64, 0.3)]).unwrap(),
            SampledSpace::new(vec![Axis::centered("x1", 8, 0.5), Axis::centered("x2", 12, 0.25)]).unwrap(),
        ];
        for sp in spaces {
            let sp = Arc::new(sp);
            let map = FourierMap::new(sp.clone()).unwrap();
            for _ in 0..5 {
                let f = random(&sp, &mut rng);
                let g = map.forward(&f).unwrap();
                assert!((g.norm() - f.norm()).abs() < 1e-12 * f.norm());
                let back = map.inverse(&g).unwrap();
                assert!(back.distance(&f).unwrap() < 1e-12 * f.norm());
            }
        }
    }

    #[test]
    fn uniform_axis_matches_direct_sum() {
        // Oracle: the defining sum evaluated term by term.
        let n = 10;
        let dt = 0.7;
        let sp = Arc::new(SampledSpace::new(vec![Axis::centered("t", n, dt)]).unwrap());
        let map = FourierMap::new(sp.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random(&sp, &mut rng);
        let got = map.forward(&f).unwrap();
        let dw = 2.0 * PI / (n as f64 * dt);
        let t = &sp.axes()[0].positions;
        let w = &map.target().axes()[0].positions;
        for (j, wj) in w.iter().enumerate() {
            let s: C64 = (0..n).map(|k| f.values()[k] * C64::from_polar(1.0, -wj * t[k])).sum();
            let expect = s * (dt / dw).sqrt() / (n as f64).sqrt();
            assert!((got.values()[j] - expect).norm() < 1e-12);
        }
        assert!(w.iter().all(|x| x.abs() > 0.4 * dw));
    }

    #[test]
    fn inner_products_are_preserved() {
        let sp = Arc::new(SampledSpace::new(vec![Axis::centered("t", 32, 0.2)]).unwrap());
        let map = FourierMap::new(sp.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (a, b) = (random(&sp, &mut rng), random(&sp, &mut rng));
        let lhs = inner_product(&a, &b).unwrap();
        let rhs = inner_product(&map.forward(&a).unwrap(), &map.forward(&b).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn tabulated_axis_is_rejected() {
        let ax = Axis::tabulated("c", vec![0.0, 1.0, 3.0], vec![1.0, 1.0, 1.0]).unwrap();
        let sp = Arc::new(SampledSpace::new(vec![ax]).unwrap());
        assert!(matches!(FourierMap::new(sp), Err(Error::InvalidSpace(_))));
    }
}
