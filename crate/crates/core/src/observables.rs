//! Observables realized as multipliers behind a domain map, and their moments.
//!
//! Every observable `T̆` is `U⁻¹ M U` for a domain map `U` and a multiplier
//! `M`. For a unit vector `f` with mapped density `P = w |Uf|²`, the
//! expected value is `e = Σ M P` and the covariance of a block of commuting
//! observables is `Cov_kk' = Σ (M_k − e_k) conj(M_k' − e_k') P`.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, GroupSpec, QuantityKind};
use crate::spaces::{check_same, DomainMap, Signal, C64};

/// Eigenvalue tolerance below which a weight matrix is rejected as not PSD.
pub const PSD_TOLERANCE: f64 = -1e-10;

/// Self-adjoint observables have real multipliers, unitary ones unimodular multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObservableKind {
    SelfAdjoint,
    Unitary,
}

impl ObservableKind {
    pub fn of(quantity: QuantityKind) -> Self {
        if quantity.is_self_adjoint() {
            ObservableKind::SelfAdjoint
        } else {
            ObservableKind::Unitary
        }
    }
}

/// A single observable `U⁻¹ M U`.
#[derive(Clone, Debug)]
pub struct Observable {
    pub name: String,
    pub kind: ObservableKind,
    pub map: Arc<dyn DomainMap>,
    pub multiplier: Vec<C64>,
}

impl Observable {
    pub fn new(name: &str, kind: ObservableKind, map: Arc<dyn DomainMap>, multiplier: Vec<C64>) -> Result<Self> {
        if multiplier.len() != map.target().len() {
            return Err(Error::SpaceMismatch(format!(
                "multiplier has {} values, mapped space has {}",
                multiplier.len(),
                map.target().len()
            )));
        }
        let ok = match kind {
            ObservableKind::SelfAdjoint => multiplier.iter().all(|m| m.im == 0.0 && m.re.is_finite()),
            ObservableKind::Unitary => multiplier.iter().all(|m| (m.norm() - 1.0).abs() < 1e-12),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "multiplier of {name} violates the {kind:?} invariant"
            )));
        }
        Ok(Observable {
            name: name.to_string(),
            kind,
            map,
            multiplier,
        })
    }

    /// Apply the observable to a signal: `U⁻¹ M U f`.
    pub fn apply(&self, f: &Signal) -> Result<Signal> {
        let mut y = self.map.forward(f)?;
        for (v, m) in y.values_mut().iter_mut().zip(&self.multiplier) {
            *v *= m;
        }
        self.map.inverse(&y)
    }
}

/// Probability density of `f/‖f‖` in the mapped domain, with the norm of `f`.
pub fn mapped_density(map: &dyn DomainMap, f: &Signal) -> Result<(Vec<f64>, f64)> {
    check_same(f.space(), map.source())?;
    let y = map.forward_values(f.values());
    let w = map.target().weights();
    let p: Vec<f64> = y.iter().zip(w).map(|(v, w)| w * v.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidArgument("cannot take moments of a zero signal".into()));
    }
    Ok((p.iter().map(|v| v / total).collect(), total.sqrt()))
}

fn weighted_mean(m: &[C64], p: &[f64]) -> C64 {
    m.iter().zip(p).map(|(m, p)| m * *p).sum()
}

/// `e_f(T̆) = ⟨T̆f, f⟩` for `f` normalized internally.
pub fn expected_value(f: &Signal, t: &Observable) -> Result<C64> {
    let (p, _) = mapped_density(t.map.as_ref(), f)?;
    let e = weighted_mean(&t.multiplier, &p);
    Ok(match t.kind {
        ObservableKind::SelfAdjoint => C64::new(e.re, 0.0),
        ObservableKind::Unitary => e,
    })
}

/// `σ_f(T̆) = ‖(T̆ − e)f‖²` for `f` normalized internally.
pub fn variance(f: &Signal, t: &Observable) -> Result<f64> {
    let (p, _) = mapped_density(t.map.as_ref(), f)?;
    let e = weighted_mean(&t.multiplier, &p);
    Ok(t.multiplier.iter().zip(&p).map(|(m, p)| (m - e).norm_sqr() * p).sum())
}

/// `K_m` commuting observables sharing one domain map, measuring one block.
#[derive(Clone, Debug)]
pub struct ObservableBlock {
    pub name: String,
    pub quantity: QuantityKind,
    pub map: Arc<dyn DomainMap>,
    pub names: Vec<String>,
    pub multipliers: Vec<Vec<C64>>,
}

impl ObservableBlock {
    pub fn new(
        name: &str,
        quantity: QuantityKind,
        map: Arc<dyn DomainMap>,
        entries: Vec<(String, Vec<C64>)>,
    ) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument(format!("block {name} has no observables")));
        }
        let kind = ObservableKind::of(quantity);
        for (n, m) in &entries {
            Observable::new(n, kind, map.clone(), m.clone())?;
        }
        let (names, multipliers) = entries.into_iter().unzip();
        Ok(ObservableBlock {
            name: name.to_string(),
            quantity,
            map,
            names,
            multipliers,
        })
    }

    pub fn kind(&self) -> ObservableKind {
        ObservableKind::of(self.quantity)
    }

    pub fn size(&self) -> usize {
        self.multipliers.len()
    }

    /// The `k`-th entry as a standalone observable.
    pub fn observable(&self, k: usize) -> Observable {
        Observable {
            name: self.names[k].clone(),
            kind: self.kind(),
            map: self.map.clone(),
            multiplier: self.multipliers[k].clone(),
        }
    }

    /// Expected values and covariance matrix of the block.
    pub fn moments(&self, f: &Signal) -> Result<BlockMoments> {
        let (p, scale) = mapped_density(self.map.as_ref(), f)?;
        Ok(self.moments_from_density(&p, scale))
    }

    pub fn moments_from_density(&self, p: &[f64], scale: f64) -> BlockMoments {
        let k = self.size();
        let sa = self.kind() == ObservableKind::SelfAdjoint;
        let e: Vec<C64> = self
            .multipliers
            .iter()
            .map(|m| {
                let v = weighted_mean(m, p);
                if sa {
                    C64::new(v.re, 0.0)
                } else {
                    v
                }
            })
            .collect();
        let mut cov = DMatrix::from_element(k, k, C64::new(0.0, 0.0));
        for a in 0..k {
            for b in a..k {
                let v: C64 = (0..p.len())
                    .map(|i| (self.multipliers[a][i] - e[a]) * (self.multipliers[b][i] - e[b]).conj() * p[i])
                    .sum();
                cov[(a, b)] = v;
                cov[(b, a)] = v.conj();
            }
            cov[(a, a)].im = 0.0;
        }
        BlockMoments { e, cov, scale }
    }

    /// The combined observable `Σ_k w_k T̆^k` of the block.
    pub fn combination(&self, w: &[C64]) -> Vec<C64> {
        (0..self.multipliers[0].len())
            .map(|i| w.iter().zip(&self.multipliers).map(|(w, m)| w * m[i]).sum())
            .collect()
    }
}

/// Moments of one block for a normalized window.
#[derive(Clone, Debug)]
pub struct BlockMoments {
    /// Expected value of every entry.
    pub e: Vec<C64>,
    /// `Cov_kk' = ⟨(T̆^k − e^k)f, (T̆^{k'} − e^{k'})f⟩`.
    pub cov: DMatrix<C64>,
    /// Norm of the window before normalization.
    pub scale: f64,
}

/// A multi-observable: one [`ObservableBlock`] per group block.
#[derive(Clone, Debug)]
pub struct MultiObservable {
    pub blocks: Vec<ObservableBlock>,
}

impl MultiObservable {
    /// Moments of every block.
    pub fn moments(&self, f: &Signal) -> Result<Vec<BlockMoments>> {
        self.blocks.iter().map(|b| b.moments(f)).collect()
    }
}

/// Multi-covariance matrix of a block.
pub fn covariance_matrix(f: &Signal, block: &ObservableBlock) -> Result<DMatrix<C64>> {
    Ok(block.moments(f)?.cov)
}

/// Directional variance `‖Σ_k w_k (T̆^k − e^k) f‖² = Σ w_k conj(w_k') Cov_kk'`.
pub fn directional_variance(f: &Signal, block: &ObservableBlock, w: &[C64]) -> Result<f64> {
    if w.len() != block.size() {
        return Err(Error::InvalidArgument(format!(
            "direction has {} entries, block has {}",
            w.len(),
            block.size()
        )));
    }
    if w.iter().all(|v| v.norm() == 0.0) {
        return Err(Error::InvalidArgument("zero direction".into()));
    }
    let cov = covariance_matrix(f, block)?;
    Ok(directional_from_cov(&cov, w))
}

pub fn directional_from_cov(cov: &DMatrix<C64>, w: &[C64]) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for a in 0..w.len() {
        for b in 0..w.len() {
            s += w[a] * w[b].conj() * cov[(a, b)];
        }
    }
    s.re.max(0.0)
}

/// Rejects weight matrices that are not Hermitian positive semidefinite.
pub fn check_psd(w: &DMatrix<C64>) -> Result<()> {
    if !w.is_square() {
        return Err(Error::InvalidArgument("weight matrix must be square".into()));
    }
    let n = w.nrows();
    for a in 0..n {
        for b in 0..n {
            if (w[(a, b)] - w[(b, a)].conj()).norm() > 1e-12 * (1.0 + w[(a, b)].norm()) {
                return Err(Error::InvalidArgument("weight matrix is not Hermitian".into()));
            }
        }
    }
    let min = w
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < PSD_TOLERANCE {
        return Err(Error::NotPsd(min));
    }
    Ok(())
}

/// `σ^W = Σ_kk' W_kk' Cov_kk'`, which reduces to the directional variance for `W = w w*`.
pub fn scalar_from_cov(cov: &DMatrix<C64>, w: &DMatrix<C64>) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for a in 0..cov.nrows() {
        for b in 0..cov.ncols() {
            s += w[(a, b)] * cov[(a, b)];
        }
    }
    s.re.max(0.0)
}

/// Scalar variance of a block for a PSD weight matrix.
pub fn scalar_variance(f: &Signal, block: &ObservableBlock, w: &DMatrix<C64>) -> Result<f64> {
    check_psd(w)?;
    if w.nrows() != block.size() {
        return Err(Error::InvalidArgument(format!(
            "weight matrix is {}×{}, block has {} entries",
            w.nrows(),
            w.ncols(),
            block.size()
        )));
    }
    Ok(scalar_from_cov(&covariance_matrix(f, block)?, w))
}

/// Projection `Λ(e)` onto the quantity's value set, as a group coordinate.
pub fn projected_expected_value(quantity: QuantityKind, e: C64) -> Result<f64> {
    quantity.project(e)
}

/// `π(g)* T̆_m π(g) = g_m • A_m(h_m) T̆_m` as a new block on the same domain.
///
/// Self-adjoint multipliers map as `t ↦ g_m + A t`. Unitary multipliers map
/// as `z ↦ value(g_m) · Π_k' z_k'^{A_kk'}`, the exponent action of an integer
/// matrix on unimodular values.
pub fn conjugate_block(
    spec: &GroupSpec,
    m: usize,
    block: &ObservableBlock,
    g: &GroupElement,
) -> Result<ObservableBlock> {
    spec.validate(g)?;
    if spec.blocks[m].size != block.size() || spec.blocks[m].kind != block.quantity {
        return Err(Error::InvalidArgument(format!(
            "no commutation action of group block {m} on observable block {}",
            block.name
        )));
    }
    let a = spec.automorphism_matrix(m, g);
    let k = block.size();
    let npts = block.multipliers[0].len();
    let gm = &g.coords[m];
    let multipliers: Vec<Vec<C64>> = (0..k)
        .map(|r| {
            (0..npts)
                .map(|i| match block.kind() {
                    ObservableKind::SelfAdjoint => {
                        let t: f64 = (0..k).map(|c| a[(r, c)] * block.multipliers[c][i].re).sum();
                        C64::new(gm[r] + t, 0.0)
                    }
                    ObservableKind::Unitary => {
                        let phase: f64 = (0..k).map(|c| a[(r, c)] * block.multipliers[c][i].arg()).sum();
                        block.quantity.value(gm[r]) * C64::from_polar(1.0, phase)
                    }
                })
                .collect()
        })
        .collect();
    Ok(ObservableBlock {
        name: format!("{}^g", block.name),
        quantity: block.quantity,
        map: block.map.clone(),
        names: block.names.clone(),
        multipliers,
    })
}

/// Moments of every block of a multi-observable for one window.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockReport {
    pub name: String,
    /// Expected values as `[re, im]` pairs.
    pub e: Vec<C64>,
    /// Projected expected values as group coordinates, absent when undefined.
    #[serde(rename = "E")]
    pub projected: Option<Vec<f64>>,
    /// Covariance matrix, row-major.
    pub cov: Vec<C64>,
    pub scalar_variances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LocalizationReport {
    pub window_norm: f64,
    pub blocks: Vec<BlockReport>,
}

/// Named weight matrices per block used in a [`LocalizationReport`].
pub type NamedWeights = Vec<BTreeMap<String, DMatrix<C64>>>;

pub fn localization_report(f: &Signal, obs: &MultiObservable, weights: &NamedWeights) -> Result<LocalizationReport> {
    let mut blocks = Vec::new();
    let mut scale = 0.0;
    for (m, block) in obs.blocks.iter().enumerate() {
        let mo = block.moments(f)?;
        scale = mo.scale;
        let projected =
            mo.e.iter()
                .map(|e| block.quantity.project(*e))
                .collect::<Result<Vec<f64>>>()
                .ok();
        let mut scalar_variances = BTreeMap::new();
        scalar_variances.insert(
            "identity".to_string(),
            scalar_from_cov(&mo.cov, &DMatrix::identity(block.size(), block.size())),
        );
        if let Some(named) = weights.get(m) {
            for (name, w) in named {
                check_psd(w)?;
                scalar_variances.insert(name.clone(), scalar_from_cov(&mo.cov, w));
            }
        }
        blocks.push(BlockReport {
            name: block.name.clone(),
            e: mo.e.clone(),
            projected,
            cov: mo.cov.transpose().iter().copied().collect(),
            scalar_variances,
        });
    }
    Ok(LocalizationReport {
        window_norm: scale,
        blocks,
    })
}

/// Real vector helper for directions.
pub fn real_direction(w: &[f64]) -> Vec<C64> {
    w.iter().map(|v| C64::new(*v, 0.0)).collect()
}

/// `Σ_k w_k (T̆^k − e^k) f` evaluated directly, used as an oracle in tests.
pub fn centered_combination(f: &Signal, block: &ObservableBlock, w: &[C64]) -> Result<Signal> {
    let (f, _) = f.normalized()?;
    let mo = block.moments(&f)?;
    let y = block.map.forward(&f)?;
    let comb = block.combination(w);
    let shift: C64 = w.iter().zip(&mo.e).map(|(w, e)| w * e).sum();
    let vals: Vec<C64> = y.values().iter().zip(&comb).map(|(v, c)| v * (c - shift)).collect();
    block.map.inverse(&Signal::new(block.map.target().clone(), vals)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{dft_map, Axis, IdentityMap, SampledSpace};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn cyclic(n: usize) -> Arc<SampledSpace> {
        Arc::new(SampledSpace::new(vec![Axis::cyclic("x", n)]).unwrap())
    }

    fn time_root_observable(sp: &Arc<SampledSpace>) -> Observable {
        let n = sp.len();
        let mult = (0..n)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
            .collect();
        Observable::new(
            "Q",
            ObservableKind::Unitary,
            Arc::new(IdentityMap::new(sp.clone())),
            mult,
        )
        .unwrap()
    }

    fn position(sp: &Arc<SampledSpace>, axis: usize) -> Vec<C64> {
        sp.axis_positions(axis).into_iter().map(|x| C64::new(x, 0.0)).collect()
    }

    fn random_signal(sp: &Arc<SampledSpace>, rng: &mut ChaCha8Rng) -> Signal {
        let v = (0..sp.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Signal::new(sp.clone(), v).unwrap()
    }

    #[test]
    fn unitary_time_observable_on_delta_and_constant() {
        let sp = cyclic(8);
        let q = time_root_observable(&sp);
        let d = Signal::delta(sp.clone(), 0);
        assert!((expected_value(&d, &q).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(variance(&d, &q).unwrap().abs() < 1e-15);
        let c = Signal::from_fn(sp, |_| C64::new(1.0 / 8f64.sqrt(), 0.0));
        assert!(expected_value(&c, &q).unwrap().norm() < 1e-15);
        assert!((variance(&c, &q).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn gaussian_moments_match_closed_forms() {
        // Oracle: the continuum Gaussian has mean t0 and variance s².
        let sp = Arc::new(SampledSpace::new(vec![Axis::centered("t", 2048, 0.01)]).unwrap());
        let (t0, s) = (1.5, 0.7);
        let f = Signal::from_fn(sp.clone(), |x| {
            C64::new((-(x[0] - t0).powi(2) / (4.0 * s * s)).exp(), 0.0)
        });
        let t = Observable::new(
            "t",
            ObservableKind::SelfAdjoint,
            Arc::new(IdentityMap::new(sp.clone())),
            position(&sp, 0),
        )
        .unwrap();
        assert!((expected_value(&f, &t).unwrap().re - t0).abs() < 1e-6);
        assert!((variance(&f, &t).unwrap() - s * s).abs() < 1e-4);
    }

    #[test]
    fn unitary_variance_equals_one_minus_modulus() {
        let sp = cyclic(13);
        let q = time_root_observable(&sp);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let f = random_signal(&sp, &mut rng);
            let e = expected_value(&f, &q).unwrap();
            assert!((variance(&f, &q).unwrap() - (1.0 - e.norm_sqr())).abs() < 1e-12);
        }
    }

    fn position_block_2d() -> (Arc<SampledSpace>, ObservableBlock) {
        let sp =
            Arc::new(SampledSpace::new(vec![Axis::centered("x1", 64, 0.1), Axis::centered("x2", 48, 0.15)]).unwrap());
        let block = ObservableBlock::new(
            "position",
            QuantityKind::RealLine,
            Arc::new(IdentityMap::new(sp.clone())),
            vec![("x1".into(), position(&sp, 0)), ("x2".into(), position(&sp, 1))],
        )
        .unwrap();
        (sp, block)
    }

    #[test]
    fn separable_gaussian_has_diagonal_covariance() {
        let (sp, block) = position_block_2d();
        let f = Signal::from_fn(sp, |x| {
            C64::new((-(x[0] - 0.3).powi(2) - 0.5 * (x[1] + 0.2).powi(2)).exp(), 0.0)
        });
        let cov = covariance_matrix(&f, &block).unwrap();
        assert!(cov[(0, 1)].norm() < 1e-8 && cov[(1, 0)].norm() < 1e-8);
        assert_eq!(cov, cov.adjoint());
    }

    #[test]
    fn localized_axis_has_zero_row() {
        let (sp, block) = position_block_2d();
        let x1_line = sp.axes()[0].positions[20];
        let f = Signal::from_fn(sp, |x| {
            let on = (x[0] - x1_line).abs() < 1e-12;
            C64::new(if on { (-(x[1] * x[1])).exp() } else { 0.0 }, 0.0)
        });
        let cov = covariance_matrix(&f, &block).unwrap();
        assert!(cov[(0, 0)].norm() < 1e-14 && cov[(0, 1)].norm() < 1e-14);
        assert!(cov[(1, 1)].re > 0.1);
    }

    #[test]
    fn directional_and_scalar_variances_match_oracles() {
        let (sp, block) = position_block_2d();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let f = random_signal(&sp, &mut rng);
            let cov = covariance_matrix(&f, &block).unwrap();
            // Basis vectors give plain variances.
            for k in 0..2 {
                let mut w = vec![C64::new(0.0, 0.0); 2];
                w[k] = C64::new(1.0, 0.0);
                let dv = directional_variance(&f, &block, &w).unwrap();
                assert!((dv - variance(&f, &block.observable(k)).unwrap()).abs() < 1e-10);
            }
            // Random complex direction against the direct norm.
            let w: Vec<C64> = (0..2)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let dv = directional_variance(&f, &block, &w).unwrap();
            let direct = centered_combination(&f, &block, &w).unwrap().norm_sqr();
            assert!((dv - direct).abs() < 1e-10 * (1.0 + direct));
            let scaled: Vec<C64> = w.iter().map(|v| v * 2.5).collect();
            assert!((directional_variance(&f, &block, &scaled).unwrap() - 6.25 * dv).abs() < 1e-10 * (1.0 + dv));
            // W = I is the trace, W = w w* the directional variance.
            let id = DMatrix::identity(2, 2);
            assert!((scalar_variance(&f, &block, &id).unwrap() - (cov[(0, 0)] + cov[(1, 1)]).re).abs() < 1e-12);
            let ww = DMatrix::from_fn(2, 2, |a, b| w[a] * w[b].conj());
            assert!((scalar_variance(&f, &block, &ww).unwrap() - dv).abs() < 1e-10 * (1.0 + dv));
            // Random PSD W against its eigendecomposition.
            let b = DMatrix::from_fn(2, 2, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let wm = &b * b.adjoint();
            let eig = wm.clone().symmetric_eigen();
            let oracle: f64 = (0..2)
                .map(|k| {
                    let v: Vec<C64> = eig.eigenvectors.column(k).iter().copied().collect();
                    eig.eigenvalues[k] * directional_variance(&f, &block, &v).unwrap()
                })
                .sum();
            assert!((scalar_variance(&f, &block, &wm).unwrap() - oracle).abs() < 1e-10 * (1.0 + oracle));
        }
    }

    #[test]
    fn non_psd_and_zero_direction_are_rejected() {
        let (sp, block) = position_block_2d();
        let f = Signal::delta(sp, 100);
        let bad = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(2.0, 0.0),
                C64::new(1.0, 0.0),
            ],
        );
        assert!(matches!(scalar_variance(&f, &block, &bad), Err(Error::NotPsd(_))));
        assert!(directional_variance(&f, &block, &[C64::new(0.0, 0.0); 2]).is_err());
    }

    #[test]
    fn conjugated_time_observable_is_shifted() {
        let spec = GroupSpec::wavelet1d();
        let sp = Arc::new(SampledSpace::new(vec![Axis::centered("t", 64, 0.1)]).unwrap());
        let block = ObservableBlock::new(
            "time",
            QuantityKind::RealLine,
            Arc::new(IdentityMap::new(sp.clone())),
            vec![("t".into(), position(&sp, 0))],
        )
        .unwrap();
        let g = GroupElement::new(vec![vec![0.7], vec![0.0], vec![0.0]]);
        let c = conjugate_block(&spec, 0, &block, &g).unwrap();
        for (a, b) in c.multipliers[0].iter().zip(&block.multipliers[0]) {
            assert!((a - b - C64::new(0.7, 0.0)).norm() < 1e-15);
        }
        let id = conjugate_block(&spec, 0, &block, &spec.identity()).unwrap();
        assert_eq!(id.multipliers, block.multipliers);
    }

    #[test]
    fn unitary_conjugation_rotates_values() {
        let spec = GroupSpec::fstft(8).unwrap();
        let sp = cyclic(8);
        let q = time_root_observable(&sp);
        let block = ObservableBlock::new(
            "time",
            QuantityKind::CyclicRoots(8),
            q.map.clone(),
            vec![("Q".into(), q.multiplier.clone())],
        )
        .unwrap();
        let g = GroupElement::new(vec![vec![3.0], vec![0.0]]);
        let c = conjugate_block(&spec, 0, &block, &g).unwrap();
        for (k, v) in c.multipliers[0].iter().enumerate() {
            assert!((v - C64::from_polar(1.0, 2.0 * PI * (k as f64 + 3.0) / 8.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn frequency_observable_through_fourier_map() {
        let sp = cyclic(16);
        let map: Arc<dyn DomainMap> = Arc::new(dft_map(sp.clone()).unwrap());
        let mult: Vec<C64> = (0..16)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / 16.0))
            .collect();
        let p = Observable::new("P", ObservableKind::Unitary, map, mult).unwrap();
        // A pure exponential e^{2πi·5x/16} has all its mass at frequency 5.
        let f = Signal::from_fn(sp, |x| C64::from_polar(1.0, 2.0 * PI * 5.0 * x[0] / 16.0));
        let e = expected_value(&f, &p).unwrap();
        assert!((e - C64::from_polar(1.0, 2.0 * PI * 5.0 / 16.0)).norm() < 1e-12);
        assert!(variance(&f, &p).unwrap() < 1e-12);
        let applied = p.apply(&f).unwrap();
        assert!(applied.distance(&f.scaled(e)).unwrap() < 1e-10);
    }

    #[test]
    fn report_serializes_with_expected_fields() {
        let (sp, block) = position_block_2d();
        let f = Signal::from_fn(sp, |x| C64::new((-(x[0] * x[0]) - x[1] * x[1]).exp(), 0.0));
        let obs = MultiObservable { blocks: vec![block] };
        let r = localization_report(&f, &obs, &vec![]).unwrap();
        let js = serde_json::to_value(&r).unwrap();
        let b = &js["blocks"][0];
        assert!(b.get("e").is_some() && b.get("E").is_some() && b.get("cov").is_some());
        assert_eq!(b["cov"].as_array().unwrap().len(), 4);
    }
}
