//! Global (orbit-invariant) variances and the global uncertainty functional.
//!
//! The plain scalar variance of a block moves along the orbit of a window:
//! `π(g)` dilates and shears the observables. The global variance undoes this
//! by measuring the block through the automorphism `A_m(h)` evaluated at the
//! inverse of the window's projected expected element `E_f`, which makes it
//! constant on orbits. Unitary blocks on which the automorphisms act trivially
//! need no correction. The finite-wavelet time block uses the mean-square
//! expected value over the orbit of characters instead.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{Family, GroupElement, QuantityKind};
use crate::observables::{check_psd, scalar_from_cov, BlockMoments, ObservableKind};
use crate::spaces::{Signal, C64};
use crate::transforms::TransformSpec;

/// Per-block Hermitian PSD weight matrices `W_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightProfile {
    pub blocks: Vec<DMatrix<C64>>,
}

/// A weight entry in a configuration file: a scalar multiple of the identity
/// or a full real matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightEntry {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

/// Weight profile as read from JSON: an optional preset overridden per block name.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub blocks: BTreeMap<String, WeightEntry>,
}

/// Whether a block is a two-element reflection block, which carries no
/// uncertainty for windows on a half-space and gets weight zero by default.
fn is_reflection(spec: &TransformSpec, m: usize) -> bool {
    matches!(spec.group.family, Family::Wavelet1d | Family::Shearlet)
        && spec.group.blocks[m].kind == QuantityKind::CyclicRoots(2)
}

impl WeightProfile {
    /// Identity weight on every block except reflections, which get zero.
    pub fn identity(spec: &TransformSpec) -> Self {
        let w: Vec<f64> = (0..spec.group.num_blocks())
            .map(|m| if is_reflection(spec, m) { 0.0 } else { 1.0 })
            .collect();
        Self::isotropic(spec, &w).expect("non-negative preset")
    }

    /// `W_m = w_m I` for the given non-negative scalars, one per block.
    pub fn isotropic(spec: &TransformSpec, w: &[f64]) -> Result<Self> {
        let nb = spec.group.num_blocks();
        if w.len() != nb {
            return Err(Error::InvalidArgument(format!("{} weights for {nb} blocks", w.len())));
        }
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "isotropic weight {bad} must be finite and ≥ 0"
            )));
        }
        let blocks = (0..nb)
            .map(|m| {
                let k = spec.group.blocks[m].size;
                DMatrix::identity(k, k) * C64::new(w[m], 0.0)
            })
            .collect();
        Ok(WeightProfile { blocks })
    }

    /// Named preset: `identity`.
    pub fn preset(spec: &TransformSpec, name: &str) -> Result<Self> {
        match name {
            "identity" | "isotropic" => Ok(Self::identity(spec)),
            _ => Err(Error::InvalidArgument(format!("unknown weight preset {name:?}"))),
        }
    }

    /// Builds a profile from a configuration, validating names, shapes and PSD.
    pub fn from_config(spec: &TransformSpec, cfg: &WeightConfig) -> Result<Self> {
        let mut out = Self::preset(spec, cfg.preset.as_deref().unwrap_or("identity"))?;
        for (name, entry) in &cfg.blocks {
            let m = spec
                .observables
                .blocks
                .iter()
                .position(|b| &b.name == name)
                .ok_or_else(|| Error::InvalidArgument(format!("no observable block named {name:?}")))?;
            let k = spec.group.blocks[m].size;
            out.blocks[m] = match entry {
                WeightEntry::Scalar(v) => DMatrix::identity(k, k) * C64::new(*v, 0.0),
                WeightEntry::Matrix(rows) => {
                    if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                        return Err(Error::InvalidArgument(format!("weight for {name:?} must be {k}×{k}")));
                    }
                    DMatrix::from_fn(k, k, |a, b| C64::new(rows[a][b], 0.0))
                }
            };
        }
        out.validate(spec)?;
        Ok(out)
    }

    pub fn validate(&self, spec: &TransformSpec) -> Result<()> {
        if self.blocks.len() != spec.group.num_blocks() {
            return Err(Error::InvalidArgument(format!(
                "{} weight matrices for {} blocks",
                self.blocks.len(),
                spec.group.num_blocks()
            )));
        }
        for (m, w) in self.blocks.iter().enumerate() {
            let k = spec.group.blocks[m].size;
            if w.nrows() != k || w.ncols() != k {
                return Err(Error::InvalidArgument(format!("weight {m} must be {k}×{k}")));
            }
            check_psd(w)?;
        }
        Ok(())
    }
}

/// Projected expected element `E_f` with one flag per block marking an
/// undefined projection (zero expected value on a circle kind), where the
/// identity coordinate stands in.
#[derive(Clone, Debug)]
pub struct ExpectedElement {
    pub element: GroupElement,
    pub undefined: Vec<bool>,
    pub moments: Vec<BlockMoments>,
}

pub fn projected_expected_element(spec: &TransformSpec, f: &Signal) -> Result<ExpectedElement> {
    let moments = spec.observables.moments(f)?;
    let mut coords = Vec::new();
    let mut undefined = Vec::new();
    for (block, mo) in spec.group.blocks.iter().zip(&moments) {
        let mut c = Vec::new();
        let mut bad = false;
        for e in &mo.e {
            match block.kind.project(*e) {
                Ok(v) => c.push(v),
                Err(Error::UndefinedProjection(_)) => {
                    bad = true;
                    c.push(0.0);
                }
                Err(e) => return Err(e),
            }
        }
        coords.push(c);
        undefined.push(bad);
    }
    Ok(ExpectedElement {
        element: GroupElement::new(coords),
        undefined,
        moments,
    })
}

/// How the global variance of a block is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalMethod {
    /// `σ^W` of the corrected observable `A_m(h) T̆_m`.
    Corrected,
    /// The automorphisms act trivially on the block, so `Σ = σ`.
    Invariant,
    /// `1 − (Σ|f|⁴)²` from the mean-square expected value over the orbit.
    MeanSquare,
}

/// One block of an [`UncertaintyReport`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockUncertainty {
    pub name: String,
    pub kind: ObservableKind,
    pub method: GlobalMethod,
    /// Plain scalar variance `σ^{W_m}`.
    pub sigma: f64,
    /// Global variance `Σ^{W_m}`.
    pub global: f64,
    /// Correction matrix `A_m(h)` used, row-major.
    pub correction: Vec<Vec<f64>>,
    /// The correction fell back to the identity because a projection was undefined.
    pub degenerate: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub transform: String,
    /// Projected expected element `E_f`, per block.
    pub expected_element: Vec<Vec<f64>>,
    pub blocks: Vec<BlockUncertainty>,
    /// `S(f) = Σ_m Σ^{W_m}`.
    pub total: f64,
    /// `Π_m Σ^{W_m}` over blocks with non-zero weight, when requested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<f64>,
}

/// Correction `A_m([E_f⁻¹]_{h_m})`, or the identity if a projection feeding
/// the tail of block `m` is undefined. Returns the matrix and the degenerate flag.
pub fn correction_matrix(spec: &TransformSpec, m: usize, e: &ExpectedElement) -> (DMatrix<f64>, bool) {
    let k = spec.group.blocks[m].size;
    if e.undefined.iter().skip(m + 1).any(|u| *u) {
        return (DMatrix::identity(k, k), true);
    }
    let inv = spec.group.inverse_unchecked(&e.element);
    (spec.group.automorphism_matrix(m, &inv), false)
}

/// `A Cov Aᵀ`: the covariance of the corrected observable `A T̆`.
pub fn corrected_covariance(cov: &DMatrix<C64>, a: &DMatrix<f64>) -> DMatrix<C64> {
    let ac = a.map(|v| C64::new(v, 0.0));
    &ac * cov * ac.transpose()
}

fn method_for(spec: &TransformSpec, m: usize) -> Result<GlobalMethod> {
    let block = &spec.group.blocks[m];
    if block.kind.is_self_adjoint() {
        return Ok(GlobalMethod::Corrected);
    }
    let last = m + 1 == spec.group.num_blocks();
    match spec.group.family {
        _ if last => Ok(GlobalMethod::Invariant),
        Family::Fstft { .. } => Ok(GlobalMethod::Invariant),
        Family::FiniteAffine { .. } if m == 0 => Ok(GlobalMethod::MeanSquare),
        _ => Err(Error::Precondition(format!(
            "no global variance for unitary block {}: its character orbit does not cover all frequencies",
            block.name
        ))),
    }
}

/// `Σ_n |f(n)|⁴` of the normalized window, the mean-square expected value
/// over the full orbit of time characters.
pub fn mean_square_expected(f: &Signal) -> Result<f64> {
    let (u, _) = f.normalized()?;
    Ok(u.values()
        .iter()
        .zip(u.space().weights())
        .map(|(v, w)| v.norm_sqr().powi(2) * w)
        .sum())
}

fn block_uncertainty(
    spec: &TransformSpec,
    f: &Signal,
    m: usize,
    w: &DMatrix<C64>,
    e: &ExpectedElement,
) -> Result<BlockUncertainty> {
    let method = method_for(spec, m)?;
    let mo = &e.moments[m];
    let sigma = scalar_from_cov(&mo.cov, w);
    let k = spec.group.blocks[m].size;
    let (a, degenerate, global) = match method {
        GlobalMethod::Corrected => {
            let (a, deg) = correction_matrix(spec, m, e);
            let g = scalar_from_cov(&corrected_covariance(&mo.cov, &a), w);
            (a, deg, g)
        }
        GlobalMethod::Invariant => (DMatrix::identity(k, k), false, sigma),
        GlobalMethod::MeanSquare => {
            let s4 = mean_square_expected(f)?;
            (DMatrix::identity(k, k), false, w[(0, 0)].re * (1.0 - s4 * s4).max(0.0))
        }
    };
    Ok(BlockUncertainty {
        name: spec.observables.blocks[m].name.clone(),
        kind: spec.observables.blocks[m].kind(),
        method,
        sigma,
        global,
        correction: (0..k).map(|r| (0..k).map(|c| a[(r, c)]).collect()).collect(),
        degenerate,
    })
}

/// Global variance of a self-adjoint block: `σ^W` of `A_m(h) T̆_m` with
/// `h` the tail of `E_f⁻¹`.
pub fn global_variance_selfadjoint(spec: &TransformSpec, f: &Signal, m: usize, w: &DMatrix<C64>) -> Result<f64> {
    check_block(spec, m, w)?;
    if !spec.group.blocks[m].kind.is_self_adjoint() {
        return Err(Error::Precondition(format!("block {m} is not self-adjoint")));
    }
    let e = projected_expected_element(spec, f)?;
    Ok(block_uncertainty(spec, f, m, w, &e)?.global)
}

/// Global variance of a unitary block with unit weight.
pub fn global_variance_unitary(spec: &TransformSpec, f: &Signal, m: usize) -> Result<f64> {
    if m >= spec.group.num_blocks() || spec.group.blocks[m].kind.is_self_adjoint() {
        return Err(Error::Precondition(format!("block {m} is not a unitary block")));
    }
    let k = spec.group.blocks[m].size;
    let e = projected_expected_element(spec, f)?;
    Ok(block_uncertainty(spec, f, m, &DMatrix::identity(k, k), &e)?.global)
}

fn check_block(spec: &TransformSpec, m: usize, w: &DMatrix<C64>) -> Result<()> {
    if m >= spec.group.num_blocks() {
        return Err(Error::InvalidArgument(format!("no block {m}")));
    }
    let k = spec.group.blocks[m].size;
    if w.nrows() != k || w.ncols() != k {
        return Err(Error::InvalidArgument(format!("weight for block {m} must be {k}×{k}")));
    }
    check_psd(w)
}

/// `S(f) = Σ_m Σ^{W_m}_f(T̆_m)` with every component.
///
/// Blocks with zero weight are reported but skipped when they have no
/// global variance (an uncovered unitary block).
pub fn global_uncertainty(
    spec: &TransformSpec,
    f: &Signal,
    weights: &WeightProfile,
    with_product: bool,
) -> Result<UncertaintyReport> {
    weights.validate(spec)?;
    let e = projected_expected_element(spec, f)?;
    let mut blocks = Vec::new();
    for (m, w) in weights.blocks.iter().enumerate() {
        match block_uncertainty(spec, f, m, w, &e) {
            Ok(b) => blocks.push(b),
            Err(Error::Precondition(_)) if w.iter().all(|v| v.norm() == 0.0) => {}
            Err(err) => return Err(err),
        }
    }
    let total = blocks.iter().map(|b| b.global).sum();
    let product = with_product.then(|| {
        blocks
            .iter()
            .zip(&weights.blocks)
            .filter(|(_, w)| w.iter().any(|v| v.norm() > 0.0))
            .map(|(b, _)| b.global)
            .product()
    });
    Ok(UncertaintyReport {
        transform: spec.name().to_string(),
        expected_element: e.element.coords.clone(),
        blocks,
        total,
        product,
    })
}

/// `max_g |S(π(g)f) − S(f)| / S(f)` over the samples.
pub fn orbit_invariance_check(
    spec: &TransformSpec,
    f: &Signal,
    weights: &WeightProfile,
    g_samples: &[GroupElement],
) -> Result<f64> {
    let s0 = global_uncertainty(spec, f, weights, false)?.total;
    let mut worst: f64 = 0.0;
    for g in g_samples {
        let pf = spec.rep_apply(g, f)?;
        let s = global_uncertainty(spec, &pf, weights, false)?.total;
        worst = worst.max((s - s0).abs() / s0.abs().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}
