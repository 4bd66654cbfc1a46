//! Ambiguity functions, Chebyshev decay bounds, sparse phase functions and
//! matching pursuit.
//!
//! The decay bounds compare `|V_f[f](g)| = |⟨f, π(g)f⟩|` with a bound built
//! from the moments of `f` and of `π(g)f` for one observable. Both sets of
//! moments are evaluated exactly on the grid: time-domain densities of
//! translated windows are circular shifts, so their moments over the whole
//! translation grid are circular correlations computed by FFT, and
//! frequency-domain densities do not change under translation. With exact
//! discrete moments the bound is a theorem for the sampled densities, so a
//! violation is a bug rather than discretization error.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::{GroupElement, QuantityKind};
use crate::observables::{mapped_density, ObservableBlock, ObservableKind};
use crate::spaces::{dft_map, inner_product, Axis, AxisKind, DomainMap, FourierMap, SampledSpace, Signal, C64};
use crate::transforms::{analyze, PhaseFunction, TransformSpec};
use crate::uncertainty::projected_expected_element;

mod bench;

pub use bench::{mp_bench, MpBenchConfig, MpBenchReport, MpBenchRow};

/// `V_f[f]` on the phase grid.
pub fn ambiguity(spec: &TransformSpec, f: &Signal) -> Result<PhaseFunction> {
    analyze(spec, f, f)
}

/// `2√σ₁/|Δ| + 2√σ₂/|Δ| + 4√(σ₁σ₂)/Δ²` with `Δ = e₁ − e₂`, infinite when `Δ = 0`.
pub fn chebyshev_bound(e1: f64, s1: f64, e2: f64, s2: f64) -> f64 {
    isotropic_bound(0.5 * (e1 - e2).abs(), s1, s2)
}

/// `√σ₁/r + √σ₂/r + √(σ₁σ₂)/r²`: the Chebyshev bound with half-distance `r`
/// between the expected values.
pub fn isotropic_bound(r: f64, s1: f64, s2: f64) -> f64 {
    if r == 0.0 {
        return f64::INFINITY;
    }
    let (a, b) = (s1.max(0.0).sqrt(), s2.max(0.0).sqrt());
    a / r + b / r + a * b / (r * r)
}

/// One phase-grid point of a decay-bound scan.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayRow {
    /// Flattened group coordinates.
    pub coords: Vec<f64>,
    /// `|V_f[f](g)|` for the unit-norm, pre-centered window.
    pub amb: f64,
    pub bound: f64,
    /// `bound − amb`, infinite for unbounded rows.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DecayBoundReport {
    pub transform: String,
    pub block: String,
    /// Direction `w` for a self-adjoint block, empty for a unitary block.
    pub direction: Vec<f64>,
    pub tolerance: f64,
    pub rows: Vec<DecayRow>,
    /// Rows with `amb > bound + tolerance`.
    pub violations: usize,
    /// Rows whose expected values coincide, where the bound is infinite.
    pub unbounded: usize,
    /// Largest `amb / bound` over bounded rows.
    pub max_ratio: f64,
}

/// Violation tolerance: exact arithmetic on finite groups, sampled continua otherwise.
pub fn decay_tolerance(spec: &TransformSpec) -> f64 {
    if spec.kind.is_finite() {
        1e-12
    } else {
        1e-6
    }
}

/// Plain cyclic DFT on a grid of the given shape, used for circular correlations.
struct Correlator {
    map: FourierMap,
    dims: Vec<usize>,
}

impl Correlator {
    fn new(space: &SampledSpace) -> Result<Self> {
        let dims = space.dims();
        let axes = dims
            .iter()
            .enumerate()
            .map(|(i, n)| Axis::cyclic(&format!("k{i}"), *n))
            .collect();
        Ok(Correlator {
            map: dft_map(Arc::new(SampledSpace::new(axes)?))?,
            dims,
        })
    }

    fn transform(&self, x: &[f64]) -> Vec<C64> {
        let v: Vec<C64> = x.iter().map(|v| C64::new(*v, 0.0)).collect();
        self.map.forward_values(&v)
    }

    /// `c(s) = Σ_x φ(x) p(x − s)` for every cyclic shift `s`, given `p̂`.
    fn correlate(&self, phi: &[C64], p_hat: &[C64]) -> Vec<C64> {
        let scale = (phi.len() as f64).sqrt();
        let ph = self.map.forward_values(phi);
        let prod: Vec<C64> = ph.iter().zip(p_hat).map(|(a, b)| a * b.conj()).collect();
        self.map.inverse_values(&prod).into_iter().map(|v| v * scale).collect()
    }

    /// Flat index of the cyclic shift corresponding to a translation.
    fn shift_index(&self, space: &SampledSpace, t: &[f64]) -> Result<usize> {
        let mut idx = 0;
        for ((axis, n), x) in space.axes().iter().zip(&self.dims).zip(t) {
            let s = match axis.kind {
                AxisKind::Cyclic => *x,
                AxisKind::Uniform { step, .. } => x / step,
                AxisKind::Tabulated => {
                    return Err(Error::InvalidSpace("translations need a uniform or cyclic axis".into()))
                }
            };
            let r = s.round();
            if (s - r).abs() > 1e-9 {
                return Err(Error::OffGrid(format!(
                    "translation {x} is not a whole number of samples"
                )));
            }
            idx = idx * n + (r as i64).rem_euclid(*n as i64) as usize;
        }
        Ok(idx)
    }
}

/// Moments of one scalar functional of a block at every phase-grid point.
///
/// `funcs` are evaluated against the density of `π(g)f` on the block's
/// domain; the result is `out[k][grid index] = Σ_x funcs[k](x) P_{π(g)f}(x)`.
fn grid_moments(
    spec: &TransformSpec,
    f: &Signal,
    block: &ObservableBlock,
    funcs: &[Vec<C64>],
) -> Result<Vec<Vec<C64>>> {
    let nt = spec.grid.n_translations;
    let n = spec.grid.len();
    let time_domain = block.map.name() == "identity";
    let fhat = spec.to_freq(f)?;
    let corr = Correlator::new(&spec.space)?;
    let shifts: Vec<usize> = if time_domain {
        (0..nt)
            .map(|i| corr.shift_index(&spec.space, &spec.space.coords(i)))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let mut out = vec![vec![C64::new(0.0, 0.0); n]; funcs.len()];
    for (t, h) in spec.grid.tails.iter().enumerate() {
        let u = spec.from_freq(spec.tail_freq(h, &fhat))?;
        let (p, _) = mapped_density(block.map.as_ref(), &u)?;
        if time_domain {
            let p_hat = corr.transform(&p);
            for (k, phi) in funcs.iter().enumerate() {
                let c = corr.correlate(phi, &p_hat);
                for (i, s) in shifts.iter().enumerate() {
                    out[k][t * nt + i] = c[*s];
                }
            }
        } else {
            for (k, phi) in funcs.iter().enumerate() {
                let v: C64 = phi.iter().zip(&p).map(|(a, b)| a * b).sum();
                for i in 0..nt {
                    out[k][t * nt + i] = v;
                }
            }
        }
    }
    Ok(out)
}

/// `π(h⁻¹) f / ‖f‖` where `h` carries the projected expected value of block
/// `m` and the identity elsewhere, so that `f₀` has zero mean in block `m`.
///
/// Only block `m` is moved: the bound for block `m` needs nothing else, and
/// leaving the other coordinates alone keeps continuum windows on the grid.
/// An undefined projection leaves the block unmoved.
pub fn precenter(spec: &TransformSpec, f: &Signal, m: usize) -> Result<Signal> {
    let e = projected_expected_element(spec, f)?;
    let mut h = spec.group.identity();
    h.coords[m] = e.element.coords[m].clone();
    let inv = spec.group.inverse(&h)?;
    Ok(spec.rep_apply(&inv, f)?.normalized()?.0)
}

/// Relative size below which two expected values are the same up to round-off.
const COINCIDENT: f64 = 1e-12;

fn finish_report(
    spec: &TransformSpec,
    block: &ObservableBlock,
    direction: Vec<f64>,
    amb: &PhaseFunction,
    bounds: Vec<f64>,
) -> DecayBoundReport {
    let tolerance = decay_tolerance(spec);
    let mut rows = Vec::with_capacity(bounds.len());
    let (mut violations, mut unbounded, mut max_ratio) = (0, 0, 0.0f64);
    for (i, bound) in bounds.into_iter().enumerate() {
        let a = amb.values[i].norm();
        if bound.is_infinite() {
            unbounded += 1;
        } else {
            if a > bound + tolerance {
                violations += 1;
            }
            if bound > 0.0 {
                max_ratio = max_ratio.max(a / bound);
            }
        }
        rows.push(DecayRow {
            coords: spec.grid_element(i).flat(),
            amb: a,
            bound,
            margin: bound - a,
        });
    }
    DecayBoundReport {
        transform: spec.name().to_string(),
        block: block.name.clone(),
        direction,
        tolerance,
        rows,
        violations,
        unbounded,
        max_ratio,
    }
}

/// Chebyshev decay bound of the ambiguity function for a self-adjoint block
/// in direction `w`, after pre-centering the window.
pub fn decay_bound_selfadjoint(spec: &TransformSpec, f: &Signal, m: usize, w: &[f64]) -> Result<DecayBoundReport> {
    let block = spec
        .observables
        .blocks
        .get(m)
        .ok_or_else(|| Error::InvalidArgument(format!("no block {m}")))?;
    if block.kind() != ObservableKind::SelfAdjoint {
        return Err(Error::Precondition(format!("block {} is not self-adjoint", block.name)));
    }
    if w.len() != block.size() || w.iter().all(|v| *v == 0.0) || w.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "direction must be a non-zero {}-vector",
            block.size()
        )));
    }
    let f0 = precenter(spec, f, m)?;
    let amb = ambiguity(spec, &f0)?;
    let mu: Vec<C64> = (0..block.multipliers[0].len())
        .map(|i| C64::new((0..w.len()).map(|k| w[k] * block.multipliers[k][i].re).sum(), 0.0))
        .collect();
    let mu2: Vec<C64> = mu.iter().map(|v| v * v).collect();
    let mom = grid_moments(spec, &f0, block, &[mu.clone(), mu2.clone()])?;
    let (p, _) = mapped_density(block.map.as_ref(), &f0)?;
    let e0: f64 = mu.iter().zip(&p).map(|(a, b)| a.re * b).sum();
    let s0: f64 = mu.iter().zip(&p).map(|(a, b)| (a.re - e0).powi(2) * b).sum();
    let scale = mu.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let bounds = (0..spec.grid.len())
        .map(|i| {
            let e1 = mom[0][i].re;
            let s1 = mom[1][i].re - e1 * e1;
            if (e1 - e0).abs() <= COINCIDENT * scale {
                f64::INFINITY
            } else {
                chebyshev_bound(e0, s0, e1, s1)
            }
        })
        .collect();
    Ok(finish_report(spec, block, w.to_vec(), &amb, bounds))
}

/// Isotropic Chebyshev decay bound for a unitary block, after pre-centering.
///
/// `r = ½‖e_{π(g)f} − e_f‖` over the block entries and `σ` is the trace of
/// the covariance, `Σ_k (1 − |e_k|²)`.
pub fn decay_bound_unitary(spec: &TransformSpec, f: &Signal, m: usize) -> Result<DecayBoundReport> {
    let block = spec
        .observables
        .blocks
        .get(m)
        .ok_or_else(|| Error::InvalidArgument(format!("no block {m}")))?;
    if block.kind() != ObservableKind::Unitary {
        return Err(Error::Precondition(format!("block {} is not unitary", block.name)));
    }
    let f0 = precenter(spec, f, m)?;
    let mo = block.moments(&f0)?;
    if let Some(e) = mo.e.iter().find(|e| e.norm() < crate::groups::ZERO_MODULUS) {
        return Err(Error::Precondition(format!(
            "expected value {e} of block {} vanishes",
            block.name
        )));
    }
    let amb = ambiguity(spec, &f0)?;
    let mom = grid_moments(spec, &f0, block, &block.multipliers)?;
    let s0: f64 = mo.e.iter().map(|e| 1.0 - e.norm_sqr()).sum();
    let bounds = (0..spec.grid.len())
        .map(|i| {
            let d2: f64 = (0..block.size()).map(|k| (mom[k][i] - mo.e[k]).norm_sqr()).sum();
            let s1: f64 = (0..block.size()).map(|k| 1.0 - mom[k][i].norm_sqr()).sum();
            let d = d2.sqrt();
            isotropic_bound(if d <= COINCIDENT { 0.0 } else { 0.5 * d }, s0, s1)
        })
        .collect();
    Ok(finish_report(spec, block, Vec::new(), &amb, bounds))
}

/// Decay bound for block `m`, choosing the self-adjoint or unitary form.
pub fn decay_bound(spec: &TransformSpec, f: &Signal, m: usize, w: Option<&[f64]>) -> Result<DecayBoundReport> {
    let block = spec
        .observables
        .blocks
        .get(m)
        .ok_or_else(|| Error::InvalidArgument(format!("no block {m}")))?;
    match block.kind() {
        ObservableKind::SelfAdjoint => {
            let default: Vec<f64> = (0..block.size()).map(|k| if k == 0 { 1.0 } else { 0.0 }).collect();
            decay_bound_selfadjoint(spec, f, m, w.unwrap_or(&default))
        }
        ObservableKind::Unitary => decay_bound_unitary(spec, f, m),
    }
}

/// One atom `c δ_g` of a sparse phase function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    /// Flattened group coordinates.
    pub coords: Vec<f64>,
    pub re: f64,
    pub im: f64,
}

impl Atom {
    pub fn new(g: &GroupElement, c: C64) -> Self {
        Atom {
            coords: g.flat(),
            re: c.re,
            im: c.im,
        }
    }

    pub fn coefficient(&self) -> C64 {
        C64::new(self.re, self.im)
    }
}

/// `F = Σ_n c_n δ_{g_n}`, serialized as a JSON array of atoms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparsePhase {
    pub atoms: Vec<Atom>,
}

/// Splits flattened coordinates into blocks.
pub fn element_from_flat(spec: &TransformSpec, flat: &[f64]) -> Result<GroupElement> {
    let sizes: Vec<usize> = spec.group.blocks.iter().map(|b| b.size).collect();
    if flat.len() != sizes.iter().sum::<usize>() {
        return Err(Error::Domain(format!(
            "{} coordinates for a {}-dimensional group",
            flat.len(),
            sizes.iter().sum::<usize>()
        )));
    }
    let mut coords = Vec::new();
    let mut at = 0;
    for s in sizes {
        coords.push(flat[at..at + s].to_vec());
        at += s;
    }
    let g = GroupElement::new(coords);
    spec.group.validate(&g)?;
    Ok(g)
}

/// Grid index of every atom, rejecting atoms off the phase grid.
fn atom_indices(spec: &TransformSpec, f: &SparsePhase) -> Result<Vec<usize>> {
    if f.atoms.is_empty() {
        return Err(Error::InvalidArgument(
            "a sparse phase function needs at least one atom".into(),
        ));
    }
    f.atoms
        .iter()
        .map(|a| {
            let g = element_from_flat(spec, &a.coords)?;
            spec.locate(&g)
                .ok_or_else(|| Error::OffGrid(format!("atom at {:?} is not on the phase grid", a.coords)))
        })
        .collect()
}

/// `s = Σ c_n π(g_n) f` for the unit-norm window `f/‖f‖`.
pub fn sparse_synthesize(spec: &TransformSpec, f: &Signal, phase: &SparsePhase) -> Result<Signal> {
    let idx = atom_indices(spec, phase)?;
    let (u, _) = f.normalized()?;
    let mut s = Signal::zeros(spec.space.clone());
    for (a, i) in phase.atoms.iter().zip(idx) {
        let pg = spec.rep_apply(&spec.grid_element(i), &u)?;
        s = s.axpy(a.coefficient(), &pg)?;
    }
    Ok(s)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchingPursuitResult {
    pub recovered: SparsePhase,
    /// `‖s_k‖` for `k = 0..=iterations`.
    pub residual_norms: Vec<f64>,
    pub residual: Vec<C64>,
}

/// Greedy matching pursuit with the unit-norm window `f/‖f‖`.
///
/// Each iteration picks the first grid point of largest `|V_f[s_k]|`,
/// records `c_k = V_f[s_k](g_k)` and subtracts `c_k π(g_k) f`, so that
/// `‖s_k‖² = ‖s_{k+1}‖² + |c_k|²`. It stops after `max_iter` atoms or once
/// `‖s_k‖ ≤ stop_tol ‖s_0‖`.
pub fn matching_pursuit(
    spec: &TransformSpec,
    f: &Signal,
    s: &Signal,
    max_iter: usize,
    stop_tol: f64,
) -> Result<MatchingPursuitResult> {
    let (u, _) = f.normalized()?;
    spec.admissible_norm(&u)?;
    let s0 = s.norm();
    let mut r = s.clone();
    let mut atoms = Vec::new();
    let mut norms = vec![s0];
    for _ in 0..max_iter {
        if r.norm() <= stop_tol * s0 {
            break;
        }
        let v = analyze(spec, &u, &r)?;
        let (best, _) =
            v.values.iter().enumerate().fold(
                (0, -1.0),
                |(bi, bv), (i, x)| if x.norm() > bv { (i, x.norm()) } else { (bi, bv) },
            );
        let c = v.values[best];
        let g = spec.grid_element(best);
        let pg = spec.rep_apply(&g, &u)?;
        r = r.axpy(-c, &pg)?;
        atoms.push(Atom::new(&g, c));
        norms.push(r.norm());
    }
    Ok(MatchingPursuitResult {
        recovered: SparsePhase { atoms },
        residual_norms: norms,
        residual: r.into_values(),
    })
}

/// Greedy matching between true and recovered atoms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeparationReport {
    pub matched: usize,
    pub matched_fraction: f64,
    /// `ℓ²` error of the coefficients of matched pairs.
    pub coefficient_error: f64,
}

/// Euclidean distance of flattened coordinates with circle kinds as angles.
pub fn phase_distance(spec: &TransformSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    let (ga, gb) = (element_from_flat(spec, a)?, element_from_flat(spec, b)?);
    Ok(spec.group.chart_distance(&ga, &gb))
}

/// One grid cell in the chart metric: the largest single-coordinate step.
pub fn default_radius(spec: &TransformSpec) -> f64 {
    let mut r: f64 = 0.0;
    for (m, block) in spec.group.blocks.iter().enumerate() {
        let step = if m == 0 {
            spec.space.axes().iter().filter_map(|a| a.step()).fold(0.0, f64::max)
        } else {
            let vals: Vec<f64> = spec.grid.tails.iter().flat_map(|t| t.coords[m].clone()).collect();
            let mut sorted = vals.clone();
            sorted.sort_by(f64::total_cmp);
            sorted.dedup();
            sorted.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        };
        let chart = match block.kind {
            QuantityKind::CyclicRoots(n) => step * 2.0 * std::f64::consts::PI / n as f64,
            _ => step,
        };
        r = r.max(chart);
    }
    r * (1.0 + 1e-9)
}

/// Pairs atoms closest-first within `radius`, each atom used at most once.
pub fn separation_metric(
    spec: &TransformSpec,
    truth: &SparsePhase,
    rec: &SparsePhase,
    radius: f64,
) -> Result<SeparationReport> {
    let mut pairs = Vec::new();
    for (i, a) in truth.atoms.iter().enumerate() {
        for (j, b) in rec.atoms.iter().enumerate() {
            let d = phase_distance(spec, &a.coords, &b.coords)?;
            if d <= radius {
                pairs.push((d, i, j));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    let (mut used_t, mut used_r) = (vec![false; truth.atoms.len()], vec![false; rec.atoms.len()]);
    let (mut matched, mut err2) = (0, 0.0);
    for (_, i, j) in pairs {
        if used_t[i] || used_r[j] {
            continue;
        }
        used_t[i] = true;
        used_r[j] = true;
        matched += 1;
        err2 += (truth.atoms[i].coefficient() - rec.atoms[j].coefficient()).norm_sqr();
    }
    Ok(SeparationReport {
        matched,
        matched_fraction: if truth.atoms.is_empty() {
            0.0
        } else {
            matched as f64 / truth.atoms.len() as f64
        },
        coefficient_error: err2.sqrt(),
    })
}

/// `Σ c_n V_f[f](g_n⁻¹ • g)` with the central phase of the group, the analysis
/// of a sparse signal predicted from the ambiguity function.
pub fn shifted_ambiguity_sum(spec: &TransformSpec, f: &Signal, phase: &SparsePhase) -> Result<PhaseFunction> {
    let idx = atom_indices(spec, phase)?;
    if !spec.kind.is_finite() {
        return Err(Error::Precondition(
            "g_n⁻¹ • g stays on the grid only for finite groups".into(),
        ));
    }
    let (u, _) = f.normalized()?;
    let amb = ambiguity(spec, &u)?;
    let mut out = PhaseFunction::zeros(spec.grid.len());
    for (a, i) in phase.atoms.iter().zip(idx) {
        let q = spec.grid_element(i);
        let qi = spec.group.inverse(&q)?;
        for (gi, v) in out.values.iter_mut().enumerate() {
            let g = spec.grid_element(gi);
            let j = spec
                .locate(&spec.group.multiply(&qi, &g)?)
                .ok_or_else(|| Error::Numeric("q⁻¹•g left a finite grid".into()))?;
            *v += a.coefficient() * crate::transforms::cocycle(spec, &q, &g).conj() * amb.values[j];
        }
    }
    Ok(out)
}

/// `⟨f, h⟩` for unit vectors, the quantity bounded by the Chebyshev corollary.
pub fn overlap(f: &Signal, h: &Signal) -> Result<f64> {
    Ok(inner_product(f, h)?.norm() / (f.norm() * h.norm()))
}
