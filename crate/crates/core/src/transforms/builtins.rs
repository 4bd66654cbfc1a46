//! Constructors of the four built-in transforms.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{PhaseGrid, TransformKind, TransformParams, TransformSpec};
use crate::error::{Error, Result};
use crate::groups::{pow_mod, GroupElement, GroupSpec, QuantityKind};
use crate::observables::{MultiObservable, ObservableBlock};
use crate::spaces::{Axis, AxisKind, DomainMap, FourierMap, IdentityMap, SampledSpace, C64};

/// Default grid parameters of a transform.
pub fn default_params(kind: TransformKind) -> TransformParams {
    match kind {
        TransformKind::Fstft => TransformParams::Fstft { n: 16 },
        TransformKind::Finwave => TransformParams::Finwave { n: 17 },
        TransformKind::Wavelet1d => TransformParams::Wavelet1d {
            n: 1024,
            omega_max: 8.0,
            scale_min: -1.5,
            scale_max: 1.5,
            n_scales: 31,
        },
        TransformKind::Shearlet => TransformParams::Shearlet {
            n: 64,
            omega_max: 8.0,
            shear_max: 1.5,
            n_shears: 13,
            scale_min: -1.0,
            scale_max: 1.0,
            n_scales: 9,
        },
    }
}

/// Default parameters for a CLI transform name.
pub fn params_for_name(name: &str) -> Result<TransformParams> {
    let kind = match name {
        "fstft" => TransformKind::Fstft,
        "finwave" => TransformKind::Finwave,
        "wavelet1d" => TransformKind::Wavelet1d,
        "shearlet" => TransformKind::Shearlet,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown transform {other:?}; expected fstft, wavelet1d, shearlet or finwave"
            )))
        }
    };
    Ok(default_params(kind))
}

/// `n` uniform samples of `[lo, hi]` and their spacing (1 for a single sample).
fn linspace(lo: f64, hi: f64, n: usize) -> Result<(Vec<f64>, f64)> {
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || hi < lo {
        return Err(Error::InvalidArgument(format!(
            "bad parameter range [{lo}, {hi}] with {n} samples"
        )));
    }
    if n == 1 {
        return Ok((vec![lo], 1.0));
    }
    let d = (hi - lo) / (n - 1) as f64;
    Ok(((0..n).map(|i| lo + d * i as f64).collect(), d))
}

fn real(v: impl IntoIterator<Item = f64>) -> Vec<C64> {
    v.into_iter().map(|x| C64::new(x, 0.0)).collect()
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub(super) fn build(params: &TransformParams) -> Result<TransformSpec> {
    match *params {
        TransformParams::Fstft { n } => fstft(n, params),
        TransformParams::Finwave { n } => finwave(n, params),
        TransformParams::Wavelet1d {
            n,
            omega_max,
            scale_min,
            scale_max,
            n_scales,
        } => wavelet1d(n, omega_max, (scale_min, scale_max, n_scales), params),
        TransformParams::Shearlet {
            n,
            omega_max,
            shear_max,
            n_shears,
            scale_min,
            scale_max,
            n_scales,
        } => shearlet(
            n,
            omega_max,
            (shear_max, n_shears),
            (scale_min, scale_max, n_scales),
            params,
        ),
    }
}

struct Parts {
    kind: TransformKind,
    group: GroupSpec,
    space: Arc<SampledSpace>,
    fourier: Arc<FourierMap>,
    grid: PhaseGrid,
    blocks: Vec<ObservableBlock>,
    duflo_moore: Vec<f64>,
    nominal_constant: f64,
}

fn assemble(p: Parts, params: &TransformParams) -> TransformSpec {
    let fs = p.fourier.target();
    let freq_angles = fs.axes().iter().map(|a| a.positions.clone()).collect();
    let cyclic = fs
        .axes()
        .iter()
        .map(|a| matches!(a.kind, AxisKind::Cyclic).then(|| a.len()))
        .collect();
    TransformSpec {
        kind: p.kind,
        params: params.clone(),
        group: p.group,
        space: p.space,
        fourier: p.fourier,
        grid: p.grid,
        observables: MultiObservable { blocks: p.blocks },
        duflo_moore: p.duflo_moore,
        nominal_constant: p.nominal_constant,
        freq_angles,
        cyclic,
    }
}

/// The Fourier map, the identity map and the Fourier map as a domain map.
type Maps = (Arc<FourierMap>, Arc<dyn DomainMap>, Arc<dyn DomainMap>);

fn maps(space: &Arc<SampledSpace>) -> Result<Maps> {
    let fourier = Arc::new(FourierMap::new(space.clone())?);
    let id: Arc<dyn DomainMap> = Arc::new(IdentityMap::new(space.clone()));
    let fm: Arc<dyn DomainMap> = fourier.clone();
    Ok((fourier, id, fm))
}

fn roots(values: impl Iterator<Item = f64>, n: usize) -> Vec<C64> {
    values
        .map(|k| C64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(n as f64)) / n as f64))
        .collect()
}

fn fstft(n: usize, params: &TransformParams) -> Result<TransformSpec> {
    let group = GroupSpec::fstft(n as u32)?;
    let space = Arc::new(SampledSpace::new(vec![Axis::cyclic("x", n)])?);
    let (fourier, id, fm) = maps(&space)?;
    let positions = space.axes()[0].positions.clone();
    let freqs = fourier.target().axes()[0].positions.clone();
    let q = QuantityKind::CyclicRoots(n as u32);
    let blocks = vec![
        ObservableBlock::new("time", q, id, vec![("Q".into(), roots(positions.into_iter(), n))])?,
        ObservableBlock::new("frequency", q, fm, vec![("P".into(), roots(freqs.into_iter(), n))])?,
    ];
    let tails = (0..n)
        .map(|k| GroupElement::new(vec![vec![0.0], vec![k as f64]]))
        .collect();
    let grid = PhaseGrid {
        n_translations: n,
        translation_weight: 1.0,
        tails,
        tail_weights: vec![1.0; n],
    };
    Ok(assemble(
        Parts {
            kind: TransformKind::Fstft,
            group,
            space,
            fourier,
            grid,
            blocks,
            duflo_moore: vec![1.0; n],
            nominal_constant: n as f64,
        },
        params,
    ))
}

/// Discrete logarithm table: `log[r^j mod n] = j`, with `log[0]` unused.
pub(crate) fn discrete_logs(n: u32, root: u32) -> Vec<usize> {
    let mut log = vec![0; n as usize];
    for j in 0..(n - 1) as u64 {
        log[pow_mod(root as u64, j, n as u64) as usize] = j as usize;
    }
    log
}

fn finwave(n: usize, params: &TransformParams) -> Result<TransformSpec> {
    let group = GroupSpec::finite_affine(n as u32)?;
    let root = match group.family {
        crate::groups::Family::FiniteAffine { root, .. } => root,
        _ => unreachable!("finite affine family"),
    };
    let space = Arc::new(SampledSpace::new(vec![Axis::cyclic("x", n)])?);
    let (fourier, id, fm) = maps(&space)?;
    let log = discrete_logs(n as u32, root);
    let t2: Vec<C64> = (0..n)
        .map(|q| {
            if q == 0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, -2.0 * PI * log[q] as f64 / (n - 1) as f64)
            }
        })
        .collect();
    let positions = space.axes()[0].positions.clone();
    let blocks = vec![
        ObservableBlock::new(
            "translation",
            QuantityKind::CyclicRoots(n as u32),
            id,
            vec![("T1".into(), roots(positions.into_iter(), n))],
        )?,
        ObservableBlock::new(
            "dilation",
            QuantityKind::CyclicRoots(n as u32 - 1),
            fm,
            vec![("T2".into(), t2)],
        )?,
    ];
    let tails = (0..n - 1)
        .map(|m| GroupElement::new(vec![vec![0.0], vec![m as f64]]))
        .collect();
    let grid = PhaseGrid {
        n_translations: n,
        translation_weight: 1.0,
        tails,
        tail_weights: vec![1.0; n - 1],
    };
    let mut duflo_moore = vec![1.0; n];
    duflo_moore[0] = ((n - 1) as f64).sqrt();
    Ok(assemble(
        Parts {
            kind: TransformKind::Finwave,
            group,
            space,
            fourier,
            grid,
            blocks,
            duflo_moore,
            nominal_constant: n as f64,
        },
        params,
    ))
}

fn check_grid_size(n: usize, omega_max: f64) -> Result<()> {
    if n < 4 || !n.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("grid size {n} must be even and ≥ 4")));
    }
    if !(omega_max > 0.0) || !omega_max.is_finite() {
        return Err(Error::InvalidArgument("omega_max must be positive".into()));
    }
    Ok(())
}

fn wavelet1d(
    n: usize,
    omega_max: f64,
    (smin, smax, ns): (f64, f64, usize),
    params: &TransformParams,
) -> Result<TransformSpec> {
    check_grid_size(n, omega_max)?;
    let dt = PI / omega_max;
    let group = GroupSpec::wavelet1d();
    let space = Arc::new(SampledSpace::new(vec![Axis::centered("t", n, dt)])?);
    let (fourier, id, fm) = maps(&space)?;
    let w = fourier.target().axes()[0].positions.clone();
    let t = space.axes()[0].positions.clone();
    let blocks = vec![
        ObservableBlock::new("translation", QuantityKind::RealLine, id, vec![("T1".into(), real(t))])?,
        ObservableBlock::new(
            "scale",
            QuantityKind::RealLine,
            fm.clone(),
            vec![("T2".into(), real(w.iter().map(|x| -x.abs().ln())))],
        )?,
        ObservableBlock::new(
            "reflection",
            QuantityKind::CyclicRoots(2),
            fm,
            vec![("T3".into(), real(w.iter().map(|x| sign(*x))))],
        )?,
    ];
    let (scales, ds) = linspace(smin, smax, ns)?;
    let mut tails = Vec::new();
    let mut tail_weights = Vec::new();
    for k in 0..2 {
        for &g2 in &scales {
            tails.push(GroupElement::new(vec![vec![0.0], vec![g2], vec![k as f64]]));
            tail_weights.push((-g2).exp() * ds);
        }
    }
    let grid = PhaseGrid {
        n_translations: n,
        translation_weight: dt,
        tails,
        tail_weights,
    };
    let duflo_moore = w.iter().map(|x| x.abs().powf(-0.5)).collect();
    Ok(assemble(
        Parts {
            kind: TransformKind::Wavelet1d,
            group,
            space,
            fourier,
            grid,
            blocks,
            duflo_moore,
            nominal_constant: 2.0 * PI,
        },
        params,
    ))
}

fn shearlet(
    n: usize,
    omega_max: f64,
    (shear_max, nsh): (f64, usize),
    (smin, smax, ns): (f64, f64, usize),
    params: &TransformParams,
) -> Result<TransformSpec> {
    check_grid_size(n, omega_max)?;
    let dx = PI / omega_max;
    let group = GroupSpec::shearlet();
    let space = Arc::new(SampledSpace::new(vec![
        Axis::centered("x1", n, dx),
        Axis::centered("x2", n, dx),
    ])?);
    let (fourier, id, fm) = maps(&space)?;
    let fs = fourier.target().clone();
    let w1 = fs.axis_positions(0);
    let w2 = fs.axis_positions(1);
    let blocks = vec![
        ObservableBlock::new(
            "translation",
            QuantityKind::RealLine,
            id,
            vec![
                ("T1_1".into(), real(space.axis_positions(0))),
                ("T1_2".into(), real(space.axis_positions(1))),
            ],
        )?,
        ObservableBlock::new(
            "shear",
            QuantityKind::RealLine,
            fm.clone(),
            vec![("T2".into(), real(w1.iter().zip(&w2).map(|(a, b)| -b / a)))],
        )?,
        ObservableBlock::new(
            "scale",
            QuantityKind::RealLine,
            fm.clone(),
            vec![("T3".into(), real(w1.iter().map(|a| -a.abs().ln())))],
        )?,
        ObservableBlock::new(
            "reflection",
            QuantityKind::CyclicRoots(2),
            fm,
            vec![("T4".into(), real(w1.iter().map(|a| sign(*a))))],
        )?,
    ];
    let (shears, dsh) = linspace(-shear_max, shear_max, nsh)?;
    let (scales, ds) = linspace(smin, smax, ns)?;
    let mut tails = Vec::new();
    let mut tail_weights = Vec::new();
    for k in 0..2 {
        for &g3 in &scales {
            for &g2 in &shears {
                tails.push(GroupElement::new(vec![
                    vec![0.0, 0.0],
                    vec![g2],
                    vec![g3],
                    vec![k as f64],
                ]));
                tail_weights.push((-2.0 * g3).exp() * dsh * ds);
            }
        }
    }
    let grid = PhaseGrid {
        n_translations: n * n,
        translation_weight: dx * dx,
        tails,
        tail_weights,
    };
    let duflo_moore = w1.iter().map(|a| 1.0 / a.abs()).collect();
    Ok(assemble(
        Parts {
            kind: TransformKind::Shearlet,
            group,
            space,
            fourier,
            grid,
            blocks,
            duflo_moore,
            nominal_constant: 4.0 * PI * PI,
        },
        params,
    ))
}
