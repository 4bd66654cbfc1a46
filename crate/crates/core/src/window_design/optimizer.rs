//! Projected-gradient descent of an uncertainty functional over unit-norm windows.
//!
//! Every variance in the functional is a function of the block densities
//! `P_i = w_i |(U f)_i|² / ‖f‖²`. Writing `φ_i = ∂S/∂P_i` for the derivative
//! with respect to the density of each block, the gradient of `S(f)` in the
//! weighted inner product is `G = Σ_b (U_b*(φ_b · U_b f) − ⟨φ_b⟩ f) / ‖f‖²`,
//! with `dS = 2 Re⟨δf, G⟩`. For a variance `φ_i` is the weighted squared
//! deviation at sample `i`. The global variances also depend on `f` through
//! the correction matrix `A_m(h)`, whose derivative with respect to the
//! projected tail coordinates is taken by central differences.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::QuantityKind;
use crate::observables::{mapped_density, ObservableKind};
use crate::spaces::{inner_product, Signal, C64};
use crate::transforms::{TransformKind, TransformSpec};
use crate::uncertainty::{
    corrected_covariance, correction_matrix, projected_expected_element, ExpectedElement, GlobalMethod, WeightProfile,
};
use crate::windows::random_window;

/// Which functional to minimize.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// `Σ_m σ^{W_m}`, plain scalar variances.
    Plain,
    /// `S(f) = Σ_m Σ^{W_m}`, global variances.
    #[default]
    Global,
}

/// Linear constraint on the window spectrum, enforced exactly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SupportConstraint {
    #[default]
    None,
    /// Spectrum supported on `ω₁ > 0`.
    PositiveFrequencies,
    /// Zero spectrum at frequency zero.
    ZeroMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    /// Initial step length along the negative tangent gradient.
    pub step: f64,
    pub max_iter: usize,
    /// Stop once the tangent gradient norm falls below this value.
    pub grad_tol: f64,
    pub constraint: SupportConstraint,
    /// Seed for the random start when no initial window is given.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step: 0.1,
            max_iter: 2000,
            grad_tol: 1e-9,
            constraint: SupportConstraint::None,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidArgument(format!("step {} must be positive", self.step)));
        }
        if !(self.grad_tol > 0.0 && self.grad_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grad_tol {} must be positive",
                self.grad_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    /// Tangent gradient below tolerance.
    Converged,
    /// Iteration budget exhausted while still descending.
    MaxIterations,
    /// No step length decreased the objective.
    Stalled,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    /// Best iterate, unit norm and satisfying the constraint.
    pub window: Signal,
    pub objective: f64,
    pub iterations: usize,
    pub status: ConvergenceStatus,
    pub trace: Vec<TraceRow>,
}

impl OptimizeResult {
    pub fn converged(&self) -> bool {
        self.status == ConvergenceStatus::Converged
    }
}

/// Relative finite-difference step for the derivative of `A_m` in the tail coordinates.
const CORRECTION_FD_STEP: f64 = 1e-5;

fn zero_weight(w: &DMatrix<C64>) -> bool {
    w.iter().all(|v| v.norm() == 0.0)
}

fn method(spec: &TransformSpec, objective: Objective, m: usize) -> Result<GlobalMethod> {
    let block = &spec.group.blocks[m];
    match objective {
        Objective::Plain => Ok(GlobalMethod::Invariant),
        Objective::Global if block.kind.is_self_adjoint() => Ok(GlobalMethod::Corrected),
        Objective::Global if m + 1 == spec.group.num_blocks() || spec.kind == TransformKind::Fstft => {
            Ok(GlobalMethod::Invariant)
        }
        Objective::Global if spec.kind == TransformKind::Finwave && m == 0 => Ok(GlobalMethod::MeanSquare),
        Objective::Global => Err(Error::Precondition(format!(
            "no global variance for unitary block {}",
            block.name
        ))),
    }
}

/// `Re Σ_ab W_ab (M_a − e_a) conj(M_b − e_b)` at every sample.
fn squared_deviation(mult: &[Vec<C64>], e: &[C64], w: &DMatrix<C64>) -> Vec<f64> {
    let k = e.len();
    (0..mult[0].len())
        .map(|i| {
            let d: Vec<C64> = (0..k).map(|a| mult[a][i] - e[a]).collect();
            let mut s = C64::new(0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    s += w[(a, b)] * d[a] * d[b].conj();
                }
            }
            s.re
        })
        .collect()
}

/// Corrected multipliers `A M` of a self-adjoint block.
fn corrected_multipliers(mult: &[Vec<C64>], a: &DMatrix<f64>) -> Vec<Vec<C64>> {
    let k = mult.len();
    (0..k)
        .map(|r| {
            (0..mult[0].len())
                .map(|i| C64::new((0..k).map(|c| a[(r, c)] * mult[c][i].re).sum(), 0.0))
                .collect()
        })
        .collect()
}

/// `∂c/∂P_i` for a projected coordinate `c = Λ(e)` with `e = Σ P M`.
fn projection_derivative(kind: QuantityKind, mult: &[C64], e: C64) -> Option<Vec<f64>> {
    match kind {
        QuantityKind::RealLine => Some(mult.iter().map(|m| m.re).collect()),
        QuantityKind::Circle => Some(mult.iter().map(|m| (m / e).im).collect()),
        // Rounded projections are locally constant.
        QuantityKind::Integers | QuantityKind::CyclicRoots(_) => None,
    }
}

/// `S`, then the density derivatives `φ_b` and the densities of every block.
type ObjectiveTerms = (f64, Vec<Vec<f64>>, Vec<Vec<f64>>);

/// Value of `S` and the density derivatives `φ_b` of every block.
fn objective_terms(
    spec: &TransformSpec,
    objective: Objective,
    weights: &WeightProfile,
    f: &Signal,
) -> Result<ObjectiveTerms> {
    weights.validate(spec)?;
    let blocks = &spec.observables.blocks;
    let dens: Vec<Vec<f64>> = blocks
        .iter()
        .map(|b| mapped_density(b.map.as_ref(), f).map(|(p, _)| p))
        .collect::<Result<_>>()?;
    let e: ExpectedElement = projected_expected_element(spec, f)?;
    let mut phi: Vec<Vec<f64>> = dens.iter().map(|p| vec![0.0; p.len()]).collect();
    let mut total = 0.0;
    for (m, w) in weights.blocks.iter().enumerate() {
        if zero_weight(w) {
            continue;
        }
        let block = &blocks[m];
        let mo = &e.moments[m];
        match method(spec, objective, m)? {
            GlobalMethod::Invariant => {
                let d = squared_deviation(&block.multipliers, &mo.e, w);
                total += d.iter().zip(&dens[m]).map(|(a, p)| a * p).sum::<f64>().max(0.0);
                for (x, v) in phi[m].iter_mut().zip(d) {
                    *x += v;
                }
            }
            GlobalMethod::MeanSquare => {
                let wt = block.map.target().weights();
                let s4: f64 = dens[m].iter().zip(wt).map(|(p, w)| p * p / w).sum();
                let c = w[(0, 0)].re;
                total += c * (1.0 - s4 * s4).max(0.0);
                for ((x, p), wi) in phi[m].iter_mut().zip(&dens[m]).zip(wt) {
                    *x -= c * 4.0 * s4 * p / wi;
                }
            }
            GlobalMethod::Corrected => {
                let (a, degenerate) = correction_matrix(spec, m, &e);
                let mult = corrected_multipliers(&block.multipliers, &a);
                let ep: Vec<C64> = (0..mo.e.len())
                    .map(|r| C64::new((0..mo.e.len()).map(|c| a[(r, c)] * mo.e[c].re).sum(), 0.0))
                    .collect();
                let d = squared_deviation(&mult, &ep, w);
                total += d.iter().zip(&dens[m]).map(|(a, p)| a * p).sum::<f64>().max(0.0);
                for (x, v) in phi[m].iter_mut().zip(d) {
                    *x += v;
                }
                if degenerate {
                    continue;
                }
                // Dependence of A_m on the projected coordinates of later blocks.
                let value_at = |el: &ExpectedElement| {
                    let (a, _) = correction_matrix(spec, m, el);
                    crate::observables::scalar_from_cov(&corrected_covariance(&mo.cov, &a), w)
                };
                for j in m + 1..spec.group.num_blocks() {
                    let kind = spec.group.blocks[j].kind;
                    for c in 0..spec.group.blocks[j].size {
                        let Some(dc) = projection_derivative(kind, &blocks[j].multipliers[c], e.moments[j].e[c]) else {
                            continue;
                        };
                        let x0 = e.element.coords[j][c];
                        let h = CORRECTION_FD_STEP * (1.0 + x0.abs());
                        let mut ep = e.clone();
                        ep.element.coords[j][c] = x0 + h;
                        let fp = value_at(&ep);
                        ep.element.coords[j][c] = x0 - h;
                        let fm = value_at(&ep);
                        let slope = (fp - fm) / (2.0 * h);
                        for (x, v) in phi[j].iter_mut().zip(dc) {
                            *x += slope * v;
                        }
                    }
                }
            }
        }
    }
    Ok((total, phi, dens))
}

/// `S(f)` and its gradient `G` with `dS = 2 Re⟨δf, G⟩`.
pub fn objective_and_gradient(
    spec: &TransformSpec,
    objective: Objective,
    weights: &WeightProfile,
    f: &Signal,
) -> Result<(f64, Signal)> {
    let (total, phi, dens) = objective_terms(spec, objective, weights, f)?;
    let n2 = f.norm_sqr();
    let mut grad = Signal::zeros(spec.space.clone());
    for (b, block) in spec.observables.blocks.iter().enumerate() {
        if phi[b].iter().all(|v| *v == 0.0) {
            continue;
        }
        let mean: f64 = phi[b].iter().zip(&dens[b]).map(|(a, p)| a * p).sum();
        let y = block.map.forward_values(f.values());
        let v: Vec<C64> = y.iter().zip(&phi[b]).map(|(y, p)| y * *p).collect();
        let back = Signal::new(spec.space.clone(), block.map.inverse_values(&v))?;
        grad = grad.axpy(C64::new(1.0 / n2, 0.0), &back)?;
        grad = grad.axpy(C64::new(-mean / n2, 0.0), f)?;
    }
    Ok((total, grad))
}

/// Plain evaluation of the objective.
pub fn objective_value(spec: &TransformSpec, objective: Objective, weights: &WeightProfile, f: &Signal) -> Result<f64> {
    Ok(objective_terms(spec, objective, weights, f)?.0)
}

/// Orthogonal projection onto the constraint subspace.
pub fn apply_constraint(spec: &TransformSpec, c: SupportConstraint, f: &Signal) -> Result<Signal> {
    match c {
        SupportConstraint::None => Ok(f.clone()),
        SupportConstraint::ZeroMean => {
            let mut v = spec.to_freq(f)?;
            let fs = spec.freq_space().clone();
            for (i, x) in v.iter_mut().enumerate() {
                if fs.coords(i).iter().all(|c| *c == 0.0) {
                    *x = C64::new(0.0, 0.0);
                }
            }
            spec.from_freq(v)
        }
        SupportConstraint::PositiveFrequencies => {
            let mut v = spec.to_freq(f)?;
            let fs = spec.freq_space().clone();
            for (i, x) in v.iter_mut().enumerate() {
                if fs.coords(i)[0] <= 0.0 {
                    *x = C64::new(0.0, 0.0);
                }
            }
            spec.from_freq(v)
        }
    }
}

/// Outcome of comparing directional finite differences with the analytic gradient.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradientCheck {
    /// `(finite difference, analytic)` directional derivatives.
    pub samples: Vec<(f64, f64)>,
    pub max_rel_error: f64,
}

/// Central differences `(S(f+hd) − S(f−hd))/2h` against `2 Re⟨d, G⟩` along
/// one random direction per point.
pub fn fd_gradient_check(
    spec: &TransformSpec,
    objective: Objective,
    weights: &WeightProfile,
    points: &[Signal],
    h: f64,
    seed: u64,
) -> Result<GradientCheck> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    let mut worst: f64 = 0.0;
    for f in points {
        let v: Vec<C64> = (0..f.values().len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let d = Signal::new(spec.space.clone(), v)?
            .normalized()?
            .0
            .scaled(C64::new(f.norm(), 0.0));
        let (_, g) = objective_and_gradient(spec, objective, weights, f)?;
        let analytic = 2.0 * inner_product(&d, &g)?.re;
        let sp = objective_value(spec, objective, weights, &f.axpy(C64::new(h, 0.0), &d)?)?;
        let sm = objective_value(spec, objective, weights, &f.axpy(C64::new(-h, 0.0), &d)?)?;
        let fd = (sp - sm) / (2.0 * h);
        worst = worst.max((fd - analytic).abs() / analytic.abs().max(f64::MIN_POSITIVE));
        samples.push((fd, analytic));
    }
    Ok(GradientCheck {
        samples,
        max_rel_error: worst,
    })
}

/// Longest run of step halvings before declaring a stall.
const MAX_HALVINGS: usize = 60;
/// Armijo sufficient-decrease constant.
const ARMIJO: f64 = 1e-4;

/// Minimizes the objective over unit-norm windows satisfying the constraint.
///
/// Each iteration projects the gradient onto the constraint subspace and the
/// tangent space of the sphere, steps along its negative and renormalizes,
/// halving the step until the Armijo condition holds. Accepted steps double
/// the step for the next iteration. The objective trace is non-increasing.
pub fn optimize_window(
    spec: &TransformSpec,
    objective: Objective,
    weights: &WeightProfile,
    config: &OptimizerConfig,
    f0: Option<&Signal>,
) -> Result<OptimizeResult> {
    config.validate()?;
    let start = match f0 {
        Some(f) => f.clone(),
        None => random_window(spec, &mut ChaCha8Rng::seed_from_u64(config.seed))?,
    };
    let mut x = apply_constraint(spec, config.constraint, &start)?.normalized()?.0;
    let (mut s, mut g) = objective_and_gradient(spec, objective, weights, &x)?;
    let mut step = config.step;
    let mut trace = Vec::new();
    let mut status = ConvergenceStatus::MaxIterations;
    let mut iter = 0;
    loop {
        let gc = apply_constraint(spec, config.constraint, &g)?;
        let radial = inner_product(&gc, &x)?.re;
        let gt = gc.axpy(C64::new(-radial, 0.0), &x)?;
        let gn = gt.norm();
        trace.push(TraceRow {
            iter,
            objective: s,
            grad_norm: gn,
        });
        if gn < config.grad_tol {
            status = ConvergenceStatus::Converged;
            break;
        }
        if iter == config.max_iter {
            break;
        }
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let cand = x.axpy(C64::new(-step, 0.0), &gt)?.normalized()?.0;
            let sc = objective_value(spec, objective, weights, &cand)?;
            if sc <= s - ARMIJO * 2.0 * step * gn * gn {
                accepted = Some((cand, sc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, sc)) = accepted else {
            status = ConvergenceStatus::Stalled;
            break;
        };
        x = cand;
        let (s_new, g_new) = objective_and_gradient(spec, objective, weights, &x)?;
        debug_assert!((s_new - sc).abs() <= 1e-12 * (1.0 + sc.abs()));
        s = s_new;
        g = g_new;
        step *= 2.0;
        iter += 1;
    }
    Ok(OptimizeResult {
        window: x,
        objective: s,
        iterations: iter,
        status,
        trace,
    })
}

/// Observable kinds carried by the gradient, for diagnostics.
pub fn block_kinds(spec: &TransformSpec) -> Vec<ObservableKind> {
    spec.observables.blocks.iter().map(|b| b.kind()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{default_params, TransformParams};
    use crate::uncertainty::global_uncertainty;
    use crate::windows::{builtin_window, remove_mean, BuiltinWindow};

    fn spec(kind: TransformKind) -> TransformSpec {
        TransformSpec::new(&default_params(kind)).unwrap()
    }

    fn random_points(s: &TransformSpec, n: usize, seed: u64, c: SupportConstraint) -> Vec<Signal> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                apply_constraint(s, c, &random_window(s, &mut rng).unwrap())
                    .unwrap()
                    .normalized()
                    .unwrap()
                    .0
            })
            .collect()
    }

    #[test]
    fn objective_matches_uncertainty_report() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for kind in [
            TransformKind::Fstft,
            TransformKind::Finwave,
            TransformKind::Wavelet1d,
            TransformKind::Shearlet,
        ] {
            let s = spec(kind);
            let w = WeightProfile::identity(&s);
            let f = random_window(&s, &mut rng).unwrap();
            let r = global_uncertainty(&s, &f, &w, false).unwrap();
            let v = objective_value(&s, Objective::Global, &w, &f).unwrap();
            assert!(
                (v - r.total).abs() < 1e-12 * (1.0 + r.total),
                "{kind:?}: {v} vs {}",
                r.total
            );
            let plain: f64 = r.blocks.iter().map(|b| b.sigma).sum();
            let v = objective_value(&s, Objective::Plain, &w, &f).unwrap();
            assert!((v - plain).abs() < 1e-12 * (1.0 + plain), "{kind:?}");
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences() {
        let cases = [
            (TransformKind::Fstft, SupportConstraint::None),
            (TransformKind::Finwave, SupportConstraint::ZeroMean),
            (TransformKind::Wavelet1d, SupportConstraint::None),
        ];
        for (kind, c) in cases {
            let s = spec(kind);
            let w = WeightProfile::identity(&s);
            let pts = random_points(&s, 10, 2, c);
            for obj in [Objective::Plain, Objective::Global] {
                let chk = fd_gradient_check(&s, obj, &w, &pts, 1e-6, 3).unwrap();
                assert!(chk.max_rel_error < 1e-5, "{kind:?} {obj:?}: {}", chk.max_rel_error);
            }
        }
    }

    #[test]
    fn shearlet_gradient_matches_finite_differences() {
        let s = TransformSpec::new(&TransformParams::Shearlet {
            n: 32,
            omega_max: 8.0,
            shear_max: 1.0,
            n_shears: 3,
            scale_min: 0.0,
            scale_max: 0.0,
            n_scales: 1,
        })
        .unwrap();
        let w = WeightProfile::identity(&s);
        let pts = random_points(&s, 3, 4, SupportConstraint::PositiveFrequencies);
        let chk = fd_gradient_check(&s, Objective::Global, &w, &pts, 1e-6, 5).unwrap();
        assert!(chk.max_rel_error < 1e-5, "{}", chk.max_rel_error);
    }

    #[test]
    fn fstft_descent_approaches_the_gaussian() {
        let s = spec(TransformKind::Fstft);
        let w = WeightProfile::identity(&s);
        let gauss = builtin_window(&s, BuiltinWindow::Gaussian).unwrap();
        let reference = objective_value(&s, Objective::Global, &w, &gauss).unwrap();
        let res = optimize_window(&s, Objective::Global, &w, &OptimizerConfig::default(), None).unwrap();
        assert!(res.trace.windows(2).all(|p| p[1].objective <= p[0].objective));
        assert!((res.window.norm() - 1.0).abs() < 1e-12);
        assert!(res.objective <= 1.01 * reference, "{} vs {reference}", res.objective);
    }

    #[test]
    fn descent_from_the_gaussian_never_increases() {
        let s = spec(TransformKind::Fstft);
        let w = WeightProfile::identity(&s);
        let gauss = builtin_window(&s, BuiltinWindow::Gaussian).unwrap();
        let s0 = objective_value(&s, Objective::Global, &w, &gauss).unwrap();
        let cfg = OptimizerConfig {
            max_iter: 50,
            ..Default::default()
        };
        let res = optimize_window(&s, Objective::Global, &w, &cfg, Some(&gauss)).unwrap();
        assert!(res.trace.windows(2).all(|p| p[1].objective <= p[0].objective));
        assert!(res.objective <= s0);
    }

    #[test]
    fn finwave_optimum_beats_random_search() {
        let s = spec(TransformKind::Finwave);
        let w = WeightProfile::identity(&s);
        let cfg = OptimizerConfig {
            constraint: SupportConstraint::ZeroMean,
            ..Default::default()
        };
        let res = optimize_window(&s, Objective::Global, &w, &cfg, None).unwrap();
        let freq = s.to_freq(&res.window).unwrap();
        assert!(freq[0].norm() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let best = (0..1000)
            .map(|_| {
                let f = remove_mean(&s, &random_window(&s, &mut rng).unwrap()).unwrap();
                objective_value(&s, Objective::Global, &w, &f).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(res.objective <= best, "{} vs {best}", res.objective);
    }

    #[test]
    fn config_is_validated() {
        let bad = OptimizerConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let cfg: OptimizerConfig = serde_json::from_str(r#"{"max_iter": 5, "constraint": "zero_mean"}"#).unwrap();
        assert_eq!(cfg.constraint, SupportConstraint::ZeroMean);
    }
}
