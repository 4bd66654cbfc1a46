//! Analysis `V_f[s](g) = ⟨s, π(g)f⟩`, synthesis `V_h*`, group convolution
//! and calibration of the resolution-of-identity constant.

use std::f64::consts::PI;

use super::{PhaseFunction, TransformKind, TransformSpec};
use crate::error::{Error, Result};
use crate::groups::GroupElement;
use crate::spaces::{check_same, DomainMap, Signal, C64};

/// `√(N · w_t · w_ω)`: converts an inverse (forward) unitary DFT into the
/// weighted sum over the frequency (translation) grid.
pub fn translation_factor(spec: &TransformSpec) -> f64 {
    let n = spec.space.len() as f64;
    (n * spec.space.weights()[0] * spec.freq_space().weights()[0]).sqrt()
}

/// `V_f[s]` on the phase grid, one inverse FFT per tail element.
pub fn analyze(spec: &TransformSpec, f: &Signal, s: &Signal) -> Result<PhaseFunction> {
    check_same(f.space(), &spec.space)?;
    check_same(s.space(), &spec.space)?;
    spec.admissible_norm(f)?;
    let fhat = spec.to_freq(f)?;
    let shat = spec.to_freq(s)?;
    Ok(analyze_freq(spec, &fhat, &shat))
}

/// Analysis from frequency-domain values, without admissibility checks.
pub(crate) fn analyze_freq(spec: &TransformSpec, fhat: &[C64], shat: &[C64]) -> PhaseFunction {
    let fac = translation_factor(spec);
    let mut values = Vec::with_capacity(spec.grid.len());
    for h in &spec.grid.tails {
        let u = spec.tail_freq(h, fhat);
        let y: Vec<C64> = shat.iter().zip(&u).map(|(a, b)| a * b.conj()).collect();
        values.extend(spec.fourier.inverse_values(&y).into_iter().map(|v| v * fac));
    }
    PhaseFunction { values }
}

/// `V_h*[F] = Σ_g F(g) π(g)h μ(g)`.
pub fn synthesize(spec: &TransformSpec, h: &Signal, f: &PhaseFunction) -> Result<Signal> {
    check_same(h.space(), &spec.space)?;
    spec.check_grid(f)?;
    spec.admissible_norm(h)?;
    let hhat = spec.to_freq(h)?;
    spec.from_freq(synthesize_freq(spec, &hhat, f))
}

pub(crate) fn synthesize_freq(spec: &TransformSpec, hhat: &[C64], f: &PhaseFunction) -> Vec<C64> {
    let fac = translation_factor(spec);
    let nt = spec.grid.n_translations;
    let mut acc = vec![C64::new(0.0, 0.0); hhat.len()];
    for (t, tail) in spec.grid.tails.iter().enumerate() {
        let slice = &f.values[t * nt..(t + 1) * nt];
        if slice.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            continue;
        }
        let u = spec.tail_freq(tail, hhat);
        let y = spec.fourier.forward_values(slice);
        let mu = spec.grid.tail_weights[t] * fac;
        for ((a, u), y) in acc.iter_mut().zip(&u).zip(&y) {
            *a += u * y * mu;
        }
    }
    acc
}

/// Central phase `χ(q, g)` with `π(q)⁻¹π(g) = χ(q, g) π(q⁻¹•g)`.
///
/// The finite STFT group is the Heisenberg group with its center dropped,
/// so operators compose up to this phase; the other groups have `χ = 1`.
pub fn cocycle(spec: &TransformSpec, q: &GroupElement, g: &GroupElement) -> C64 {
    match spec.kind {
        TransformKind::Fstft => {
            let n = spec.space.len() as f64;
            let (a, b) = (q.coords[0][0], q.coords[1][0]);
            let r = (b * (g.coords[0][0] - a)).rem_euclid(n);
            C64::from_polar(1.0, -2.0 * PI * r / n)
        }
        _ => C64::new(1.0, 0.0),
    }
}

/// `[F∗Q](g) = Σ_q conj(χ(q,g)) F(q⁻¹•g) Q(q) μ(q)` on a finite group.
///
/// With `F = V_f[f]` this is `V_f V_f*[Q]`; the central phase makes the
/// identity exact on the cross-section of the Heisenberg group.
pub fn group_convolve(spec: &TransformSpec, f: &PhaseFunction, q: &PhaseFunction) -> Result<PhaseFunction> {
    spec.check_grid(f)?;
    spec.check_grid(q)?;
    if !spec.kind.is_finite() {
        return Err(Error::Precondition(
            "group convolution is exact only on finite groups; q⁻¹•g leaves continuum grids".into(),
        ));
    }
    let n = spec.grid.len();
    let elements: Vec<GroupElement> = (0..n).map(|i| spec.grid_element(i)).collect();
    let inverses: Vec<GroupElement> = elements.iter().map(|e| spec.group.inverse_unchecked(e)).collect();
    let mut out = PhaseFunction::zeros(n);
    for (gi, g) in elements.iter().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (qi, qv) in q.values.iter().enumerate() {
            if *qv == C64::new(0.0, 0.0) {
                continue;
            }
            let prod = spec.group.multiply_unchecked(&inverses[qi], g);
            let idx = spec
                .locate(&prod)
                .ok_or_else(|| Error::Numeric("q⁻¹•g fell off a finite grid".into()))?;
            acc += cocycle(spec, &elements[qi], g).conj() * f.values[idx] * qv * spec.grid.weight(qi);
        }
        out.values[gi] = acc;
    }
    Ok(out)
}

/// Measured resolution-of-identity constant `Σ|V_f[s]|²μ / (‖Af‖² ‖s‖²)`.
pub fn calibrate(spec: &TransformSpec, f: &Signal, s: &Signal) -> Result<f64> {
    let af = spec.admissible_norm(f)?;
    let v = analyze(spec, f, s)?;
    let n = v.norm(&spec.grid);
    Ok(n * n / (af * af * s.norm_sqr()))
}
