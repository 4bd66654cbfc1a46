//! Linear interpolation on uniform grids, zero outside the sampled range.

use super::C64;

/// Linear interpolation of samples `values[k]` at positions `x0 + k·dx`.
pub fn interp_linear(values: &[C64], x0: f64, dx: f64, x: f64) -> C64 {
    let n = values.len();
    let p = (x - x0) / dx;
    if !(p >= 0.0) || p > (n - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let k = (p.floor() as usize).min(n.saturating_sub(2));
    let t = p - k as f64;
    if n == 1 {
        return values[0];
    }
    values[k] * (1.0 - t) + values[k + 1] * t
}

/// Bilinear interpolation of a row-major `n0 × n1` array.
pub fn interp_bilinear(values: &[C64], n1: usize, (x0, dx): (f64, f64), (y0, dy): (f64, f64), x: f64, y: f64) -> C64 {
    let n0 = values.len() / n1;
    let p = (x - x0) / dx;
    let q = (y - y0) / dy;
    if !(p >= 0.0) || !(q >= 0.0) || p > (n0 - 1) as f64 || q > (n1 - 1) as f64 {
        return C64::new(0.0, 0.0);
    }
    let i = (p.floor() as usize).min(n0 - 2);
    let j = (q.floor() as usize).min(n1 - 2);
    let (s, t) = (p - i as f64, q - j as f64);
    let v = |a: usize, b: usize| values[a * n1 + b];
    v(i, j) * ((1.0 - s) * (1.0 - t))
        + v(i + 1, j) * (s * (1.0 - t))
        + v(i, j + 1) * ((1.0 - s) * t)
        + v(i + 1, j + 1) * (s * t)
}
