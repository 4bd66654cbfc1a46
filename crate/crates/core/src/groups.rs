//! Physical quantities and nested semi-direct product groups in coordinates.
//!
//! A group is `G = N_1 ⋊ (N_2 ⋊ (… ⋊ N_M))`, each block `N_m` a direct product
//! of `K_m` copies of one physical quantity. Elements are stored as per-block
//! coordinate vectors. Real quantities store their value, circle quantities
//! store an angle and `N`-th roots of unity store the integer exponent `k`
//! of `e^{2πik/N}`, so the group law on every block is coordinate addition.
//!
//! The product is `g•g' = (g_m + A_m(h_m) g'_m)_m` where `h_m` is the tail
//! `(g_{m+1}, …, g_M)` and `A_m(h_m)` a `K_m × K_m` matrix acting on
//! coordinates (on exponents for circle kinds).

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spaces::C64;

/// Modulus below which an expected value on a circle has no defined argument.
pub const ZERO_MODULUS: f64 = 1e-12;

/// One of the four numerical Lie groups used as physical quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuantityKind {
    RealLine,
    Integers,
    Circle,
    CyclicRoots(u32),
}

impl QuantityKind {
    /// Whether observables of this quantity are self-adjoint (as opposed to unitary).
    pub fn is_self_adjoint(&self) -> bool {
        matches!(self, QuantityKind::RealLine | QuantityKind::Integers)
    }

    /// Canonical representative of a coordinate.
    pub fn reduce(&self, c: f64) -> f64 {
        match *self {
            QuantityKind::RealLine => c,
            QuantityKind::Integers => c.round(),
            QuantityKind::Circle => c.rem_euclid(2.0 * PI),
            QuantityKind::CyclicRoots(n) => c.round().rem_euclid(n as f64),
        }
    }

    /// Group value of a coordinate: the real number itself or a unit complex number.
    pub fn value(&self, c: f64) -> C64 {
        match *self {
            QuantityKind::RealLine | QuantityKind::Integers => C64::new(c, 0.0),
            QuantityKind::Circle => C64::from_polar(1.0, c),
            QuantityKind::CyclicRoots(n) => C64::from_polar(1.0, 2.0 * PI * c / n as f64),
        }
    }

    /// Coordinate as a point of a Euclidean chart: circle kinds map to angles.
    pub fn chart(&self, c: f64) -> f64 {
        match *self {
            QuantityKind::CyclicRoots(n) => 2.0 * PI * c / n as f64,
            _ => c,
        }
    }

    /// Signed chart distance, wrapped to `(-π, π]` for circle kinds.
    pub fn chart_difference(&self, a: f64, b: f64) -> f64 {
        let d = self.chart(a) - self.chart(b);
        match self {
            QuantityKind::Circle | QuantityKind::CyclicRoots(_) => {
                let w = (d + PI).rem_euclid(2.0 * PI) - PI;
                if w == -PI {
                    PI
                } else {
                    w
                }
            }
            _ => d,
        }
    }

    pub fn validate(&self, c: f64) -> Result<()> {
        if !c.is_finite() {
            return Err(Error::Domain(format!("non-finite coordinate {c}")));
        }
        match *self {
            QuantityKind::Integers if c.fract() != 0.0 => Err(Error::Domain(format!("{c} is not an integer"))),
            QuantityKind::CyclicRoots(n) if c.fract() != 0.0 || c < 0.0 || c >= n as f64 => {
                Err(Error::Domain(format!("{c} is not an exponent in 0..{n}")))
            }
            _ => Ok(()),
        }
    }

    /// Projection `Λ` of an expected value onto the quantity, as a coordinate.
    ///
    /// Identity on ℝ, nearest integer with ties to the smaller one on ℤ, the
    /// argument on the circle and the nearest root (ties clockwise) on roots
    /// of unity. A zero expected value on a circle kind has no projection.
    pub fn project(&self, e: C64) -> Result<f64> {
        match *self {
            QuantityKind::RealLine => Ok(e.re),
            QuantityKind::Integers => Ok((e.re - 0.5).ceil()),
            QuantityKind::Circle | QuantityKind::CyclicRoots(_) if e.norm() < ZERO_MODULUS => {
                Err(Error::UndefinedProjection(format!("{e}")))
            }
            QuantityKind::Circle => Ok(e.arg().rem_euclid(2.0 * PI)),
            QuantityKind::CyclicRoots(n) => {
                let n = n as f64;
                let t = (e.arg() * n / (2.0 * PI)).rem_euclid(n);
                Ok((t - 0.5).ceil().rem_euclid(n))
            }
        }
    }
}

/// A block `N_m = G_m^{K_m}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub name: String,
    pub kind: QuantityKind,
    pub size: usize,
}

/// Named automorphism families of the built-in groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Time × frequency over `Z/N`, trivial action (center dropped).
    Fstft { n: u32 },
    /// Translations ⋊ (log-dilations × reflections), `A_1(g₂, g₃) = g₃ e^{g₂}`.
    Wavelet1d,
    /// Translations ⋊ (shears ⋊ (anisotropic log-dilations × reflections)).
    Shearlet,
    /// `Z/N ⋊ (Z/N)^×` with the multiplicative block indexed by powers of `root`.
    FiniteAffine { n: u32, root: u32 },
}

/// A nested semi-direct product of physical quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub name: String,
    pub blocks: Vec<Block>,
    pub family: Family,
}

/// Element of a [`GroupSpec`], one coordinate vector per block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupElement {
    pub coords: Vec<Vec<f64>>,
}

impl GroupElement {
    pub fn new(coords: Vec<Vec<f64>>) -> Self {
        GroupElement { coords }
    }

    /// All coordinates flattened in block order.
    pub fn flat(&self) -> Vec<f64> {
        self.coords.iter().flatten().copied().collect()
    }
}

fn block(name: &str, kind: QuantityKind, size: usize) -> Block {
    Block {
        name: name.to_string(),
        kind,
        size,
    }
}

/// `a^e mod n` by repeated squaring.
pub fn pow_mod(a: u64, mut e: u64, n: u64) -> u64 {
    let mut base = a % n;
    let mut acc = 1 % n;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % n;
        }
        base = base * base % n;
        e >>= 1;
    }
    acc
}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
}

/// Smallest primitive root modulo a prime `n`.
pub fn smallest_primitive_root(n: u32) -> Result<u32> {
    if !is_prime(n) {
        return Err(Error::InvalidArgument(format!("{n} is not prime")));
    }
    if n == 2 {
        return Ok(1);
    }
    let phi = (n - 1) as u64;
    let mut factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            factors.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..n)
        .find(|&r| factors.iter().all(|&p| pow_mod(r as u64, phi / p, n as u64) != 1))
        .ok_or_else(|| Error::Numeric(format!("no primitive root found for {n}")))
}

impl GroupSpec {
    /// Reduced finite STFT group over `Z/N` (time × frequency).
    pub fn fstft(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument("FSTFT needs N ≥ 2".into()));
        }
        Ok(GroupSpec {
            name: "fstft".into(),
            blocks: vec![
                block("time", QuantityKind::CyclicRoots(n), 1),
                block("frequency", QuantityKind::CyclicRoots(n), 1),
            ],
            family: Family::Fstft { n },
        })
    }

    /// Reduced 1D affine group: translations ⋊ (log-dilations × reflections).
    pub fn wavelet1d() -> Self {
        GroupSpec {
            name: "wavelet1d".into(),
            blocks: vec![
                block("translation", QuantityKind::RealLine, 1),
                block("scale", QuantityKind::RealLine, 1),
                block("reflection", QuantityKind::CyclicRoots(2), 1),
            ],
            family: Family::Wavelet1d,
        }
    }

    /// Shearlet group: translations ⋊ (shears ⋊ (dilations × reflections)).
    pub fn shearlet() -> Self {
        GroupSpec {
            name: "shearlet".into(),
            blocks: vec![
                block("translation", QuantityKind::RealLine, 2),
                block("shear", QuantityKind::RealLine, 1),
                block("scale", QuantityKind::RealLine, 1),
                block("reflection", QuantityKind::CyclicRoots(2), 1),
            ],
            family: Family::Shearlet,
        }
    }

    /// Finite affine group `Z/N ⋊ (Z/N)^×` for prime `N`.
    pub fn finite_affine(n: u32) -> Result<Self> {
        let root = smallest_primitive_root(n)?;
        if n < 3 {
            return Err(Error::InvalidArgument("finite wavelet needs a prime N ≥ 3".into()));
        }
        Ok(GroupSpec {
            name: "finwave".into(),
            blocks: vec![
                block("translation", QuantityKind::CyclicRoots(n), 1),
                block("dilation", QuantityKind::CyclicRoots(n - 1), 1),
            ],
            family: Family::FiniteAffine { n, root },
        })
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::new(self.blocks.iter().map(|b| vec![0.0; b.size]).collect())
    }

    /// Checks block structure and coordinate domains.
    pub fn validate(&self, g: &GroupElement) -> Result<()> {
        if g.coords.len() != self.blocks.len() {
            return Err(Error::Domain(format!(
                "{} blocks expected, got {}",
                self.blocks.len(),
                g.coords.len()
            )));
        }
        for (b, c) in self.blocks.iter().zip(&g.coords) {
            if c.len() != b.size {
                return Err(Error::Domain(format!(
                    "block {} expects {} coordinates, got {}",
                    b.name,
                    b.size,
                    c.len()
                )));
            }
            for v in c {
                b.kind.validate(*v)?;
            }
        }
        Ok(())
    }

    /// `A_m(h_m)` for the tail `h_m = (g_{m+1}, …, g_M)` of an element.
    ///
    /// Blocks are indexed from zero. For circle kinds the matrix acts on
    /// exponents and results are reduced modulo the group order.
    pub fn automorphism_matrix(&self, m: usize, g: &GroupElement) -> DMatrix<f64> {
        let k = self.blocks[m].size;
        let c = &g.coords;
        let refl = |b: usize| if c[b][0] == 0.0 { 1.0 } else { -1.0 };
        match (&self.family, m) {
            (Family::Wavelet1d, 0) => DMatrix::from_element(1, 1, refl(2) * c[1][0].exp()),
            (Family::Shearlet, 0) => {
                let (s, a) = (c[1][0], c[2][0]);
                let e = a.exp();
                let h = (0.5 * a).exp();
                DMatrix::from_row_slice(2, 2, &[e, h * s, 0.0, h]) * refl(3)
            }
            (Family::Shearlet, 1) => DMatrix::from_element(1, 1, (0.5 * c[2][0]).exp()),
            (Family::FiniteAffine { n, root }, 0) => {
                DMatrix::from_element(1, 1, pow_mod(*root as u64, c[1][0] as u64, *n as u64) as f64)
            }
            _ => DMatrix::identity(k, k),
        }
    }

    /// Group product `g • g'`.
    pub fn multiply(&self, g: &GroupElement, gp: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        self.validate(gp)?;
        Ok(self.multiply_unchecked(g, gp))
    }

    pub(crate) fn multiply_unchecked(&self, g: &GroupElement, gp: &GroupElement) -> GroupElement {
        let coords = self
            .blocks
            .iter()
            .enumerate()
            .map(|(m, b)| {
                let a = self.automorphism_matrix(m, g);
                let v = &a * nalgebra::DVector::from_column_slice(&gp.coords[m]);
                (0..b.size).map(|k| b.kind.reduce(g.coords[m][k] + v[k])).collect()
            })
            .collect();
        GroupElement::new(coords)
    }

    /// Group inverse, built from the last block backwards:
    /// `g⁻¹_m = A_m(h_m⁻¹)(-g_m)`.
    pub fn inverse(&self, g: &GroupElement) -> Result<GroupElement> {
        self.validate(g)?;
        Ok(self.inverse_unchecked(g))
    }

    pub(crate) fn inverse_unchecked(&self, g: &GroupElement) -> GroupElement {
        let mut out = self.identity();
        for m in (0..self.blocks.len()).rev() {
            let a = self.automorphism_matrix(m, &out);
            let neg = nalgebra::DVector::from_iterator(self.blocks[m].size, g.coords[m].iter().map(|v| -v));
            let v = a * neg;
            out.coords[m] = (0..self.blocks[m].size)
                .map(|k| self.blocks[m].kind.reduce(v[k]))
                .collect();
        }
        out
    }

    /// Element with only the tail blocks `m+1..` of `g` (zero elsewhere).
    pub fn tail(&self, m: usize, g: &GroupElement) -> GroupElement {
        let mut out = self.identity();
        for b in m + 1..self.blocks.len() {
            out.coords[b] = g.coords[b].clone();
        }
        out
    }

    /// Max coordinate distance between two elements, using chart differences.
    pub fn coordinate_distance(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(m, blk)| {
                (0..blk.size).map(move |k| blk.kind.chart_difference(a.coords[m][k], b.coords[m][k]).abs())
            })
            .fold(0.0, f64::max)
    }

    /// Euclidean distance in the chart where circle kinds are angles.
    pub fn chart_distance(&self, a: &GroupElement, b: &GroupElement) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(m, blk)| {
                (0..blk.size).map(move |k| blk.kind.chart_difference(a.coords[m][k], b.coords[m][k]).powi(2))
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// Free-function form of [`GroupSpec::multiply`].
pub fn group_multiply(spec: &GroupSpec, g: &GroupElement, gp: &GroupElement) -> Result<GroupElement> {
    spec.multiply(g, gp)
}

/// Free-function form of [`GroupSpec::inverse`].
pub fn group_inverse(spec: &GroupSpec, g: &GroupElement) -> Result<GroupElement> {
    spec.inverse(g)
}

/// Free-function form of [`GroupSpec::automorphism_matrix`].
pub fn automorphism_matrix(spec: &GroupSpec, m: usize, g: &GroupElement) -> Result<DMatrix<f64>> {
    if m >= spec.blocks.len() {
        return Err(Error::InvalidArgument(format!("block index {m} out of range")));
    }
    Ok(spec.automorphism_matrix(m, g))
}
