//! Möbius maps, finite Blaschke products fixing the origin, and harmonic
//! measure on the unit circle.
//!
//! Boundary points are handled in angle coordinates. For `|ξ| = 1` a factor
//! satisfies `1 + āξ = ξ·conj(ξ + a)`, hence
//!
//! ```text
//! arg (ξ + a)/(1 + āξ) = 2·arg(ξ + a) − arg ξ
//! ```
//!
//! so the image of a boundary point is obtained as an angle and never leaves
//! the circle, however long the orbit.

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack admitted on `|z| ≤ 1` for points meant to be on the closed disk.
pub const DISK_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance of the Poisson-kernel quadrature.
pub const HARMONIC_TOLERANCE: f64 = 1e-10;

const MAX_PANELS: usize = 1 << 16;

/// Reduces an angle to `[0, 2π)`.
#[inline]
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed distance between two angles, in `(-π, π]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = normalize_angle(a - b);
    if d > std::f64::consts::PI {
        d - TAU
    } else {
        d
    }
}

pub(crate) fn check_finite(z: Complex) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(z.to_string()))
    }
}

pub(crate) fn check_open_disk(z: Complex) -> Result<()> {
    check_finite(z)?;
    let modulus = z.norm();
    if modulus < 1.0 {
        Ok(())
    } else {
        Err(Error::NotInOpenDisk {
            z: z.to_string(),
            modulus,
        })
    }
}

/// A point `e^{i·angle}` of the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct UnitComplex {
    angle: f64,
}

impl UnitComplex {
    pub const ONE: UnitComplex = UnitComplex { angle: 0.0 };

    pub fn from_angle(angle: f64) -> Self {
        Self {
            angle: normalize_angle(angle),
        }
    }

    /// Point at `turns` full turns (`turns = 1/4` is `i`).
    pub fn from_turns(turns: f64) -> Self {
        Self::from_angle(TAU * turns.rem_euclid(1.0))
    }

    /// Projects a non-zero complex number radially onto the circle.
    pub fn from_complex(z: Complex) -> Self {
        Self::from_angle(z.im.atan2(z.re))
    }

    #[inline]
    pub fn angle(self) -> f64 {
        self.angle
    }

    pub fn to_complex(self) -> Complex {
        let (s, c) = self.angle.sin_cos();
        Complex::new(c, s)
    }

    pub fn mul(self, other: UnitComplex) -> Self {
        Self::from_angle(self.angle + other.angle)
    }
}

/// A Möbius factor `(z + a)/(1 + āz)` with `|a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlaschkeFactor {
    a: Complex,
}

impl BlaschkeFactor {
    pub fn new(a: Complex) -> Result<Self> {
        check_finite(a)?;
        let modulus = a.norm();
        if modulus < 1.0 {
            Ok(Self { a })
        } else {
            Err(Error::FactorOutsideDisk(modulus))
        }
    }

    pub fn real(a: f64) -> Result<Self> {
        Self::new(Complex::new(a, 0.0))
    }

    pub fn parameter(&self) -> Complex {
        self.a
    }

    pub fn eval(&self, z: Complex) -> Complex {
        (z + self.a) / (Complex::new(1.0, 0.0) + self.a.conj() * z)
    }

    /// Change in angle contributed on the boundary: `2·arg(ξ + a) − θ`.
    #[inline]
    fn boundary_shift(&self, theta: f64, cos: f64, sin: f64) -> f64 {
        if self.a.re == 0.0 && self.a.im == 0.0 {
            theta
        } else {
            2.0 * (sin + self.a.im).atan2(cos + self.a.re) - theta
        }
    }
}

/// `z ↦ λ·z·∏ (z + a_k)/(1 + ā_k z)`: an inner function with `g(0) = 0`.
///
/// The leading `z` factor is always present, so every map fixes the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerMap {
    rotation: UnitComplex,
    factors: Vec<BlaschkeFactor>,
}

impl InnerMap {
    pub fn new(rotation: UnitComplex, factors: Vec<BlaschkeFactor>) -> Self {
        Self { rotation, factors }
    }

    pub fn identity() -> Self {
        Self::new(UnitComplex::ONE, Vec::new())
    }

    pub fn rotation(rotation: UnitComplex) -> Self {
        Self::new(rotation, Vec::new())
    }

    /// `λ·z·(z + a)/(1 + āz)`.
    pub fn degree_two(rotation: UnitComplex, a: Complex) -> Result<Self> {
        Ok(Self::new(rotation, vec![BlaschkeFactor::new(a)?]))
    }

    /// Post-composes with a rotation.
    pub fn rotated(mut self, by: UnitComplex) -> Self {
        self.rotation = self.rotation.mul(by);
        self
    }

    pub fn rotation_part(&self) -> UnitComplex {
        self.rotation
    }

    pub fn factors(&self) -> &[BlaschkeFactor] {
        &self.factors
    }

    pub fn degree(&self) -> usize {
        1 + self.factors.len()
    }

    pub fn is_rotation(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn eval(&self, z: Complex) -> Result<Complex> {
        check_finite(z)?;
        let modulus = z.norm();
        if modulus > 1.0 + DISK_TOLERANCE {
            return Err(Error::OutsideDisk {
                z: z.to_string(),
                modulus,
            });
        }
        Ok(self.eval_unchecked(z))
    }

    pub(crate) fn eval_unchecked(&self, z: Complex) -> Complex {
        self.factors
            .iter()
            .fold(self.rotation.to_complex() * z, |acc, f| acc * f.eval(z))
    }

    pub fn boundary_eval(&self, xi: UnitComplex) -> UnitComplex {
        let theta = xi.angle();
        let (sin, cos) = theta.sin_cos();
        UnitComplex::from_angle(self.boundary_angle(theta, cos, sin))
    }

    /// Image angle of `e^{iθ}` given its cosine and sine, reduced to `[0, 2π)`.
    #[inline]
    pub fn boundary_angle(&self, theta: f64, cos: f64, sin: f64) -> f64 {
        let mut out = self.rotation.angle() + theta;
        for f in &self.factors {
            out += f.boundary_shift(theta, cos, sin);
        }
        normalize_angle(out)
    }

    /// `g'(0) = λ·∏ a_k`.
    pub fn derivative_at_origin(&self) -> Complex {
        self.factors
            .iter()
            .fold(self.rotation.to_complex(), |acc, f| acc * f.a)
    }

    /// `(ln|g'(0)|, arg g'(0))` accumulated factor by factor. The argument is
    /// not reduced; zero factors give `-∞` and contribute no argument.
    pub fn derivative_polar(&self) -> (f64, f64) {
        let mut log_modulus = 0.0;
        let mut argument = self.rotation.angle();
        for f in &self.factors {
            let a = f.a;
            if a.im == 0.0 {
                if a.re == 0.0 {
                    log_modulus = f64::NEG_INFINITY;
                } else {
                    log_modulus += a.re.abs().ln();
                    if a.re < 0.0 {
                        argument += std::f64::consts::PI;
                    }
                }
            } else {
                log_modulus += a.norm().ln();
                argument += a.im.atan2(a.re);
            }
        }
        (log_modulus, argument)
    }
}

/// Half-open arc `[start, end)` traversed counterclockwise. Equal endpoints
/// (mod 2π) denote the full circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub start_angle: f64,
    pub end_angle: f64,
}

impl Arc {
    pub fn new(start_angle: f64, end_angle: f64) -> Result<Self> {
        let arc = Self {
            start_angle,
            end_angle,
        };
        arc.validate()?;
        Ok(arc)
    }

    pub fn from_turns(start_turns: f64, length_turns: f64) -> Result<Self> {
        if !(length_turns > 0.0 && length_turns <= 1.0) {
            return Err(Error::DegenerateArc);
        }
        Self::new(TAU * start_turns, TAU * (start_turns + length_turns))
    }

    pub fn full() -> Self {
        Self {
            start_angle: 0.0,
            end_angle: TAU,
        }
    }

    pub fn upper_half() -> Self {
        Self {
            start_angle: 0.0,
            end_angle: std::f64::consts::PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.start_angle.is_finite() && self.end_angle.is_finite() {
            Ok(())
        } else {
            Err(Error::DegenerateArc)
        }
    }

    /// Angular span in radians, in `(0, 2π]`.
    pub fn span(&self) -> f64 {
        let s = normalize_angle(self.end_angle - self.start_angle);
        if s == 0.0 {
            TAU
        } else {
            s
        }
    }

    /// Normalized length `m(arc)`.
    pub fn length(&self) -> f64 {
        self.span() / TAU
    }

    #[inline]
    pub fn contains_angle(&self, theta: f64) -> bool {
        normalize_angle(theta - self.start_angle) < self.span()
    }

    pub fn contains(&self, xi: UnitComplex) -> bool {
        self.contains_angle(xi.angle())
    }

    /// Splits the circle into `k` equal arcs starting at `offset`.
    pub fn partition(k: usize, offset: f64) -> Vec<Arc> {
        (0..k)
            .map(|j| Arc {
                start_angle: offset + TAU * j as f64 / k as f64,
                end_angle: offset + TAU * (j + 1) as f64 / k as f64,
            })
            .collect()
    }
}

/// `τ_{z0}(w) = (w + z0)/(1 + z̄0·w)`. Pushes `m` forward to `ω_{z0}`.
pub fn mobius_to_point(z0: Complex, w: UnitComplex) -> Result<UnitComplex> {
    check_open_disk(z0)?;
    Ok(UnitComplex::from_angle(mobius_angle(z0, w.angle())))
}

#[inline]
pub(crate) fn mobius_angle(z0: Complex, theta: f64) -> f64 {
    if z0.re == 0.0 && z0.im == 0.0 {
        return normalize_angle(theta);
    }
    let (sin, cos) = theta.sin_cos();
    normalize_angle(2.0 * (sin + z0.im).atan2(cos + z0.re) - theta)
}

/// Poisson kernel `(1 − |z|²)/|e^{iθ} − z|²`.
#[inline]
pub fn poisson_kernel(z: Complex, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let dx = c - z.re;
    let dy = s - z.im;
    (1.0 - z.norm_sqr()) / (dx * dx + dy * dy)
}

const GAUSS_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329_0,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362_0,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

fn composite_gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        let half = 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS.iter()) {
            s += w * (f(mid - half * x) + f(mid + half * x));
        }
        total += s * half;
    }
    total
}

/// `ω_z(arc)`: 8-point Gauss–Legendre panels, doubled until two successive
/// estimates agree to [`HARMONIC_TOLERANCE`].
pub fn harmonic_measure_arc(z: Complex, arc: &Arc) -> Result<f64> {
    check_open_disk(z)?;
    arc.validate()?;
    let a = arc.start_angle;
    let b = a + arc.span();
    let kernel = |t: f64| poisson_kernel(z, t);
    let mut panels = 4;
    let mut previous = composite_gauss(&kernel, a, b, panels) / TAU;
    while panels < MAX_PANELS {
        panels *= 2;
        let current = composite_gauss(&kernel, a, b, panels) / TAU;
        if (current - previous).abs() < HARMONIC_TOLERANCE {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureNotConverged {
        tolerance: HARMONIC_TOLERANCE,
        max_nodes: MAX_PANELS * 8,
    })
}
