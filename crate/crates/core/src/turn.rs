//! Boundary points as double-double fractions of a full turn.
//!
//! A monomial map `λz^d` acts on turns as `t ↦ d·t + φ (mod 1)`. In plain
//! `f64` each step shifts one bit out of the mantissa, and after about 53
//! doublings every orbit sits at a fixed point. Here a sampled point is a
//! uniform real drawn lazily: the turn is carried as an unevaluated sum
//! `hi + lo` plus an undrawn tail `weight·U`, monomial maps are applied with
//! error-free transformations, and whenever the tail grows into view its next
//! 53 bits are drawn from a counter stream keyed by the point. Maps with
//! nonzero zeros are evaluated in `f64` as before, and the sub-ulp part of
//! their output is treated as an undrawn tail as well.

use std::f64::consts::TAU;

use crate::disk::InnerMap;
use crate::rng::{mix64, stream, CounterRng};

/// Tails larger than this are drawn before the next step.
const REFILL_WEIGHT: f64 = 1.0 / (1u64 << 60) as f64;
/// Scale of the bits of one draw below the current tail weight.
const DRAW: f64 = 1.0 / (1u64 << 53) as f64;

/// Point of the unit circle at `hi + lo + weight·U` turns, with
/// `0 ≤ hi + lo < 1`, `|lo| ≤ ulp(hi)/2` and `U` uniform on `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Turn {
    hi: f64,
    lo: f64,
    weight: f64,
    tail: Option<Tail>,
}

/// Source of the undrawn bits of one sampled point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tail {
    rng: CounterRng,
    draws: u64,
}

impl Tail {
    fn new(seed: u64, counter: u64) -> Self {
        Self {
            rng: CounterRng::new(mix64(seed ^ mix64(counter)), stream::TAIL_BITS),
            draws: 0,
        }
    }

    fn next(&mut self) -> f64 {
        let u = self.rng.f64_at(self.draws);
        self.draws += 1;
        u
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `hi + lo` reduced modulo one.
fn reduce(hi: f64, lo: f64) -> (f64, f64) {
    let hi = hi - hi.floor();
    let (mut hi, mut lo) = two_sum(hi, lo);
    if hi < 0.0 {
        (hi, lo) = two_sum(hi + 1.0, lo);
    } else if hi >= 1.0 {
        (hi, lo) = two_sum(hi - 1.0, lo);
    }
    if hi >= 1.0 {
        (0.0, 0.0)
    } else {
        (hi, lo)
    }
}

impl Turn {
    /// The point at angle `theta`, taken as exact.
    pub(crate) fn from_angle(theta: f64) -> Self {
        let (hi, lo) = reduce(theta / TAU, 0.0);
        Self {
            hi,
            lo,
            weight: 0.0,
            tail: None,
        }
    }

    /// The point at angle `theta`, known to `f64` precision, with its unknown
    /// digits drawn from the counter stream of `(seed, counter)`.
    pub(crate) fn sampled_at(theta: f64, seed: u64, counter: u64) -> Self {
        Self::from_parts(theta / TAU, 0.0, DRAW, Tail::new(seed, counter))
    }

    /// Uniform point. Its high 53 bits are the `UNIFORM_POINTS` draw, so
    /// `angle()` agrees with the plain `f64` sampler up to rounding.
    pub(crate) fn uniform(seed: u64, counter: u64) -> Self {
        let hi = CounterRng::new(seed, stream::UNIFORM_POINTS).f64_at(counter);
        Self::from_parts(hi, 0.0, DRAW, Tail::new(seed, counter))
    }

    /// Uniform point of the arc of angular `span` starting at `start`, with
    /// high bits from the `ARC_POINTS` stream.
    pub(crate) fn uniform_in(start: f64, span: f64, seed: u64, counter: u64) -> Self {
        let u = CounterRng::new(seed, stream::ARC_POINTS).f64_at(counter);
        let width = span / TAU;
        let (p, pe) = two_prod(width, u);
        let (s, se) = two_sum(start / TAU, p);
        Self::from_parts(s, pe + se, width * DRAW, Tail::new(!seed, counter))
    }

    fn from_parts(hi: f64, lo: f64, weight: f64, tail: Tail) -> Self {
        let (hi, lo) = reduce(hi, lo);
        let mut turn = Self {
            hi,
            lo,
            weight,
            tail: Some(tail),
        };
        turn.refill();
        turn
    }

    /// Draws tail bits until the undrawn part is out of sight.
    fn refill(&mut self) {
        let Some(tail) = self.tail.as_mut() else {
            return;
        };
        while self.weight > REFILL_WEIGHT {
            let (lo, err) = two_sum(self.lo, self.weight * tail.next());
            let (hi, lo) = reduce(self.hi, lo);
            (self.hi, self.lo) = reduce(hi, lo + err);
            self.weight *= DRAW;
        }
    }

    /// Angle in `[0, 2π)`.
    pub(crate) fn angle(self) -> f64 {
        let a = TAU.mul_add(self.hi, TAU * self.lo);
        if a >= TAU {
            0.0
        } else {
            a
        }
    }

    /// Image under the boundary map of `g`.
    pub(crate) fn step(mut self, g: &Monomial<'_>) -> Self {
        match *g {
            Monomial::Exact { degree, phase } => {
                let d = degree as f64;
                let (p, pe) = two_prod(d, self.hi);
                let (s, se) = two_sum(p, phase);
                (self.hi, self.lo) = reduce(s, pe + se + d * self.lo);
                self.weight *= d;
            }
            Monomial::General(map) => {
                let theta = self.angle();
                let (sin, cos) = theta.sin_cos();
                (self.hi, self.lo) = reduce(map.boundary_angle(theta, cos, sin) / TAU, 0.0);
                self.weight = DRAW;
            }
        }
        self.refill();
        self
    }
}

/// A map prepared for [`Turn::step`].
pub(crate) enum Monomial<'a> {
    /// `λz^d` with `λ = e^{2πi·phase}`.
    Exact { degree: usize, phase: f64 },
    General(&'a InnerMap),
}

impl<'a> Monomial<'a> {
    pub(crate) fn of(map: &'a InnerMap) -> Self {
        let zero = |f: &crate::disk::BlaschkeFactor| {
            let a = f.parameter();
            a.re == 0.0 && a.im == 0.0
        };
        if map.factors().iter().all(zero) {
            Monomial::Exact {
                degree: map.degree(),
                phase: map.rotation_part().angle() / TAU,
            }
        } else {
            Monomial::General(map)
        }
    }
}
