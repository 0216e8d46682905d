//! Parametric families of inner functions and the sequences they generate.

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::disk::{BlaschkeFactor, InnerMap, UnitComplex};
use crate::error::{Error, Result};
use crate::rng::{stream, CounterRng};

/// Distribution of the random rotation angles, in turns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    /// Uniform on the circle.
    Uniform,
    /// Uniform over a finite list of angles (in turns).
    Atomic { turns: Vec<f64> },
}

/// A closed enumeration of sequence families. Maps are indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    /// `g_n(z) = e^{2πiα} z`.
    Rotation { alpha: f64 },
    /// `g_n(z) = z (z + a_n)/(1 + a_n z)` with `a_n = n/(n+1)`.
    Blaschke2Ratio,
    /// `g_n(z) = z (z + a)/(1 + a z)` for a fixed `a`.
    Blaschke2Constant { a: f64 },
    /// `g_n(z) = z²`.
    Squaring,
    /// `g_n(z) = z (z + b_n)/(1 + b_n z)` with `b_n = 1 − 2^{-n}`. Once `b_n`
    /// rounds to 1 the map is the identity.
    NearRotation,
    /// `g_n = e^{iφ_n} · h_n` with `h_n` from `base` and i.i.d. angles `φ_n`.
    RandomRotation {
        base: Box<FamilySpec>,
        distribution: Distribution,
        seed: u64,
    },
    /// Near-rotation moduli with `arg g_n'(0) = 2π(α + 2^{-(n+1)}) → 2πα`.
    ConvergingArg { alpha: f64 },
    /// Within each block of `period` indices the first `active` maps are
    /// `z (z + λ)/(1 + λ z)`; the rest are `z (z + rest)/(1 + rest z)`, or the
    /// identity when `rest = 1`. `c` is the density constant claimed for the
    /// family and is only used when checking the density hypothesis.
    SparseBlocks {
        lambda: f64,
        c: f64,
        period: usize,
        active: usize,
        rest: f64,
    },
}

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

fn check_unit_interval(name: &'static str, x: f64, closed_left: bool, closed_right: bool) -> Result<()> {
    let left = if closed_left { x >= 0.0 } else { x > 0.0 };
    let right = if closed_right { x <= 1.0 } else { x < 1.0 };
    if x.is_finite() && left && right {
        Ok(())
    } else {
        let l = if closed_left { '[' } else { '(' };
        let r = if closed_right { ']' } else { ')' };
        Err(invalid(name, format!("{x} is not in {l}0, 1{r}")))
    }
}

/// `1 − 2^{-n}` while it is distinguishable from 1.
fn near_one(n: usize) -> Option<f64> {
    if n <= 52 {
        Some(1.0 - (-(n as f64)).exp2())
    } else {
        None
    }
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Rotation { .. } => "rotation",
            FamilySpec::Blaschke2Ratio => "blaschke2_ratio",
            FamilySpec::Blaschke2Constant { .. } => "blaschke2_constant",
            FamilySpec::Squaring => "squaring",
            FamilySpec::NearRotation => "near_rotation",
            FamilySpec::RandomRotation { .. } => "random_rotation",
            FamilySpec::ConvergingArg { .. } => "converging_arg",
            FamilySpec::SparseBlocks { .. } => "sparse_blocks",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            FamilySpec::Rotation { alpha } | FamilySpec::ConvergingArg { alpha } => {
                check_unit_interval("alpha", *alpha, true, false)
            }
            FamilySpec::Blaschke2Constant { a } => check_unit_interval("a", *a, false, false),
            FamilySpec::Blaschke2Ratio | FamilySpec::Squaring | FamilySpec::NearRotation => Ok(()),
            FamilySpec::RandomRotation {
                base, distribution, ..
            } => {
                base.validate()?;
                if let Distribution::Atomic { turns } = distribution {
                    if turns.is_empty() {
                        return Err(invalid("distribution", "atomic distribution needs at least one atom"));
                    }
                    for &t in turns {
                        check_unit_interval("distribution", t, true, false)?;
                    }
                }
                Ok(())
            }
            FamilySpec::SparseBlocks {
                lambda,
                c,
                period,
                active,
                rest,
            } => {
                check_unit_interval("lambda", *lambda, true, false)?;
                check_unit_interval("c", *c, false, false)?;
                check_unit_interval("rest", *rest, true, true)?;
                if *period == 0 {
                    return Err(invalid("period", "must be positive"));
                }
                if *active == 0 || active > period {
                    return Err(invalid("active", format!("must lie in 1..={period}")));
                }
                Ok(())
            }
        }
    }
}

/// Deterministic generator `n ↦ g_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSequence {
    spec: FamilySpec,
}

impl InnerSequence {
    pub fn new(spec: FamilySpec) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }

    /// The map `g_n`, `n ≥ 1`.
    pub fn map(&self, n: usize) -> InnerMap {
        assert!(n >= 1, "maps are indexed from 1");
        map_of(&self.spec, n)
    }

    /// `G_n(z0)` for `n = 1..=N`.
    pub fn orbit(&self, z0: Complex, steps: usize) -> Result<Vec<Complex>> {
        crate::disk::check_open_disk(z0)?;
        let mut z = z0;
        Ok((1..=steps)
            .map(|n| {
                z = self.map(n).eval_unchecked(z);
                z
            })
            .collect())
    }
}

/// Builds the sequence for a validated spec.
pub fn make_sequence(spec: FamilySpec) -> Result<InnerSequence> {
    InnerSequence::new(spec)
}

fn degree_two(rotation: UnitComplex, a: f64) -> InnerMap {
    // callers guarantee |a| < 1
    InnerMap::new(rotation, vec![BlaschkeFactor::real(a).expect("|a| < 1")])
}

fn near_rotation_map(n: usize) -> InnerMap {
    match near_one(n) {
        Some(b) => degree_two(UnitComplex::ONE, b),
        None => InnerMap::identity(),
    }
}

fn map_of(spec: &FamilySpec, n: usize) -> InnerMap {
    match spec {
        FamilySpec::Rotation { alpha } => InnerMap::rotation(UnitComplex::from_angle(TAU * alpha)),
        FamilySpec::Blaschke2Ratio => degree_two(UnitComplex::ONE, n as f64 / (n as f64 + 1.0)),
        FamilySpec::Blaschke2Constant { a } => degree_two(UnitComplex::ONE, *a),
        FamilySpec::Squaring => degree_two(UnitComplex::ONE, 0.0),
        FamilySpec::NearRotation => near_rotation_map(n),
        FamilySpec::RandomRotation {
            base,
            distribution,
            seed,
        } => {
            let rng = CounterRng::new(*seed, stream::FAMILY_ANGLES);
            let angle = match distribution {
                Distribution::Uniform => rng.angle_at(n as u64),
                Distribution::Atomic { turns } => TAU * turns[rng.index_at(n as u64, turns.len())],
            };
            map_of(base, n).rotated(UnitComplex::from_angle(angle))
        }
        FamilySpec::ConvergingArg { alpha } => {
            let drift = (-(n as f64 + 1.0)).exp2();
            near_rotation_map(n).rotated(UnitComplex::from_angle(TAU * (alpha + drift)))
        }
        FamilySpec::SparseBlocks {
            lambda,
            period,
            active,
            rest,
            ..
        } => {
            if (n - 1) % period < *active {
                degree_two(UnitComplex::ONE, *lambda)
            } else if *rest == 1.0 {
                InnerMap::identity()
            } else {
                degree_two(UnitComplex::ONE, *rest)
            }
        }
    }
}
