//! Named example families with the verdicts the theory predicts for them.
//!
//! Expected verdicts are metadata for regression tests and listings; they are
//! never consulted by [`crate::criteria::classify`].

use serde::{Deserialize, Serialize};

use crate::criteria::Verdict;
use crate::family::{Distribution, FamilySpec};

/// `(√5 − 1)/2`, the golden rotation number in turns.
pub const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Seed used by the catalog's random families.
pub const CATALOG_SEED: u64 = 0x1c1e_5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expected {
    Ergodic,
    Mixing,
    NotErgodic,
    ContractingNotErgodic,
    Open,
}

impl Expected {
    /// Whether a classifier verdict agrees with this expectation. `Open`
    /// entries accept anything.
    pub fn admits(self, verdict: Verdict) -> bool {
        match self {
            Expected::Ergodic => verdict == Verdict::Ergodic,
            Expected::Mixing => verdict == Verdict::Mixing,
            Expected::NotErgodic | Expected::ContractingNotErgodic => verdict == Verdict::NotErgodic,
            Expected::Open => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub name: String,
    pub spec: FamilySpec,
    pub expected: Expected,
    pub citation: String,
}

/// `g_n(z) = e^{2πiα} z`.
pub fn rotation(alpha: f64) -> FamilySpec {
    FamilySpec::Rotation { alpha }
}

/// `g_n(z) = z (z + a_n)/(1 + a_n z)`, `a_n = n/(n+1)`.
pub fn blaschke2_ratio() -> FamilySpec {
    FamilySpec::Blaschke2Ratio
}

/// `g_n(z) = z (z + a)/(1 + a z)`.
pub fn blaschke2_constant(a: f64) -> FamilySpec {
    FamilySpec::Blaschke2Constant { a }
}

/// `g_n(z) = z²`.
pub fn squaring() -> FamilySpec {
    FamilySpec::Squaring
}

/// `g_n(z) = z (z + b_n)/(1 + b_n z)`, `b_n = 1 − 2^{−n}`.
pub fn near_rotation() -> FamilySpec {
    FamilySpec::NearRotation
}

/// Each `g_n` of `base` followed by an independent random rotation.
pub fn random_rotation_blaschke(base: FamilySpec, distribution: Distribution, seed: u64) -> FamilySpec {
    FamilySpec::RandomRotation {
        base: Box::new(base),
        distribution,
        seed,
    }
}

/// Non-contracting family with `arg g_n'(0) → 2πα`.
pub fn converging_arg(alpha: f64) -> FamilySpec {
    FamilySpec::ConvergingArg { alpha }
}

/// Derivative modulus `λ` on the first `active` indices of every block of
/// `period`, modulus `rest` elsewhere (`rest = 1` means the identity).
pub fn sparse_blocks(lambda: f64, c: f64, period: usize, active: usize, rest: f64) -> FamilySpec {
    FamilySpec::SparseBlocks {
        lambda,
        c,
        period,
        active,
        rest,
    }
}

fn entry(name: &str, spec: FamilySpec, expected: Expected, citation: &str) -> CatalogEntry {
    CatalogEntry {
        name: name.to_string(),
        spec,
        expected,
        citation: citation.to_string(),
    }
}

/// Every catalog family, in listing order.
pub fn entries() -> Vec<CatalogEntry> {
    use Expected::*;
    vec![
        entry(
            "rotation_identity",
            rotation(0.0),
            NotErgodic,
            "a rotation e^{iθ}z is ergodic iff θ/2π is irrational",
        ),
        entry(
            "rotation_golden",
            rotation(GOLDEN),
            Ergodic,
            "a rotation e^{iθ}z is ergodic iff θ/2π is irrational",
        ),
        entry(
            "rotation_third",
            rotation(1.0 / 3.0),
            NotErgodic,
            "a rotation e^{iθ}z is ergodic iff θ/2π is irrational; Weyl sums fail at ℓ = 3",
        ),
        entry(
            "blaschke2_ratio",
            blaschke2_ratio(),
            ContractingNotErgodic,
            "degree-two counterexample with a_n = n/(n+1): contracting, hence mixing in the usual sense, but not ergodic",
        ),
        entry(
            "blaschke2_constant",
            blaschke2_constant(0.5),
            Mixing,
            "window products of a constant modulus below 1 decay geometrically, so the window-product criterion gives mixing",
        ),
        entry(
            "squaring",
            squaring(),
            Mixing,
            "the autonomous map z² is exact, hence mixing and ergodic",
        ),
        entry(
            "near_rotation",
            near_rotation(),
            NotErgodic,
            "positive derivatives whose tail products tend to 1 violate the tail-product criterion",
        ),
        entry(
            "random_rotation_uniform",
            random_rotation_blaschke(near_rotation(), Distribution::Uniform, CATALOG_SEED),
            Ergodic,
            "i.i.d. non-atomic rotations make a non-contracting sequence ergodic with probability one",
        ),
        entry(
            "random_rotation_atomic_third",
            random_rotation_blaschke(near_rotation(), Distribution::Atomic { turns: vec![1.0 / 3.0] }, CATALOG_SEED),
            NotErgodic,
            "a single rational rotation angle makes arg G_n'(0) fail equidistribution (Weyl sums fail at ℓ = 3)",
        ),
        entry(
            "converging_arg_golden",
            converging_arg(GOLDEN),
            Ergodic,
            "non-contracting with arg g_n'(0) → θ, θ/2π irrational: ergodic by van der Corput's theorem",
        ),
        entry(
            "converging_arg_zero",
            converging_arg(0.0),
            NotErgodic,
            "non-contracting with arg G_n'(0) converging: Weyl sums tend to 1",
        ),
        entry(
            "sparse_blocks_alternating",
            sparse_blocks(0.3, 0.4, 2, 1, 1.0),
            Mixing,
            "every other derivative has modulus 0.3, so the density hypothesis holds with c = 0.4 and the sequence is mixing",
        ),
        entry(
            "sparse_blocks_zero",
            sparse_blocks(0.0, 0.3, 3, 1, 0.9),
            Mixing,
            "a zero derivative in every block of three satisfies the density hypothesis",
        ),
        entry(
            "sparse_blocks_loose",
            sparse_blocks(0.99, 0.01, 50, 1, 1.0),
            Open,
            "the density hypothesis holds only with loose constants; whether mixing shows at finite N is not asserted",
        ),
        entry(
            "sparse_blocks_thin",
            sparse_blocks(0.3, 0.4, 10, 1, 1.0),
            Open,
            "the density hypothesis fails for c = 0.4; no expected verdict is asserted",
        ),
    ]
}

pub fn find(name: &str) -> Option<CatalogEntry> {
    entries().into_iter().find(|e| e.name == name)
}
