//! Monte Carlo and quadrature experiments on the boundary circle.
//!
//! Every estimator draws its points from a [`CounterRng`] indexed by point
//! number and reduces per-chunk partial results in index order, so results
//! are bitwise identical for any worker count.

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::disk::{check_open_disk, harmonic_measure_arc, mobius_angle, Arc, BlaschkeFactor, InnerMap, UnitComplex};
use crate::error::{Error, Result};
use crate::family::InnerSequence;
use crate::rng::{stream, CounterRng};
use crate::sum::{map_chunks, pairwise, pairwise_f64};
use crate::turn::{Monomial, Turn};

/// Asymptotic Kolmogorov–Smirnov critical constant at level 0.01.
pub const KS_CRITICAL_001: f64 = 1.63;

/// Largest `ℓ · deg(G_m^n)` admitted by [`fourier_inner_product`].
pub const DEGREE_CAP: u64 = 1 << 16;

/// Largest uniform grid used by [`fourier_inner_product`].
pub const MAX_GRID: usize = 1 << 20;

/// Successive uniform-grid estimates must agree to this.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// From this grid size on, a doubling that fails to halve the change between
/// successive estimates hands the integral to the adaptive fallback.
const STALL_GRID: usize = 1 << 14;

/// Absolute tolerance of the adaptive fallback quadrature.
const ADAPTIVE_TOLERANCE: f64 = 1e-10;

/// Evaluation budget of the adaptive fallback quadrature.
const ADAPTIVE_MAX_EVALS: usize = 1 << 25;

/// Number of arcs in the covering statistic of [`recurrence_experiment`].
pub const COVERING_ARCS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Uniform,
    Harmonic { z: Complex },
    Pushed { n: usize },
}

/// Finite sample of points on the unit circle with its RNG provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleEnsemble {
    points: Vec<UnitComplex>,
    seed: u64,
    provenance: Provenance,
}

impl CircleEnsemble {
    pub fn points(&self) -> &[UnitComplex] {
        &self.points
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn angles(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.angle()).collect()
    }

    /// Redraws a sampled ensemble from its seed. Pushed ensembles carry no
    /// family and cannot be regenerated on their own.
    pub fn regenerate(&self) -> Option<Result<CircleEnsemble>> {
        match self.provenance {
            Provenance::Uniform => Some(sample_uniform(self.size(), self.seed)),
            Provenance::Harmonic { z } => Some(sample_harmonic(z, self.size(), self.seed)),
            Provenance::Pushed { .. } => None,
        }
    }
}

fn collect_angles<F: Fn(usize) -> f64 + Sync>(len: usize, f: F) -> Vec<f64> {
    map_chunks(len, |r| r.map(&f).collect::<Vec<f64>>()).concat()
}

fn check_size(s: usize) -> Result<()> {
    if s == 0 {
        Err(Error::TooSmall {
            name: "sample size",
            min: 1,
            got: 0,
        })
    } else {
        Ok(())
    }
}

/// `S` i.i.d. points distributed by normalized arc length `m`.
pub fn sample_uniform(s: usize, seed: u64) -> Result<CircleEnsemble> {
    check_size(s)?;
    let rng = CounterRng::new(seed, stream::UNIFORM_POINTS);
    let angles = collect_angles(s, |i| rng.angle_at(i as u64));
    Ok(CircleEnsemble {
        points: angles.into_iter().map(UnitComplex::from_angle).collect(),
        seed,
        provenance: Provenance::Uniform,
    })
}

/// `S` i.i.d. points distributed by harmonic measure `ω_z`, obtained by
/// pushing uniform points through `w ↦ (w + z)/(1 + z̄w)`.
pub fn sample_harmonic(z: Complex, s: usize, seed: u64) -> Result<CircleEnsemble> {
    check_open_disk(z)?;
    check_size(s)?;
    let rng = CounterRng::new(seed, stream::HARMONIC_POINTS);
    let angles = collect_angles(s, |i| mobius_angle(z, rng.angle_at(i as u64)));
    Ok(CircleEnsemble {
        points: angles.into_iter().map(UnitComplex::from_angle).collect(),
        seed,
        provenance: Provenance::Harmonic { z },
    })
}

/// `g_1, …, g_n`.
pub fn maps_upto(seq: &InnerSequence, n: usize) -> Vec<InnerMap> {
    (1..=n).map(|k| seq.map(k)).collect()
}

#[inline]
fn step(map: &InnerMap, theta: f64) -> f64 {
    let (sin, cos) = theta.sin_cos();
    map.boundary_angle(theta, cos, sin)
}

/// Angle of `Ĝ(e^{iθ})` for the composition of `maps` in order.
#[inline]
fn compose_angle(maps: &[InnerMap], theta: f64) -> f64 {
    maps.iter().fold(theta, |t, g| step(g, t))
}

fn step_all(g: &InnerMap, turns: &[Turn]) -> Vec<Turn> {
    let m = Monomial::of(g);
    map_chunks(turns.len(), |r| r.map(|i| turns[i].step(&m)).collect::<Vec<_>>()).concat()
}

/// Snapshots `Ĝ_1(ens), …, Ĝ_N(ens)`, each obtained from the previous one by a
/// single boundary evaluation per point.
pub fn push_ensemble(seq: &InnerSequence, ens: &CircleEnsemble, n: usize) -> Vec<CircleEnsemble> {
    let mut current: Vec<Turn> = (0..ens.size())
        .map(|i| Turn::sampled_at(ens.points[i].angle(), ens.seed, i as u64))
        .collect();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let g = seq.map(k);
        current = step_all(&g, &current);
        out.push(CircleEnsemble {
            points: current.iter().map(|t| UnitComplex::from_angle(t.angle())).collect(),
            seed: ens.seed,
            provenance: Provenance::Pushed { n: k },
        });
    }
    out
}

/// Kolmogorov–Smirnov distance between `angle/2π` and the uniform law.
pub fn ks_uniformity(ens: &CircleEnsemble) -> Result<f64> {
    ks_of_angles(&ens.angles())
}

fn ks_of_angles(angles: &[f64]) -> Result<f64> {
    let s = angles.len();
    if s < 100 {
        return Err(Error::TooSmall {
            name: "sample size",
            min: 100,
            got: s,
        });
    }
    let mut u: Vec<f64> = angles.iter().map(|a| a / TAU).collect();
    u.sort_by(f64::total_cmp);
    let sf = s as f64;
    Ok(u.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        d.max((i + 1) as f64 / sf - x).max(x - i as f64 / sf)
    }))
}

/// KS statistic of the uniform ensemble `(S, seed)` pushed forward by
/// `Ĝ_n`, for `n = 1..=N`, without storing the snapshots.
pub fn ks_pushed(seq: &InnerSequence, n: usize, s: usize, seed: u64) -> Result<Vec<f64>> {
    check_size(s)?;
    let mut turns = map_chunks(s, |r| r.map(|i| Turn::uniform(seed, i as u64)).collect::<Vec<_>>()).concat();
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        let g = seq.map(k);
        turns = step_all(&g, &turns);
        let angles: Vec<f64> = turns.iter().map(|t| t.angle()).collect();
        out.push(ks_of_angles(&angles)?);
    }
    Ok(out)
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub mc_error: f64,
}

/// `‖(1/N) Σ_{n≤N} e_ℓ∘Ĝ_n‖²` for every `ℓ` in `ells` and every `N` in
/// `checkpoints`, from one pass over `S` uniform points. Indexed
/// `[ell][checkpoint]`.
pub fn ergodic_average_norms(
    seq: &InnerSequence,
    ells: &[u32],
    checkpoints: &[usize],
    s: usize,
    seed: u64,
) -> Result<Vec<Vec<Estimate>>> {
    check_size(s)?;
    if ells.contains(&0) {
        return Err(Error::TooSmall {
            name: "ell",
            min: 1,
            got: 0,
        });
    }
    if checkpoints.contains(&0) {
        return Err(Error::TooSmall {
            name: "N",
            min: 1,
            got: 0,
        });
    }
    let n_max = checkpoints.iter().copied().max().unwrap_or(0);
    let ell_max = ells.iter().copied().max().unwrap_or(0) as usize;
    let maps = maps_upto(seq, n_max);
    let prepared: Vec<Monomial> = maps.iter().map(Monomial::of).collect();
    let cells = ells.len() * checkpoints.len();

    // Per chunk: Σ X and Σ X² for every (ℓ, N) cell.
    let partials = map_chunks(s, |range| {
        let mut sum = vec![0.0; cells];
        let mut sum_sq = vec![0.0; cells];
        let mut acc = vec![Complex::new(0.0, 0.0); ell_max + 1];
        for i in range {
            acc.iter_mut().for_each(|a| *a = Complex::new(0.0, 0.0));
            let mut turn = Turn::uniform(seed, i as u64);
            for (k, g) in prepared.iter().enumerate() {
                turn = turn.step(g);
                let (sin, cos) = turn.angle().sin_cos();
                let z = Complex::new(cos, sin);
                let mut p = z;
                for a in acc.iter_mut().skip(1) {
                    *a += p;
                    p *= z;
                }
                let n = k + 1;
                for (c, &cp) in checkpoints.iter().enumerate() {
                    if cp == n {
                        for (e, &ell) in ells.iter().enumerate() {
                            let x = (acc[ell as usize] / n as f64).norm_sqr();
                            let cell = e * checkpoints.len() + c;
                            sum[cell] += x;
                            sum_sq[cell] += x * x;
                        }
                    }
                }
            }
        }
        (sum, sum_sq)
    });
    let sf = s as f64;
    let mut out = vec![Vec::with_capacity(checkpoints.len()); ells.len()];
    for (e, row) in out.iter_mut().enumerate() {
        for c in 0..checkpoints.len() {
            let cell = e * checkpoints.len() + c;
            let sums: Vec<f64> = partials.iter().map(|p| p.0[cell]).collect();
            let squares: Vec<f64> = partials.iter().map(|p| p.1[cell]).collect();
            let mean = pairwise_f64(&sums) / sf;
            let var = (pairwise_f64(&squares) / sf - mean * mean).max(0.0);
            row.push(Estimate {
                value: mean,
                mc_error: (var / sf).sqrt(),
            });
        }
    }
    Ok(out)
}

/// Monte Carlo estimate of `‖(1/N) Σ_{n≤N} e_ℓ∘Ĝ_n‖²_{L²(m)}`.
pub fn ergodic_average_norm(seq: &InnerSequence, ell: u32, n: usize, s: usize, seed: u64) -> Result<f64> {
    Ok(ergodic_average_norms(seq, &[ell], &[n], s, seed)?[0][0].value)
}

/// Estimate of `m(A ∩ Ĝ_n^{−1}(B))` against the target `m(A)·m(B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub n: usize,
    pub value: f64,
    /// `√(target(1 − target)/S)`, floored at `1/(2S)`.
    pub mc_error: f64,
    pub target: f64,
}

impl MixingEstimate {
    /// `|value − target|` in units of `mc_error`.
    pub fn deviation(&self) -> f64 {
        (self.value - self.target).abs() / self.mc_error
    }
}

/// [`mixing_correlation`] at several times from one pass.
pub fn mixing_correlations(
    seq: &InnerSequence,
    a: &Arc,
    b: &Arc,
    times: &[usize],
    s: usize,
    seed: u64,
) -> Result<Vec<MixingEstimate>> {
    a.validate()?;
    b.validate()?;
    check_size(s)?;
    let n_max = times.iter().copied().max().unwrap_or(0);
    let maps = maps_upto(seq, n_max);
    let prepared: Vec<Monomial> = maps.iter().map(Monomial::of).collect();
    let partials = map_chunks(s, |range| {
        let mut counts = vec![0u64; times.len()];
        for i in range {
            let mut turn = Turn::uniform(seed, i as u64);
            let theta = turn.angle();
            if !a.contains_angle(theta) {
                continue;
            }
            if times.contains(&0) && b.contains_angle(theta) {
                for (c, _) in times.iter().enumerate().filter(|(_, &t)| t == 0) {
                    counts[c] += 1;
                }
            }
            for (k, g) in prepared.iter().enumerate() {
                turn = turn.step(g);
                let n = k + 1;
                if b.contains_angle(turn.angle()) {
                    for (c, _) in times.iter().enumerate().filter(|(_, &t)| t == n) {
                        counts[c] += 1;
                    }
                }
            }
        }
        counts
    });
    let target = a.length() * b.length();
    let sf = s as f64;
    let mc_error = (target * (1.0 - target) / sf).sqrt().max(0.5 / sf);
    Ok(times
        .iter()
        .enumerate()
        .map(|(c, &n)| {
            let hits: u64 = partials.iter().map(|p| p[c]).sum();
            MixingEstimate {
                n,
                value: hits as f64 / sf,
                mc_error,
                target,
            }
        })
        .collect())
}

/// Fraction of `S` uniform points `ξ ∈ A` with `Ĝ_n(ξ) ∈ B`.
pub fn mixing_correlation(seq: &InnerSequence, a: &Arc, b: &Arc, n: usize, s: usize, seed: u64) -> Result<MixingEstimate> {
    Ok(mixing_correlations(seq, a, b, &[n], s, seed)?[0])
}

/// `(ω_{g(z)}(E), fraction of ω_z-samples w with ĝ(w) ∈ E)`.
pub fn lowner_check(map: &InnerMap, z: Complex, arc: &Arc, s: usize, seed: u64) -> Result<(f64, f64)> {
    check_open_disk(z)?;
    arc.validate()?;
    let direct = harmonic_measure_arc(map.eval(z)?, arc)?;
    let ens = sample_harmonic(z, s, seed)?;
    let points = ens.points();
    let counts = map_chunks(points.len(), |range| {
        range
            .filter(|&i| arc.contains_angle(step(map, points[i].angle())))
            .count() as u64
    });
    let hits: u64 = counts.iter().sum();
    Ok((direct, hits as f64 / s as f64))
}

/// A test case for [`lowner_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LownerTriple {
    pub map: InnerMap,
    pub z: Complex,
    pub arc: Arc,
}

/// Entry `index` of a random stream of test cases: a rotated Blaschke
/// product of degree 1 to 3 with zeros of modulus below 0.9, an interior
/// point of modulus below 0.9, and an arc covering 5% to 95% of the circle.
pub fn lowner_triple(seed: u64, index: u64) -> LownerTriple {
    let rng = CounterRng::new(seed, stream::TRIPLES);
    let base = index * 16;
    let u = |j: u64| rng.f64_at(base + j);
    let disk_point = |j: u64| Complex::from_polar(0.9 * u(j).sqrt(), TAU * u(j + 1));
    let degree = 1 + rng.index_at(base, 3);
    let factors = (0..degree as u64)
        .map(|k| BlaschkeFactor::new(disk_point(2 + 2 * k)).expect("modulus below 0.9"))
        .collect();
    let map = InnerMap::new(UnitComplex::from_angle(TAU * u(8)), factors);
    let start = TAU * u(11);
    let span = TAU * (0.05 + 0.9 * u(12));
    LownerTriple {
        map,
        z: disk_point(9),
        arc: Arc::new(start, (start + span).rem_euclid(TAU)).expect("span is a proper fraction of the circle"),
    }
}

/// Admissible gap `5·√(direct(1 − direct)/S) + 1e−10` for [`lowner_check`].
pub fn lowner_bound(direct: f64, s: usize) -> f64 {
    5.0 * (direct * (1.0 - direct) / s as f64).sqrt() + 1e-10
}

/// How a Fourier quadrature converged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum QuadratureMethod {
    /// Uniform grid of this many points.
    Uniform { nodes: usize },
    /// Adaptive Gauss–Kronrod after the uniform grid hit [`MAX_GRID`].
    Adaptive { evaluations: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourierValue {
    pub value: Complex,
    pub method: QuadratureMethod,
}

/// `ℓ · ∏_{k=m+1}^n deg g_k`, saturating.
pub fn composition_degree(seq: &InnerSequence, m: usize, n: usize, ell: u32) -> u128 {
    (m + 1..=n).fold(ell as u128, |d, k| d.saturating_mul(seq.map(k).degree() as u128))
}

/// `∫ e_ℓ(Ĝ_m^n(ξ))·ξ^{−ℓ} dm(ξ)`, which equals `((G_m^n)'(0))^ℓ`.
///
/// Trapezoid rule on a uniform grid of at least `k` points, doubled (reusing
/// the previous nodes) until successive values agree to
/// [`QUADRATURE_TOLERANCE`]. When the grid would exceed [`MAX_GRID`], or the
/// doublings stop converging geometrically, the integral is recomputed by
/// adaptive Gauss–Kronrod quadrature.
pub fn fourier_inner_product(seq: &InnerSequence, m: usize, n: usize, ell: u32, k: usize) -> Result<Complex> {
    Ok(fourier_inner_product_detailed(seq, m, n, ell, k)?.value)
}

pub fn fourier_inner_product_detailed(
    seq: &InnerSequence,
    m: usize,
    n: usize,
    ell: u32,
    k: usize,
) -> Result<FourierValue> {
    if m >= n {
        return Err(Error::IndexOutOfRange(format!("need m < n, got m = {m}, n = {n}")));
    }
    if ell == 0 {
        return Err(Error::TooSmall {
            name: "ell",
            min: 1,
            got: 0,
        });
    }
    let degree = composition_degree(seq, m, n, ell);
    if degree > DEGREE_CAP as u128 {
        return Err(Error::DegreeCapExceeded {
            required: degree,
            cap: DEGREE_CAP,
        });
    }
    let maps: Vec<InnerMap> = (m + 1..=n).map(|j| seq.map(j)).collect();
    let l = ell as f64;
    let integrand = |theta: f64| Complex::from_polar(1.0, l * (compose_angle(&maps, theta) - theta));

    let grid_sum = |nodes: usize, offset: usize, stride: usize| -> Complex {
        let count = nodes / stride;
        let parts = map_chunks(count, |r| {
            r.fold(Complex::new(0.0, 0.0), |acc, j| {
                acc + integrand(TAU * (offset + j * stride) as f64 / nodes as f64)
            })
        });
        pairwise(&parts, Complex::new(0.0, 0.0))
    };

    let mut nodes = k.max(8).max(4 * degree as usize).next_power_of_two();
    if nodes <= MAX_GRID {
        let mut total = grid_sum(nodes, 0, 1);
        let mut previous = total / nodes as f64;
        let mut last_change = f64::INFINITY;
        while nodes < MAX_GRID {
            nodes *= 2;
            total += grid_sum(nodes, 1, 2);
            let current = total / nodes as f64;
            let change = (current - previous).norm();
            if change < QUADRATURE_TOLERANCE {
                return Ok(FourierValue {
                    value: current,
                    method: QuadratureMethod::Uniform { nodes },
                });
            }
            if nodes >= STALL_GRID && change > 0.5 * last_change {
                break;
            }
            previous = current;
            last_change = change;
        }
    }
    let (value, evaluations) = adaptive_integral(&integrand, 0.0, TAU, degree as usize)?;
    Ok(FourierValue {
        value: value / TAU,
        method: QuadratureMethod::Adaptive { evaluations },
    })
}

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for `KRONROD_NODES[1], [3], [5], [7]`.
const GAUSS7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// G7–K15 rule on `[a, b]`: `(Kronrod value, error estimate)`. The raw
/// `|Kronrod − Gauss|` is rescaled against the panel's mean absolute
/// deviation as in QUADPACK's `qk15`, and capped at twice the panel width,
/// a hard bound for unimodular integrands.
fn gauss_kronrod<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64) -> (Complex, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut values = [Complex::new(0.0, 0.0); 15];
    values[14] = f(mid);
    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        values[2 * j] = f(mid - dx);
        values[2 * j + 1] = f(mid + dx);
    }
    let mut kronrod = values[14] * KRONROD_WEIGHTS[7];
    let mut gauss = values[14] * GAUSS7_WEIGHTS[3];
    for j in 0..7 {
        let pair = values[2 * j] + values[2 * j + 1];
        kronrod += pair * KRONROD_WEIGHTS[j];
        if j % 2 == 1 {
            gauss += pair * GAUSS7_WEIGHTS[j / 2];
        }
    }
    let mean = kronrod * 0.5;
    let mut spread = (values[14] - mean).norm() * KRONROD_WEIGHTS[7];
    for j in 0..7 {
        spread += KRONROD_WEIGHTS[j] * ((values[2 * j] - mean).norm() + (values[2 * j + 1] - mean).norm());
    }
    let spread = spread * half;
    let mut error = ((kronrod - gauss) * half).norm();
    if spread > 0.0 && error > 0.0 {
        error = spread * (200.0 * error / spread).powf(1.5).min(1.0);
    }
    (kronrod * half, error.min(4.0 * half))
}

/// Globally adaptive Gauss–Kronrod: the panel with the largest error estimate
/// is bisected until the summed estimate is below the tolerance. Starts from
/// `initial` equal panels.
fn adaptive_integral<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64, initial: usize) -> Result<(Complex, usize)> {
    #[derive(PartialEq)]
    struct Panel {
        error: f64,
        a: f64,
        b: f64,
        value: Complex,
    }
    impl Eq for Panel {}
    impl PartialOrd for Panel {
        fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(other))
        }
    }
    impl Ord for Panel {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.error
                .total_cmp(&other.error)
                .then(other.a.total_cmp(&self.a))
        }
    }

    let initial = initial.clamp(1, 1 << 18);
    let width = (b - a) / initial as f64;
    let mut heap = std::collections::BinaryHeap::with_capacity(initial * 2);
    let mut evaluations = 0;
    let mut error = 0.0;
    for j in 0..initial {
        let (lo, hi) = (a + j as f64 * width, a + (j + 1) as f64 * width);
        let (value, e) = gauss_kronrod(f, lo, hi);
        evaluations += 15;
        error += e;
        heap.push(Panel {
            error: e,
            a: lo,
            b: hi,
            value,
        });
    }
    while error > ADAPTIVE_TOLERANCE && evaluations < ADAPTIVE_MAX_EVALS {
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        error -= worst.error;
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, e) = gauss_kronrod(f, lo, hi);
            evaluations += 15;
            error += e;
            heap.push(Panel {
                error: e,
                a: lo,
                b: hi,
                value,
            });
        }
    }
    if error > ADAPTIVE_TOLERANCE {
        return Err(Error::QuadratureNotConverged {
            tolerance: ADAPTIVE_TOLERANCE,
            max_nodes: ADAPTIVE_MAX_EVALS,
        });
    }
    let mut panels = heap.into_vec();
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let values: Vec<Complex> = panels.iter().map(|p| p.value).collect();
    Ok((pairwise(&values, Complex::new(0.0, 0.0)), evaluations))
}

/// Return statistics of orbits started inside an arc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceSummary {
    pub horizon: usize,
    /// Number of `n ∈ [1, N]` with `Ĝ_n(ξ) ∈ arc`, per starting point.
    pub visits: Vec<u32>,
    /// Entry `r − 1`: fraction of points with at least `r` returns.
    pub at_least: Vec<f64>,
    pub mean_visit_fraction: f64,
    pub median_visit_fraction: f64,
    /// Mean fraction of the [`COVERING_ARCS`] equal arcs an orbit visits.
    pub covering_fraction: f64,
}

/// Visits of `S` uniform starting points in `arc` to `arc` over `n ≤ N`.
pub fn recurrence_experiment(
    seq: &InnerSequence,
    arc: &Arc,
    n: usize,
    s: usize,
    seed: u64,
    max_returns: usize,
) -> Result<RecurrenceSummary> {
    arc.validate()?;
    check_size(s)?;
    let maps = maps_upto(seq, n);
    let prepared: Vec<Monomial> = maps.iter().map(Monomial::of).collect();
    let span = arc.span();
    let per_chunk = map_chunks(s, |range| {
        range
            .map(|i| {
                let mut turn = Turn::uniform_in(arc.start_angle, span, seed, i as u64);
                let mut seen = 0u64;
                let mut visits = 0u32;
                for g in &prepared {
                    turn = turn.step(g);
                    let theta = turn.angle();
                    if arc.contains_angle(theta) {
                        visits += 1;
                    }
                    let cell = ((theta / TAU) * COVERING_ARCS as f64) as usize;
                    seen |= 1 << cell.min(COVERING_ARCS - 1);
                }
                (visits, seen.count_ones())
            })
            .collect::<Vec<_>>()
    });
    let results: Vec<(u32, u32)> = per_chunk.concat();
    let visits: Vec<u32> = results.iter().map(|r| r.0).collect();
    let sf = s as f64;
    let nf = n.max(1) as f64;
    let at_least = (1..=max_returns)
        .map(|r| visits.iter().filter(|&&v| v as usize >= r).count() as f64 / sf)
        .collect();
    let fractions: Vec<f64> = visits.iter().map(|&v| v as f64 / nf).collect();
    let mean_visit_fraction = pairwise_f64(&fractions) / sf;
    let mut sorted = fractions;
    sorted.sort_by(f64::total_cmp);
    let median_visit_fraction = if s % 2 == 1 {
        sorted[s / 2]
    } else {
        0.5 * (sorted[s / 2 - 1] + sorted[s / 2])
    };
    let covered: Vec<f64> = results.iter().map(|r| r.1 as f64 / COVERING_ARCS as f64).collect();
    Ok(RecurrenceSummary {
        horizon: n,
        visits,
        at_least,
        mean_visit_fraction,
        median_visit_fraction,
        covering_fraction: pairwise_f64(&covered) / sf,
    })
}

/// Times `n ∈ [1, N]` at which the orbit of `start` lies in `arc`.
pub fn visit_indices(seq: &InnerSequence, arc: &Arc, start: UnitComplex, n: usize) -> Result<Vec<usize>> {
    arc.validate()?;
    let mut turn = Turn::from_angle(start.angle());
    let mut out = Vec::new();
    for k in 1..=n {
        let g = seq.map(k);
        turn = turn.step(&Monomial::of(&g));
        if arc.contains_angle(turn.angle()) {
            out.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::FamilySpec;
    use crate::ledger::DerivativeLedger;

    fn seq(spec: FamilySpec) -> InnerSequence {
        InnerSequence::new(spec).unwrap()
    }

    #[test]
    fn lowner_triples_are_reproducible_and_pass() {
        for index in 0..5 {
            let t = lowner_triple(17, index);
            assert_eq!(t, lowner_triple(17, index));
            assert!(t.z.norm() < 0.9);
            assert!((0.05 - 1e-12..=0.95 + 1e-12).contains(&t.arc.length()), "{:?}", t.arc);
            let (direct, pulled) = lowner_check(&t.map, t.z, &t.arc, 20_000, index).unwrap();
            assert!((direct - pulled).abs() <= lowner_bound(direct, 20_000), "{t:?}: {direct} vs {pulled}");
        }
        assert_ne!(lowner_triple(17, 0), lowner_triple(18, 0));
    }

    #[test]
    fn uniform_sampling_is_deterministic() {
        let a = sample_uniform(4, 7).unwrap();
        let b = sample_uniform(4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.regenerate().unwrap().unwrap(), a);
        assert_ne!(a, sample_uniform(4, 8).unwrap());
        assert!(sample_uniform(0, 1).is_err());
    }

    #[test]
    fn uniform_moments_and_arc_frequency() {
        let s = 100_000;
        let ens = sample_uniform(s, 3).unwrap();
        let mean: Complex = ens.points().iter().map(|p| p.to_complex()).sum::<Complex>() / s as f64;
        assert!(mean.norm() <= 5.0 / (s as f64).sqrt());
        let quarter = Arc::from_turns(0.0, 0.25).unwrap();
        let freq = ens.points().iter().filter(|p| quarter.contains(**p)).count() as f64 / s as f64;
        assert!((freq - 0.25).abs() <= 5.0 * (0.25 * 0.75 / s as f64).sqrt());
    }

    #[test]
    fn harmonic_sampling() {
        let s = 100_000;
        let z = Complex::new(0.5, 0.0);
        let ens = sample_harmonic(z, s, 5).unwrap();
        let near_one = Arc::from_turns(-0.05, 0.1).unwrap();
        let exact = harmonic_measure_arc(z, &near_one).unwrap();
        let freq = ens.points().iter().filter(|p| near_one.contains(**p)).count() as f64 / s as f64;
        assert!(freq > 0.1);
        assert!((freq - exact).abs() <= 5.0 * (exact * (1.0 - exact) / s as f64).sqrt());
        let rest = Arc::new(near_one.end_angle, near_one.start_angle + TAU).unwrap();
        let inside = ens.points().iter().filter(|p| near_one.contains(**p)).count();
        let outside = ens.points().iter().filter(|p| rest.contains(**p)).count();
        assert_eq!(inside + outside, s);
        assert!(sample_harmonic(Complex::new(1.0, 0.0), 10, 1).is_err());
        let at_origin = sample_harmonic(Complex::new(0.0, 0.0), 1000, 1).unwrap();
        assert!(ks_uniformity(&at_origin).unwrap() < KS_CRITICAL_001 / 1000f64.sqrt());
    }

    #[test]
    fn squaring_doubles_angles() {
        let start = CircleEnsemble {
            points: vec![UnitComplex::from_angle(TAU / 7.0)],
            seed: 0,
            provenance: Provenance::Uniform,
        };
        let snaps = push_ensemble(&seq(FamilySpec::Squaring), &start, 6);
        for (k, snap) in snaps.iter().enumerate() {
            let expected = (TAU / 7.0 * 2f64.powi(k as i32 + 1)).rem_euclid(TAU);
            assert!(crate::disk::angle_difference(snap.points()[0].angle(), expected).abs() < 1e-12);
            assert_eq!(snap.provenance(), &Provenance::Pushed { n: k + 1 });
        }
    }

    #[test]
    fn rotation_pushes_rigidly() {
        let ens = sample_uniform(1000, 2).unwrap();
        let snaps = push_ensemble(&seq(FamilySpec::Rotation { alpha: 0.25 }), &ens, 4);
        for (p, q) in ens.points().iter().zip(snaps[3].points()) {
            assert!(crate::disk::angle_difference(p.angle(), q.angle()).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_examples() {
        let s = 1000;
        let grid = CircleEnsemble {
            points: (0..s).map(|i| UnitComplex::from_angle(TAU * i as f64 / s as f64)).collect(),
            seed: 0,
            provenance: Provenance::Uniform,
        };
        assert!(ks_uniformity(&grid).unwrap() <= 1.0 / s as f64 + 1e-15);
        let lump = CircleEnsemble {
            points: vec![UnitComplex::from_angle(1.0); s],
            seed: 0,
            provenance: Provenance::Uniform,
        };
        assert!(ks_uniformity(&lump).unwrap() > 0.8);
        let small = sample_uniform(99, 1).unwrap();
        assert!(ks_uniformity(&small).is_err());
    }

    #[test]
    fn ratio_family_preserves_lebesgue_measure() {
        let s = 100_000;
        let ks = ks_pushed(&seq(FamilySpec::Blaschke2Ratio), 50, s, 9).unwrap();
        assert!(ks[49] <= KS_CRITICAL_001 / (s as f64).sqrt());
    }

    #[test]
    fn norm_examples() {
        let golden = seq(FamilySpec::Rotation { alpha: (5f64.sqrt() - 1.0) / 2.0 });
        let v = ergodic_average_norm(&golden, 1, 1000, 10_000, 1).unwrap();
        assert!(v < 2e-3);
        let half = seq(FamilySpec::Rotation { alpha: 0.5 });
        let v = ergodic_average_norm(&half, 2, 100, 1000, 1).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn norm_identity_on_constant_family() {
        let spec = FamilySpec::Blaschke2Constant { a: 0.5 };
        let s = 20_000;
        let est = ergodic_average_norms(&seq(spec.clone()), &[1, 2], &[10, 100], s, 4).unwrap();
        let ledger = DerivativeLedger::build(&seq(spec), 100).unwrap();
        for (e, ell) in [1u32, 2].iter().enumerate() {
            for (c, n) in [10usize, 100].iter().enumerate() {
                let exact = 1.0 / *n as f64 + 2.0 * crate::criteria::ergodic_double_sum(&ledger, *ell, *n).unwrap();
                assert!((est[e][c].value - exact).abs() <= 5.0 / (s as f64).sqrt());
            }
        }
    }

    #[test]
    fn mixing_examples() {
        let upper = Arc::upper_half();
        let id = seq(FamilySpec::Rotation { alpha: 0.0 });
        let e = mixing_correlation(&id, &upper, &upper, 7, 10_000, 1).unwrap();
        assert!((e.value - 0.5).abs() < 0.02 && e.target == 0.25);
        let sq = seq(FamilySpec::Squaring);
        let e = mixing_correlation(&sq, &upper, &upper, 20, 100_000, 1).unwrap();
        assert!(e.deviation() <= 5.0);
        assert!(e.mc_error > 0.0);
    }

    #[test]
    fn lowner_examples() {
        let arc = Arc::from_turns(0.1, 0.3).unwrap();
        let g = seq(FamilySpec::Blaschke2Ratio).map(1);
        let (direct, pulled) = lowner_check(&g, Complex::new(0.0, 0.0), &arc, 50_000, 1).unwrap();
        assert!((direct - 0.3).abs() < 1e-10);
        assert!((direct - pulled).abs() <= lowner_bound(direct, 50_000));
        let rho = InnerMap::rotation(UnitComplex::from_turns(0.2));
        let z = Complex::new(0.2, -0.4);
        let (direct, pulled) = lowner_check(&rho, z, &arc, 50_000, 2).unwrap();
        let back = Arc::new(arc.start_angle - 0.2 * TAU, arc.end_angle - 0.2 * TAU).unwrap();
        assert!((direct - harmonic_measure_arc(z, &back).unwrap()).abs() < 1e-9);
        assert!((direct - pulled).abs() <= lowner_bound(direct, 50_000));
        assert!(lowner_check(&rho, Complex::new(0.0, 1.0), &arc, 10, 1).is_err());
    }

    #[test]
    fn fourier_examples() {
        let rot = seq(FamilySpec::Rotation { alpha: 0.3 });
        let v = fourier_inner_product(&rot, 0, 1, 1, 16).unwrap();
        assert!((v - Complex::from_polar(1.0, 0.3 * TAU)).norm() < 1e-12);
        let ratio = seq(FamilySpec::Blaschke2Ratio);
        assert!((fourier_inner_product(&ratio, 2, 5, 1, 64).unwrap() - 0.5).norm() < 1e-8);
        assert!((fourier_inner_product(&ratio, 0, 3, 2, 64).unwrap() - 0.0625).norm() < 1e-8);
        assert!(fourier_inner_product(&ratio, 3, 3, 1, 64).is_err());
        match fourier_inner_product(&ratio, 0, 20, 1, 64) {
            Err(Error::DegreeCapExceeded { required, cap }) => {
                assert_eq!(required, 1 << 20);
                assert_eq!(cap, DEGREE_CAP);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fourier_falls_back_for_near_singular_factors() {
        let near = seq(FamilySpec::NearRotation);
        let r = fourier_inner_product_detailed(&near, 20, 22, 1, 64).unwrap();
        let exact = DerivativeLedger::build(&near, 22).unwrap().window_derivative(20, 22).unwrap();
        assert!(matches!(r.method, QuadratureMethod::Adaptive { .. }));
        assert!((r.value - exact).norm() < 1e-8, "{:?} vs {exact}", r.value);
    }

    #[test]
    fn recurrence_examples() {
        let quarter_rot = seq(FamilySpec::Rotation { alpha: 0.25 });
        let arc = Arc::new(0.0, std::f64::consts::FRAC_PI_2).unwrap();
        let v = visit_indices(&quarter_rot, &arc, UnitComplex::from_angle(0.1), 20).unwrap();
        assert_eq!(v, vec![4, 8, 12, 16, 20]);
        let sq = seq(FamilySpec::Squaring);
        let r = recurrence_experiment(&sq, &Arc::from_turns(0.0, 0.25).unwrap(), 1000, 2000, 1, 3).unwrap();
        assert!(r.at_least[0] >= 0.99);
        assert!(r.covering_fraction > 0.9);
    }
}
