//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantities and the pinned tolerances.
//!
//! The process exits non-zero when any criterion fails, except those listed
//! in [`KNOWN_FAILURES`], which are reported as `FAIL` with the reason.

use std::process::ExitCode;
use std::time::Instant;

use inner_circle::boundary::{
    composition_degree, ergodic_average_norms, fourier_inner_product, ks_pushed, lowner_bound, lowner_check,
    lowner_triple, mixing_correlation, mixing_correlations, DEGREE_CAP, KS_CRITICAL_001,
};
use inner_circle::catalog::{self, GOLDEN};
use inner_circle::criteria::{
    classify, dyadic_trend, ergodic_double_sum, necessary_sum, recurrence_traces, CriterionParams, Trend, Verdict,
};
use inner_circle::ledger::Contraction;
use inner_circle::{Arc, Complex, DerivativeLedger, Error, InnerSequence};
use inner_circle_cli::config::{BoundaryExperiment, ExperimentConfig};
use inner_circle_cli::{run_boundary, run_classify, run_verify, with_threads};

/// Criterion 1: relative error of `window_derivative(m, n)` against `(m+1)/(n+1)`.
const TELESCOPE_RTOL: f64 = 1e-12;
const TELESCOPE_N: usize = 10_000;
const TELESCOPE_SECONDS: f64 = 5.0;

/// Criterion 2: band for `S_N(1)` of the ratio family.
const RATIO_BAND: (f64, f64) = (0.22, 0.27);
const RATIO_SECONDS: f64 = 10.0;

/// Criterion 4: quadratic oracle agreement.
const BRUTE_TOL: f64 = 1e-9;
const BRUTE_N: usize = 2000;

/// Criterion 5: Fourier identity.
const FOURIER_TOL: f64 = 1e-8;
const FOURIER_N_MAX: usize = 10;
const FOURIER_ELL_MAX: u32 = 4;
const FOURIER_SECONDS: f64 = 60.0;

/// Criterion 6: norm identity within `NORM_SIGMAS / √S`.
const NORM_SAMPLES: usize = 100_000;
const NORM_SIGMAS: f64 = 5.0;
const NORM_SECONDS: f64 = 300.0;

/// Criterion 7: pushed ensembles and Löwner triples.
const KS_SAMPLES: usize = 100_000;
const KS_STEPS: usize = 100;
const LOWNER_TRIPLES: u64 = 20;
const LOWNER_SAMPLES: usize = 100_000;

/// Criterion 8: mixing correlations at `n = MIXING_N` from `S = MIXING_SAMPLES` points.
const MIXING_N: usize = 1000;
const MIXING_SAMPLES: usize = 1_000_000;
const MIXING_SIGMAS: f64 = 5.0;
const STUCK_SIGMAS: f64 = 10.0;

/// Ledger length used for classification.
const CLASSIFY_N: usize = 10_000;

const SEED: u64 = 20_240_601;

/// Criteria that cannot pass as stated, with the reason printed next to them.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (
        7,
        "1.63/sqrt(S) is a per-test 1% level applied to 1500 snapshots; under exact uniformity about 15 exceed it and the maximum exceeds it almost surely",
    ),
    (
        8,
        "the ratio family approaches m(A)m(B) only like 0.13/sqrt(n); at n = 1000 the bias (about 4e-3) exceeds 5 MC errors (2.2e-3 at S = 1e6)",
    ),
];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn sequence(name: &str) -> InnerSequence {
    InnerSequence::new(catalog::find(name).expect("catalog name").spec).unwrap()
}

fn exact_derivative_identity() -> Outcome {
    let start = Instant::now();
    let ledger = DerivativeLedger::build(&sequence("blaschke2_ratio"), TELESCOPE_N).unwrap();
    let mut worst: f64 = 0.0;
    for m in 0..TELESCOPE_N {
        for n in m + 1..=TELESCOPE_N {
            let got = ledger.window_derivative(m, n).unwrap();
            let want = (m as f64 + 1.0) / (n as f64 + 1.0);
            worst = worst.max((got - want).norm() / want);
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    outcome(
        worst <= TELESCOPE_RTOL && seconds < TELESCOPE_SECONDS,
        format!(
            "all 0 <= m < n <= {TELESCOPE_N}: max rel err {worst:.2e} (tol {TELESCOPE_RTOL:.0e}), {seconds:.2} s (limit {TELESCOPE_SECONDS} s)"
        ),
    )
}

fn counterexample_not_ergodic() -> Outcome {
    let params = CriterionParams::default();
    let start = Instant::now();
    let ledger = DerivativeLedger::build(&sequence("blaschke2_ratio"), 100_000).unwrap();
    let trace = recurrence_traces(&ledger, 1, 100_000).unwrap().double_sum;
    let seconds = start.elapsed().as_secs_f64();
    let mut passed = seconds < RATIO_SECONDS;
    let mut parts = Vec::new();
    for n in [1_000usize, 10_000, 100_000] {
        let s = ergodic_double_sum(&ledger, 1, n).unwrap();
        let trend = dyadic_trend(&trace[..n], params.tolerance, &params.trend()).trend;
        passed &= (RATIO_BAND.0..=RATIO_BAND.1).contains(&s) && trend == Trend::Persistent;
        parts.push(format!("S_{n} = {s:.5} ({trend:?})"));
    }
    outcome(
        passed,
        format!(
            "{} in [{}, {}], {seconds:.2} s at N = 1e5 (limit {RATIO_SECONDS} s)",
            parts.join(", "),
            RATIO_BAND.0,
            RATIO_BAND.1
        ),
    )
}

fn necessary_condition_satisfied() -> Outcome {
    let n = 100_000;
    let ledger = DerivativeLedger::build(&sequence("blaschke2_ratio"), n).unwrap();
    let value = necessary_sum(&ledger, 0, 1, n).unwrap().norm();
    let bound = 2.0 * (n as f64).ln() / n as f64;
    outcome(value <= bound, format!("|necessary sum| = {value:.4e} <= 2 ln N / N = {bound:.4e}"))
}

fn brute_force_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    for entry in catalog::entries() {
        let seq = InnerSequence::new(entry.spec).unwrap();
        let ledger = DerivativeLedger::build(&seq, BRUTE_N).unwrap();
        let d: Vec<Complex> = (1..=BRUTE_N).map(|k| seq.map(k).derivative_at_origin()).collect();
        for ell in 1..=4 {
            let p: Vec<Complex> = d.iter().map(|x| x.powu(ell)).collect();
            let fast = recurrence_traces(&ledger, ell, BRUTE_N).unwrap().double_sum;
            let mut total = Complex::new(0.0, 0.0);
            for n in 1..=BRUTE_N {
                let mut w = Complex::new(1.0, 0.0);
                for k in (2..=n).rev() {
                    w *= p[k - 1];
                    total += w;
                }
                let slow = total.re / (n * n) as f64;
                worst = worst.max((fast[n - 1] - slow).abs());
            }
            worst = worst.max((ergodic_double_sum(&ledger, ell, BRUTE_N).unwrap() - fast[BRUTE_N - 1]).abs());
        }
    }
    outcome(
        worst <= BRUTE_TOL,
        format!("15 families, ell <= 4, every N <= {BRUTE_N}: max gap {worst:.2e} (tol {BRUTE_TOL:.0e})"),
    )
}

fn fourier_identity() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut check = |name: &str, seq: &InnerSequence, m: usize, n: usize, ell: u32| {
        let ledger = DerivativeLedger::build(seq, n).unwrap();
        let want = ledger.window_derivative(m, n).unwrap().powu(ell);
        match fourier_inner_product(seq, m, n, ell, 8) {
            Ok(got) => worst = worst.max((got - want).norm()),
            Err(e) => failures.push(format!("{name} ({m}, {n}, {ell}): {e}")),
        }
        cases += 1;
    };
    for entry in catalog::entries() {
        let seq = InnerSequence::new(entry.spec.clone()).unwrap();
        for m in 0..FOURIER_N_MAX {
            for n in m + 1..=FOURIER_N_MAX {
                for ell in 1..=FOURIER_ELL_MAX {
                    check(&entry.name, &seq, m, n, ell);
                }
            }
        }
    }
    // Cases at the degree cap.
    for name in ["squaring", "sparse_blocks_alternating"] {
        let seq = sequence(name);
        check(name, &seq, 0, 16, 1);
        check(name, &seq, 10, 24, 4);
    }
    for name in ["rotation_golden", "rotation_third"] {
        check(name, &sequence(name), 0, 1000, 4);
    }
    let seconds = start.elapsed().as_secs_f64();
    let squaring = sequence("squaring");
    let cap_enforced = composition_degree(&squaring, 0, 17, 1) > DEGREE_CAP as u128
        && matches!(fourier_inner_product(&squaring, 0, 17, 1, 8), Err(Error::DegreeCapExceeded { .. }));
    outcome(
        failures.is_empty() && worst <= FOURIER_TOL && seconds < FOURIER_SECONDS && cap_enforced,
        format!(
            "{cases} cases (all families, 0 <= m < n <= {FOURIER_N_MAX}, ell <= {FOURIER_ELL_MAX}, plus cap-edge cases): \
             max gap {worst:.2e} (tol {FOURIER_TOL:.0e}), {} unconverged, cap enforced: {cap_enforced}, {seconds:.1} s (limit {FOURIER_SECONDS} s){}",
            failures.len(),
            failures.first().map(|f| format!("; first: {f}")).unwrap_or_default()
        ),
    )
}

fn norm_identity() -> Outcome {
    let start = Instant::now();
    let checkpoints = [100usize, 1000];
    let ells = [1u32, 2, 3, 4];
    let bound = NORM_SIGMAS / (NORM_SAMPLES as f64).sqrt();
    let mut worst: f64 = 0.0;
    let mut worst_case = String::new();
    for entry in catalog::entries() {
        let seq = InnerSequence::new(entry.spec.clone()).unwrap();
        let ledger = DerivativeLedger::build(&seq, 1000).unwrap();
        let norms = ergodic_average_norms(&seq, &ells, &checkpoints, NORM_SAMPLES, SEED).unwrap();
        for (e, &ell) in ells.iter().enumerate() {
            for (c, &n) in checkpoints.iter().enumerate() {
                let want = 1.0 / n as f64 + 2.0 * ergodic_double_sum(&ledger, ell, n).unwrap();
                let gap = (norms[e][c].value - want).abs();
                if gap > worst {
                    worst = gap;
                    worst_case = format!("{} ell {ell} N {n}", entry.name);
                }
            }
        }
    }
    let seconds = start.elapsed().as_secs_f64();
    outcome(
        worst <= bound && seconds < NORM_SECONDS,
        format!(
            "15 families, ell <= 4, N in {{100, 1000}}, S = {NORM_SAMPLES}: max gap {worst:.2e} at {worst_case} (bound {bound:.2e}), {seconds:.1} s (limit {NORM_SECONDS} s)"
        ),
    )
}

fn lowner_measure_preservation() -> Outcome {
    let critical = KS_CRITICAL_001 / (KS_SAMPLES as f64).sqrt();
    let mut worst_ks: f64 = 0.0;
    let mut worst_family = String::new();
    let mut exceedances = 0;
    let mut snapshots = 0;
    for entry in catalog::entries() {
        let seq = InnerSequence::new(entry.spec.clone()).unwrap();
        let stats = ks_pushed(&seq, KS_STEPS, KS_SAMPLES, SEED).unwrap();
        snapshots += stats.len();
        exceedances += stats.iter().filter(|&&d| d > critical).count();
        for &d in &stats {
            if d > worst_ks {
                worst_ks = d;
                worst_family = entry.name.clone();
            }
        }
    }
    let mut worst_ratio: f64 = 0.0;
    for i in 0..LOWNER_TRIPLES {
        let t = lowner_triple(SEED, i);
        let (direct, pulled) = lowner_check(&t.map, t.z, &t.arc, LOWNER_SAMPLES, SEED + i).unwrap();
        worst_ratio = worst_ratio.max((direct - pulled).abs() / lowner_bound(direct, LOWNER_SAMPLES));
    }
    outcome(
        worst_ks <= critical && worst_ratio <= 1.0,
        format!(
            "max KS over 15 families and n <= {KS_STEPS} = {worst_ks:.3e} ({worst_family}, limit {critical:.3e}), \
             {exceedances} of {snapshots} snapshots above the limit; \
             {LOWNER_TRIPLES} triples: max gap / bound = {worst_ratio:.3}"
        ),
    )
}

fn usual_sense_mixing() -> Outcome {
    let half = Arc::upper_half();
    let mut passed = true;
    let mut parts = Vec::new();
    for name in ["blaschke2_ratio", "squaring", "blaschke2_constant"] {
        let e = mixing_correlation(&sequence(name), &half, &half, MIXING_N, MIXING_SAMPLES, SEED).unwrap();
        let ok = e.deviation() <= MIXING_SIGMAS;
        passed &= ok;
        parts.push(format!(
            "{name} {:.5} ({:.1} sigma{})",
            e.value,
            e.deviation(),
            if ok { "" } else { ", too far" }
        ));
    }
    let stuck = mixing_correlations(
        &sequence("rotation_identity"),
        &half,
        &half,
        &[1, 10, 100, MIXING_N],
        MIXING_SAMPLES,
        SEED,
    )
    .unwrap();
    let least = stuck.iter().map(|e| e.deviation()).fold(f64::INFINITY, f64::min);
    passed &= least > STUCK_SIGMAS;
    parts.push(format!("rotation_identity stays at {:.4} (min {least:.0} sigma)", stuck[0].value));
    outcome(
        passed,
        format!(
            "target 0.25, n = {MIXING_N}, S = {MIXING_SAMPLES}, within {MIXING_SIGMAS} sigma: {}",
            parts.join("; ")
        ),
    )
}

fn rotation_dichotomy() -> Outcome {
    let params = CriterionParams::default();
    let decide = |alpha: f64| {
        let ledger = DerivativeLedger::build(&InnerSequence::new(catalog::rotation(alpha)).unwrap(), CLASSIFY_N).unwrap();
        classify(&ledger, &params).unwrap()
    };
    let golden = decide(GOLDEN).verdict;
    let mut passed = golden == Verdict::Ergodic;
    let mut wrong = Vec::new();
    let mut count = 0;
    for q in 1..=8u32 {
        for p in 0..q {
            if gcd(p, q) != 1 {
                continue;
            }
            count += 1;
            let report = decide(p as f64 / q as f64);
            if report.verdict != Verdict::NotErgodic || report.first_weyl_failure != Some(q) {
                wrong.push(format!("{p}/{q}: {:?} at {:?}", report.verdict, report.first_weyl_failure));
            }
        }
    }
    passed &= wrong.is_empty();
    outcome(
        passed,
        format!(
            "golden: {golden:?}; {count} rationals p/q with q <= 8 not ergodic with first Weyl failure at q: {}",
            if wrong.is_empty() { "all".to_string() } else { wrong.join(", ") }
        ),
    )
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn mixing_verdicts() -> Outcome {
    let params = CriterionParams::default();
    let report = |name: &str| {
        let ledger = DerivativeLedger::build(&sequence(name), CLASSIFY_N).unwrap();
        classify(&ledger, &params).unwrap()
    };
    let constant = report("blaschke2_constant");
    let ratio = report("blaschke2_ratio");
    outcome(
        constant.verdict == Verdict::Mixing
            && ratio.verdict == Verdict::NotErgodic
            && ratio.contraction.verdict == Contraction::Contracting,
        format!(
            "blaschke2_constant(0.5): {:?} by {:?}; blaschke2_ratio: {:?} by {:?} with contraction {:?}",
            constant.verdict, constant.decided_by, ratio.verdict, ratio.decided_by, ratio.contraction.verdict
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::for_family("random_rotation_uniform");
    config.seed = SEED;
    config.boundary.samples = 20_000;
    config.boundary.ks_steps = 20;
    config.boundary.checkpoints = vec![50];
    config.boundary.mixing_times = vec![1, 10, 50];
    config.boundary.recurrence_horizon = 50;
    config.boundary.experiments = vec![
        BoundaryExperiment::Ks,
        BoundaryExperiment::Norms,
        BoundaryExperiment::Mixing,
        BoundaryExperiment::Recurrence,
    ];
    config.verify.fourier_n_max = 4;
    config.verify.norm_samples = 20_000;
    config.verify.norm_checkpoints = vec![50];
    config.verify.lowner_triples = 3;
    config.verify.lowner_samples = 20_000;
    config.output.plots = true;
    let mut snapshots = Vec::new();
    for threads in [1usize, 4, 1] {
        let mut files = Vec::new();
        for (name, runner) in [
            ("classify", run_classify as fn(&ExperimentConfig) -> anyhow::Result<_>),
            ("boundary", run_boundary),
            ("verify", run_verify),
        ] {
            let mut c = config.clone();
            c.output.dir = dir.path().join(name);
            let manifest = with_threads(threads, || runner(&c)).unwrap().unwrap();
            for file in manifest.outputs {
                files.push((format!("{name}/{file}"), std::fs::read(c.output.dir.join(&file)).unwrap()));
            }
        }
        snapshots.push(files);
    }
    let identical = snapshots.windows(2).all(|w| w[0] == w[1]);
    let count = snapshots[0].len();
    let bytes: usize = snapshots[0].iter().map(|f| f.1.len()).sum();
    outcome(
        identical,
        format!("{count} files ({bytes} bytes) from classify, boundary and verify identical under 1, 4 and 1 workers"),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, &str, fn() -> Outcome); 11] = [
        (1, "exact derivative identity", exact_derivative_identity),
        (2, "counterexample double sum", counterexample_not_ergodic),
        (3, "necessary condition", necessary_condition_satisfied),
        (4, "brute-force equivalence", brute_force_equivalence),
        (5, "Fourier identity", fourier_identity),
        (6, "norm identity", norm_identity),
        (7, "measure preservation", lowner_measure_preservation),
        (8, "usual-sense mixing", usual_sense_mixing),
        (9, "rotation dichotomy", rotation_dichotomy),
        (10, "mixing verdicts", mixing_verdicts),
        (11, "determinism", determinism),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criteria {
        let start = Instant::now();
        let result = run();
        let status = if result.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {id:>2} {name:<28} {status} [{:.1} s] {}",
            start.elapsed().as_secs_f64(),
            result.detail
        );
        if !result.passed {
            match KNOWN_FAILURES.iter().find(|(k, _)| *k == id) {
                Some((_, why)) => println!("             known failure: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{unexpected} criteria failed unexpectedly");
        ExitCode::FAILURE
    }
}
