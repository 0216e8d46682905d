//! Independent oracles run against every catalog family.

use inner_circle::catalog::{self, Expected};
use inner_circle::criteria::{classify, ergodic_double_sum, CriterionParams, Verdict};
use inner_circle::{Complex, DerivativeLedger, InnerSequence};

fn sequence(entry: &catalog::CatalogEntry) -> InnerSequence {
    InnerSequence::new(entry.spec.clone()).unwrap()
}

/// Derivatives taken from each map directly, bypassing the ledger.
fn direct_derivatives(seq: &InnerSequence, n: usize) -> Vec<Complex> {
    (1..=n).map(|k| seq.map(k).derivative_at_origin()).collect()
}

/// `Re Σ_{1≤m<n≤N} D(m,n)^ℓ / N²` summed term by term.
fn quadratic_double_sum(d: &[Complex], ell: u32) -> f64 {
    let n = d.len();
    let powers: Vec<Complex> = d.iter().map(|x| x.powu(ell)).collect();
    let mut total = Complex::new(0.0, 0.0);
    for m in 1..n {
        let mut w = Complex::new(1.0, 0.0);
        for p in &powers[m..] {
            w *= p;
            total += w;
        }
    }
    total.re / (n * n) as f64
}

#[test]
fn double_sum_matches_quadratic_oracle_for_every_family() {
    for entry in catalog::entries() {
        let seq = sequence(&entry);
        let d = direct_derivatives(&seq, 2000);
        let ledger = DerivativeLedger::build(&seq, 2000).unwrap();
        for ell in 1..=4 {
            for n in [2usize, 17, 300, 2000] {
                let fast = ergodic_double_sum(&ledger, ell, n).unwrap();
                let slow = quadratic_double_sum(&d[..n], ell);
                assert!(
                    (fast - slow).abs() <= 1e-9,
                    "{} ell {ell} N {n}: {fast} vs {slow}",
                    entry.name
                );
            }
        }
    }
}

#[test]
fn ratio_window_derivative_telescopes() {
    let ledger = DerivativeLedger::build(&InnerSequence::new(catalog::blaschke2_ratio()).unwrap(), 10_000).unwrap();
    let mut pairs: Vec<(usize, usize)> = (0..300).flat_map(|m| (m + 1..=300).map(move |n| (m, n))).collect();
    pairs.extend([(0, 10_000), (1, 9_999), (4_999, 5_000), (9_998, 10_000), (123, 8_765)]);
    for (m, n) in pairs {
        let got = ledger.window_derivative(m, n).unwrap();
        let want = (m as f64 + 1.0) / (n as f64 + 1.0);
        assert!((got.re - want).abs() <= 1e-12 * want, "({m}, {n}): {got} vs {want}");
        assert!(got.im.abs() <= 1e-12 * want, "({m}, {n}): {got}");
    }
}

#[test]
fn ledger_agrees_with_direct_products() {
    for entry in catalog::entries() {
        let seq = sequence(&entry);
        let d = direct_derivatives(&seq, 60);
        let ledger = DerivativeLedger::build(&seq, 60).unwrap();
        for m in 0..60 {
            let mut w = Complex::new(1.0, 0.0);
            for n in m + 1..=60 {
                w *= d[n - 1];
                let got = ledger.window_derivative(m, n).unwrap();
                assert!(
                    (got - w).norm() <= 1e-12 * (1.0 + w.norm()),
                    "{} ({m}, {n}): {got} vs {w}",
                    entry.name
                );
            }
        }
    }
}

#[test]
fn catalog_expectations_hold() {
    let params = CriterionParams::default();
    for entry in catalog::entries() {
        let ledger = DerivativeLedger::build(&sequence(&entry), 10_000).unwrap();
        let report = classify(&ledger, &params).unwrap();
        assert!(
            entry.expected.admits(report.verdict),
            "{}: expected {:?}, got {:?}",
            entry.name,
            entry.expected,
            report.verdict
        );
    }
}

#[test]
fn subsequences_of_mixing_families_are_ergodic() {
    let params = CriterionParams::default();
    for entry in catalog::entries().into_iter().filter(|e| e.expected == Expected::Mixing) {
        let ledger = DerivativeLedger::build(&sequence(&entry), 6_000).unwrap();
        for stride in [2, 3] {
            let sub = ledger.subsequence(stride).unwrap();
            let verdict = classify(&sub, &params).unwrap().verdict;
            assert!(
                matches!(verdict, Verdict::Ergodic | Verdict::Mixing),
                "{} stride {stride}: {verdict:?}",
                entry.name
            );
        }
    }
}

#[test]
fn classification_is_reproducible() {
    let params = CriterionParams::default();
    for entry in catalog::entries() {
        let seq = sequence(&entry);
        let first = classify(&DerivativeLedger::build(&seq, 3_000).unwrap(), &params).unwrap();
        let second = classify(&DerivativeLedger::build(&seq, 3_000).unwrap(), &params).unwrap();
        assert_eq!(
            serde_json::to_string(&first).unwrap(),
            serde_json::to_string(&second).unwrap(),
            "{}",
            entry.name
        );
    }
}
