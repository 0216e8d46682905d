//! Classifies every catalog family and prints the verdict next to the expected one.

use inner_circle::catalog;
use inner_circle::criteria::{classify, CriterionParams};
use inner_circle::{DerivativeLedger, InnerSequence};

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let params = CriterionParams::default();
    for e in catalog::entries() {
        let seq = InnerSequence::new(e.spec.clone()).unwrap();
        let ledger = DerivativeLedger::build(&seq, n).unwrap();
        let report = classify(&ledger, &params).unwrap();
        println!(
            "{:<30} expected {:<24} got {:<12} by {:<14} contraction {:?} weyl_fail {:?}",
            e.name,
            format!("{:?}", e.expected),
            format!("{:?}", report.verdict),
            format!("{:?}", report.decided_by),
            report.contraction.verdict,
            report.first_weyl_failure
        );
    }
}
