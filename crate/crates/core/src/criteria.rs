//! Ergodicity and mixing criteria evaluated from a [`DerivativeLedger`].
//!
//! All quantities are functions of the window derivatives
//! `D(m, n) = (G_m^n)'(0) = P_n / P_m`. Limit statements are replaced by
//! finite trend tests over dyadic blocks of indices; see [`Trend`].

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ledger::{contracting_heuristic, Contraction, ContractionParams, ContractionReport, DerivativeLedger};

pub mod cite {
    pub const DOUBLE_SUM: &str = "double-sum characterization of ergodicity: Re((1/N²)ΣΣ D(m,n)^ℓ) → 0 for every ℓ";
    pub const TAIL_PRODUCT: &str =
        "positive-derivative criterion: ergodic iff ∏_{k=⌊N(1−ε)⌋}^N g_k'(0) → 0 for every ε (sufficient without positivity)";
    pub const WINDOW_PRODUCT: &str =
        "window-product criterion: mixing iff ∏_{k=N−M}^N g_k'(0) < ε for N > M > M0 (sufficient in modulus without positivity)";
    pub const WEYL: &str =
        "non-contracting criterion: ergodic iff e^{i arg G_n'(0)} is equidistributed (Weyl sums → 0 for every ℓ)";
    pub const SUFFICIENT: &str = "sufficient condition: (1/N)Σ_m D(m,N)^ℓ → 0 for every ℓ implies ergodic";
    pub const NECESSARY: &str = "necessary condition: ergodic implies (1/N)Σ_n D(m,n)^ℓ → 0 for every m, ℓ";
    pub const DENSITY: &str = "density corollary: #{n∈[a,b] : |g_n'(0)| ≤ λ} ≥ c(b−a) for b−a > M0 implies mixing";
    pub const CONTRACTION: &str = "contraction dichotomy: contracting iff Σ(1 − |g_n'(0)|) = ∞";
    pub const MIXING_SUBSEQUENCE: &str = "a sequence has a mixing subsequence iff it is contracting";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Ergodic,
    Mixing,
    NotErgodic,
    Undecided,
}

impl Verdict {
    /// Mixing sequences are ergodic.
    pub fn is_ergodic(self) -> bool {
        matches!(self, Verdict::Ergodic | Verdict::Mixing)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Contraction,
    TailProduct,
    WindowProduct,
    Density,
    Weyl,
    Sufficient,
    Necessary,
    DoubleSum,
}

impl Condition {
    pub fn citation(self) -> &'static str {
        match self {
            Condition::Contraction => cite::CONTRACTION,
            Condition::TailProduct => cite::TAIL_PRODUCT,
            Condition::WindowProduct => cite::WINDOW_PRODUCT,
            Condition::Density => cite::DENSITY,
            Condition::Weyl => cite::WEYL,
            Condition::Sufficient => cite::SUFFICIENT,
            Condition::Necessary => cite::NECESSARY,
            Condition::DoubleSum => cite::DOUBLE_SUM,
        }
    }
}

/// Which instance of a condition an evidence line refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", content = "value", rename_all = "snake_case")]
pub enum Parameter {
    None,
    Ell(u32),
    Epsilon(f64),
    Window(usize),
    OffsetEll { m: usize, ell: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub condition: Condition,
    pub parameter: Parameter,
    pub value: f64,
    pub threshold: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub verdict: Verdict,
    pub decided_by: Option<Condition>,
    pub ledger_length: usize,
    pub nonnegative_derivatives: bool,
    pub contraction: ContractionReport,
    /// Smallest `ℓ` whose Weyl sums do not vanish.
    pub first_weyl_failure: Option<u32>,
    pub evidence: Vec<Evidence>,
    pub theorem_citations: Vec<String>,
}

impl CriterionReport {
    pub fn evidence_for(&self, condition: Condition) -> impl Iterator<Item = &Evidence> {
        self.evidence.iter().filter(move |e| e.condition == condition)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CriterionParams {
    /// Largest `ℓ` examined.
    pub ell_max: u32,
    /// `ε` grid for the tail products.
    pub tail_epsilons: Vec<f64>,
    /// Threshold `ε` for window products.
    pub epsilon: f64,
    /// `λ` of the density condition.
    pub lambda: f64,
    /// `c` of the density condition.
    pub c: f64,
    /// Smallest window length considered (`M0`).
    pub m0: usize,
    /// Vanishing tolerance for double sums, Cesàro sums and tail products.
    pub tolerance: f64,
    /// Vanishing tolerance for Weyl sums.
    pub weyl_tolerance: f64,
    /// A quantity persists when it stays above `persistence · tolerance`.
    pub persistence: f64,
    /// Relative growth admitted between dyadic blocks of a vanishing trend.
    pub trend_slack: f64,
    /// Largest relative decay across the blocks of a persistent trend.
    pub persistence_drift: f64,
    /// Offsets `m` for the necessary condition.
    pub necessary_offsets: Vec<usize>,
    pub contraction: ContractionParams,
}

impl Default for CriterionParams {
    fn default() -> Self {
        Self {
            ell_max: 8,
            tail_epsilons: vec![0.1, 0.5, 0.9],
            epsilon: 1e-2,
            lambda: 0.6,
            c: 0.4,
            m0: 8,
            tolerance: 1e-2,
            weyl_tolerance: 1e-3,
            persistence: 10.0,
            trend_slack: 1.25,
            persistence_drift: 0.05,
            necessary_offsets: vec![0, 1, 2],
            contraction: ContractionParams::default(),
        }
    }
}

impl CriterionParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if self.ell_max < 1 {
            return bad("ell_max", "must be at least 1".into());
        }
        for (name, x) in [("epsilon", self.epsilon), ("lambda", self.lambda), ("c", self.c)] {
            if !(x > 0.0 && x < 1.0) {
                return bad(name, format!("{x} is not in (0, 1)"));
            }
        }
        if !(self.persistence_drift >= 0.0 && self.persistence_drift < 1.0) {
            return bad("persistence_drift", format!("{} is not in [0, 1)", self.persistence_drift));
        }
        if self.tail_epsilons.is_empty() || self.tail_epsilons.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return bad("tail_epsilons", "need at least one value in (0, 1)".into());
        }
        for (name, x) in [
            ("tolerance", self.tolerance),
            ("weyl_tolerance", self.weyl_tolerance),
            ("persistence", self.persistence),
            ("trend_slack", self.trend_slack),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return bad(name, format!("{x} must be positive"));
            }
        }
        Ok(())
    }
}

fn check_n(ledger: &DerivativeLedger, n: usize) -> Result<()> {
    if n >= 1 && n <= ledger.len() {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange(format!("N = {n} for ledger of length {}", ledger.len())))
    }
}

fn check_ell(ell: u32) -> Result<()> {
    if ell >= 1 {
        Ok(())
    } else {
        Err(Error::TooSmall {
            name: "ell",
            min: 1,
            got: 0,
        })
    }
}

/// `g_k'(0)^ℓ`; exactly zero for zero derivatives.
#[inline]
fn power(ledger: &DerivativeLedger, k: usize, ell: u32) -> Complex {
    let lm = ledger.log_modulus(k);
    if lm == f64::NEG_INFINITY {
        return Complex::new(0.0, 0.0);
    }
    let arg = ledger.derivative(k).arg();
    Complex::from_polar((ell as f64 * lm).exp(), ell as f64 * arg)
}

/// Per-`n` traces of the double sum and of the sufficient-condition average.
///
/// `T_n = Σ_{m=1}^{n−1} D(m,n)^ℓ` obeys `T_1 = 0`, `T_n = g_n'(0)^ℓ (T_{n−1} + 1)`,
/// so `S_n(ℓ) = Re(Σ_{k≤n} T_k)/n²` and the sufficient average `T_n/n` both
/// come out of one O(N) pass without ever forming `P_m^{−ℓ}`.
pub struct RecurrenceTraces {
    /// `S_n(ℓ)` for `n = 1..=N` (index `n − 1`).
    pub double_sum: Vec<f64>,
    /// `T_n / n` for `n = 1..=N`.
    pub sufficient: Vec<Complex>,
}

pub fn recurrence_traces(ledger: &DerivativeLedger, ell: u32, n: usize) -> Result<RecurrenceTraces> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    let mut t = Complex::new(0.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    let mut double_sum = Vec::with_capacity(n);
    let mut sufficient = Vec::with_capacity(n);
    for k in 1..=n {
        if k >= 2 {
            t = power(ledger, k, ell) * (t + 1.0);
            total += t;
        }
        let kf = k as f64;
        double_sum.push(total.re / (kf * kf));
        sufficient.push(t / kf);
    }
    Ok(RecurrenceTraces {
        double_sum,
        sufficient,
    })
}

/// `S_N(ℓ) = Re((1/N²) Σ_{m=1}^{N−1} Σ_{n=m+1}^N D(m,n)^ℓ)` in O(N).
pub fn ergodic_double_sum(ledger: &DerivativeLedger, ell: u32, n: usize) -> Result<f64> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    let mut t = Complex::new(0.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    for k in 2..=n {
        t = power(ledger, k, ell) * (t + 1.0);
        total += t;
    }
    Ok(total.re / (n as f64 * n as f64))
}

/// `(1/N) Σ_{m=1}^{N−1} D(m,N)^ℓ`.
pub fn sufficient_sum(ledger: &DerivativeLedger, ell: u32, n: usize) -> Result<Complex> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    let mut t = Complex::new(0.0, 0.0);
    for k in 2..=n {
        t = power(ledger, k, ell) * (t + 1.0);
    }
    Ok(t / n as f64)
}

/// `|(1/n) Σ_{k=m+1}^n D(m,k)^ℓ|` for `n = 1..=N` (zero for `n ≤ m`).
pub fn necessary_trace(ledger: &DerivativeLedger, m: usize, ell: u32, n: usize) -> Result<Vec<f64>> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    if m >= n {
        return Err(Error::IndexOutOfRange(format!("offset m = {m} must be below N = {n}")));
    }
    let mut out = vec![0.0; n];
    let mut running = Complex::new(1.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    for k in m + 1..=n {
        running *= power(ledger, k, ell);
        total += running;
        out[k - 1] = total.norm() / k as f64;
    }
    Ok(out)
}

/// `(1/N) Σ_{n=m+1}^N D(m,n)^ℓ`.
pub fn necessary_sum(ledger: &DerivativeLedger, m: usize, ell: u32, n: usize) -> Result<Complex> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    if m >= n {
        return Err(Error::IndexOutOfRange(format!("offset m = {m} must be below N = {n}")));
    }
    let mut running = Complex::new(1.0, 0.0);
    let mut total = Complex::new(0.0, 0.0);
    for k in m + 1..=n {
        running *= power(ledger, k, ell);
        total += running;
    }
    Ok(total / n as f64)
}

fn tail_start(epsilon: f64, n: usize) -> usize {
    ((n as f64 * (1.0 - epsilon)).floor() as usize).max(1)
}

fn tail_modulus(ledger: &DerivativeLedger, epsilon: f64, n: usize) -> f64 {
    let start = tail_start(epsilon, n);
    ledger.window_log_modulus(start - 1, n).exp()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "epsilon",
            reason: format!("{epsilon} is not in (0, 1)"),
        })
    }
}

/// `∏_{k=⌊N(1−ε)⌋}^N g_k'(0)` for ledgers whose derivatives are all real and
/// non-negative (index 0 of the product is clamped to 1).
pub fn tail_product(ledger: &DerivativeLedger, epsilon: f64, n: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_n(ledger, n)?;
    if !ledger.is_nonnegative() {
        return Err(Error::HypothesisNotMet {
            criterion: "tail product",
            reason: "requires g_n'(0) ≥ 0 for every n".into(),
        });
    }
    Ok(tail_modulus(ledger, epsilon, n))
}

/// `|∏_{k=N−M}^N g_k'(0)|` for `0 < M < N`.
pub fn window_product(ledger: &DerivativeLedger, window: usize, n: usize) -> Result<f64> {
    check_n(ledger, n)?;
    if window == 0 || window >= n {
        return Err(Error::IndexOutOfRange(format!("window M = {window} must satisfy 0 < M < N = {n}")));
    }
    ledger.window_modulus(n - window - 1, n)
}

/// `sup_{M < N' ≤ N} |∏_{k=N'−M}^{N'} g_k'(0)|`.
pub fn window_product_sup(ledger: &DerivativeLedger, window: usize, n: usize) -> Result<f64> {
    window_product(ledger, window, n)?;
    let log_sup = (window + 1..=n)
        .map(|end| ledger.window_log_modulus(end - window - 1, end))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(log_sup.exp())
}

fn weyl_guard(ledger: &DerivativeLedger, n: usize) -> Result<()> {
    match ledger.first_zero() {
        Some(k) if k <= n => Err(Error::HypothesisNotMet {
            criterion: "Weyl sum",
            reason: format!("g_{k}'(0) = 0, so arg G_n'(0) is undefined from n = {k} on"),
        }),
        _ => Ok(()),
    }
}

/// `|(1/n) Σ_{k≤n} e^{iℓ·arg P_k}|` for `n = 1..=N`.
pub fn weyl_trace(ledger: &DerivativeLedger, ell: u32, n: usize) -> Result<Vec<f64>> {
    check_ell(ell)?;
    check_n(ledger, n)?;
    weyl_guard(ledger, n)?;
    let mut total = Complex::new(0.0, 0.0);
    Ok((1..=n)
        .map(|k| {
            let phase = (ell as f64 * ledger.argument_prefix(k)).rem_euclid(std::f64::consts::TAU);
            total += Complex::from_polar(1.0, phase);
            total.norm() / k as f64
        })
        .collect())
}

/// `|(1/N) Σ_{n=1}^N e^{iℓ·arg G_n'(0)}|`.
pub fn weyl_sum(ledger: &DerivativeLedger, ell: u32, n: usize) -> Result<f64> {
    Ok(*weyl_trace(ledger, ell, n)?.last().unwrap())
}

/// `#{k ∈ [a, b] : |g_k'(0)| ≤ λ}`.
pub fn density_count(ledger: &DerivativeLedger, lambda: f64, a: usize, b: usize) -> Result<usize> {
    if a < 1 || a >= b || b > ledger.len() {
        return Err(Error::IndexOutOfRange(format!(
            "range [{a}, {b}] for ledger of length {}",
            ledger.len()
        )));
    }
    Ok((a..=b).filter(|&k| below(ledger, k, lambda)).count())
}

#[inline]
fn below(ledger: &DerivativeLedger, k: usize, lambda: f64) -> bool {
    ledger.log_modulus(k).exp() <= lambda
}

/// Result of checking the density hypothesis on every window of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCheck {
    pub holds: bool,
    /// Smallest `count/(b−a)` seen.
    pub worst_ratio: f64,
    pub worst_window: (usize, usize),
}

/// Checks `#{n ∈ [a,b] : |g_n'(0)| ≤ λ} ≥ c(b − a)` for all windows with
/// `b − a` in the geometric grid `{2^j > M0, ≤ N/2}`.
pub fn density_hypothesis(ledger: &DerivativeLedger, lambda: f64, c: f64, m0: usize) -> Result<DensityCheck> {
    let n = ledger.len();
    let mut prefix = vec![0usize; n + 1];
    for k in 1..=n {
        prefix[k] = prefix[k - 1] + usize::from(below(ledger, k, lambda));
    }
    let mut worst = (f64::INFINITY, (0, 0));
    let mut length = 1usize;
    while length <= m0 {
        length *= 2;
    }
    if length > n / 2 {
        return Err(Error::TooSmall {
            name: "ledger length",
            min: 2 * length,
            got: n,
        });
    }
    while length <= n / 2 {
        for a in 1..=n - length {
            let b = a + length;
            let ratio = (prefix[b] - prefix[a - 1]) as f64 / length as f64;
            if ratio < worst.0 {
                worst = (ratio, (a, b));
            }
        }
        length *= 2;
    }
    Ok(DensityCheck {
        holds: worst.0 >= c,
        worst_ratio: worst.0,
        worst_window: worst.1,
    })
}

/// Finite-N verdict on a limit statement "q(n) → 0".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Vanishing,
    Persistent,
    Inconclusive,
}

impl Trend {
    fn outcome(self) -> Outcome {
        match self {
            Trend::Vanishing => Outcome::Pass,
            Trend::Persistent => Outcome::Fail,
            Trend::Inconclusive => Outcome::Inconclusive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    /// Largest `|q|` on `(N/8, N/4]`, `(N/4, N/2]`, `(N/2, N]`.
    pub envelopes: [f64; 3],
    /// Smallest `|q|` on `(N/2, N]`.
    pub floor: f64,
    pub trend: Trend,
}

/// Shape constants of the trend test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendParams {
    pub persistence: f64,
    pub slack: f64,
    pub drift: f64,
}

impl CriterionParams {
    pub fn trend(&self) -> TrendParams {
        TrendParams {
            persistence: self.persistence,
            slack: self.trend_slack,
            drift: self.persistence_drift,
        }
    }
}

/// Vanishing: envelopes non-increasing (up to `slack`) with the last one
/// below `tol`. Persistent: the final block stays at or above
/// `persistence · tol` and the last envelope is at least `(1 − drift)` times
/// the first. Anything else is inconclusive.
pub fn judge(envelopes: [f64; 3], floor: f64, tol: f64, t: &TrendParams) -> TrendSummary {
    let [e0, e1, e2] = envelopes;
    let trend = if e2 < tol && e2 <= t.slack * e1 && e1 <= t.slack * e0 {
        Trend::Vanishing
    } else if floor >= t.persistence * tol && e2 >= (1.0 - t.drift) * e0 {
        Trend::Persistent
    } else {
        Trend::Inconclusive
    };
    TrendSummary {
        envelopes,
        floor,
        trend,
    }
}

/// Dyadic-block trend of a trace indexed by `n = 1..=N`.
pub fn dyadic_trend(trace: &[f64], tol: f64, t: &TrendParams) -> TrendSummary {
    let n = trace.len();
    let block = |lo: usize, hi: usize| &trace[lo..hi.max(lo + 1).min(n)];
    let max = |s: &[f64]| s.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let blocks = [block(n / 8, n / 4), block(n / 4, n / 2), block(n / 2, n)];
    let envelopes = [max(blocks[0]), max(blocks[1]), max(blocks[2])];
    let floor = blocks[2].iter().fold(f64::INFINITY, |a, b| a.min(b.abs()));
    judge(envelopes, floor, tol, t)
}

fn aggregate(outcomes: impl IntoIterator<Item = Outcome>) -> Outcome {
    let mut all_pass = true;
    let mut any = false;
    let mut failed = false;
    for o in outcomes {
        any = true;
        match o {
            Outcome::Fail => failed = true,
            Outcome::Pass => {}
            _ => all_pass = false,
        }
    }
    if failed {
        Outcome::Fail
    } else if any && all_pass {
        Outcome::Pass
    } else {
        Outcome::Inconclusive
    }
}

/// Window-product check over the grid `M ∈ {8, 16, …, N/2}`. Passes when
/// every grid window from some `M* ≤ N/8` on stays below `ε`; fails when even
/// the `N/2` window stays above `persistence · ε`.
fn window_evidence(ledger: &DerivativeLedger, p: &CriterionParams, evidence: &mut Vec<Evidence>) -> Outcome {
    let n = ledger.len();
    let mut grid = Vec::new();
    let mut m = 8usize.max(p.m0);
    while m <= n / 2 {
        grid.push(m);
        m *= 2;
    }
    if grid.is_empty() {
        return Outcome::Inconclusive;
    }
    let sups: Vec<f64> = grid.iter().map(|&m| window_product_sup(ledger, m, n).unwrap()).collect();
    for (&m, &s) in grid.iter().zip(&sups) {
        evidence.push(Evidence {
            condition: Condition::WindowProduct,
            parameter: Parameter::Window(m),
            value: s,
            threshold: p.epsilon,
            outcome: if s < p.epsilon { Outcome::Pass } else { Outcome::Inconclusive },
        });
    }
    let mut first_pass_from = None;
    for i in (0..grid.len()).rev() {
        if sups[i] < p.epsilon {
            first_pass_from = Some(grid[i]);
        } else {
            break;
        }
    }
    match first_pass_from {
        Some(m_star) if m_star <= n / 8 => Outcome::Pass,
        _ if *sups.last().unwrap() >= p.persistence * p.epsilon => {
            if let Some(last) = evidence.last_mut() {
                last.outcome = Outcome::Fail;
            }
            Outcome::Fail
        }
        _ => Outcome::Inconclusive,
    }
}

fn push_trend(evidence: &mut Vec<Evidence>, condition: Condition, parameter: Parameter, summary: TrendSummary, tol: f64) -> Outcome {
    let outcome = summary.trend.outcome();
    evidence.push(Evidence {
        condition,
        parameter,
        value: summary.envelopes[2],
        threshold: tol,
        outcome,
    });
    outcome
}

/// Runs every criterion on the ledger and synthesizes a verdict.
///
/// Order of decision: sufficient mixing conditions (window products, density),
/// tail products (an equivalence for non-negative derivatives, sufficient
/// otherwise), Weyl sums for non-contracting sequences, the sufficient and
/// necessary Cesàro conditions, and finally the double-sum characterization.
/// The first decisive branch sets the verdict; all evidence is always
/// recorded.
pub fn classify(ledger: &DerivativeLedger, p: &CriterionParams) -> Result<CriterionReport> {
    p.validate()?;
    let n = ledger.len();
    if n < 100 {
        return Err(Error::TooSmall {
            name: "ledger length",
            min: 100,
            got: n,
        });
    }
    let contraction = contracting_heuristic(ledger, &p.contraction)?;
    let mut evidence = vec![Evidence {
        condition: Condition::Contraction,
        parameter: Parameter::None,
        value: contraction.tail_increment,
        threshold: p.contraction.series_tolerance,
        outcome: match contraction.verdict {
            Contraction::Contracting => Outcome::Pass,
            Contraction::NotContracting => Outcome::Fail,
            Contraction::Undecided => Outcome::Inconclusive,
        },
    }];

    let window = window_evidence(ledger, p, &mut evidence);

    let density = match density_hypothesis(ledger, p.lambda, p.c, p.m0) {
        Ok(check) => {
            let outcome = if check.holds { Outcome::Pass } else { Outcome::Inconclusive };
            evidence.push(Evidence {
                condition: Condition::Density,
                parameter: Parameter::None,
                value: check.worst_ratio,
                threshold: p.c,
                outcome,
            });
            outcome
        }
        Err(_) => Outcome::NotApplicable,
    };

    let tails = aggregate(p.tail_epsilons.iter().map(|&eps| {
        let values = [n / 4, n / 2, n].map(|k| tail_modulus(ledger, eps, k));
        let summary = judge(values, values[2], p.tolerance, &p.trend());
        push_trend(&mut evidence, Condition::TailProduct, Parameter::Epsilon(eps), summary, p.tolerance)
    }));

    let mut first_weyl_failure = None;
    let weyl = if ledger.first_zero().is_some() {
        evidence.push(Evidence {
            condition: Condition::Weyl,
            parameter: Parameter::None,
            value: f64::NAN,
            threshold: p.weyl_tolerance,
            outcome: Outcome::NotApplicable,
        });
        Outcome::NotApplicable
    } else {
        aggregate((1..=p.ell_max).map(|ell| {
            let trace = weyl_trace(ledger, ell, n).expect("no zero derivatives");
            let summary = dyadic_trend(&trace, p.weyl_tolerance, &p.trend());
            let o = push_trend(&mut evidence, Condition::Weyl, Parameter::Ell(ell), summary, p.weyl_tolerance);
            if o == Outcome::Fail && first_weyl_failure.is_none() {
                first_weyl_failure = Some(ell);
            }
            o
        }))
    };

    let mut sufficient_outcomes = Vec::new();
    let mut double_outcomes = Vec::new();
    for ell in 1..=p.ell_max {
        let traces = recurrence_traces(ledger, ell, n)?;
        let suff: Vec<f64> = traces.sufficient.iter().map(|c| c.norm()).collect();
        let summary = dyadic_trend(&suff, p.tolerance, &p.trend());
        sufficient_outcomes.push(push_trend(&mut evidence, Condition::Sufficient, Parameter::Ell(ell), summary, p.tolerance));
        let summary = dyadic_trend(&traces.double_sum, p.tolerance, &p.trend());
        double_outcomes.push(push_trend(&mut evidence, Condition::DoubleSum, Parameter::Ell(ell), summary, p.tolerance));
    }
    let sufficient = aggregate(sufficient_outcomes);
    let double = aggregate(double_outcomes);

    let mut necessary_outcomes = Vec::new();
    for &m in p.necessary_offsets.iter().filter(|&&m| m < n / 8) {
        for ell in 1..=p.ell_max {
            let trace = necessary_trace(ledger, m, ell, n)?;
            let summary = dyadic_trend(&trace, p.tolerance, &p.trend());
            necessary_outcomes.push(push_trend(
                &mut evidence,
                Condition::Necessary,
                Parameter::OffsetEll { m, ell },
                summary,
                p.tolerance,
            ));
        }
    }
    let necessary = aggregate(necessary_outcomes);

    let nonnegative = ledger.is_nonnegative();
    let not_contracting = contraction.verdict == Contraction::NotContracting;
    let decision: Option<(Verdict, Condition)> = if window == Outcome::Pass {
        Some((Verdict::Mixing, Condition::WindowProduct))
    } else if density == Outcome::Pass {
        Some((Verdict::Mixing, Condition::Density))
    } else if tails == Outcome::Pass {
        Some((Verdict::Ergodic, Condition::TailProduct))
    } else if nonnegative && tails == Outcome::Fail {
        Some((Verdict::NotErgodic, Condition::TailProduct))
    } else if not_contracting && weyl == Outcome::Pass {
        Some((Verdict::Ergodic, Condition::Weyl))
    } else if not_contracting && weyl == Outcome::Fail {
        Some((Verdict::NotErgodic, Condition::Weyl))
    } else if sufficient == Outcome::Pass {
        Some((Verdict::Ergodic, Condition::Sufficient))
    } else if necessary == Outcome::Fail {
        Some((Verdict::NotErgodic, Condition::Necessary))
    } else if double == Outcome::Pass {
        Some((Verdict::Ergodic, Condition::DoubleSum))
    } else if double == Outcome::Fail {
        Some((Verdict::NotErgodic, Condition::DoubleSum))
    } else {
        None
    };

    let (verdict, decided_by) = match decision {
        Some((v, c)) => (v, Some(c)),
        None => (Verdict::Undecided, None),
    };
    let mut theorem_citations = vec![cite::CONTRACTION.to_string()];
    if let Some(c) = decided_by {
        theorem_citations.push(c.citation().to_string());
    }
    if contraction.verdict == Contraction::Contracting && verdict == Verdict::NotErgodic {
        theorem_citations.push(cite::MIXING_SUBSEQUENCE.to_string());
    }
    Ok(CriterionReport {
        verdict,
        decided_by,
        ledger_length: n,
        nonnegative_derivatives: nonnegative,
        contraction,
        first_weyl_failure,
        evidence,
        theorem_citations,
    })
}
