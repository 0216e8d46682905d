//! The derivative ledger: prefix products `P_n = G_n'(0) = ∏_{k≤n} g_k'(0)`
//! kept in log-modulus / unwrapped-argument form.
//!
//! Every window derivative `(G_m^n)'(0) = P_n / P_m` is read off two prefix
//! entries. Zero derivatives are tracked as barriers instead of `-∞`
//! arithmetic: a window is exactly zero iff a barrier lies in `(m, n]`.

use std::f64::consts::TAU;

use num_complex::Complex64 as Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::family::InnerSequence;
use crate::sum::CompensatedSum;

#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeLedger {
    /// `ln|g_k'(0)|` for `k = 1..=N` (index `k − 1`), `-∞` for zeros.
    log_moduli: Vec<f64>,
    /// `arg g_k'(0)`, not reduced.
    arguments: Vec<f64>,
    /// Running sums over non-zero factors; entry `n` covers `k ≤ n`.
    log_prefix: Vec<CompensatedSum>,
    arg_prefix: Vec<CompensatedSum>,
    /// Most recent zero at or before `n` (0 when there is none).
    last_zero: Vec<usize>,
    nonnegative: bool,
}

impl DerivativeLedger {
    /// Ledger of the first `n` maps of `seq`.
    pub fn build(seq: &InnerSequence, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooSmall {
                name: "ledger length",
                min: 1,
                got: 0,
            });
        }
        let polar = (1..=n).map(|k| {
            let map = seq.map(k);
            let (lm, arg) = map.derivative_polar();
            let d = map.derivative_at_origin();
            (lm, arg, d.im == 0.0 && d.re >= 0.0)
        });
        Ok(Self::from_parts(polar))
    }

    /// Ledger from explicit derivative values.
    pub fn from_derivatives(derivatives: &[Complex]) -> Result<Self> {
        if derivatives.is_empty() {
            return Err(Error::TooSmall {
                name: "ledger length",
                min: 1,
                got: 0,
            });
        }
        for d in derivatives {
            crate::disk::check_finite(*d)?;
            if d.norm() > 1.0 + crate::disk::DISK_TOLERANCE {
                return Err(Error::InvalidParameter {
                    name: "derivative",
                    reason: format!("|g'(0)| = {} exceeds 1", d.norm()),
                });
            }
        }
        Ok(Self::from_parts(derivatives.iter().map(|d| {
            let lm = if *d == Complex::new(0.0, 0.0) {
                f64::NEG_INFINITY
            } else {
                d.norm().ln()
            };
            (lm, d.arg(), d.im == 0.0 && d.re >= 0.0)
        })))
    }

    fn from_parts(parts: impl Iterator<Item = (f64, f64, bool)>) -> Self {
        let mut ledger = Self {
            log_moduli: Vec::new(),
            arguments: Vec::new(),
            log_prefix: vec![CompensatedSum::default()],
            arg_prefix: vec![CompensatedSum::default()],
            last_zero: vec![0],
            nonnegative: true,
        };
        for (lm, arg, nonneg) in parts {
            let k = ledger.log_moduli.len() + 1;
            let mut log_acc = *ledger.log_prefix.last().unwrap();
            let mut arg_acc = *ledger.arg_prefix.last().unwrap();
            let mut zero = *ledger.last_zero.last().unwrap();
            if lm == f64::NEG_INFINITY {
                zero = k;
            } else {
                log_acc.add(lm);
                arg_acc.add(arg);
            }
            ledger.log_moduli.push(lm);
            ledger.arguments.push(arg);
            ledger.log_prefix.push(log_acc);
            ledger.arg_prefix.push(arg_acc);
            ledger.last_zero.push(zero);
            ledger.nonnegative &= nonneg;
        }
        ledger
    }

    /// Ledger of the block subsequence `h_j = g_{sj} ∘ ⋯ ∘ g_{s(j−1)+1}`,
    /// whose compositions are `G_s, G_{2s}, ...`.
    pub fn subsequence(&self, stride: usize) -> Result<Self> {
        if stride == 0 || self.len() < stride {
            return Err(Error::IndexOutOfRange(format!(
                "stride {stride} for ledger of length {}",
                self.len()
            )));
        }
        let blocks = self.len() / stride;
        Ok(Self::from_parts((1..=blocks).map(|j| {
            let (m, n) = (stride * (j - 1), stride * j);
            let lm = self.window_log_modulus(m, n);
            let arg = self.window_argument(m, n);
            (lm, arg, lm == f64::NEG_INFINITY || arg.rem_euclid(TAU) == 0.0)
        })))
    }

    pub fn len(&self) -> usize {
        self.log_moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_moduli.is_empty()
    }

    /// True when every `g_k'(0)` is real and non-negative.
    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    /// First index `k` with `g_k'(0) = 0`.
    pub fn first_zero(&self) -> Option<usize> {
        self.log_moduli
            .iter()
            .position(|lm| *lm == f64::NEG_INFINITY)
            .map(|i| i + 1)
    }

    /// Whether some `g_k'(0) = 0` with `m < k ≤ n`.
    pub fn has_zero_in(&self, m: usize, n: usize) -> bool {
        self.last_zero[n] > m
    }

    /// `g_k'(0)`, `1 ≤ k ≤ N`.
    pub fn derivative(&self, k: usize) -> Complex {
        let lm = self.log_moduli[k - 1];
        if lm == f64::NEG_INFINITY {
            Complex::new(0.0, 0.0)
        } else {
            Complex::from_polar(lm.exp(), self.arguments[k - 1])
        }
    }

    /// `ln|g_k'(0)|`.
    pub fn log_modulus(&self, k: usize) -> f64 {
        self.log_moduli[k - 1]
    }

    /// `ln|P_n|`, `-∞` from the first zero on.
    pub fn log_modulus_prefix(&self, n: usize) -> f64 {
        if self.last_zero[n] > 0 {
            f64::NEG_INFINITY
        } else {
            self.log_prefix[n].value()
        }
    }

    /// Unwrapped `arg P_n` (sum over the non-zero factors).
    pub fn argument_prefix(&self, n: usize) -> f64 {
        self.arg_prefix[n].value()
    }

    fn check_window(&self, m: usize, n: usize) -> Result<()> {
        if m < n && n <= self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange(format!(
                "window (m, n] = ({m}, {n}] for ledger of length {}",
                self.len()
            )))
        }
    }

    /// `ln|(G_m^n)'(0)|` without range checks.
    #[inline]
    pub(crate) fn window_log_modulus(&self, m: usize, n: usize) -> f64 {
        if self.has_zero_in(m, n) {
            f64::NEG_INFINITY
        } else {
            self.log_prefix[n].difference(&self.log_prefix[m])
        }
    }

    #[inline]
    pub(crate) fn window_argument(&self, m: usize, n: usize) -> f64 {
        self.arg_prefix[n].difference(&self.arg_prefix[m])
    }

    /// `(G_m^n)'(0) = P_n / P_m` for `0 ≤ m < n ≤ N`.
    pub fn window_derivative(&self, m: usize, n: usize) -> Result<Complex> {
        self.check_window(m, n)?;
        let lm = self.window_log_modulus(m, n);
        if lm == f64::NEG_INFINITY {
            return Ok(Complex::new(0.0, 0.0));
        }
        Ok(Complex::from_polar(lm.exp(), self.window_argument(m, n).rem_euclid(TAU)))
    }

    /// `|∏_{k=m+1}^n g_k'(0)|`.
    pub fn window_modulus(&self, m: usize, n: usize) -> Result<f64> {
        self.check_window(m, n)?;
        Ok(self.window_log_modulus(m, n).exp())
    }

    /// `s_n = Σ_{k≤n} (1 − |g_k'(0)|)` for `n = 0..=N`.
    pub fn defect_partial_sums(&self) -> Vec<f64> {
        let mut acc = CompensatedSum::default();
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(0.0);
        for lm in &self.log_moduli {
            // 1 − e^{lm} without cancellation
            acc.add(-lm.exp_m1());
            out.push(acc.value());
        }
        out
    }
}

/// Outcome of the finite-data contraction test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contraction {
    Contracting,
    NotContracting,
    Undecided,
}

/// Partial sums `s_n` at the dyadic checkpoints `N/4, N/2, N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub verdict: Contraction,
    pub checkpoints: Vec<usize>,
    pub partial_sums: Vec<f64>,
    pub log_modulus_final: f64,
    pub tail_increment: f64,
}

/// Thresholds for [`contracting_heuristic`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionParams {
    /// `|P_N|` below this counts as contracted.
    pub modulus_tolerance: f64,
    /// Increments of `s_n` over `(N/2, N]` below this count as converged.
    pub series_tolerance: f64,
}

impl Default for ContractionParams {
    fn default() -> Self {
        Self {
            modulus_tolerance: 1e-3,
            series_tolerance: 1e-6,
        }
    }
}

/// Divergence of `Σ(1 − |g_n'(0)|)` judged from finitely many terms.
///
/// * `NotContracting` when the last dyadic increment of the partial sums is
///   below `series_tolerance`.
/// * `Contracting` when `|P_N| < modulus_tolerance` and the increments are not
///   decaying (the last one is at least a quarter of the previous one).
/// * `Undecided` otherwise.
pub fn contracting_heuristic(ledger: &DerivativeLedger, params: &ContractionParams) -> Result<ContractionReport> {
    let n = ledger.len();
    if n < 10 {
        return Err(Error::TooSmall {
            name: "ledger length",
            min: 10,
            got: n,
        });
    }
    let sums = ledger.defect_partial_sums();
    let checkpoints = vec![n / 4, n / 2, n];
    let partial: Vec<f64> = checkpoints.iter().map(|&k| sums[k]).collect();
    let last = partial[2] - partial[1];
    let previous = partial[1] - partial[0];
    let log_final = ledger.log_modulus_prefix(n);
    let verdict = if last < params.series_tolerance {
        Contraction::NotContracting
    } else if log_final < params.modulus_tolerance.ln() && last >= 0.25 * previous {
        Contraction::Contracting
    } else {
        Contraction::Undecided
    };
    Ok(ContractionReport {
        verdict,
        checkpoints,
        partial_sums: partial,
        log_modulus_final: log_final,
        tail_increment: last,
    })
}
