//! The experiment runners behind each subcommand.
//!
//! Each runner computes a [`Run`] (manifest, table, plots) and writes it to
//! the configured output directory. Manifests contain no timing or host
//! information, so an identical configuration reproduces them byte for byte;
//! wall-clock time goes to a separate `timing.json`.

use std::time::Instant;

use anyhow::Result;
use inner_circle::boundary::{
    composition_degree, ergodic_average_norms, fourier_inner_product, ks_pushed, lowner_bound, lowner_check,
    lowner_triple, mixing_correlations, recurrence_experiment, DEGREE_CAP, KS_CRITICAL_001,
};
use inner_circle::catalog::{self, CatalogEntry};
use inner_circle::criteria::{classify, ergodic_double_sum, recurrence_traces, weyl_trace, CriterionReport, Verdict};
use inner_circle::rng::mix64;
use inner_circle::{DerivativeLedger, FamilySpec, InnerSequence};
use serde::{Deserialize, Serialize};

use crate::config::{BoundaryExperiment, ExperimentConfig, Format};
use crate::output::{to_csv, to_json, write_atomic, Row};
use crate::plot::{Plot, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Classify,
    Boundary,
    Verify,
}

impl Command {
    fn table_name(self) -> &'static str {
        match self {
            Command::Classify => "series",
            Command::Boundary => "boundary",
            Command::Verify => "verify",
        }
    }
}

/// A pass/fail comparison of `value` against `threshold` (pass when
/// `value ≤ threshold`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= threshold,
            value,
            threshold,
        }
    }
}

/// Return statistics without the per-point visit counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceStats {
    pub horizon: usize,
    pub at_least: Vec<f64>,
    pub mean_visit_fraction: f64,
    pub median_visit_fraction: f64,
    pub covering_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub library_version: String,
    pub config: ExperimentConfig,
    pub family: FamilySpec,
    pub verdict: Option<Verdict>,
    pub report: Option<CriterionReport>,
    pub checks: Vec<Check>,
    pub recurrence: Option<RecurrenceStats>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        text
    }
}

/// Everything a runner produces before it is written out.
pub struct Run {
    pub manifest: RunManifest,
    pub rows: Vec<Row>,
    pub plots: Vec<(String, Plot)>,
}

impl Run {
    fn new(command: Command, config: &ExperimentConfig) -> Result<Self> {
        Ok(Self {
            manifest: RunManifest {
                command,
                library_version: inner_circle::VERSION.to_string(),
                config: config.clone(),
                family: config.family.resolve()?,
                verdict: None,
                report: None,
                checks: Vec::new(),
                recurrence: None,
                outputs: Vec::new(),
            },
            rows: Vec::new(),
            plots: Vec::new(),
        })
    }

    /// Writes the table, the plots (when enabled), the manifest and the
    /// timing sidecar into the configured directory.
    fn write(mut self, seconds: f64) -> Result<RunManifest> {
        let output = &self.manifest.config.output;
        let dir = output.dir.clone();
        let name = self.manifest.command.table_name();
        let (file, text) = match output.format {
            Format::Csv => (format!("{name}.csv"), to_csv(&self.rows)),
            Format::Json => (format!("{name}.json"), to_json(&self.rows)),
        };
        write_atomic(&dir.join(&file), text.as_bytes())?;
        self.manifest.outputs.push(file);
        if output.plots {
            for (file, plot) in &self.plots {
                write_atomic(&dir.join(file), plot.to_svg().as_bytes())?;
                self.manifest.outputs.push(file.clone());
            }
        }
        self.manifest.outputs.push("manifest.json".into());
        write_atomic(&dir.join("manifest.json"), self.manifest.to_json().as_bytes())?;
        let timing = serde_json::json!({ "command": self.manifest.command, "wall_clock_seconds": seconds });
        write_atomic(&dir.join("timing.json"), format!("{timing:#}\n").as_bytes())?;
        Ok(self.manifest)
    }
}

fn timed(config: &ExperimentConfig, compute: fn(&ExperimentConfig) -> Result<Run>) -> Result<RunManifest> {
    config.validate()?;
    let start = Instant::now();
    let run = compute(config)?;
    run.write(start.elapsed().as_secs_f64())
}

/// About `points` log-spaced integers in `[min(10, n), n]`, always ending at `n`.
fn log_grid(n: usize, points: usize) -> Vec<usize> {
    let lo = n.min(10) as f64;
    let ratio = (n as f64 / lo).ln();
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (lo * (ratio * i as f64 / (points - 1) as f64).exp()).round() as usize)
        .map(|k| k.clamp(1, n))
        .collect();
    grid.push(n);
    grid.dedup();
    grid
}

/// Classifies the family and tabulates `S_N(ℓ)`, the sufficient-condition
/// averages and the Weyl sums along a log-spaced grid of `N`.
pub fn classify_run(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(Command::Classify, config)?;
    let c = &config.classify;
    let ledger = DerivativeLedger::build(&InnerSequence::new(run.manifest.family.clone())?, c.n)?;
    let report = classify(&ledger, &c.params)?;
    let grid = log_grid(c.n, c.series_points);
    let mut sums = Vec::new();
    let mut weyls = Vec::new();
    for ell in 1..=c.params.ell_max {
        let traces = recurrence_traces(&ledger, ell, c.n)?;
        let weyl = weyl_trace(&ledger, ell, c.n).ok();
        for &n in &grid {
            run.rows.push(Row::exact(n, format!("double_sum_l{ell}"), traces.double_sum[n - 1]));
            run.rows.push(Row::exact(n, format!("sufficient_l{ell}"), traces.sufficient[n - 1].norm()));
            if let Some(w) = &weyl {
                run.rows.push(Row::exact(n, format!("weyl_l{ell}"), w[n - 1]));
            }
        }
        let series = |label: &str, values: &dyn Fn(usize) -> f64| Series {
            label: format!("{label}, ℓ = {ell}"),
            points: grid.iter().map(|&n| (n as f64, values(n))).collect(),
        };
        sums.push(series("S_N", &|n| traces.double_sum[n - 1]));
        if let Some(w) = &weyl {
            weyls.push(series("|Weyl|", &|n| w[n - 1]));
        }
    }
    let name = config.family_label();
    run.plots.push((
        "double_sum.svg".into(),
        Plot {
            title: format!("S_N(ℓ) for {name}"),
            x_label: "N".into(),
            y_label: "S_N(ℓ)".into(),
            log_x: true,
            series: sums,
        },
    ));
    if !weyls.is_empty() {
        run.plots.push((
            "weyl.svg".into(),
            Plot {
                title: format!("Weyl sums of arg G_N'(0) for {name}"),
                x_label: "N".into(),
                y_label: "|average|".into(),
                log_x: true,
                series: weyls,
            },
        ));
    }
    run.manifest.verdict = Some(report.verdict);
    run.manifest.report = Some(report);
    Ok(run)
}

/// Runs the configured boundary experiments.
pub fn boundary_run(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(Command::Boundary, config)?;
    let b = &config.boundary;
    let seq = InnerSequence::new(run.manifest.family.clone())?;
    let s = b.samples;
    let root_s = (s as f64).sqrt();
    for experiment in &b.experiments {
        match experiment {
            BoundaryExperiment::Ks => {
                let stats = ks_pushed(&seq, b.ks_steps, s, config.seed)?;
                for (k, &d) in stats.iter().enumerate() {
                    run.rows.push(Row::exact(k + 1, "ks_statistic", d));
                }
                let worst = stats.iter().copied().fold(0.0, f64::max);
                run.manifest.checks.push(Check::at_most("ks_uniformity", worst, KS_CRITICAL_001 / root_s));
            }
            BoundaryExperiment::Norms => {
                let n_max = *b.checkpoints.iter().max().expect("validated non-empty");
                let ledger = DerivativeLedger::build(&seq, n_max)?;
                let norms = ergodic_average_norms(&seq, &b.ells, &b.checkpoints, s, config.seed)?;
                let mut worst: f64 = 0.0;
                for (e, &ell) in b.ells.iter().enumerate() {
                    for (c, &n) in b.checkpoints.iter().enumerate() {
                        let est = norms[e][c];
                        let predicted = 1.0 / n as f64 + 2.0 * ergodic_double_sum(&ledger, ell, n)?;
                        run.rows.push(Row::estimate(n, format!("norm_l{ell}"), est.value, est.mc_error));
                        run.rows.push(Row::exact(n, format!("norm_predicted_l{ell}"), predicted));
                        worst = worst.max((est.value - predicted).abs());
                    }
                }
                run.manifest.checks.push(Check::at_most("norm_identity", worst, 5.0 / root_s));
            }
            BoundaryExperiment::Mixing => {
                let estimates = mixing_correlations(&seq, &b.arc_a, &b.arc_b, &b.mixing_times, s, config.seed)?;
                for e in &estimates {
                    run.rows.push(Row::estimate(e.n, "mixing_correlation", e.value, e.mc_error));
                    run.rows.push(Row::exact(e.n, "mixing_target", e.target));
                }
                run.plots.push((
                    "mixing.svg".into(),
                    Plot {
                        title: format!("m(A ∩ G_n⁻¹B) for {}", config.family_label()),
                        x_label: "n".into(),
                        y_label: "correlation".into(),
                        log_x: true,
                        series: vec![
                            Series {
                                label: "estimate".into(),
                                points: estimates.iter().map(|e| (e.n as f64, e.value)).collect(),
                            },
                            Series {
                                label: "m(A)m(B)".into(),
                                points: estimates.iter().map(|e| (e.n as f64, e.target)).collect(),
                            },
                        ],
                    },
                ));
            }
            BoundaryExperiment::Recurrence => {
                let r = recurrence_experiment(&seq, &b.recurrence_arc, b.recurrence_horizon, s, config.seed, b.max_returns)?;
                for (k, &f) in r.at_least.iter().enumerate() {
                    run.rows.push(Row::exact(k + 1, "at_least_returns", f));
                }
                run.manifest.recurrence = Some(RecurrenceStats {
                    horizon: r.horizon,
                    at_least: r.at_least,
                    mean_visit_fraction: r.mean_visit_fraction,
                    median_visit_fraction: r.median_visit_fraction,
                    covering_fraction: r.covering_fraction,
                });
            }
        }
    }
    Ok(run)
}

/// Cross-checks the boundary simulations against the derivative calculus:
/// Fourier coefficients, ergodic-average norms and the Löwner pull-back.
pub fn verify_run(config: &ExperimentConfig) -> Result<Run> {
    let mut run = Run::new(Command::Verify, config)?;
    let v = &config.verify;
    let seq = InnerSequence::new(run.manifest.family.clone())?;

    let ledger = DerivativeLedger::build(&seq, v.fourier_n_max)?;
    let mut worst: f64 = 0.0;
    for m in 0..v.fourier_n_max {
        for n in m + 1..=v.fourier_n_max {
            for ell in 1..=v.fourier_ell_max {
                if composition_degree(&seq, m, n, ell) > DEGREE_CAP as u128 {
                    continue;
                }
                let gap = (fourier_inner_product(&seq, m, n, ell, v.fourier_nodes)?
                    - ledger.window_derivative(m, n)?.powu(ell))
                .norm();
                run.rows.push(Row::exact(n, format!("fourier_gap_m{m}_l{ell}"), gap));
                worst = worst.max(gap);
            }
        }
    }
    run.manifest.checks.push(Check::at_most("fourier_identity", worst, v.fourier_tolerance));

    let n_max = *v.norm_checkpoints.iter().max().expect("validated non-empty");
    let ledger = DerivativeLedger::build(&seq, n_max)?;
    let ells: Vec<u32> = (1..=v.norm_ell_max).collect();
    let norms = ergodic_average_norms(&seq, &ells, &v.norm_checkpoints, v.norm_samples, config.seed)?;
    let mut worst: f64 = 0.0;
    for (e, &ell) in ells.iter().enumerate() {
        for (c, &n) in v.norm_checkpoints.iter().enumerate() {
            let est = norms[e][c];
            let gap = (est.value - (1.0 / n as f64 + 2.0 * ergodic_double_sum(&ledger, ell, n)?)).abs();
            run.rows.push(Row::estimate(n, format!("norm_gap_l{ell}"), gap, est.mc_error));
            worst = worst.max(gap);
        }
    }
    let bound = v.norm_sigmas / (v.norm_samples as f64).sqrt();
    run.manifest.checks.push(Check::at_most("norm_identity", worst, bound));

    let mut worst: f64 = 0.0;
    for i in 0..v.lowner_triples as u64 {
        let t = lowner_triple(config.seed, i);
        let (direct, pulled) = lowner_check(&t.map, t.z, &t.arc, v.lowner_samples, mix64(config.seed ^ i))?;
        let bound = lowner_bound(direct, v.lowner_samples);
        run.rows.push(Row::estimate(i as usize, "lowner_gap", (direct - pulled).abs(), bound));
        worst = worst.max((direct - pulled).abs() / bound);
    }
    run.manifest.checks.push(Check::at_most("lowner_pullback", worst, 1.0));
    Ok(run)
}

pub fn run_classify(config: &ExperimentConfig) -> Result<RunManifest> {
    timed(config, classify_run)
}

pub fn run_boundary(config: &ExperimentConfig) -> Result<RunManifest> {
    timed(config, boundary_run)
}

pub fn run_verify(config: &ExperimentConfig) -> Result<RunManifest> {
    timed(config, verify_run)
}

pub fn list_families() -> Vec<CatalogEntry> {
    catalog::entries()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_increasing_and_ends_at_n() {
        for (n, p) in [(100, 48), (10_000, 48), (137, 2), (100_000, 5)] {
            let g = log_grid(n, p);
            assert_eq!(*g.last().unwrap(), n);
            assert!(g.windows(2).all(|w| w[0] < w[1]), "{g:?}");
            assert!(g.len() <= p + 1);
        }
    }

    #[test]
    fn classify_run_tabulates_every_ell() {
        let mut config = ExperimentConfig::for_family("rotation_third");
        config.classify.n = 200;
        config.classify.series_points = 4;
        let run = classify_run(&config).unwrap();
        assert_eq!(run.manifest.verdict, Some(Verdict::NotErgodic));
        let ells = config.classify.params.ell_max as usize;
        assert_eq!(run.rows.len(), 3 * ells * log_grid(200, 4).len());
        assert_eq!(run.plots.len(), 2);
    }

    #[test]
    fn zero_derivatives_skip_weyl_rows() {
        let mut config = ExperimentConfig::for_family("squaring");
        config.classify.n = 128;
        let run = classify_run(&config).unwrap();
        assert!(run.rows.iter().all(|r| !r.quantity.starts_with("weyl")));
        assert_eq!(run.plots.len(), 1);
    }

    #[test]
    fn check_threshold_is_inclusive() {
        assert!(Check::at_most("x", 1.0, 1.0).passed);
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
    }
}
