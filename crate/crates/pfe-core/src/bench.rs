//! Benchmark harness: success-probability estimation, the time-to-solution
//! figure of merit `F = −log₁₀(ε)/τ`, and method comparison between standard
//! annealing, the divide-and-conquer pipeline, and the exact oracle.
//!
//! Success probabilities use the Laplace rule of succession
//! `(successes+1)/(trials+2)`, which never returns 0 or 1, so `F` stays
//! finite. `τ` is the mean wall time per trial in microseconds, measured
//! around the complete method pipeline (partitioning, solving, merging).

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};
use crate::model::{IsingModel, SpinConfig};
use crate::pfe::{solve_pfe, PfeConfig, SaBudget, SubSolver, WindowPolicy};
use crate::problems::FactorEncoding;
use crate::rng::derive_seed;
use crate::solvers::{brute_force_ground, default_t_final, default_t_initial, simulated_anneal, AnnealParams};

/// One benchmark row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub method: String,
    pub trials: u64,
    pub successes: u64,
    pub p_bayes: f64,
    pub tau_us: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F_rel")]
    pub f_rel: f64,
    pub best_energy: f64,
    pub ground_energy: f64,
    pub seed: u64,
}

/// Laplace rule of succession: `(successes+1)/(trials+2)`, strictly inside
/// `(0, 1)`.
pub fn p_bayes(successes: u64, trials: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    if successes > trials {
        return Err(Error::Input(format!(
            "successes {successes} exceed trials {trials}"
        )));
    }
    Ok((successes as f64 + 1.0) / (trials as f64 + 2.0))
}

/// Time-to-solution figure of merit `F = −log₁₀(1−p)/τ`.
pub fn performance_metric(p: f64, tau: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Input(format!(
            "success probability must lie strictly in (0,1), got {p}"
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::Input(format!("tau must be positive, got {tau}")));
    }
    Ok(-(1.0 - p).log10() / tau)
}

/// Benchmark methods, named as on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchMethod {
    /// Standard simulated annealing on the whole model.
    Sa,
    /// The pipeline with annealed collection on both sides.
    PfeSa,
    /// The pipeline with exhaustive collection on both sides.
    PfeExhaustive,
    /// Brute-force oracle (always succeeds; gives a timing baseline).
    Exact,
}

impl BenchMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BenchMethod::Sa => "sa",
            BenchMethod::PfeSa => "pfe-sa",
            BenchMethod::PfeExhaustive => "pfe-exhaustive",
            BenchMethod::Exact => "exact",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "sa" => Ok(BenchMethod::Sa),
            "pfe-sa" => Ok(BenchMethod::PfeSa),
            "pfe-exhaustive" => Ok(BenchMethod::PfeExhaustive),
            "exact" => Ok(BenchMethod::Exact),
            other => Err(Error::Input(format!("unknown method '{other}'"))),
        }
    }
}

/// How a trial counts as successful.
#[derive(Debug, Clone)]
pub enum SuccessSpec {
    /// Best energy equals the ground energy within 1e-9.
    GroundEnergy,
    /// The best configuration decodes to a factor pair of the target.
    Factors(Box<FactorEncoding<f64>>),
}

/// A problem prepared for benchmarking: the model, its ground energy (from
/// the oracle or supplied), and the success predicate.
#[derive(Debug, Clone)]
pub struct BenchProblem {
    pub label: String,
    pub model: IsingModel<f64>,
    pub ground_energy: f64,
    pub success: SuccessSpec,
}

impl BenchProblem {
    /// Energy-match success. Without a supplied ground energy the oracle
    /// runs, which requires `n ≤ 30`.
    pub fn from_model(
        label: impl Into<String>,
        model: IsingModel<f64>,
        ground_energy: Option<f64>,
    ) -> Result<Self> {
        let ground_energy = match ground_energy {
            Some(g) => g,
            None => {
                if model.n() > 30 {
                    return Err(Error::Input(format!(
                        "no ground truth supplied and the model has {} variables; \
                         pass a known ground energy",
                        model.n()
                    )));
                }
                brute_force_ground(&model)?.1
            }
        };
        Ok(Self {
            label: label.into(),
            model,
            ground_energy,
            success: SuccessSpec::GroundEnergy,
        })
    }

    /// Factorization success: the trial's best configuration must decode to
    /// factors of the encoding target. The normalized ground energy is 0.
    pub fn factorization(encoding: FactorEncoding<f64>) -> Self {
        let model = encoding.model.to_ising();
        Self {
            label: format!("factor:{}", encoding.target),
            model,
            ground_energy: 0.0,
            success: SuccessSpec::Factors(Box::new(encoding)),
        }
    }

    fn is_success(&self, config: &SpinConfig, energy: f64) -> bool {
        match &self.success {
            SuccessSpec::GroundEnergy => (energy - self.ground_energy).abs() <= 1e-9,
            SuccessSpec::Factors(enc) => enc.is_factorization(config),
        }
    }
}

/// Annealing budget normalization for the pipeline methods.
///
/// `MatchedSamples` gives each side the full baseline budget (same sample
/// count per side as the standard run); `MatchedSweeps` splits the baseline
/// sweep count across the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetMode {
    MatchedSamples,
    MatchedSweeps,
}

impl BudgetMode {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "matched-samples" => Ok(BudgetMode::MatchedSamples),
            "matched-sweeps" => Ok(BudgetMode::MatchedSweeps),
            other => Err(Error::Input(format!("unknown budget mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub trials: u64,
    pub seed: u64,
    /// Baseline annealing budget (the standard-annealing row).
    pub sweeps: usize,
    pub restarts: usize,
    pub t_initial: Option<f64>,
    pub t_final: Option<f64>,
    pub budget_mode: BudgetMode,
    /// Force sequential trials for timing comparability.
    pub serial: bool,
    pub top_k_merge: Option<usize>,
    pub use_refined_filter: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            trials: 100,
            seed: 0,
            sweeps: 200,
            restarts: 10,
            t_initial: None,
            t_final: None,
            budget_mode: BudgetMode::MatchedSweeps,
            serial: false,
            top_k_merge: None,
            use_refined_filter: false,
        }
    }
}

fn run_trial(
    problem: &BenchProblem,
    method: BenchMethod,
    cfg: &BenchConfig,
    trial_seed: u64,
) -> Result<(bool, f64, f64)> {
    let start = Instant::now();
    let (config, energy) = match method {
        BenchMethod::Exact => brute_force_ground(&problem.model)?,
        BenchMethod::Sa => {
            let params = AnnealParams {
                t_initial: cfg
                    .t_initial
                    .unwrap_or_else(|| default_t_initial(&problem.model)),
                t_final: cfg
                    .t_final
                    .unwrap_or_else(|| default_t_final(&problem.model, None)),
                sweeps: cfg.sweeps,
                restarts: cfg.restarts,
                seed: trial_seed,
            };
            let r = simulated_anneal(&problem.model, &params)?;
            (r.best, r.best_energy)
        }
        BenchMethod::PfeSa | BenchMethod::PfeExhaustive => {
            let subsolver = match method {
                BenchMethod::PfeSa => {
                    let sweeps = match cfg.budget_mode {
                        BudgetMode::MatchedSamples => cfg.sweeps,
                        BudgetMode::MatchedSweeps => (cfg.sweeps / 2).max(1),
                    };
                    SubSolver::Annealed(SaBudget {
                        sweeps,
                        restarts: cfg.restarts,
                        t_initial: cfg.t_initial,
                        t_final: cfg.t_final,
                    })
                }
                _ => SubSolver::Exhaustive,
            };
            let pfe_cfg = PfeConfig {
                subsolvers: (subsolver, subsolver),
                window_policy: WindowPolicy::BoundA,
                use_refined_filter: cfg.use_refined_filter,
                top_k_merge: cfg.top_k_merge,
                seed: trial_seed,
                parts: 2,
                keep_local_sets: false,
            };
            let r = solve_pfe(&problem.model, &pfe_cfg)?;
            (r.config, r.energy)
        }
    };
    let elapsed_us = start.elapsed().as_secs_f64() * 1e6;
    Ok((problem.is_success(&config, energy), energy, elapsed_us))
}

/// Run `cfg.trials` seeded executions of every method and assemble one
/// report per method. `F_rel` is normalized against the standard-annealing
/// row when present, otherwise against the first method.
pub fn run_benchmark(
    problem: &BenchProblem,
    methods: &[BenchMethod],
    cfg: &BenchConfig,
) -> Result<Vec<RunReport>> {
    if methods.is_empty() {
        return Err(Error::Input("no methods requested".into()));
    }
    if cfg.trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    let mut reports = Vec::with_capacity(methods.len());
    for &method in methods {
        let outcomes: Vec<(bool, f64, f64)> = if cfg.serial {
            let mut v = Vec::with_capacity(cfg.trials as usize);
            for t in 0..cfg.trials {
                v.push(run_trial(problem, method, cfg, derive_seed(cfg.seed, t))?);
            }
            v
        } else {
            (0..cfg.trials)
                .into_par_iter()
                .map(|t| run_trial(problem, method, cfg, derive_seed(cfg.seed, t)))
                .collect::<Result<Vec<_>>>()?
        };
        let successes = outcomes.iter().filter(|o| o.0).count() as u64;
        let best_energy = outcomes
            .iter()
            .map(|o| o.1)
            .fold(f64::INFINITY, f64::min);
        let tau_us =
            outcomes.iter().map(|o| o.2).sum::<f64>() / cfg.trials as f64;
        let p = p_bayes(successes, cfg.trials)?;
        let f = performance_metric(p, tau_us)?;
        reports.push(RunReport {
            method: method.name().to_string(),
            trials: cfg.trials,
            successes,
            p_bayes: p,
            tau_us,
            f,
            f_rel: f64::NAN,
            best_energy,
            ground_energy: problem.ground_energy,
            seed: cfg.seed,
        });
    }
    let baseline = reports
        .iter()
        .find(|r| r.method == "sa")
        .unwrap_or(&reports[0])
        .f;
    for r in &mut reports {
        r.f_rel = r.f / baseline;
    }
    Ok(reports)
}

/// Format `x` to `digits` significant digits in scientific notation.
pub fn format_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
}

pub const CSV_HEADER: &str =
    "method,trials,successes,p_bayes,tau_us,F,F_rel,best_energy,ground_energy,seed";

/// Write reports as CSV with a stable column order and 6 significant digits.
pub fn write_reports_csv<W: Write>(mut w: W, reports: &[RunReport]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.trials,
            r.successes,
            format_sig(r.p_bayes, 6),
            format_sig(r.tau_us, 6),
            format_sig(r.f, 6),
            format_sig(r.f_rel, 6),
            format_sig(r.best_energy, 6),
            format_sig(r.ground_energy, 6),
            r.seed,
        )?;
    }
    Ok(())
}

/// Write reports as full-precision JSON.
pub fn write_reports_json<W: Write>(mut w: W, reports: &[RunReport]) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(reports).expect("report serialization");
    writeln!(w, "{text}")
}

/// Report output format, chosen by file extension in [`emit_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Write reports to `path` as JSON or CSV.
pub fn emit_report(reports: &[RunReport], path: &Path, format: ReportFormat) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let result = match format {
        ReportFormat::Json => write_reports_json(file, reports),
        ReportFormat::Csv => write_reports_csv(file, reports),
    };
    result.map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems;

    #[test]
    fn laplace_rule_examples() {
        assert_eq!(p_bayes(0, 1000).unwrap(), 1.0 / 1002.0);
        assert_eq!(p_bayes(1, 1).unwrap(), 2.0 / 3.0);
        let half = p_bayes(500, 1000).unwrap();
        assert!((half - 501.0 / 1002.0).abs() < 1e-15);
        assert!(p_bayes(2, 1).is_err());
        assert!(p_bayes(0, 0).is_err());
    }

    #[test]
    fn laplace_estimates_stay_inside_the_open_interval() {
        for trials in [1u64, 2, 10, 1000] {
            for successes in [0, trials / 2, trials] {
                let p = p_bayes(successes, trials).unwrap();
                assert!(p > 0.0 && p < 1.0);
            }
        }
    }

    #[test]
    fn metric_examples() {
        assert!((performance_metric(0.9, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((performance_metric(0.99, 2.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(performance_metric(1.0, 1.0).is_err());
        assert!(performance_metric(0.5, 0.0).is_err());
    }

    #[test]
    fn higher_success_at_larger_tau_can_still_dominate() {
        let strong = performance_metric(0.92, 527_265.0).unwrap();
        let weak = performance_metric(0.02, 152_904.0).unwrap();
        assert!((strong - 2.08e-6).abs() < 2e-8);
        assert!((weak - 5.7e-8).abs() < 2e-9);
        assert!(strong > weak);
    }

    #[test]
    fn metric_monotonicity() {
        let base = performance_metric(0.5, 10.0).unwrap();
        assert!(performance_metric(0.6, 10.0).unwrap() > base);
        assert!(performance_metric(0.5, 20.0).unwrap() < base);
    }

    #[test]
    fn exact_method_always_succeeds() {
        let m = problems::random_connected::<f64>(8, 0.3, 5);
        let problem = BenchProblem::from_model("random8", m, None).unwrap();
        let cfg = BenchConfig {
            trials: 7,
            seed: 3,
            serial: true,
            ..Default::default()
        };
        let reports = run_benchmark(&problem, &[BenchMethod::Exact], &cfg).unwrap();
        assert_eq!(reports[0].successes, 7);
        assert_eq!(reports[0].p_bayes, p_bayes(7, 7).unwrap());
        assert_eq!(reports[0].f_rel, 1.0); // first method is the baseline
    }

    #[test]
    fn baseline_row_has_unit_relative_metric() {
        let m = problems::random_connected::<f64>(8, 0.3, 11);
        let problem = BenchProblem::from_model("random8", m, None).unwrap();
        let cfg = BenchConfig {
            trials: 5,
            seed: 1,
            sweeps: 50,
            restarts: 4,
            serial: true,
            ..Default::default()
        };
        let reports = run_benchmark(
            &problem,
            &[BenchMethod::PfeExhaustive, BenchMethod::Sa],
            &cfg,
        )
        .unwrap();
        let sa = reports.iter().find(|r| r.method == "sa").unwrap();
        assert_eq!(sa.f_rel, 1.0);
    }

    #[test]
    fn success_counts_are_deterministic_across_worker_modes() {
        let m = problems::random_connected::<f64>(10, 0.3, 23);
        let problem = BenchProblem::from_model("random10", m, None).unwrap();
        let base = BenchConfig {
            trials: 12,
            seed: 42,
            sweeps: 60,
            restarts: 4,
            ..Default::default()
        };
        let serial = BenchConfig {
            serial: true,
            ..base
        };
        let methods = [BenchMethod::Sa, BenchMethod::PfeSa];
        let a = run_benchmark(&problem, &methods, &base).unwrap();
        let b = run_benchmark(&problem, &methods, &serial).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.successes, y.successes);
            assert_eq!(x.best_energy, y.best_energy);
        }
    }

    #[test]
    fn missing_ground_truth_is_an_input_error() {
        let m = IsingModel::<f64>::new(31);
        assert!(BenchProblem::from_model("toolarge", m, None).is_err());
    }

    #[test]
    fn csv_emission_and_json_round_trip() {
        let report = RunReport {
            method: "sa".into(),
            trials: 1000,
            successes: 0,
            p_bayes: p_bayes(0, 1000).unwrap(),
            tau_us: 170_302.0,
            f: 2.5e-9,
            f_rel: 1.0,
            best_energy: -12.0,
            ground_energy: -12.5,
            seed: 7,
        };
        let mut csv = Vec::new();
        write_reports_csv(&mut csv, &[report.clone()]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("sa,1000,0,"));

        // Header-only CSV for an empty report list.
        let mut empty = Vec::new();
        write_reports_csv(&mut empty, &[]).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim(), CSV_HEADER);

        let mut json = Vec::new();
        write_reports_json(&mut json, &[report.clone()]).unwrap();
        let parsed: Vec<RunReport> = serde_json::from_slice(&json).unwrap();
        assert_eq!(parsed.len(), 1);
        assert_eq!(parsed[0], report);
    }

    #[test]
    fn zero_of_thousand_prints_as_one_per_mille_at_table_precision() {
        let p = p_bayes(0, 1000).unwrap();
        assert_eq!(format_sig(p, 2), "1.0e-3");
        assert_eq!(format_sig(p, 6), "9.98004e-4");
    }
}
