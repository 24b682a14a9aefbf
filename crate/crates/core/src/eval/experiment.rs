//! Multi-trial experiment runner and report writer.
//!
//! Every (density, trial) cell samples V^K once from a seed derived from the
//! master seed; all methods and classifiers in that cell reuse it, so their
//! accuracies can be compared with paired tests.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::cv::{cross_validate_hyperparams, CvOptions};
use super::sampling::{derive_seed, sample_known};
use super::stats::{PairedTTest, SignificanceTest, TestOutcome};
use super::{accuracy, is_degenerate, Method};
use crate::data::{load_dataset, prepare, Dataset};
use crate::error::Result;
use crate::graph::class_prior;
use crate::ssl::{ClassifierKind, ClassifierSpec};

/// A (method, classifier) pair evaluated in every cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RunId {
    pub method: Method,
    pub classifier: Option<ClassifierKind>,
}

impl RunId {
    pub fn classifier_label(&self) -> String {
        match (self.method, self.classifier) {
            (_, Some(k)) => k.to_string(),
            (Method::AttrOnly, None) => "LR".into(),
            _ => "-".into(),
        }
    }

    fn kind(&self) -> ClassifierKind {
        self.classifier.unwrap_or(ClassifierKind::Lr)
    }
}

pub fn planned_runs(cfg: &ExperimentConfig) -> Vec<RunId> {
    let mut runs = Vec::new();
    for &method in &cfg.methods {
        if method.uses_classifier() {
            runs.extend(cfg.classifiers.iter().map(|&k| RunId { method, classifier: Some(k) }));
        } else {
            runs.push(RunId { method, classifier: None });
        }
    }
    runs
}

#[derive(Debug, Clone)]
pub struct TrialResult {
    pub run: RunId,
    pub density: f64,
    pub density_index: usize,
    pub trial: usize,
    /// `None` when the trial failed; see `error`.
    pub accuracy: Option<f64>,
    pub error: Option<String>,
    pub known_count: usize,
    pub known_hash: u64,
    pub sigma_sq: f64,
    pub nb_alpha: f64,
    pub degenerate: bool,
    pub cv_warnings: Vec<String>,
    pub wall_time: Duration,
}

fn fnv1a(nodes: &[usize]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &n in nodes {
        for b in (n as u64).to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    }
    h
}

fn run_cell(ds: &Dataset, cfg: &ExperimentConfig, run: RunId, di: usize, trial: usize) -> TrialResult {
    let start = Instant::now();
    let density = cfg.densities[di];
    let cell_seed = derive_seed(cfg.master_seed, &[di as u64, trial as u64]);
    let mut result = TrialResult {
        run,
        density,
        density_index: di,
        trial,
        accuracy: None,
        error: None,
        known_count: 0,
        known_hash: 0,
        sigma_sq: f64::NAN,
        nb_alpha: f64::NAN,
        degenerate: false,
        cv_warnings: Vec::new(),
        wall_time: Duration::ZERO,
    };
    let outcome = (|| -> Result<()> {
        let n = ds.graph.node_count();
        let known_nodes = sample_known(n, density, derive_seed(cell_seed, &[1]))?;
        result.known_count = known_nodes.len();
        result.known_hash = fnv1a(&known_nodes);
        let mut known = vec![None; n];
        for &i in &known_nodes {
            known[i] = Some(ds.truth[i]);
        }
        let graph = ds.graph.with_known(known)?;
        let opts = CvOptions { folds: cfg.cv_folds, max_em_iterations: cfg.cv_em_iterations };
        let choice =
            cross_validate_hyperparams(&graph, run.method, run.kind(), &cfg.grids, opts, derive_seed(cell_seed, &[2]))?;
        result.sigma_sq = choice.sigma_sq;
        result.nb_alpha = choice.nb_alpha;
        result.cv_warnings = choice.warnings;
        let spec = ClassifierSpec::new(run.kind(), choice.sigma_sq, choice.nb_alpha);
        let pred = run.method.run(&graph, &spec)?;
        let unknown = graph.unknown_nodes();
        result.accuracy = Some(accuracy(&pred, &ds.truth, &unknown)?);
        let expected = class_prior(&graph, &graph.initial_state(), true, 1.0)?;
        result.degenerate = is_degenerate(&pred, &unknown, &expected);
        Ok(())
    })();
    if let Err(e) = outcome {
        log::error!("{} / {} density {density} trial {trial}: {e}", run.method, run.classifier_label());
        result.error = Some(e.to_string());
    }
    result.wall_time = start.elapsed();
    result
}

/// Runs every planned (method, classifier) in every (density, trial) cell.
/// Results come back ordered by density, run, trial regardless of the
/// order in which worker threads finish.
pub fn run_trials(ds: &Dataset, cfg: &ExperimentConfig) -> Vec<TrialResult> {
    let runs = planned_runs(cfg);
    let jobs: Vec<(usize, usize, usize)> = (0..cfg.densities.len())
        .flat_map(|di| (0..runs.len()).flat_map(move |ri| (0..cfg.trials).map(move |t| (di, ri, t))))
        .collect();
    jobs.par_iter().map(|&(di, ri, t)| run_cell(ds, cfg, runs[ri], di, t)).collect()
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub run: RunId,
    pub density: f64,
    pub mean_accuracy: Option<f64>,
    pub completed: usize,
    /// Comparison against the first planned run at the same density.
    pub test: Option<TestOutcome>,
    pub mark: String,
}

pub fn summarize(results: &[TrialResult], cfg: &ExperimentConfig, test: &dyn SignificanceTest) -> Vec<SummaryRow> {
    let runs = planned_runs(cfg);
    let mut rows = Vec::new();
    for di in 0..cfg.densities.len() {
        let per_run: Vec<Vec<Option<f64>>> = runs
            .iter()
            .map(|r| {
                let mut v = vec![None; cfg.trials];
                for t in results.iter().filter(|t| t.density_index == di && t.run == *r) {
                    v[t.trial] = t.accuracy;
                }
                v
            })
            .collect();
        for (ri, run) in runs.iter().enumerate() {
            let ok: Vec<f64> = per_run[ri].iter().flatten().copied().collect();
            let mean = (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64);
            let (test_out, mark) = if ri == 0 {
                (None, "ref".to_string())
            } else {
                let (a, b): (Vec<f64>, Vec<f64>) = per_run[ri]
                    .iter()
                    .zip(&per_run[0])
                    .filter_map(|(x, y)| Some(((*x)?, (*y)?)))
                    .unzip();
                if a.len() < 2 {
                    (None, "insufficient trials".to_string())
                } else {
                    match test.compare(&a, &b) {
                        Ok(o) => {
                            let m = match (o.significant, o.t < 0.0) {
                                (true, true) => "worse",
                                (true, false) => "better",
                                _ => "",
                            };
                            (Some(o), m.to_string())
                        }
                        Err(e) => (None, format!("test failed: {e}")),
                    }
                }
            };
            rows.push(SummaryRow {
                run: *run,
                density: cfg.densities[di],
                mean_accuracy: mean,
                completed: ok.len(),
                test: test_out,
                mark,
            });
        }
    }
    rows
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n', '\r'], ";")
}

pub fn trials_csv(results: &[TrialResult]) -> String {
    let mut out = String::from("density,method,classifier,trial,known,accuracy,sigma_sq,nb_alpha,degenerate,error\n");
    for r in results {
        let acc = r.accuracy.map(|a| format!("{a:.4}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            r.density,
            r.run.method,
            r.run.classifier_label(),
            r.trial,
            r.known_count,
            acc,
            r.sigma_sq,
            r.nb_alpha,
            r.degenerate,
            csv_field(r.error.as_deref().unwrap_or(""))
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("method,classifier,density,mean_accuracy,trials,t_stat,p_value,significance\n");
    for r in rows {
        let mean = r.mean_accuracy.map(|a| format!("{a:.4}")).unwrap_or_default();
        let (t, p) = match &r.test {
            Some(o) => (format!("{:.4}", o.t), format!("{:.4}", o.p)),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.run.method,
            r.run.classifier_label(),
            r.density,
            mean,
            r.completed,
            t,
            p,
            csv_field(&r.mark)
        );
    }
    out
}

/// Human-readable table: one row per run, one column per density, in
/// percent; `*` marks a mean significantly below the reference row.
pub fn report_table(rows: &[SummaryRow], cfg: &ExperimentConfig) -> String {
    let runs = planned_runs(cfg);
    let mut out = String::new();
    let _ = write!(out, "{:<28}", "method / classifier");
    for d in &cfg.densities {
        let _ = write!(out, "{:>10}", format!("{}%", d * 100.0));
    }
    out.push('\n');
    for run in &runs {
        let _ = write!(out, "{:<28}", format!("{} / {}", run.method, run.classifier_label()));
        for d in &cfg.densities {
            let cell = rows
                .iter()
                .find(|r| r.run == *run && r.density == *d)
                .and_then(|r| r.mean_accuracy.map(|m| format!("{:.1}{}", m * 100.0, if r.mark == "worse" { "*" } else { "" })))
                .unwrap_or_else(|| "n/a".into());
            let _ = write!(out, "{cell:>10}");
        }
        out.push('\n');
    }
    if cfg.trials < 2 {
        out.push_str("\nnote: insufficient trials for significance tests\n");
    } else {
        out.push_str(
            "\nnote: significance from a standard paired t-test (5% level) against the first row; \
             trials share test nodes, so these marks are anti-conservative\n",
        );
    }
    out
}

pub fn write_reports(results: &[TrialResult], cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<SummaryRow>> {
    fs::create_dir_all(dir)?;
    let rows = summarize(results, cfg, &PairedTTest::default());
    fs::write(dir.join("trials.csv"), trials_csv(results))?;
    fs::write(dir.join("summary.csv"), summary_csv(&rows))?;
    fs::write(dir.join("report.txt"), report_table(&rows, cfg))?;
    Ok(rows)
}

/// Loads the dataset, runs all trials and writes `trials.csv`,
/// `summary.csv` and `report.txt` into `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let raw = load_dataset(&cfg.nodes, &cfg.edges)?;
    let ds = prepare(&raw, cfg.prep)?;
    run_experiment_on(&ds, cfg)
}

pub fn run_experiment_on(ds: &Dataset, cfg: &ExperimentConfig) -> Result<Vec<TrialResult>> {
    cfg.validate()?;
    let results = run_trials(ds, cfg);
    write_reports(&results, cfg, &cfg.out_dir)?;
    Ok(results)
}
