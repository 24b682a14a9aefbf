//! Experiment harness: label-density sampling, hyperparameter selection,
//! multi-trial runs, significance tests and reports.

pub mod config;
pub mod cv;
pub mod experiment;
pub mod sampling;
pub mod stats;

use std::fmt;
use std::str::FromStr;

pub use config::ExperimentConfig;
pub use cv::{cross_validate_hyperparams, CvChoice, Grids};
pub use experiment::{run_experiment, run_trials, write_reports, SummaryRow, TrialResult};
pub use sampling::{derive_seed, known_count, sample_known};
pub use stats::{paired_t_test, PairedTTest, SignificanceTest, TestOutcome};

use crate::error::{Error, Result};
use crate::graph::{DataGraph, LabelState};
use crate::ssl::{attr_only, no_ssl, relat_only, ssl_learn, ClassifierSpec, SslVariant};

/// A learning algorithm or baseline evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ssl(SslVariant),
    NoSsl,
    AttrOnly,
    RelatOnly,
}

impl Method {
    /// Whether the method's result depends on the node-classifier choice.
    pub fn uses_classifier(self) -> bool {
        matches!(self, Self::Ssl(_) | Self::NoSsl)
    }

    pub fn run(self, graph: &DataGraph, spec: &ClassifierSpec) -> Result<LabelState> {
        match self {
            Self::Ssl(v) => Ok(ssl_learn(graph, v, spec)?.state),
            Self::NoSsl => Ok(no_ssl(graph, spec)?.state),
            Self::AttrOnly => attr_only(graph, spec.sigma_sq),
            Self::RelatOnly => relat_only(graph),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Ssl(v) => write!(f, "{v}"),
            Self::NoSsl => f.write_str("NO-SSL"),
            Self::AttrOnly => f.write_str("ATTR-ONLY"),
            Self::RelatOnly => f.write_str("RELAT-ONLY"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "ALL-EM" => Self::Ssl(SslVariant::ALL_EM),
            "ALL-ONEPASS" => Self::Ssl(SslVariant::ALL_ONEPASS),
            "KNOWN-EM" => Self::Ssl(SslVariant::KNOWN_EM),
            "KNOWN-ONEPASS" => Self::Ssl(SslVariant::KNOWN_ONEPASS),
            "NO-SSL" => Self::NoSsl,
            "ATTR-ONLY" => Self::AttrOnly,
            "RELAT-ONLY" => Self::RelatOnly,
            other => {
                // ALL-EM<n> / KNOWN-EM<n> for a custom iteration count
                let parse = |prefix: &str, all: bool| {
                    other.strip_prefix(prefix).and_then(|n| n.parse().ok()).map(|n| SslVariant::new(all, n))
                };
                match parse("ALL-EM", true).or_else(|| parse("KNOWN-EM", false)) {
                    Some(v) => Self::Ssl(v?),
                    None => return Err(Error::Config(format!("unknown method '{s}'"))),
                }
            }
        })
    }
}

/// Fraction of `test_nodes` whose predicted label matches `truth`.
pub fn accuracy(predicted: &LabelState, truth: &[usize], test_nodes: &[usize]) -> Result<f64> {
    if test_nodes.is_empty() {
        return Err(Error::Usage("accuracy over an empty test set is undefined".into()));
    }
    let correct = test_nodes.iter().filter(|&&i| predicted.label(i) == Some(truth[i])).count();
    Ok(correct as f64 / test_nodes.len() as f64)
}

/// One class takes more than 90% of the predictions over V^U while the
/// expected distribution gives it less than half.
pub fn is_degenerate(predicted: &LabelState, unknown: &[usize], expected: &[f64]) -> bool {
    if unknown.is_empty() {
        return false;
    }
    let mut counts = vec![0usize; expected.len()];
    for &i in unknown {
        if let Some(c) = predicted.label(i) {
            counts[c] += 1;
        }
    }
    let n = unknown.len() as f64;
    counts.iter().zip(expected).any(|(&c, &p)| c as f64 / n > 0.9 && p < 0.5)
}
