//! Paired significance testing.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub t: f64,
    pub p: f64,
    pub significant: bool,
    /// Set when an edge rule decided the outcome.
    pub note: Option<String>,
}

/// Plug-in point for significance tests over paired per-trial accuracies.
pub trait SignificanceTest: Sync {
    fn compare(&self, a: &[f64], b: &[f64]) -> Result<TestOutcome>;
}

/// Standard two-sided paired t-test. Trials share test nodes, so this is
/// anti-conservative compared to network-corrected tests.
#[derive(Debug, Clone, Copy)]
pub struct PairedTTest {
    pub level: f64,
}

impl Default for PairedTTest {
    fn default() -> Self {
        Self { level: 0.05 }
    }
}

impl SignificanceTest for PairedTTest {
    fn compare(&self, a: &[f64], b: &[f64]) -> Result<TestOutcome> {
        paired_t_test(a, b, self.level)
    }
}

pub fn paired_t_test(a: &[f64], b: &[f64], level: f64) -> Result<TestOutcome> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!("paired samples differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::Usage("paired t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok(if mean == 0.0 {
            TestOutcome { t: 0.0, p: 1.0, significant: false, note: Some("all differences zero".into()) }
        } else {
            TestOutcome {
                t: mean.signum() * f64::INFINITY,
                p: 0.0,
                significant: true,
                note: Some("constant non-zero difference; zero variance".into()),
            }
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1");
    let p = (2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0);
    Ok(TestOutcome { t, p, significant: p < level, note: None })
}
