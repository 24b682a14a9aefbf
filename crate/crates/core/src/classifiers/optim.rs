//! Deterministic full-batch gradient ascent with backtracking line search.

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iterations: usize,
    /// Stop once a step improves the objective by less than this.
    pub tolerance: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { max_iterations: 500, tolerance: 1e-7 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

/// Maximizes `f`, which returns the objective value and its gradient.
///
/// Step length starts from the Barzilai-Borwein estimate and is halved until
/// the Armijo condition holds, so the objective is monotone non-decreasing
/// across iterations and the returned point is the best iterate seen.
pub fn maximize<F>(mut f: F, x0: Vec<f64>, opts: AscentOptions) -> (Vec<f64>, FitDiagnostics)
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut x = x0;
    let (mut value, mut grad) = f(&x);
    let mut step = 1.0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    for iter in 0..opts.max_iterations {
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2 == 0.0 || !gnorm2.is_finite() {
            return (x, FitDiagnostics { iterations: iter, converged: gnorm2 == 0.0, objective: value });
        }
        if let Some((px, pg)) = &prev {
            // BB1 step for ascent: s = dx, y = -(dg)
            let (mut ss, mut sy) = (0.0, 0.0);
            for i in 0..x.len() {
                let s = x[i] - px[i];
                let y = pg[i] - grad[i];
                ss += s * s;
                sy += s * y;
            }
            if sy > 0.0 && ss > 0.0 {
                step = (ss / sy).clamp(1e-10, 1e10);
            } else {
                step = (step * 2.0).min(1e10);
            }
        }

        let mut accepted = None;
        let mut t = step;
        for _ in 0..MAX_BACKTRACKS {
            let cand: Vec<f64> = x.iter().zip(&grad).map(|(xi, gi)| xi + t * gi).collect();
            let (cv, cg) = f(&cand);
            if cv.is_finite() && cv >= value + ARMIJO * t * gnorm2 {
                accepted = Some((cand, cv, cg));
                break;
            }
            t *= 0.5;
        }
        let Some((nx, nv, ng)) = accepted else {
            return (x, FitDiagnostics { iterations: iter, converged: true, objective: value });
        };
        let improvement = nv - value;
        step = t;
        prev = Some((std::mem::replace(&mut x, nx), std::mem::replace(&mut grad, ng)));
        value = nv;
        if improvement < opts.tolerance {
            return (x, FitDiagnostics { iterations: iter + 1, converged: true, objective: value });
        }
    }
    (x, FitDiagnostics { iterations: opts.max_iterations, converged: false, objective: value })
}
