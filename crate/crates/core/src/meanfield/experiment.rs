use serde::Serialize;

use super::iteration::{IterationTrace, SolveOutcome, DEFAULT_MAX_ITERS};
use super::newton::DEFAULT_NEWTON_TOL;
use super::MeanField;
use crate::error::{Error, Result};
use crate::sphharm::random_field;

/// Radius of the ball of starting points validated by default.
pub const DEFAULT_DELTA0: f64 = 0.05;

/// Largest starting radius accepted by the experiment.
pub const MAX_DELTA: f64 = 0.2;

/// A trial counts as reaching zero when both solvers end below this sup norm.
const ZERO_REACHED: f64 = 1e-11;

/// Only iterates at or below this sup norm enter the decay-rate fit.
const ASYMPTOTIC_SUP: f64 = 1e-3;

/// Final iterate of one solver.
#[derive(Debug, Clone, Serialize)]
pub struct Endpoint {
    pub converged: bool,
    pub iterations: usize,
    pub sup_norm: f64,
    pub residual: f64,
    pub centroid: [f64; 3],
    /// Coefficients in `(l, m)` order.
    pub u: Vec<f64>,
}

/// A trial that did not end at the zero solution under both solvers.
#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub trial: u64,
    pub fixed_point: Endpoint,
    pub newton: Endpoint,
}

#[derive(Debug, Clone)]
pub struct TrialTraces {
    pub trial: u64,
    pub fixed_point: IterationTrace,
    pub newton: IterationTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct UniquenessReport {
    pub delta: f64,
    pub trials: u64,
    pub seed: u64,
    pub band_limit: usize,
    #[serde(rename = "converged")]
    pub converged_to_zero: u64,
    pub nonzero_candidates: Vec<Candidate>,
    /// Slope of `log s_{k+1}` against `log s_k` pooled over fixed-point
    /// iterates with `s_k <= 1e−3`.
    #[serde(rename = "exponent_estimate")]
    pub decay_exponent_estimate: f64,
    /// Smallest `log s_{k+1} / log s_k` over the same pairs.
    pub min_log_ratio: f64,
    /// Largest `s_{k+1} / s_k^{3/2}` over all fixed-point steps.
    pub effective_constant: f64,
    pub rate_pairs: usize,
    pub worst_residual: f64,
    /// Largest `sup |u_fixed_point − u_newton|` over all trials.
    pub max_solver_gap: f64,
    #[serde(skip)]
    pub traces: Vec<TrialTraces>,
}

impl UniquenessReport {
    pub fn all_zero(&self) -> bool {
        self.nonzero_candidates.is_empty() && self.converged_to_zero == self.trials
    }
}

impl MeanField {
    fn endpoint(&self, o: &SolveOutcome) -> Result<Endpoint> {
        Ok(Endpoint {
            converged: o.converged,
            iterations: o.iterations,
            sup_norm: o.state.sup_norm,
            residual: o.state.residual_norm,
            centroid: self.centroid_residual(&o.state.u)?,
            u: o.state.u.as_slice().to_vec(),
        })
    }

    /// Runs both solvers from `trials` seeded random starts with
    /// `sup |u₀| = delta` and records where they end.
    pub fn uniqueness_experiment(&self, delta: f64, trials: u64, seed: u64) -> Result<UniquenessReport> {
        if !(delta >= 0.0) {
            return Err(Error::Domain(format!("delta {delta} must be >= 0")));
        }
        if delta > MAX_DELTA {
            return Err(Error::Precondition(format!("delta {delta} exceeds {MAX_DELTA}")));
        }
        let mut report = UniquenessReport {
            delta,
            trials,
            seed,
            band_limit: self.band_limit,
            converged_to_zero: 0,
            nonzero_candidates: Vec::new(),
            decay_exponent_estimate: f64::NAN,
            min_log_ratio: f64::NAN,
            effective_constant: 0.0,
            rate_pairs: 0,
            worst_residual: 0.0,
            max_solver_gap: 0.0,
            traces: Vec::new(),
        };
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for trial in 0..trials {
            let u0 = random_field(&self.grid, self.band_limit, delta, seed, trial)?;
            let ls = self.ls_iterate(&u0, DEFAULT_MAX_ITERS)?;
            let nt = self.newton_solve(&u0, DEFAULT_MAX_ITERS, DEFAULT_NEWTON_TOL)?;

            let s = ls.trace.sup_norms();
            for w in s.windows(2) {
                if w[0] > 0.0 && w[1] > 0.0 {
                    report.effective_constant = report.effective_constant.max(w[1] / w[0].powf(1.5));
                    if w[0] <= ASYMPTOTIC_SUP {
                        pairs.push((w[0].ln(), w[1].ln()));
                    }
                }
            }
            report.worst_residual = report.worst_residual.max(ls.state.residual_norm).max(nt.state.residual_norm);
            report.max_solver_gap = report.max_solver_gap.max(self.sup_norm(&(&ls.state.u - &nt.state.u))?);

            let zero = |o: &SolveOutcome| o.converged && o.state.sup_norm <= ZERO_REACHED;
            if zero(&ls) && zero(&nt) {
                report.converged_to_zero += 1;
            } else {
                report.nonzero_candidates.push(Candidate {
                    trial,
                    fixed_point: self.endpoint(&ls)?,
                    newton: self.endpoint(&nt)?,
                });
            }
            report.traces.push(TrialTraces { trial, fixed_point: ls.trace, newton: nt.trace });
        }
        report.rate_pairs = pairs.len();
        if !pairs.is_empty() {
            report.min_log_ratio = pairs.iter().map(|(a, b)| b / a).fold(f64::INFINITY, f64::min);
            report.decay_exponent_estimate = slope(&pairs);
        }
        Ok(report)
    }
}

fn slope(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pairs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        pairs[0].1 / pairs[0].0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_radius_is_trivial() {
        let m = MeanField::new(8).unwrap();
        let r = m.uniqueness_experiment(0.0, 3, 0).unwrap();
        assert_eq!(r.converged_to_zero, 3);
        assert!(r.all_zero() && r.rate_pairs == 0);
    }

    #[test]
    fn radius_bounds() {
        let m = MeanField::new(8).unwrap();
        assert!(matches!(m.uniqueness_experiment(0.25, 1, 0), Err(Error::Precondition(_))));
        assert!(matches!(m.uniqueness_experiment(-0.1, 1, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn small_sweep() {
        let m = MeanField::new(12).unwrap();
        let r = m.uniqueness_experiment(DEFAULT_DELTA0, 4, 1).unwrap();
        assert_eq!(r.converged_to_zero + r.nonzero_candidates.len() as u64, r.trials);
        assert!(r.all_zero());
        assert!(r.decay_exponent_estimate >= 1.4 && r.min_log_ratio >= 1.4, "{r:?}");
        assert!(r.max_solver_gap <= 1e-10);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let p: Vec<(f64, f64)> = (1..5)
            .map(|k| {
                let x = -(k as f64) * 3.0;
                (x, 1.5 * x + 0.2)
            })
            .collect();
        assert!((slope(&p) - 1.5).abs() < 1e-14);
    }
}
