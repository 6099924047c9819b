use nalgebra::{DMatrix, DVector};

use super::iteration::{IterationTrace, SolveOutcome, ZERO_SUP};
use super::{MeanField, MeanFieldState, MAX_SUP};
use crate::error::{Error, Result};
use crate::sphharm::{HarmonicIndex, SphCoeffs};

/// Smallest working band limit accepted by [`MeanField::newton_solve`].
pub const NEWTON_MIN_BAND_LIMIT: usize = 8;

/// Default residual tolerance for Newton convergence.
pub const DEFAULT_NEWTON_TOL: f64 = 1e-12;

/// Tikhonov weight relative to `‖T‖_F²` in the reduced `E₂` system.
const TIKHONOV: f64 = 1e-10;

/// Step halvings tried before a Newton step is abandoned.
const MAX_HALVINGS: usize = 40;

/// Offsets of the five degree-2 coefficients.
const E2_OFFSETS: std::ops::Range<usize> = 4..9;

impl MeanField {
    /// Jacobian `Δ + 6·M(eᵘ)` of the coefficient residual, assembled as
    /// `(Δ + 6) + 6·M(eᵘ − 1)` so the `E₂` block carries no rounding from
    /// the identity part.
    pub fn jacobian(&self, u: &SphCoeffs) -> Result<DMatrix<f64>> {
        let f = self.sample(&self.lift(u)?)?;
        let mut j = self.grid.multiplication_matrix(&f.map(f64::exp_m1), self.band_limit)? * 6.0;
        for k in 0..j.nrows() {
            j[(k, k)] += 6.0 - HarmonicIndex::from_offset(k).laplace_eigenvalue();
        }
        Ok(j)
    }

    /// Newton's method on the coefficient residual.
    ///
    /// Each step solves the Jacobian bordered by the five `E₂` directions.
    /// The `E₂` component `t` of the step is fitted by regularised least
    /// squares on the bordered multipliers and applied twice.
    ///
    /// Converges when `sup |u| <= 1e−13`, or when the residual is at most
    /// `tol` and the step is below `1e−12`. Otherwise the iterate with the
    /// smallest residual is returned with `converged = false`.
    pub fn newton_solve(&self, u0: &SphCoeffs, max_iters: usize, tol: f64) -> Result<SolveOutcome> {
        if self.band_limit < NEWTON_MIN_BAND_LIMIT {
            return Err(Error::Precondition(format!(
                "Newton solver needs band limit >= {NEWTON_MIN_BAND_LIMIT}, got {}",
                self.band_limit
            )));
        }
        let mut state = self.state(u0)?;
        let mut trace = IterationTrace::start(&state);
        let mut best = state.clone();
        let mut iterations = 0;
        let mut converged = state.sup_norm <= ZERO_SUP;
        while !converged && iterations < max_iters {
            let f = self.residual(&state.u)?;
            let j = self.jacobian(&state.u)?;
            let step = bordered_step(&j, &f)?;
            let step = SphCoeffs::from_vec(self.band_limit, step.as_slice().to_vec())?;
            iterations += 1;
            let Some((next, step)) = self.backtrack(&state, &step)? else {
                break;
            };
            state = next;
            trace.push(&state);
            if state.residual_norm < best.residual_norm {
                best = state.clone();
            }
            let step_sup = self.sup_norm(&step)?;
            converged = state.sup_norm <= ZERO_SUP || (state.residual_norm <= tol && step_sup <= 1e-12);
        }
        let state = if converged { state } else { best };
        Ok(SolveOutcome { state, trace, converged, iterations })
    }
}

impl MeanField {
    /// Halves `step` until the residual drops below the current one.
    fn backtrack(&self, state: &MeanFieldState, step: &SphCoeffs) -> Result<Option<(MeanFieldState, SphCoeffs)>> {
        let mut step = step.clone();
        for _ in 0..MAX_HALVINGS {
            let u = &state.u + &step;
            if self.sup_norm(&u)? <= MAX_SUP {
                let next = self.state(&u)?;
                if next.residual_norm < state.residual_norm || next.sup_norm <= ZERO_SUP {
                    return Ok(Some((next, step)));
                }
            }
            step = &step * 0.5;
        }
        Ok(None)
    }
}

fn solve_bordered(b: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let lu = b.clone().lu();
    let u = lu.u();
    let diag = u.diagonal().map(f64::abs);
    let ratio = diag.min() / diag.max();
    if ratio >= 1e-10 {
        if let Some(x) = lu.solve(rhs) {
            if x.iter().all(|v| v.is_finite()) {
                return Ok(x);
            }
        }
    }
    let svd = b.clone().svd(true, true);
    let eps = 1e-14 * svd.singular_values.max();
    svd.solve(rhs, eps).map_err(|e| Error::LinearSolve(format!("bordered system: {e}")))
}

fn bordered_step(j: &DMatrix<f64>, f: &SphCoeffs) -> Result<DVector<f64>> {
    let n = j.nrows();
    let k = E2_OFFSETS.len();
    let mut b = DMatrix::<f64>::zeros(n + k, n + k);
    b.view_mut((0, 0), (n, n)).copy_from(j);
    for (i, off) in E2_OFFSETS.enumerate() {
        b[(off, n + i)] = 1.0;
        b[(n + i, off)] = 1.0;
    }
    let mut rhs = DMatrix::<f64>::zeros(n + k, k + 1);
    for (r, v) in f.as_slice().iter().enumerate() {
        rhs[(r, 0)] = -v;
    }
    for i in 0..k {
        rhs[(n + i, i + 1)] = 1.0;
    }
    let x = solve_bordered(&b, &rhs)?;
    let tau_a = x.view((n, 0), (k, 1)).into_owned();
    let t_mat = x.view((n, 1), (k, k)).into_owned();
    let mut normal = t_mat.transpose() * &t_mat;
    let mu = TIKHONOV * t_mat.norm_squared();
    for i in 0..k {
        normal[(i, i)] += mu;
    }
    let t = if mu > 0.0 {
        normal
            .cholesky()
            .ok_or_else(|| Error::LinearSolve("reduced E2 system is not positive definite".into()))?
            .solve(&(-(t_mat.transpose() * tau_a)))
    } else {
        DMatrix::zeros(k, 1)
    };
    let mut step: DVector<f64> = x.view((0, 0), (n, 1)).column(0).into_owned();
    step += x.view((0, 1), (n, k)) * t.column(0);
    for (i, off) in E2_OFFSETS.enumerate() {
        step[off] += t[(i, 0)];
    }
    Ok(step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meanfield::DEFAULT_MAX_ITERS;
    use crate::sphharm::random_field;

    #[test]
    fn zero_start_needs_no_iterations() {
        let m = MeanField::new(8).unwrap();
        let out = m.newton_solve(&SphCoeffs::zeros(8), 10, DEFAULT_NEWTON_TOL).unwrap();
        assert!(out.converged && out.iterations == 0);
    }

    #[test]
    fn low_band_rejected() {
        let m = MeanField::new(6).unwrap();
        assert!(matches!(m.newton_solve(&SphCoeffs::zeros(6), 10, DEFAULT_NEWTON_TOL), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_start_reaches_zero() {
        let m = MeanField::new(12).unwrap();
        for trial in 0..3 {
            let u0 = random_field(m.grid(), 12, 0.1, 7, trial).unwrap();
            let out = m.newton_solve(&u0, DEFAULT_MAX_ITERS, DEFAULT_NEWTON_TOL).unwrap();
            assert!(out.converged && out.state.sup_norm <= 1e-11, "{:?}", out.trace.sup_norms());
        }
    }

    #[test]
    fn constant_start() {
        let m = MeanField::new(8).unwrap();
        let out = m.newton_solve(&SphCoeffs::constant(8, 2f64.ln()), DEFAULT_MAX_ITERS, DEFAULT_NEWTON_TOL).unwrap();
        if out.converged {
            assert!(out.state.sup_norm <= 1e-11 || out.state.residual_norm <= DEFAULT_NEWTON_TOL);
        }
    }
}
