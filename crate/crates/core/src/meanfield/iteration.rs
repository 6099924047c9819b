use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use super::{exp_remainder2, MeanField, MeanFieldState};
use crate::error::{Error, Result};
use crate::sphharm::{project_e2, E2Vector, SphCoeffs};

/// `sup |u|` at which an iterate is taken to be the zero solution.
pub const ZERO_SUP: f64 = 1e-13;

/// Iteration cap shared by both solvers.
pub const DEFAULT_MAX_ITERS: usize = 50;

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub sup_norm: f64,
    pub residual: f64,
    pub u1_norm: f64,
    pub u2_norm: f64,
}

impl TraceRecord {
    fn of(k: usize, s: &MeanFieldState) -> Self {
        TraceRecord { k, sup_norm: s.sup_norm, residual: s.residual_norm, u1_norm: s.u1.norm(), u2_norm: s.u2.norm() }
    }
}

/// Per-iterate norms of one solver run; `delta0` is the starting sup norm.
#[derive(Debug, Clone, Serialize, Default)]
pub struct IterationTrace {
    pub delta0: f64,
    pub records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub(crate) fn start(s: &MeanFieldState) -> Self {
        IterationTrace { delta0: s.sup_norm, records: vec![TraceRecord::of(0, s)] }
    }

    pub(crate) fn push(&mut self, s: &MeanFieldState) {
        let k = self.records.len();
        self.records.push(TraceRecord::of(k, s));
    }

    pub fn sup_norms(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.sup_norm).collect()
    }

    /// CSV with header `k,sup_norm,residual,u1_norm,u2_norm`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,sup_norm,residual,u1_norm,u2_norm\n");
        for r in &self.records {
            let _ =
                writeln!(s, "{},{:.16e},{:.16e},{:.16e},{:.16e}", r.k, r.sup_norm, r.residual, r.u1_norm, r.u2_norm);
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub state: MeanFieldState,
    pub trace: IterationTrace,
    pub converged: bool,
    pub iterations: usize,
}

impl MeanField {
    /// One step of the Lyapunov-Schmidt fixed-point scheme.
    ///
    /// The part orthogonal to `E₂` is updated first,
    /// `u₁ ← 6(Δ+6)⁻¹P⊥(1 + u − eᵘ)`, diagonally in coefficient space. The
    /// `E₂` part keeps its direction and takes the norm fixed by projecting
    /// the equation onto `E₂` with the new `u₁`:
    /// `|u₂|² = 7√(π/5)·|P₂(−2u₁u₂ − u₁² − 2R₂(u₁+u₂))|`, where
    /// `R₂(x) = eˣ − 1 − x − x²/2`.
    pub fn ls_step(&self, state: &MeanFieldState) -> Result<MeanFieldState> {
        if !(state.sup_norm < 1.0) {
            return Err(Error::Precondition(format!(
                "sup |u| = {:.3e} is outside the unit ball of the fixed-point scheme",
                state.sup_norm
            )));
        }
        let grid = &self.grid;
        let f = grid.synthesize(&state.u)?;
        let source = grid.analyze_to(&f.map(|x| -(0.5 * x * x + exp_remainder2(x))), self.band_limit)?;
        let mut u1 = SphCoeffs::zeros(self.band_limit);
        for ((ix, s), out) in source.iter().zip(u1.as_mut_slice()) {
            if ix.l != 2 {
                *out = 6.0 * s / (6.0 - ix.laplace_eigenvalue());
            }
        }
        let old = state.u2.norm();
        let mut u2 = E2Vector([0.0; 5]);
        if old > 0.0 {
            let f1 = grid.synthesize(&u1)?;
            let f2 = grid.synthesize(&state.u2.to_coeffs(2)?)?;
            let terms = f1.zip_map(&f2, |a, b| -(2.0 * a * b + a * a) - 2.0 * exp_remainder2(a + b))?;
            let p = project_e2(&grid.analyze_to(&terms, 2)?)?.norm();
            let new = (7.0 * (PI / 5.0).sqrt() * p).sqrt();
            for (o, v) in u2.0.iter_mut().zip(state.u2.0) {
                *o = v * new / old;
            }
        }
        let u = &u1 + &u2.to_coeffs(self.band_limit)?;
        self.state(&u)
    }

    /// Iterates [`ls_step`](Self::ls_step) from `u0` until `sup |u| <= 1e−13`,
    /// the iterate leaves the unit ball, or `max_iters` steps.
    pub fn ls_iterate(&self, u0: &SphCoeffs, max_iters: usize) -> Result<SolveOutcome> {
        let mut state = self.state(u0)?;
        let mut trace = IterationTrace::start(&state);
        let mut iterations = 0;
        let mut converged = state.sup_norm <= ZERO_SUP;
        while !converged && iterations < max_iters && state.sup_norm < 1.0 {
            let next = self.ls_step(&state)?;
            let moved = (&next.u - &state.u).norm();
            iterations += 1;
            trace.push(&next);
            state = next;
            converged = state.sup_norm <= ZERO_SUP || (state.residual_norm <= 1e-12 && moved <= 1e-12);
        }
        Ok(SolveOutcome { state, trace, converged, iterations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::random_field;

    #[test]
    fn zero_is_fixed() {
        let m = MeanField::new(8).unwrap();
        let s = m.state(&SphCoeffs::zeros(8)).unwrap();
        let n = m.ls_step(&s).unwrap();
        assert_eq!(n.u.norm(), 0.0);
    }

    #[test]
    fn quadratic_and_three_halves_bounds() {
        let m = MeanField::new(12).unwrap();
        let d = 0.05;
        let s = m.state(&(&SphCoeffs::unit(12, 2, 0).unwrap() * d)).unwrap();
        let n = m.ls_step(&s).unwrap();
        let c = n.u2.norm() / d.powf(1.5);
        assert!(c <= 10.0, "constant {c}");
        let s = m.state(&(&SphCoeffs::unit(12, 4, 0).unwrap() * d)).unwrap();
        let n = m.ls_step(&s).unwrap();
        assert!(n.u2.norm() == 0.0);
        assert!(n.sup_norm <= 10.0 * d * d, "{}", n.sup_norm);
    }

    #[test]
    fn outside_unit_ball_rejected() {
        let m = MeanField::new(8).unwrap();
        let s = m.state(&SphCoeffs::constant(8, 1.5)).unwrap();
        assert!(matches!(m.ls_step(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn random_start_decays_monotonically() {
        let m = MeanField::new(12).unwrap();
        let u0 = random_field(m.grid(), 12, 0.05, 5, 2).unwrap();
        let out = m.ls_iterate(&u0, DEFAULT_MAX_ITERS).unwrap();
        assert!(out.converged && out.state.sup_norm <= 1e-11);
        let s = out.trace.sup_norms();
        assert!(s[1..].windows(2).all(|w| w[1] <= w[0]), "{s:?}");
    }
}
