//! The mean-field equation `Δu = 6 − 6eᵘ` on the round sphere.
//!
//! `eᵘ` is never band-limited, so every nonlinear evaluation synthesises `u`
//! on a grid of twice the working band limit, acts pointwise and projects
//! back. The working band limit defaults to 12.

mod experiment;
mod iteration;
mod newton;

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::sphharm::{
    build_grid, laplace_beltrami, project_e2, project_e2_perp, E2Vector, GridField, SphCoeffs, SphGrid,
};
use crate::surfspec::gauss_curvature;

pub use experiment::{Candidate, Endpoint, TrialTraces, UniquenessReport, DEFAULT_DELTA0, MAX_DELTA};
pub use iteration::{IterationTrace, SolveOutcome, TraceRecord, DEFAULT_MAX_ITERS, ZERO_SUP};
pub use newton::{DEFAULT_NEWTON_TOL, NEWTON_MIN_BAND_LIMIT};

/// Default working band limit.
pub const DEFAULT_BAND_LIMIT: usize = 12;

/// `sup |u|` above which `eᵘ` is rejected.
pub const MAX_SUP: f64 = 50.0;

/// Residual required before a state counts as a solution.
pub const SOLUTION_RESIDUAL: f64 = 1e-10;

/// `eˣ − 1 − x − x²/2` without cancellation near zero.
pub(crate) fn exp_remainder2(x: f64) -> f64 {
    if x.abs() < 0.2 {
        let mut term = x * x * x / 6.0;
        let mut acc = term;
        for k in 4..30 {
            term *= x / k as f64;
            acc += term;
            if term.abs() <= 1e-17 * acc.abs() {
                break;
            }
        }
        acc
    } else {
        x.exp_m1() - x - 0.5 * x * x
    }
}

/// A conformal exponent with its residual, sup norm and the split
/// `u = u₁ + u₂` into the parts orthogonal to and inside `E₂`.
#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldState {
    #[serde(skip)]
    pub u: SphCoeffs,
    /// L² norm of `Δu − 6 + 6eᵘ`.
    pub residual_norm: f64,
    /// `max |u|` on the grid.
    pub sup_norm: f64,
    #[serde(skip)]
    pub u1: SphCoeffs,
    pub u2: E2Vector,
}

/// Solver context: working band limit and the oversampled evaluation grid.
#[derive(Debug, Clone)]
pub struct MeanField {
    band_limit: usize,
    grid: Arc<SphGrid>,
}

impl MeanField {
    pub fn new(band_limit: usize) -> Result<Self> {
        if band_limit < 4 {
            return Err(Error::Config(format!("mean-field band limit {band_limit} below 4")));
        }
        Ok(MeanField { band_limit, grid: build_grid(2 * band_limit)? })
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// The evaluation grid, at twice the working band limit.
    pub fn grid(&self) -> &Arc<SphGrid> {
        &self.grid
    }

    fn lift(&self, u: &SphCoeffs) -> Result<SphCoeffs> {
        if u.band_limit() > self.band_limit {
            return Err(Error::Dimension(format!(
                "u has band {} above the working band {}",
                u.band_limit(),
                self.band_limit
            )));
        }
        Ok(u.resized(self.band_limit))
    }

    fn sample(&self, u: &SphCoeffs) -> Result<GridField> {
        let f = self.grid.synthesize(u)?;
        let s = f.sup_abs();
        if s > MAX_SUP {
            return Err(Error::Range(format!("sup |u| = {s:.3e} exceeds {MAX_SUP}")));
        }
        Ok(f)
    }

    /// `max |u|` on the evaluation grid.
    pub fn sup_norm(&self, u: &SphCoeffs) -> Result<f64> {
        Ok(self.grid.synthesize(u)?.sup_abs())
    }

    /// Coefficients of `Δu − 6 + 6eᵘ` up to the working band limit.
    pub fn residual(&self, u: &SphCoeffs) -> Result<SphCoeffs> {
        let u = self.lift(u)?;
        let f = self.sample(&u)?;
        let e = self.grid.analyze_to(&f.map(f64::exp_m1), self.band_limit)?;
        Ok(&laplace_beltrami(&u) + &(&e * 6.0))
    }

    pub fn state(&self, u: &SphCoeffs) -> Result<MeanFieldState> {
        let u = self.lift(u)?;
        let residual_norm = self.residual(&u)?.norm();
        let sup_norm = self.sup_norm(&u)?;
        let u2 = project_e2(&u)?;
        let u1 = project_e2_perp(&u);
        Ok(MeanFieldState { u, residual_norm, sup_norm, u1, u2 })
    }

    /// Norm of the difference between `(Δ+6)u − 6(1+u−eᵘ)` and `Δu − 6 + 6eᵘ`.
    pub fn lifted_form_check(&self, u: &SphCoeffs) -> Result<f64> {
        let u = self.lift(u)?;
        let f = self.sample(&u)?;
        let lin = &laplace_beltrami(&u) + &(&u * 6.0);
        let rest = self.grid.analyze_to(&f.map(|x| x - x.exp_m1()), self.band_limit)?;
        let lifted = &lin - &(&rest * 6.0);
        Ok((&lifted - &self.residual(&u)?).norm())
    }

    /// `∫ x_i eᵘ dμ_{g₀}` for `i = 1, 2, 3`.
    pub fn centroid_residual(&self, u: &SphCoeffs) -> Result<[f64; 3]> {
        let u = self.lift(u)?;
        let e = self.sample(&u)?.map(f64::exp);
        let coords: [fn(f64, f64) -> f64; 3] = [|t, p| t.sin() * p.cos(), |t, p| t.sin() * p.sin(), |t, _| t.cos()];
        let mut out = [0.0; 3];
        for (o, x) in out.iter_mut().zip(coords) {
            *o = GridField::from_fn(&self.grid, x).zip_map(&e, |a, b| a * b)?.integrate();
        }
        Ok(out)
    }

    /// `(|P₂(u₂²)|, (1/7)√(5/π)|u₂|²)` for `u₂` with `E₂` coordinates `v`.
    pub fn p2_norm_identity_check(&self, v: &E2Vector) -> Result<(f64, f64)> {
        let u2 = v.to_coeffs(2)?;
        let sq = self.grid.product_project(&u2, &u2, 2)?;
        let lhs = project_e2(&sq)?.norm();
        let rhs = (5.0 / PI).sqrt() / 7.0 * v.norm().powi(2);
        Ok((lhs, rhs))
    }

    /// `sup |(K − 1) − 2(1 − e^{−u})|` for a solved state.
    pub fn nearly_round_relation_check(&self, state: &MeanFieldState) -> Result<f64> {
        if state.residual_norm > SOLUTION_RESIDUAL {
            return Err(Error::Precondition(format!(
                "residual {:.3e} exceeds {SOLUTION_RESIDUAL:.0e}; not a solution",
                state.residual_norm
            )));
        }
        let k = gauss_curvature(&state.u, &self.grid)?;
        let f = self.sample(&state.u)?;
        Ok(k.zip_map(&f, |k, u| (k - 1.0) - 2.0 * (1.0 - (-u).exp()))?.sup_abs())
    }

    /// Checks `|P₂(u₂²)| = (1/7)√(5/π)|u₂|²` on `draws` seeded Gaussian
    /// `E₂` vectors.
    pub fn p2_identity_sweep(&self, draws: u64, seed: u64) -> Result<P2Sweep> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(P2_STREAM);
        let mut worst = 0.0f64;
        for _ in 0..draws {
            let mut v = [0.0; 5];
            for x in v.iter_mut() {
                *x = rng.sample(StandardNormal);
            }
            let (lhs, rhs) = self.p2_norm_identity_check(&E2Vector(v))?;
            worst = worst.max((lhs - rhs).abs() / rhs);
        }
        Ok(P2Sweep { draws, seed, max_relative_error: worst, passed: worst <= P2_TOLERANCE })
    }
}

/// Relative tolerance of [`MeanField::p2_identity_sweep`].
pub const P2_TOLERANCE: f64 = 1e-12;

/// Stream reserved for `E₂` draws, apart from the trial streams.
const P2_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Serialize)]
pub struct P2Sweep {
    pub draws: u64,
    pub seed: u64,
    pub max_relative_error: f64,
    pub passed: bool,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::random_field;

    fn mf() -> MeanField {
        MeanField::new(8).unwrap()
    }

    #[test]
    fn residual_of_trivial_fields() {
        let m = mf();
        assert_eq!(m.residual(&SphCoeffs::zeros(8)).unwrap().norm(), 0.0);
        let c = 0.3;
        let r = m.residual(&SphCoeffs::constant(8, c)).unwrap();
        let want = SphCoeffs::constant(8, 6.0 * c.exp_m1());
        assert!(r.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn residual_matches_pointwise_evaluation() {
        let m = mf();
        let u = &SphCoeffs::unit(8, 2, 0).unwrap() * 0.01;
        let r = m.residual(&u).unwrap();
        // oracle: evaluate Δu − 6 + 6eᵘ directly on a finer grid
        let g = build_grid(30).unwrap();
        let y20 = |t: f64| 0.25 * (5.0 / PI).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        let f = GridField::from_fn(&g, |t, _| {
            let u = 0.01 * y20(t);
            -6.0 * u - 6.0 + 6.0 * u.exp()
        });
        let want = f.analyze_to(8).unwrap();
        assert!(r.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn overflow_is_range_error() {
        let m = mf();
        assert!(matches!(m.residual(&SphCoeffs::constant(8, 51.0)), Err(Error::Range(_))));
    }

    #[test]
    fn lifted_form_is_algebraic() {
        let m = mf();
        assert_eq!(m.lifted_form_check(&SphCoeffs::zeros(8)).unwrap(), 0.0);
        assert!(m.lifted_form_check(&SphCoeffs::unit(8, 2, 1).unwrap()).unwrap() <= 1e-13);
        let u = random_field(m.grid(), 8, 0.5, 11, 0).unwrap();
        assert!(m.lifted_form_check(&u).unwrap() <= 1e-13);
    }

    #[test]
    fn centroid_moments() {
        let m = mf();
        let c = m.centroid_residual(&SphCoeffs::zeros(8)).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-13));
        let c = m.centroid_residual(&SphCoeffs::unit(8, 2, 0).unwrap()).unwrap();
        assert!(c.iter().all(|v| v.abs() < 1e-12));
        let c = m.centroid_residual(&(&SphCoeffs::unit(8, 1, 0).unwrap() * 0.1)).unwrap();
        assert!(c[2] > 0.0 && c[0].abs() < 1e-13 && c[1].abs() < 1e-13);
    }

    #[test]
    fn p2_identity_examples() {
        let m = mf();
        let (l, r) = m.p2_norm_identity_check(&E2Vector([0.0, 0.0, 1.0, 0.0, 0.0])).unwrap();
        let c = (5.0 / PI).sqrt() / 7.0;
        assert!((l - c).abs() < 1e-13 && (r - c).abs() < 1e-15);
        let (l, r) = m.p2_norm_identity_check(&E2Vector([0.0; 5])).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn p2_sweep_is_seeded() {
        let m = mf();
        let a = m.p2_identity_sweep(50, 3).unwrap();
        let b = m.p2_identity_sweep(50, 3).unwrap();
        assert!(a.passed && a.max_relative_error == b.max_relative_error);
    }

    #[test]
    fn nearly_round_needs_solution() {
        let m = mf();
        let z = m.state(&SphCoeffs::zeros(8)).unwrap();
        assert!(m.nearly_round_relation_check(&z).unwrap() < 1e-15);
        let s = m.state(&(&SphCoeffs::unit(8, 2, 0).unwrap() * 0.1)).unwrap();
        assert!(matches!(m.nearly_round_relation_check(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn series_remainder() {
        for x in [-0.19f64, -1e-3, 1e-6, 0.05, 0.19] {
            let taylor: f64 = (3..12).map(|k| x.powi(k) / (2..=k).product::<i32>() as f64).sum();
            assert!((exp_remainder2(x) - taylor).abs() <= 1e-14 * taylor.abs(), "{x}");
        }
        let x = 0.5f64;
        assert!((exp_remainder2(x) - (x.exp() - 1.0 - x - 0.125)).abs() < 1e-15);
    }
}
