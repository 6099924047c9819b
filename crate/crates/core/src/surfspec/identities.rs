use std::f64::consts::PI;
use std::str::FromStr;

use serde::Serialize;

use super::metric::ConformalMetric;
use super::spectrum::SpectralOperator;
use crate::error::{Error, Result};
use crate::meanfield::MeanField;
use crate::sphharm::{coordinate_function, GridField, SphCoeffs};

/// Residual below which `u` is treated as a mean-field solution.
pub const SOLUTION_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradIdentity {
    /// `sup |Σ|∇_g x_i|² − 2e^{−u}|`.
    pub conformal_sup: f64,
    /// `sup |Σ|∇_g x_i|² − (3 − K)|`, only for mean-field solutions.
    pub jacobi_sup: Option<f64>,
}

fn coordinate_gradient_sum(metric: &ConformalMetric) -> Result<GridField> {
    let grid = metric.grid();
    let mut total = GridField::constant(grid, 0.0);
    for i in 1..=3 {
        let g = grid.gradient_sq(&coordinate_function(i, 1)?)?;
        total = total.zip_map(&g, |a, b| a + b)?;
    }
    // |∇_g f|² = e^{−u} |∇_{g₀} f|²
    total.zip_map(metric.conformal_factor(), |s, e| s / e)
}

/// Gradient identities of the coordinate map `x: S² → ℝ³` under `g`.
///
/// With `solution = true`, `u` must solve `Δu = 6 − 6eᵘ` and the Jacobi-field
/// identity `|∇_g x|² = 3 − K` is also measured.
pub fn grad_identity_check(metric: &ConformalMetric, solution: bool) -> Result<GradIdentity> {
    let s = coordinate_gradient_sum(metric)?;
    let uf = metric.grid().synthesize(metric.u())?;
    let conformal_sup = s.zip_map(&uf, |s, u| s - 2.0 * (-u).exp())?.sup_abs();
    let jacobi_sup = if solution {
        let mf = MeanField::new(metric.u().band_limit().max(4))?;
        let res = mf.residual(metric.u())?.norm();
        if res > SOLUTION_RESIDUAL {
            return Err(Error::Precondition(format!("mean-field residual {res:.3e} exceeds {SOLUTION_RESIDUAL:.0e}")));
        }
        Some(s.zip_map(metric.curvature(), |s, k| s - (3.0 - k))?.sup_abs())
    } else {
        None
    };
    Ok(GradIdentity { conformal_sup, jacobi_sup })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TripleCheck {
    /// The three eigenvalues following the ground state of `−Δ_g + K − 3`.
    pub eigenvalues: [f64; 3],
    /// `sup |Σφᵢ² − 1|` after normalising the mean of `Σφᵢ²` to one.
    pub sum_sq_sup: f64,
    /// `sup |Σ|∇_gφᵢ|² − (3 − K)|`.
    pub gradient_sup: f64,
}

/// Sum-of-squares and gradient identities for the eigenfunctions two to four
/// of the Jacobi operator `−Δ_g + K − 3`.
pub fn eigen_triple_check(metric: &ConformalMetric) -> Result<TripleCheck> {
    let op = SpectralOperator::assemble(metric, &metric.jacobi_potential())?;
    let (values, vectors) = op.eigenpairs()?;
    let grid = metric.grid();
    let band = metric.basis_band();
    let mut coeffs = Vec::with_capacity(3);
    let mut sum_sq = GridField::constant(grid, 0.0);
    for k in 1..=3 {
        let c = SphCoeffs::from_vec(band, vectors.column(k).iter().copied().collect())?;
        let f = grid.synthesize(&c)?;
        sum_sq = sum_sq.zip_map(&f, |a, b| a + b * b)?;
        coeffs.push(c);
    }
    let mean = metric.integrate(&sum_sq)? / metric.area();
    let scale = 1.0 / mean.sqrt();
    let sum_sq_sup = sum_sq.map(|v| v / mean - 1.0).sup_abs();
    let mut grad = GridField::constant(grid, 0.0);
    for c in &coeffs {
        let g = grid.gradient_sq(&(c * scale))?;
        grad = grad.zip_map(&g, |a, b| a + b)?;
    }
    let grad = grad.zip_map(metric.conformal_factor(), |s, e| s / e)?;
    let gradient_sup = grad.zip_map(metric.curvature(), |s, k| s - (3.0 - k))?.sup_abs();
    Ok(TripleCheck { eigenvalues: [values[1], values[2], values[3]], sum_sq_sup, gradient_sup })
}

/// Extrinsic data of a surface whose induced metric is round, sampled on a
/// round-sphere grid. Surface integrals use `dμ = (area/4π) dμ₀`.
#[derive(Debug, Clone)]
pub struct SurfaceGeometry {
    pub mean_curvature: f64,
    pub a0_sq: GridField,
    pub scalar_curvature: GridField,
    pub area: f64,
}

/// `(16π − ∫H², (2/3)∫(R + |A⁰|²))`; stable CMC spheres satisfy `lhs ≥ rhs`.
pub fn cy_inequality_check(geom: &SurfaceGeometry) -> Result<(f64, f64)> {
    if geom.area <= 0.0 {
        return Err(Error::Domain(format!("area {} must be positive", geom.area)));
    }
    let lhs = 16.0 * PI - geom.mean_curvature.powi(2) * geom.area;
    let density = geom.scalar_curvature.zip_map(&geom.a0_sq, |r, a| r + a)?.integrate() / (4.0 * PI);
    Ok((lhs, 2.0 / 3.0 * density * geom.area))
}

/// Ambient model selecting the Hawking-mass formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbientMode {
    Flat,
    Hyperbolic,
}

impl FromStr for AmbientMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(AmbientMode::Flat),
            "hyperbolic" => Ok(AmbientMode::Hyperbolic),
            other => Err(Error::Config(format!("unknown mode `{other}` (flat|hyperbolic)"))),
        }
    }
}

/// Willmore energy `¼∫H²` and normalised Hawking mass
/// `√area (16π − ∫H²)/(16π)^{3/2}`; hyperbolic mode uses `∫(H² − 4)`.
pub fn willmore_and_hawking(area: f64, h_sq_integral: f64, mode: AmbientMode) -> Result<(f64, f64)> {
    if !(area > 0.0) {
        return Err(Error::Domain(format!("area {area} must be positive")));
    }
    let energy = match mode {
        AmbientMode::Flat => h_sq_integral,
        AmbientMode::Hyperbolic => h_sq_integral - 4.0 * area,
    };
    let mass = area.sqrt() * (16.0 * PI - energy) / (16.0 * PI).powf(1.5);
    Ok((0.25 * h_sq_integral, mass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::build_grid;

    #[test]
    fn round_sphere_gradients() {
        let m = ConformalMetric::new(SphCoeffs::zeros(4), 12).unwrap();
        let g = grad_identity_check(&m, true).unwrap();
        assert!(g.conformal_sup < 1e-12);
        assert!(g.jacobi_sup.unwrap() < 1e-12);
        let t = eigen_triple_check(&m).unwrap();
        assert!(t.eigenvalues.iter().all(|v| v.abs() < 1e-10));
        assert!(t.sum_sq_sup < 1e-10 && t.gradient_sup < 1e-10, "{t:?}");
    }

    #[test]
    fn conformal_gradient_scaling() {
        let u = &SphCoeffs::unit(4, 2, 1).unwrap() * 0.1;
        let m = ConformalMetric::new(u, 8).unwrap();
        assert!(grad_identity_check(&m, false).unwrap().conformal_sup < 1e-11);
        assert!(matches!(grad_identity_check(&m, true), Err(Error::Precondition(_))));
    }

    #[test]
    fn willmore_values() {
        let (w, m) = willmore_and_hawking(4.0 * PI, 16.0 * PI, AmbientMode::Flat).unwrap();
        assert!((w - 4.0 * PI).abs() < 1e-14 && m.abs() < 1e-15);
        for r in [3.0, 5.0, 10.0] {
            let a = 4.0 * PI * r * r;
            let (_, m) = willmore_and_hawking(a, 16.0 * PI * (1.0 - 2.0 / r), AmbientMode::Flat).unwrap();
            assert!((m - 1.0).abs() < 1e-13);
        }
        let rho: f64 = 1.3;
        let a = 4.0 * PI * rho.sinh().powi(2);
        let h2 = (2.0 / rho.tanh()).powi(2) * a;
        let (_, m) = willmore_and_hawking(a, h2, AmbientMode::Hyperbolic).unwrap();
        assert!(m.abs() < 1e-12);
        assert!(matches!(willmore_and_hawking(0.0, 1.0, AmbientMode::Flat), Err(Error::Domain(_))));
    }

    #[test]
    fn cy_round_and_schwarzschild() {
        let g = build_grid(4).unwrap();
        let zero = GridField::constant(&g, 0.0);
        let round = SurfaceGeometry {
            mean_curvature: 2.0,
            a0_sq: zero.clone(),
            scalar_curvature: zero.clone(),
            area: 4.0 * PI,
        };
        let (l, r) = cy_inequality_check(&round).unwrap();
        assert!(l.abs() < 1e-13 && r == 0.0);
        let rad = 4.0;
        let s = SurfaceGeometry {
            mean_curvature: 2.0 * (1.0f64 - 2.0 / rad).sqrt() / rad,
            a0_sq: zero.clone(),
            scalar_curvature: zero,
            area: 4.0 * PI * rad * rad,
        };
        let (l, r) = cy_inequality_check(&s).unwrap();
        assert!((l - 8.0 * PI).abs() < 1e-12 && r == 0.0);
    }
}
