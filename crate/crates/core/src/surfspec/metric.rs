use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::sphharm::{build_grid, laplace_beltrami, GridField, SphCoeffs, SphGrid};

/// Default band limit of the harmonic basis used for spectra.
pub const DEFAULT_BASIS_BAND: usize = 12;

/// Conformal metric `g = eᵘ g₀` on S².
///
/// Geometry is sampled on a grid of twice the basis band limit, which keeps
/// Gram matrices of `eᵘ` against basis products accurate to rounding for
/// moderate `u`.
#[derive(Debug, Clone)]
pub struct ConformalMetric {
    u: SphCoeffs,
    basis_band: usize,
    grid: Arc<SphGrid>,
    conformal: GridField,
    curvature: GridField,
    area: f64,
}

impl ConformalMetric {
    /// Builds the metric with a basis of band `basis_band` and its own grid.
    pub fn new(u: SphCoeffs, basis_band: usize) -> Result<Self> {
        let grid_band = (2 * basis_band.max(u.band_limit())).max(8);
        let grid = build_grid(grid_band)?;
        Self::on_grid(u, basis_band, grid)
    }

    /// Builds the metric on an existing grid.
    pub fn on_grid(u: SphCoeffs, basis_band: usize, grid: Arc<SphGrid>) -> Result<Self> {
        if u.band_limit() > grid.band_limit() || basis_band > grid.band_limit() {
            return Err(Error::Resolution(format!(
                "grid band {} cannot carry u of band {} with a band-{} basis",
                grid.band_limit(),
                u.band_limit(),
                basis_band
            )));
        }
        let uf = grid.synthesize(&u)?;
        if uf.sup_abs() > 50.0 {
            return Err(Error::Range(format!("sup |u| = {} overflows the conformal factor", uf.sup_abs())));
        }
        let conformal = uf.map(f64::exp);
        let curvature = curvature_on(&grid, &u, &uf)?;
        let area = conformal.integrate();
        Ok(ConformalMetric { u, basis_band, grid, conformal, curvature, area })
    }

    pub fn u(&self) -> &SphCoeffs {
        &self.u
    }

    pub fn basis_band(&self) -> usize {
        self.basis_band
    }

    pub fn grid(&self) -> &Arc<SphGrid> {
        &self.grid
    }

    /// `eᵘ` at the grid nodes.
    pub fn conformal_factor(&self) -> &GridField {
        &self.conformal
    }

    /// Gauss curvature `K` of `g` at the grid nodes.
    pub fn curvature(&self) -> &GridField {
        &self.curvature
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    /// `∫ f dμ_g` for a field on this metric's grid.
    pub fn integrate(&self, f: &GridField) -> Result<f64> {
        Ok(f.zip_map(&self.conformal, |a, b| a * b)?.integrate())
    }

    /// `∫ K dμ_g`, equal to `4π` by Gauss-Bonnet.
    pub fn total_curvature(&self) -> Result<f64> {
        self.integrate(&self.curvature)
    }

    /// The Jacobi potential `K − 3` of a zero-Hawking-mass CMC sphere.
    pub fn jacobi_potential(&self) -> GridField {
        self.curvature.map(|k| k - 3.0)
    }

    pub fn is_area_normalized(&self) -> bool {
        (self.area - 4.0 * PI).abs() <= 1e-10 * 4.0 * PI
    }
}

fn curvature_on(grid: &Arc<SphGrid>, u: &SphCoeffs, uf: &GridField) -> Result<GridField> {
    let lap = grid.synthesize(&laplace_beltrami(u))?;
    uf.zip_map(&lap, |u, l| (-u).exp() * (1.0 - 0.5 * l))
}

/// `K = e^{−u}(1 − ½Δ_{g₀}u)` sampled on `grid`.
pub fn gauss_curvature(u: &SphCoeffs, grid: &Arc<SphGrid>) -> Result<GridField> {
    let uf = grid.synthesize(u)?;
    curvature_on(grid, u, &uf)
}

/// Shifts `u` by the constant that makes `∫eᵘ dμ_{g₀} = 4π` on `grid`.
pub fn normalize_area(u: &SphCoeffs, grid: &Arc<SphGrid>) -> Result<SphCoeffs> {
    let area = grid.synthesize(u)?.map(f64::exp).integrate();
    let shift = (4.0 * PI / area).ln();
    let mut out = u.clone();
    out.as_mut_slice()[0] += shift * 2.0 * PI.sqrt();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::random_field;

    #[test]
    fn round_and_scaled_spheres() {
        let g = build_grid(8).unwrap();
        let k = gauss_curvature(&SphCoeffs::zeros(4), &g).unwrap();
        assert!(k.values().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let c = 0.7;
        let k = gauss_curvature(&SphCoeffs::constant(4, c), &g).unwrap();
        assert!(k.values().iter().all(|&v| (v - (-c).exp()).abs() < 1e-14));
    }

    #[test]
    fn gauss_bonnet_examples() {
        let u = &SphCoeffs::unit(4, 2, 0).unwrap() * 0.1;
        let m = ConformalMetric::new(u, 8).unwrap();
        assert!((m.total_curvature().unwrap() - 4.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn area_normalisation() {
        let g = build_grid(16).unwrap();
        let z = normalize_area(&SphCoeffs::zeros(4), &g).unwrap();
        assert!(z.norm() < 1e-14);
        let u = normalize_area(&SphCoeffs::constant(4, 4f64.ln()), &g).unwrap();
        assert!(u.norm() < 1e-14);
        let u = normalize_area(&(&SphCoeffs::unit(4, 2, 2).unwrap() * 0.2), &g).unwrap();
        let area = g.synthesize(&u).unwrap().map(f64::exp).integrate();
        assert!((area - 4.0 * PI).abs() < 1e-12);
        let r = random_field(&g, 8, 0.4, 3, 0).unwrap();
        let m = ConformalMetric::on_grid(normalize_area(&r, &g).unwrap(), 8, g).unwrap();
        assert!(m.is_area_normalized());
    }

    #[test]
    fn overflow_is_range_error() {
        let u = SphCoeffs::constant(4, 60.0);
        assert!(matches!(ConformalMetric::new(u, 4), Err(Error::Range(_))));
    }
}
