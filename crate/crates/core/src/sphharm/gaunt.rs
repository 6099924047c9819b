//! Closed-form products of degree-2 harmonics and related quadrature checks.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::coeffs::SphCoeffs;
use super::grid::{GridField, SphGrid};
use crate::error::{Error, Result};

/// Absolute tolerance for reproducing tabulated coefficients.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

/// Smallest grid band limit at which the product table is checked.
pub const GAUNT_MIN_BAND_LIMIT: usize = 8;

/// `Y_{2,a} · Y_{2,b} = Σ c_{l,m} Y_{l,m}` with the constant term expressed
/// through `Y_{0,0}`.
#[derive(Debug, Clone)]
pub struct ProductIdentity {
    pub name: String,
    pub left: i32,
    pub right: i32,
    pub terms: Vec<(usize, i32, f64)>,
}

/// The fifteen products of degree-2 harmonics, `a <= b`.
pub fn product_identities() -> Vec<ProductIdentity> {
    let s = |x: f64| x.sqrt();
    // the constant 1/(4π) written as a multiple of Y_{0,0} = 1/(2√π)
    let constant = 1.0 / (4.0 * PI) * 2.0 * PI.sqrt();
    let a = s(5.0 / PI) / 7.0; // (1/7)√(5/π)
    let b = s(15.0 / PI) / 14.0; // (1/14)√(15/π)
    let c = 0.5 * s(5.0 / (7.0 * PI));
    let d = s(15.0 / (2.0 * PI)) / 7.0;
    let e = 0.5 * s(5.0 / (14.0 * PI));
    let f = s(5.0 / (2.0 * PI)) / 14.0;
    let g = s(1.0 / PI);

    let id = |left: i32, right: i32, terms: Vec<(usize, i32, f64)>| {
        let name = if left == right { format!("Y_{{2,{left}}}^2") } else { format!("Y_{{2,{left}}}Y_{{2,{right}}}") };
        ProductIdentity { name, left, right, terms }
    };

    vec![
        id(0, 0, vec![(4, 0, 3.0 / 7.0 * g), (2, 0, a), (0, 0, constant)]),
        id(-2, -2, vec![(4, 4, -c), (4, 0, g / 14.0), (2, 0, -a), (0, 0, constant)]),
        id(2, 2, vec![(4, 4, c), (4, 0, g / 14.0), (2, 0, -a), (0, 0, constant)]),
        id(-1, -1, vec![(4, 2, -a), (4, 0, -2.0 / 7.0 * g), (2, 2, -b), (2, 0, a / 2.0), (0, 0, constant)]),
        id(1, 1, vec![(4, 2, a), (4, 0, -2.0 / 7.0 * g), (2, 2, b), (2, 0, a / 2.0), (0, 0, constant)]),
        id(-2, 2, vec![(4, -4, c)]),
        id(-2, 0, vec![(4, -2, s(15.0 / PI) / 14.0), (2, -2, -a)]),
        id(0, 2, vec![(4, 2, s(15.0 / PI) / 14.0), (2, 2, -a)]),
        id(-1, 0, vec![(4, -1, d), (2, -1, a / 2.0)]),
        id(0, 1, vec![(4, 1, d), (2, 1, a / 2.0)]),
        id(-1, 1, vec![(4, -2, a), (2, -2, b)]),
        id(-2, -1, vec![(4, 3, -e), (4, 1, -f), (2, 1, b)]),
        id(1, 2, vec![(4, 3, e), (4, 1, -f), (2, 1, b)]),
        id(-2, 1, vec![(4, -3, e), (4, -1, -f), (2, -1, b)]),
        // the Y_{2,-1} term carries a minus sign; the same sign appears in the
        // E₂ projection of u₂² through the λ₋₁λ₂ cross term
        id(-1, 2, vec![(4, -3, e), (4, -1, f), (2, -1, -b)]),
    ]
}

impl ProductIdentity {
    pub fn expected(&self, band_limit: usize) -> Result<SphCoeffs> {
        let mut c = SphCoeffs::zeros(band_limit);
        for &(l, m, v) in &self.terms {
            c.set(l, m, v)?;
        }
        Ok(c)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityResult {
    pub name: String,
    /// Largest `|computed − tabulated|` over all coefficients up to the band limit.
    pub max_deviation: f64,
    /// Largest computed coefficient outside degrees {0, 2, 4}.
    pub off_table_max: f64,
    pub worst_l: usize,
    pub worst_m: i32,
    pub worst_expected: f64,
    pub worst_actual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GauntReport {
    pub band_limit: usize,
    pub tolerance: f64,
    pub results: Vec<IdentityResult>,
}

impl GauntReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &IdentityResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    /// `Err` naming the first failed identity and its worst coefficient.
    pub fn into_result(self) -> Result<GauntReport> {
        if let Some(f) = self.failures().next() {
            return Err(Error::Identity {
                identity: f.name.clone(),
                l: f.worst_l,
                m: f.worst_m,
                expected: f.worst_expected,
                actual: f.worst_actual,
            });
        }
        Ok(self)
    }
}

/// Projects every tabulated product on the grid and compares it with the
/// closed form, coefficient by coefficient up to the grid's band limit.
pub fn gaunt_table_check(grid: &Arc<SphGrid>, tolerance: f64) -> Result<GauntReport> {
    let band = grid.band_limit();
    if band < GAUNT_MIN_BAND_LIMIT {
        return Err(Error::Resolution(format!(
            "product table check needs band limit >= {GAUNT_MIN_BAND_LIMIT}, got {band}"
        )));
    }
    let mut results = Vec::new();
    for ident in product_identities() {
        let a = SphCoeffs::unit(2, 2, ident.left)?;
        let b = SphCoeffs::unit(2, 2, ident.right)?;
        let got = grid.product_project(&a, &b, band)?;
        let want = ident.expected(band)?;
        let mut worst = (0.0, 0usize, 0i32, 0.0, 0.0);
        let mut off = 0.0f64;
        for ((ix, g), (_, w)) in got.iter().zip(want.iter()) {
            let dev = (g - w).abs();
            if dev > worst.0 {
                worst = (dev, ix.l, ix.m, w, g);
            }
            if !matches!(ix.l, 0 | 2 | 4) {
                off = off.max(g.abs());
            }
        }
        results.push(IdentityResult {
            name: ident.name,
            max_deviation: worst.0,
            off_table_max: off,
            worst_l: worst.1,
            worst_m: worst.2,
            worst_expected: worst.3,
            worst_actual: worst.4,
            passed: worst.0 <= tolerance && off <= tolerance,
        });
    }
    Ok(GauntReport { band_limit: band, tolerance, results })
}

/// Coefficients of the coordinate function `x_i` (`i = 1, 2, 3`) on the unit
/// sphere; each is `√(4π/3)` times a degree-1 harmonic.
pub fn coordinate_function(i: usize, band_limit: usize) -> Result<SphCoeffs> {
    let m = match i {
        1 => 1,
        2 => -1,
        3 => 0,
        _ => return Err(Error::Domain(format!("coordinate index {i} outside 1..=3"))),
    };
    let mut c = SphCoeffs::zeros(band_limit.max(1));
    c.set(1, m, (4.0 * PI / 3.0).sqrt())?;
    Ok(c)
}

/// `∫_{S²} |∇x_i|² dμ` by quadrature of the pointwise squared gradient.
pub fn hersch_energy(i: usize, grid: &Arc<SphGrid>) -> Result<f64> {
    let x = coordinate_function(i, 1)?;
    Ok(grid.gradient_sq(&x)?.integrate())
}

/// `max |∫ Y_a Y_b dμ − δ_ab|` over all harmonics up to the grid's band limit.
pub fn orthonormality_defect(grid: &Arc<SphGrid>) -> Result<f64> {
    let band = grid.band_limit();
    let gram = grid.multiplication_matrix(&GridField::constant(grid, 1.0), band)?;
    let n = gram.nrows();
    let mut worst = 0.0f64;
    for a in 0..n {
        for b in 0..n {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((gram[(a, b)] - target).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::build_grid;

    #[test]
    fn fifteen_distinct_products() {
        let ids = product_identities();
        assert_eq!(ids.len(), 15);
        let mut pairs: Vec<_> = ids.iter().map(|i| (i.left.min(i.right), i.left.max(i.right))).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 15);
    }

    #[test]
    fn quoted_entries() {
        let g = build_grid(8).unwrap();
        let a = SphCoeffs::unit(2, 2, -1).unwrap();
        let b = SphCoeffs::unit(2, 2, 1).unwrap();
        let p = g.product_project(&a, &b, 8).unwrap();
        assert!((p.get(4, -2) - (5.0 / PI).sqrt() / 7.0).abs() < 1e-12);
        assert!((p.get(2, -2) - (15.0 / PI).sqrt() / 14.0).abs() < 1e-12);

        let a = SphCoeffs::unit(2, 2, 2).unwrap();
        let b = SphCoeffs::unit(2, 2, 0).unwrap();
        let p = g.product_project(&a, &b, 8).unwrap();
        assert!((p.get(4, 2) - (15.0 / PI).sqrt() / 14.0).abs() < 1e-12);
        assert!((p.get(2, 2) + (5.0 / PI).sqrt() / 7.0).abs() < 1e-12);
    }

    #[test]
    fn table_check_needs_band_eight() {
        let g = build_grid(6).unwrap();
        assert!(matches!(gaunt_table_check(&g, IDENTITY_TOLERANCE), Err(Error::Resolution(_))));
    }

    #[test]
    fn tampered_identity_is_named() {
        let g = build_grid(8).unwrap();
        let report = gaunt_table_check(&g, IDENTITY_TOLERANCE).unwrap();
        assert!(report.passed());
        let mut bad = report.clone();
        bad.results[3].passed = false;
        let err = bad.into_result().unwrap_err();
        assert!(err.to_string().contains("Y_{2,-1}^2"), "{err}");
    }

    #[test]
    fn hersch_values() {
        let g = build_grid(8).unwrap();
        for i in 1..=3 {
            let e = hersch_energy(i, &g).unwrap();
            assert!((e - 8.0 * PI / 3.0).abs() < 1e-12, "i={i}: {e}");
        }
        let total: f64 = (1..=3)
            .map(|i| {
                let x = g.synthesize(&coordinate_function(i, 1).unwrap()).unwrap();
                x.map(|v| v * v).integrate()
            })
            .sum();
        assert!((total - 4.0 * PI).abs() < 1e-12);
        assert!(hersch_energy(4, &g).is_err());
    }
}
