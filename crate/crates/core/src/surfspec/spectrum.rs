use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use super::metric::{ConformalMetric, DEFAULT_BASIS_BAND};
use crate::error::{Error, Result};
use crate::sphharm::{GridField, HarmonicIndex};

/// Eigenvalues closer than this to the first member of a group are merged.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Galerkin matrices of `(−Δ_{g₀} + eᵘq)ψ = λ eᵘψ` in the round harmonic basis.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    pub q: GridField,
    pub stiffness: DMatrix<f64>,
    pub mass: DMatrix<f64>,
}

impl SpectralOperator {
    pub fn assemble(metric: &ConformalMetric, q: &GridField) -> Result<Self> {
        let band = metric.basis_band();
        if band < DEFAULT_BASIS_BAND {
            return Err(Error::Precondition(format!("spectral basis band {band} below {DEFAULT_BASIS_BAND}")));
        }
        let grid = metric.grid();
        let weighted = q.zip_map(metric.conformal_factor(), |q, e| q * e)?;
        let mut stiffness = grid.multiplication_matrix(&weighted, band)?;
        for k in 0..stiffness.nrows() {
            stiffness[(k, k)] += HarmonicIndex::from_offset(k).laplace_eigenvalue();
        }
        let mass = grid.multiplication_matrix(metric.conformal_factor(), band)?;
        Ok(SpectralOperator { q: q.clone(), stiffness, mass })
    }

    /// Ascending eigenvalues with `mass`-orthonormal eigenvectors as columns.
    pub fn eigenpairs(&self) -> Result<(Vec<f64>, DMatrix<f64>)> {
        generalized_eigen(&self.stiffness, &self.mass)
    }

    /// Lowest eigenvalue on the subspace `∫ f dμ_g = 0`.
    ///
    /// The constraint row is `mass · 1`; a Householder reflection maps it to
    /// the first axis and the pencil is restricted to the remaining axes.
    pub fn lowest_meanzero(&self) -> Result<f64> {
        let g: DVector<f64> = self.mass.column(0).into_owned();
        let norm = g.norm();
        let mut v = g.clone();
        v[0] += if g[0] >= 0.0 { norm } else { -norm };
        let vv = v.dot(&v);
        let reflect = |a: &DMatrix<f64>| -> DMatrix<f64> {
            // H a H with H = I − 2vvᵀ/vᵀv
            let av = a * &v;
            let s = v.dot(&av);
            let mut out = a.clone();
            out -= (&av * v.transpose() + &v * av.transpose()) * (2.0 / vv);
            out += (&v * v.transpose()) * (4.0 * s / (vv * vv));
            out
        };
        let n = self.mass.nrows();
        let a = reflect(&self.stiffness).view((1, 1), (n - 1, n - 1)).into_owned();
        let m = reflect(&self.mass).view((1, 1), (n - 1, n - 1)).into_owned();
        let (vals, _) = generalized_eigen(&a, &m)?;
        Ok(vals[0])
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = s;
            a[(j, i)] = s;
        }
    }
}

fn generalized_eigen(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol =
        Cholesky::new(m.clone()).ok_or_else(|| Error::Assembly("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let x = l.solve_lower_triangular(a).ok_or_else(|| Error::Assembly("singular Cholesky factor".into()))?;
    let mut c =
        l.solve_lower_triangular(&x.transpose()).ok_or_else(|| Error::Assembly("singular Cholesky factor".into()))?;
    symmetrize(&mut c);
    let eig = SymmetricEigen::new(c);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, k| eig.eigenvectors[(r, order[k])]);
    let vectors =
        l.transpose().solve_upper_triangular(&y).ok_or_else(|| Error::Assembly("singular Cholesky factor".into()))?;
    Ok((values, vectors))
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct Eigenvalue {
    pub value: f64,
    pub multiplicity: usize,
}

/// Groups ascending values whose distance to the group's first member is at
/// most `tol`.
pub fn group_eigenvalues(values: &[f64], tol: f64) -> Vec<Eigenvalue> {
    let mut out: Vec<Eigenvalue> = Vec::new();
    let mut start = f64::NAN;
    for &v in values {
        match out.last_mut() {
            Some(last) if (v - start).abs() <= tol => last.multiplicity += 1,
            _ => {
                start = v;
                out.push(Eigenvalue { value: v, multiplicity: 1 });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub area: f64,
    pub eigenvalues: Vec<Eigenvalue>,
    /// Second distinct eigenvalue.
    pub lambda2: f64,
    /// Lowest eigenvalue over `g`-mean-zero functions.
    #[serde(rename = "Lambda2")]
    pub lambda2_meanzero: f64,
    /// `8π + ∫q dμ_g − λ₂·area`.
    pub esi_gap: f64,
    #[serde(skip)]
    pub raw: Vec<f64>,
}

/// Lowest `n_eigs` eigenvalues of `−Δ_g + q` together with `Λ₂` and the
/// conformal-volume gap.
pub fn spectrum(metric: &ConformalMetric, q: &GridField, n_eigs: usize) -> Result<SpectrumReport> {
    if n_eigs < 2 {
        return Err(Error::Config(format!("need at least two eigenvalues, asked for {n_eigs}")));
    }
    let op = SpectralOperator::assemble(metric, q)?;
    let (values, _) = op.eigenpairs()?;
    let raw: Vec<f64> = values.into_iter().take(n_eigs).collect();
    let eigenvalues = group_eigenvalues(&raw, DEGENERACY_TOLERANCE);
    let lambda2 = eigenvalues
        .get(1)
        .map(|e| e.value)
        .ok_or_else(|| Error::Config(format!("{n_eigs} eigenvalues form a single multiplet; request more")))?;
    let lambda2_meanzero = op.lowest_meanzero()?;
    let esi_gap = 8.0 * PI + metric.integrate(q)? - lambda2 * metric.area();
    Ok(SpectrumReport { area: metric.area(), eigenvalues, lambda2, lambda2_meanzero, esi_gap, raw })
}

/// `Λ₂` of `−Δ_g + q`.
pub fn lambda2_meanzero(metric: &ConformalMetric, q: &GridField) -> Result<f64> {
    SpectralOperator::assemble(metric, q)?.lowest_meanzero()
}

/// `[8π + ∫q dμ_g] − λ₂·|Σ|` for an area-normalised metric.
pub fn esi_check(metric: &ConformalMetric, q: &GridField) -> Result<f64> {
    if !metric.is_area_normalized() {
        return Err(Error::Precondition(format!("metric area {} is not 4π; normalise first", metric.area())));
    }
    let op = SpectralOperator::assemble(metric, q)?;
    let (values, _) = op.eigenpairs()?;
    let lambda2 = group_eigenvalues(&values, DEGENERACY_TOLERANCE)[1].value;
    Ok(8.0 * PI + metric.integrate(q)? - lambda2 * metric.area())
}
