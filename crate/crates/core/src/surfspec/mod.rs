//! Conformal sphere metrics `g = eᵘg₀`: curvature, area normalisation,
//! Schrödinger spectra `−Δ_g + q`, the mean-zero eigenvalue `Λ₂` and the
//! spectral identities that characterise round CMC spheres.

mod identities;
mod metric;
mod spectrum;

pub use identities::{
    cy_inequality_check, eigen_triple_check, grad_identity_check, willmore_and_hawking, AmbientMode, GradIdentity,
    SurfaceGeometry, TripleCheck, SOLUTION_RESIDUAL,
};
pub use metric::{gauss_curvature, normalize_area, ConformalMetric, DEFAULT_BASIS_BAND};
pub use spectrum::{
    esi_check, group_eigenvalues, lambda2_meanzero, spectrum, Eigenvalue, SpectralOperator, SpectrumReport,
    DEGENERACY_TOLERANCE,
};
