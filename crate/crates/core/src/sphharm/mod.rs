//! Real spherical harmonics on S²: evaluation, quadrature grids, transforms,
//! band-limited products and the degree-2 eigenspace `E₂ = ker(Δ + 6)`.

mod coeffs;
mod gaunt;
mod grid;
mod legendre;

pub use coeffs::{
    laplace_beltrami, project_e2, project_e2_perp, rotate_about_pole, E2Vector, HarmonicIndex, SphCoeffs,
};
pub use gaunt::{
    coordinate_function, gaunt_table_check, hersch_energy, orthonormality_defect, product_identities, GauntReport,
    IdentityResult, ProductIdentity, GAUNT_MIN_BAND_LIMIT, IDENTITY_TOLERANCE,
};
pub use grid::{build_grid, random_field, GridField, SphGrid, MIN_GRID_BAND_LIMIT};
pub use legendre::{eval_real_ylm, gauss_legendre, normalized_legendre, ylm_closed_form, ylm_recurrence};
