//! Rotationally symmetric 3-metrics `g = φ(r)⁻¹dr² + r²g_{S²}`.
//!
//! Centered spheres `{r = const}` are umbilic with `H = 2√φ/r`, so their
//! Hawking masses, the first-variation identities along the normal flow and
//! the candidate isoperimetric profile `I(V) = 4πr(V)²` all reduce to
//! closed forms in `φ` plus one radial volume integral.

mod metric;
mod profile;
mod quad;
mod sphere;

pub use metric::{hyperbolic_ball_area, hyperbolic_ball_volume, MetricKind, PhiFn, RadialMetric, VOLUME_TOL};
pub use profile::{
    bray_bound, euclidean_profile, geometric_grid, hawking_plus, hawking_plus_mode, monotonicity_report,
    normalize_mass, profile_curve, shi_bound_check, small_volume_asymptotics, small_volume_sequence, volumes_for_radii,
    MonotonicityReport, ProfileCurve, ProfileSample, ShiReport, SmallVolumeReport, BRAY_SLACK, CSV_HEADER,
    MONOTONICITY_SLACK, PROFILE_LABEL, SHI_TOL, SMALL_VOLUME_TOL,
};
pub use quad::integrate;
pub use sphere::{
    curvature_check, normal_flow_check, sphere_data, sphere_hawking_mass, stability_gap, CurvatureReport,
    CurvatureSample, FlowResiduals, SphereData, CURVATURE_TOL,
};
