use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::metric::{MetricKind, RadialMetric};
use crate::error::{Error, Result};
use crate::sphharm::{GridField, SphGrid};
use crate::surfspec::{AmbientMode, SurfaceGeometry};

/// Tolerance of the closed-form curvature checks.
pub const CURVATURE_TOL: f64 = 1e-10;

/// Geometry of the centered sphere of area radius `r`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SphereData {
    pub r: f64,
    pub area: f64,
    pub mean_curvature: f64,
    pub a_sq: f64,
    /// Centered spheres are umbilic.
    pub a0_sq: f64,
    pub ric_nn: f64,
    pub scalar_curvature: f64,
    pub volume: f64,
    /// Hawking mass in the standard normalization for the metric's mode.
    pub hawking_mass: f64,
}

impl SphereData {
    /// `K = R/2 − Ric(n,n) + ½(H² − |A|²)` of the induced metric.
    pub fn gauss_curvature(&self) -> f64 {
        0.5 * self.scalar_curvature - self.ric_nn + 0.5 * (self.mean_curvature.powi(2) - self.a_sq)
    }

    /// Constant fields on `grid` for the centered sphere, in the form used
    /// by the stable-CMC inequality.
    pub fn surface_geometry(&self, grid: &Arc<SphGrid>) -> SurfaceGeometry {
        SurfaceGeometry {
            mean_curvature: self.mean_curvature,
            a0_sq: GridField::constant(grid, self.a0_sq),
            scalar_curvature: GridField::constant(grid, self.scalar_curvature),
            area: self.area,
        }
    }
}

/// Hawking mass of a centered sphere, `(r/2)(1 − φ)` or `(r/2)(1 + r² − φ)`.
pub fn sphere_hawking_mass(r: f64, phi: f64, mode: AmbientMode) -> f64 {
    match mode {
        AmbientMode::Flat => 0.5 * r * (1.0 - phi),
        AmbientMode::Hyperbolic => 0.5 * r * (1.0 + r * r - phi),
    }
}

/// Closed-form scalars without the volume integral.
pub(crate) fn local_data(metric: &RadialMetric, r: f64) -> SphereData {
    let phi = metric.phi(r);
    let dphi = metric.phi_prime(r);
    let h = 2.0 * phi.sqrt() / r;
    SphereData {
        r,
        area: 4.0 * PI * r * r,
        mean_curvature: h,
        a_sq: 0.5 * h * h,
        a0_sq: 0.0,
        ric_nn: -dphi / r,
        scalar_curvature: -2.0 * dphi / r + 2.0 * (1.0 - phi) / (r * r),
        volume: f64::NAN,
        hawking_mass: sphere_hawking_mass(r, phi, metric.mode()),
    }
}

pub fn sphere_data(metric: &RadialMetric, r: f64) -> Result<SphereData> {
    metric.check_radius(r)?;
    let mut d = local_data(metric, r);
    d.volume = metric.volume(r)?;
    Ok(d)
}

/// `Λ₂ = 2/r² − (|A|² + Ric(n,n))` of the centered sphere.
pub fn stability_gap(metric: &RadialMetric, r: f64) -> f64 {
    let rr = r * r;
    2.0 / rr - 2.0 * metric.phi(r) / rr + metric.phi_prime(r) / r
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureSample {
    pub r: f64,
    pub scalar_curvature: f64,
    pub ric_nn: f64,
    /// Expected `R` for the family, where the family fixes it.
    pub expected_scalar: Option<f64>,
    pub gauss_closure_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub metric: String,
    pub samples: Vec<CurvatureSample>,
    pub min_scalar_curvature: f64,
    pub max_gauss_closure_error: f64,
}

impl CurvatureReport {
    /// `R ≥ 0` at every sample.
    pub fn certifies_nonnegative(&self) -> bool {
        !self.samples.is_empty() && self.min_scalar_curvature >= -CURVATURE_TOL
    }

    /// `R ≥ −6` at every sample.
    pub fn certifies_hyperbolic_bound(&self) -> bool {
        !self.samples.is_empty() && self.min_scalar_curvature >= -6.0 - CURVATURE_TOL
    }
}

fn regression(metric: &RadialMetric, r: f64, detail: String) -> Error {
    Error::FormulaRegression { metric: metric.label().to_string(), r, detail }
}

/// Compares `R` and `Ric(n,n)` with the values each family forces, and
/// checks that the Gauss equation returns `1/r²`.
pub fn curvature_check(metric: &RadialMetric, r_samples: &[f64]) -> Result<CurvatureReport> {
    let mut samples = Vec::with_capacity(r_samples.len());
    for &r in r_samples {
        metric.check_radius(r)?;
        let d = local_data(metric, r);
        let (expected_scalar, expected_ric) = match metric.kind() {
            MetricKind::Flat => (Some(0.0), Some(0.0)),
            MetricKind::Schwarzschild { .. } => (Some(0.0), None),
            MetricKind::Hyperbolic => (Some(-6.0), Some(-2.0)),
            MetricKind::AdsSchwarzschild { .. } => (Some(-6.0), None),
            MetricKind::MassProfile { .. } => (metric.mass_derivative(r).map(|dm| 4.0 * dm / (r * r)), None),
            MetricKind::Custom => (None, None),
        };
        if let Some(e) = expected_scalar {
            if (d.scalar_curvature - e).abs() > CURVATURE_TOL * (1.0 + e.abs()) {
                return Err(regression(metric, r, format!("R = {} but expected {e}", d.scalar_curvature)));
            }
        }
        if let Some(e) = expected_ric {
            if (d.ric_nn - e).abs() > CURVATURE_TOL * (1.0 + e.abs()) {
                return Err(regression(metric, r, format!("Ric(n,n) = {} but expected {e}", d.ric_nn)));
            }
        }
        let closure = (d.gauss_curvature() - 1.0 / (r * r)).abs();
        if closure > CURVATURE_TOL * (1.0 + 1.0 / (r * r)) {
            return Err(regression(metric, r, format!("Gauss equation off by {closure}")));
        }
        samples.push(CurvatureSample {
            r,
            scalar_curvature: d.scalar_curvature,
            ric_nn: d.ric_nn,
            expected_scalar,
            gauss_closure_error: closure,
        });
    }
    Ok(CurvatureReport {
        metric: metric.label().to_string(),
        min_scalar_curvature: samples.iter().map(|s| s.scalar_curvature).fold(f64::INFINITY, f64::min),
        max_gauss_closure_error: samples.iter().map(|s| s.gauss_closure_error).fold(0.0, f64::max),
        samples,
    })
}

/// Largest residuals of the first-variation identities along the
/// unit-speed normal flow of centered spheres.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FlowResiduals {
    /// `|dA/dt − ∫H dμ|`.
    pub area: f64,
    /// `|dV/dt − A|`.
    pub volume: f64,
    /// `|dH/dt + |A|² + Ric(n,n)|`.
    pub mean_curvature: f64,
}

impl FlowResiduals {
    pub fn max(&self) -> f64 {
        self.area.max(self.volume).max(self.mean_curvature)
    }
}

fn flow_rate(metric: &RadialMetric, r: f64) -> Result<f64> {
    let phi = metric.phi(r);
    if !(r > metric.r_min()) || !(phi > 0.0) || !phi.is_finite() {
        return Err(Error::Range(format!("normal flow left the domain of {} at r = {r}", metric.label())));
    }
    Ok(phi.sqrt())
}

/// Integrates `dr/dt = √φ` from `r0` over `[0, t_span]` with RK4 and checks
/// the variation identities by fourth-order centered differences.
pub fn normal_flow_check(metric: &RadialMetric, r0: f64, t_span: f64, step: f64) -> Result<FlowResiduals> {
    if !(t_span > 0.0) || !(step > 0.0) || !t_span.is_finite() {
        return Err(Error::Domain(format!("t_span {t_span} and step {step} must be positive")));
    }
    metric.check_radius(r0)?;
    let n = (t_span / step).round() as usize;
    if n < 4 {
        return Err(Error::Domain(format!("t_span {t_span} holds fewer than 4 steps of {step}")));
    }
    let h = t_span / n as f64;
    let mut rs = Vec::with_capacity(n + 1);
    rs.push(r0);
    let mut r = r0;
    for _ in 0..n {
        let k1 = flow_rate(metric, r)?;
        let k2 = flow_rate(metric, r + 0.5 * h * k1)?;
        let k3 = flow_rate(metric, r + 0.5 * h * k2)?;
        let k4 = flow_rate(metric, r + h * k3)?;
        r += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        flow_rate(metric, r)?;
        rs.push(r);
    }
    let data: Vec<SphereData> = rs.iter().map(|&r| local_data(metric, r)).collect();
    let dv: Vec<f64> = rs.windows(2).map(|w| metric.volume_increment(w[0], w[1] - w[0])).collect();

    let d = |f: &dyn Fn(usize) -> f64, i: usize| (8.0 * (f(i + 1) - f(i - 1)) - (f(i + 2) - f(i - 2))) / (12.0 * h);
    let mut out = FlowResiduals { area: 0.0, volume: 0.0, mean_curvature: 0.0 };
    for i in 2..n - 1 {
        let s = &data[i];
        let da = d(&|j| data[j].area, i);
        let dh = d(&|j| data[j].mean_curvature, i);
        let near = dv[i - 1] + dv[i];
        let far = dv[i - 2] + dv[i - 1] + dv[i] + dv[i + 1];
        let dvol = (8.0 * near - far) / (12.0 * h);
        out.area = out.area.max((da - s.mean_curvature * s.area).abs());
        out.volume = out.volume.max((dvol - s.area).abs());
        out.mean_curvature = out.mean_curvature.max((dh + s.a_sq + s.ric_nn).abs());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_unit_sphere() {
        let d = sphere_data(&RadialMetric::flat(), 1.0).unwrap();
        assert!((d.area - 4.0 * PI).abs() < 1e-15);
        assert!((d.mean_curvature - 2.0).abs() < 1e-15);
        assert!((d.volume - 4.0 * PI / 3.0).abs() < 1e-14);
        assert_eq!(d.hawking_mass, 0.0);
    }

    #[test]
    fn schwarzschild_r4() {
        let s = RadialMetric::schwarzschild(1.0).unwrap();
        let d = sphere_data(&s, 4.0).unwrap();
        assert!((d.mean_curvature - 2.0 * 0.5f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((d.hawking_mass - 1.0).abs() < 1e-14);
        assert!(d.scalar_curvature.abs() < 1e-12);
        assert!(matches!(sphere_data(&s, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn hyperbolic_geodesic_sphere_has_zero_mass() {
        let d = sphere_data(&RadialMetric::hyperbolic(), 1f64.sinh()).unwrap();
        assert!(d.hawking_mass.abs() < 1e-10);
        // ∫(H² − 4) over a geodesic sphere is 16π
        let defect = (d.mean_curvature.powi(2) - 4.0) * d.area;
        assert!((defect - 16.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn curvature_families() {
        let s = RadialMetric::schwarzschild(1.0).unwrap();
        let rep = curvature_check(&s, &[2.5, 5.0, 20.0]).unwrap();
        assert!(rep.samples.iter().all(|x| x.scalar_curvature.abs() <= 1e-12));
        // finite differences of φ reproduce the closed-form Ric(n,n)
        for x in &rep.samples {
            let h = 1e-5;
            let fd = (s.phi(x.r + h) - s.phi(x.r - h)) / (2.0 * h);
            assert!((x.ric_nn + fd / x.r).abs() < 1e-9);
        }
        let hy = curvature_check(&RadialMetric::hyperbolic(), &[3.0]).unwrap();
        assert!((hy.samples[0].scalar_curvature + 6.0).abs() < 1e-12);
        assert!((hy.samples[0].ric_nn + 2.0).abs() < 1e-12);
        let mp = curvature_check(&RadialMetric::mass_profile(1.0, 2.0).unwrap(), &[0.1, 1.0, 10.0]).unwrap();
        assert!(mp.certifies_nonnegative());
    }

    #[test]
    fn mislabelled_family_is_a_regression() {
        let phi = |r: f64| 1.0 - 2.0 / r;
        let m = RadialMetric::custom("c", Arc::new(phi), 2.0, AmbientMode::Flat).unwrap();
        assert!(curvature_check(&m, &[3.0]).is_ok());
        let m = RadialMetric::custom("c", Arc::new(|r: f64| 1.0 + r), 0.0, AmbientMode::Flat).unwrap();
        let rep = curvature_check(&m, &[1.0]).unwrap();
        assert!(!rep.certifies_nonnegative());
    }

    #[test]
    fn stability_gaps() {
        assert_eq!(stability_gap(&RadialMetric::flat(), 3.0), 0.0);
        let s = RadialMetric::schwarzschild(1.0).unwrap();
        assert!((stability_gap(&s, 4.0) - 6.0 / 64.0).abs() < 1e-15);
        assert!(stability_gap(&RadialMetric::hyperbolic(), 2.0).abs() < 1e-14);
    }

    #[test]
    fn flow_identities() {
        let cases = [
            (RadialMetric::flat(), 1.0, 1.0),
            (RadialMetric::schwarzschild(1.0).unwrap(), 3.0, 2.0),
            (RadialMetric::hyperbolic(), 1.0, 1.0),
        ];
        for (m, r0, t) in &cases {
            let res = normal_flow_check(m, *r0, *t, 1e-3).unwrap();
            assert!(res.max() <= 1e-8, "{}: {res:?}", m.label());
        }
    }
}
