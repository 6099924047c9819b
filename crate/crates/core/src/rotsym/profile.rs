use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;

use super::metric::{hyperbolic_ball_area, MetricKind, RadialMetric};
use super::sphere::{local_data, stability_gap, CurvatureReport};
use crate::error::{Error, Result};
use crate::surfspec::AmbientMode;

/// Label carried by every profile report.
pub const PROFILE_LABEL: &str = "centered-sphere candidate profile";

/// Forward-difference step of `I′₊`, relative to `V`.
const FORWARD_STEP: f64 = 1e-4;

/// Central-difference step of `I″`, relative to `V`.
const SECOND_STEP: f64 = 1e-3;

/// Slack on consecutive increments of `m⁺_H`.
pub const MONOTONICITY_SLACK: f64 = 1e-8;

/// Slack on the second-order differential inequality.
pub const BRAY_SLACK: f64 = 1e-6;

/// Tolerance of the isoperimetric comparison.
pub const SHI_TOL: f64 = 1e-8;

/// Required `|I/I_euclid − 1|` at the smallest volume.
pub const SMALL_VOLUME_TOL: f64 = 1e-4;

pub const CSV_HEADER: &str = "V,I,I_plus,H,mH_plus,mH_plus_normalized,R_at_r,stability_gap";

/// Euclidean isoperimetric profile `(36π)^{1/3} V^{2/3}`.
pub fn euclidean_profile(v: f64) -> f64 {
    (36.0 * PI).cbrt() * v.powf(2.0 / 3.0)
}

/// `√I (16π − I·I′₊²)`.
pub fn hawking_plus(i: f64, i_plus: f64) -> f64 {
    hawking_plus_mode(i, i_plus, AmbientMode::Flat)
}

/// [`hawking_plus`] with `I′₊² − 4` in place of `I′₊²` for hyperbolic mode.
pub fn hawking_plus_mode(i: f64, i_plus: f64, mode: AmbientMode) -> f64 {
    let energy = match mode {
        AmbientMode::Flat => i_plus * i_plus,
        AmbientMode::Hyperbolic => i_plus * i_plus - 4.0,
    };
    i.sqrt() * (16.0 * PI - i * energy)
}

/// Divides an unnormalized mass by `(16π)^{3/2}`.
pub fn normalize_mass(m: f64) -> f64 {
    m / (16.0 * PI).powf(1.5)
}

/// `n` points from `lo` to `hi` in geometric progression.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::Domain(format!("geometric grid needs 0 < {lo} < {hi} and n = {n} >= 2")));
    }
    let q = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n).map(|k| if k + 1 == n { hi } else { lo * (q * k as f64).exp() }).collect())
}

/// Volumes enclosed by `n` geometrically spaced radii in `[r_lo, r_hi]`.
pub fn volumes_for_radii(metric: &RadialMetric, r_lo: f64, r_hi: f64, n: usize) -> Result<Vec<f64>> {
    geometric_grid(r_lo, r_hi, n)?.into_iter().map(|r| metric.volume(r)).collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfileSample {
    pub v: f64,
    pub r: f64,
    pub i: f64,
    /// Richardson-extrapolated forward difference quotient.
    pub i_plus: f64,
    /// Central second difference quotient.
    pub i_second: f64,
    pub mean_curvature: f64,
    pub mh_plus: f64,
    pub mh_plus_normalized: f64,
    pub scalar_curvature: f64,
    pub stability_gap: f64,
}

#[derive(Debug, Clone)]
pub struct ProfileCurve {
    pub metric: RadialMetric,
    pub samples: Vec<ProfileSample>,
}

impl ProfileCurve {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for p in &self.samples {
            let _ = writeln!(
                s,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                p.v,
                p.i,
                p.i_plus,
                p.mean_curvature,
                p.mh_plus,
                p.mh_plus_normalized,
                p.scalar_curvature,
                p.stability_gap
            );
        }
        s
    }

    /// Largest `|I′₊ − H|`; centered-sphere profiles are smooth, so the
    /// one-sided slopes agree with the mean curvature.
    pub fn max_slope_defect(&self) -> f64 {
        self.samples.iter().map(|p| (p.i_plus - p.mean_curvature).abs()).fold(0.0, f64::max)
    }
}

/// `(I(V + h) − I(V))/h` with the area increment taken from the radius
/// increment, free of cancellation.
fn forward_quotient(metric: &RadialMetric, r: f64, h: f64) -> Result<f64> {
    let dr = metric.radius_increment(r, h)?;
    Ok(4.0 * PI * dr * (2.0 * r + dr) / h)
}

fn area_increment(metric: &RadialMetric, r: f64, dv: f64) -> Result<f64> {
    let dr = metric.radius_increment(r, dv)?;
    Ok(4.0 * PI * dr * (2.0 * r + dr))
}

/// Forward slope with two Richardson levels on `h, h/2, h/4`.
fn right_derivative(metric: &RadialMetric, r: f64, v: f64) -> Result<f64> {
    let h = FORWARD_STEP * v;
    let d0 = forward_quotient(metric, r, h)?;
    let d1 = forward_quotient(metric, r, 0.5 * h)?;
    let d2 = forward_quotient(metric, r, 0.25 * h)?;
    let r0 = 2.0 * d1 - d0;
    let r1 = 2.0 * d2 - d1;
    Ok((4.0 * r1 - r0) / 3.0)
}

fn second_derivative(metric: &RadialMetric, r: f64, v: f64) -> Result<f64> {
    let h = SECOND_STEP * v;
    let up = area_increment(metric, r, h)?;
    let down = area_increment(metric, r, -h)?;
    Ok((up + down) / (h * h))
}

/// Samples the centered-sphere profile at the volumes `v_grid`.
pub fn profile_curve(metric: &RadialMetric, v_grid: &[f64]) -> Result<ProfileCurve> {
    if v_grid.is_empty() {
        return Err(Error::Domain("empty volume grid".into()));
    }
    if v_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("volume grid must be strictly increasing".into()));
    }
    let mode = metric.mode();
    let mut samples = Vec::with_capacity(v_grid.len());
    for &v in v_grid {
        let r = metric.radius_for_volume(v)?;
        let d = local_data(metric, r);
        let i_plus = right_derivative(metric, r, v)?;
        let mh_plus = hawking_plus_mode(d.area, i_plus, mode);
        samples.push(ProfileSample {
            v,
            r,
            i: d.area,
            i_plus,
            i_second: second_derivative(metric, r, v)?,
            mean_curvature: d.mean_curvature,
            mh_plus,
            mh_plus_normalized: normalize_mass(mh_plus),
            scalar_curvature: d.scalar_curvature,
            stability_gap: stability_gap(metric, r),
        });
    }
    Ok(ProfileCurve { metric: metric.clone(), samples })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub profile: &'static str,
    pub metric: String,
    pub samples: usize,
    /// Smallest `m⁺_H(V_{k+1}) − m⁺_H(V_k)`, normalized.
    pub min_mass_increment: f64,
    pub min_increment_at_v: f64,
    pub mass_nondecreasing: bool,
    /// Smallest `(16π − 3I′²I)/(4I²) − I″` over interior samples.
    pub min_bray_margin: f64,
    pub min_bray_margin_at_v: f64,
    pub bray_holds: bool,
    pub max_slope_defect: f64,
    pub notes: Vec<String>,
}

impl MonotonicityReport {
    pub fn holds(&self) -> bool {
        self.mass_nondecreasing && self.bray_holds
    }
}

/// Right-hand side of the second-order inequality,
/// `(16π − 3I′²I)/(4I²)`, with `I′² − 4` in hyperbolic mode.
pub fn bray_bound(i: f64, i_plus: f64, mode: AmbientMode) -> f64 {
    let s = match mode {
        AmbientMode::Flat => i_plus * i_plus,
        AmbientMode::Hyperbolic => i_plus * i_plus - 4.0,
    };
    (16.0 * PI - 3.0 * s * i) / (4.0 * i * i)
}

pub fn monotonicity_report(curve: &ProfileCurve) -> Result<MonotonicityReport> {
    let s = &curve.samples;
    if s.len() < 3 {
        return Err(Error::Domain(format!("monotonicity needs >= 3 samples, got {}", s.len())));
    }
    let (min_inc, at_inc) = s
        .windows(2)
        .map(|w| (w[1].mh_plus_normalized - w[0].mh_plus_normalized, w[1].v))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    let mode = curve.metric.mode();
    let (min_bray, at_bray) = s[1..s.len() - 1]
        .iter()
        .map(|p| (bray_bound(p.i, p.i_plus, mode) - p.i_second, p.v))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    let mut notes = Vec::new();
    if curve.metric.kind() == MetricKind::Custom {
        notes.push("asymptotic decay of a custom metric is not verified".to_string());
    }
    if matches!(curve.metric.kind(), MetricKind::MassProfile { .. }) {
        notes.push("centered spheres are not known to minimize area in this family".to_string());
    }
    Ok(MonotonicityReport {
        profile: PROFILE_LABEL,
        metric: curve.metric.label().to_string(),
        samples: s.len(),
        min_mass_increment: min_inc,
        min_increment_at_v: at_inc,
        mass_nondecreasing: min_inc >= -MONOTONICITY_SLACK,
        min_bray_margin: min_bray,
        min_bray_margin_at_v: at_bray,
        bray_holds: min_bray >= -BRAY_SLACK,
        max_slope_defect: curve.max_slope_defect(),
        notes,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ShiReport {
    pub profile: &'static str,
    pub metric: String,
    pub mode: AmbientMode,
    /// Largest `I − I_model` over the samples.
    pub max_gap: f64,
    pub max_gap_at_v: f64,
    pub min_gap: f64,
    pub bound_holds: bool,
    /// Every sample on the model profile.
    pub equality: bool,
    /// Every sample strictly below the model profile.
    pub strict: bool,
}

/// Compares the profile with the Euclidean or hyperbolic ball profile.
///
/// `certificate` must come from [`curvature_check`](super::curvature_check)
/// on the same metric and show `R ≥ 0` (flat) or `R ≥ −6` (hyperbolic).
/// Horizon metrics are rejected.
pub fn shi_bound_check(curve: &ProfileCurve, mode: AmbientMode, certificate: &CurvatureReport) -> Result<ShiReport> {
    if curve.metric.has_horizon() {
        return Err(Error::Precondition(format!(
            "{} is measured from a horizon boundary; the comparison needs a complete metric",
            curve.metric.label()
        )));
    }
    if certificate.metric != curve.metric.label() {
        return Err(Error::Precondition(format!(
            "curvature certificate is for {}, not {}",
            certificate.metric,
            curve.metric.label()
        )));
    }
    let certified = match mode {
        AmbientMode::Flat => certificate.certifies_nonnegative(),
        AmbientMode::Hyperbolic => certificate.certifies_hyperbolic_bound(),
    };
    if !certified {
        return Err(Error::Precondition(format!(
            "scalar curvature of {} not certified for the {mode:?} comparison (min R = {})",
            curve.metric.label(),
            certificate.min_scalar_curvature
        )));
    }
    let mut gaps = Vec::with_capacity(curve.samples.len());
    for p in &curve.samples {
        let model = match mode {
            AmbientMode::Flat => euclidean_profile(p.v),
            AmbientMode::Hyperbolic => hyperbolic_ball_area(p.v)?,
        };
        gaps.push((p.i - model, p.v, p.i));
    }
    let (max_gap, at) = gaps.iter().fold((f64::NEG_INFINITY, f64::NAN), |a, g| if g.0 > a.0 { (g.0, g.1) } else { a });
    Ok(ShiReport {
        profile: PROFILE_LABEL,
        metric: curve.metric.label().to_string(),
        mode,
        max_gap,
        max_gap_at_v: at,
        min_gap: gaps.iter().map(|g| g.0).fold(f64::INFINITY, f64::min),
        bound_holds: max_gap <= SHI_TOL,
        equality: gaps.iter().all(|g| g.0.abs() <= SHI_TOL * g.2.max(1.0)),
        strict: gaps.iter().all(|g| g.0 < 0.0),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SmallVolumeReport {
    pub metric: String,
    pub volumes: Vec<f64>,
    /// `I(V) / ((36π)^{1/3} V^{2/3})`.
    pub ratios: Vec<f64>,
    /// Linear extrapolation in `V^{2/3}` from the two smallest volumes.
    pub extrapolated_limit: f64,
    pub deviation_at_smallest: f64,
    pub holds: bool,
}

/// Volumes `10⁻², …, 10⁻⁸` used by [`small_volume_asymptotics`].
pub fn small_volume_sequence() -> Vec<f64> {
    (2..=8).map(|k| 10f64.powi(-k)).collect()
}

/// Ratio of the profile to the Euclidean one along a decreasing volume
/// sequence.
pub fn small_volume_asymptotics(metric: &RadialMetric, volumes: &[f64]) -> Result<SmallVolumeReport> {
    if metric.has_horizon() {
        return Err(Error::Precondition(format!(
            "{} has a horizon at r = {}; small volumes are not available",
            metric.label(),
            metric.r_min()
        )));
    }
    if volumes.len() < 2 {
        return Err(Error::Domain("small-volume sequence needs >= 2 volumes".into()));
    }
    let mut ratios = Vec::with_capacity(volumes.len());
    for &v in volumes {
        let r = metric.radius_for_volume(v)?;
        ratios.push(4.0 * PI * r * r / euclidean_profile(v));
    }
    let n = volumes.len();
    let (x0, x1) = (volumes[n - 2].powf(2.0 / 3.0), volumes[n - 1].powf(2.0 / 3.0));
    let (y0, y1) = (ratios[n - 2], ratios[n - 1]);
    let limit = y1 - x1 * (y0 - y1) / (x0 - x1);
    let dev = (ratios[n - 1] - 1.0).abs();
    Ok(SmallVolumeReport {
        metric: metric.label().to_string(),
        volumes: volumes.to_vec(),
        ratios,
        extrapolated_limit: limit,
        deviation_at_smallest: dev,
        holds: dev <= SMALL_VOLUME_TOL,
    })
}
