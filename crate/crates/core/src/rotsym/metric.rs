use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::quad::{gk15, integrate};
use crate::error::{Error, Result};
use crate::surfspec::AmbientMode;

/// Relative tolerance of adaptive volume quadrature.
pub const VOLUME_TOL: f64 = 1e-10;

pub type PhiFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    Flat,
    Schwarzschild { m: f64 },
    Hyperbolic,
    AdsSchwarzschild { m: f64 },
    MassProfile { m_inf: f64, a: f64 },
    Custom,
}

/// `g = φ(r)⁻¹dr² + r²g_{S²}` on `r > r_min`.
#[derive(Clone)]
pub struct RadialMetric {
    kind: MetricKind,
    mode: AmbientMode,
    r_min: f64,
    custom: Option<PhiFn>,
    label: String,
}

impl fmt::Debug for RadialMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialMetric")
            .field("label", &self.label)
            .field("kind", &self.kind)
            .field("mode", &self.mode)
            .field("r_min", &self.r_min)
            .finish()
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} = {v} must be positive and finite")))
    }
}

impl RadialMetric {
    fn build(kind: MetricKind, mode: AmbientMode, r_min: f64, label: String) -> Self {
        RadialMetric { kind, mode, r_min, custom: None, label }
    }

    pub fn flat() -> Self {
        Self::build(MetricKind::Flat, AmbientMode::Flat, 0.0, "flat".into())
    }

    /// `φ = 1 − 2m/r`, volumes measured from the horizon `r = 2m`.
    pub fn schwarzschild(m: f64) -> Result<Self> {
        positive("m", m)?;
        Ok(Self::build(MetricKind::Schwarzschild { m }, AmbientMode::Flat, 2.0 * m, format!("schwarzschild(m={m})")))
    }

    /// `φ = 1 + r²`.
    pub fn hyperbolic() -> Self {
        Self::build(MetricKind::Hyperbolic, AmbientMode::Hyperbolic, 0.0, "hyperbolic".into())
    }

    /// `φ = 1 + r² − 2m/r`, volumes measured from the root of `r³ + r − 2m`.
    pub fn ads_schwarzschild(m: f64) -> Result<Self> {
        positive("m", m)?;
        // r³ + r − 2m is increasing; Newton from r = min(2m, (2m)^{1/3}) stays above the root
        let mut r = (2.0 * m).min((2.0 * m).cbrt()).max(1e-300);
        for _ in 0..200 {
            let f = r * r * r + r - 2.0 * m;
            let d = 3.0 * r * r + 1.0;
            let next = r - f / d;
            if (next - r).abs() <= 1e-16 * r {
                r = next;
                break;
            }
            r = next;
        }
        Ok(Self::build(
            MetricKind::AdsSchwarzschild { m },
            AmbientMode::Hyperbolic,
            r,
            format!("ads_schwarzschild(m={m})"),
        ))
    }

    /// `φ = 1 − 2m(r)/r` with `m(r) = m∞ r³/(r³ + a³)`; rejected unless
    /// `2m(r)/r < 1` everywhere.
    pub fn mass_profile(m_inf: f64, a: f64) -> Result<Self> {
        positive("m_inf", m_inf)?;
        positive("a", a)?;
        // the maximum of 2m(r)/r sits at r = 2^{1/3} a
        let peak = 2f64.powf(5.0 / 3.0) * m_inf / (3.0 * a);
        let metric = Self::build(
            MetricKind::MassProfile { m_inf, a },
            AmbientMode::Flat,
            0.0,
            format!("mass_profile(m_inf={m_inf}, a={a})"),
        );
        let sampled = (0..2000)
            .map(|k| a * 10f64.powf(-3.0 + 6.0 * k as f64 / 1999.0))
            .map(|r| 1.0 - metric.phi(r))
            .fold(0.0, f64::max);
        if peak >= 1.0 || sampled >= 1.0 {
            return Err(Error::Domain(format!(
                "mass_profile(m_inf={m_inf}, a={a}) has a horizon: max 2m(r)/r = {peak:.6}"
            )));
        }
        Ok(metric)
    }

    /// A user-supplied `φ`, positive on `(r_min, ∞)`.
    pub fn custom(label: &str, phi: PhiFn, r_min: f64, mode: AmbientMode) -> Result<Self> {
        if !(r_min >= 0.0 && r_min.is_finite()) {
            return Err(Error::Domain(format!("r_min = {r_min} must be finite and >= 0")));
        }
        let mut m = Self::build(MetricKind::Custom, mode, r_min, label.to_string());
        m.custom = Some(phi);
        Ok(m)
    }

    pub fn with_mode(mut self, mode: AmbientMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn kind(&self) -> MetricKind {
        self.kind
    }

    pub fn mode(&self) -> AmbientMode {
        self.mode
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn has_horizon(&self) -> bool {
        self.r_min > 0.0
    }

    /// `m(r)` for the Schwarzschild-type families.
    pub fn mass_function(&self, r: f64) -> Option<f64> {
        match self.kind {
            MetricKind::Schwarzschild { m } | MetricKind::AdsSchwarzschild { m } => Some(m),
            MetricKind::MassProfile { m_inf, a } => Some(m_inf * r.powi(3) / (r.powi(3) + a.powi(3))),
            MetricKind::Flat | MetricKind::Hyperbolic => Some(0.0),
            MetricKind::Custom => None,
        }
    }

    /// `m′(r)` for the Schwarzschild-type families.
    pub fn mass_derivative(&self, r: f64) -> Option<f64> {
        match self.kind {
            MetricKind::MassProfile { m_inf, a } => {
                let a3 = a.powi(3);
                Some(3.0 * m_inf * r * r * a3 / (r.powi(3) + a3).powi(2))
            }
            MetricKind::Custom => None,
            _ => Some(0.0),
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        match self.kind {
            MetricKind::Flat => 1.0,
            MetricKind::Schwarzschild { m } => (r - 2.0 * m) / r,
            MetricKind::Hyperbolic => 1.0 + r * r,
            MetricKind::AdsSchwarzschild { m } => 1.0 + r * r - 2.0 * m / r,
            MetricKind::MassProfile { m_inf, a } => 1.0 - 2.0 * m_inf * r * r / (r.powi(3) + a.powi(3)),
            MetricKind::Custom => (self.custom.as_ref().expect("custom φ"))(r),
        }
    }

    pub fn phi_prime(&self, r: f64) -> f64 {
        match self.kind {
            MetricKind::Flat => 0.0,
            MetricKind::Schwarzschild { m } => 2.0 * m / (r * r),
            MetricKind::Hyperbolic => 2.0 * r,
            MetricKind::AdsSchwarzschild { m } => 2.0 * r + 2.0 * m / (r * r),
            MetricKind::MassProfile { .. } => {
                let m = self.mass_function(r).unwrap_or(0.0);
                let dm = self.mass_derivative(r).unwrap_or(0.0);
                2.0 * m / (r * r) - 2.0 * dm / r
            }
            MetricKind::Custom => {
                let h = 1e-5 * r.max(1.0);
                let f = |x| self.phi(x);
                (f(r - 2.0 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2.0 * h)) / (12.0 * h)
            }
        }
    }

    /// `φ(r_min + t²)/t²` near a horizon, written without cancellation for
    /// the closed-form families.
    fn phi_over_gap(&self, t: f64) -> f64 {
        let t2 = t * t;
        let s = self.r_min + t2;
        match self.kind {
            MetricKind::Schwarzschild { .. } => 1.0 / s,
            MetricKind::AdsSchwarzschild { .. } => {
                let r0 = self.r_min;
                (3.0 * r0 * r0 + 1.0 + 3.0 * r0 * t2 + t2 * t2) / s
            }
            _ => self.phi(s) / t2,
        }
    }

    /// `dV/dr = 4πr²/√φ`.
    pub fn volume_density(&self, r: f64) -> f64 {
        4.0 * PI * r * r / self.phi(r).sqrt()
    }

    pub(crate) fn check_radius(&self, r: f64) -> Result<()> {
        if !(r > self.r_min) || !r.is_finite() {
            return Err(Error::Domain(format!("radius {r} not above r_min = {} for {}", self.r_min, self.label)));
        }
        if !(self.phi(r) > 0.0) {
            return Err(Error::Domain(format!("φ({r}) = {} is not positive for {}", self.phi(r), self.label)));
        }
        Ok(())
    }

    /// `V(r) = ∫_{r_min}^r 4πs² φ(s)^{−1/2} ds`.
    ///
    /// Across a horizon the substitution `s = r_min + t²` removes the
    /// inverse square-root singularity.
    pub fn volume(&self, r: f64) -> Result<f64> {
        self.check_radius(r)?;
        if self.has_horizon() {
            let r0 = self.r_min;
            integrate(
                |t| {
                    let s = r0 + t * t;
                    8.0 * PI * s * s / self.phi_over_gap(t).sqrt()
                },
                0.0,
                (r - r0).sqrt(),
                VOLUME_TOL,
            )
        } else {
            integrate(|s| self.volume_density(s), 0.0, r, VOLUME_TOL)
        }
    }

    /// `V(r + dr) − V(r)` on one Kronrod panel, for short intervals.
    pub fn volume_increment(&self, r: f64, dr: f64) -> f64 {
        gk15(&|s| self.volume_density(s), r, r + dr).0
    }

    /// The `dr` with `V(r + dr) − V(r) = dv`, by Newton's method on the
    /// single-panel increment.
    pub fn radius_increment(&self, r: f64, dv: f64) -> Result<f64> {
        let mut dr = dv / self.volume_density(r);
        let mut last = f64::INFINITY;
        for _ in 0..60 {
            if !(r + dr > self.r_min) {
                dr = 0.5 * (self.r_min - r);
            }
            let g = self.volume_increment(r, dr) - dv;
            let step = g / self.volume_density(r + dr);
            // stop once Newton corrections stop shrinking at rounding level
            if step.abs() <= 4.0 * f64::EPSILON * dr.abs() || step.abs() >= last {
                return Ok(dr);
            }
            last = step.abs();
            dr -= step;
        }
        if last <= 1e-13 * dr.abs() {
            return Ok(dr);
        }
        Err(Error::Integration(format!("radius increment at r = {r} for dV = {dv} did not settle")))
    }

    /// Area radius enclosing volume `v`, by bracketing and bisection to
    /// `1e−12` relative followed by Newton polishing.
    pub fn radius_for_volume(&self, v: f64) -> Result<f64> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("volume {v} must be positive and finite")));
        }
        let mut lo = self.r_min;
        let mut hi = if self.r_min > 0.0 { 2.0 * self.r_min } else { (3.0 * v / (4.0 * PI)).cbrt() };
        let mut iters = 0;
        while self.volume(hi)? < v {
            lo = hi;
            hi *= 2.0;
            iters += 1;
            if iters > 200 {
                return Err(Error::Domain(format!("volume {v} beyond the metric's range")));
            }
        }
        while hi - lo > 1e-12 * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= self.r_min || mid == lo || mid == hi {
                break;
            }
            if self.volume(mid)? < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut r = 0.5 * (lo + hi);
        if !(r > self.r_min) {
            r = hi;
        }
        for _ in 0..3 {
            let next = r - (self.volume(r)? - v) / self.volume_density(r);
            if next > self.r_min {
                r = next;
            }
        }
        Ok(r)
    }
}

/// Volume of the geodesic ball of radius `ρ` in hyperbolic space,
/// `π(sinh 2ρ − 2ρ)`.
pub fn hyperbolic_ball_volume(rho: f64) -> f64 {
    let x = 2.0 * rho;
    if x.abs() < 0.5 {
        // sinh x − x = Σ_{k≥1} x^{2k+1}/(2k+1)!
        let mut term = x * x * x / 6.0;
        let mut acc = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * acc.abs() {
            term *= x * x / ((k + 1.0) * (k + 2.0));
            acc += term;
            k += 2.0;
        }
        PI * acc
    } else {
        PI * (x.sinh() - x)
    }
}

/// Area `4π sinh²ρ` of the hyperbolic ball of volume `v`.
pub fn hyperbolic_ball_area(v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Domain(format!("volume {v} must be positive and finite")));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    while hyperbolic_ball_volume(hi) < v {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hyperbolic_ball_volume(mid) < v {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let mut rho = 0.5 * (lo + hi);
    for _ in 0..3 {
        rho -= (hyperbolic_ball_volume(rho) - v) / (4.0 * PI * rho.sinh().powi(2));
    }
    Ok(4.0 * PI * rho.sinh().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_volume_and_inverse() {
        let f = RadialMetric::flat();
        assert!((f.volume(1.0).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        let r = f.radius_for_volume(4.0 * PI / 3.0).unwrap();
        assert!((r - 1.0).abs() < 1e-14);
        assert!(matches!(f.volume(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn horizon_volume_matches_direct_quadrature() {
        let s = RadialMetric::schwarzschild(1.0).unwrap();
        let v = s.volume(5.0).unwrap();
        // oracle: direct integral away from the horizon plus a closed-form
        // leading term on the first sliver
        let eps = 1e-6f64;
        let head = integrate(|x| s.volume_density(x), 2.0 + eps, 5.0, 1e-12).unwrap();
        let sliver = 4.0 * PI * 4.0 * 2.0 * (eps * 2.0).sqrt();
        assert!((v - head - sliver).abs() < 1e-6 * v, "{v} vs {}", head + sliver);
        let r = s.radius_for_volume(v).unwrap();
        assert!((r - 5.0).abs() < 1e-12);
    }

    #[test]
    fn ads_horizon_root() {
        let a = RadialMetric::ads_schwarzschild(1.0).unwrap();
        let r = a.r_min();
        assert!((r * r * r + r - 2.0).abs() < 1e-14);
        assert!(a.volume(3.0).unwrap() > 0.0);
    }

    #[test]
    fn mass_profile_horizon_test() {
        assert!(RadialMetric::mass_profile(1.0, 2.0).is_ok());
        assert!(RadialMetric::mass_profile(1.0, 1.0).is_err());
        assert!(RadialMetric::mass_profile(1.0, 1.06).is_ok());
    }

    #[test]
    fn closed_form_derivatives_match_differences() {
        let ms = [
            RadialMetric::schwarzschild(1.0).unwrap(),
            RadialMetric::hyperbolic(),
            RadialMetric::ads_schwarzschild(0.5).unwrap(),
            RadialMetric::mass_profile(1.0, 2.0).unwrap(),
        ];
        for m in &ms {
            for r in [2.5, 5.0, 20.0] {
                let h = 1e-4 * r;
                let fd = (m.phi(r + h) - m.phi(r - h)) / (2.0 * h);
                assert!((fd - m.phi_prime(r)).abs() < 1e-7 * (1.0 + fd.abs()), "{}", m.label());
            }
        }
    }

    #[test]
    fn hyperbolic_ball_against_quadrature() {
        for rho in [1e-3, 0.2, 1.0, 2.5] {
            let q = integrate(|t: f64| 4.0 * PI * t.sinh().powi(2), 0.0, rho, 1e-13).unwrap();
            assert!((hyperbolic_ball_volume(rho) - q).abs() <= 1e-12 * q);
            let a = hyperbolic_ball_area(q).unwrap();
            assert!((a - 4.0 * PI * rho.sinh().powi(2)).abs() <= 1e-10 * a);
        }
    }

    #[test]
    fn increments_invert() {
        let s = RadialMetric::schwarzschild(1.0).unwrap();
        let dr = s.radius_increment(3.0, 0.5).unwrap();
        assert!((s.volume_increment(3.0, dr) - 0.5).abs() < 1e-14);
    }
}
