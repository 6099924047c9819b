//! Orthonormal associated Legendre functions and real spherical harmonics.
//!
//! Real harmonics follow the table convention: `m > 0` carries `cos(mφ)`,
//! `m < 0` carries `sin(|m|φ)`, and no Condon-Shortley phase is applied, so
//! every harmonic is positive near `θ = 0⁺, φ = 0⁺` in its leading term.

use std::f64::consts::PI;

use super::HarmonicIndex;
use crate::error::{Error, Result};

/// Position of `(l, m)` with `0 <= m <= l` in a triangular table.
#[inline]
pub(crate) fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Number of entries of a triangular `(l, m >= 0)` table up to degree `lmax`.
#[inline]
pub(crate) fn tri_len(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Fills `out` with the fully normalised associated Legendre functions
/// `P̄_l^m(x)` for `0 <= m <= l <= lmax`, in triangular order.
///
/// The normalisation makes `P̄_l^m(cos θ)·e^{imφ}` orthonormal on the unit
/// sphere. The sector values `P̄_m^m` are built by the product recurrence and
/// every column is then swept upwards in `l` with the stable three-term
/// recurrence.
pub fn normalized_legendre(lmax: usize, x: f64, out: &mut [f64]) {
    assert!(out.len() >= tri_len(lmax));
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (0.25 / PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= s * ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt();
        }
        out[tri(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mf = m as f64;
        out[tri(m + 1, m)] = x * (2.0 * mf + 3.0).sqrt() * pmm;
        for l in (m + 2)..=lmax {
            let lf = l as f64;
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let l1 = lf - 1.0;
            let b = ((l1 * l1 - mf * mf) / (4.0 * l1 * l1 - 1.0)).sqrt();
            out[tri(l, m)] = a * (x * out[tri(l - 1, m)] - b * out[tri(l - 2, m)]);
        }
    }
}

/// Real orthonormal harmonic evaluated by the Legendre recurrence, any degree.
pub fn ylm_recurrence(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<f64> {
    idx.validate()?;
    let l = idx.l;
    let am = idx.m.unsigned_abs() as usize;
    let mut table = vec![0.0; tri_len(l)];
    normalized_legendre(l, theta.cos(), &mut table);
    let p = table[tri(l, am)];
    Ok(match idx.m {
        0 => p,
        m if m > 0 => std::f64::consts::SQRT_2 * p * (m as f64 * phi).cos(),
        m => std::f64::consts::SQRT_2 * p * ((-m) as f64 * phi).sin(),
    })
}

/// Closed-form real harmonics for `l <= 4`; `None` above that degree.
pub fn ylm_closed_form(idx: HarmonicIndex, theta: f64, phi: f64) -> Option<f64> {
    let (st, ct) = theta.sin_cos();
    let v = match (idx.l, idx.m) {
        (0, 0) => 0.5 * (1.0 / PI).sqrt(),

        (1, -1) => (3.0 / (4.0 * PI)).sqrt() * st * phi.sin(),
        (1, 0) => (3.0 / (4.0 * PI)).sqrt() * ct,
        (1, 1) => (3.0 / (4.0 * PI)).sqrt() * st * phi.cos(),

        (2, -2) => 0.25 * (15.0 / PI).sqrt() * st * st * (2.0 * phi).sin(),
        (2, -1) => 0.25 * (15.0 / PI).sqrt() * (2.0 * theta).sin() * phi.sin(),
        (2, 0) => 0.25 * (5.0 / PI).sqrt() * (3.0 * ct * ct - 1.0),
        (2, 1) => 0.25 * (15.0 / PI).sqrt() * (2.0 * theta).sin() * phi.cos(),
        (2, 2) => 0.25 * (15.0 / PI).sqrt() * st * st * (2.0 * phi).cos(),

        (3, -3) => 0.25 * (35.0 / (2.0 * PI)).sqrt() * st.powi(3) * (3.0 * phi).sin(),
        (3, -2) => 0.25 * (105.0 / PI).sqrt() * st * st * ct * (2.0 * phi).sin(),
        (3, -1) => 0.125 * (42.0 / PI).sqrt() * st * (5.0 * ct * ct - 1.0) * phi.sin(),
        (3, 0) => 0.25 * (7.0 / PI).sqrt() * (5.0 * ct.powi(3) - 3.0 * ct),
        (3, 1) => 0.125 * (42.0 / PI).sqrt() * st * (5.0 * ct * ct - 1.0) * phi.cos(),
        (3, 2) => 0.25 * (105.0 / PI).sqrt() * st * st * ct * (2.0 * phi).cos(),
        (3, 3) => 0.25 * (35.0 / (2.0 * PI)).sqrt() * st.powi(3) * (3.0 * phi).cos(),

        (4, -4) => 3.0 / 16.0 * (35.0 / PI).sqrt() * st.powi(4) * (4.0 * phi).sin(),
        (4, -3) => 0.75 * (35.0 / (2.0 * PI)).sqrt() * st.powi(3) * ct * (3.0 * phi).sin(),
        (4, -2) => 0.375 * (5.0 / PI).sqrt() * st * st * (7.0 * ct * ct - 1.0) * (2.0 * phi).sin(),
        (4, -1) => 0.375 * (10.0 / PI).sqrt() * st * ct * (7.0 * ct * ct - 3.0) * phi.sin(),
        (4, 0) => 3.0 / 16.0 * (1.0 / PI).sqrt() * (35.0 * ct.powi(4) - 30.0 * ct * ct + 3.0),
        (4, 1) => 0.375 * (10.0 / PI).sqrt() * st * ct * (7.0 * ct * ct - 3.0) * phi.cos(),
        (4, 2) => 0.375 * (5.0 / PI).sqrt() * st * st * (7.0 * ct * ct - 1.0) * (2.0 * phi).cos(),
        (4, 3) => 0.75 * (35.0 / (2.0 * PI)).sqrt() * st.powi(3) * ct * (3.0 * phi).cos(),
        (4, 4) => 3.0 / 16.0 * (35.0 / PI).sqrt() * st.powi(4) * (4.0 * phi).cos(),
        _ => return None,
    };
    Some(v)
}

/// Value of the real orthonormal harmonic `Y_{l,m}(θ, φ)`.
///
/// Closed forms are used up to `l = 4`, the recurrence beyond.
pub fn eval_real_ylm(idx: HarmonicIndex, theta: f64, phi: f64) -> Result<f64> {
    idx.validate()?;
    match ylm_closed_form(idx, theta, phi) {
        Some(v) => Ok(v),
        None => ylm_recurrence(idx, theta, phi),
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(Error::Config("Gauss-Legendre rule needs at least one node".into()));
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() <= 1e-16 {
                let (_, d) = legendre_and_derivative(n, z);
                dp = d;
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    Ok((x, w))
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    (p1, nf * (x * p1 - p0) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn idx(l: usize, m: i32) -> HarmonicIndex {
        HarmonicIndex::new(l, m).unwrap()
    }

    #[test]
    fn table_values() {
        let y00 = eval_real_ylm(idx(0, 0), 0.3, 1.1).unwrap();
        assert!((y00 - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        let y20 = eval_real_ylm(idx(2, 0), PI / 2.0, 0.0).unwrap();
        assert!((y20 + 0.25 * (5.0 / PI).sqrt()).abs() < 1e-15);
        let y11 = eval_real_ylm(idx(1, 1), PI / 2.0, 0.0).unwrap();
        assert!((y11 - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn closed_forms_match_recurrence() {
        for l in 0..=4usize {
            for m in -(l as i32)..=(l as i32) {
                for &(t, p) in &[(0.1, 0.2), (1.0, 2.5), (2.2, -0.7), (3.0, 5.9)] {
                    let a = ylm_closed_form(idx(l, m), t, p).unwrap();
                    let b = ylm_recurrence(idx(l, m), t, p).unwrap();
                    assert!((a - b).abs() < 1e-14, "({l},{m}) at ({t},{p}): {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn invalid_order_is_domain_error() {
        assert!(HarmonicIndex::new(2, 3).is_err());
        let bad = HarmonicIndex { l: 1, m: -2 };
        assert!(matches!(eval_real_ylm(bad, 0.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(10).unwrap();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        // exact through degree 19
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(18)).sum();
        assert!((q - 2.0 / 19.0).abs() < 1e-15);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }
}
