//! Band-limited coefficient vectors and the degree-2 eigenspace.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Degree/order pair of a real spherical harmonic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HarmonicIndex {
    pub l: usize,
    pub m: i32,
}

impl HarmonicIndex {
    pub fn new(l: usize, m: i32) -> Result<Self> {
        let idx = HarmonicIndex { l, m };
        idx.validate()?;
        Ok(idx)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m.unsigned_abs() as usize > self.l {
            return Err(Error::Domain(format!(
                "harmonic order |m| = {} exceeds degree l = {}",
                self.m.unsigned_abs(),
                self.l
            )));
        }
        Ok(())
    }

    /// Offset in the `(l ascending, m ascending)` layout.
    #[inline]
    pub fn offset(&self) -> usize {
        ((self.l * self.l + self.l) as isize + self.m as isize) as usize
    }

    /// Inverse of [`offset`](Self::offset).
    pub fn from_offset(k: usize) -> Self {
        let l = (k as f64).sqrt().floor() as usize;
        // guard against rounding in the square root
        let l = if (l + 1) * (l + 1) <= k {
            l + 1
        } else if l * l > k {
            l - 1
        } else {
            l
        };
        HarmonicIndex { l, m: k as i32 - (l * l + l) as i32 }
    }

    /// `l(l+1)`, the eigenvalue of `-Δ` on the round sphere.
    pub fn laplace_eigenvalue(&self) -> f64 {
        (self.l * (self.l + 1)) as f64
    }
}

#[inline]
pub(crate) fn n_coeffs(band_limit: usize) -> usize {
    (band_limit + 1) * (band_limit + 1)
}

/// Real spherical-harmonic coefficients up to degree `band_limit`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphCoeffs {
    band_limit: usize,
    data: Vec<f64>,
}

impl SphCoeffs {
    pub fn zeros(band_limit: usize) -> Self {
        SphCoeffs { band_limit, data: vec![0.0; n_coeffs(band_limit)] }
    }

    pub fn from_vec(band_limit: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_coeffs(band_limit) {
            return Err(Error::Dimension(format!(
                "band limit {band_limit} needs {} coefficients, got {}",
                n_coeffs(band_limit),
                data.len()
            )));
        }
        Ok(SphCoeffs { band_limit, data })
    }

    /// Single unit harmonic `Y_{l,m}` in a vector of the given band limit.
    pub fn unit(band_limit: usize, l: usize, m: i32) -> Result<Self> {
        let idx = HarmonicIndex::new(l, m)?;
        if l > band_limit {
            return Err(Error::Dimension(format!("degree {l} above band limit {band_limit}")));
        }
        let mut c = Self::zeros(band_limit);
        c.data[idx.offset()] = 1.0;
        Ok(c)
    }

    /// The constant function `value` (its `(0,0)` entry is `2√π·value`).
    pub fn constant(band_limit: usize, value: f64) -> Self {
        let mut c = Self::zeros(band_limit);
        c.data[0] = value * 2.0 * std::f64::consts::PI.sqrt();
        c
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, l: usize, m: i32) -> f64 {
        if l > self.band_limit || m.unsigned_abs() as usize > l {
            return 0.0;
        }
        self.data[HarmonicIndex { l, m }.offset()]
    }

    pub fn set(&mut self, l: usize, m: i32, value: f64) -> Result<()> {
        let idx = HarmonicIndex::new(l, m)?;
        if l > self.band_limit {
            return Err(Error::Dimension(format!("degree {l} above band limit {}", self.band_limit)));
        }
        self.data[idx.offset()] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (HarmonicIndex, f64)> + '_ {
        self.data.iter().enumerate().map(|(k, &v)| (HarmonicIndex::from_offset(k), v))
    }

    /// L² norm of the represented field (Parseval).
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SphCoeffs) -> f64 {
        let n = self.data.len().min(other.data.len());
        self.data[..n].iter().zip(&other.data[..n]).map(|(a, b)| a * b).sum()
    }

    /// Copy at a different band limit, truncating or zero-padding.
    pub fn resized(&self, band_limit: usize) -> SphCoeffs {
        let mut out = SphCoeffs::zeros(band_limit);
        let n = out.data.len().min(self.data.len());
        out.data[..n].copy_from_slice(&self.data[..n]);
        out
    }

    pub fn map_degree(&self, f: impl Fn(usize) -> f64) -> SphCoeffs {
        let data = self.data.iter().enumerate().map(|(k, v)| v * f(HarmonicIndex::from_offset(k).l)).collect();
        SphCoeffs { band_limit: self.band_limit, data }
    }

    pub fn max_abs_diff(&self, other: &SphCoeffs) -> f64 {
        let n = self.data.len().max(other.data.len());
        (0..n)
            .map(|k| {
                let a = self.data.get(k).copied().unwrap_or(0.0);
                let b = other.data.get(k).copied().unwrap_or(0.0);
                (a - b).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Text form: one `l m value` line per entry, 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.data.len() * 32);
        for (idx, v) in self.iter() {
            let _ = writeln!(s, "{} {} {:.16e}", idx.l, idx.m, v);
        }
        s
    }

    /// Parses the `l m value` text form. Blank lines and `#` comments are
    /// skipped; absent entries are zero; the band limit is the largest `l`.
    pub fn parse_text(text: &str) -> Result<SphCoeffs> {
        let mut entries = Vec::new();
        let mut lmax = 0usize;
        for (no, raw) in text.lines().enumerate() {
            let line_no = no + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `l m value`, found {} fields", toks.len()),
                });
            }
            let l: usize = toks[0].parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("degree `{}` is not a non-negative integer", toks[0]),
            })?;
            let m: i32 = toks[1]
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("order `{}` is not an integer", toks[1]) })?;
            let v: f64 = toks[2]
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("value `{}` is not a number", toks[2]) })?;
            if !v.is_finite() {
                return Err(Error::Parse { line: line_no, msg: "value is not finite".into() });
            }
            let idx = HarmonicIndex::new(l, m).map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
            lmax = lmax.max(l);
            entries.push((line_no, idx, v));
        }
        let mut out = SphCoeffs::zeros(lmax);
        let mut seen = vec![false; out.data.len()];
        for (line, idx, v) in entries {
            let k = idx.offset();
            if seen[k] {
                return Err(Error::Parse { line, msg: format!("duplicate entry for ({}, {})", idx.l, idx.m) });
            }
            seen[k] = true;
            out.data[k] = v;
        }
        Ok(out)
    }
}

fn zip_with(a: &SphCoeffs, b: &SphCoeffs, f: impl Fn(f64, f64) -> f64) -> SphCoeffs {
    let band_limit = a.band_limit.max(b.band_limit);
    let n = n_coeffs(band_limit);
    let data =
        (0..n).map(|k| f(a.data.get(k).copied().unwrap_or(0.0), b.data.get(k).copied().unwrap_or(0.0))).collect();
    SphCoeffs { band_limit, data }
}

impl Add for &SphCoeffs {
    type Output = SphCoeffs;
    fn add(self, rhs: &SphCoeffs) -> SphCoeffs {
        zip_with(self, rhs, |a, b| a + b)
    }
}

impl Sub for &SphCoeffs {
    type Output = SphCoeffs;
    fn sub(self, rhs: &SphCoeffs) -> SphCoeffs {
        zip_with(self, rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SphCoeffs {
    type Output = SphCoeffs;
    fn mul(self, rhs: f64) -> SphCoeffs {
        SphCoeffs { band_limit: self.band_limit, data: self.data.iter().map(|v| v * rhs).collect() }
    }
}

/// Coefficients `(λ₋₂, λ₋₁, λ₀, λ₁, λ₂)` of a field in the degree-2 eigenspace.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct E2Vector(pub [f64; 5]);

impl E2Vector {
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `λ_m` for `m ∈ -2..=2`.
    pub fn get(&self, m: i32) -> f64 {
        self.0[(m + 2) as usize]
    }

    pub fn to_coeffs(&self, band_limit: usize) -> Result<SphCoeffs> {
        if band_limit < 2 {
            return Err(Error::Dimension("degree-2 field needs band limit >= 2".into()));
        }
        let mut c = SphCoeffs::zeros(band_limit);
        c.data[4..9].copy_from_slice(&self.0);
        Ok(c)
    }
}

/// `Δ` on the round sphere: multiplies the `(l, m)` entry by `-l(l+1)`.
pub fn laplace_beltrami(c: &SphCoeffs) -> SphCoeffs {
    c.map_degree(|l| -((l * (l + 1)) as f64))
}

/// Coefficients of `f(θ, φ − α)`, the field rotated by `α` about the pole.
pub fn rotate_about_pole(c: &SphCoeffs, alpha: f64) -> SphCoeffs {
    let mut out = c.clone();
    for l in 1..=c.band_limit {
        for m in 1..=l as i32 {
            let (s, co) = (m as f64 * alpha).sin_cos();
            let a = c.get(l, m);
            let b = c.get(l, -m);
            let base = l * l + l;
            out.data[base + m as usize] = a * co - b * s;
            out.data[base - m as usize] = a * s + b * co;
        }
    }
    out
}

/// Orthogonal projection onto `E₂ = ker(Δ + 6)`.
pub fn project_e2(c: &SphCoeffs) -> Result<E2Vector> {
    if c.band_limit < 2 {
        return Err(Error::Dimension("projection onto E2 needs band limit >= 2".into()));
    }
    let mut v = [0.0; 5];
    v.copy_from_slice(&c.data[4..9]);
    Ok(E2Vector(v))
}

/// Complementary projection: `c` with its five degree-2 entries zeroed.
pub fn project_e2_perp(c: &SphCoeffs) -> SphCoeffs {
    let mut out = c.clone();
    if out.band_limit >= 2 {
        out.data[4..9].iter_mut().for_each(|v| *v = 0.0);
    }
    out
}
