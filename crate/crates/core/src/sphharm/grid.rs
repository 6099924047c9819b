//! Gauss-Legendre × uniform-longitude quadrature grids and the transforms
//! between sampled fields and coefficient vectors.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::coeffs::{laplace_beltrami, n_coeffs, HarmonicIndex, SphCoeffs};
use super::legendre::{gauss_legendre, normalized_legendre, tri, tri_len};
use crate::error::{Error, Result};

/// Smallest band limit a grid may be built for.
pub const MIN_GRID_BAND_LIMIT: usize = 4;

/// Quadrature grid on S².
///
/// At band limit `L` the grid has `2L+2` Gauss-Legendre colatitudes and
/// `4L+1` equispaced longitudes. Integrands of degree up to `4L` (in both
/// `cos θ` and `φ`) are integrated exactly, so products of two band-`L`
/// fields, and fields of degree up to `2L`, are resolved without aliasing.
#[derive(Debug)]
pub struct SphGrid {
    band_limit: usize,
    lmax: usize,
    cos_theta: Vec<f64>,
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
    n_phi: usize,
    phi: Vec<f64>,
    /// `P̄_l^m(cos θ_i)`, times √2 when `m > 0`; ring-major triangular table.
    legendre: Vec<f64>,
    /// `cos(2πr/n_phi)` and `sin(2πr/n_phi)` for `r < n_phi`.
    cos_tab: Vec<f64>,
    sin_tab: Vec<f64>,
}

/// Builds the quadrature grid for band limit `band_limit` (at least 4).
pub fn build_grid(band_limit: usize) -> Result<Arc<SphGrid>> {
    if band_limit < MIN_GRID_BAND_LIMIT {
        return Err(Error::Config(format!(
            "grid band limit {band_limit} below {MIN_GRID_BAND_LIMIT}: degree-4 products are not representable"
        )));
    }
    let n_theta = 2 * band_limit + 2;
    let n_phi = 4 * band_limit + 1;
    let (x, w) = gauss_legendre(n_theta)?;
    // colatitude ascending means cos θ descending
    let cos_theta: Vec<f64> = x.iter().rev().copied().collect();
    let theta_weights: Vec<f64> = w.iter().rev().copied().collect();
    let theta = cos_theta.iter().map(|c| c.acos()).collect();
    let phi = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();

    let lmax = 2 * band_limit;
    let tl = tri_len(lmax);
    let mut legendre = vec![0.0; n_theta * tl];
    for (i, &ct) in cos_theta.iter().enumerate() {
        let row = &mut legendre[i * tl..(i + 1) * tl];
        normalized_legendre(lmax, ct, row);
        for l in 1..=lmax {
            for m in 1..=l {
                row[tri(l, m)] *= std::f64::consts::SQRT_2;
            }
        }
    }
    let cos_tab = (0..n_phi).map(|r| (2.0 * PI * r as f64 / n_phi as f64).cos()).collect();
    let sin_tab = (0..n_phi).map(|r| (2.0 * PI * r as f64 / n_phi as f64).sin()).collect();

    Ok(Arc::new(SphGrid { band_limit, lmax, cos_theta, theta, theta_weights, n_phi, phi, legendre, cos_tab, sin_tab }))
}

impl SphGrid {
    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    /// Highest degree the transforms on this grid can represent (`2L`).
    pub fn max_degree(&self) -> usize {
        self.lmax
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    /// Gauss-Legendre weights in `cos θ`; they sum to 2.
    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    /// Longitude weight `2π / n_phi`.
    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Total quadrature mass, `4π` up to rounding.
    pub fn total_weight(&self) -> f64 {
        self.theta_weights.iter().sum::<f64>() * 2.0 * PI
    }

    /// Grid report as CSV `theta,weight`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("theta,weight\n");
        for (t, w) in self.theta.iter().zip(&self.theta_weights) {
            s.push_str(&format!("{t:.16e},{w:.16e}\n"));
        }
        s
    }

    #[inline]
    fn plm_row(&self, i: usize) -> &[f64] {
        let tl = tri_len(self.lmax);
        &self.legendre[i * tl..(i + 1) * tl]
    }

    #[inline]
    fn cos_k(&self, k: usize, j: usize) -> f64 {
        self.cos_tab[(k * j) % self.n_phi]
    }

    #[inline]
    fn sin_k(&self, k: usize, j: usize) -> f64 {
        self.sin_tab[(k * j) % self.n_phi]
    }

    fn check_degree(&self, l: usize, what: &str) -> Result<()> {
        if l > self.lmax {
            return Err(Error::Dimension(format!(
                "{what} of degree {l} exceeds the grid's representable degree {} (band limit {})",
                self.lmax, self.band_limit
            )));
        }
        Ok(())
    }

    /// Longitude moments `(2π/n_phi) Σ_j v_j cos(kφ_j)` and the sine analogue,
    /// `k = 0..=kmax`.
    fn ring_moments(&self, ring: &[f64], kmax: usize, c: &mut [f64], s: &mut [f64]) {
        let dw = self.phi_weight();
        for k in 0..=kmax {
            let mut ck = 0.0;
            let mut sk = 0.0;
            for (j, v) in ring.iter().enumerate() {
                ck += v * self.cos_k(k, j);
                sk += v * self.sin_k(k, j);
            }
            c[k] = ck * dw;
            s[k] = sk * dw;
        }
    }

    /// Samples the band-limited field with coefficients `c` on the grid.
    pub fn synthesize(self: &Arc<Self>, c: &SphCoeffs) -> Result<GridField> {
        let band = c.band_limit();
        self.check_degree(band, "coefficient vector")?;
        let n_phi = self.n_phi;
        let mut values = vec![0.0; self.len()];
        let mut a = vec![0.0; band + 1];
        let mut b = vec![0.0; band + 1];
        for i in 0..self.n_theta() {
            let p = self.plm_row(i);
            for m in 0..=band {
                let mut am = 0.0;
                let mut bm = 0.0;
                for l in m..=band {
                    let pl = p[tri(l, m)];
                    am += c.get(l, m as i32) * pl;
                    if m > 0 {
                        bm += c.get(l, -(m as i32)) * pl;
                    }
                }
                a[m] = am;
                b[m] = bm;
            }
            let ring = &mut values[i * n_phi..(i + 1) * n_phi];
            for (j, out) in ring.iter_mut().enumerate() {
                let mut v = a[0];
                for m in 1..=band {
                    v += a[m] * self.cos_k(m, j) + b[m] * self.sin_k(m, j);
                }
                *out = v;
            }
        }
        Ok(GridField { grid: Arc::clone(self), values })
    }

    /// Quadrature projection of `f` onto harmonics of degree `<= band_out`.
    ///
    /// Exact whenever `f` is band-limited to `L_f` with `L_f + band_out <= 4L`.
    pub fn analyze_to(&self, f: &GridField, band_out: usize) -> Result<SphCoeffs> {
        self.check_field(f)?;
        self.check_degree(band_out, "projection")?;
        let n_phi = self.n_phi;
        let mut out = SphCoeffs::zeros(band_out);
        let mut cm = vec![0.0; band_out + 1];
        let mut sm = vec![0.0; band_out + 1];
        for i in 0..self.n_theta() {
            let ring = &f.values[i * n_phi..(i + 1) * n_phi];
            self.ring_moments(ring, band_out, &mut cm, &mut sm);
            let w = self.theta_weights[i];
            let p = self.plm_row(i);
            let data = out.as_mut_slice();
            for l in 0..=band_out {
                let base = l * l + l;
                data[base] += w * p[tri(l, 0)] * cm[0];
                for m in 1..=l {
                    let pl = w * p[tri(l, m)];
                    data[base + m] += pl * cm[m];
                    data[base - m] += pl * sm[m];
                }
            }
        }
        Ok(out)
    }

    /// Projection onto degrees `<= L`, the grid's band limit.
    pub fn analyze(&self, f: &GridField) -> Result<SphCoeffs> {
        self.analyze_to(f, self.band_limit)
    }

    fn check_field(&self, f: &GridField) -> Result<()> {
        if f.values.len() != self.len() || f.grid.band_limit != self.band_limit {
            return Err(Error::Dimension(format!(
                "field sampled on a band-{} grid ({} nodes), expected band {} ({} nodes)",
                f.grid.band_limit,
                f.values.len(),
                self.band_limit,
                self.len()
            )));
        }
        Ok(())
    }

    /// Coefficients of the pointwise product `a·b` re-projected to `band_out`.
    ///
    /// Requires `L_a + L_b + band_out <= 4L` so that the projection is exact.
    pub fn product_project(self: &Arc<Self>, a: &SphCoeffs, b: &SphCoeffs, band_out: usize) -> Result<SphCoeffs> {
        let need = a.band_limit() + b.band_limit() + band_out;
        if need > 4 * self.band_limit || a.band_limit().max(b.band_limit()).max(band_out) > self.lmax {
            return Err(Error::Resolution(format!(
                "product of band {} and {} projected to {} needs integrand degree {need}, grid at band {} integrates exactly to {}",
                a.band_limit(),
                b.band_limit(),
                band_out,
                self.band_limit,
                4 * self.band_limit
            )));
        }
        let fa = self.synthesize(a)?;
        let fb = self.synthesize(b)?;
        let prod = fa.zip_map(&fb, |x, y| x * y)?;
        self.analyze_to(&prod, band_out)
    }

    /// Gram matrix `G_ab = ∫ w Y_a Y_b dμ` over harmonics of degree `<= band`,
    /// by this grid's quadrature. Accumulation runs ring by ring.
    pub fn multiplication_matrix(&self, w: &GridField, band: usize) -> Result<DMatrix<f64>> {
        self.check_field(w)?;
        self.check_degree(band, "Gram matrix")?;
        let n = n_coeffs(band);
        let kmax = 2 * band;
        let nm = 2 * band + 1;
        let n_phi = self.n_phi;
        let mut ck = vec![0.0; kmax + 1];
        let mut sk = vec![0.0; kmax + 1];
        let mut phi_mat = vec![0.0; nm * nm];
        let mut vals = vec![0.0; n];
        let idx: Vec<HarmonicIndex> = (0..n).map(HarmonicIndex::from_offset).collect();
        let mut g = DMatrix::<f64>::zeros(n, n);
        for i in 0..self.n_theta() {
            let ring = &w.values[i * n_phi..(i + 1) * n_phi];
            self.ring_moments(ring, kmax, &mut ck, &mut sk);
            for (ma, row) in (-(band as i32)..=band as i32).zip(phi_mat.chunks_mut(nm)) {
                for (mb, out) in (-(band as i32)..=band as i32).zip(row.iter_mut()) {
                    *out = trig_pair_integral(ma, mb, &ck, &sk);
                }
            }
            let p = self.plm_row(i);
            let wt = self.theta_weights[i];
            for (k, ix) in idx.iter().enumerate() {
                vals[k] = p[tri(ix.l, ix.m.unsigned_abs() as usize)];
            }
            for a in 0..n {
                let ra = (idx[a].m + band as i32) as usize * nm;
                let va = wt * vals[a];
                for b in a..n {
                    let rb = (idx[b].m + band as i32) as usize;
                    g[(a, b)] += va * vals[b] * phi_mat[ra + rb];
                }
            }
        }
        for a in 0..n {
            for b in 0..a {
                g[(a, b)] = g[(b, a)];
            }
        }
        Ok(g)
    }

    /// Pointwise `|∇f|²` on the round sphere for a field of band `<= L`,
    /// from `|∇f|² = ½Δ(f²) − fΔf` with `f²` projected exactly.
    pub fn gradient_sq(self: &Arc<Self>, c: &SphCoeffs) -> Result<GridField> {
        let band = c.band_limit();
        if band > self.band_limit {
            return Err(Error::Resolution(format!("gradient of a band-{band} field needs a grid of band >= {band}")));
        }
        let sq = self.product_project(c, c, 2 * band)?;
        let half_lap_sq = self.synthesize(&(&laplace_beltrami(&sq) * 0.5))?;
        let f = self.synthesize(c)?;
        let lap_f = self.synthesize(&laplace_beltrami(c))?;
        let f_lap_f = f.zip_map(&lap_f, |a, b| a * b)?;
        half_lap_sq.zip_map(&f_lap_f, |a, b| a - b)
    }
}

/// `(2π/n) Σ_j t_a(φ_j) t_b(φ_j) w_j` for the unnormalised real Fourier
/// functions `t_0 = 1`, `t_m = cos mφ`, `t_{-m} = sin mφ`, given the weighted
/// moments of `w`.
fn trig_pair_integral(ma: i32, mb: i32, c: &[f64], s: &[f64]) -> f64 {
    let (p, q) = (ma.unsigned_abs() as usize, mb.unsigned_abs() as usize);
    let diff = p.abs_diff(q);
    match (ma.signum(), mb.signum()) {
        (0, 0) => c[0],
        (0, 1) => c[q],
        (1, 0) => c[p],
        (0, -1) => s[q],
        (-1, 0) => s[p],
        (1, 1) => 0.5 * (c[diff] + c[p + q]),
        (-1, -1) => 0.5 * (c[diff] - c[p + q]),
        // cos pφ · sin qφ = ½[sin(p+q)φ + sin(q-p)φ]
        (1, -1) => 0.5 * (s[p + q] + signed_sin(q as i64 - p as i64, s)),
        (-1, 1) => 0.5 * (s[p + q] + signed_sin(p as i64 - q as i64, s)),
        _ => unreachable!(),
    }
}

#[inline]
fn signed_sin(k: i64, s: &[f64]) -> f64 {
    if k >= 0 {
        s[k as usize]
    } else {
        -s[(-k) as usize]
    }
}

/// Scalar field sampled at the nodes of a [`SphGrid`], ring-major
/// (`θ` outer, `φ` inner).
#[derive(Debug, Clone)]
pub struct GridField {
    grid: Arc<SphGrid>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: Arc<SphGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!("field has {} samples, grid has {}", values.len(), grid.len())));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite sample at node {k}")));
        }
        Ok(GridField { grid, values })
    }

    pub fn constant(grid: &Arc<SphGrid>, value: f64) -> Self {
        GridField { grid: Arc::clone(grid), values: vec![value; grid.len()] }
    }

    /// Samples `f(θ, φ)` at every node.
    pub fn from_fn(grid: &Arc<SphGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for &t in grid.theta() {
            for &p in grid.phi() {
                values.push(f(t, p));
            }
        }
        GridField { grid: Arc::clone(grid), values }
    }

    pub fn grid(&self) -> &Arc<SphGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridField {
        GridField { grid: Arc::clone(&self.grid), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<GridField> {
        if other.values.len() != self.values.len() {
            return Err(Error::Dimension("fields sampled on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(GridField { grid: Arc::clone(&self.grid), values })
    }

    /// `∫ f dμ` over the round sphere, θ-major summation.
    pub fn integrate(&self) -> f64 {
        let n_phi = self.grid.n_phi;
        let dw = self.grid.phi_weight();
        let mut total = 0.0;
        for (i, w) in self.grid.theta_weights.iter().enumerate() {
            let ring: f64 = self.values[i * n_phi..(i + 1) * n_phi].iter().sum();
            total += w * ring * dw;
        }
        total
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.map(|v| v * v).integrate().max(0.0).sqrt()
    }

    pub fn analyze(&self) -> Result<SphCoeffs> {
        self.grid.analyze(self)
    }

    pub fn analyze_to(&self, band_out: usize) -> Result<SphCoeffs> {
        self.grid.analyze_to(self, band_out)
    }
}

/// Seeded random field with `sup |u| = sup_norm` on `grid`.
///
/// Coefficients are standard normal draws damped by `1/(1 + l(l+1))`; the
/// stream is selected by `(seed, stream)` so trials are reproducible and
/// independent of evaluation order.
pub fn random_field(
    grid: &Arc<SphGrid>,
    band_limit: usize,
    sup_norm: f64,
    seed: u64,
    stream: u64,
) -> Result<SphCoeffs> {
    if !(sup_norm >= 0.0 && sup_norm.is_finite()) {
        return Err(Error::Domain(format!("sup norm {sup_norm} must be finite and >= 0")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut c = SphCoeffs::zeros(band_limit);
    for (k, v) in c.as_mut_slice().iter_mut().enumerate() {
        let z: f64 = rng.sample(StandardNormal);
        *v = z / (1.0 + HarmonicIndex::from_offset(k).laplace_eigenvalue());
    }
    let s = grid.synthesize(&c)?.sup_abs();
    if sup_norm == 0.0 || s == 0.0 {
        return Ok(SphCoeffs::zeros(band_limit));
    }
    Ok(&c * (sup_norm / s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphharm::eval_real_ylm;

    #[test]
    fn grid_sizes_and_mass() {
        let g = build_grid(4).unwrap();
        assert_eq!((g.n_theta(), g.n_phi()), (10, 17));
        assert!((g.total_weight() - 4.0 * PI).abs() < 1e-13);
        assert!(matches!(build_grid(3), Err(Error::Config(_))));
    }

    #[test]
    fn orthonormality_by_quadrature() {
        let g = build_grid(12).unwrap();
        let y40 = g.synthesize(&SphCoeffs::unit(12, 4, 0).unwrap()).unwrap();
        assert!((y40.map(|v| v * v).integrate() - 1.0).abs() < 1e-12);

        let g = build_grid(8).unwrap();
        let a = g.synthesize(&SphCoeffs::unit(8, 2, 1).unwrap()).unwrap();
        let b = g.synthesize(&SphCoeffs::unit(8, 2, -1).unwrap()).unwrap();
        assert!(a.zip_map(&b, |x, y| x * y).unwrap().integrate().abs() < 1e-13);
    }

    #[test]
    fn analyze_known_fields() {
        let g = build_grid(8).unwrap();
        let one = GridField::constant(&g, 1.0).analyze().unwrap();
        assert!((one.get(0, 0) - 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!(one.as_slice()[1..].iter().all(|v| v.abs() < 1e-14));

        let f = GridField::from_fn(&g, |t, p| t.sin().powi(2) * (2.0 * p).sin());
        let c = f.analyze().unwrap();
        let expect = 4.0 * (PI / 15.0).sqrt();
        assert!((c.get(2, -2) - expect).abs() < 1e-13);
        let mut rest = c.clone();
        rest.set(2, -2, 0.0).unwrap();
        assert!(rest.norm() < 1e-13);
    }

    #[test]
    fn synthesis_matches_pointwise_evaluation() {
        let g = build_grid(6).unwrap();
        let c = SphCoeffs::unit(6, 5, -3).unwrap();
        let f = g.synthesize(&c).unwrap();
        let idx = HarmonicIndex::new(5, -3).unwrap();
        let mut k = 0;
        for &t in g.theta() {
            for &p in g.phi() {
                let exact = eval_real_ylm(idx, t, p).unwrap();
                assert!((f.values()[k] - exact).abs() < 1e-13);
                k += 1;
            }
        }
    }

    #[test]
    fn unit_round_trip() {
        let g = build_grid(8).unwrap();
        let c = SphCoeffs::unit(8, 2, 0).unwrap();
        let back = g.synthesize(&c).unwrap().analyze().unwrap();
        assert!(back.max_abs_diff(&c) < 1e-13);
    }

    #[test]
    fn product_resolution_error() {
        let g = build_grid(4).unwrap();
        let a = SphCoeffs::unit(8, 8, 0).unwrap();
        let b = SphCoeffs::unit(8, 8, 1).unwrap();
        assert!(matches!(g.product_project(&a, &b, 4), Err(Error::Resolution(_))));
    }

    #[test]
    fn multiplication_matrix_against_dense_quadrature() {
        let g = build_grid(5).unwrap();
        let w = GridField::from_fn(&g, |t, p| (0.3 * t.cos() + 0.2 * (t.sin() * p.sin())).exp());
        let band = 4;
        let m = g.multiplication_matrix(&w, band).unwrap();
        let n = n_coeffs(band);
        let basis: Vec<GridField> = (0..n)
            .map(|k| {
                let ix = HarmonicIndex::from_offset(k);
                g.synthesize(&SphCoeffs::unit(band, ix.l, ix.m).unwrap()).unwrap()
            })
            .collect();
        for a in 0..n {
            for b in 0..n {
                let dense =
                    basis[a].zip_map(&basis[b], |x, y| x * y).unwrap().zip_map(&w, |x, y| x * y).unwrap().integrate();
                assert!((m[(a, b)] - dense).abs() < 1e-13, "({a},{b}) {} vs {dense}", m[(a, b)]);
            }
        }
    }
}
