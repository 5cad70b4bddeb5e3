//! Sphere grids, the discrete Laplace–Beltrami operator on S¹ and S², and
//! grid-sampled profiles.
//!
//! The S² grid is latitude–longitude with staggered latitudes
//! θ_j = π(j + 1/2)/nlat, so no node sits on a pole. The operator is the
//! flux-form finite-volume discretization of
//! (1/sinθ)∂_θ(sinθ ∂_θ) + (1/sin²θ)∂²_φ on cells bounded by
//! θ_j ± Δθ/2; the cells of the first and last ring reach the poles and
//! absorb the polar caps. The polar faces have zero length, so no flux
//! crosses them.
//!
//! The operator is stored as L = W⁻¹K with K symmetric and W the diagonal
//! of cell areas, so W^{1/2} L W^{-1/2} is symmetric and the spectrum is real.

use std::f64::consts::PI;

use faer::dyn_stack::{GlobalPodBuffer, PodStack};
use faer::linalg::evd::{self, ComputeVectors};
use faer::{Col, Mat, Parallelism};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense eigensolves are limited to grids of at most this many points.
pub const DENSE_EIGEN_LIMIT: usize = 5000;
pub const MIN_RESOLUTION: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SphereGrid {
    /// m equispaced points φ_k = 2πk/m on S¹.
    Circle { m: usize },
    /// Staggered latitude–longitude grid on S².
    LatLon { nlat: usize, nlon: usize },
}

impl SphereGrid {
    pub fn circle(m: usize) -> Self {
        SphereGrid::Circle { m }
    }

    pub fn latlon(nlat: usize, nlon: usize) -> Self {
        SphereGrid::LatLon { nlat, nlon }
    }

    /// Parses `m` (n = 2) or `nlat x nlon` (n = 3).
    pub fn from_spec(n: usize, spec: &str) -> Result<Self> {
        let bad = |msg: &str| Error::ConfigInvalid(format!("grid '{spec}': {msg}"));
        match n {
            2 => {
                let m = spec.trim().parse().map_err(|_| bad("expected a point count"))?;
                Ok(Self::circle(m))
            }
            3 => {
                let (a, b) = spec
                    .split_once(['x', 'X'])
                    .ok_or_else(|| bad("expected NLATxNLON"))?;
                let nlat = a.trim().parse().map_err(|_| bad("invalid latitude count"))?;
                let nlon = b.trim().parse().map_err(|_| bad("invalid longitude count"))?;
                Ok(Self::latlon(nlat, nlon))
            }
            _ => Err(Error::ConfigInvalid(format!(
                "sphere grids exist for n = 2 and n = 3 only, got n = {n}"
            ))),
        }
    }

    /// Ambient dimension n (the grid discretizes S^{n-1}).
    pub fn ambient_dim(&self) -> usize {
        match self {
            SphereGrid::Circle { .. } => 2,
            SphereGrid::LatLon { .. } => 3,
        }
    }

    pub fn len(&self) -> usize {
        match *self {
            SphereGrid::Circle { m } => m,
            SphereGrid::LatLon { nlat, nlon } => nlat * nlon,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// θ_j for a lat-lon grid.
    pub fn latitude(&self, j: usize) -> f64 {
        match *self {
            SphereGrid::LatLon { nlat, .. } => PI * (j as f64 + 0.5) / nlat as f64,
            SphereGrid::Circle { .. } => PI / 2.0,
        }
    }

    pub fn longitude(&self, k: usize) -> f64 {
        match *self {
            SphereGrid::Circle { m } => 2.0 * PI * k as f64 / m as f64,
            SphereGrid::LatLon { nlon, .. } => 2.0 * PI * k as f64 / nlon as f64,
        }
    }

    /// Unit vector of grid node `idx` (row-major in (j, k) for lat-lon).
    pub fn point(&self, idx: usize) -> Vec<f64> {
        match *self {
            SphereGrid::Circle { .. } => {
                let p = self.longitude(idx);
                vec![p.cos(), p.sin()]
            }
            SphereGrid::LatLon { nlon, .. } => {
                let (t, p) = (self.latitude(idx / nlon), self.longitude(idx % nlon));
                vec![t.sin() * p.cos(), t.sin() * p.sin(), t.cos()]
            }
        }
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn sample(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(&self.point(i))).collect()
    }

    /// Finite-volume cell measures; they sum to the sphere's measure.
    pub fn cell_areas(&self) -> Vec<f64> {
        match *self {
            SphereGrid::Circle { m } => vec![2.0 * PI / m as f64; m],
            SphereGrid::LatLon { nlat, nlon } => {
                let dth = PI / nlat as f64;
                let dph = 2.0 * PI / nlon as f64;
                let mut w = Vec::with_capacity(nlat * nlon);
                for j in 0..nlat {
                    let t = self.latitude(j);
                    let a = dph * ((t - 0.5 * dth).cos() - (t + 0.5 * dth).cos());
                    w.extend(std::iter::repeat_n(a, nlon));
                }
                w
            }
        }
    }

    /// Quadrature weights: the trapezoid rule on S¹, and Fejér's first rule in
    /// cosθ times the trapezoid rule in φ on S². Exact for spherical
    /// polynomials of degree below min(nlat, nlon/2).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        match *self {
            SphereGrid::Circle { m } => vec![2.0 * PI / m as f64; m],
            SphereGrid::LatLon { nlat, nlon } => {
                let dph = 2.0 * PI / nlon as f64;
                let mut w = Vec::with_capacity(nlat * nlon);
                for j in 0..nlat {
                    let t = self.latitude(j);
                    let s: f64 = (1..=nlat / 2)
                        .map(|k| (2.0 * k as f64 * t).cos() / (4.0 * (k * k) as f64 - 1.0))
                        .sum();
                    let wj = 2.0 / nlat as f64 * (1.0 - 2.0 * s);
                    w.extend(std::iter::repeat_n(wj * dph, nlon));
                }
                w
            }
        }
    }

    fn check_resolution(&self) -> Result<()> {
        match *self {
            SphereGrid::Circle { m } if m < MIN_RESOLUTION => Err(Error::ResolutionTooLow(format!(
                "circle grid needs at least {MIN_RESOLUTION} points, got {m}"
            ))),
            SphereGrid::LatLon { nlat, nlon } if nlat < MIN_RESOLUTION || nlon < MIN_RESOLUTION => {
                Err(Error::ResolutionTooLow(format!(
                    "lat-lon grid needs at least {MIN_RESOLUTION} points per direction, got {nlat}x{nlon}"
                )))
            }
            _ => Ok(()),
        }
    }
}

/// Discrete Laplace–Beltrami operator L = W⁻¹K.
#[derive(Debug, Clone)]
pub struct DiscreteLB {
    grid: SphereGrid,
    /// Off-diagonal couplings of the symmetric matrix K, per row.
    couplings: Vec<Vec<(usize, f64)>>,
    /// Diagonal of K; equals minus the row sum of the couplings.
    diagonal: Vec<f64>,
    weights: Vec<f64>,
}

/// Builds the discrete Laplace–Beltrami operator on `grid`.
pub fn build_lb(grid: SphereGrid) -> Result<DiscreteLB> {
    grid.check_resolution()?;
    let size = grid.len();
    let mut couplings: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(4); size];
    let mut link = |a: usize, b: usize, c: f64| {
        couplings[a].push((b, c));
        couplings[b].push((a, c));
    };
    match grid {
        SphereGrid::Circle { m } => {
            let h = 2.0 * PI / m as f64;
            for k in 0..m {
                link(k, (k + 1) % m, 1.0 / h);
            }
        }
        SphereGrid::LatLon { nlat, nlon } => {
            let dth = PI / nlat as f64;
            let dph = 2.0 * PI / nlon as f64;
            let idx = |j: usize, k: usize| j * nlon + k % nlon;
            for j in 0..nlat {
                let t = grid.latitude(j);
                let lon = dth / (t.sin() * dph);
                for k in 0..nlon {
                    link(idx(j, k), idx(j, k + 1), lon);
                    if j + 1 < nlat {
                        let lat = dph * (t + 0.5 * dth).sin() / dth;
                        link(idx(j, k), idx(j + 1, k), lat);
                    }
                }
            }
        }
    }
    for row in couplings.iter_mut() {
        row.sort_by_key(|&(c, _)| c);
    }
    let diagonal = couplings
        .iter()
        .map(|row| -row.iter().map(|&(_, c)| c).sum::<f64>())
        .collect();
    Ok(DiscreteLB {
        grid,
        couplings,
        diagonal,
        weights: grid.cell_areas(),
    })
}

impl DiscreteLB {
    pub fn grid(&self) -> SphereGrid {
        self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// L·g.
    pub fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                self.grid.len(),
                g.len()
            )));
        }
        // (Kg)_i = Σ_j c_ij (g_j − g_i), since the diagonal is −Σ_j c_ij
        Ok(self
            .couplings
            .iter()
            .zip(&self.weights)
            .enumerate()
            .map(|(i, (row, &w))| row.iter().map(|&(j, c)| c * (g[j] - g[i])).sum::<f64>() / w)
            .collect())
    }

    /// Entry (i, j) of L.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diagonal[i] / self.weights[i];
        }
        self.couplings[i]
            .iter()
            .filter(|&&(c, _)| c == j)
            .map(|&(_, v)| v)
            .sum::<f64>()
            / self.weights[i]
    }

    /// Largest |S_ij − S_ji| of the weight-conjugated operator S = W^{1/2} L W^{-1/2}.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, row) in self.couplings.iter().enumerate() {
            for &(j, _) in row {
                let sij = self.weights[i].sqrt() * self.entry(i, j) / self.weights[j].sqrt();
                let sji = self.weights[j].sqrt() * self.entry(j, i) / self.weights[i].sqrt();
                worst = worst.max((sij - sji).abs() / sij.abs().max(1.0));
            }
        }
        worst
    }

    fn symmetrized_dense(&self) -> Mat<f64> {
        let n = self.grid.len();
        let sw: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
        let mut s = Mat::<f64>::zeros(n, n);
        for (i, row) in self.couplings.iter().enumerate() {
            s.write(i, i, self.diagonal[i] / self.weights[i]);
            for &(j, c) in row {
                let v = s.read(i, j) + c / (sw[i] * sw[j]);
                s.write(i, j, v);
            }
        }
        s
    }

    /// Full spectrum of −L, ascending (λ ≥ 0 convention).
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        let size = self.grid.len();
        if size > DENSE_EIGEN_LIMIT {
            return Err(Error::GridTooLargeForDense {
                size,
                limit: DENSE_EIGEN_LIMIT,
            });
        }
        let s = self.symmetrized_dense();
        // sequential, so the result does not depend on the thread count
        let params = Default::default();
        let req = evd::compute_hermitian_evd_req::<f64>(size, ComputeVectors::No, Parallelism::None, params)
            .map_err(|_| Error::GridTooLargeForDense {
                size,
                limit: DENSE_EIGEN_LIMIT,
            })?;
        let mut eig = Col::<f64>::zeros(size);
        evd::compute_hermitian_evd(
            s.as_ref(),
            eig.as_mut(),
            None,
            Parallelism::None,
            PodStack::new(&mut GlobalPodBuffer::new(req)),
            params,
        );
        let mut values: Vec<f64> = (0..size).map(|i| -eig.read(i)).collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}

/// The `k` eigenvalues of −L of smallest magnitude, ascending.
pub fn lowest_eigenvalues(lb: &DiscreteLB, k: usize) -> Result<Vec<f64>> {
    if k > lb.grid.len() {
        return Err(Error::ConfigInvalid(format!(
            "requested {k} eigenvalues from a grid of {} points",
            lb.grid.len()
        )));
    }
    let mut values = lb.spectrum()?;
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    values.truncate(k);
    values.sort_by(f64::total_cmp);
    Ok(values)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenCluster {
    pub value: f64,
    pub multiplicity: usize,
    pub min: f64,
    pub max: f64,
}

/// Groups ascending eigenvalues: a value joins the current cluster when it is
/// within `rel_gap·max(1, |first|)` of the cluster's first value.
pub fn cluster_eigenvalues(values: &[f64], rel_gap: f64) -> Vec<EigenCluster> {
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &v in values {
        match clusters.last_mut() {
            Some(c) if v - c[0] <= rel_gap * c[0].abs().max(1.0) => c.push(v),
            _ => clusters.push(vec![v]),
        }
    }
    clusters
        .into_iter()
        .map(|c| EigenCluster {
            value: c.iter().sum::<f64>() / c.len() as f64,
            multiplicity: c.len(),
            min: c[0],
            max: c[c.len() - 1],
        })
        .collect()
}

/// ‖L·g + d(d+n−2)·g‖_∞ / ‖g‖_∞.
pub fn profile_eigencheck(lb: &DiscreteLB, g: &GridProfile, d: f64) -> Result<f64> {
    if g.grid() != lb.grid() {
        return Err(Error::GridMismatch(format!(
            "profile sampled on {:?}, operator built on {:?}",
            g.grid(),
            lb.grid()
        )));
    }
    let n = lb.grid.ambient_dim() as f64;
    let lambda = d * (d + n - 2.0);
    let lg = lb.apply(g.values())?;
    let num = lg
        .iter()
        .zip(g.values())
        .fold(0.0f64, |m, (l, v)| m.max((l + lambda * v).abs()));
    let den = g.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(if den == 0.0 { num } else { num / den })
}

/// Trigonometric interpolant through samples at x_j = x0 + 2πj/N, evaluated
/// with the barycentric formula (cot kernel for even N, csc for odd N).
fn trig_interpolate(samples: impl Fn(usize) -> f64, count: usize, x0: f64, x: f64) -> f64 {
    let h = 2.0 * PI / count as f64;
    let even = count.is_multiple_of(2);
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..count {
        let half = 0.5 * (x - x0 - h * j as f64);
        let s = half.sin();
        if s.abs() < 1e-15 {
            return samples(j);
        }
        let kernel = if even { half.cos() / s } else { 1.0 / s };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        num += sign * kernel * samples(j);
        den += sign * kernel;
    }
    num / den
}

/// (θ, φ) of a unit vector in R³.
pub fn spherical_angles(x: &[f64]) -> (f64, f64) {
    let rho = (x[0] * x[0] + x[1] * x[1]).sqrt();
    (rho.atan2(x[2]), x[1].atan2(x[0]))
}

/// A profile g on S^{n−1} given by its values on a sphere grid, extended off
/// the grid by trigonometric interpolation (along φ on S¹; along meridian
/// great circles then along φ on S²).
#[derive(Debug, Clone, PartialEq)]
pub struct GridProfile {
    grid: SphereGrid,
    values: Vec<f64>,
    lb_values: Vec<f64>,
}

impl GridProfile {
    pub fn new(grid: SphereGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let SphereGrid::LatLon { nlon, .. } = grid {
            if nlon % 2 != 0 {
                return Err(Error::ConfigInvalid(
                    "grid profiles need an even longitude count to interpolate across the poles".into(),
                ));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid profile"));
        }
        let lb_values = build_lb(grid)?.apply(&values)?;
        Ok(Self {
            grid,
            values,
            lb_values,
        })
    }

    pub fn sample(grid: SphereGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        Self::new(grid, grid.sample(f))
    }

    pub fn grid(&self) -> SphereGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Interpolated g at a unit vector.
    pub fn eval(&self, theta: &[f64]) -> f64 {
        self.interpolate(&self.values, theta)
    }

    /// Interpolated discrete Laplace–Beltrami image L·g at a unit vector.
    pub fn eval_lb(&self, theta: &[f64]) -> f64 {
        self.interpolate(&self.lb_values, theta)
    }

    fn interpolate(&self, data: &[f64], theta: &[f64]) -> f64 {
        match self.grid {
            SphereGrid::Circle { m } => {
                let phi = theta[1].atan2(theta[0]);
                trig_interpolate(|k| data[k], m, 0.0, phi)
            }
            SphereGrid::LatLon { nlat, nlon } => {
                let (t, p) = spherical_angles(theta);
                let half = nlon / 2;
                let dth = PI / nlat as f64;
                // meridian circle through columns k and k + nlon/2, sampled at
                // α_i = (i + 1/2)Δθ; the second column runs back from the south pole
                let meridian = |k: usize, alpha: f64| {
                    let col = k % half;
                    trig_interpolate(
                        |i| {
                            if i < nlat {
                                data[i * nlon + col]
                            } else {
                                data[(2 * nlat - 1 - i) * nlon + col + half]
                            }
                        },
                        2 * nlat,
                        0.5 * dth,
                        alpha,
                    )
                };
                let column: Vec<f64> = (0..nlon)
                    .map(|k| if k < half { meridian(k, t) } else { meridian(k, 2.0 * PI - t) })
                    .collect();
                trig_interpolate(|k| column[k], nlon, 0.0, p)
            }
        }
    }
}
