//! Truncated spherical-harmonic profile bases.
//!
//! Element i is a homogeneous harmonic polynomial p_i of degree ℓ_i; its
//! restriction to the sphere is the profile, and its degree-d extension is
//! |x|^{d−ℓ_i} p_i(x). On S¹ the elements are the Fourier modes cos ℓφ,
//! sin ℓφ; on S² they span the spherical harmonics of each degree.

use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::harmonic_basis;
use crate::linalg::{Matrix, SymMatrix};
use crate::poly::FloatPoly;
use crate::sphere::SphereGrid;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileElement {
    pub ell: u32,
    pub poly: FloatPoly,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileBasis {
    n: usize,
    elements: Vec<ProfileElement>,
}

/// Quadrature grid that integrates products of degree-≤lmax profiles exactly.
pub fn exact_quadrature_grid(n: usize, lmax: u32) -> Result<SphereGrid> {
    let l = lmax as usize;
    match n {
        2 => Ok(SphereGrid::circle(4 * l + 4)),
        3 => Ok(SphereGrid::latlon(2 * l + 2, 4 * l + 4)),
        _ => Err(Error::InvalidDimension(n)),
    }
}

impl ProfileBasis {
    /// Harmonic profiles of degrees 0..=lmax, orthonormal in L²(S^{n−1}).
    /// Degrees are mutually orthogonal already; each degree block is
    /// Gram–Schmidt orthonormalized under an exact quadrature.
    pub fn orthonormal(n: usize, lmax: u32) -> Result<Self> {
        let grid = exact_quadrature_grid(n, lmax)?;
        let points = grid.points();
        let weights = grid.quadrature_weights();
        let samples = |p: &FloatPoly| -> Vec<f64> { points.iter().map(|x| p.eval_unchecked(x)).collect() };
        let inner = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(&weights).map(|((a, b), w)| a * b * w).sum() };

        let mut elements = Vec::new();
        for ell in 0..=lmax {
            let mut block: Vec<(FloatPoly, Vec<f64>)> = Vec::new();
            for h in harmonic_basis(n, ell)?.elements {
                let mut p = h.to_float();
                let mut v = samples(&p);
                for _ in 0..2 {
                    for (q, qv) in &block {
                        let c = inner(&v, qv);
                        p = &p - &q.scale(&c);
                        v.iter_mut().zip(qv).for_each(|(a, b)| *a -= c * b);
                    }
                }
                let norm = inner(&v, &v).sqrt();
                p = p.scale(&(1.0 / norm)).pruned(1e-15);
                v.iter_mut().for_each(|a| *a /= norm);
                block.push((p, v));
            }
            elements.extend(block.into_iter().map(|(poly, _)| ProfileElement { ell, poly }));
        }
        Ok(Self { n, elements })
    }

    /// A basis from given harmonic elements, without orthonormalization.
    pub fn from_elements(n: usize, elements: Vec<ProfileElement>) -> Result<Self> {
        for e in &elements {
            if e.poly.nvars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: e.poly.nvars(),
                });
            }
            if !e.poly.is_zero() && e.poly.homogeneous_degree() != Some(e.ell) {
                return Err(Error::NotHomogeneous);
            }
        }
        Ok(Self { n, elements })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn lmax(&self) -> u32 {
        self.elements.iter().map(|e| e.ell).max().unwrap_or(0)
    }

    pub fn elements(&self) -> &[ProfileElement] {
        &self.elements
    }

    pub fn ell(&self, i: usize) -> u32 {
        self.elements[i].ell
    }

    /// Index range of the degree-ℓ block.
    pub fn block(&self, ell: u32) -> Range<usize> {
        let start = self.elements.iter().position(|e| e.ell == ell).unwrap_or(self.len());
        let end = start + self.elements[start..].iter().take_while(|e| e.ell == ell).count();
        start..end
    }

    /// Value, gradient and Hessian of |x|^{d−ℓ_i} p_i(x) at x ≠ 0.
    pub fn element_jet(&self, i: usize, d: f64, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
        let e = &self.elements[i];
        radial_poly_jet(&e.poly, d - e.ell as f64, x)
    }

    /// L² Gram matrix of the profiles under an exact quadrature.
    pub fn gram(&self) -> Result<Matrix> {
        let grid = exact_quadrature_grid(self.n, self.lmax())?;
        let points = grid.points();
        let weights = grid.quadrature_weights();
        let values: Vec<Vec<f64>> = self
            .elements
            .iter()
            .map(|e| points.iter().map(|x| e.poly.eval_unchecked(x)).collect())
            .collect();
        Ok(Matrix::from_fn(self.len(), self.len(), |i, j| {
            values[i].iter().zip(&values[j]).zip(&weights).map(|((a, b), w)| a * b * w).sum()
        }))
    }

    /// L² projection coefficients ⟨g, p_i⟩ for an orthonormal basis.
    pub fn expand(&self, g: impl Fn(&[f64]) -> f64, quadrature_degree: u32) -> Result<Vec<f64>> {
        let grid = exact_quadrature_grid(self.n, self.lmax().max(quadrature_degree))?;
        let points = grid.points();
        let weights = grid.quadrature_weights();
        let gv: Vec<f64> = points.iter().map(|x| g(x)).collect();
        Ok(self
            .elements
            .iter()
            .map(|e| {
                points
                    .iter()
                    .zip(&gv)
                    .zip(&weights)
                    .map(|((x, g), w)| w * g * e.poly.eval_unchecked(x))
                    .sum()
            })
            .collect())
    }
}

/// Value, gradient and Hessian of r^α p(x), r = |x|.
pub(crate) fn radial_poly_jet(p: &FloatPoly, alpha: f64, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
    let (pv, pg, ph) = p.jet_at(x);
    if alpha == 0.0 {
        return (pv, pg, ph);
    }
    let n = x.len();
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let ra = r2.powf(0.5 * alpha);
    let ra2 = ra / r2;
    let ra4 = ra2 / r2;
    let value = ra * pv;
    let grad: Vec<f64> = (0..n).map(|i| ra * pg[i] + alpha * ra2 * pv * x[i]).collect();
    let hess = SymMatrix::from_upper_fn(n, |i, j| {
        let mut h = ra * ph.get(i, j) + alpha * ra2 * (x[i] * pg[j] + pg[i] * x[j]);
        h += pv * alpha * (alpha - 2.0) * ra4 * x[i] * x[j];
        if i == j {
            h += pv * alpha * ra2;
        }
        h
    });
    (value, grad, hess)
}
