//! Degree-d homogeneous functions u(x) = |x|^d g(x/|x|) on R^n \ {0}.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::poly::FloatPoly;
use crate::profile::{radial_poly_jet, ProfileBasis, ProfileElement};
use crate::sphere::GridProfile;

pub const ORIGIN_CUTOFF: f64 = 1e-14;
pub const UNIT_TOLERANCE: f64 = 1e-12;
pub const HESSIAN_FD_STEP: f64 = 1e-4;
pub const GRADIENT_FD_STEP: f64 = 1e-5;

/// Sampling radii of the annulus used throughout.
pub const ANNULUS_RADII: [f64; 3] = [0.5, 1.0, 2.0];

/// Profile given by coefficients over a [`ProfileBasis`], optionally composed
/// with a symmetric linear change of variables: u(x) = Σ c_i |Sx|^{d−ℓ_i} p_i(Sx).
#[derive(Debug, Clone)]
pub struct CoefProfile {
    basis: Arc<ProfileBasis>,
    coefficients: Vec<f64>,
    transform: Option<SymMatrix>,
    /// Σ_{ℓ_i = ℓ} c_i p_i per degree ℓ.
    blocks: Vec<(u32, FloatPoly)>,
}

impl CoefProfile {
    pub fn new(basis: Arc<ProfileBasis>, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("profile coefficients"));
        }
        let mut blocks: Vec<(u32, FloatPoly)> = Vec::new();
        for (e, c) in basis.elements().iter().zip(&coefficients) {
            if *c == 0.0 {
                continue;
            }
            let term = e.poly.scale(c);
            match blocks.iter_mut().find(|(l, _)| *l == e.ell) {
                Some((_, p)) => *p = &*p + &term,
                None => blocks.push((e.ell, term)),
            }
        }
        Ok(Self {
            basis,
            coefficients,
            transform: None,
            blocks,
        })
    }

    pub fn with_transform(mut self, s: SymMatrix) -> Result<Self> {
        if s.dim() != self.basis.n() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.n(),
                found: s.dim(),
            });
        }
        self.transform = Some(s);
        Ok(self)
    }

    pub fn basis(&self) -> &ProfileBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn transform(&self) -> Option<&SymMatrix> {
        self.transform.as_ref()
    }

    fn jet(&self, d: f64, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
        let y = match &self.transform {
            Some(s) => s.mul_vec(x),
            None => x.to_vec(),
        };
        let n = x.len();
        let mut value = 0.0;
        let mut grad = vec![0.0; n];
        let mut hess = SymMatrix::zeros(n);
        for (ell, p) in &self.blocks {
            let (v, g, h) = radial_poly_jet(p, d - *ell as f64, &y);
            value += v;
            grad.iter_mut().zip(&g).for_each(|(a, b)| *a += b);
            hess = &hess + &h;
        }
        match &self.transform {
            Some(s) => (value, s.mul_vec(&grad), hess.sandwich(s)),
            None => (value, grad, hess),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Profile {
    /// A homogeneous polynomial; u is the polynomial itself.
    Polynomial(FloatPoly),
    Grid(GridProfile),
    Coef(CoefProfile),
}

#[derive(Debug, Clone)]
pub struct HomogeneousFunction {
    n: usize,
    degree: f64,
    profile: Profile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaplaceSplit {
    pub lambda: f64,
    pub radial_term: f64,
    pub spherical_term: f64,
}

/// λ = d(d+n−2).
pub fn eigen_lambda(n: usize, d: f64) -> f64 {
    d * (d + n as f64 - 2.0)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl HomogeneousFunction {
    /// u = p for a homogeneous polynomial p; the degree is p's degree.
    pub fn from_polynomial(p: FloatPoly) -> Result<Self> {
        let d = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
        Ok(Self {
            n: p.nvars(),
            degree: d as f64,
            profile: Profile::Polynomial(p),
        })
    }

    /// Like [`from_polynomial`](Self::from_polynomial) but the declared degree
    /// must match the polynomial's.
    pub fn polynomial_with_degree(p: FloatPoly, d: f64) -> Result<Self> {
        let u = Self::from_polynomial(p)?;
        if (u.degree - d).abs() > 1e-9 {
            return Err(Error::DegreeMismatch {
                declared: d,
                actual: u.degree as u32,
            });
        }
        Ok(u)
    }

    /// A homogeneous polynomial paired with an arbitrary declared degree, for
    /// consistency probes that must see the mismatch.
    pub fn polynomial_with_declared_degree(p: FloatPoly, d: f64) -> Result<Self> {
        let mut u = Self::from_polynomial(p)?;
        u.degree = d;
        Ok(u)
    }

    pub fn from_grid(g: GridProfile, d: f64) -> Self {
        Self {
            n: g.grid().ambient_dim(),
            degree: d,
            profile: Profile::Grid(g),
        }
    }

    pub fn from_coefficients(c: CoefProfile, d: f64) -> Self {
        Self {
            n: c.basis().n(),
            degree: d,
            profile: Profile::Coef(c),
        }
    }

    /// u = |x|^d.
    pub fn radial_power(n: usize, d: f64) -> Result<Self> {
        Self::singular(n, d, FloatPoly::constant(n, 1.0))
    }

    /// u = |x|^{d−ℓ} h(x) for a homogeneous polynomial h of degree ℓ.
    pub fn singular(n: usize, d: f64, h: FloatPoly) -> Result<Self> {
        let ell = h.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
        let basis = ProfileBasis::from_elements(n, vec![ProfileElement { ell, poly: h }])?;
        Ok(Self::from_coefficients(CoefProfile::new(Arc::new(basis), vec![1.0])?, d))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> f64 {
        self.degree
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn lambda(&self) -> f64 {
        eigen_lambda(self.n, self.degree)
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        let r = norm(x);
        if !r.is_finite() {
            return Err(Error::NonFinite("evaluation point"));
        }
        if r < ORIGIN_CUTOFF {
            return Err(Error::OriginEvaluation { norm: r });
        }
        Ok(r)
    }

    /// g(θ) for a unit vector θ (no checks).
    fn profile_value(&self, theta: &[f64]) -> f64 {
        match &self.profile {
            Profile::Polynomial(p) => p.eval_unchecked(theta),
            Profile::Grid(g) => g.eval(theta),
            Profile::Coef(c) => c.jet(self.degree, theta).0,
        }
    }

    fn unchecked_eval(&self, x: &[f64], r: f64) -> f64 {
        match &self.profile {
            Profile::Polynomial(p) => p.eval_unchecked(x),
            Profile::Coef(c) => c.jet(self.degree, x).0,
            Profile::Grid(_) => {
                let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
                r.powf(self.degree) * self.profile_value(&theta)
            }
        }
    }

    /// u(x) = |x|^d g(x/|x|).
    pub fn eval_extension(&self, x: &[f64]) -> Result<f64> {
        let r = self.check_point(x)?;
        Ok(self.unchecked_eval(x, r))
    }

    /// D²u at the unit vector θ (unchecked).
    fn hessian_on_sphere(&self, theta: &[f64]) -> SymMatrix {
        match &self.profile {
            Profile::Polynomial(p) => p.jet_at(theta).2,
            Profile::Coef(c) => c.jet(self.degree, theta).2,
            Profile::Grid(_) => self.fd_hessian(theta),
        }
    }

    fn fd_hessian(&self, x: &[f64]) -> SymMatrix {
        let h = HESSIAN_FD_STEP;
        let f = |y: &[f64]| self.unchecked_eval(y, norm(y));
        let shifted = |moves: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(i, s) in moves {
                y[i] += s;
            }
            f(&y)
        };
        let f0 = f(x);
        SymMatrix::from_upper_fn(self.n, |i, j| {
            if i == j {
                (shifted(&[(i, h)]) - 2.0 * f0 + shifted(&[(i, -h)])) / (h * h)
            } else {
                (shifted(&[(i, h), (j, h)]) - shifted(&[(i, h), (j, -h)]) - shifted(&[(i, -h), (j, h)])
                    + shifted(&[(i, -h), (j, -h)]))
                    / (4.0 * h * h)
            }
        })
    }

    /// D²u(x) = |x|^{d−2} D²u(x/|x|).
    pub fn hessian_homogeneous(&self, x: &[f64]) -> Result<SymMatrix> {
        let r = self.check_point(x)?;
        let theta: Vec<f64> = x.iter().map(|v| v / r).collect();
        Ok(self.hessian_on_sphere(&theta).scale(r.powf(self.degree - 2.0)))
    }

    /// λ·g(θ) and Δ_S g(θ), so that Δu(θ) = radial + spherical.
    pub fn laplace_split(&self, theta: &[f64]) -> Result<LaplaceSplit> {
        if theta.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: theta.len(),
            });
        }
        let r = norm(theta);
        if (r - 1.0).abs() > UNIT_TOLERANCE {
            return Err(Error::NotUnitVector { norm: r });
        }
        let lambda = self.lambda();
        let g = self.profile_value(theta);
        let spherical_term = match &self.profile {
            Profile::Grid(grid) => grid.eval_lb(theta),
            _ => self.hessian_on_sphere(theta).trace() - lambda * g,
        };
        Ok(LaplaceSplit {
            lambda,
            radial_term: lambda * g,
            spherical_term,
        })
    }

    /// |x·∇u(x) − d·u(x)| with a central-difference gradient.
    pub fn euler_identity_residual(&self, x: &[f64]) -> Result<f64> {
        let r = self.check_point(x)?;
        let h = GRADIENT_FD_STEP;
        let mut radial = 0.0;
        for i in 0..self.n {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            let da = self.eval_extension(&a)?;
            let db = self.eval_extension(&b)?;
            radial += x[i] * (da - db) / (2.0 * h);
        }
        Ok((radial - self.degree * self.unchecked_eval(x, r)).abs())
    }
}
