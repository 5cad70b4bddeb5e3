//! Classification of degree-d homogeneous solutions of F(D²u) = 0.
//!
//! With A = DF(0), any such solution with d ≠ 2 solves tr(A·D²u) = 0, and
//! F(0) = 0 is forced. Under x ↦ A^{−1/2}x this is Laplace's equation, so
//! the family is the harmonic polynomials of degree d composed with A^{−1/2},
//! and nothing for non-integer d or −(n−2) < d < 0.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harmonic::{harmonic_basis, harmonic_dimension};
use crate::homogeneous::HomogeneousFunction;
use crate::linalg::{eig_sym, spd_inv_sqrt, SymMatrix};
use crate::operators::EllipticOperator;
use crate::poly::{FloatPoly, RationalPoly};
use crate::verifier::{verify_linearized, SampleSet};

pub const SINGULAR_FLAG: &str = "outside-theorem-statement";
pub const NON_C1_TOL: f64 = 1e-5;
pub const LINEARIZATION_STEPS: [f64; 2] = [1e-3, 1e-4];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassifyOptions {
    pub f_zero_tol: f64,
    /// The smallest eigenvalue of DF(0) must exceed this.
    pub ellipticity_floor: f64,
    pub integer_tol: f64,
    pub diagnostic_points: usize,
    pub singular_diagnostic_points: usize,
    pub seed: u64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self {
            f_zero_tol: 1e-12,
            ellipticity_floor: 0.0,
            integer_tol: 1e-9,
            diagnostic_points: 20,
            singular_diagnostic_points: 100,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Family {
    NoSolutions {
        reason: String,
    },
    ZeroOnly {
        reason: String,
    },
    HarmonicPolynomialFamily {
        degree: u32,
        /// Elements h(A^{−1/2}x).
        basis: Vec<FloatPoly>,
        /// The harmonic polynomials h, exact.
        reference_basis: Vec<RationalPoly>,
        transform: SymMatrix,
    },
    SingularHarmonicFamily {
        ell: u32,
        degree: i64,
        description: String,
        flag: String,
        /// Harmonic polynomials h of degree ℓ; elements are |Sx|^{d−ℓ} h(Sx).
        profiles: Vec<RationalPoly>,
        transform: SymMatrix,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::NoSolutions { .. } => "NoSolutions",
            Family::ZeroOnly { .. } => "ZeroOnly",
            Family::HarmonicPolynomialFamily { .. } => "HarmonicPolynomialFamily",
            Family::SingularHarmonicFamily { .. } => "SingularHarmonicFamily",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Family::HarmonicPolynomialFamily { basis, .. } => basis.len(),
            Family::SingularHarmonicFamily { profiles, .. } => profiles.len(),
            _ => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElementDiagnostic {
    pub element: String,
    /// sup over annulus samples of |tr(A·D²u)| / (1 + ‖D²u‖_F).
    pub sampled_residual: f64,
    /// Largest coefficient of the polynomial tr(A·D²p), when u is a polynomial.
    pub symbolic_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub d: f64,
    pub linearization: SymMatrix,
    pub mu_estimate: f64,
    pub f_at_zero: f64,
    pub family: Family,
    pub diagnostics: Vec<ElementDiagnostic>,
}

/// DF(0) from the analytic gradient.
pub fn linearize_at_zero(f: &EllipticOperator) -> Result<SymMatrix> {
    f.grad(&SymMatrix::zeros(f.n()))
}

/// DF(0) by central differences at two steps; the steps must agree within
/// 1e−5, and the result is their Richardson extrapolation.
pub fn linearize_at_zero_fd(f: &EllipticOperator) -> Result<SymMatrix> {
    linearize_fd_with(f.n(), |m| f.eval(m))
}

/// [`linearize_at_zero_fd`] for an arbitrary scalar function of symmetric matrices.
pub fn linearize_fd_with(n: usize, f: impl Fn(&SymMatrix) -> Result<f64>) -> Result<SymMatrix> {
    let quotient = |t: f64| -> Result<SymMatrix> {
        let mut g = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut e = SymMatrix::zeros(n);
                e.set(i, j, t);
                let diff = f(&e)? - f(&e.scale(-1.0))?;
                g.set(i, j, diff / if i == j { 2.0 * t } else { 4.0 * t });
            }
        }
        Ok(g)
    };
    let [t1, t2] = LINEARIZATION_STEPS;
    let coarse = quotient(t1)?;
    let fine = quotient(t2)?;
    let discrepancy = (&coarse - &fine).frobenius_norm();
    if !discrepancy.is_finite() || discrepancy > NON_C1_TOL * fine.frobenius_norm().max(1.0) {
        return Err(Error::NonC1AtZero { discrepancy });
    }
    let ratio = (t1 / t2).powi(2);
    let extrapolated = &fine + &(&fine - &coarse).scale(1.0 / (ratio - 1.0));
    SymMatrix::symmetrize(&extrapolated.to_dense())
}

/// Harmonic basis of degree d composed with A^{−1/2}; A = I returns the
/// harmonic basis itself.
pub fn candidate_basis(a: &SymMatrix, n: usize, d: u32) -> Result<Vec<FloatPoly>> {
    Ok(candidate_parts(a, n, d)?.0)
}

fn candidate_parts(a: &SymMatrix, n: usize, d: u32) -> Result<(Vec<FloatPoly>, Vec<RationalPoly>, SymMatrix)> {
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.dim(),
        });
    }
    let reference = harmonic_basis(n, d)?.elements;
    if a.is_identity() {
        let basis = reference.iter().map(RationalPoly::to_float).collect();
        return Ok((basis, reference, SymMatrix::identity(n)));
    }
    let s = spd_inv_sqrt(a)?;
    let s_dense = s.to_dense();
    let basis = reference
        .iter()
        .map(|h| h.to_float().compose_linear(&s_dense))
        .collect::<Result<Vec<_>>>()?;
    Ok((basis, reference, s))
}

/// Largest coefficient of tr(A·D²p).
pub fn symbolic_linearized_residual(a: &SymMatrix, p: &FloatPoly) -> f64 {
    p.second_order_operator(|i, j| a.get(i, j)).max_abs_coefficient()
}

fn is_integer(d: f64, tol: f64) -> Option<i64> {
    let r = d.round();
    ((d - r).abs() <= tol).then_some(r as i64)
}

pub fn classify(f: &EllipticOperator, n: usize, d: f64, opts: &ClassifyOptions) -> Result<ClassificationReport> {
    if f.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: f.n(),
        });
    }
    if !d.is_finite() {
        return Err(Error::NonFinite("degree"));
    }
    if is_integer(d, opts.integer_tol) == Some(2) {
        return Err(Error::DegreeTwoUnsupported);
    }
    let f_at_zero = f.f_at_zero();
    let a = linearize_at_zero(f)?;
    let ev = eig_sym(&a)?.values;
    let (lo, hi) = (ev[0], ev[ev.len() - 1]);
    let mu_estimate = lo.min(1.0 / hi);
    let report = |family: Family, diagnostics: Vec<ElementDiagnostic>| ClassificationReport {
        n,
        d,
        linearization: a.clone(),
        mu_estimate,
        f_at_zero,
        family,
        diagnostics,
    };

    if f_at_zero.abs() > opts.f_zero_tol {
        let reason = format!(
            "F(0) = {f_at_zero} is nonzero, but a homogeneous solution of degree d != 2 forces F(0) = 0"
        );
        return Ok(report(Family::NoSolutions { reason }, Vec::new()));
    }
    if lo <= opts.ellipticity_floor {
        return Err(Error::NotElliptic { min_eigenvalue: lo });
    }

    let integer = is_integer(d, opts.integer_tol);
    let gap_low = -(n as f64 - 2.0);
    let Some(k) = integer else {
        let reason = format!("d = {d} is not an integer");
        return Ok(report(Family::ZeroOnly { reason }, Vec::new()));
    };
    if gap_low < k as f64 && k < 0 {
        let reason = format!("-(n-2) < d < 0 with n = {n}, d = {d}");
        return Ok(report(Family::ZeroOnly { reason }, Vec::new()));
    }

    if k >= 0 {
        let degree = k as u32;
        let (basis, reference_basis, transform) = candidate_parts(&a, n, degree)?;
        debug_assert_eq!(basis.len(), harmonic_dimension(n, degree));
        let samples = SampleSet::annulus(n, opts.diagnostic_points, opts.seed)?;
        let diagnostics = basis
            .iter()
            .map(|p| {
                let u = HomogeneousFunction::from_polynomial(p.clone())?;
                Ok(ElementDiagnostic {
                    element: p.to_string(),
                    sampled_residual: verify_linearized(&u, &a, &samples)?.sup_residual,
                    symbolic_residual: Some(symbolic_linearized_residual(&a, p)),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let family = Family::HarmonicPolynomialFamily {
            degree,
            basis,
            reference_basis,
            transform,
        };
        return Ok(report(family, diagnostics));
    }

    // integer d ≤ −(n−2): |x|^{2−n−2ℓ} h(x) with h harmonic of degree ℓ = 2−n−d
    let ell = (2 - n as i64 - k) as u32;
    let profiles = harmonic_basis(n, ell)?.elements;
    let transform = if a.is_identity() {
        SymMatrix::identity(n)
    } else {
        spd_inv_sqrt(&a)?
    };
    let samples = SampleSet::annulus(n, opts.singular_diagnostic_points, opts.seed)?;
    let diagnostics = profiles
        .iter()
        .map(|h| {
            let u = singular_element(h, k as f64, &transform)?;
            Ok(ElementDiagnostic {
                element: format!("|Sx|^{}*({h})(Sx)", k - ell as i64),
                sampled_residual: verify_linearized(&u, &a, &samples)?.sup_residual,
                symbolic_residual: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let family = Family::SingularHarmonicFamily {
        ell,
        degree: k,
        description: format!(
            "Kelvin transforms |x|^(2-n-2l) h(x) of degree-{ell} harmonic polynomials h, composed with S = A^(-1/2); \
             smooth on R^n \\ {{0}} and solving the linearized equation, but outside the polynomial classification"
        ),
        flag: SINGULAR_FLAG.to_string(),
        profiles,
        transform,
    };
    Ok(report(family, diagnostics))
}

/// u(x) = |Sx|^{d−ℓ} h(Sx).
pub fn singular_element(h: &RationalPoly, d: f64, s: &SymMatrix) -> Result<HomogeneousFunction> {
    let u = HomogeneousFunction::singular(h.nvars(), d, h.to_float())?;
    if s.is_identity() {
        return Ok(u);
    }
    match u.profile() {
        crate::homogeneous::Profile::Coef(c) => {
            Ok(HomogeneousFunction::from_coefficients(c.clone().with_transform(s.clone())?, d))
        }
        _ => unreachable!("singular elements are coefficient profiles"),
    }
}

impl ClassificationReport {
    /// Homogeneous functions for each family element.
    pub fn elements(&self) -> Result<Vec<HomogeneousFunction>> {
        match &self.family {
            Family::HarmonicPolynomialFamily { basis, .. } => basis
                .iter()
                .map(|p| HomogeneousFunction::from_polynomial(p.clone()))
                .collect(),
            Family::SingularHarmonicFamily {
                profiles, transform, ..
            } => profiles.iter().map(|h| singular_element(h, self.d, transform)).collect(),
            _ => Ok(Vec::new()),
        }
    }
}
