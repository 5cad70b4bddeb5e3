//! Fully nonlinear operators F acting on symmetric matrices.
//!
//! Gradients follow the convention dF = Σ_{i,j} G_ij dM_ij over ordered
//! pairs, so a symmetric off-diagonal perturbation of size h moves F by 2hG_ij.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{checked_spd, eig_sym, SymMatrix};
use crate::poly::format_f64;

pub const GRAD_FD_STEP: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorKind {
    /// tr(A·M) with A symmetric positive definite.
    Linear { a: SymMatrix },
    /// Σ arctan λ_i(M) − c.
    SpecialLagrangian { c: f64 },
    /// tr(M) + eps·sin(M₁₁), |eps| < 1/2.
    PerturbedLinear { eps: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticOperator {
    n: usize,
    kind: OperatorKind,
}

impl EllipticOperator {
    pub fn new(n: usize, kind: OperatorKind) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension(n));
        }
        match &kind {
            OperatorKind::Linear { a } => {
                if a.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.dim(),
                    });
                }
                checked_spd(a)?;
            }
            OperatorKind::SpecialLagrangian { c } => {
                if !c.is_finite() {
                    return Err(Error::NonFinite("phase c"));
                }
            }
            OperatorKind::PerturbedLinear { eps } => {
                if !eps.is_finite() || eps.abs() >= 0.5 {
                    return Err(Error::InvalidOperator(format!(
                        "perturbed operator needs |eps| < 1/2, got {eps}"
                    )));
                }
            }
        }
        Ok(Self { n, kind })
    }

    pub fn linear(a: SymMatrix) -> Result<Self> {
        Self::new(a.dim(), OperatorKind::Linear { a })
    }

    pub fn special_lagrangian(n: usize, c: f64) -> Result<Self> {
        Self::new(n, OperatorKind::SpecialLagrangian { c })
    }

    pub fn perturbed_linear(n: usize, eps: f64) -> Result<Self> {
        Self::new(n, OperatorKind::PerturbedLinear { eps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    fn check(&self, m: &SymMatrix) -> Result<()> {
        if m.dim() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: m.dim(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite("operator argument"));
        }
        Ok(())
    }

    pub fn eval(&self, m: &SymMatrix) -> Result<f64> {
        self.check(m)?;
        Ok(match &self.kind {
            OperatorKind::Linear { a } => a.frobenius_inner(m),
            OperatorKind::SpecialLagrangian { c } => {
                eig_sym(m)?.values.iter().map(|l| l.atan()).sum::<f64>() - c
            }
            OperatorKind::PerturbedLinear { eps } => m.trace() + eps * m.get(0, 0).sin(),
        })
    }

    /// Analytic DF(M).
    pub fn grad(&self, m: &SymMatrix) -> Result<SymMatrix> {
        self.check(m)?;
        Ok(match &self.kind {
            OperatorKind::Linear { a } => a.clone(),
            OperatorKind::SpecialLagrangian { .. } => eig_sym(m)?.map_values(|l| 1.0 / (1.0 + l * l)),
            OperatorKind::PerturbedLinear { eps } => {
                let mut g = SymMatrix::identity(self.n);
                g.set(0, 0, 1.0 + eps * m.get(0, 0).cos());
                g
            }
        })
    }

    /// DF(M) by central differences over the symmetric coordinates.
    pub fn grad_fd(&self, m: &SymMatrix, step: f64) -> Result<SymMatrix> {
        self.check(m)?;
        let mut g = SymMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let mut plus = m.clone();
                let mut minus = m.clone();
                plus.set(i, j, m.get(i, j) + step);
                minus.set(i, j, m.get(i, j) - step);
                let diff = self.eval(&plus)? - self.eval(&minus)?;
                let moved = if i == j { 2.0 * step } else { 4.0 * step };
                g.set(i, j, diff / moved);
            }
        }
        Ok(g)
    }

    /// F(0).
    pub fn f_at_zero(&self) -> f64 {
        self.eval(&SymMatrix::zeros(self.n)).expect("zero matrix has the operator's dimension")
    }

    /// Empirical ellipticity window: extreme eigenvalues of DF over `samples`.
    pub fn ellipticity_range(&self, samples: &[SymMatrix]) -> Result<(f64, f64)> {
        if samples.is_empty() {
            return Err(Error::ConfigInvalid("ellipticity range needs at least one sample".into()));
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in samples {
            let values = eig_sym(&self.grad(m)?)?.values;
            lo = lo.min(values[0]);
            hi = hi.max(values[values.len() - 1]);
        }
        Ok((lo, hi))
    }
}

impl fmt::Display for EllipticOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            OperatorKind::Linear { a } => write!(f, "linear:A={a}"),
            OperatorKind::SpecialLagrangian { c } => write!(f, "speclag:c={}", format_f64(*c)),
            OperatorKind::PerturbedLinear { eps } => write!(f, "perturbed:eps={}", format_f64(*eps)),
        }
    }
}

/// Parses `linear:A=[[..],..]`, `speclag:c=<float>` or `perturbed:eps=<float>`.
/// A linear operator's matrix must be n×n.
pub fn parse_operator_spec(s: &str, n: usize) -> Result<EllipticOperator> {
    let Some(colon) = s.find(':') else {
        return Err(Error::parse(s.len(), "expected '<kind>:<param>=<value>'"));
    };
    let (kind, rest) = (&s[..colon], &s[colon + 1..]);
    let param_start = colon + 1;
    let Some(eq) = rest.find('=') else {
        return Err(Error::parse(s.len(), "expected '=' after the parameter name"));
    };
    let (param, value) = (rest[..eq].trim(), &rest[eq + 1..]);
    let value_start = param_start + eq + 1;
    let scalar = || -> Result<f64> {
        value
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(value_start, format!("invalid number '{value}'")))
    };
    let expect_param = |name: &str| -> Result<()> {
        if param == name {
            Ok(())
        } else {
            Err(Error::parse(param_start, format!("operator '{kind}' takes parameter '{name}', got '{param}'")))
        }
    };
    match kind.trim() {
        "linear" => {
            expect_param("A")?;
            let rows: Vec<Vec<f64>> = serde_json::from_str(value).map_err(|e| {
                Error::parse(value_start + e.column().saturating_sub(1), format!("invalid matrix: {e}"))
            })?;
            let a = SymMatrix::from_rows(&rows).map_err(|e| Error::parse(value_start, e.to_string()))?;
            EllipticOperator::new(n, OperatorKind::Linear { a })
        }
        "speclag" => {
            expect_param("c")?;
            EllipticOperator::special_lagrangian(n, scalar()?)
        }
        "perturbed" => {
            expect_param("eps")?;
            EllipticOperator::perturbed_linear(n, scalar()?)
        }
        other => Err(Error::parse(0, format!("unknown operator kind '{other}'"))),
    }
}
