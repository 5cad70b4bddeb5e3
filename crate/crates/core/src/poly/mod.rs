//! Sparse multivariate polynomials over exact rationals or floats.

mod coefficient;
mod text;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use coefficient::{rational, Coefficient, CoefficientMode, Rational};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymMatrix};

/// Exponent vector of a monomial, ordered graded-lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .filter(|(&e, _)| e > 0)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }

    /// α! = Π αᵢ!
    pub fn factorial(&self) -> u64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u64).product::<u64>())
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All monomials of total degree `d` in `n` variables, in descending
/// graded-lex order (so `x1^d` comes first).
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        if d == 0 {
            out.push(Monomial(Vec::new()));
        }
        return out;
    }
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Sparse polynomial in `nvars` variables; terms are kept in graded-lex
/// order and zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Multinomial<C: Coefficient = Rational> {
    nvars: usize,
    terms: BTreeMap<Monomial, C>,
}

pub type RationalPoly = Multinomial<Rational>;
pub type FloatPoly = Multinomial<f64>;

impl<C: Coefficient> Multinomial<C> {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: C) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(Monomial::one(nvars), c);
        p
    }

    /// The coordinate function x_{i+1} (zero-based `i`).
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(Monomial(e), C::one());
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, C)>) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: e.len(),
                });
            }
            p.add_term(Monomial(e), c);
        }
        Ok(p)
    }

    fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = o.get().clone() + c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in descending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, exponents: &[u32]) -> C {
        self.terms
            .get(&Monomial(exponents.to_vec()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().next_back().map(Monomial::degree)
    }

    /// Degree if all terms share it; the zero polynomial reports `None`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.total_degree()?;
        self.terms.keys().all(|m| m.degree() == d).then_some(d)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.is_zero() || self.homogeneous_degree().is_some()
    }

    fn check_same_vars(&self, other: &Self) {
        assert_eq!(
            self.nvars, other.nvars,
            "polynomials live in different variable counts"
        );
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, v) in &self.terms {
            p.add_term(m.clone(), v.clone() * c.clone());
        }
        p
    }

    /// ∂p/∂x_{i+1}.
    pub fn derivative(&self, i: usize) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut dm = m.0.clone();
            dm[i] -= 1;
            p.add_term(Monomial(dm), c.clone() * C::from_u64(e as u64));
        }
        p
    }

    /// Σᵢ ∂²p/∂xᵢ².
    pub fn laplacian(&self) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            for i in 0..self.nvars {
                let e = m.0[i];
                if e < 2 {
                    continue;
                }
                let mut dm = m.0.clone();
                dm[i] -= 2;
                p.add_term(Monomial(dm), c.clone() * C::from_u64((e * (e - 1)) as u64));
            }
        }
        p
    }

    /// Σᵢⱼ Aᵢⱼ ∂ᵢ∂ⱼp for a constant coefficient matrix given as a closure.
    pub fn second_order_operator(&self, a: impl Fn(usize, usize) -> C) -> Self {
        let mut out = Self::zero(self.nvars);
        for i in 0..self.nvars {
            let di = self.derivative(i);
            for j in 0..self.nvars {
                let aij = a(i, j);
                if aij.is_zero() {
                    continue;
                }
                out = &out + &di.derivative(j).scale(&aij);
            }
        }
        out
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: x.len(),
            });
        }
        Ok(())
    }

    /// Value at `x` by direct monomial summation.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_point(x)?;
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| c.to_f64() * m.eval(x)).sum()
    }

    pub fn gradient_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        let mut g = vec![0.0; self.nvars];
        self.accumulate_derivatives(x, 1.0, Some(&mut g), None);
        Ok(g)
    }

    /// Matrix of second partials at `x`.
    pub fn hessian_at(&self, x: &[f64]) -> Result<SymMatrix> {
        self.check_point(x)?;
        let mut h = SymMatrix::zeros(self.nvars);
        self.accumulate_derivatives(x, 1.0, None, Some(&mut h));
        Ok(h)
    }

    /// Value, gradient and Hessian at `x` in a single pass.
    pub(crate) fn jet_at(&self, x: &[f64]) -> (f64, Vec<f64>, SymMatrix) {
        let mut g = vec![0.0; self.nvars];
        let mut h = SymMatrix::zeros(self.nvars);
        let v = self.accumulate_derivatives(x, 1.0, Some(&mut g), Some(&mut h));
        (v, g, h)
    }

    fn accumulate_derivatives(
        &self,
        x: &[f64],
        scale: f64,
        mut grad: Option<&mut Vec<f64>>,
        mut hess: Option<&mut SymMatrix>,
    ) -> f64 {
        let n = self.nvars;
        let mut value = 0.0;
        let mut pows = vec![0.0; n];
        for (m, c) in &self.terms {
            let c = scale * c.to_f64();
            let e = &m.0;
            // x_k^{e_k - 2}, x_k^{e_k - 1}, x_k^{e_k} products handled per factor
            for k in 0..n {
                pows[k] = if e[k] == 0 { 1.0 } else { x[k].powi(e[k] as i32) };
            }
            let full: f64 = pows.iter().product();
            value += c * full;
            let partial = |skip: &[usize], pows: &[f64]| -> f64 {
                let mut p = 1.0;
                for k in 0..n {
                    if !skip.contains(&k) {
                        p *= pows[k];
                    }
                }
                p
            };
            if let Some(g) = grad.as_deref_mut() {
                for i in 0..n {
                    if e[i] == 0 {
                        continue;
                    }
                    g[i] += c * e[i] as f64 * x[i].powi(e[i] as i32 - 1) * partial(&[i], &pows);
                }
            }
            if let Some(h) = hess.as_deref_mut() {
                for i in 0..n {
                    if e[i] == 0 {
                        continue;
                    }
                    if e[i] >= 2 {
                        let v = c
                            * (e[i] * (e[i] - 1)) as f64
                            * x[i].powi(e[i] as i32 - 2)
                            * partial(&[i], &pows);
                        h.set(i, i, h.get(i, i) + v);
                    }
                    for j in i + 1..n {
                        if e[j] == 0 {
                            continue;
                        }
                        let v = c
                            * (e[i] * e[j]) as f64
                            * x[i].powi(e[i] as i32 - 1)
                            * x[j].powi(e[j] as i32 - 1)
                            * partial(&[i, j], &pows);
                        h.set(i, j, h.get(i, j) + v);
                    }
                }
            }
        }
        value
    }

    /// The polynomial x ↦ p(Bx), fully expanded.
    pub fn compose_linear(&self, b: &Matrix<C>) -> Result<Self> {
        let n = self.nvars;
        if b.rows() != n || b.cols() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n}x{n}"),
                found: format!("{}x{}", b.rows(), b.cols()),
            });
        }
        let max_deg = self.terms.keys().flat_map(|m| m.0.iter().copied()).max().unwrap_or(0);
        // powers[i][k] = (Σⱼ Bᵢⱼ xⱼ)^k
        let mut powers: Vec<Vec<Self>> = Vec::with_capacity(n);
        for i in 0..n {
            let row = Self::from_terms(
                n,
                (0..n).map(|j| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    (e, b.get(i, j).clone())
                }),
            )?;
            let mut pw = vec![Self::constant(n, C::one())];
            for k in 1..=max_deg as usize {
                let next = &pw[k - 1] * &row;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = Self::zero(n);
        for (m, c) in &self.terms {
            let mut term = Self::constant(n, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    term = &term * &powers[i][e as usize];
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    pub fn map_coefficients<D: Coefficient>(&self, f: impl Fn(&C) -> D) -> Multinomial<D> {
        let mut p = Multinomial::<D>::zero(self.nvars);
        for (m, c) in &self.terms {
            p.add_term(m.clone(), f(c));
        }
        p
    }

    pub fn to_float(&self) -> FloatPoly {
        self.map_coefficients(Coefficient::to_f64)
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.values().fold(0.0f64, |m, c| m.max(c.to_f64().abs()))
    }

    /// Parses the text format (`x1^3 - 3*x1*x2^2`). With `nvars = None` the
    /// variable count is the largest index that appears (at least 1).
    pub fn parse(s: &str, nvars: Option<usize>) -> Result<Self> {
        text::parse(s, nvars)
    }
}

impl FloatPoly {
    /// Drops coefficients with |c| ≤ tol.
    pub fn pruned(&self, tol: f64) -> Self {
        let mut p = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            if c.abs() > tol {
                p.add_term(m.clone(), *c);
            }
        }
        p
    }
}

impl<C: Coefficient> std::ops::Add for &Multinomial<C> {
    type Output = Multinomial<C>;
    fn add(self, rhs: &Multinomial<C>) -> Multinomial<C> {
        self.check_same_vars(rhs);
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), c.clone());
        }
        p
    }
}

impl<C: Coefficient> std::ops::Sub for &Multinomial<C> {
    type Output = Multinomial<C>;
    fn sub(self, rhs: &Multinomial<C>) -> Multinomial<C> {
        self.check_same_vars(rhs);
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(m.clone(), -c.clone());
        }
        p
    }
}

impl<C: Coefficient> std::ops::Mul for &Multinomial<C> {
    type Output = Multinomial<C>;
    fn mul(self, rhs: &Multinomial<C>) -> Multinomial<C> {
        self.check_same_vars(rhs);
        let mut p = Multinomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                p.add_term(ma.mul(mb), ca.clone() * cb.clone());
            }
        }
        p
    }
}

impl<C: Coefficient> std::ops::Neg for &Multinomial<C> {
    type Output = Multinomial<C>;
    fn neg(self) -> Multinomial<C> {
        self.scale(&(-C::one()))
    }
}

impl<C: Coefficient> fmt::Display for Multinomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&text::format(self))
    }
}

impl<C: Coefficient> std::str::FromStr for Multinomial<C> {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}

impl<C: Coefficient> Serialize for Multinomial<C> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de, C: Coefficient> Deserialize<'de> for Multinomial<C> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Self::parse(&s, None).map_err(serde::de::Error::custom)
    }
}

/// Shortest round-tripping decimal form; integral values drop the `.0`.
pub fn format_f64(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rp(s: &str, n: usize) -> RationalPoly {
        RationalPoly::parse(s, Some(n)).unwrap()
    }

    fn fp(s: &str, n: usize) -> FloatPoly {
        FloatPoly::parse(s, Some(n)).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(fp("x1^2 + x2^2", 2).eval(&[3.0, 4.0]).unwrap(), 25.0);
        assert_eq!(FloatPoly::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(fp("x1*x2*x3", 3).eval(&[1.0, 2.0, 3.0]).unwrap(), 6.0);
        assert!(matches!(
            fp("x1", 2).eval(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn laplacian_examples() {
        assert_eq!(rp("x1^2 + x2^2", 2).laplacian(), rp("4", 2));
        assert!(rp("x1^2 - x2^2", 2).laplacian().is_zero());
        assert_eq!(rp("x1^3", 1).laplacian(), rp("6*x1", 1));
    }

    #[test]
    fn hessian_examples() {
        let h = fp("x1*x2", 2).hessian_at(&[0.3, -2.0]).unwrap();
        assert_eq!(h.to_rows(), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let h = fp("x1^2 + x2^2", 2).hessian_at(&[5.0, 1.0]).unwrap();
        assert_eq!(h, SymMatrix::identity(2).scale(2.0));
        // symbolic differentiation: p11 = 6x1, p12 = -6x2, p22 = -6x1
        let h = fp("x1^3 - 3*x1*x2^2", 2).hessian_at(&[1.0, 0.0]).unwrap();
        assert_eq!(h.to_rows(), vec![vec![6.0, 0.0], vec![0.0, -6.0]]);
    }

    #[test]
    fn compose_linear_examples() {
        let b = Matrix::from_rows(&[vec![rational(2, 1), rational(0, 1)], vec![rational(0, 1), rational(2, 1)]]).unwrap();
        assert_eq!(rp("x1^2", 2).compose_linear(&b).unwrap(), rp("4*x1^2", 2));
        // (x1 + x2) * x2
        let b = Matrix::from_rows(&[vec![rational(1, 1), rational(1, 1)], vec![rational(0, 1), rational(1, 1)]]).unwrap();
        assert_eq!(rp("x1*x2", 2).compose_linear(&b).unwrap(), rp("x1*x2 + x2^2", 2));
        // 3-4-5 rotation preserves |x|^2 exactly
        let r = Matrix::from_rows(&[vec![rational(3, 5), rational(-4, 5)], vec![rational(4, 5), rational(3, 5)]]).unwrap();
        assert_eq!(rp("x1^2 + x2^2", 2).compose_linear(&r).unwrap(), rp("x1^2 + x2^2", 2));
        let bad = Matrix::from_rows(&[vec![rational(1, 1)]]).unwrap();
        assert!(matches!(rp("x1*x2", 2).compose_linear(&bad), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn float_rotation_preserves_norm_squared() {
        let t: f64 = 0.7;
        let r = Matrix::from_rows(&[vec![t.cos(), -t.sin()], vec![t.sin(), t.cos()]]).unwrap();
        let p = fp("x1^2 + x2^2", 2).compose_linear(&r).unwrap().pruned(1e-14);
        assert!(p.len() == 2);
        assert!((p.coefficient(&[2, 0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn monomial_enumeration_order() {
        let ms = monomials_of_degree(3, 2);
        let e: Vec<_> = ms.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(e, vec![vec![2, 0, 0], vec![1, 1, 0], vec![1, 0, 1], vec![0, 2, 0], vec![0, 1, 1], vec![0, 0, 2]]);
        assert_eq!(monomials_of_degree(3, 3).len(), 10);
    }

    #[test]
    fn homogeneity_queries() {
        assert_eq!(rp("x1^2 - 3*x1*x2", 2).homogeneous_degree(), Some(2));
        assert_eq!(rp("x1^2 + x2", 2).homogeneous_degree(), None);
        assert!(RationalPoly::zero(2).is_homogeneous());
    }

    fn random_poly(n: usize, max_deg: u32) -> impl Strategy<Value = FloatPoly> {
        prop::collection::vec((prop::collection::vec(0u32..=max_deg, n), -1.0f64..1.0), 1..8)
            .prop_map(move |ts| {
                FloatPoly::from_terms(
                    n,
                    ts.into_iter().filter(|(e, _)| e.iter().sum::<u32>() <= max_deg),
                )
                .unwrap()
            })
    }

    fn rotation(n: usize, angles: &[f64]) -> Matrix<f64> {
        // product of Givens rotations in successive coordinate planes
        let mut q = Matrix::identity(n);
        for (k, &a) in angles.iter().enumerate() {
            let (i, j) = (k % n, (k + 1) % n);
            if i == j {
                continue;
            }
            let g = Matrix::from_fn(n, n, |r, c| match (r, c) {
                _ if r == i && c == i => a.cos(),
                _ if r == j && c == j => a.cos(),
                _ if r == i && c == j => -a.sin(),
                _ if r == j && c == i => a.sin(),
                _ if r == c => 1.0,
                _ => 0.0,
            });
            q = q.matmul(&g).unwrap();
        }
        q
    }

    proptest! {
        #[test]
        fn hessian_matches_central_differences(
            p in random_poly(3, 5),
            x in prop::collection::vec(-1.0f64..1.0, 3),
        ) {
            let h = p.hessian_at(&x).unwrap();
            let step = 1e-5;
            let f = |y: &[f64]| p.eval(y).unwrap();
            // FD of the analytic gradient
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += step;
                xm[i] -= step;
                let gp = p.gradient_at(&xp).unwrap();
                let gm = p.gradient_at(&xm).unwrap();
                for j in 0..3 {
                    let fd = (gp[j] - gm[j]) / (2.0 * step);
                    let exact = h.get(i, j);
                    prop_assert!((fd - exact).abs() <= 1e-6 * (1.0 + exact.abs()), "{fd} vs {exact}");
                }
            }
            // and the diagonal from function values
            for i in 0..3 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += 1e-4;
                xm[i] -= 1e-4;
                let fd = (f(&xp) - 2.0 * f(&x) + f(&xm)) / 1e-8;
                prop_assert!((fd - h.get(i, i)).abs() <= 1e-5 * (1.0 + h.get(i, i).abs()));
            }
        }

        #[test]
        fn laplacian_commutes_with_rotations(
            p in random_poly(3, 5),
            angles in prop::collection::vec(-3.0f64..3.0, 3),
        ) {
            let q = rotation(3, &angles);
            let lhs = p.compose_linear(&q).unwrap().laplacian();
            let rhs = p.laplacian().compose_linear(&q).unwrap();
            let diff = &lhs - &rhs;
            prop_assert!(diff.max_abs_coefficient() <= 1e-12, "{}", diff.max_abs_coefficient());
        }

        #[test]
        fn text_roundtrip_float(p in random_poly(3, 4)) {
            let s = p.to_string();
            prop_assert_eq!(FloatPoly::parse(&s, Some(3)).unwrap(), p);
        }

        #[test]
        fn text_roundtrip_rational(
            ts in prop::collection::vec((prop::collection::vec(0u32..4, 2), -50i64..50, 1i64..9), 0..6)
        ) {
            let p = RationalPoly::from_terms(2, ts.into_iter().map(|(e, a, b)| (e, rational(a, b)))).unwrap();
            let s = p.to_string();
            prop_assert_eq!(RationalPoly::parse(&s, Some(2)).unwrap(), p);
        }
    }

    #[test]
    fn laplacian_commutes_with_pythagorean_rotation_exactly() {
        let p = rp("x1^4 - 2*x1*x2^2*x3 + 7/3*x3^3 + x2", 3);
        let q = Matrix::from_rows(&[
            vec![rational(3, 5), rational(-4, 5), rational(0, 1)],
            vec![rational(4, 5), rational(3, 5), rational(0, 1)],
            vec![rational(0, 1), rational(0, 1), rational(1, 1)],
        ])
        .unwrap();
        let q2 = Matrix::from_rows(&[
            vec![rational(1, 1), rational(0, 1), rational(0, 1)],
            vec![rational(0, 1), rational(5, 13), rational(-12, 13)],
            vec![rational(0, 1), rational(12, 13), rational(5, 13)],
        ])
        .unwrap();
        for r in [&q, &q2] {
            assert_eq!(
                p.compose_linear(r).unwrap().laplacian(),
                p.laplacian().compose_linear(r).unwrap()
            );
        }
    }
}
