//! Homogeneous harmonic polynomials as the exact kernel of the Laplacian.

use std::collections::HashMap;

use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{monomials_of_degree, Coefficient, Monomial, Rational, RationalPoly};

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension of the space of degree-`d` homogeneous harmonic polynomials in `n` variables.
pub fn harmonic_dimension(n: usize, d: u32) -> usize {
    assert!(n >= 1, "harmonic_dimension requires n >= 1");
    let n = n as u64;
    let d = d as u64;
    let all = binomial(n + d - 1, n - 1);
    let lower = if d < 2 { 0 } else { binomial(n + d - 3, n - 1) };
    (all - lower) as usize
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarmonicBasis {
    pub n: usize,
    pub d: u32,
    pub elements: Vec<RationalPoly>,
}

/// Reduced row-echelon form in place; returns pivot columns.
pub(crate) fn rref(rows: &mut [Vec<Rational>]) -> Vec<usize> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = Rational::one() / rows[r][c].clone();
        for v in rows[r].iter_mut() {
            *v = v.clone() * inv.clone();
        }
        for i in 0..nrows {
            if i == r || rows[i][c].is_zero() {
                continue;
            }
            let factor = rows[i][c].clone();
            for k in c..ncols {
                let sub = factor.clone() * rows[r][k].clone();
                rows[i][k] = rows[i][k].clone() - sub;
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Kernel basis of a rational matrix (rows × ncols), one vector per free column.
pub(crate) fn nullspace(mut rows: Vec<Vec<Rational>>, ncols: usize) -> Vec<Vec<Rational>> {
    let pivots = rref(&mut rows);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); ncols];
            v[f] = Rational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -rows[r][f].clone();
            }
            v
        })
        .collect()
}

/// Solves the square system G·c = b exactly.
fn solve(mut g: Vec<Vec<Rational>>, b: Vec<Rational>) -> Vec<Rational> {
    let n = b.len();
    for (row, bi) in g.iter_mut().zip(b) {
        row.push(bi);
    }
    let pivots = rref(&mut g);
    debug_assert_eq!(pivots.len(), n, "Gram matrix must be nonsingular");
    g.into_iter().map(|row| row[n].clone()).collect()
}

/// Matrix of Δ from degree-d monomials (columns, descending grlex) to degree-(d-2).
fn laplacian_matrix(n: usize, d: u32, cols: &[Monomial]) -> Vec<Vec<Rational>> {
    if d < 2 {
        return Vec::new();
    }
    let targets = monomials_of_degree(n, d - 2);
    let row_of: HashMap<Monomial, usize> = targets.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut rows = vec![vec![Rational::zero(); cols.len()]; targets.len()];
    for (j, m) in cols.iter().enumerate() {
        for i in 0..n {
            let e = m.exponents()[i];
            if e < 2 {
                continue;
            }
            let mut t = m.exponents().to_vec();
            t[i] -= 2;
            let r = row_of[&Monomial::new(t)];
            rows[r][j] = rows[r][j].clone() + Rational::from_u64((e * (e - 1)) as u64);
        }
    }
    rows
}

fn kernel_basis(n: usize, d: u32) -> (Vec<Monomial>, Vec<Vec<Rational>>) {
    let cols = monomials_of_degree(n, d);
    let mut kernel = nullspace(laplacian_matrix(n, d, &cols), cols.len());
    rref(&mut kernel);
    (cols, kernel)
}

fn vector_to_poly(n: usize, cols: &[Monomial], v: &[Rational]) -> RationalPoly {
    RationalPoly::from_terms(
        n,
        cols.iter().zip(v).map(|(m, c)| (m.exponents().to_vec(), c.clone())),
    )
    .expect("monomials have n exponents")
}

/// Exact basis of degree-`d` homogeneous harmonic polynomials in `n` variables,
/// canonicalized as the reduced row-echelon form of the Laplacian kernel with
/// monomial columns in descending graded-lex order.
pub fn harmonic_basis(n: usize, d: u32) -> Result<HarmonicBasis> {
    if n == 0 {
        return Err(Error::InvalidDimension(n));
    }
    let (cols, kernel) = kernel_basis(n, d);
    let elements = kernel.iter().map(|v| vector_to_poly(n, &cols, v)).collect();
    Ok(HarmonicBasis { n, d, elements })
}

/// Bombieri weight ⟨x^α, x^α⟩ = α!/d!.
fn bombieri_weight(m: &Monomial) -> Rational {
    let d = m.degree() as u64;
    let dfact: u64 = (1..=d).product();
    Rational::new(m.factorial().into(), dfact.into())
}

/// Orthogonal projection onto the harmonic subspace under the Bombieri inner product.
pub fn project_to_harmonic(p: &RationalPoly) -> Result<RationalPoly> {
    if p.is_zero() {
        return Ok(p.clone());
    }
    let d = p.homogeneous_degree().ok_or(Error::NotHomogeneous)?;
    let n = p.nvars();
    let (cols, kernel) = kernel_basis(n, d);
    let weights: Vec<Rational> = cols.iter().map(bombieri_weight).collect();
    let coords: Vec<Rational> = cols.iter().map(|m| p.coefficient(m.exponents())).collect();
    let inner = |a: &[Rational], b: &[Rational]| -> Rational {
        a.iter()
            .zip(b)
            .zip(&weights)
            .filter(|((x, y), _)| !x.is_zero() && !y.is_zero())
            .fold(Rational::zero(), |acc, ((x, y), w)| acc + x.clone() * y.clone() * w.clone())
    };
    let gram: Vec<Vec<Rational>> = kernel
        .iter()
        .map(|ki| kernel.iter().map(|kj| inner(ki, kj)).collect())
        .collect();
    let rhs: Vec<Rational> = kernel.iter().map(|k| inner(k, &coords)).collect();
    let c = solve(gram, rhs);
    let mut out = vec![Rational::zero(); cols.len()];
    for (ci, k) in c.iter().zip(&kernel) {
        for (o, kv) in out.iter_mut().zip(k) {
            *o = o.clone() + ci.clone() * kv.clone();
        }
    }
    Ok(vector_to_poly(n, &cols, &out))
}
