//! Residual minimization over truncated profile spaces.
//!
//! Each run minimizes the RMS of F(D²u) over a fixed annulus sample, where
//! u(x) = Σ c_i |x|^{d−ℓ_i} p_i(x) and the coefficient vector is kept on the
//! unit sphere (so ‖g‖_{L²(S^{n−1})} = 1). A Nelder–Mead phase with restarts
//! is followed by a projected gradient polish with finite-difference
//! gradients and Barzilai–Borwein steps.
//!
//! Whether minimizers of the residual land in the harmonic family is an
//! empirical question; the classification speaks only about exact solutions.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::linearize_at_zero;
use crate::error::{Error, Result};
use crate::homogeneous::{CoefProfile, HomogeneousFunction};
use crate::linalg::{spd_sqrt, SymMatrix};
use crate::operators::{parse_operator_spec, EllipticOperator};
use crate::profile::{exact_quadrature_grid, ProfileBasis};
use crate::verifier::{residual_sup, SampleSet};

pub const HUNT_SAMPLES: usize = 500;
const GRADIENT_STEP: f64 = 1e-7;
const NM_RESTARTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HuntConfig {
    pub operator: String,
    pub n: usize,
    pub d: f64,
    pub lmax: u32,
    pub seeds: usize,
    pub rng_seed: u64,
    pub sample_seed: u64,
    pub max_iters: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
}

impl Default for HuntConfig {
    fn default() -> Self {
        Self {
            operator: "speclag:c=0".into(),
            n: 2,
            d: 3.0,
            lmax: 4,
            seeds: 10,
            rng_seed: 1,
            sample_seed: 42,
            max_iters: 2000,
            tol_residual: 1e-12,
            tol_step: 1e-13,
        }
    }
}

impl HuntConfig {
    pub fn validate(&self) -> Result<EllipticOperator> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if !(2..=3).contains(&self.n) {
            return bad(format!("profile bases exist for n = 2 and n = 3, got n = {}", self.n));
        }
        if !self.d.is_finite() {
            return bad("degree must be finite".into());
        }
        if (self.lmax as f64) < self.d.abs().ceil() {
            return bad(format!(
                "lmax = {} cannot represent degree {}; need lmax >= {}",
                self.lmax,
                self.d,
                self.d.abs().ceil()
            ));
        }
        if self.seeds == 0 || self.max_iters == 0 {
            return bad("seeds and max_iters must be positive".into());
        }
        if !(self.tol_residual >= 0.0 && self.tol_step >= 0.0) {
            return bad("tolerances must be nonnegative".into());
        }
        let f = parse_operator_spec(&self.operator, self.n)?;
        Ok(f)
    }

    pub fn exploratory(&self) -> bool {
        (self.d - 2.0).abs() <= 1e-9
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HuntResult {
    pub seed_index: usize,
    pub best_coefficients: Vec<f64>,
    /// RMS of F(D²u) over the sample set.
    pub best_residual: f64,
    /// sup of |F(D²u)| over the same samples.
    pub sup_residual: f64,
    pub residual_trace: Vec<f64>,
    pub distance_to_harmonic: f64,
    /// Largest |‖c‖ − 1| seen over all iterates.
    pub max_norm_deviation: f64,
    pub exploratory: bool,
}

/// Euclidean norm of the components outside the degree-d block, after
/// normalizing `coefs`; 1 when d is not a nonnegative integer.
pub fn harmonic_distance(coefs: &[f64], basis: &ProfileBasis, d: f64) -> f64 {
    let norm = coefs.iter().map(|c| c * c).sum::<f64>().sqrt();
    let Some(block) = degree_block(basis, d) else {
        return 1.0;
    };
    let inside: f64 = coefs[block].iter().map(|c| c * c).sum();
    ((norm * norm - inside).max(0.0)).sqrt() / norm
}

fn degree_block(basis: &ProfileBasis, d: f64) -> Option<std::ops::Range<usize>> {
    let r = d.round();
    ((d - r).abs() <= 1e-9 && r >= 0.0 && r <= basis.lmax() as f64).then(|| basis.block(r as u32))
}

/// Distance to the harmonic family of tr(A·D²u) = 0: the profile of
/// v(y) = u(A^{1/2}y) is expanded in `basis` and measured as in
/// [`harmonic_distance`], with everything outside the degree-d block
/// (including degrees above lmax) counted.
pub fn harmonic_distance_pullback(coefs: &[f64], basis: &Arc<ProfileBasis>, d: f64, a: &SymMatrix) -> Result<f64> {
    if a.is_identity() {
        return Ok(harmonic_distance(coefs, basis, d));
    }
    let Some(block) = degree_block(basis, d) else {
        return Ok(1.0);
    };
    let t = spd_sqrt(a)?;
    let v = HomogeneousFunction::from_coefficients(CoefProfile::new(basis.clone(), coefs.to_vec())?.with_transform(t)?, d);
    let degree = basis.lmax() + 8;
    let grid = exact_quadrature_grid(basis.n(), degree)?;
    let weights = grid.quadrature_weights();
    let points = grid.points();
    let values: Vec<f64> = points.iter().map(|x| v.eval_extension(x)).collect::<Result<_>>()?;
    let expansion = basis.expand(|x| v.eval_extension(x).unwrap_or(f64::NAN), degree)?;
    let mut total = 0.0;
    let mut outside = 0.0;
    for ((x, g), w) in points.iter().zip(&values).zip(&weights) {
        let inside: f64 = block.clone().map(|i| expansion[i] * basis.elements()[i].poly.eval(x).unwrap_or(0.0)).sum();
        total += w * g * g;
        outside += w * (g - inside).powi(2);
    }
    Ok((outside / total).sqrt())
}

/// Per-sample element Hessians; D²u(x_s) = Σ c_i H_{s,i} is linear in c.
struct Objective<'a> {
    f: &'a EllipticOperator,
    n: usize,
    m: usize,
    /// hessians[s][i] in packed upper-triangular order.
    hessians: Vec<Vec<Vec<f64>>>,
}

impl<'a> Objective<'a> {
    fn new(f: &'a EllipticOperator, basis: &ProfileBasis, d: f64, samples: &SampleSet) -> Self {
        let n = basis.n();
        let hessians = samples
            .points
            .iter()
            .map(|x| {
                (0..basis.len())
                    .map(|i| {
                        let h = basis.element_jet(i, d, x).2;
                        (0..n).flat_map(|r| (r..n).map(move |c| (r, c))).map(|(r, c)| h.get(r, c)).collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            f,
            n,
            m: basis.len(),
            hessians,
        }
    }

    /// Mean square of F(D²u) at the normalized coefficients.
    fn mean_square(&self, c: &[f64]) -> f64 {
        let scale = 1.0 / norm(c);
        let mut total = 0.0;
        for hs in &self.hessians {
            let mut it = (0..self.n * (self.n + 1) / 2).map(|k| (0..self.m).map(|i| c[i] * hs[i][k]).sum::<f64>() * scale);
            let h = SymMatrix::from_upper_fn(self.n, |_, _| it.next().expect("packed entry"));
            let v = self.f.eval(&h).unwrap_or(f64::INFINITY);
            total += v * v;
        }
        total / self.hessians.len() as f64
    }

    fn rms(&self, c: &[f64]) -> f64 {
        self.mean_square(c).sqrt()
    }
}

fn norm(c: &[f64]) -> f64 {
    c.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn normalized(c: &[f64]) -> Vec<f64> {
    let r = norm(c);
    c.iter().map(|v| v / r).collect()
}

struct Run<'a> {
    obj: &'a Objective<'a>,
    cfg: &'a HuntConfig,
    best: Vec<f64>,
    best_value: f64,
    trace: Vec<f64>,
    max_dev: f64,
}

impl<'a> Run<'a> {
    fn project(&mut self, c: &[f64]) -> Vec<f64> {
        let p = normalized(c);
        self.max_dev = self.max_dev.max((norm(&p) - 1.0).abs());
        p
    }

    fn eval(&mut self, c: &[f64]) -> f64 {
        let v = self.obj.rms(c);
        if v < self.best_value {
            self.best_value = v;
            self.best = c.to_vec();
        }
        v
    }

    fn record(&mut self) {
        self.trace.push(self.best_value);
    }

    fn done(&self) -> bool {
        self.best_value <= self.cfg.tol_residual
    }

    /// Adaptive Nelder–Mead with vertices projected onto the unit sphere.
    fn nelder_mead(&mut self, budget: usize) {
        let m = self.obj.m;
        let dim = m as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / dim, 0.75 - 0.5 / dim, 1.0 - 1.0 / dim);
        let mut used = 0;
        let mut step = 0.25;
        for _ in 0..=NM_RESTARTS {
            if used >= budget || self.done() {
                break;
            }
            let start = self.best.clone();
            let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(m + 1);
            let v0 = self.eval(&start);
            simplex.push((start.clone(), v0));
            for i in 0..m {
                let mut x = start.clone();
                x[i] += step;
                let x = self.project(&x);
                let v = self.eval(&x);
                simplex.push((x, v));
            }
            while used < budget && !self.done() {
                used += 1;
                simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
                let diameter = simplex[1..]
                    .iter()
                    .map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                    .fold(0.0, f64::max);
                if diameter <= self.cfg.tol_step.max(1e-14) || simplex[m].1 - simplex[0].1 <= 1e-16 * simplex[0].1 {
                    self.record();
                    break;
                }
                let centroid: Vec<f64> = (0..m).map(|k| simplex[..m].iter().map(|(x, _)| x[k]).sum::<f64>() / dim).collect();
                let worst = simplex[m].clone();
                let toward = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (c - w)).collect() };
                let xr = self.project(&toward(alpha));
                let fr = self.eval(&xr);
                if fr < simplex[0].1 {
                    let xe = self.project(&toward(beta));
                    let fe = self.eval(&xe);
                    simplex[m] = if fe < fr { (xe, fe) } else { (xr, fr) };
                } else if fr < simplex[m - 1].1 {
                    simplex[m] = (xr, fr);
                } else {
                    let (xc, fc) = if fr < worst.1 {
                        let x = self.project(&toward(gamma));
                        let v = self.eval(&x);
                        (x, v)
                    } else {
                        let x = self.project(&toward(-gamma));
                        let v = self.eval(&x);
                        (x, v)
                    };
                    if fc < fr.min(worst.1) {
                        simplex[m] = (xc, fc);
                    } else {
                        let best = simplex[0].0.clone();
                        for vertex in simplex.iter_mut().skip(1) {
                            let shrunk: Vec<f64> = best.iter().zip(&vertex.0).map(|(b, x)| b + delta * (x - b)).collect();
                            let x = normalized(&shrunk);
                            let v = self.obj.rms(&x);
                            *vertex = (x, v);
                        }
                        for (x, v) in simplex.clone() {
                            self.max_dev = self.max_dev.max((norm(&x) - 1.0).abs());
                            if v < self.best_value {
                                self.best_value = v;
                                self.best = x;
                            }
                        }
                    }
                }
                self.record();
            }
            step *= 0.5;
        }
    }

    fn tangent_gradient(&self, c: &[f64]) -> Vec<f64> {
        let h = GRADIENT_STEP;
        let mut g: Vec<f64> = (0..c.len())
            .map(|i| {
                let mut a = c.to_vec();
                let mut b = c.to_vec();
                a[i] += h;
                b[i] -= h;
                (self.obj.mean_square(&a) - self.obj.mean_square(&b)) / (2.0 * h)
            })
            .collect();
        let radial: f64 = g.iter().zip(c).map(|(a, b)| a * b).sum();
        g.iter_mut().zip(c).for_each(|(a, b)| *a -= radial * b);
        g
    }

    /// Projected gradient descent on the mean square with BB steps and
    /// Armijo backtracking.
    fn polish(&mut self, budget: usize) {
        let mut c = self.best.clone();
        let mut fc = self.obj.mean_square(&c);
        let mut g = self.tangent_gradient(&c);
        let mut alpha = 1.0;
        for _ in 0..budget {
            if self.done() {
                break;
            }
            let gg: f64 = g.iter().map(|v| v * v).sum();
            if gg == 0.0 {
                break;
            }
            let mut accepted = None;
            let mut t = alpha;
            for _ in 0..40 {
                let trial: Vec<f64> = c.iter().zip(&g).map(|(x, d)| x - t * d).collect();
                let trial = self.project(&trial);
                let ft = self.obj.mean_square(&trial);
                if ft <= fc - 1e-4 * t * gg {
                    accepted = Some((trial, ft));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, fnext)) = accepted else {
                self.record();
                break;
            };
            let moved = norm(&next.iter().zip(&c).map(|(a, b)| a - b).collect::<Vec<_>>());
            let gn = self.tangent_gradient(&next);
            let s: Vec<f64> = next.iter().zip(&c).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let ss: f64 = s.iter().map(|v| v * v).sum();
            alpha = if sy > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { (2.0 * t).min(1e12) };
            c = next;
            fc = fnext;
            g = gn;
            self.eval(&c);
            self.record();
            if moved <= self.cfg.tol_step {
                break;
            }
        }
    }
}

fn run_seed(obj: &Objective, cfg: &HuntConfig, seed_index: usize) -> (Vec<f64>, f64, Vec<f64>, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(seed_index as u64));
    let start: Vec<f64> = (0..obj.m).map(|_| StandardNormal.sample(&mut rng)).collect();
    let start = normalized(&start);
    let mut run = Run {
        obj,
        cfg,
        best_value: obj.rms(&start),
        best: start.clone(),
        trace: Vec::new(),
        max_dev: (norm(&start) - 1.0).abs(),
    };
    run.record();
    run.nelder_mead(cfg.max_iters);
    run.polish(cfg.max_iters);
    (run.best, run.best_value, run.trace, run.max_dev)
}

/// One result per seed, in seed order.
pub fn hunt(cfg: &HuntConfig) -> Result<Vec<HuntResult>> {
    let f = cfg.validate()?;
    let basis = Arc::new(ProfileBasis::orthonormal(cfg.n, cfg.lmax)?);
    let samples = SampleSet::annulus(cfg.n, HUNT_SAMPLES, cfg.sample_seed)?;
    let obj = Objective::new(&f, &basis, cfg.d, &samples);
    let a = linearize_at_zero(&f)?;
    (0..cfg.seeds)
        .into_par_iter()
        .map(|k| {
            let (best, best_residual, trace, max_dev) = run_seed(&obj, cfg, k);
            let u = HomogeneousFunction::from_coefficients(CoefProfile::new(basis.clone(), best.clone())?, cfg.d);
            let sup = residual_sup(&u, &f, &samples)?.sup_residual;
            Ok(HuntResult {
                seed_index: k,
                distance_to_harmonic: harmonic_distance_pullback(&best, &basis, cfg.d, &a)?,
                best_coefficients: best,
                best_residual,
                sup_residual: sup,
                residual_trace: trace,
                max_norm_deviation: max_dev,
                exploratory: cfg.exploratory(),
            })
        })
        .collect()
}
