use std::sync::OnceLock;

use proptest::prelude::*;

use homsol_core::homogeneous::HomogeneousFunction;
use homsol_core::poly::{monomials_of_degree, FloatPoly};
use homsol_core::profile::ProfileBasis;
use homsol_core::sphere::{self, build_lb, DiscreteLB, GridProfile, SphereGrid};

const LADDER: [(usize, usize); 4] = [(12, 24), (24, 48), (48, 96), (96, 192)];

fn eigencheck_ladder(profile: &dyn Fn(&[f64]) -> f64, d: f64) -> Vec<f64> {
    LADDER
        .iter()
        .map(|&(a, b)| {
            let grid = SphereGrid::latlon(a, b);
            let lb = build_lb(grid).unwrap();
            sphere::profile_eigencheck(&lb, &GridProfile::sample(grid, profile).unwrap(), d).unwrap()
        })
        .collect()
}

fn ratios(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| w[0] / w[1]).collect()
}

fn poly(s: &str) -> FloatPoly {
    FloatPoly::parse(s, Some(3)).unwrap()
}

/// Every real harmonic of degree 1 ≤ ℓ ≤ 3, three doublings, max norm.
#[test]
fn all_low_harmonics_converge_second_order() {
    let basis = ProfileBasis::orthonormal(3, 3).unwrap();
    let mut failures = Vec::new();
    for e in basis.elements().iter().filter(|e| e.ell > 0) {
        let errors = eigencheck_ladder(&|x| e.poly.eval(x).unwrap(), e.ell as f64);
        let r = ratios(&errors);
        if !r.iter().all(|q| (3.0..=5.0).contains(q)) {
            failures.push(format!("{} (ℓ={}): ratios {:?}", e.poly, e.ell, r));
        }
    }
    assert!(failures.is_empty(), "not second order:\n{}", failures.join("\n"));
}

#[test]
fn constants_pass_the_eigencheck_exactly() {
    for (a, b) in LADDER {
        let grid = SphereGrid::latlon(a, b);
        let lb = build_lb(grid).unwrap();
        let g = GridProfile::sample(grid, |_| 1.0).unwrap();
        assert!(sphere::profile_eigencheck(&lb, &g, 0.0).unwrap() <= 1e-10);
    }
}

/// Zonal and even-order harmonics: the first-ring truncation error
/// vanishes, so the max-norm error is O(h²).
#[test]
fn zonal_and_even_order_harmonics_converge_second_order() {
    for (text, d) in [
        ("x3", 1.0),
        ("x1^2 - x2^2", 2.0),
        ("x1*x2", 2.0),
        ("2*x3^2 - x1^2 - x2^2", 2.0),
        ("2*x3^3 - 3*x1^2*x3 - 3*x2^2*x3", 3.0),
        ("x1^2*x3 - x2^2*x3", 3.0),
        ("x1*x2*x3", 3.0),
    ] {
        let p = poly(text);
        let r = ratios(&eigencheck_ladder(&|x| p.eval(x).unwrap(), d));
        assert!(r.iter().all(|q| (3.0..=5.0).contains(q)), "{text}: {r:?}");
    }
}

/// Odd azimuthal order m: the first ring next to each pole carries an
/// O(h) pointwise error, so the max-norm ratio sits at 2.
#[test]
fn odd_order_harmonics_converge_first_order_in_max_norm() {
    for (text, d) in [("x1", 1.0), ("x1*x3", 2.0), ("4*x1*x3^2 - x1^3 - x1*x2^2", 3.0), ("x1^3 - 3*x1*x2^2", 3.0)] {
        let p = poly(text);
        let r = ratios(&eigencheck_ladder(&|x| p.eval(x).unwrap(), d));
        assert!(r.iter().all(|q| (1.6..=2.2).contains(q)), "{text}: {r:?}");
    }
}

/// Δ_S(x1²) + 6·x1² = 2 on S², so the continuous check value is 2.
#[test]
fn non_harmonic_profile_fails_the_eigencheck() {
    let p = poly("x1^2");
    let errors = eigencheck_ladder(&|x| p.eval(x).unwrap(), 2.0);
    for (i, e) in errors.iter().enumerate() {
        assert!(*e >= 0.5, "resolution {i}: {e}");
        assert!((e - 2.0).abs() < 0.2, "resolution {i}: {e}");
    }
    assert!(errors.windows(2).all(|w| (w[1] - 2.0).abs() < (w[0] - 2.0).abs()), "{errors:?}");
}

#[test]
fn discrete_operator_is_nonpositive() {
    for grid in [
        SphereGrid::latlon(8, 16),
        SphereGrid::latlon(16, 32),
        SphereGrid::latlon(20, 40),
        SphereGrid::circle(8),
        SphereGrid::circle(33),
        SphereGrid::circle(128),
    ] {
        let lb = build_lb(grid).unwrap();
        assert!(lb.symmetry_defect() <= 1e-12);
        // spectrum() is the spectrum of −L
        let smallest = lb.spectrum().unwrap()[0];
        assert!(smallest >= -1e-10, "{grid:?}: {smallest}");
    }
}

#[test]
fn circle_spectrum_matches_discrete_symbol() {
    let m = 64;
    let lb = build_lb(SphereGrid::circle(m)).unwrap();
    let h = 2.0 * std::f64::consts::PI / m as f64;
    let values = sphere::lowest_eigenvalues(&lb, 9).unwrap();
    let symbol = |k: f64| (2.0 - 2.0 * (k * h).cos()) / (h * h);
    let expected = [0.0, symbol(1.0), symbol(1.0), symbol(2.0), symbol(2.0), symbol(3.0), symbol(3.0), symbol(4.0), symbol(4.0)];
    for (v, e) in values.iter().zip(expected) {
        assert!((v - e).abs() < 1e-9, "{v} vs {e}");
    }
}

fn grid_32() -> &'static (SphereGrid, DiscreteLB) {
    static LB: OnceLock<(SphereGrid, DiscreteLB)> = OnceLock::new();
    LB.get_or_init(|| {
        let grid = SphereGrid::latlon(32, 64);
        (grid, build_lb(grid).unwrap())
    })
}

fn homogeneous_poly() -> impl Strategy<Value = FloatPoly> {
    (1u32..=3).prop_flat_map(|d| {
        let monomials = monomials_of_degree(3, d);
        prop::collection::vec(-1.0f64..1.0, monomials.len()).prop_map(move |c| {
            FloatPoly::from_terms(3, monomials.iter().zip(c).map(|(m, v)| (m.exponents().to_vec(), v))).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    /// The continuous spherical term from the Hessian split and the discrete
    /// operator applied to samples agree up to grid error, pointwise.
    #[test]
    fn split_spherical_term_matches_discrete_operator(p in homogeneous_poly()) {
        let (grid, lb) = grid_32();
        let scale = p.max_abs_coefficient();
        let d = p.homogeneous_degree().unwrap() as f64;
        let u = HomogeneousFunction::polynomial_with_degree(p.clone(), d).unwrap();
        let samples = grid.sample(|x| p.eval(x).unwrap());
        let discrete = lb.apply(&samples).unwrap();
        let mut worst = 0.0f64;
        for (i, v) in discrete.iter().enumerate() {
            let split = u.laplace_split(&grid.point(i)).unwrap();
            worst = worst.max((split.spherical_term - v).abs());
        }
        // first order near the poles; h = π/32
        prop_assert!(worst <= 0.5 * scale, "worst {worst}, scale {scale}");
    }
}
