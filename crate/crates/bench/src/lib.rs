//! Fixtures shared by the benchmarks in `benches/`.

use homsol_core::classifier::{classify, ClassifyOptions};
use homsol_core::homogeneous::HomogeneousFunction;
use homsol_core::operators::EllipticOperator;
use homsol_core::sphere::{GridProfile, SphereGrid};

/// The seven harmonic cubics in three variables.
pub fn cubic_family() -> Vec<HomogeneousFunction> {
    let f = EllipticOperator::special_lagrangian(3, 0.0).expect("valid operator");
    classify(&f, 3, 3.0, &ClassifyOptions::default())
        .and_then(|r| r.elements())
        .expect("cubic family")
}

/// x1² − x2² sampled on `grid`.
pub fn harmonic_profile(grid: SphereGrid) -> GridProfile {
    GridProfile::sample(grid, |x| x[0] * x[0] - x[1] * x[1]).expect("valid grid")
}
