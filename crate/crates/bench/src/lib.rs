//! Criterion benchmarks for the core kernels; see `benches/`.

use minexp::recovery::SparseSignal;
use minexp::rng::seeded;
use minexp::MeasurementMatrix;

/// A perturbed random left-regular matrix and a `k`-sparse signal on it.
pub fn instance(n: usize, m: usize, d: usize, k: usize, seed: u64) -> (MeasurementMatrix, SparseSignal, Vec<f64>) {
    let g = minexp::graph::random_left_regular(n, m, d, seed).expect("valid shape");
    let a = minexp::graph::perturb(&g, 0.1, seed + 1).expect("valid perturbation");
    let x = SparseSignal::random(n, k, 0.1, 1.1, &mut seeded(seed + 2)).expect("valid sparsity");
    let y = a.mul_vec(x.entries());
    (a, x, y)
}
