use minexp::graph::{perturb, random_left_regular, subset_count};
use minexp::linalg::{least_squares, norm_inf, DenseMatrix};
use minexp::nullspace::{complete_rank, negative_count, sample_null_vectors, strong_recoverable_k};
use minexp::rng::seeded;
use minexp::SparseSignal;

/// Lawson–Hanson active-set solver for `min ‖Ax − b‖₂, x ≥ 0`.
fn nnls(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
    let n = a.cols();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    for _ in 0..(3 * n + 10) {
        let r: Vec<f64> = a.mul_vec(&x).iter().zip(b).map(|(p, q)| q - p).collect();
        let w = a.tr_mul_vec(&r);
        let next = (0..n).filter(|&j| !passive[j]).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        match next {
            Some(j) if w[j] > 1e-12 => passive[j] = true,
            _ => break,
        }
        loop {
            let cols: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let z = least_squares(&a.select_columns(&cols), b).unwrap();
            if z.iter().all(|v| *v > 0.0) {
                x = vec![0.0; n];
                for (&j, v) in cols.iter().zip(&z) {
                    x[j] = *v;
                }
                break;
            }
            let mut step = 1.0f64;
            for (&j, &zj) in cols.iter().zip(&z) {
                if zj <= 0.0 {
                    step = step.min(x[j] / (x[j] - zj));
                }
            }
            for (&j, &zj) in cols.iter().zip(&z) {
                x[j] += step * (zj - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

#[test]
fn neighbourhoods_cover_complete_rank() {
    for seed in 0..6 {
        let g = random_left_regular(10, 7, 2, seed).unwrap();
        let a = perturb(&g, 0.1, seed).unwrap();
        let cr = complete_rank(&a, 7).unwrap().value;
        for mask in 1u32..(1 << 10) {
            let s: Vec<usize> = (0..10).filter(|j| mask >> j & 1 == 1).collect();
            assert!(g.neighbors(&s).len() >= s.len().min(cr), "seed {seed} S {s:?} cr {cr}");
        }
    }
}

#[test]
fn null_vectors_have_enough_negatives() {
    for seed in 0..5 {
        let g = random_left_regular(14, 10, 3, seed).unwrap();
        let a = perturb(&g, 0.1, seed).unwrap();
        assert!(subset_count(14, 11) < 1_000_000);
        let cr = complete_rank(&a, 10).unwrap().value;
        for w in sample_null_vectors(&a, 50, seed) {
            assert!(norm_inf(&a.mul_vec(&w)) <= 1e-8 * norm_inf(&w));
            assert!(negative_count(&w) >= cr.div_ceil(3));
        }
    }
}

#[test]
fn unique_nonnegative_solution_is_min_norm() {
    let mut rng = seeded(5);
    let mut checked = 0;
    for seed in 0..8 {
        let g = random_left_regular(12, 9, 3, seed).unwrap();
        let a = perturb(&g, 0.1, seed).unwrap();
        let k = (1..=3).rev().find(|&k| strong_recoverable_k(&a, k).unwrap().recoverable);
        let Some(k) = k else { continue };
        // Heavily weighted equality rows, identity rows for the norm.
        let lambda = 1e6;
        let dense = a.to_dense();
        let mut rows: Vec<Vec<f64>> = (0..9).map(|i| dense.row(i).iter().map(|v| lambda * v).collect()).collect();
        for j in 0..12 {
            let mut e = vec![0.0; 12];
            e[j] = 1.0;
            rows.push(e);
        }
        let stacked = DenseMatrix::from_rows(&rows).unwrap();
        for _ in 0..10 {
            let x = SparseSignal::random(12, k, 0.1, 1.1, &mut rng).unwrap();
            let mut rhs: Vec<f64> = a.mul_vec(x.entries()).iter().map(|v| lambda * v).collect();
            rhs.extend(std::iter::repeat_n(0.0, 12));
            let est = nnls(&stacked, &rhs);
            let err = est.iter().zip(x.entries()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            assert!(err < 1e-6, "seed {seed} k {k} err {err}");
            checked += 1;
        }
    }
    assert!(checked >= 30);
}
