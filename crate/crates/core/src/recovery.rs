//! Reconstruction of non-negative sparse signals: ℓ1 minimization, reverse
//! expansion recovery for exact measurements, and its noise-tolerant
//! variant with an ℓ1 (or ℓ2) fit on the surviving block.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::MeasurementMatrix;
use crate::linalg::{self, DenseMatrix};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::rng::Rng;

/// Default zero threshold for measurements, relative to `‖y‖∞`.
pub const DEFAULT_ZERO_TOL: f64 = 1e-9;
/// Default ∞-norm tolerance for declaring a recovery successful.
pub const DEFAULT_SUCCESS_TOL: f64 = 1e-6;

/// Non-negative vector together with its support.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSignal {
    entries: Vec<f64>,
    support: Vec<usize>,
}

impl SparseSignal {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if let Some(v) = entries.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidArgument(format!("negative signal entry {v}")));
        }
        let support = entries.iter().enumerate().filter(|(_, v)| **v > 0.0).map(|(i, _)| i).collect();
        Ok(Self { entries, support })
    }

    /// `k` entries on a uniformly random support, values uniform in `[lo, hi]`.
    pub fn random(n: usize, k: usize, lo: f64, hi: f64, rng: &mut Rng) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArgument(format!("sparsity {k} exceeds length {n}")));
        }
        if !(lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidArgument(format!("value range [{lo}, {hi}] must be positive")));
        }
        let mut entries = vec![0.0; n];
        let mut support = index::sample(rng, n, k).into_vec();
        support.sort_unstable();
        for &j in &support {
            entries[j] = rng.random_range(lo..=hi);
        }
        Ok(Self { entries, support })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    None,
    Additive,
}

/// Additive measurement noise `y = Ãx + v`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    pub vector: Vec<f64>,
    pub l1_budget: f64,
}

impl NoiseModel {
    pub fn none(m: usize) -> Self {
        Self { kind: NoiseKind::None, vector: vec![0.0; m], l1_budget: 0.0 }
    }

    pub fn additive(vector: Vec<f64>) -> Self {
        let l1_budget = linalg::norm1(&vector);
        Self { kind: NoiseKind::Additive, vector, l1_budget }
    }

    /// Rescales `direction` so that `10 log₁₀(‖clean‖² / ‖v‖²) = snr_db`.
    /// An infinite SNR gives the zero vector.
    pub fn at_snr(clean: &[f64], direction: &[f64], snr_db: f64) -> Self {
        if snr_db == f64::INFINITY {
            return Self::none(clean.len());
        }
        let (c, dn) = (linalg::norm2(clean), linalg::norm2(direction));
        if c == 0.0 || dn == 0.0 {
            return Self::none(clean.len());
        }
        let target = c / 10f64.powf(snr_db / 20.0);
        Self::additive(direction.iter().map(|v| v * target / dn).collect())
    }

    pub fn apply(&self, clean: &[f64]) -> Vec<f64> {
        clean.iter().zip(&self.vector).map(|(a, b)| a + b).collect()
    }
}

/// `10 log₁₀(‖clean‖² / ‖noise‖²)`.
pub fn snr_db(clean: &[f64], noise: &[f64]) -> f64 {
    10.0 * (linalg::norm2(clean).powi(2) / linalg::norm2(noise).powi(2)).log10()
}

/// `10 log₁₀(‖x‖² / ‖x − x̂‖²)`, capped at `cap` (exact recovery gives `cap`).
pub fn ser_db(x: &[f64], estimate: &[f64], cap: f64) -> f64 {
    let err: f64 = x.iter().zip(estimate).map(|(a, b)| (a - b).powi(2)).sum();
    let sig: f64 = x.iter().map(|a| a * a).sum();
    if err == 0.0 {
        return cap;
    }
    (10.0 * (sig / err).log10()).min(cap)
}

/// Block decomposition chosen by the expansion-based algorithms.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitDiagnostics {
    /// `|T₁|`: measurements treated as zero.
    pub zero_rows: usize,
    /// `|T₂|`.
    pub kept_rows: usize,
    /// `|S₂|`: columns not adjacent to any zero measurement.
    pub kept_columns: usize,
    /// Whether `Ã₂` (rows `T₂`, columns `S₂`) has full column rank.
    pub full_column_rank: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryReport {
    pub estimate: Vec<f64>,
    /// Filled in by [`RecoveryReport::assess`].
    pub success: Option<bool>,
    pub residual_l1: f64,
    /// `|T₁|`; zero for ℓ1 minimization.
    pub zero_set_size: usize,
    pub split: Option<SplitDiagnostics>,
    /// Largest magnitude of a negative entry clamped to zero.
    pub clamp_magnitude: f64,
    pub solver_status: String,
}

impl RecoveryReport {
    /// Marks success when `‖x̂ − truth‖∞ ≤ tol`.
    pub fn assess(&mut self, truth: &[f64], tol: f64) -> bool {
        let err = self.estimate.iter().zip(truth).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let ok = self.estimate.len() == truth.len() && err <= tol;
        self.success = Some(ok);
        ok
    }
}

fn residual_l1(a: &MeasurementMatrix, x: &[f64], y: &[f64]) -> f64 {
    a.mul_vec(x).iter().zip(y).map(|(p, q)| (p - q).abs()).sum()
}

/// Sets negative entries to zero and returns the largest clamped magnitude.
/// Projection onto the non-negative orthant never moves an estimate away
/// from a non-negative truth.
fn clamp_nonnegative(x: &mut [f64]) -> f64 {
    let mut worst = 0.0f64;
    for v in x.iter_mut() {
        if *v < 0.0 {
            worst = worst.max(-*v);
            *v = 0.0;
        }
    }
    worst
}

fn check_len(a: &MeasurementMatrix, y: &[f64]) -> Result<()> {
    if y.len() != a.m() {
        return Err(Error::DimensionMismatch { expected: a.m(), found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// `min Σ xᵢ` subject to `Ãx = y`, `x ≥ 0`.
pub fn l1_min_nonneg(a: &MeasurementMatrix, y: &[f64]) -> Result<RecoveryReport> {
    check_len(a, y)?;
    let program = LinearProgram::new(vec![1.0; a.n()], a.to_dense(), y.to_vec())?;
    let sol = lp::solve_lp(&program)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Infeasible),
        LpStatus::Unbounded => unreachable!("objective is bounded below on x ≥ 0"),
    }
    let mut estimate = sol.point;
    let clamp_magnitude = clamp_nonnegative(&mut estimate);
    Ok(RecoveryReport {
        residual_l1: residual_l1(a, &estimate, y),
        estimate,
        success: None,
        zero_set_size: 0,
        split: None,
        clamp_magnitude,
        solver_status: format!("optimal after {} pivots", sol.iterations),
    })
}

/// Whether `estimate` is the only minimizer of `Σ xᵢ` over
/// `{Ãx = y, x ≥ 0}`.
///
/// A simplex solver returns a vertex of the optimal face, which can
/// coincide with the truth even when the face is not a single point. With
/// constant column sums the optimal face is the whole feasible set, and a
/// feasible `estimate` is its only point exactly when its support (entries
/// above `tol`) passes the support certificate.
pub fn l1_optimum_unique(a: &MeasurementMatrix, y: &[f64], estimate: &[f64], tol: f64) -> Result<bool> {
    check_len(a, y)?;
    let n = a.n();
    if estimate.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: estimate.len() });
    }
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let residual = a.mul_vec(estimate).iter().zip(y).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    if residual > tol * scale || estimate.iter().any(|&v| v < -tol) {
        return Ok(false);
    }
    let support: Vec<usize> = (0..n).filter(|&j| estimate[j] > tol).collect();
    Ok(crate::nullspace::support_recoverable(a, &support)?.recoverable)
}

/// Columns adjacent to none of `zero_rows`, and the complementary rows.
fn split(a: &MeasurementMatrix, zero_rows: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let g = a.graph();
    let mut is_zero = vec![false; a.m()];
    for &r in zero_rows {
        is_zero[r] = true;
    }
    let cols = (0..a.n()).filter(|&j| g.column(j).iter().all(|&r| !is_zero[r])).collect();
    let rows = (0..a.m()).filter(|&r| !is_zero[r]).collect();
    (cols, rows)
}

/// Reverse expansion recovery for exact measurements of a `k`-sparse
/// non-negative signal.
///
/// Measurements within `zero_tol · ‖y‖∞` of zero are taken as zero; every
/// column touching one of them is set to zero and the surviving block
/// `Ã₂` (rows `T₂`, columns `S₂`) is solved in the least-squares sense.
pub fn reverse_expansion_recovery(a: &MeasurementMatrix, y: &[f64], k: usize, zero_tol: f64) -> Result<RecoveryReport> {
    check_len(a, y)?;
    let (n, m) = (a.n(), a.m());
    let scale = linalg::norm_inf(y);
    let zero_rows: Vec<usize> = (0..m).filter(|&i| y[i].abs() <= zero_tol * scale).collect();
    let required = m.saturating_sub(k * a.d());
    if zero_rows.len() < required {
        return Err(Error::InsufficientZeros { found: zero_rows.len(), required });
    }
    let (cols, rows) = split(a, &zero_rows);
    let mut estimate = vec![0.0; n];
    // A failed solve returns RankDeficient, so a report implies full rank.
    let diag = SplitDiagnostics {
        zero_rows: zero_rows.len(),
        kept_rows: rows.len(),
        kept_columns: cols.len(),
        full_column_rank: true,
    };
    if cols.is_empty() {
        if !rows.is_empty() {
            return Err(Error::DegenerateSplit);
        }
    } else {
        let a2 = a.submatrix(&rows, &cols);
        let y2: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
        let z = linalg::least_squares(&a2, &y2)?;
        for (&j, v) in cols.iter().zip(z) {
            estimate[j] = v;
        }
    }
    let clamp_magnitude = clamp_nonnegative(&mut estimate);
    Ok(RecoveryReport {
        residual_l1: residual_l1(a, &estimate, y),
        estimate,
        success: None,
        zero_set_size: diag.zero_rows,
        split: Some(diag),
        clamp_magnitude,
        solver_status: "least squares".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormChoice {
    L1,
    L2,
}

/// `argmin_z ‖A₂ z − y₂‖₁` through the split `A₂z + t⁺ − t⁻ = y₂`.
fn l1_regression(a2: &DenseMatrix, y2: &[f64]) -> Result<Vec<f64>> {
    let (rows, cols) = (a2.rows(), a2.cols());
    let nv = cols + 2 * rows;
    let mut eq = DenseMatrix::zeros(rows, nv);
    for i in 0..rows {
        for j in 0..cols {
            eq[(i, j)] = a2[(i, j)];
        }
        eq[(i, cols + i)] = 1.0;
        eq[(i, cols + rows + i)] = -1.0;
    }
    let mut c = vec![1.0; nv];
    let mut lower = vec![0.0; nv];
    for j in 0..cols {
        c[j] = 0.0;
        lower[j] = f64::NEG_INFINITY;
    }
    let program = LinearProgram::with_bounds(c, eq, y2.to_vec(), lower, vec![f64::INFINITY; nv])?;
    let sol = lp::solve_lp(&program)?;
    match sol.status {
        LpStatus::Optimal => Ok(sol.point[..cols].to_vec()),
        // The split form is always feasible and bounded below by zero.
        other => Err(Error::InvalidProgram(format!("ℓ1 regression returned {other:?}"))),
    }
}

/// Noise-tolerant recovery of a `k`-sparse non-negative signal.
///
/// The `m − kd` smallest measurements in magnitude (ties broken by index)
/// play the role of zeros; the surviving block is fitted in ℓ1 or ℓ2.
pub fn noisy_recovery(a: &MeasurementMatrix, y: &[f64], k: usize, norm: NormChoice) -> Result<RecoveryReport> {
    check_len(a, y)?;
    let (n, m) = (a.n(), a.m());
    let keep = m.saturating_sub(k * a.d());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| y[i].abs().total_cmp(&y[j].abs()).then(i.cmp(&j)));
    let mut zero_rows = order[..keep].to_vec();
    zero_rows.sort_unstable();

    let (cols, rows) = split(a, &zero_rows);
    let y2: Vec<f64> = rows.iter().map(|&r| y[r]).collect();
    let mut estimate = vec![0.0; n];
    let mut diag = SplitDiagnostics {
        zero_rows: zero_rows.len(),
        kept_rows: rows.len(),
        kept_columns: cols.len(),
        full_column_rank: true,
    };
    if cols.is_empty() {
        if y2.iter().any(|&v| v != 0.0) {
            return Err(Error::DegenerateSplit);
        }
    } else {
        let a2 = a.submatrix(&rows, &cols);
        diag.full_column_rank = linalg::column_rank(&a2, linalg::DEFAULT_RANK_TOL) == cols.len();
        let z = match norm {
            NormChoice::L1 => l1_regression(&a2, &y2)?,
            NormChoice::L2 => linalg::least_squares(&a2, &y2)?,
        };
        for (&j, v) in cols.iter().zip(z) {
            estimate[j] = v;
        }
    }
    let clamp_magnitude = clamp_nonnegative(&mut estimate);
    Ok(RecoveryReport {
        residual_l1: residual_l1(a, &estimate, y),
        estimate,
        success: None,
        zero_set_size: diag.zero_rows,
        split: Some(diag),
        clamp_magnitude,
        solver_status: match norm {
            NormChoice::L1 => "l1 regression".into(),
            NormChoice::L2 => "least squares".into(),
        },
    })
}

/// Runs [`noisy_recovery`] for `k = 1..=max_k` and keeps the split with the
/// smallest ℓ1 residual (smaller `k` wins ties). Splits that fail are
/// skipped. Returns the chosen `k` with its report.
pub fn noisy_recovery_auto(
    a: &MeasurementMatrix,
    y: &[f64],
    max_k: usize,
    norm: NormChoice,
) -> Result<(usize, RecoveryReport)> {
    let mut best: Option<(usize, RecoveryReport)> = None;
    let mut last_err = None;
    for k in 1..=max_k {
        match noisy_recovery(a, y, k, norm) {
            Ok(r) => {
                if best.as_ref().is_none_or(|(_, b)| r.residual_l1 < b.residual_l1) {
                    best = Some((k, r));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    best.ok_or_else(|| last_err.unwrap_or(Error::InvalidArgument("max_k must be at least 1".into())))
}

/// `(6 − 4ε) / (1 − 2ε)`: ℓ1 error-to-noise factor for `(k, ε)` expanders.
pub fn robustness_factor(eps: f64) -> f64 {
    (6.0 - 4.0 * eps) / (1.0 - 2.0 * eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{perturb, random_left_regular, BipartiteGraph};
    use crate::rng;

    fn matching(n: usize) -> MeasurementMatrix {
        let g = BipartiteGraph::new(n, 1, (0..n).map(|j| vec![j]).collect()).unwrap();
        MeasurementMatrix::unperturbed(g)
    }

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (p, q)| f64::max(m, (p - q).abs()))
    }

    #[test]
    fn signal_validation() {
        assert!(SparseSignal::new(vec![0.0, -1.0]).is_err());
        let s = SparseSignal::new(vec![0.0, 2.0, 0.0, 1.0]).unwrap();
        assert_eq!(s.support(), &[1, 3]);
        assert_eq!(s.sparsity(), 2);
        let mut r = rng::seeded(1);
        let s = SparseSignal::random(20, 5, 0.1, 1.1, &mut r).unwrap();
        assert_eq!(s.sparsity(), 5);
        assert!(s.entries().iter().all(|v| *v == 0.0 || (0.1..=1.1).contains(v)));
    }

    #[test]
    fn zero_measurements_give_zero() {
        let g = random_left_regular(20, 10, 3, 1).unwrap();
        let a = perturb(&g, 0.1, 1).unwrap();
        let y = vec![0.0; 10];
        assert_eq!(l1_min_nonneg(&a, &y).unwrap().estimate, vec![0.0; 20]);
        let r = reverse_expansion_recovery(&a, &y, 2, DEFAULT_ZERO_TOL).unwrap();
        assert_eq!(r.estimate, vec![0.0; 20]);
        assert_eq!(r.zero_set_size, 10);
    }

    #[test]
    fn bijective_system_is_exact() {
        let a = matching(6);
        let x = [0.0, 1.5, 0.0, 0.3, 0.0, 2.0];
        let y = a.mul_vec(&x);
        let mut r = l1_min_nonneg(&a, &y).unwrap();
        assert!(r.assess(&x, 1e-12));
        let mut r = reverse_expansion_recovery(&a, &y, 3, DEFAULT_ZERO_TOL).unwrap();
        assert!(r.assess(&x, 1e-12));
    }

    #[test]
    fn uniqueness_probe() {
        let a = matching(4);
        let x = [0.5, 0.0, 1.0, 0.0];
        let y = a.mul_vec(&x);
        assert!(l1_optimum_unique(&a, &y, &x, 1e-9).unwrap());

        // Two identical columns: mass can move freely between them.
        let g = BipartiteGraph::new(2, 1, vec![vec![0], vec![0], vec![1]]).unwrap();
        let a = MeasurementMatrix::unperturbed(g);
        let x = [1.0, 0.0, 0.5];
        let y = a.mul_vec(&x);
        let rep = l1_min_nonneg(&a, &y).unwrap();
        assert!(!l1_optimum_unique(&a, &y, &rep.estimate, 1e-9).unwrap());
    }

    #[test]
    fn infeasible_measurements() {
        let a = matching(3);
        assert!(matches!(l1_min_nonneg(&a, &[1.0, -1.0, 0.0]), Err(Error::Infeasible)));
        assert!(matches!(l1_min_nonneg(&a, &[1.0]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn too_few_zeros_rejected() {
        let g = random_left_regular(20, 10, 3, 2).unwrap();
        let a = perturb(&g, 0.1, 2).unwrap();
        let y = vec![1.0; 10];
        assert!(matches!(
            reverse_expansion_recovery(&a, &y, 1, DEFAULT_ZERO_TOL),
            Err(Error::InsufficientZeros { found: 0, required: 7 })
        ));
    }

    #[test]
    fn sparse_signals_recovered_by_both_methods() {
        let g = random_left_regular(60, 30, 4, 3).unwrap();
        let a = perturb(&g, 0.1, 3).unwrap();
        let mut r = rng::seeded(9);
        for _ in 0..20 {
            let x = SparseSignal::random(60, 2, 0.1, 1.1, &mut r).unwrap();
            let y = a.mul_vec(x.entries());
            let lp = l1_min_nonneg(&a, &y).unwrap();
            let rev = reverse_expansion_recovery(&a, &y, 2, DEFAULT_ZERO_TOL).unwrap();
            assert!(max_err(&lp.estimate, x.entries()) < 1e-7);
            assert!(max_err(&rev.estimate, x.entries()) < 1e-7);
            assert!(max_err(&lp.estimate, &rev.estimate) < 1e-6);
            assert!(rev.residual_l1 <= 1e-7 * linalg::norm1(&y));
        }
    }

    #[test]
    fn noiseless_noisy_recovery_is_exact() {
        let g = random_left_regular(60, 30, 4, 4).unwrap();
        let a = perturb(&g, 0.1, 4).unwrap();
        let mut r = rng::seeded(10);
        for norm in [NormChoice::L1, NormChoice::L2] {
            for _ in 0..10 {
                let x = SparseSignal::random(60, 2, 0.1, 1.1, &mut r).unwrap();
                let y = a.mul_vec(x.entries());
                let rep = noisy_recovery(&a, &y, 2, norm).unwrap();
                assert!(max_err(&rep.estimate, x.entries()) < 1e-7, "{norm:?}");
                assert_eq!(rep.zero_set_size, 30 - 8);
            }
        }
    }

    #[test]
    fn noisy_estimates_are_nonnegative_and_bounded() {
        let g = random_left_regular(60, 30, 6, 5).unwrap();
        let a = perturb(&g, 0.1, 5).unwrap();
        let mut r = rng::seeded(11);
        for _ in 0..10 {
            let x = SparseSignal::random(60, 2, 0.1, 1.1, &mut r).unwrap();
            let clean = a.mul_vec(x.entries());
            let dir: Vec<f64> = (0..30).map(|_| r.random_range(-1.0..1.0)).collect();
            let noise = NoiseModel::at_snr(&clean, &dir, 30.0);
            assert!((snr_db(&clean, &noise.vector) - 30.0).abs() < 1e-9);
            let rep = noisy_recovery(&a, &noise.apply(&clean), 2, NormChoice::L1).unwrap();
            assert!(rep.estimate.iter().all(|v| *v >= 0.0));
            let err = linalg::norm1(&rep.estimate.iter().zip(x.entries()).map(|(p, q)| p - q).collect::<Vec<_>>());
            assert!(err <= robustness_factor(0.49) * noise.l1_budget);
        }
    }

    #[test]
    fn auto_k_prefers_small_residual() {
        let g = random_left_regular(40, 20, 4, 6).unwrap();
        let a = perturb(&g, 0.1, 6).unwrap();
        let mut r = rng::seeded(12);
        let x = SparseSignal::random(40, 2, 0.1, 1.1, &mut r).unwrap();
        let y = a.mul_vec(x.entries());
        let (k, rep) = noisy_recovery_auto(&a, &y, 4, NormChoice::L1).unwrap();
        assert!(k <= 2);
        assert!(max_err(&rep.estimate, x.entries()) < 1e-7);
    }

    #[test]
    fn ser_and_factor() {
        assert_eq!(ser_db(&[1.0, 2.0], &[1.0, 2.0], 160.0), 160.0);
        assert!((ser_db(&[1.0, 0.0], &[0.9, 0.0], 160.0) - 20.0).abs() < 1e-9);
        assert!((robustness_factor(0.25) - 10.0).abs() < 1e-12);
        assert_eq!(NoiseModel::at_snr(&[1.0, 1.0], &[1.0, 0.0], f64::INFINITY).kind, NoiseKind::None);
    }
}
