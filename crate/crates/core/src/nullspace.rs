//! Recoverability certificates for non-negative signals.
//!
//! For a non-negative matrix whose columns all sum to the same constant,
//! every null vector has zero entry sum. A support `S` is then recoverable
//! (by ℓ1 minimization, or by any method restricted to the non-negative
//! feasible set) exactly when no nonzero null vector is non-negative off `S`.

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{self, MeasurementMatrix, ENUMERATION_LIMIT};
use crate::linalg::{self, DenseMatrix, DEFAULT_RANK_TOL};
use crate::lp::{self, LinearProgram, LpStatus};
use crate::rng;

/// Relative tolerance on column-sum agreement.
pub const COLUMN_SUM_TOL: f64 = 1e-9;
/// Sign tolerance for "non-negative" entries of null vectors.
pub const SIGN_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CompleteRankResult {
    /// Largest `r` such that every `r` columns are independent, capped at
    /// the requested maximum.
    pub value: usize,
    /// A smallest dependent column set (size `value + 1`), empty when the
    /// cap was reached.
    pub witness: Vec<usize>,
}

/// Complete (Kruskal) rank of the perturbed matrix, capped at `max_r`.
pub fn complete_rank(a: &MeasurementMatrix, max_r: usize) -> Result<CompleteRankResult> {
    complete_rank_dense(&a.to_dense(), max_r)
}

/// Complete rank of an arbitrary dense matrix.
///
/// Depth-first over column subsets, extending an orthonormal basis one
/// column at a time; a dependent subset is confirmed by pivoted QR before it
/// is accepted, and its supersets are never visited.
pub fn complete_rank_dense(a: &DenseMatrix, max_r: usize) -> Result<CompleteRankResult> {
    let n = a.cols();
    if max_r > n {
        return Err(Error::InvalidArgument(format!("max_r = {max_r} exceeds n = {n}")));
    }
    let probe = (max_r + 1).min(n);
    let required = graph::subset_count(n, probe);
    if required > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { required, limit: ENUMERATION_LIMIT });
    }
    let columns: Vec<Vec<f64>> = (0..n).map(|j| a.column(j)).collect();
    let mut search = RankSearch {
        columns: &columns,
        rows: a.rows(),
        limit: probe,
        basis: Vec::new(),
        stack: Vec::new(),
        best: None,
    };
    search.descend(0);
    Ok(match search.best {
        Some(w) => CompleteRankResult { value: w.len() - 1, witness: w },
        None => CompleteRankResult { value: max_r, witness: Vec::new() },
    })
}

struct RankSearch<'a> {
    columns: &'a [Vec<f64>],
    rows: usize,
    limit: usize,
    basis: Vec<Vec<f64>>,
    stack: Vec<usize>,
    best: Option<Vec<usize>>,
}

impl RankSearch<'_> {
    fn descend(&mut self, start: usize) {
        for j in start..self.columns.len() {
            if self.stack.len() >= self.limit {
                return;
            }
            self.stack.push(j);
            match self.orthogonalize(j) {
                Some(q) => {
                    self.basis.push(q);
                    self.descend(j + 1);
                    self.basis.pop();
                }
                None => {
                    // Only supersets remain below; record and shrink the limit.
                    self.best = Some(self.stack.clone());
                    self.limit = self.stack.len() - 1;
                }
            }
            self.stack.pop();
        }
    }

    /// Unit residual of column `j` against the current basis, or `None` if
    /// the extended set is numerically dependent.
    fn orthogonalize(&self, j: usize) -> Option<Vec<f64>> {
        let col = &self.columns[j];
        let scale = linalg::norm2(col);
        if self.stack.len() > self.rows || scale == 0.0 {
            return None;
        }
        let mut r = col.clone();
        for _ in 0..2 {
            for q in &self.basis {
                let c = linalg::dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        let rn = linalg::norm2(&r);
        if rn <= 1e-7 * scale {
            let cols: Vec<Vec<f64>> = self.stack.iter().map(|&k| self.columns[k].clone()).collect();
            let sub = DenseMatrix::from_columns(self.rows, &cols).expect("finite columns");
            if linalg::column_rank(&sub, DEFAULT_RANK_TOL) < cols.len() {
                return None;
            }
        }
        Some(r.into_iter().map(|v| v / rn).collect())
    }
}

fn check_constant_column_sum(a: &MeasurementMatrix) -> Result<()> {
    let spread = a.column_sum_spread();
    if spread > COLUMN_SUM_TOL {
        return Err(Error::NotConstantColumnSum { spread });
    }
    Ok(())
}

/// Random combinations of an orthonormal null-space basis of `a`.
pub fn sample_null_vectors(a: &MeasurementMatrix, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let dense = a.to_dense();
    let basis = linalg::nullspace_basis(&dense, DEFAULT_RANK_TOL);
    if basis.cols() == 0 {
        return Vec::new();
    }
    let mut rng = rng::seeded(seed);
    (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..basis.cols()).map(|_| rng.random_range(-1.0..1.0)).collect();
            basis.mul_vec(&c)
        })
        .collect()
}

/// Samples null vectors and checks `|Σ wᵢ| ≤ 1e−9 · ‖w‖₁` for each.
pub fn zero_sum_holds(a: &MeasurementMatrix, trials: usize, seed: u64) -> Result<bool> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    Ok(sample_null_vectors(a, trials, seed).iter().all(|w| w.iter().sum::<f64>().abs() <= 1e-9 * linalg::norm1(w)))
}

/// Entries below `−SIGN_TOL · ‖w‖∞`.
pub fn negative_count(w: &[f64]) -> usize {
    let cut = SIGN_TOL * linalg::norm_inf(w);
    w.iter().filter(|&&v| v < -cut).count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportCertificate {
    pub support: Vec<usize>,
    pub recoverable: bool,
    /// Null vector with non-negative entries off the support, present when
    /// the support is not recoverable.
    pub failing_witness: Option<Vec<f64>>,
}

fn normalize_support(n: usize, s: &[usize]) -> Result<Vec<usize>> {
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&j| j >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    if s.len() >= n {
        return Err(Error::InvalidArgument(format!("support of size {} leaves no complement", s.len())));
    }
    Ok(s)
}

/// Decides whether every non-negative signal supported on `s` is the unique
/// non-negative solution of its own measurements.
///
/// Stage one rejects supports whose columns are dependent. Stage two asks an
/// LP for `w` with `Ãw = 0`, `w ≥ 0` off `s` and `Σ_{i∈s} wᵢ = −1`; by the
/// zero-sum law any offending null vector can be scaled to that form. For an
/// empty support the normalization is `Σ wᵢ = 1` instead.
pub fn support_recoverable(a: &MeasurementMatrix, s: &[usize]) -> Result<SupportCertificate> {
    check_constant_column_sum(a)?;
    let support = normalize_support(a.n(), s)?;
    let n = a.n();

    if !support.is_empty() {
        let sub = a.submatrix(&(0..a.m()).collect::<Vec<_>>(), &support);
        if linalg::column_rank(&sub, DEFAULT_RANK_TOL) < support.len() {
            let local = linalg::nullspace_basis(&sub, DEFAULT_RANK_TOL);
            let mut w = vec![0.0; n];
            for (k, &j) in support.iter().enumerate() {
                w[j] = local[(k, 0)];
            }
            return Ok(SupportCertificate { support, recoverable: false, failing_witness: Some(w) });
        }
    }

    let dense = a.to_dense();
    let m = a.m();
    let mut eq = DenseMatrix::zeros(m + 1, n);
    for i in 0..m {
        for j in 0..n {
            eq[(i, j)] = dense[(i, j)];
        }
    }
    let mut rhs = vec![0.0; m + 1];
    let mut in_support = vec![false; n];
    for &j in &support {
        in_support[j] = true;
    }
    if support.is_empty() {
        for j in 0..n {
            eq[(m, j)] = 1.0;
        }
        rhs[m] = 1.0;
    } else {
        for &j in &support {
            eq[(m, j)] = 1.0;
        }
        rhs[m] = -1.0;
    }
    let lower: Vec<f64> = in_support.iter().map(|&s| if s { f64::NEG_INFINITY } else { 0.0 }).collect();
    let program = LinearProgram::with_bounds(vec![0.0; n], eq, rhs, lower, vec![f64::INFINITY; n])?;
    let sol = lp::solve_lp(&program)?;
    Ok(match sol.status {
        LpStatus::Infeasible => SupportCertificate { support, recoverable: true, failing_witness: None },
        _ => SupportCertificate { support, recoverable: false, failing_witness: Some(sol.point) },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongVerdict {
    pub recoverable: bool,
    /// First failing support (lexicographic order) and its witness.
    pub failing: Option<SupportCertificate>,
}

/// Whether every size-`k` support is recoverable; equivalently, whether
/// every nonzero null vector has at least `k + 1` negative entries.
pub fn strong_recoverable_k(a: &MeasurementMatrix, k: usize) -> Result<StrongVerdict> {
    check_constant_column_sum(a)?;
    let n = a.n();
    if k >= n {
        return Err(Error::InvalidArgument(format!("k = {k} must be below n = {n}")));
    }
    let count = binomial(n, k);
    if count > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { required: count, limit: ENUMERATION_LIMIT });
    }
    let mut s: Vec<usize> = (0..k).collect();
    loop {
        let cert = support_recoverable(a, &s)?;
        if !cert.recoverable {
            return Ok(StrongVerdict { recoverable: false, failing: Some(cert) });
        }
        if !next_combination(&mut s, n) {
            return Ok(StrongVerdict { recoverable: true, failing: None });
        }
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Advances `s` to the next `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(s: &mut [usize], n: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < n - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Sufficient matching condition for recovering supports equal to `s`:
/// with `S₂ = Γ(Γ(S)) \ S`, every `S' ⊆ S ∪ S₂` of size at most
/// `|Γ(S)| + 1` must satisfy `|Γ(S')| ≥ |S'|`.
pub fn two_hop_condition(a: &MeasurementMatrix, s: &[usize]) -> Result<bool> {
    let g = a.graph();
    let support = normalize_support(g.n(), s)?;
    let gamma = g.neighbors(&support);
    let mut nodes = g.left_neighbors(&gamma);
    for &j in &support {
        if !nodes.contains(&j) {
            nodes.push(j);
        }
    }
    nodes.sort_unstable();
    if nodes.is_empty() {
        return Ok(true);
    }
    let sub = g.induced(&nodes);
    let t = (gamma.len() + 1).min(nodes.len());
    Ok(graph::smallest_contracting_set(&sub, t)?.is_none())
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rip1Report {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// `d(1 − 2ε)(1 − ε₁)/(1 + ε₁)`.
    pub lower_bound: f64,
    /// `d`.
    pub upper_bound: f64,
}

impl Rip1Report {
    pub fn within_bounds(&self, slack: f64) -> bool {
        self.min_ratio >= self.lower_bound - slack && self.max_ratio <= self.upper_bound + slack
    }
}

/// Monte-Carlo extremes of `‖Ãu‖₁ / ‖u‖₁` over random `k`-sparse signed `u`.
pub fn rip1_check(a: &MeasurementMatrix, k: usize, eps: f64, trials: usize, seed: u64) -> Result<Rip1Report> {
    if !(0.0..0.5).contains(&eps) {
        return Err(Error::InvalidEps(eps));
    }
    if k == 0 || k > a.n() {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={}", a.n())));
    }
    let mut rng = rng::seeded(seed);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut u = vec![0.0; a.n()];
    for _ in 0..trials {
        u.iter_mut().for_each(|v| *v = 0.0);
        for j in index::sample(&mut rng, a.n(), k) {
            let mag = rng.random_range(1e-3..=1.0);
            u[j] = if rng.random_bool(0.5) { mag } else { -mag };
        }
        let ratio = linalg::norm1(&a.mul_vec(&u)) / linalg::norm1(&u);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    let d = a.d() as f64;
    let e1 = a.epsilon1();
    Ok(Rip1Report {
        min_ratio: lo,
        max_ratio: hi,
        lower_bound: d * (1.0 - 2.0 * eps) * (1.0 - e1) / (1.0 + e1),
        upper_bound: d,
    })
}
