//! Dense two-phase tableau simplex for small and medium linear programs.
//!
//! Problems are stated as `min cᵗx` subject to `A x = b` and per-variable
//! bounds `l ≤ x ≤ u` (either side may be infinite). Internally the problem
//! is rewritten in standard form `min c'ᵗx', A'x' = b', x' ≥ 0`.
//!
//! Pivoting uses Dantzig's rule with a two-pass (Harris) ratio test that
//! prefers large pivot entries. A long streak of degenerate pivots switches
//! to Bland's rule for the rest of the phase.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};

#[derive(Clone, Debug)]
pub struct LinearProgram {
    objective: Vec<f64>,
    eq_matrix: DenseMatrix,
    eq_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LinearProgram {
    /// `min cᵗx` s.t. `a x = b`, `x ≥ 0`.
    pub fn new(objective: Vec<f64>, eq_matrix: DenseMatrix, eq_rhs: Vec<f64>) -> Result<Self> {
        let n = objective.len();
        Self::with_bounds(objective, eq_matrix, eq_rhs, vec![0.0; n], vec![f64::INFINITY; n])
    }

    pub fn with_bounds(
        objective: Vec<f64>,
        eq_matrix: DenseMatrix,
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let n = objective.len();
        if eq_matrix.cols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: eq_matrix.cols() });
        }
        if eq_matrix.rows() != eq_rhs.len() {
            return Err(Error::DimensionMismatch { expected: eq_matrix.rows(), found: eq_rhs.len() });
        }
        if lower.len() != n || upper.len() != n {
            return Err(Error::InvalidProgram("bound vectors must match the variable count".into()));
        }
        if objective.iter().chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for (j, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY || l > u {
                return Err(Error::InvalidProgram(format!("bad bounds [{l}, {u}] on variable {j}")));
            }
        }
        Ok(Self { objective, eq_matrix, eq_rhs, lower, upper })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.eq_rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_matrix(&self) -> &DenseMatrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Meaningful only when `status` is `Optimal`.
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug)]
pub struct SimplexOptions {
    /// Pivot limit; `None` means `50 × (rows + cols)` of the standard form.
    pub max_iterations: Option<usize>,
    /// Degenerate pivots in a row before switching to Bland's rule.
    pub degeneracy_streak: usize,
    pub pivot_tol: f64,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { max_iterations: None, degeneracy_streak: 2000, pivot_tol: 1e-9 }
    }
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    solve_lp_with(lp, &SimplexOptions::default())
}

/// How an original variable maps onto standard-form columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// x = offset + x'[col]
    Shifted { col: usize, offset: f64 },
    /// x = offset − x'[col]
    Mirrored { col: usize, offset: f64 },
    /// x = x'[pos] − x'[neg]
    Free { pos: usize, neg: usize },
}

struct StandardForm {
    a: DenseMatrix,
    b: Vec<f64>,
    c: Vec<f64>,
    map: Vec<VarMap>,
}

fn to_standard_form(lp: &LinearProgram) -> StandardForm {
    let n = lp.num_vars();
    let mut map = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut upper_rows = Vec::new();
    for j in 0..n {
        let (l, u) = (lp.lower[j], lp.upper[j]);
        let m = if l.is_finite() {
            if u.is_finite() {
                upper_rows.push((ncols, u - l));
            }
            VarMap::Shifted { col: ncols, offset: l }
        } else if u.is_finite() {
            VarMap::Mirrored { col: ncols, offset: u }
        } else {
            ncols += 1;
            VarMap::Free { pos: ncols - 1, neg: ncols }
        };
        ncols += 1;
        map.push(m);
    }
    let slack_base = ncols;
    ncols += upper_rows.len();
    let rows = lp.num_constraints() + upper_rows.len();

    let mut a = DenseMatrix::zeros(rows, ncols);
    let mut b = vec![0.0; rows];
    let mut c = vec![0.0; ncols];
    for (j, m) in map.iter().enumerate() {
        match *m {
            VarMap::Shifted { col, offset } => {
                c[col] = lp.objective[j];
                for i in 0..lp.num_constraints() {
                    a[(i, col)] = lp.eq_matrix[(i, j)];
                    b[i] -= lp.eq_matrix[(i, j)] * offset;
                }
            }
            VarMap::Mirrored { col, offset } => {
                c[col] = -lp.objective[j];
                for i in 0..lp.num_constraints() {
                    a[(i, col)] = -lp.eq_matrix[(i, j)];
                    b[i] -= lp.eq_matrix[(i, j)] * offset;
                }
            }
            VarMap::Free { pos, neg } => {
                c[pos] = lp.objective[j];
                c[neg] = -lp.objective[j];
                for i in 0..lp.num_constraints() {
                    a[(i, pos)] = lp.eq_matrix[(i, j)];
                    a[(i, neg)] = -lp.eq_matrix[(i, j)];
                }
            }
        }
    }
    for (bi, r) in b.iter_mut().zip(&lp.eq_rhs) {
        *bi += r;
    }
    for (r, &(col, width)) in upper_rows.iter().enumerate() {
        let i = lp.num_constraints() + r;
        a[(i, col)] = 1.0;
        a[(i, slack_base + r)] = 1.0;
        b[i] = width;
    }
    StandardForm { a, b, c, map }
}

struct Tableau {
    /// `rows × (cols + 1)`, last column is the right-hand side.
    t: Vec<f64>,
    width: usize,
    rows: usize,
    /// Reduced costs, last entry is minus the objective value.
    cost: Vec<f64>,
    basis: Vec<usize>,
    /// First artificial column; columns from here on hold `B⁻¹`.
    inverse_start: usize,
    iterations: usize,
    limit: usize,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let pivot_row: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == r {
                continue;
            }
            let f = self.t[i * w + q];
            if f != 0.0 {
                for (v, pr) in self.t[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
                self.t[i * w + q] = 0.0;
            }
        }
        let f = self.cost[q];
        if f != 0.0 {
            for (v, pr) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
            self.cost[q] = 0.0;
        }
        self.basis[r] = q;
        self.iterations += 1;
    }

    /// Recomputes reduced costs for the cost vector `c` (zero-padded).
    fn price(&mut self, c: &[f64]) {
        let w = self.width;
        self.cost = vec![0.0; w];
        self.cost[..c.len()].copy_from_slice(c);
        for i in 0..self.rows {
            let cb = c.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for j in 0..w {
                    self.cost[j] -= cb * self.t[i * w + j];
                }
            }
        }
    }

    /// Minimum-ratio row, ties to the smallest basic variable.
    fn ratio_bland(&self, q: usize, tol: f64) -> Option<(usize, f64)> {
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..self.rows {
            let a = self.at(i, q);
            if a > tol {
                let ratio = self.rhs(i).max(0.0) / a;
                leaving = match leaving {
                    Some((r, best))
                        if ratio > best + 1e-12 * best.max(1.0)
                            || (ratio >= best - 1e-12 * best.max(1.0) && self.basis[i] > self.basis[r]) =>
                    {
                        Some((r, best))
                    }
                    _ => Some((i, ratio)),
                };
            }
        }
        leaving
    }

    /// Two-pass ratio test: bound the step with every right-hand side relaxed
    /// by `tol`, then take the largest pivot entry among rows within the
    /// bound. Equal pivots are ordered lexicographically on their `B⁻¹` rows.
    fn ratio_harris(&self, q: usize, tol: f64) -> Option<(usize, f64)> {
        let bound = (0..self.rows)
            .filter(|&i| self.at(i, q) > tol)
            .map(|i| (self.rhs(i).max(0.0) + tol) / self.at(i, q))
            .fold(f64::INFINITY, f64::min);
        if bound == f64::INFINITY {
            return None;
        }
        let mut pick: Option<usize> = None;
        for i in (0..self.rows).filter(|&i| self.at(i, q) > tol && self.rhs(i).max(0.0) / self.at(i, q) <= bound) {
            pick = match pick {
                Some(r) if !self.better_pivot(i, r, q) => Some(r),
                _ => Some(i),
            };
        }
        pick.map(|r| (r, self.rhs(r).max(0.0) / self.at(r, q)))
    }

    fn better_pivot(&self, i: usize, r: usize, q: usize) -> bool {
        let (ai, ar) = (self.at(i, q), self.at(r, q));
        if (ai - ar).abs() > 1e-12 * ai.max(ar) {
            return ai > ar;
        }
        for j in self.inverse_start..self.width - 1 {
            let (u, v) = (self.at(i, j) / ai, self.at(r, j) / ar);
            if (u - v).abs() > 1e-12 * u.abs().max(v.abs()).max(1.0) {
                return u < v;
            }
        }
        self.basis[i] < self.basis[r]
    }

    fn run(&mut self, allowed: &dyn Fn(usize) -> bool, opts: &SimplexOptions) -> Result<PhaseOutcome> {
        let tol = opts.pivot_tol;
        let ncols = self.width - 1;
        let mut degenerate = 0usize;
        loop {
            let bland = degenerate >= opts.degeneracy_streak;
            let mut entering = None;
            let mut best = -tol;
            for j in (0..ncols).filter(|&j| allowed(j)) {
                let rc = self.cost[j];
                if rc < -tol {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        entering = Some(j);
                    }
                }
            }
            let Some(q) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };

            let leaving = if bland { self.ratio_bland(q, tol) } else { self.ratio_harris(q, tol) };
            let Some((r, step)) = leaving else {
                return Ok(PhaseOutcome::Unbounded);
            };
            if self.iterations >= self.limit {
                return Err(Error::NumericalFailure { limit: self.limit });
            }
            if step <= tol {
                degenerate += 1;
            } else if degenerate < opts.degeneracy_streak {
                degenerate = 0;
            }
            self.pivot(r, q);
        }
    }
}

pub fn solve_lp_with(lp: &LinearProgram, opts: &SimplexOptions) -> Result<LpSolution> {
    let sf = to_standard_form(lp);
    let (m, n) = (sf.a.rows(), sf.a.cols());
    let limit = opts.max_iterations.unwrap_or(50 * (m + n).max(1));

    // Columns: n structural, then m artificials, then rhs.
    let width = n + m + 1;
    let mut t = vec![0.0; m * width];
    for i in 0..m {
        let sign = if sf.b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i * width + j] = sign * sf.a[(i, j)];
        }
        t[i * width + n + i] = 1.0;
        t[i * width + width - 1] = sign * sf.b[i];
    }
    let mut tab = Tableau {
        t,
        width,
        rows: m,
        cost: Vec::new(),
        basis: (n..n + m).collect(),
        inverse_start: n,
        iterations: 0,
        limit,
    };

    let mut phase1_cost = vec![0.0; n + m];
    for v in &mut phase1_cost[n..] {
        *v = 1.0;
    }
    tab.price(&phase1_cost);
    tab.run(&|_| true, opts)?;

    let infeasibility = -tab.cost[width - 1];
    let scale = linalg::norm1(&sf.b).max(1.0);
    if infeasibility > 1e-9 * scale {
        return Ok(LpSolution {
            status: LpStatus::Infeasible,
            point: Vec::new(),
            objective_value: f64::NAN,
            iterations: tab.iterations,
        });
    }

    // Drive zero-level artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.rows {
        if tab.basis[r] >= n {
            let q = (0..n).find(|&j| tab.at(r, j).abs() > opts.pivot_tol);
            match q {
                Some(q) => tab.pivot(r, q),
                None => {
                    tab.t.drain(r * width..(r + 1) * width);
                    tab.basis.remove(r);
                    tab.rows -= 1;
                    continue;
                }
            }
        }
        r += 1;
    }

    tab.price(&sf.c);
    let outcome = tab.run(&|j| j < n, opts)?;
    if let PhaseOutcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            point: Vec::new(),
            objective_value: f64::NEG_INFINITY,
            iterations: tab.iterations,
        });
    }

    let mut xs = vec![0.0; n];
    for (i, &bv) in tab.basis.iter().enumerate() {
        xs[bv] = tab.rhs(i).max(0.0);
    }
    refine_basic_solution(&sf, &tab.basis, &mut xs);

    let point: Vec<f64> = sf
        .map
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let v = match *m {
                VarMap::Shifted { col, offset } => offset + xs[col],
                VarMap::Mirrored { col, offset } => offset - xs[col],
                VarMap::Free { pos, neg } => xs[pos] - xs[neg],
            };
            v.clamp(lp.lower[j], lp.upper[j])
        })
        .collect();
    let objective_value = linalg::dot(&lp.objective, &point);
    Ok(LpSolution { status: LpStatus::Optimal, point, objective_value, iterations: tab.iterations })
}

/// Re-solves `B x_B = b` on the final basis to shed accumulated tableau error.
fn refine_basic_solution(sf: &StandardForm, basis: &[usize], xs: &mut [f64]) {
    let n = sf.a.cols();
    let cols: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
    if cols.is_empty() {
        return;
    }
    let bmat = sf.a.select_columns(&cols);
    let Ok(xb) = linalg::least_squares(&bmat, &sf.b) else {
        return;
    };
    if xb.iter().any(|&v| v < -1e-9) {
        return;
    }
    let mut refined = vec![0.0; n];
    for (&j, &v) in cols.iter().zip(&xb) {
        refined[j] = v.max(0.0);
    }
    let resid = |x: &[f64]| {
        let ax = sf.a.mul_vec(x);
        ax.iter().zip(&sf.b).map(|(p, q)| (p - q).abs()).sum::<f64>()
    };
    if resid(&refined) <= resid(xs) {
        xs.copy_from_slice(&refined);
    }
}
