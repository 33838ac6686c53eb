//! Left-regular bipartite graphs, expansion checks and perturbed weighted
//! adjacency matrices.
//!
//! Left nodes (columns, `0..n`) are signal entries; right nodes (rows,
//! `0..m`) are measurements. `Γ(S)` denotes the set of right nodes adjacent
//! to a left set `S`.

use std::collections::BTreeSet;

use rand::seq::index;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::rng;

/// Subset-enumeration budget shared by every exhaustive check.
pub const ENUMERATION_LIMIT: u128 = 100_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n: usize,
    m: usize,
    d: usize,
    columns: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    /// Builds a graph from per-column right-node lists.
    ///
    /// Columns are sorted on entry. Each must hold between one and `d`
    /// distinct rows below `m`; fewer than `d` only arises from sampling
    /// with repetition (see [`random_with_repetition`]).
    pub fn new(m: usize, d: usize, columns: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::InvalidDegree { d, m });
        }
        let mut out = Vec::with_capacity(columns.len());
        for (j, mut c) in columns.into_iter().enumerate() {
            c.sort_unstable();
            let distinct = c.windows(2).all(|w| w[0] != w[1]);
            if c.is_empty() || c.len() > d || !distinct || c.last().is_some_and(|&r| r >= m) {
                return Err(Error::InvalidArgument(format!("column {j} must hold 1..={d} distinct rows below {m}")));
            }
            out.push(c);
        }
        Ok(Self { n: out.len(), m, d, columns: out })
    }

    /// Every left node adjacent to every right node (`d = m`).
    pub fn complete(n: usize, m: usize) -> Self {
        Self { n, m, d: m, columns: vec![(0..m).collect(); n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<usize>] {
        &self.columns
    }

    pub fn is_left_regular(&self) -> bool {
        self.columns.iter().all(|c| c.len() == self.d)
    }

    /// `Γ(S)`, sorted.
    pub fn neighbors(&self, s: &[usize]) -> Vec<usize> {
        let set: BTreeSet<usize> = s.iter().flat_map(|&j| self.columns[j].iter().copied()).collect();
        set.into_iter().collect()
    }

    /// Left neighbours of each right node.
    pub fn row_adjacency(&self) -> Vec<Vec<usize>> {
        let mut rows = vec![Vec::new(); self.m];
        for (j, c) in self.columns.iter().enumerate() {
            for &r in c {
                rows[r].push(j);
            }
        }
        rows
    }

    /// Left nodes adjacent to any right node in `t`, sorted.
    pub fn left_neighbors(&self, t: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.m];
        for &r in t {
            hit[r] = true;
        }
        (0..self.n).filter(|&j| self.columns[j].iter().any(|&r| hit[r])).collect()
    }

    /// Subgraph on the given left nodes (in order), keeping all right nodes.
    pub fn induced(&self, left: &[usize]) -> Self {
        Self { n: left.len(), m: self.m, d: self.d, columns: left.iter().map(|&j| self.columns[j].clone()).collect() }
    }
}

/// Each column gets `d` distinct right nodes drawn uniformly at random.
pub fn random_left_regular(n: usize, m: usize, d: usize, seed: u64) -> Result<BipartiteGraph> {
    if d == 0 || d > m {
        return Err(Error::InvalidDegree { d, m });
    }
    let mut rng = rng::seeded(seed);
    let columns = (0..n)
        .map(|_| {
            let mut c = index::sample(&mut rng, m, d).into_vec();
            c.sort_unstable();
            c
        })
        .collect();
    Ok(BipartiteGraph { n, m, d, columns })
}

/// Each column gets `d` independent uniform draws; repeated rows merge into
/// one edge whose returned base weight is the multiplicity.
pub fn random_with_repetition(n: usize, m: usize, d: usize, seed: u64) -> Result<(BipartiteGraph, Vec<Vec<f64>>)> {
    if d == 0 || d > m {
        return Err(Error::InvalidDegree { d, m });
    }
    let mut rng = rng::seeded(seed);
    let mut columns = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for _ in 0..n {
        let mut draws: Vec<usize> = (0..d).map(|_| rng.random_range(0..m)).collect();
        draws.sort_unstable();
        let mut col = Vec::new();
        let mut w: Vec<f64> = Vec::new();
        for r in draws {
            if col.last() == Some(&r) {
                *w.last_mut().unwrap() += 1.0;
            } else {
                col.push(r);
                w.push(1.0);
            }
        }
        columns.push(col);
        weights.push(w);
    }
    Ok((BipartiteGraph { n, m, d, columns }, weights))
}

/// Number of non-empty subsets of size at most `k` drawn from `n` items,
/// saturating at `u128::MAX`.
pub fn subset_count(n: usize, k: usize) -> u128 {
    let mut total: u128 = 0;
    let mut c: u128 = 1;
    for s in 1..=k.min(n) {
        c = match c.checked_mul((n - s + 1) as u128) {
            Some(v) => v / s as u128,
            None => return u128::MAX,
        };
        total = total.saturating_add(c);
    }
    total
}

fn guard(n: usize, k: usize) -> Result<()> {
    let required = subset_count(n, k);
    if required > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { required, limit: ENUMERATION_LIMIT });
    }
    Ok(())
}

enum Flow {
    Descend,
    Prune,
    Stop,
}

/// Lexicographic DFS over left subsets with incremental `|Γ(S)|`.
struct SubsetWalk<'a> {
    g: &'a BipartiteGraph,
    counts: Vec<u32>,
    cover: usize,
    stack: Vec<usize>,
    visited: u128,
    budget: u128,
}

impl<'a> SubsetWalk<'a> {
    fn new(g: &'a BipartiteGraph, budget: u128) -> Self {
        Self { g, counts: vec![0; g.m], cover: 0, stack: Vec::new(), visited: 0, budget }
    }

    fn push(&mut self, j: usize) {
        for &r in &self.g.columns[j] {
            if self.counts[r] == 0 {
                self.cover += 1;
            }
            self.counts[r] += 1;
        }
        self.stack.push(j);
    }

    fn pop(&mut self) {
        let j = self.stack.pop().expect("pop on empty walk");
        for &r in &self.g.columns[j] {
            self.counts[r] -= 1;
            if self.counts[r] == 0 {
                self.cover -= 1;
            }
        }
    }

    /// Visits every non-empty subset of size ≤ `max_size` (modulo pruning).
    /// `visit` sees the current subset and `|Γ(S)|`; `max_size` is re-read
    /// through `limit` so callers can shrink it as they go.
    fn run(&mut self, limit: &dyn Fn() -> usize, visit: &mut dyn FnMut(&[usize], usize) -> Flow) -> Result<bool> {
        self.descend(0, limit, visit)
    }

    fn descend(
        &mut self,
        start: usize,
        limit: &dyn Fn() -> usize,
        visit: &mut dyn FnMut(&[usize], usize) -> Flow,
    ) -> Result<bool> {
        for j in start..self.g.n {
            if self.stack.len() >= limit() {
                return Ok(true);
            }
            self.visited += 1;
            if self.visited > self.budget {
                return Err(Error::TooLarge { required: self.visited, limit: self.budget });
            }
            self.push(j);
            let flow = visit(&self.stack, self.cover);
            let keep_going = match flow {
                Flow::Stop => false,
                Flow::Prune => true,
                Flow::Descend => self.descend(j + 1, limit, visit)?,
            };
            self.pop();
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    Exhaustive,
    /// Random subsets; a `false` verdict is certain, `true` is not.
    Sampled {
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionVerdict {
    pub expands: bool,
    /// A violating subset when `expands` is false.
    pub witness: Option<Vec<usize>>,
}

/// Checks `|Γ(S)| ≥ (1 − eps)·d·|S|` for every `S` with `|S| ≤ k`.
pub fn check_expansion(g: &BipartiteGraph, k: usize, eps: f64, mode: CheckMode) -> Result<ExpansionVerdict> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidEps(eps));
    }
    if k > g.n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {}", g.n)));
    }
    let factor = (1.0 - eps) * g.d as f64;
    let violates = |size: usize, cover: usize| (cover as f64) < factor * size as f64 - 1e-9;
    match mode {
        CheckMode::Exhaustive => {
            guard(g.n, k)?;
            let mut witness = None;
            let full = factor * k as f64;
            let mut walk = SubsetWalk::new(g, ENUMERATION_LIMIT);
            walk.run(&|| k, &mut |s, cover| {
                if violates(s.len(), cover) {
                    witness = Some(s.to_vec());
                    Flow::Stop
                } else if cover as f64 >= full {
                    Flow::Prune
                } else {
                    Flow::Descend
                }
            })?;
            Ok(ExpansionVerdict { expands: witness.is_none(), witness })
        }
        CheckMode::Sampled { samples, seed } => {
            let mut rng = rng::seeded(seed);
            for _ in 0..samples {
                if k == 0 {
                    break;
                }
                let size = rng.random_range(1..=k);
                let s = index::sample(&mut rng, g.n, size).into_vec();
                if violates(size, g.neighbors(&s).len()) {
                    let mut s = s;
                    s.sort_unstable();
                    return Ok(ExpansionVerdict { expands: false, witness: Some(s) });
                }
            }
            Ok(ExpansionVerdict { expands: true, witness: None })
        }
    }
}

/// Exhaustive `(k, eps)` expansion check.
pub fn is_expander(g: &BipartiteGraph, k: usize, eps: f64) -> Result<bool> {
    Ok(check_expansion(g, k, eps, CheckMode::Exhaustive)?.expands)
}

/// Smallest `ε` for which `g` is a `(k, ε)` expander:
/// `1 − min_{0<|S|≤k} |Γ(S)| / (d|S|)`.
pub fn expansion_epsilon(g: &BipartiteGraph, k: usize) -> Result<f64> {
    if k == 0 || k > g.n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in 1..={}", g.n)));
    }
    guard(g.n, k)?;
    let d = g.d as f64;
    let mut worst = f64::INFINITY;
    let mut walk = SubsetWalk::new(g, ENUMERATION_LIMIT);
    walk.run(&|| k, &mut |s, cover| {
        let ratio = cover as f64 / (d * s.len() as f64);
        worst = worst.min(ratio);
        if cover as f64 / (d * k as f64) >= worst {
            Flow::Prune
        } else {
            Flow::Descend
        }
    })?;
    Ok((1.0 - worst).max(0.0))
}

/// `min |Γ(S)| − |S|` over non-empty `S` with `|S| ≤ t`.
///
/// Branch and bound: below a node `S`, no extension can go lower than
/// `|Γ(S)| − (largest reachable size)`. The guard is a budget on visited
/// subsets rather than on the full binomial count.
pub fn min_expansion_deficiency(g: &BipartiteGraph, t: usize) -> Result<i64> {
    if t == 0 || t > g.n {
        return Err(Error::InvalidArgument(format!("t = {t} must lie in 1..={}", g.n)));
    }
    let n = g.n;
    let mut best = i64::MAX;
    let mut walk = SubsetWalk::new(g, ENUMERATION_LIMIT);
    walk.run(&|| t, &mut |s, cover| {
        let size = s.len();
        best = best.min(cover as i64 - size as i64);
        let remaining = n - 1 - s[size - 1];
        let reach = t.min(size + remaining);
        if cover as i64 - reach as i64 >= best {
            Flow::Prune
        } else {
            Flow::Descend
        }
    })?;
    Ok(best)
}

/// A smallest left set `S` with `|S| ≤ t` and `|Γ(S)| < |S|`, if any.
///
/// Every subset of a contracting set of size `≤ t` has fewer than `t`
/// neighbours, so the walk prunes as soon as `|Γ(S)|` reaches the current
/// size limit.
pub fn smallest_contracting_set(g: &BipartiteGraph, t: usize) -> Result<Option<Vec<usize>>> {
    let limit = std::cell::Cell::new(t.min(g.n));
    let mut found: Option<Vec<usize>> = None;
    let mut walk = SubsetWalk::new(g, ENUMERATION_LIMIT);
    walk.run(&|| limit.get(), &mut |s, cover| {
        if cover < s.len() {
            found = Some(s.to_vec());
            limit.set(s.len() - 1);
            Flow::Prune
        } else if cover >= limit.get() {
            Flow::Prune
        } else {
            Flow::Descend
        }
    })?;
    Ok(found)
}

/// Largest `r ≤ max_t` such that every `S` with `|S| ≤ r` has `|Γ(S)| ≥ |S|`,
/// i.e. `g` is an `(r, 1 − 1/d)` expander.
pub fn minimal_expansion_order(g: &BipartiteGraph, max_t: usize) -> Result<usize> {
    Ok(match smallest_contracting_set(g, max_t)? {
        None => max_t.min(g.n),
        Some(s) => s.len() - 1,
    })
}

/// Non-negative weighted adjacency matrix on a bipartite graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementMatrix {
    graph: BipartiteGraph,
    weights: Vec<Vec<f64>>,
    epsilon1: f64,
}

impl MeasurementMatrix {
    /// The 0-1 adjacency matrix.
    pub fn unperturbed(graph: BipartiteGraph) -> Self {
        let weights = graph.columns.iter().map(|c| vec![1.0; c.len()]).collect();
        Self { graph, weights, epsilon1: 0.0 }
    }

    /// Attaches explicit edge weights. Weights must be positive and finite;
    /// column sums are not enforced here (see [`Self::column_sum_spread`]).
    pub fn with_weights(graph: BipartiteGraph, weights: Vec<Vec<f64>>, epsilon1: f64) -> Result<Self> {
        if weights.len() != graph.n {
            return Err(Error::DimensionMismatch { expected: graph.n, found: weights.len() });
        }
        for (c, w) in graph.columns.iter().zip(&weights) {
            if c.len() != w.len() {
                return Err(Error::DimensionMismatch { expected: c.len(), found: w.len() });
            }
            if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                return Err(Error::InvalidArgument("edge weights must be positive and finite".into()));
            }
        }
        if !(0.0..1.0).contains(&epsilon1) {
            return Err(Error::InvalidEpsilon(epsilon1));
        }
        Ok(Self { graph, weights, epsilon1 })
    }

    pub fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    pub fn n(&self) -> usize {
        self.graph.n
    }

    pub fn m(&self) -> usize {
        self.graph.m
    }

    pub fn d(&self) -> usize {
        self.graph.d
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.iter().sum()).collect()
    }

    /// `max − min` of the column sums, relative to the largest.
    pub fn column_sum_spread(&self) -> f64 {
        let sums = self.column_sums();
        let hi = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = sums.iter().copied().fold(f64::INFINITY, f64::min);
        if sums.is_empty() || hi <= 0.0 {
            0.0
        } else {
            (hi - lo) / hi
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut a = DenseMatrix::zeros(self.m(), self.n());
        for (j, (c, w)) in self.graph.columns.iter().zip(&self.weights).enumerate() {
            for (&r, &v) in c.iter().zip(w) {
                a[(r, j)] = v;
            }
        }
        a
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n(), "mul_vec: length mismatch");
        let mut y = vec![0.0; self.m()];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                for (&r, &w) in self.graph.columns[j].iter().zip(&self.weights[j]) {
                    y[r] += w * xj;
                }
            }
        }
        y
    }

    /// Dense submatrix on the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DenseMatrix {
        let mut pos = vec![usize::MAX; self.m()];
        for (i, &r) in rows.iter().enumerate() {
            pos[r] = i;
        }
        let mut a = DenseMatrix::zeros(rows.len(), cols.len());
        for (oj, &j) in cols.iter().enumerate() {
            for (&r, &w) in self.graph.columns[j].iter().zip(&self.weights[j]) {
                if pos[r] != usize::MAX {
                    a[(pos[r], oj)] = w;
                }
            }
        }
        a
    }

    pub fn column_dense(&self, j: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.m()];
        for (&r, &w) in self.graph.columns[j].iter().zip(&self.weights[j]) {
            c[r] = w;
        }
        c
    }
}

/// Jitters every edge weight uniformly in `[1 − ε₁, 1 + ε₁]` and rescales
/// each column to sum to exactly `d`.
pub fn perturb(g: &BipartiteGraph, epsilon1: f64, seed: u64) -> Result<MeasurementMatrix> {
    let base = g.columns.iter().map(|c| vec![1.0; c.len()]).collect::<Vec<_>>();
    perturb_weighted(g, &base, epsilon1, seed)
}

/// [`perturb`] on top of integer base weights (edge multiplicities).
pub fn perturb_weighted(g: &BipartiteGraph, base: &[Vec<f64>], epsilon1: f64, seed: u64) -> Result<MeasurementMatrix> {
    if !(epsilon1 > 0.0 && epsilon1 < 1.0) {
        return Err(Error::InvalidEpsilon(epsilon1));
    }
    if base.len() != g.n {
        return Err(Error::DimensionMismatch { expected: g.n, found: base.len() });
    }
    let mut rng = rng::seeded(seed);
    let d = g.d as f64;
    let mut weights = Vec::with_capacity(g.n);
    for (c, b) in g.columns.iter().zip(base) {
        if b.len() != c.len() {
            return Err(Error::DimensionMismatch { expected: c.len(), found: b.len() });
        }
        let mut w: Vec<f64> = b.iter().map(|bv| bv * rng.random_range(1.0 - epsilon1..=1.0 + epsilon1)).collect();
        let scale = d / w.iter().sum::<f64>();
        for v in &mut w {
            *v *= scale;
        }
        weights.push(w);
    }
    Ok(MeasurementMatrix { graph: g.clone(), weights, epsilon1 })
}
