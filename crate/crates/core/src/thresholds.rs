//! Strong and weak sparsity thresholds, and the finite-size probability
//! that a random left-regular graph is a minimal expander.
//!
//! All logarithms are base 2. The exponential inside `γ₁` is natural.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Absolute tolerance of the bisections in [`strong_max_mu`] and
/// [`weak_max_alpha`].
pub const BISECTION_TOL: f64 = 1e-10;
/// Default grid resolution for the weak-threshold region check.
pub const DEFAULT_WEAK_GRID: usize = 400;

/// Ratios describing an asymptotic regime `m = βn`, `r₀ = μn`, `k = αn`,
/// with enumeration ratios `ρ₁ = r₁/n`, `ρ₂ = r₂/n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdParams {
    pub beta: f64,
    pub mu: f64,
    pub alpha: f64,
    pub d: u32,
    pub rho1: f64,
    pub rho2: f64,
}

impl ThresholdParams {
    /// Parameters for evaluating the weak exponent `F(ρ₁, ρ₂)`.
    pub fn weak(alpha: f64, beta: f64, d: u32, rho1: f64, rho2: f64) -> Self {
        Self { beta, mu: 0.0, alpha, d, rho1, rho2 }
    }

    /// `γ₁ = (1 − e^{−dα/β})·β`: expected neighbourhood ratio of a random
    /// `αn`-subset.
    pub fn gamma1(&self) -> f64 {
        gamma1(self.alpha, self.beta, self.d)
    }
}

fn gamma1(alpha: f64, beta: f64, d: u32) -> f64 {
    (1.0 - (-(d as f64) * alpha / beta).exp()) * beta
}

/// Base-2 binary entropy with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfDomain(x));
    }
    Ok(xlog(x) + xlog(1.0 - x))
}

/// `−x log₂ x` with `0 log 0 = 0`.
fn xlog(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// Clamps ratios that overshoot `[0, 1]` by rounding only.
fn ratio(num: f64, den: f64) -> Result<f64> {
    let r = num / den;
    if !(-1e-12..=1.0 + 1e-12).contains(&r) || r.is_nan() {
        return Err(Error::OutOfDomain(r));
    }
    Ok(r.clamp(0.0, 1.0))
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(beta))
    }
}

fn check_degree(d: u32) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("degree {d} below 3")));
    }
    Ok(())
}

/// `(H(μ) + βH(μ/β)) / (μ log₂(β/μ))`: left degrees strictly above this
/// admit `(μn, (d−1)/d)` expanders asymptotically.
pub fn strong_min_degree(mu: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    if !(mu > 0.0 && mu < beta) {
        return Err(Error::OutOfDomain(mu));
    }
    let den = mu * (beta / mu).log2();
    if den <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((binary_entropy(mu)? + beta * binary_entropy(mu / beta)?) / den)
}

/// Largest `μ ∈ (0, β)` with `strong_min_degree(μ, β) < d`. The
/// recoverable sparsity ratio is `μ/d`.
pub fn strong_max_mu(beta: f64, d: u32) -> Result<f64> {
    check_beta(beta)?;
    check_degree(d)?;
    let feasible = |mu: f64| strong_min_degree(mu, beta).is_ok_and(|v| v < d as f64);
    const STEPS: usize = 1000;
    let mut lo = None;
    for i in (1..STEPS).rev() {
        let mu = beta * i as f64 / STEPS as f64;
        if feasible(mu) {
            lo = Some(mu);
            break;
        }
    }
    let (mut lo, mut hi) = match lo {
        Some(lo) => (lo, (lo + beta / STEPS as f64).min(beta)),
        None => {
            // Below the first grid point: shrink geometrically.
            let mut mu = beta / STEPS as f64;
            loop {
                mu /= 2.0;
                if mu < 1e-300 {
                    return Err(Error::NoFeasibleMu);
                }
                if feasible(mu) {
                    break (mu, 2.0 * mu);
                }
            }
        }
    };
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// `ln C(n, k)` through log-gamma.
fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `Σ_{r=d}^{r₀} C(n,r)·C(m,r)·C(r,d)^r / C(m,d)^r`, evaluated term by term in
/// log space. Terms below `e^{−745}` are dropped.
pub fn existence_failure_sum(n: u64, m: u64, r0: u64, d: u64) -> f64 {
    if d == 0 || d > m {
        return 0.0;
    }
    let lcmd = ln_binomial(m, d);
    let mut sum = 0.0;
    for r in d..=r0.min(n).min(m) {
        let rf = r as f64;
        let log_term = ln_binomial(n, r) + ln_binomial(m, r) + rf * ln_binomial(r, d) - rf * lcmd;
        if log_term > -745.0 {
            sum += log_term.exp();
        }
    }
    sum
}

/// Lower bound on the probability that a random left `d`-regular graph on
/// `n × m` vertices is an `(r₀, (d−1)/d)` expander, clamped to `[0, 1]`.
/// An empty sum (`r₀ < d`) gives exactly 1.
pub fn existence_prob_bound(n: u64, m: u64, r0: u64, d: u64) -> f64 {
    (1.0 - existence_failure_sum(n, m, r0, d)).clamp(0.0, 1.0)
}

/// `F(ρ₁,ρ₂) = αH(ρ₁/α) + (1−α)H(ρ₂/(1−α)) + βH((ρ₁+ρ₂)/β) + d(ρ₁+ρ₂)log₂((ρ₁+ρ₂)/β)`.
#[allow(non_snake_case)]
pub fn weak_F(p: &ThresholdParams) -> Result<f64> {
    let ThresholdParams { beta, alpha, d, rho1, rho2, .. } = *p;
    check_beta(beta)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfDomain(alpha));
    }
    if rho1 < 0.0 || rho2 < 0.0 {
        return Err(Error::OutOfDomain(rho1.min(rho2)));
    }
    let s = rho1 + rho2;
    let rs = ratio(s, beta)?;
    let tail = if s > 0.0 { d as f64 * s * rs.log2() } else { 0.0 };
    Ok(alpha * binary_entropy(ratio(rho1, alpha)?)?
        + (1.0 - alpha) * binary_entropy(ratio(rho2, 1.0 - alpha)?)?
        + beta * binary_entropy(rs)?
        + tail)
}

/// Box `[ρ₁ bounds] × [ρ₂ bounds]` searched for a given `α`, clipped so that
/// `ρ₁ + ρ₂ ≤ γ₁`.
struct Region {
    alpha: f64,
    beta: f64,
    d: u32,
    r1_max: f64,
    r2_max: f64,
    g1: f64,
}

impl Region {
    fn new(alpha: f64, beta: f64, d: u32) -> Self {
        let g1 = gamma1(alpha, beta, d);
        Self { alpha, beta, d, r1_max: alpha.min(g1), r2_max: (1.0 - alpha).min(g1), g1 }
    }

    /// `F` at a point of the closed region, `None` outside it or at the origin.
    fn eval(&self, r1: f64, r2: f64) -> Option<f64> {
        if r1 < 0.0 || r2 < 0.0 || r1 > self.r1_max || r2 > self.r2_max || r1 + r2 > self.g1 {
            return None;
        }
        if r1 == 0.0 && r2 == 0.0 {
            return None;
        }
        weak_F(&ThresholdParams::weak(self.alpha, self.beta, self.d, r1, r2)).ok()
    }

    /// Largest value of `F` found by a `grid × grid` scan followed by
    /// successive zooms around the best few grid points.
    fn max_f(&self, grid: usize) -> f64 {
        let (h1, h2) = (self.r1_max / grid as f64, self.r2_max / grid as f64);
        let mut top: Vec<(f64, f64, f64)> = Vec::with_capacity(5);
        for i in 0..=grid {
            for j in 0..=grid {
                let (r1, r2) = (i as f64 * h1, j as f64 * h2);
                if let Some(f) = self.eval(r1, r2) {
                    if top.len() < 4 || f > top[top.len() - 1].0 {
                        top.push((f, r1, r2));
                        top.sort_by(|a, b| b.0.total_cmp(&a.0));
                        top.truncate(4);
                    }
                }
            }
        }
        let mut best = top.first().map_or(f64::NEG_INFINITY, |t| t.0);
        for &(mut f, mut c1, mut c2) in &top {
            let (mut w1, mut w2) = (h1, h2);
            for _ in 0..6 {
                const SUB: i32 = 10;
                let (mut n1, mut n2) = (c1, c2);
                for a in -SUB..=SUB {
                    for b in -SUB..=SUB {
                        let (r1, r2) = (c1 + w1 * a as f64 / SUB as f64, c2 + w2 * b as f64 / SUB as f64);
                        if let Some(v) = self.eval(r1, r2) {
                            if v > f {
                                (f, n1, n2) = (v, r1, r2);
                            }
                        }
                    }
                }
                (c1, c2) = (n1, n2);
                w1 /= 5.0;
                w2 /= 5.0;
            }
            best = best.max(f);
        }
        best.max(self.max_on_diagonal_edge(grid))
    }

    /// The maximum often sits on the edge `ρ₁ + ρ₂ = γ₁`, which grid points
    /// almost never hit exactly: scan it directly, then refine the best
    /// bracket by golden-section search.
    fn max_on_diagonal_edge(&self, grid: usize) -> f64 {
        let on_edge = |r1: f64| {
            let r1 = r1.clamp(0.0, self.r1_max);
            let r2 = (self.g1 - r1).clamp(0.0, self.r2_max);
            self.eval(r1, r2).unwrap_or(f64::NEG_INFINITY)
        };
        let lo = (self.g1 - self.r2_max).max(0.0);
        let hi = self.r1_max;
        if hi < lo {
            return f64::NEG_INFINITY;
        }
        let steps = 4 * grid;
        let h = (hi - lo) / steps as f64;
        let (mut best, mut at) = (f64::NEG_INFINITY, 0);
        for i in 0..=steps {
            let f = on_edge(lo + i as f64 * h);
            if f > best {
                (best, at) = (f, i);
            }
        }
        let (mut a, mut b) = (lo + at.saturating_sub(1) as f64 * h, lo + (at + 1).min(steps) as f64 * h);
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let (x1, x2) = (b - phi * (b - a), a + phi * (b - a));
            let (f1, f2) = (on_edge(x1), on_edge(x2));
            best = best.max(f1).max(f2);
            if f1 >= f2 {
                b = x2;
            } else {
                a = x1;
            }
        }
        best
    }
}

/// Largest `α` such that `F(ρ₁, ρ₂) < 0` on
/// `{ρ₁ ≤ α, ρ₂ ≤ 1 − α, ρ₁ + ρ₂ ≤ γ₁} \ {(0, 0)}`, with the region
/// checked on a [`DEFAULT_WEAK_GRID`] grid plus local refinement.
pub fn weak_max_alpha(beta: f64, d: u32) -> Result<f64> {
    weak_max_alpha_with(beta, d, DEFAULT_WEAK_GRID)
}

/// [`weak_max_alpha`] with an explicit grid resolution.
///
/// The feasible set is assumed to be an interval starting at zero: the
/// upper end is bracketed by doubling from `α = 10⁻⁶` and then bisected.
/// A grid check can miss a positive spike between grid points, so the
/// result may slightly overestimate the true threshold.
pub fn weak_max_alpha_with(beta: f64, d: u32, grid: usize) -> Result<f64> {
    check_beta(beta)?;
    check_degree(d)?;
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("grid {grid} too coarse")));
    }
    let feasible = |alpha: f64| Region::new(alpha, beta, d).max_f(grid) < 0.0;
    let mut lo = 1e-6;
    if !feasible(lo) {
        return Err(Error::NoFeasibleAlpha);
    }
    let mut hi = 2.0 * lo;
    while feasible(hi) {
        lo = hi;
        hi *= 2.0;
        if hi >= 1.0 {
            hi = 1.0 - 1e-12;
            if feasible(hi) {
                return Ok(hi);
            }
            break;
        }
    }
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}
