//! Monte-Carlo recovery sweeps over a sparsity grid, optionally with noise.

use std::fmt::Write as _;
use std::time::Instant;

use minexp::graph::{perturb, perturb_weighted, random_left_regular, random_with_repetition};
use minexp::recovery::{
    l1_min_nonneg, l1_optimum_unique, noisy_recovery, reverse_expansion_recovery, ser_db, NoiseModel, NormChoice,
    SparseSignal, DEFAULT_SUCCESS_TOL, DEFAULT_ZERO_TOL,
};
use minexp::rng::{derive_seed, seeded};
use minexp::{Error, MeasurementMatrix, Result};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::{Algorithm, Sampling, SweepConfig};

/// SER reported for an exact recovery.
pub const SER_CAP_DB: f64 = 160.0;
/// Test signals take values uniformly in this range on their support.
pub const SIGNAL_RANGE: (f64, f64) = (0.1, 1.1);
pub const WORKERS_ENV: &str = "MINEXP_WORKERS";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub k: usize,
    /// Present for noise sweeps.
    pub snr_db: Option<f64>,
    pub successes: usize,
    pub trials: usize,
    pub success_fraction: f64,
    pub mean_ser_db: f64,
    pub mean_runtime_ms: f64,
}

/// Random left-regular graph, perturbed unless `epsilon1 = 0`. The graph
/// depends only on `(n, m, d, sampling, seed)`, so perturbed and
/// unperturbed runs with the same seed share it.
pub fn build_matrix(
    n: usize,
    m: usize,
    d: usize,
    epsilon1: f64,
    sampling: Sampling,
    seed: u64,
) -> Result<MeasurementMatrix> {
    let (gs, ps) = (derive_seed(seed, &[0]), derive_seed(seed, &[1]));
    match sampling {
        Sampling::Distinct => {
            let g = random_left_regular(n, m, d, gs)?;
            if epsilon1 == 0.0 {
                Ok(MeasurementMatrix::unperturbed(g))
            } else {
                perturb(&g, epsilon1, ps)
            }
        }
        Sampling::Repetition => {
            let (g, base) = random_with_repetition(n, m, d, gs)?;
            if epsilon1 == 0.0 {
                MeasurementMatrix::with_weights(g, base, 0.0)
            } else {
                perturb_weighted(&g, &base, epsilon1, ps)
            }
        }
    }
}

/// Worker count: `MINEXP_WORKERS` if set, then the config, then rayon's
/// default.
pub fn worker_count(cfg: &SweepConfig) -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(Error::InvalidArgument(format!("{WORKERS_ENV} = `{v}` is not a positive integer"))),
        },
        Err(_) => Ok(cfg.workers),
    }
}

fn pool(cfg: &SweepConfig) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = worker_count(cfg)? {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| Error::InvalidArgument(e.to_string()))
}

fn recover(a: &MeasurementMatrix, y: &[f64], k: usize, algo: Algorithm) -> Result<Vec<f64>> {
    let rep = match algo {
        Algorithm::L1 => l1_min_nonneg(a, y)?,
        Algorithm::Alg1 => reverse_expansion_recovery(a, y, k, DEFAULT_ZERO_TOL)?,
        Algorithm::Alg2L1 => noisy_recovery(a, y, k, NormChoice::L1)?,
        Algorithm::Alg2L2 => noisy_recovery(a, y, k, NormChoice::L2)?,
    };
    Ok(rep.estimate)
}

struct Trial {
    success: bool,
    ser: f64,
    ms: f64,
}

/// Runs one trial; solver errors count as failures with a zero estimate.
/// For ℓ1 minimization success also requires the optimum to be unique.
fn trial(a: &MeasurementMatrix, x: &SparseSignal, y: &[f64], k: usize, cfg: &SweepConfig) -> Trial {
    let start = Instant::now();
    let est = recover(a, y, k, cfg.algorithm).unwrap_or_else(|_| vec![0.0; a.n()]);
    let ms = if cfg.record_timing { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    let err = est.iter().zip(x.entries()).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
    // A vertex that happens to equal x is not a recovery if other optima exist.
    let success = err <= DEFAULT_SUCCESS_TOL
        && (cfg.algorithm != Algorithm::L1 || l1_optimum_unique(a, y, &est, DEFAULT_SUCCESS_TOL).unwrap_or(false));
    Trial { success, ser: ser_db(x.entries(), &est, SER_CAP_DB), ms }
}

fn aggregate(k: usize, snr_db: Option<f64>, trials: &[Trial]) -> SweepRow {
    let t = trials.len();
    let successes = trials.iter().filter(|r| r.success).count();
    // Sequential sums in trial order keep the output schedule independent.
    let ser: f64 = trials.iter().map(|r| r.ser).sum();
    let ms: f64 = trials.iter().map(|r| r.ms).sum();
    SweepRow {
        k,
        snr_db,
        successes,
        trials: t,
        success_fraction: successes as f64 / t as f64,
        mean_ser_db: ser / t as f64,
        mean_runtime_ms: ms / t as f64,
    }
}

fn signal(cfg: &SweepConfig, k: usize, t: usize) -> Result<(SparseSignal, minexp::rng::Rng)> {
    let mut rng = seeded(derive_seed(cfg.seed, &[k as u64, t as u64]));
    let x = SparseSignal::random(cfg.n, k, SIGNAL_RANGE.0, SIGNAL_RANGE.1, &mut rng)?;
    Ok((x, rng))
}

/// Noiseless sweep: success fraction of the configured algorithm at every
/// sparsity in the grid.
pub fn run_recovery_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate().map_err(Error::InvalidArgument)?;
    let a = build_matrix(cfg.n, cfg.m, cfg.d, cfg.epsilon1, cfg.sampling, cfg.seed)?;
    let pool = pool(cfg)?;
    cfg.sparsity_grid
        .iter()
        .map(|&k| {
            let trials = pool.install(|| {
                (0..cfg.trials_per_point)
                    .into_par_iter()
                    .map(|t| {
                        let (x, _) = signal(cfg, k, t)?;
                        let y = a.mul_vec(x.entries());
                        Ok(trial(&a, &x, &y, k, cfg))
                    })
                    .collect::<Result<Vec<_>>>()
            })?;
            Ok(aggregate(k, None, &trials))
        })
        .collect()
}

/// Noisy sweep: for every sparsity and SNR point, Gaussian noise rescaled to
/// the target SNR. Signals and noise directions depend only on
/// `(seed, k, trial)`, so SNR points share them.
pub fn run_noise_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate().map_err(Error::InvalidArgument)?;
    let grid =
        cfg.noise_snr_grid.as_ref().ok_or_else(|| Error::InvalidArgument("noise sweep needs noise_snr_grid".into()))?;
    if !matches!(cfg.algorithm, Algorithm::Alg2L1 | Algorithm::Alg2L2) {
        return Err(Error::InvalidArgument(format!("noise sweep needs alg2-l1 or alg2-l2, not {}", cfg.algorithm)));
    }
    let a = build_matrix(cfg.n, cfg.m, cfg.d, cfg.epsilon1, cfg.sampling, cfg.seed)?;
    let pool = pool(cfg)?;
    let mut rows = Vec::new();
    for &k in &cfg.sparsity_grid {
        let cases = (0..cfg.trials_per_point)
            .map(|t| {
                let (x, mut rng) = signal(cfg, k, t)?;
                let clean = a.mul_vec(x.entries());
                let dir: Vec<f64> = (0..cfg.m).map(|_| StandardNormal.sample(&mut rng)).collect();
                Ok((x, clean, dir))
            })
            .collect::<Result<Vec<_>>>()?;
        for &snr in grid {
            let trials: Vec<Trial> = pool.install(|| {
                cases
                    .par_iter()
                    .map(|(x, clean, dir)| {
                        let y = NoiseModel::at_snr(clean, dir, snr).apply(clean);
                        trial(&a, x, &y, k, cfg)
                    })
                    .collect()
            });
            rows.push(aggregate(k, Some(snr), &trials));
        }
    }
    Ok(rows)
}

/// CSV with the configuration echoed as `#` comments. Noise sweeps carry an
/// extra `snr_db` column after `k`.
pub fn to_csv(cfg: &SweepConfig, rows: &[SweepRow]) -> String {
    let noisy = rows.iter().any(|r| r.snr_db.is_some());
    let mut out = cfg.comment_block();
    out.push_str(if noisy {
        "k,snr_db,success_fraction,mean_ser_db,mean_runtime_ms\n"
    } else {
        "k,success_fraction,mean_ser_db,mean_runtime_ms\n"
    });
    for r in rows {
        write!(out, "{}", r.k).unwrap();
        if let Some(s) = r.snr_db {
            write!(out, ",{s}").unwrap();
        }
        writeln!(out, ",{},{:.6},{:.3}", r.success_fraction, r.mean_ser_db, r.mean_runtime_ms).unwrap();
    }
    out
}
