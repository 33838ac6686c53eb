use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use minexp::nullspace::{strong_recoverable_k, support_recoverable, two_hop_condition};
use minexp::recovery::{l1_min_nonneg, noisy_recovery, reverse_expansion_recovery, NormChoice, DEFAULT_ZERO_TOL};
use minexp::thresholds::{existence_prob_bound, strong_max_mu, strong_min_degree, weak_max_alpha};
use minexp::Error;
use minexp_cli::config::{Algorithm, Sampling, SweepConfig};
use minexp_cli::io::{self, IoError};
use minexp_cli::sweep::{build_matrix, run_noise_sweep, run_recovery_sweep, to_csv};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;
const EXIT_INFEASIBLE: u8 = 4;

#[derive(Parser)]
#[command(name = "minexp", version, about = "Sparse non-negative recovery with perturbed expander matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    L1,
    Alg1,
    #[value(name = "alg2-l1")]
    Alg2L1,
    #[value(name = "alg2-l2")]
    Alg2L2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Strong,
    Support,
    TwoHop,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Strong,
    Weak,
    Prob,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplingArg {
    Distinct,
    Repetition,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a (perturbed) random left-regular measurement matrix.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        /// Perturbation magnitude; 0 keeps the plain adjacency matrix.
        #[arg(long, default_value_t = 0.1)]
        eps1: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, value_enum, default_value = "distinct")]
        sampling: SamplingArg,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover a signal from measurements `y`.
    Recover {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        y: PathBuf,
        #[arg(long, value_enum, default_value = "l1")]
        algo: Algo,
        /// Sparsity bound, required by alg1 and alg2.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ZERO_TOL)]
        zero_tol: f64,
        /// Estimate output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check recoverability certificates.
    Certify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, value_enum, default_value = "strong")]
        mode: Mode,
        /// Comma-separated column indices.
        #[arg(long, value_delimiter = ',')]
        support: Vec<usize>,
    },
    /// Evaluate sparsity thresholds.
    Threshold {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        mu: Option<f64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long)]
        r0: Option<u64>,
    },
    /// Noiseless success-rate sweep; CSV on stdout or `--out`.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// SER versus SNR sweep; CSV on stdout or `--out`.
    NoiseSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numeric(String),
    Infeasible(String),
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Infeasible | Error::InsufficientZeros { .. } | Error::DegenerateSplit => Failure::Infeasible(msg),
            Error::RankDeficient { .. }
            | Error::NumericalFailure { .. }
            | Error::NonFinite
            | Error::NoFeasibleMu
            | Error::NoFeasibleAlpha => Failure::Numeric(msg),
            _ => Failure::Usage(msg),
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required here")))
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(&p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_config(path: &PathBuf) -> Result<SweepConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    SweepConfig::parse(&text).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { n, m, d, eps1, seed, sampling, out } => {
            let sampling = match sampling {
                SamplingArg::Distinct => Sampling::Distinct,
                SamplingArg::Repetition => Sampling::Repetition,
            };
            let a = build_matrix(n, m, d, eps1, sampling, seed)?;
            emit(out, &io::format_matrix(&a))
        }
        Command::Recover { matrix, y, algo, k, zero_tol, out } => {
            let a = io::read_matrix(&matrix)?;
            let y = io::read_vector(&y)?;
            let rep = match algo {
                Algo::L1 => l1_min_nonneg(&a, &y)?,
                Algo::Alg1 => reverse_expansion_recovery(&a, &y, need(k, "k")?, zero_tol)?,
                Algo::Alg2L1 => noisy_recovery(&a, &y, need(k, "k")?, NormChoice::L1)?,
                Algo::Alg2L2 => noisy_recovery(&a, &y, need(k, "k")?, NormChoice::L2)?,
            };
            eprintln!("status: {}; residual_l1 = {:e}", rep.solver_status, rep.residual_l1);
            if let Some(s) = &rep.split {
                eprintln!(
                    "split: |T1| = {}, |T2| = {}, |S2| = {}, full column rank = {}",
                    s.zero_rows, s.kept_rows, s.kept_columns, s.full_column_rank
                );
            }
            emit(out, &io::format_vector(&rep.estimate))
        }
        Command::Certify { matrix, k, mode, support } => {
            let a = io::read_matrix(&matrix)?;
            let ok = match mode {
                Mode::Strong => {
                    let k = need(k, "k")?;
                    let v = strong_recoverable_k(&a, k)?;
                    match &v.failing {
                        Some(f) => println!("strong k = {k}: not recoverable; failing support {:?}", f.support),
                        None => println!("strong k = {k}: recoverable"),
                    }
                    v.recoverable
                }
                Mode::Support => {
                    let c = support_recoverable(&a, &support)?;
                    println!(
                        "support {:?}: {}",
                        c.support,
                        if c.recoverable { "recoverable" } else { "not recoverable" }
                    );
                    c.recoverable
                }
                Mode::TwoHop => {
                    let ok = two_hop_condition(&a, &support)?;
                    println!("two-hop condition on {support:?}: {}", if ok { "holds" } else { "fails" });
                    ok
                }
            };
            if ok {
                Ok(())
            } else {
                Err(Failure::Infeasible("certification failed".into()))
            }
        }
        Command::Threshold { kind, beta, d, mu, n, m, r0 } => {
            match kind {
                Kind::Strong => {
                    let beta = need(beta, "beta")?;
                    if let Some(mu) = mu {
                        println!("strong_min_degree = {:.12}", strong_min_degree(mu, beta)?);
                    }
                    if let Some(d) = d {
                        let mu = strong_max_mu(beta, d as u32)?;
                        println!("strong_max_mu = {mu:.12}");
                        println!("sparsity_ratio = {:.12}", mu / d as f64);
                    }
                    if mu.is_none() && d.is_none() {
                        return Err(Failure::Usage("strong thresholds need --mu or --d".into()));
                    }
                }
                Kind::Weak => {
                    let alpha = weak_max_alpha(need(beta, "beta")?, need(d, "d")? as u32)?;
                    println!("weak_max_alpha = {alpha:.12}");
                }
                Kind::Prob => {
                    let p = existence_prob_bound(need(n, "n")?, need(m, "m")?, need(r0, "r0")?, need(d, "d")?);
                    println!("existence_prob_bound = {p:.12}");
                }
            }
            Ok(())
        }
        Command::Sweep { config, out } => {
            let cfg = load_config(&config)?;
            let rows = run_recovery_sweep(&cfg)?;
            emit(out, &to_csv(&cfg, &rows))
        }
        Command::NoiseSweep { config, out } => {
            let cfg = load_config(&config)?;
            if !matches!(cfg.algorithm, Algorithm::Alg2L1 | Algorithm::Alg2L2) {
                return Err(Failure::Usage("noise-sweep needs algorithm = alg2-l1 or alg2-l2".into()));
            }
            let rows = run_noise_sweep(&cfg)?;
            emit(out, &to_csv(&cfg, &rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Infeasible(m)) => {
            eprintln!("{m}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
    }
}
