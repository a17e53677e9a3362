//! `quartic`: command-line front end for orbit enumeration, local weights,
//! densities, exponential sums, periods, constants and Selmer averages.

mod commands;
mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{Cache, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "quartic", version, about = "Integral binary quartic forms: orbits, local weights and counting functions")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Flat key=value configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Cache directory (overrides the config file and QUARTIC_CACHE).
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Recompute even on a cache hit and compare against the cached result.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output format: csv, json or jsonl (subcommand-dependent default).
    #[arg(long, global = true)]
    pub format: Option<String>,
    /// Reduced-set constant on the leading coefficient.
    #[arg(long, global = true)]
    pub box_constant: Option<u32>,
    /// Reduced-set constant on the seminvariant.
    #[arg(long, global = true)]
    pub seminvariant_constant: Option<u32>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Invariants, discriminant, height, signature class and genericity of a form.
    Invariants {
        /// Coefficients a,b,c,d,e.
        #[arg(long, allow_hyphen_values = true)]
        form: String,
    },
    /// Canonical representative of a form, or the orbit stream below a height.
    Reduce {
        #[arg(long, allow_hyphen_values = true)]
        form: Option<String>,
        #[arg(long)]
        height: Option<String>,
        /// 0, 1, 2+, 2- (default: all classes).
        #[arg(long)]
        class: Option<String>,
        /// generic, irreducible or all.
        #[arg(long, default_value = "all")]
        filter: String,
        /// Write the orbit stream here (enables checkpointing).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Checkpoint file: last completed fiber and config hash.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Weighted orbit counts at a grid of heights.
    CountOrbits {
        /// 0, 1, 2+, 2- or all.
        #[arg(long, default_value = "all")]
        class: String,
        #[arg(long)]
        height: Option<String>,
        /// one, ell_over_m, or splitting:<p>:<type>[:max].
        #[arg(long, default_value = "one")]
        weight: String,
        #[arg(long, default_value = "irreducible")]
        filter: String,
        /// Comma-separated heights (default: 8 geometric points up to --height).
        #[arg(long)]
        checkpoints: Option<String>,
        /// Resume file holding the rows already computed.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Closed-form local densities against brute-force counts.
    VerifyDensity {
        #[arg(long)]
        p: Option<u64>,
        /// 1 (splitting types) or 2 (slices by valuation of a).
        #[arg(long, default_value_t = 1)]
        table: u32,
        /// Slice columns for table 2 (default 0,1,2,3).
        #[arg(long)]
        k: Option<String>,
    },
    /// Local solubility ℓ_p of z² = f(x, y).
    Solubility {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        /// Primes (default: the config prime list); "inf" is always reported.
        #[arg(long)]
        primes: Option<String>,
    },
    /// Local orbit weight m_p by levels.
    Mp {
        #[arg(long, allow_hyphen_values = true)]
        form: String,
        #[arg(long)]
        p: Option<u64>,
    },
    /// Gauss sums, orbital exponential sums and Fourier coefficients.
    Expsum {
        #[command(subcommand)]
        kind: ExpsumKind,
    },
    /// Real periods Ω(E^{I,J}) and Ω̃(I,J).
    Periods {
        #[arg(long, allow_hyphen_values = true)]
        i: String,
        #[arg(long, allow_hyphen_values = true)]
        j: String,
        /// Use the multiprecision scalar.
        #[arg(long)]
        high_precision: bool,
    },
    /// Region constants C56_pos, C56_neg, C34_pos, C34_neg.
    Constants {
        #[arg(long)]
        name: Option<String>,
        /// Monte Carlo samples for the cross-check.
        #[arg(long, default_value_t = 10_000_000)]
        samples: u64,
    },
    /// Average size of 2-Selmer groups over curves of bounded height.
    Selmer {
        #[arg(long)]
        height: Option<String>,
        /// pos, neg or both.
        #[arg(long, default_value = "both")]
        sign: String,
        #[arg(long)]
        checkpoints: Option<String>,
    },
    /// Two-term fit of a count-orbits CSV against the predicted constants.
    Fit {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        class: String,
        /// C_{3/4} for the class's sign (computed if omitted).
        #[arg(long)]
        c34: Option<f64>,
    },
    /// Quick self-check of the main identities and tables.
    VerifyAll,
}

#[derive(Subcommand, Debug, Clone)]
pub enum ExpsumKind {
    /// 𝒬_{p^k}(a) for every residue a, with its regime bound.
    Gauss {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// 𝒢_{p^k}(f, h) over PGL₂(ℤ/p^kℤ).
    Orbital {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 2)]
        k: u32,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        /// plain or invariant.
        #[arg(long, default_value = "invariant")]
        pairing: String,
    },
    /// Fourier coefficient of χ_{p²} (Δ ≡ 0 mod p²) at h.
    Fourier {
        #[arg(long)]
        p: u64,
        #[arg(long, allow_hyphen_values = true)]
        h: String,
    },
}

/// A failure with its exit code: 1 verification mismatch, 2 usage, 3 budget.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    Failure { code: 2, message: msg.into() }.into()
}

pub fn mismatch(msg: impl Into<String>) -> anyhow::Error {
    Failure { code: 1, message: msg.into() }.into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return f.code;
    }
    if let Some(q) = err.downcast_ref::<quartic::QuarticError>() {
        use quartic::QuarticError::*;
        return match q {
            InfeasibleSize { .. } | Overflow | FactorizationFailure(_) => 3,
            Parse(_) | DegenerateDiscriminant | UnsupportedPrime(_) | NotGeneric | NotRamified(_) | InsufficientData(_) => 2,
            _ => 1,
        };
    }
    2
}

/// Resolve the configuration: defaults, then file, then QUARTIC_CACHE for the
/// cache directory, then flags.
fn resolve_config(g: &GlobalOpts) -> anyhow::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &g.config {
        cfg.load_file(path).map_err(|e| usage(format!("{e:#}")))?;
    }
    if let Ok(dir) = std::env::var("QUARTIC_CACHE") {
        if !dir.is_empty() {
            cfg.cache_dir = Some(PathBuf::from(dir));
        }
    }
    if let Some(d) = &g.cache_dir {
        cfg.cache_dir = Some(d.clone());
    }
    if let Some(t) = g.threads {
        cfg.threads = Some(t);
    }
    if let Some(s) = g.seed {
        cfg.rng_seed = s;
    }
    if let Some(f) = &g.format {
        cfg.output_format = Some(f.parse().map_err(|e: anyhow::Error| usage(e.to_string()))?);
    }
    if let Some(k) = g.box_constant {
        cfg.box_constant = k;
    }
    if let Some(k) = g.seminvariant_constant {
        cfg.seminvariant_constant = k;
    }
    if cfg.box_constant == 0 || cfg.seminvariant_constant == 0 {
        return Err(usage("reduced-set constants must be positive"));
    }
    Ok(cfg)
}

/// Run a parsed command; returns the text to print and, for verification
/// commands, the mismatch to report after printing it.
fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    let cfg = resolve_config(&cli.global)?;
    if let Some(n) = cfg.threads {
        // A global pool can only be built once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (op, args) = commands::describe(&cli.command);
    let hash = cfg.hash(op, &args);
    let cache = Cache::new(cfg.cache_dir.clone());
    // Streams written to files and resumable counts manage their own state.
    let cacheable = !matches!(cli.command, Command::Reduce { out: Some(_), .. } | Command::CountOrbits { checkpoint: Some(_), .. });
    if cacheable && !cli.global.no_cache {
        if let Some(hit) = cache.get(op, &hash) {
            return Ok(commands::Outcome { text: hit, failure: None });
        }
    }
    let outcome = commands::execute(&cli.command, &cfg, &hash)?;
    // Only successful results are cached.
    if cacheable && outcome.failure.is_none() {
        if cli.global.no_cache {
            if let Some(prev) = cache.get(op, &hash) {
                if prev != outcome.text {
                    return Err(mismatch(format!("recomputed {op} output differs from the cached result {hash}")));
                }
            }
        }
        cache.put(op, &hash, &outcome.text)?;
    }
    Ok(outcome)
}

/// Parse argv and run; prints the result and returns the process exit code.
pub fn dispatch<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.text);
            match outcome.failure {
                None => 0,
                Some(msg) => {
                    eprintln!("error: {msg}");
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(dispatch(std::env::args_os()))
}

/// Sorted argument map used for hashing.
pub type ArgMap = BTreeMap<String, String>;
