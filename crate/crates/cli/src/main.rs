use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Like `println!` but tolerates a closed stdout (e.g. piping into
/// `head`), which would otherwise abort the run with a panic.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

use fogcache::convergence::{
    check_theorem1, check_theorem2, optimum, random_instance, run_fedsgd, trace_to_csv,
};
use fogcache::sim::{compare_policies, run_experiment, PolicyKind, SimConfig};
use fogcache::Error;

#[derive(Parser)]
#[command(
    name = "fogcache",
    about = "Cooperative edge-caching simulator with federated reinforcement learning",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config file).
    #[arg(long)]
    seed: Option<u64>,
    /// Cache policy (overrides the config file).
    #[arg(long)]
    policy: Option<PolicyKind>,
    /// Fraction of layers kept in compressed uploads (overrides config).
    #[arg(long)]
    keep: Option<f64>,
    /// Codebook size k for quantized uploads (overrides config).
    #[arg(long)]
    clusters: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write metrics.csv, rounds.csv, summary.json.
    Run(CommonOpts),
    /// Run several policies on the same request trace and print a ranking.
    Compare {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated policies to compare.
        #[arg(long, value_delimiter = ',',
              default_value = "frlq,frl,dqn,centralized,lru,lfu")]
        policies: Vec<PolicyKind>,
    },
    /// Numerically check the convergence theorems and write theorems.csv.
    Theorems {
        #[command(flatten)]
        common: CommonOpts,
        /// Noise replicas per expectation estimate.
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        /// Randomized instances to check.
        #[arg(long, default_value_t = 10)]
        instances: u64,
    },
}

fn load_config(opts: &CommonOpts) -> Result<SimConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => SimConfig::from_path(path)?,
        None => SimConfig::default(),
    };
    if let Some(seed) = opts.seed {
        cfg.run.seed = seed;
    }
    if let Some(policy) = opts.policy {
        cfg.run.policy = policy;
    }
    if let Some(keep) = opts.keep {
        cfg.federation.keep_fraction = keep;
    }
    if let Some(k) = opts.clusters {
        cfg.federation.clusters = k;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(opts: &CommonOpts) -> Result<(), Error> {
    let cfg = load_config(opts)?;
    let out = run_experiment(&cfg, cfg.run.seed)?;
    out.write_artifacts(&opts.out)?;
    let s = &out.summary;
    out!(
        "policy={} seed={} slots={} hit_rate={:.4} avg_delay_ms={:.3} mean_reward={:.6}",
        s.policy,
        s.seed,
        s.slots_run,
        s.hit_rate,
        s.avg_delay * 1e3,
        s.mean_reward
    );
    out!("artifacts written to {}", opts.out.display());
    Ok(())
}

fn cmd_compare(opts: &CommonOpts, policies: &[PolicyKind]) -> Result<(), Error> {
    let cfg = load_config(opts)?;
    let outputs = compare_policies(&cfg, policies, cfg.run.seed)?;
    let mut ranked: Vec<_> = outputs.iter().collect();
    ranked.sort_by(|a, b| b.summary.hit_rate.partial_cmp(&a.summary.hit_rate).unwrap());
    out!("{:<12} {:>10} {:>14} {:>14}", "policy", "hit_rate", "avg_delay_ms", "mean_reward");
    for o in &ranked {
        let s = &o.summary;
        out!(
            "{:<12} {:>10.4} {:>14.3} {:>14.6}",
            s.policy,
            s.hit_rate,
            s.avg_delay * 1e3,
            s.mean_reward
        );
    }
    for o in &outputs {
        o.write_artifacts(&opts.out.join(&o.summary.policy))?;
    }
    out!("artifacts written under {}", opts.out.display());
    Ok(())
}

fn cmd_theorems(opts: &CommonOpts, replicas: usize, instances: u64) -> Result<(), Error> {
    let seed = opts.seed.unwrap_or(0);
    std::fs::create_dir_all(&opts.out)?;
    let client_counts = [2usize, 5, 10];
    let local_updates = [1u64, 2, 5, 10];
    let mut all_hold = true;
    let mut first_csv: Option<String> = None;
    for i in 0..instances {
        let n = client_counts[(i as usize) % client_counts.len()];
        let x = local_updates[(i as usize) % local_updates.len()];
        let dim = 1 + (i as usize) % 3;
        let (clients, schedule, start) = random_instance(n, dim, x, seed + i);
        let periods = (100 / x).max(5);
        let trace = run_fedsgd(&clients, x, periods, schedule, &start, replicas, seed + i)?;
        let t1 = check_theorem1(&trace, None);
        let t1_ok = t1.iter().all(|v| v.holds);
        let t2 = check_theorem2(&trace)?;
        let (_, phi) = optimum(&clients)?;
        out!(
            "instance {i}: N={n} X={x} dim={dim} phi_gap={phi:.4e} theorem1={} theorem2={}",
            if t1_ok { "holds" } else { "VIOLATED" },
            if t2.holds { "holds" } else { "VIOLATED" },
        );
        all_hold &= t1_ok && t2.holds;
        if first_csv.is_none() {
            first_csv = Some(trace_to_csv(&trace));
        }
    }
    let path = opts.out.join("theorems.csv");
    std::fs::write(&path, first_csv.unwrap_or_default())?;
    out!("trace written to {}", path.display());
    out!("overall: {}", if all_hold { "all bounds hold" } else { "BOUND VIOLATIONS FOUND" });
    Ok(())
}

/// Exit codes: 0 success, 2 configuration error, 3 invariant violation
/// during a run, 1 other I/O failures.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::Io(_) => 1,
        _ => 3,
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(opts) => cmd_run(opts),
        Command::Compare { common, policies } => cmd_compare(common, policies),
        Command::Theorems { common, replicas, instances } => {
            cmd_theorems(common, *replicas, *instances)
        }
    };
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
