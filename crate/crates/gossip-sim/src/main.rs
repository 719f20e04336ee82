//! Command-line front end: single simulations, parameter sweeps, the theory
//! table, the M/D/inf validator and the canned benchmark grid.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gossip_sim::analytics;
use gossip_sim::config::{PolicyKind, SimConfig};
use gossip_sim::harness::{
    self, mean_and_stderr, parse_sweep_file, reproduce_fig3_spec, DeltaRule, HarnessError,
    SweepSpec,
};
use gossip_sim::queue;

#[derive(Parser)]
#[command(
    name = "gossip-sim",
    version,
    about = "Simulate and analyze version-age dynamics in fully-connected gossip networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration and print its time-average statistics.
    Simulate(SimulateArgs),
    /// Run a parameter sweep and write CSV plus plot data.
    Sweep(SweepArgs),
    /// Print the closed-form mean-age table for given parameters.
    Theory(TheoryArgs),
    /// Validate the M/D/inf occupancy law by simulation.
    QueueCheck(QueueCheckArgs),
    /// Run the canned benchmark grid (n in {8..256}, ratios {0.4, 1, 2},
    /// all four policies) and write its data files.
    ReproduceFig3(Fig3Args),
}

#[derive(Args)]
struct SimulateArgs {
    /// Number of gossip nodes.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Source self-update rate.
    #[arg(long, default_value_t = 1.0)]
    lambda_e: f64,
    /// Total source-to-network update rate.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Total gossip capacity B (default n * lambda).
    #[arg(long)]
    capacity: Option<f64>,
    /// Gossip-window length (fully-distributed only).
    #[arg(long)]
    delta: Option<f64>,
    /// uniform | semi | fully | asuman
    #[arg(long, default_value = "semi")]
    policy: PolicyKind,
    #[arg(long, default_value_t = 1e5)]
    horizon: f64,
    /// Prefix excluded from time averages (default horizon / 10).
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Independent trials to average over.
    #[arg(long, default_value_t = 1)]
    trials: u32,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep config file (flat key = value lines; see the README).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Network sizes, comma separated (overrides the file).
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// lambda_e / lambda ratios, comma separated (overrides the file).
    #[arg(long, value_delimiter = ',')]
    ratio: Option<Vec<f64>>,
    /// Source-to-network rate lambda.
    #[arg(long)]
    lambda: Option<f64>,
    /// Policies to run, comma separated (overrides the file).
    #[arg(long, value_delimiter = ',')]
    policies: Option<Vec<PolicyKind>>,
    /// Window length: a number, or "optimal" for 1/lambda.
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    trials: Option<u32>,
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long)]
    burn_in: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for sweep.csv and the plot files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    lambda_e: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Total gossip capacity B (default n * lambda).
    #[arg(long)]
    capacity: Option<f64>,
    /// Window length for the fully-distributed row (default 1/lambda).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args)]
struct QueueCheckArgs {
    /// Loads rho = lambda * delta to check (repeatable / comma separated).
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
    rho: Vec<f64>,
    #[arg(long, default_value_t = 1e5)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest acceptable total-variation distance from Poisson(rho).
    #[arg(long, default_value_t = 0.01)]
    tv_threshold: f64,
}

#[derive(Args)]
struct Fig3Args {
    /// Output directory.
    #[arg(long, default_value = "fig3_out")]
    out: PathBuf,
    #[arg(long, default_value_t = 20)]
    trials: u32,
    #[arg(long, default_value_t = 1e5)]
    horizon: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Theory(args) => theory(args),
        Command::QueueCheck(args) => queue_check(args),
        Command::ReproduceFig3(args) => reproduce_fig3(args),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}: {err}", err.category());
            ExitCode::FAILURE
        }
    }
}

fn simulate(args: SimulateArgs) -> Result<ExitCode, HarnessError> {
    let cfg = SimConfig {
        n: args.n,
        lambda_e: args.lambda_e,
        lambda: args.lambda,
        capacity_b: args.capacity,
        delta: args.delta,
        policy: args.policy,
        horizon: args.horizon,
        burn_in: args.burn_in.unwrap_or(args.horizon / 10.0),
        seed: args.seed,
    }
    .validate()?;
    let trials = harness::run_trials(&cfg, args.trials.max(1))?;
    let means: Vec<f64> = trials.iter().map(|t| t.mean_age).collect();
    let (mean_age, stderr) = mean_and_stderr(&means);
    let min_ages: Vec<f64> = trials.iter().map(|t| t.mean_min_age).collect();
    let (mean_min_age, _) = mean_and_stderr(&min_ages);

    println!(
        "policy={} n={} lambda_e={} lambda={} B={} delta={} horizon={} burn_in={} seed={} trials={}",
        cfg.policy,
        cfg.n,
        cfg.lambda_e,
        cfg.lambda,
        cfg.capacity(),
        cfg.delta.map(|d| d.to_string()).unwrap_or_else(|| "-".into()),
        cfg.horizon,
        cfg.burn_in,
        cfg.seed,
        trials.len(),
    );
    println!("mean_age       {mean_age:.6} +- {stderr:.6}");
    println!("mean_min_age   {mean_min_age:.6}");
    if let Some(theory) = analytics::predict(
        cfg.policy,
        cfg.n,
        cfg.lambda_e,
        cfg.lambda,
        cfg.capacity(),
        cfg.delta,
    ) {
        println!(
            "theory         {:.6} (finite n), {:.6} (asymptote)",
            theory.mean_age, theory.asymptote
        );
    }
    let first = &trials[0];
    println!(
        "events         self={} to_node={} gossip={} collided={} expiries={} frames={}",
        first.counts.source_self_updates,
        first.counts.source_to_node_updates,
        first.counts.gossip_transmissions,
        first.counts.gossip_collisions,
        first.counts.window_expiries,
        first.counts.frame_boundaries,
    );
    println!("mean_gossipers {:.4}", first.mean_gossipers());
    let head: Vec<String> = first
        .occupancy_fractions
        .iter()
        .take(6)
        .enumerate()
        .map(|(k, f)| format!("k={k}:{f:.4}"))
        .collect();
    println!("occupancy      {}", head.join(" "));
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> Result<ExitCode, HarnessError> {
    let mut spec = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.clone(),
                source,
            })?;
            parse_sweep_file(&text)?
        }
        None => reproduce_fig3_spec(),
    };
    // flags override file values
    let lambda = args
        .lambda
        .unwrap_or_else(|| spec.rate_pairs.first().map_or(1.0, |p| p.1));
    if let Some(n) = args.n {
        spec.n_values = n;
    }
    if let Some(ratios) = args.ratio {
        spec.rate_pairs = ratios.into_iter().map(|r| (r * lambda, lambda)).collect();
    } else if args.lambda.is_some() {
        spec.rate_pairs = spec
            .rate_pairs
            .iter()
            .map(|(le, l)| (le / l * lambda, lambda))
            .collect();
    }
    if let Some(policies) = args.policies {
        spec.policies = policies;
    }
    if let Some(delta) = &args.delta {
        spec.delta_rule = if delta.eq_ignore_ascii_case("optimal") {
            DeltaRule::Optimal
        } else {
            DeltaRule::Fixed(delta.parse().map_err(|e: std::num::ParseFloatError| {
                HarnessError::InvalidSpec(format!("--delta: {e}"))
            })?)
        };
    }
    if let Some(trials) = args.trials {
        spec.trials = trials;
    }
    if let Some(horizon) = args.horizon {
        spec.horizon = horizon;
        if args.burn_in.is_none() {
            spec.burn_in = horizon / 10.0;
        }
    }
    if let Some(burn_in) = args.burn_in {
        spec.burn_in = burn_in;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    if let Some(out) = args.out {
        spec.out_dir = Some(out);
    }

    run_and_emit(&spec)
}

fn run_and_emit(spec: &SweepSpec) -> Result<ExitCode, HarnessError> {
    let out_dir = spec.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    let result = harness::run_sweep(spec)?;
    let csv_path = out_dir.join("sweep.csv");
    harness::emit_csv(&result, &csv_path)?;
    let plots = harness::emit_plot_data(&result, &out_dir)?;
    for p in &result.points {
        let theory = p
            .theory_finite_n
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<18} n={:<4} ratio={:<4} mean_age={:.4} +- {:.4}  theory={}",
            p.policy.to_string(),
            p.n,
            p.ratio(),
            p.mean_age,
            p.stderr,
            theory,
        );
    }
    println!("wrote {}", csv_path.display());
    for path in plots {
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn theory(args: TheoryArgs) -> Result<ExitCode, HarnessError> {
    let capacity = args.capacity.unwrap_or(args.n as f64 * args.lambda);
    let delta = args
        .delta
        .unwrap_or_else(|| analytics::optimal_delta(args.lambda));
    println!(
        "n={} lambda_e={} lambda={} B={} delta={}",
        args.n, args.lambda_e, args.lambda, capacity, delta
    );
    println!("{:<20} {:>12} {:>12}", "policy", "finite n", "asymptote");
    for policy in [
        PolicyKind::SemiDistributed,
        PolicyKind::Asuman,
        PolicyKind::FullyDistributed,
    ] {
        if let Some(t) = analytics::predict(
            policy,
            args.n,
            args.lambda_e,
            args.lambda,
            capacity,
            Some(delta),
        ) {
            println!(
                "{:<20} {:>12.4} {:>12.4}",
                t.policy.to_string(),
                t.mean_age,
                t.asymptote
            );
        }
    }
    println!(
        "{:<20} {:>12.4} {:>12}",
        "lower bound",
        analytics::lower_bound(args.n, args.lambda_e, args.lambda, capacity),
        "-"
    );
    println!(
        "{:<20} {:>12.4} {:>12}",
        "min-age limit",
        analytics::min_age_limit(args.lambda_e, args.lambda),
        "-"
    );
    Ok(ExitCode::SUCCESS)
}

fn queue_check(args: QueueCheckArgs) -> Result<ExitCode, HarnessError> {
    let mut all_ok = true;
    for &rho in &args.rho {
        if rho <= 0.0 {
            return Err(HarnessError::InvalidSpec(format!(
                "rho must be positive, got {rho}"
            )));
        }
        // lambda = rho, delta = 1: the stationary law depends on rho only
        let hist = queue::simulate_mdinf(rho, 1.0, args.horizon, args.seed);
        let tv = queue::compare_to_stationary(&hist, rho)
            .map_err(|e| HarnessError::InvalidSpec(e.to_string()))?;
        let ok = tv < args.tv_threshold;
        all_ok &= ok;
        let pi1 = analytics::mg_infty_stationary(rho, 1).unwrap();
        let empirical = hist.get(1).copied().unwrap_or(0.0);
        println!(
            "rho={rho}: TV={tv:.5} (threshold {}) pi_1={empirical:.5} vs {pi1:.5}  {}",
            args.tv_threshold,
            if ok { "pass" } else { "FAIL" }
        );
    }
    Ok(if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn reproduce_fig3(args: Fig3Args) -> Result<ExitCode, HarnessError> {
    let mut spec = reproduce_fig3_spec();
    spec.trials = args.trials;
    spec.horizon = args.horizon;
    spec.burn_in = args.horizon / 10.0;
    spec.seed = args.seed;
    spec.out_dir = Some(args.out);
    run_and_emit(&spec)
}
