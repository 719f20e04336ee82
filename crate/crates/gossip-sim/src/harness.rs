//! Experiment orchestration: parameter sweeps over network size and rate
//! ratios, multi-trial statistics, theory overlays and file emission.
//!
//! Trials fan out over (policy, n, ratio, trial) tuples. With the `parallel`
//! feature (default) the fan-out runs on a rayon pool — sized by the
//! `GOSSIP_SIM_THREADS` environment variable when set — and falls back to a
//! plain sequential loop without it. Results are keyed by their position, so
//! the outcome is byte-identical regardless of thread count.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analytics;
use crate::config::{ConfigError, PolicyKind, SimConfig};
use crate::engine::{run_trial, EngineError, TrialResult};
use crate::queue::compare_to_stationary;
use crate::rng::substream;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("config parse error at line {line} ({field}): {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },
}

impl HarnessError {
    /// Machine-parsable error category for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            HarnessError::InvalidSpec(_) | HarnessError::Config(_) | HarnessError::Parse { .. } => {
                "config"
            }
            HarnessError::Engine(_) => "simulation",
            HarnessError::Io { .. } => "io",
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// How the gossip-window length is chosen for the fully-distributed policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaRule {
    Fixed(f64),
    /// delta = 1/lambda, the interference/throughput sweet spot.
    Optimal,
}

impl DeltaRule {
    pub fn resolve(self, lambda: f64) -> f64 {
        match self {
            DeltaRule::Fixed(d) => d,
            DeltaRule::Optimal => analytics::optimal_delta(lambda),
        }
    }
}

/// Full description of one parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub n_values: Vec<usize>,
    /// (lambda_e, lambda) pairs.
    pub rate_pairs: Vec<(f64, f64)>,
    pub delta_rule: DeltaRule,
    pub policies: Vec<PolicyKind>,
    pub trials: u32,
    pub horizon: f64,
    pub burn_in: f64,
    pub seed: u64,
    /// Where the CLI writes CSV and plot data.
    pub out_dir: Option<PathBuf>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        reproduce_fig3_spec()
    }
}

/// The canned desk-scale grid: n doubling from 8 to 256, rate ratios
/// {0.4, 1, 2} at lambda = 1, all four policies, optimal window length.
pub fn reproduce_fig3_spec() -> SweepSpec {
    SweepSpec {
        n_values: vec![8, 16, 32, 64, 128, 256],
        rate_pairs: vec![(0.4, 1.0), (1.0, 1.0), (2.0, 1.0)],
        delta_rule: DeltaRule::Optimal,
        policies: PolicyKind::ALL.to_vec(),
        trials: 20,
        horizon: 1e5,
        burn_in: 1e4,
        seed: 1,
        out_dir: None,
    }
}

/// Summary of the gossiper-count occupancy of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OccupancySummary {
    /// Time-average number of simultaneously active gossipers.
    pub mean_gossipers: f64,
    /// Total-variation distance from Poisson(lambda * delta).
    pub tv_vs_poisson: f64,
}

/// Aggregated result of one (policy, n, rate-pair) grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub policy: PolicyKind,
    pub n: usize,
    pub lambda_e: f64,
    pub lambda: f64,
    pub capacity: f64,
    pub delta: Option<f64>,
    pub trials: u32,
    /// Mean over trials of the per-trial network mean age.
    pub mean_age: f64,
    /// Standard error of that mean (0 for a single trial).
    pub stderr: f64,
    pub mean_min_age: f64,
    pub theory_finite_n: Option<f64>,
    pub theory_asymptote: Option<f64>,
    /// Present for the fully-distributed policy only.
    pub occupancy: Option<OccupancySummary>,
}

impl SweepPoint {
    pub fn ratio(&self) -> f64 {
        self.lambda_e / self.lambda
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
}

#[cfg(feature = "parallel")]
fn env_thread_count() -> Option<usize> {
    std::env::var("GOSSIP_SIM_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&k| k > 0)
}

#[derive(Debug, Clone)]
struct Job {
    cfg: SimConfig,
    trial: u64,
}

#[cfg(feature = "parallel")]
fn run_jobs(jobs: &[Job]) -> Result<Vec<TrialResult>, EngineError> {
    use rayon::prelude::*;
    let all = || jobs.par_iter().map(|j| run_trial(&j.cfg, j.trial)).collect();
    match env_thread_count().and_then(|k| {
        rayon::ThreadPoolBuilder::new().num_threads(k).build().ok()
    }) {
        Some(pool) => pool.install(all),
        None => all(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_jobs(jobs: &[Job]) -> Result<Vec<TrialResult>, EngineError> {
    jobs.iter().map(|j| run_trial(&j.cfg, j.trial)).collect()
}

/// Independent trials of one configuration, fanned out in parallel when the
/// `parallel` feature is enabled. Trial k uses RNG stream k of the config
/// seed, so the outcome does not depend on scheduling.
pub fn run_trials(cfg: &SimConfig, trials: u32) -> Result<Vec<TrialResult>, EngineError> {
    let jobs: Vec<Job> = (0..trials)
        .map(|t| Job {
            cfg: cfg.clone(),
            trial: t as u64,
        })
        .collect();
    run_jobs(&jobs)
}

/// Sequential twin of [`run_trials`]; the benchmark baseline.
pub fn run_trials_sequential(
    cfg: &SimConfig,
    trials: u32,
) -> Result<Vec<TrialResult>, EngineError> {
    (0..trials).map(|t| run_trial(cfg, t as u64)).collect()
}

/// Sample mean and standard error of a set of per-trial estimates.
pub fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

fn normalized_spec(spec: &SweepSpec) -> Result<SweepSpec, HarnessError> {
    let mut out = spec.clone();
    out.n_values.sort_unstable();
    out.n_values.dedup();
    out.policies.sort_unstable();
    out.policies.dedup();
    out.rate_pairs
        .sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
    out.rate_pairs.dedup();
    if out.n_values.is_empty() {
        return Err(HarnessError::InvalidSpec("no network sizes".into()));
    }
    if out.rate_pairs.is_empty() {
        return Err(HarnessError::InvalidSpec("no rate pairs".into()));
    }
    if out.policies.is_empty() {
        return Err(HarnessError::InvalidSpec("no policies".into()));
    }
    if out.trials == 0 {
        return Err(HarnessError::InvalidSpec("trials must be >= 1".into()));
    }
    Ok(out)
}

/// Runs every grid point of the spec and attaches theory overlays.
///
/// Point k of the sorted grid derives its RNG root from stream k of the
/// sweep seed; trials then split that root further. Deterministic given the
/// spec, bit for bit. Engine errors abort the sweep — partial results are
/// never returned.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, HarnessError> {
    let spec = normalized_spec(spec)?;
    // enumeration order == emission order: policy, then n, then ratio
    let mut configs = Vec::new();
    for &policy in &spec.policies {
        for &n in &spec.n_values {
            for &(lambda_e, lambda) in &spec.rate_pairs {
                let delta = (policy == PolicyKind::FullyDistributed)
                    .then(|| spec.delta_rule.resolve(lambda));
                let point_seed = substream(spec.seed, configs.len() as u64);
                let cfg = SimConfig {
                    n,
                    lambda_e,
                    lambda,
                    capacity_b: None,
                    delta,
                    policy,
                    horizon: spec.horizon,
                    burn_in: spec.burn_in,
                    seed: point_seed,
                }
                .validate()?;
                configs.push(cfg);
            }
        }
    }

    let jobs: Vec<Job> = configs
        .iter()
        .flat_map(|cfg| {
            (0..spec.trials).map(|t| Job {
                cfg: cfg.clone(),
                trial: t as u64,
            })
        })
        .collect();
    let outcomes = run_jobs(&jobs)?;

    let points = configs
        .iter()
        .enumerate()
        .map(|(idx, cfg)| {
            let trials = &outcomes[idx * spec.trials as usize..(idx + 1) * spec.trials as usize];
            summarize_point(cfg, spec.trials, trials)
        })
        .collect();
    Ok(SweepResult { points })
}

fn summarize_point(cfg: &SimConfig, trials: u32, outcomes: &[TrialResult]) -> SweepPoint {
    let means: Vec<f64> = outcomes.iter().map(|t| t.mean_age).collect();
    let (mean_age, stderr) = mean_and_stderr(&means);
    let min_ages: Vec<f64> = outcomes.iter().map(|t| t.mean_min_age).collect();
    let (mean_min_age, _) = mean_and_stderr(&min_ages);
    let theory = analytics::predict(
        cfg.policy,
        cfg.n,
        cfg.lambda_e,
        cfg.lambda,
        cfg.capacity(),
        cfg.delta,
    );
    let occupancy = (cfg.policy == PolicyKind::FullyDistributed).then(|| {
        let fractions = average_occupancy(outcomes);
        let mean_gossipers = fractions
            .iter()
            .enumerate()
            .map(|(k, f)| k as f64 * f)
            .sum();
        let rho = cfg.lambda * cfg.delta.expect("fully-distributed has delta");
        let tv_vs_poisson = compare_to_stationary(&fractions, rho).unwrap_or(f64::NAN);
        OccupancySummary {
            mean_gossipers,
            tv_vs_poisson,
        }
    });
    SweepPoint {
        policy: cfg.policy,
        n: cfg.n,
        lambda_e: cfg.lambda_e,
        lambda: cfg.lambda,
        capacity: cfg.capacity(),
        delta: cfg.delta,
        trials,
        mean_age,
        stderr,
        mean_min_age,
        theory_finite_n: theory.as_ref().map(|t| t.mean_age),
        theory_asymptote: theory.as_ref().map(|t| t.asymptote),
        occupancy,
    }
}

/// Element-wise average of per-trial occupancy fractions (trials share the
/// same measured duration, so the plain average is the time-weighted one).
fn average_occupancy(outcomes: &[TrialResult]) -> Vec<f64> {
    let len = outcomes
        .iter()
        .map(|t| t.occupancy_fractions.len())
        .max()
        .unwrap_or(0);
    let mut avg = vec![0.0; len];
    for t in outcomes {
        for (k, &f) in t.occupancy_fractions.iter().enumerate() {
            avg[k] += f;
        }
    }
    for v in &mut avg {
        *v /= outcomes.len() as f64;
    }
    avg
}

/// Shortest round-trip decimal form; empty string for absent values.
fn fmt_opt(value: Option<f64>) -> String {
    value.map(|v| format!("{v}")).unwrap_or_default()
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), HarnessError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut file = fs::File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
    file.write_all(contents.as_bytes())
        .map_err(|e| HarnessError::io(&tmp, e))?;
    file.sync_all().map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))?;
    Ok(())
}

pub const CSV_HEADER: &str =
    "policy,n,lambda_e,lambda,B,delta,trials,mean_age,stderr,theory_finite_n,theory_asymptote";

/// One row per grid point, ordered by (policy, n, ratio). Overwrites
/// atomically (write-temp-then-rename).
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<(), HarnessError> {
    let mut rows: Vec<&SweepPoint> = result.points.iter().collect();
    rows.sort_by(|a, b| {
        (a.policy, a.n)
            .cmp(&(b.policy, b.n))
            .then(a.ratio().total_cmp(&b.ratio()))
    });
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            p.policy,
            p.n,
            p.lambda_e,
            p.lambda,
            p.capacity,
            fmt_opt(p.delta),
            p.trials,
            p.mean_age,
            p.stderr,
            fmt_opt(p.theory_finite_n),
            fmt_opt(p.theory_asymptote),
        ));
    }
    write_atomic(path, &out)
}

/// Per rate pair, emits a plot-ready series file under `dir`: one row per
/// network size, one `<policy>_mean,<policy>_stderr` column pair per policy,
/// and the horizontal asymptote lines as `# asymptote,<policy>,<value>`
/// header comments. Returns the written paths.
pub fn emit_plot_data(result: &SweepResult, dir: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let mut pairs: Vec<(f64, f64)> = result
        .points
        .iter()
        .map(|p| (p.lambda_e, p.lambda))
        .collect();
    pairs.sort_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)).then(a.1.total_cmp(&b.1)));
    pairs.dedup();

    let mut written = Vec::new();
    for (lambda_e, lambda) in pairs {
        let points: Vec<&SweepPoint> = result
            .points
            .iter()
            .filter(|p| p.lambda_e == lambda_e && p.lambda == lambda)
            .collect();
        let mut policies: Vec<PolicyKind> = points.iter().map(|p| p.policy).collect();
        policies.sort_unstable();
        policies.dedup();
        let mut sizes: Vec<usize> = points.iter().map(|p| p.n).collect();
        sizes.sort_unstable();
        sizes.dedup();

        let ratio = lambda_e / lambda;
        let mut out = String::new();
        out.push_str("# mean version age of a single node vs network size n\n");
        out.push_str(&format!(
            "# lambda_e = {lambda_e}, lambda = {lambda} (ratio {ratio})\n"
        ));
        for &policy in &policies {
            if let Some(asym) = points
                .iter()
                .find(|p| p.policy == policy)
                .and_then(|p| p.theory_asymptote)
            {
                out.push_str(&format!("# asymptote,{policy},{asym}\n"));
            }
        }
        out.push('n');
        for &policy in &policies {
            out.push_str(&format!(",{policy}_mean,{policy}_stderr"));
        }
        out.push('\n');
        for &n in &sizes {
            out.push_str(&format!("{n}"));
            for &policy in &policies {
                let cell = points.iter().find(|p| p.policy == policy && p.n == n);
                out.push_str(&format!(
                    ",{},{}",
                    fmt_opt(cell.map(|p| p.mean_age)),
                    fmt_opt(cell.map(|p| p.stderr))
                ));
            }
            out.push('\n');
        }

        let path = dir.join(format!("plot_ratio_{ratio}.csv"));
        write_atomic(&path, &out)?;
        written.push(path);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Sweep config files: flat `key = value` lines
// ---------------------------------------------------------------------------

/// Grammar: one `key = value` per line, `#` starts a comment, blank lines
/// are ignored, lists are comma-separated. Unset keys keep the canned-grid
/// defaults of [`reproduce_fig3_spec`]. Keys:
///
/// ```text
/// n        = 8, 16, 32          network sizes
/// ratio    = 0.4, 1, 2          lambda_e / lambda values
/// lambda   = 1                  source-to-network rate
/// policies = uniform, semi, fully, asuman
/// delta    = optimal            or a number (window length)
/// trials   = 20
/// horizon  = 1e5
/// burn_in  = 1e4                default: horizon / 10
/// seed     = 1
/// out      = results            output directory
/// ```
pub fn parse_sweep_file(text: &str) -> Result<SweepSpec, HarnessError> {
    let mut spec = reproduce_fig3_spec();
    let mut lambda = 1.0;
    let mut ratios: Option<Vec<f64>> = None;
    let mut burn_in_given = false;
    let mut horizon_given = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(HarnessError::Parse {
                line: line_no,
                field: line.to_string(),
                message: "expected `key = value`".into(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        let parse_err = |message: String| HarnessError::Parse {
            line: line_no,
            field: key.to_string(),
            message,
        };
        match key {
            "n" => {
                spec.n_values = split_list(value)
                    .map(|v| v.parse::<usize>().map_err(|e| parse_err(e.to_string())))
                    .collect::<Result<_, _>>()?;
            }
            "ratio" => {
                ratios = Some(
                    split_list(value)
                        .map(|v| v.parse::<f64>().map_err(|e| parse_err(e.to_string())))
                        .collect::<Result<_, _>>()?,
                );
            }
            "lambda" => {
                lambda = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
            }
            "policies" => {
                spec.policies = split_list(value)
                    .map(|v| v.parse::<PolicyKind>().map_err(parse_err))
                    .collect::<Result<_, _>>()?;
            }
            "delta" => {
                spec.delta_rule = if value.eq_ignore_ascii_case("optimal") {
                    DeltaRule::Optimal
                } else {
                    DeltaRule::Fixed(
                        value
                            .parse()
                            .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?,
                    )
                };
            }
            "trials" => {
                spec.trials = value
                    .parse()
                    .map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?;
            }
            "horizon" => {
                spec.horizon = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
                horizon_given = true;
            }
            "burn_in" => {
                spec.burn_in = value
                    .parse()
                    .map_err(|e: std::num::ParseFloatError| parse_err(e.to_string()))?;
                burn_in_given = true;
            }
            "seed" => {
                spec.seed = value
                    .parse()
                    .map_err(|e: std::num::ParseIntError| parse_err(e.to_string()))?;
            }
            "out" => spec.out_dir = Some(PathBuf::from(value)),
            other => {
                return Err(HarnessError::Parse {
                    line: line_no,
                    field: other.to_string(),
                    message: "unknown key".into(),
                })
            }
        }
    }

    if let Some(ratios) = ratios {
        spec.rate_pairs = ratios.into_iter().map(|r| (r * lambda, lambda)).collect();
    } else if lambda != 1.0 {
        spec.rate_pairs = spec
            .rate_pairs
            .iter()
            .map(|(le, l)| (le / l * lambda, lambda))
            .collect();
    }
    if horizon_given && !burn_in_given {
        spec.burn_in = spec.horizon / 10.0;
    }
    Ok(spec)
}

fn split_list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_spec() -> SweepSpec {
        SweepSpec {
            n_values: vec![4, 8],
            rate_pairs: vec![(1.0, 1.0)],
            delta_rule: DeltaRule::Optimal,
            policies: vec![PolicyKind::SemiDistributed, PolicyKind::FullyDistributed],
            trials: 3,
            horizon: 2e3,
            burn_in: 2e2,
            seed: 5,
            out_dir: None,
        }
    }

    #[test]
    fn sweep_runs_every_grid_point() {
        let result = run_sweep(&tiny_spec()).unwrap();
        assert_eq!(result.points.len(), 4);
        for p in &result.points {
            assert!(p.mean_age > 0.0);
            assert!(p.stderr > 0.0, "stderr must be positive for 3 trials");
            match p.policy {
                PolicyKind::FullyDistributed => {
                    assert!(p.occupancy.is_some());
                    assert_eq!(p.delta, Some(1.0));
                }
                _ => assert!(p.occupancy.is_none()),
            }
        }
    }

    #[test]
    fn theory_overlay_is_reevaluated_bit_for_bit() {
        let result = run_sweep(&tiny_spec()).unwrap();
        for p in &result.points {
            let again =
                analytics::predict(p.policy, p.n, p.lambda_e, p.lambda, p.capacity, p.delta);
            assert_eq!(p.theory_finite_n, again.as_ref().map(|t| t.mean_age));
            assert_eq!(p.theory_asymptote, again.as_ref().map(|t| t.asymptote));
        }
    }

    #[test]
    fn uniform_points_have_no_theory_overlay() {
        let spec = SweepSpec {
            policies: vec![PolicyKind::Uniform],
            n_values: vec![4],
            trials: 1,
            ..tiny_spec()
        };
        let result = run_sweep(&spec).unwrap();
        assert_eq!(result.points[0].theory_finite_n, None);
        assert_eq!(result.points[0].stderr, 0.0);
    }

    #[test]
    fn sweep_is_deterministic_and_emission_is_byte_identical() {
        let spec = tiny_spec();
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
        let dir = std::env::temp_dir().join(format!("gossip-sim-test-{}", std::process::id()));
        let csv_a = dir.join("a.csv");
        let csv_b = dir.join("b.csv");
        emit_csv(&a, &csv_a).unwrap();
        emit_csv(&b, &csv_b).unwrap();
        assert_eq!(fs::read(&csv_a).unwrap(), fs::read(&csv_b).unwrap());
        // re-emission overwrites in place (temp file + rename)
        emit_csv(&b, &csv_a).unwrap();
        assert_eq!(fs::read(&csv_a).unwrap(), fs::read(&csv_b).unwrap());
        assert!(!dir.join(".a.csv.tmp").exists());
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn csv_has_header_and_stable_row_order() {
        let spec = SweepSpec {
            policies: vec![PolicyKind::Uniform, PolicyKind::SemiDistributed],
            n_values: vec![8, 4],
            trials: 1,
            ..tiny_spec()
        };
        let result = run_sweep(&spec).unwrap();
        let dir = std::env::temp_dir().join(format!("gossip-sim-csv-{}", std::process::id()));
        let path = dir.join("sweep.csv");
        emit_csv(&result, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 5); // header + 2 policies x 2 sizes
        assert!(lines[1].starts_with("uniform,4,"));
        assert!(lines[2].starts_with("uniform,8,"));
        assert!(lines[3].starts_with("semi-distributed,4,"));
        // uniform rows leave the theory cells empty
        assert!(lines[1].ends_with(",,"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn empty_result_emits_header_only() {
        let result = SweepResult { points: Vec::new() };
        let dir = std::env::temp_dir().join(format!("gossip-sim-empty-{}", std::process::id()));
        let path = dir.join("empty.csv");
        emit_csv(&result, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n"));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn plot_data_carries_the_asymptote_lines() {
        let spec = SweepSpec {
            policies: PolicyKind::ALL.to_vec(),
            n_values: vec![4],
            rate_pairs: vec![(0.4, 1.0), (1.0, 1.0)],
            trials: 1,
            ..tiny_spec()
        };
        let result = run_sweep(&spec).unwrap();
        let dir = std::env::temp_dir().join(format!("gossip-sim-plot-{}", std::process::id()));
        let paths = emit_plot_data(&result, &dir).unwrap();
        assert_eq!(paths.len(), 2);
        let low = fs::read_to_string(&paths[0]).unwrap();
        assert!(low.contains("# asymptote,semi-distributed,0.8"));
        assert!(low.contains("# asymptote,fully-distributed,1.487312731383618"));
        assert!(low.contains("# asymptote,asuman,1.8"));
        let unit = fs::read_to_string(&paths[1]).unwrap();
        assert!(unit.contains("# asymptote,semi-distributed,2\n"));
        assert!(unit.contains("# asymptote,fully-distributed,3.718281828459045"));
        assert!(unit.contains("# asymptote,asuman,3\n"));
        assert!(unit.lines().any(|l| l.starts_with("n,")));
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn stderr_shrinks_like_root_two_when_trials_double() {
        let cfg = SimConfig {
            n: 8,
            lambda_e: 1.0,
            lambda: 1.0,
            capacity_b: None,
            delta: None,
            policy: PolicyKind::SemiDistributed,
            horizon: 2e3,
            burn_in: 2e2,
            seed: 21,
        }
        .validate()
        .unwrap();
        let many = run_trials(&cfg, 64).unwrap();
        let means: Vec<f64> = many.iter().map(|t| t.mean_age).collect();
        let (_, se_half) = mean_and_stderr(&means[..32]);
        let (_, se_full) = mean_and_stderr(&means);
        let shrink = se_full / se_half;
        let ideal = 1.0 / 2f64.sqrt();
        assert!(
            (shrink - ideal).abs() < 0.2 * ideal,
            "shrink {shrink} vs {ideal}"
        );
    }

    #[test]
    fn doubling_burn_in_barely_moves_the_estimate() {
        let spec = SweepSpec {
            n_values: vec![32],
            policies: vec![PolicyKind::SemiDistributed],
            trials: 8,
            horizon: 5e4,
            burn_in: 5e3,
            ..tiny_spec()
        };
        let base = run_sweep(&spec).unwrap().points[0].mean_age;
        let doubled = run_sweep(&SweepSpec { burn_in: 1e4, ..spec }).unwrap().points[0].mean_age;
        assert!(
            (doubled - base).abs() / base < 0.005,
            "burn-in sensitivity {base} vs {doubled}"
        );
    }

    #[test]
    fn parses_the_documented_grammar() {
        let text = "\
# grid under test
n = 4, 8
ratio = 0.4, 1
lambda = 2
policies = semi, asuman
delta = 0.5
trials = 2
horizon = 1e3
seed = 9
out = results
";
        let spec = parse_sweep_file(text).unwrap();
        assert_eq!(spec.n_values, vec![4, 8]);
        assert_eq!(spec.rate_pairs, vec![(0.8, 2.0), (2.0, 2.0)]);
        assert_eq!(
            spec.policies,
            vec![PolicyKind::SemiDistributed, PolicyKind::Asuman]
        );
        assert_eq!(spec.delta_rule, DeltaRule::Fixed(0.5));
        assert_eq!(spec.trials, 2);
        assert_eq!(spec.horizon, 1e3);
        assert_eq!(spec.burn_in, 1e2, "burn_in defaults to horizon/10");
        assert_eq!(spec.seed, 9);
        assert_eq!(spec.out_dir, Some(PathBuf::from("results")));
    }

    #[test]
    fn parse_errors_cite_line_and_field() {
        let err = parse_sweep_file("n = 4\ntrials = soon\n").unwrap_err();
        match err {
            HarnessError::Parse { line, field, .. } => {
                assert_eq!(line, 2);
                assert_eq!(field, "trials");
            }
            other => panic!("unexpected error {other:?}"),
        }
        let err = parse_sweep_file("speed = 11\n").unwrap_err();
        assert!(matches!(err, HarnessError::Parse { line: 1, .. }));
        assert_eq!(err.category(), "config");
    }

    #[test]
    fn rejects_empty_grids() {
        let spec = SweepSpec {
            n_values: vec![],
            ..tiny_spec()
        };
        assert!(matches!(run_sweep(&spec), Err(HarnessError::InvalidSpec(_))));
    }
}
