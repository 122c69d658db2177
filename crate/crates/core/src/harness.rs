//! Experiment configuration, trial execution and reporting.
//!
//! Every trial owns its seed, derived from the master seed and the trial
//! index, and reports are merged in trial order, so outputs do not depend on
//! the worker count. Timings go to their own file.

use crate::absorb::{run_pipeline, AbsorbMode, PipelineConfig, PipelineRun};
use crate::gf::FieldPolicy;
use crate::hypergraph::Hypergraph;
use crate::leave::SolverBudget;
use crate::rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Duration;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;
pub const ENV_SEED: &str = "STEINER_SEED";
pub const ENV_OUT_DIR: &str = "STEINER_OUT_DIR";

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("toml: {0}")]
    TomlDe(#[from] toml::de::Error),
    #[error("toml: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Hypergraph(#[from] crate::hypergraph::HypergraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Pipeline,
    ThresholdScan,
    NibbleStats,
    FracHitting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    /// Used by the threshold scan; ascending.
    #[serde(default)]
    pub p_grid: Vec<f64>,
    pub nu: f64,
    pub target_density: f64,
    pub field_policy: FieldPolicy,
    pub mode: AbsorbMode,
    pub seed: u64,
    pub trials: usize,
    pub template_retries: usize,
    pub nibble_retries: usize,
    pub absorb_retries: usize,
    pub solver_nodes: u64,
    pub solver_restarts: usize,
    pub solver_attempt_ms: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let pipeline = PipelineConfig::default();
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            command: Command::Pipeline,
            n: 63,
            k: 3,
            p: 1.0,
            p_grid: Vec::new(),
            nu: pipeline.nu,
            target_density: pipeline.target_density,
            field_policy: pipeline.field_policy,
            mode: pipeline.mode,
            seed: 0,
            trials: 1,
            template_retries: pipeline.template_retries,
            nibble_retries: pipeline.nibble_retries,
            absorb_retries: pipeline.absorb_retries,
            solver_nodes: pipeline.solver.base_nodes,
            solver_restarts: pipeline.solver.restarts,
            solver_attempt_ms: pipeline.solver.attempt_time.as_millis() as u64,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.k < 2 || self.k > self.n {
            return bad(format!("need 2 <= k <= n, got n={} k={}", self.n, self.k));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p={} outside [0, 1]", self.p));
        }
        if self.p_grid.iter().any(|p| !(0.0..=1.0).contains(p)) || self.p_grid.windows(2).any(|w| w[0] > w[1]) {
            return bad("p_grid must be ascending within [0, 1]".into());
        }
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return bad(format!("nu={} outside (0, 1]", self.nu));
        }
        if !(0.0..=1.0).contains(&self.target_density) {
            return bad(format!("target_density={} outside [0, 1]", self.target_density));
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<ExperimentConfig, HarnessError> {
        let c: ExperimentConfig = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string(self)?)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig, HarnessError> {
        ExperimentConfig::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Applies `STEINER_SEED` and `STEINER_OUT_DIR` from `lookup`.
    pub fn apply_env<F: Fn(&str) -> Option<String>>(&mut self, lookup: F) -> Result<(), HarnessError> {
        if let Some(s) = lookup(ENV_SEED) {
            self.seed = s.trim().parse().map_err(|_| HarnessError::Config(format!("{ENV_SEED}={s:?} is not a u64")))?;
        }
        if let Some(d) = lookup(ENV_OUT_DIR) {
            self.out_dir = PathBuf::from(d);
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            field_policy: self.field_policy,
            nu: self.nu,
            target_density: self.target_density,
            mode: self.mode,
            template_retries: self.template_retries,
            nibble_retries: self.nibble_retries,
            absorb_retries: self.absorb_retries,
            solver: SolverBudget {
                base_nodes: self.solver_nodes,
                restarts: self.solver_restarts,
                attempt_time: Duration::from_millis(self.solver_attempt_ms),
            },
            ..PipelineConfig::default()
        }
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    rng::derive(master, "trial", trial as u64)
}

/// Runs `f` over trial indices on `jobs` workers; results in index order.
pub fn par_trials<T: Send, F: Fn(usize) -> T + Sync + Send>(trials: usize, jobs: usize, f: F) -> Vec<T> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().expect("thread pool");
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    pub trial: usize,
    pub seed: u64,
    pub p: f64,
    pub success: bool,
    pub host_edges: usize,
    pub template_edges: usize,
    pub nibble_status: String,
    pub nibble_steps: usize,
    pub partial_edges: usize,
    pub leave_facets: usize,
    pub solver: String,
    pub solver_restart: Option<usize>,
    pub decomposition_edges: usize,
    pub absorbed: usize,
    pub abort_index: Option<usize>,
    pub abort_candidates: Option<usize>,
    pub attempts: usize,
    pub verified: bool,
    pub design_file: Option<String>,
    pub host_file: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

impl TrialReport {
    pub fn from_run(trial: usize, run: &PipelineRun) -> TrialReport {
        let pr = &run.provenance;
        TrialReport {
            trial,
            seed: pr.seed,
            p: pr.p,
            success: run.succeeded(),
            host_edges: pr.host_edges,
            template_edges: pr.template_edges.iter().sum(),
            nibble_status: pr.nibble_status.map(|s| format!("{s:?}").to_lowercase()).unwrap_or_default(),
            nibble_steps: pr.nibble_steps,
            partial_edges: pr.partial_edges,
            leave_facets: pr.leave_facets,
            solver: pr.solver.clone().unwrap_or_default(),
            solver_restart: pr.solver_restart,
            decomposition_edges: pr.decomposition_edges,
            absorbed: pr.absorbed,
            abort_index: pr.abort.as_ref().map(|a| a.index),
            abort_candidates: pr.abort.as_ref().map(|a| a.candidates),
            attempts: pr.attempts.len(),
            verified: run.design.as_ref().is_some_and(|d| crate::absorb::verify_steiner(&d.edges, Some(&run.host))),
            design_file: None,
            host_file: None,
            seconds: run.seconds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub successes: usize,
    pub trials: Vec<TrialReport>,
}

/// Runs the pipeline for every trial. With `out_dir`, successful designs,
/// their hosts and provenance JSON are written under `designs/`.
pub fn run_trials(config: &ExperimentConfig, jobs: usize, out_dir: Option<&Path>) -> Result<RunReport, HarnessError> {
    config.validate()?;
    let pipeline = config.pipeline();
    let runs = par_trials(config.trials, jobs, |i| run_pipeline(config.n, config.k, config.p, trial_seed(config.seed, i), &pipeline));
    let mut trials = Vec::with_capacity(runs.len());
    for (i, run) in runs.iter().enumerate() {
        let mut row = TrialReport::from_run(i, run);
        if let (Some(dir), Some(design)) = (out_dir, &run.design) {
            let designs = dir.join("designs");
            std::fs::create_dir_all(&designs)?;
            let d = format!("designs/trial{i:04}.design.txt");
            let h = format!("designs/trial{i:04}.host.txt");
            design.edges.save(&dir.join(&d))?;
            run.host.save(&dir.join(&h))?;
            std::fs::write(dir.join(format!("designs/trial{i:04}.provenance.json")), serde_json::to_string_pretty(&run.provenance)?)?;
            row.design_file = Some(d);
            row.host_file = Some(h);
        }
        trials.push(row);
    }
    Ok(RunReport { config: config.clone(), successes: trials.iter().filter(|t| t.success).count(), trials })
}

const TRIAL_HEADER: [&str; 18] = [
    "trial",
    "seed",
    "p",
    "success",
    "verified",
    "host_edges",
    "template_edges",
    "nibble_status",
    "nibble_steps",
    "partial_edges",
    "leave_facets",
    "solver",
    "solver_restart",
    "decomposition_edges",
    "absorbed",
    "abort_index",
    "attempts",
    "design_file",
];

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_trials_csv<W: std::io::Write>(report: &RunReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_HEADER)?;
    for t in &report.trials {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.p.to_string(),
            t.success.to_string(),
            t.verified.to_string(),
            t.host_edges.to_string(),
            t.template_edges.to_string(),
            t.nibble_status.clone(),
            t.nibble_steps.to_string(),
            t.partial_edges.to_string(),
            t.leave_facets.to_string(),
            t.solver.clone(),
            opt(&t.solver_restart),
            t.decomposition_edges.to_string(),
            t.absorbed.to_string(),
            opt(&t.abort_index),
            t.attempts.to_string(),
            t.design_file.clone().unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings_csv<W: std::io::Write>(report: &RunReport, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "seconds"])?;
    for t in &report.trials {
        w.write_record([t.trial.to_string(), format!("{:.3}", t.seconds)])?;
    }
    w.flush()?;
    Ok(())
}

/// `report.json`, `trials.csv` and `timings.csv` under `dir`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)?)?;
    write_trials_csv(report, std::fs::File::create(dir.join("trials.csv"))?)?;
    write_timings_csv(report, std::fs::File::create(dir.join("timings.csv"))?)?;
    Ok(())
}

/// Re-verifies every design a report references.
pub fn reverify(report: &RunReport, dir: &Path) -> Result<bool, HarnessError> {
    for t in &report.trials {
        if let (Some(d), Some(h)) = (&t.design_file, &t.host_file) {
            let design = Hypergraph::load(&dir.join(d))?;
            let host = Hypergraph::load(&dir.join(h))?;
            if !crate::absorb::verify_steiner(&design, Some(&host)) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub p: f64,
    pub trials: usize,
    pub successes: usize,
}

impl ScanRow {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanTable {
    pub n: usize,
    pub k: usize,
    pub rows: Vec<ScanRow>,
    /// `outcomes[trial][j]` for `p_grid[j]`.
    pub outcomes: Vec<Vec<bool>>,
}

/// Success rate of the pipeline per `p`. Trial `i` uses the same seed at
/// every `p`, so its hosts are nested.
pub fn threshold_scan(
    n: usize,
    k: usize,
    p_grid: &[f64],
    trials: usize,
    seed: u64,
    config: &PipelineConfig,
    jobs: usize,
) -> Result<ScanTable, HarnessError> {
    if p_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(HarnessError::Config("p_grid must be ascending".into()));
    }
    let outcomes: Vec<Vec<bool>> = par_trials(trials, jobs, |i| {
        let s = trial_seed(seed, i);
        p_grid.iter().map(|&p| p > 0.0 && run_pipeline(n, k, p, s, config).succeeded()).collect()
    });
    let rows = p_grid
        .iter()
        .enumerate()
        .map(|(j, &p)| ScanRow { p, trials, successes: outcomes.iter().filter(|o| o[j]).count() })
        .collect();
    Ok(ScanTable { n, k, rows, outcomes })
}

pub fn write_scan_csv<W: std::io::Write>(table: &ScanTable, out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "k", "p", "trials", "successes", "rate"])?;
    for r in &table.rows {
        w.write_record([
            table.n.to_string(),
            table.k.to_string(),
            r.p.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            format!("{:.4}", r.rate()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NibbleStatsRow {
    pub seed: u64,
    pub t: usize,
    pub eligible: usize,
    pub leave: usize,
    pub d: f64,
    pub predicted_leave: f64,
    pub predicted_d: f64,
    pub divisible: bool,
}

/// Nibble on `H(n; p)` with no template for `steps` steps, one trace per
/// seed, against `|L_0| q^t` and `D_0 q^{(k-1)t}` with `q = 1 - ν e^{-kν}`.
pub fn nibble_stats(n: usize, k: usize, p: f64, nu: f64, seeds: &[u64], steps: usize) -> Result<Vec<NibbleStatsRow>, HarnessError> {
    let template = crate::template::Template::empty(n, k, Vec::new());
    let q = 1.0 - nu * (-(k as f64) * nu).exp();
    let mut rows = Vec::new();
    for &seed in seeds {
        let host = crate::hypergraph::sample_hnp(n, k, p, crate::absorb::host_seed(seed))?;
        let mut state = crate::nibble::nibble_init(&host, &template, nu);
        drop(host);
        let (l0, d0) = (state.leave_len() as f64, state.d());
        loop {
            let t = state.t;
            rows.push(NibbleStatsRow {
                seed,
                t,
                eligible: state.eligible_len(),
                leave: state.leave_len(),
                d: state.d(),
                predicted_leave: l0 * q.powi(t as i32),
                predicted_d: d0 * q.powi(((k - 1) * t) as i32),
                divisible: state.leave().is_k_divisible(k),
            });
            if t >= steps || !crate::nibble::nibble_step(&mut state, rng::derive(seed, "nibble", 0)) {
                break;
            }
        }
    }
    Ok(rows)
}

pub fn write_nibble_stats_csv<W: std::io::Write>(rows: &[NibbleStatsRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "t", "G", "L", "D", "predicted_L", "predicted_D", "divisible"])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.t.to_string(),
            r.eligible.to_string(),
            r.leave.to_string(),
            format!("{:.6}", r.d),
            format!("{:.3}", r.predicted_leave),
            format!("{:.6}", r.predicted_d),
            r.divisible.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn default_config_round_trips() {
        let c = ExperimentConfig { p_grid: vec![0.7, 0.9, 1.0], ..Default::default() };
        let text = c.to_toml().unwrap();
        assert!(text.contains("schema_version = 1"));
        assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), c);
    }

    #[test]
    fn rejects_bad_configs() {
        let ok = ExperimentConfig::default().to_toml().unwrap();
        assert!(ExperimentConfig::from_toml(&ok.replace("schema_version = 1", "schema_version = 2")).is_err());
        assert!(ExperimentConfig::from_toml(&ok.replace("p = 1.0", "p = 1.5")).is_err());
        assert!(ExperimentConfig::from_toml(&format!("{ok}\nbogus = 3\n")).is_err());
        let c = ExperimentConfig { p_grid: vec![0.9, 0.8], ..Default::default() };
        assert!(c.validate().is_err());
        let c = ExperimentConfig { k: 1, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn env_overrides_seed_and_out_dir_only() {
        let mut c = ExperimentConfig::default();
        c.apply_env(|k| match k {
            ENV_SEED => Some("42".into()),
            ENV_OUT_DIR => Some("/tmp/x".into()),
            _ => Some("ignored".into()),
        })
        .unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.out_dir, PathBuf::from("/tmp/x"));
        assert_eq!(c.n, 63);
        assert!(c.apply_env(|k| (k == ENV_SEED).then(|| "x".to_string())).is_err());
    }

    #[test]
    fn par_trials_keeps_order() {
        let a = par_trials(20, 1, |i| trial_seed(7, i));
        let b = par_trials(20, 4, |i| trial_seed(7, i));
        assert_eq!(a, b);
    }

    #[test]
    fn small_scan_is_coupled() {
        let cfg = PipelineConfig { mode: AbsorbMode::SkipHost, ..Default::default() };
        let t = threshold_scan(31, 3, &[0.0, 0.9, 1.0], 4, 1, &cfg, 1).unwrap();
        assert_eq!(t.rows[0].successes, 0);
        assert!(t.rows[2].successes > 0);
        let mut buf = Vec::new();
        write_scan_csv(&t, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,k,p,trials,successes,rate\n31,3,0,4,0,0.0000\n"));
    }

    #[test]
    fn report_files_reverify() {
        let dir = tempfile::tempdir().unwrap();
        let config = ExperimentConfig { n: 31, mode: AbsorbMode::SkipHost, trials: 4, ..Default::default() };
        let report = run_trials(&config, 1, Some(dir.path())).unwrap();
        assert!(report.successes > 0);
        write_report(&report, dir.path()).unwrap();
        assert!(reverify(&report, dir.path()).unwrap());
        for t in report.trials.iter().filter(|t| t.success) {
            assert!(t.verified);
            assert!(dir.path().join(t.design_file.as_ref().unwrap()).exists());
        }
        let csv = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(!csv.contains("seconds"));
    }

    #[test]
    fn nibble_stats_start_on_prediction() {
        let rows = nibble_stats(43, 3, 1.0, 0.1, &[1, 2], 5).unwrap();
        assert_eq!(rows.len(), 12);
        for r in rows.iter().filter(|r| r.t == 0) {
            assert_eq!(r.leave, 43 * 42 / 2);
            assert_eq!(r.predicted_leave, r.leave as f64);
            assert!((r.d - 41.0).abs() < 1e-12);
        }
        assert!(rows.iter().all(|r| r.divisible));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn toml_round_trip(n in 3usize..500, seed in any::<u64>(), p in 0.0f64..=1.0, nu in 0.01f64..1.0, trials in 1usize..100, wide in any::<bool>()) {
            let c = ExperimentConfig {
                n,
                seed,
                p,
                nu,
                trials,
                field_policy: if wide { FieldPolicy::Wide } else { FieldPolicy::Minimal },
                p_grid: vec![p / 2.0, p],
                ..Default::default()
            };
            let back = ExperimentConfig::from_toml(&c.to_toml().unwrap()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
