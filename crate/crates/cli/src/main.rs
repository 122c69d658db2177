use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;
use steiner_core::absorb::{verify_steiner, AbsorbMode, PipelineConfig};
use steiner_core::fractional::{hitting_times, write_hitting_csv};
use steiner_core::gf::{FieldCtx, FieldPolicy};
use steiner_core::harness::{self, Command as ConfigCommand, ExperimentConfig};
use steiner_core::hypergraph::{sample_hnp, Hypergraph, HypergraphJson};
use steiner_core::leave::{decompose_exact, Decomposition, DecompositionProblem, SolverBudget};
use steiner_core::operators::verify_properties;

/// Steiner systems in random hypergraphs: sampling, the randomized
/// construction pipeline and its diagnostics.
#[derive(Parser)]
#[command(name = "steiner", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample H(n; p) and save it.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `.json` for JSON, anything else for the text format.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the construction pipeline over several seeds.
    Pipeline(PipelineArgs),
    /// Nibble trace against the predicted leave and degree curves.
    NibbleStats {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        nu: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the operator-family properties over GF(2^m).
    VerifyOperators {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 4)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact K_k-decomposition of a (k-1)-uniform leave file.
    Decompose {
        #[arg(long)]
        leave: PathBuf,
        /// Wall-clock cap per attempt.
        #[arg(long, default_value_t = 30_000)]
        budget_ms: u64,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 200_000)]
        nodes: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hitting times of full facet cover and fractional decomposability.
    FracHitting {
        #[arg(long, default_value_t = 12)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pipeline success rate over a grid of p, hosts coupled per trial.
    ThresholdScan {
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Comma-separated, ascending.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.7, 0.8, 0.9, 0.95, 1.0])]
        p_grid: Vec<f64>,
    },
    /// Check that a design file is a Steiner system inside a host file.
    Verify {
        #[arg(long)]
        design: PathBuf,
        #[arg(long)]
        host: Option<PathBuf>,
    },
}

#[derive(Args)]
struct PipelineArgs {
    /// TOML experiment config; replaces the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 63)]
    n: usize,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value = "minimal")]
    field_policy: FieldPolicy,
    #[arg(long, default_value = "faithful")]
    mode: AbsorbMode,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    target_density: Option<f64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl PipelineArgs {
    fn config(&self, command: ConfigCommand) -> Result<ExperimentConfig, String> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| format!("{}: {e}", path.display()))?,
            None => {
                let d = ExperimentConfig::default();
                ExperimentConfig {
                    command,
                    n: self.n,
                    k: self.k,
                    p: self.p,
                    trials: self.trials,
                    seed: self.seed,
                    field_policy: self.field_policy,
                    mode: self.mode,
                    nu: self.nu.unwrap_or(d.nu),
                    target_density: self.target_density.unwrap_or(d.target_density),
                    out_dir: self.out_dir.clone(),
                    ..d
                }
            }
        };
        c.apply_env(|k| std::env::var(k).ok()).map_err(|e| e.to_string())?;
        c.validate().map_err(|e| e.to_string())?;
        Ok(c)
    }
}

enum Failure {
    Usage(String),
    Experiment(String),
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn io<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Experiment(e.to_string())
}

fn load_hypergraph(path: &Path) -> Result<Hypergraph, Failure> {
    let what = |e: String| Failure::Usage(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|x| x == "json") {
        let text = std::fs::read_to_string(path).map_err(|e| what(e.to_string()))?;
        let j: HypergraphJson = serde_json::from_str(&text).map_err(|e| what(e.to_string()))?;
        Hypergraph::from_json(&j).map_err(|e| what(e.to_string()))
    } else {
        Hypergraph::load(path).map_err(|e| what(e.to_string()))
    }
}

fn save_hypergraph(h: &Hypergraph, path: &Path) -> Result<(), Failure> {
    if path.extension().is_some_and(|x| x == "json") {
        std::fs::write(path, serde_json::to_string(&h.to_json()).map_err(io)?).map_err(io)
    } else {
        h.save(path).map_err(io)
    }
}

fn write_out(out: &Option<PathBuf>, f: impl FnOnce(&mut dyn std::io::Write) -> Result<(), String>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut file = std::fs::File::create(path).map_err(io)?;
            f(&mut file).map_err(Failure::Experiment)
        }
        None => f(&mut std::io::stdout().lock()).map_err(Failure::Experiment),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Gen { n, k, p, seed, out } => {
            let h = sample_hnp(n, k, p, seed).map_err(usage)?;
            save_hypergraph(&h, &out)?;
            eprintln!("H({n}, {k}; {p}) with {} edges -> {}", h.len(), out.display());
        }
        Command::Pipeline(args) => {
            let config = args.config(ConfigCommand::Pipeline).map_err(Failure::Usage)?;
            let dir = config.out_dir.clone();
            let report = harness::run_trials(&config, args.jobs, Some(&dir)).map_err(io)?;
            harness::write_report(&report, &dir).map_err(io)?;
            std::fs::write(dir.join("config.toml"), config.to_toml().map_err(io)?).map_err(io)?;
            eprintln!("{}/{} trials produced a verified design; report in {}", report.successes, report.trials.len(), dir.display());
            if report.successes == 0 {
                return Err(Failure::Experiment("no trial succeeded".into()));
            }
        }
        Command::NibbleStats { n, k, p, nu, steps, trials, seed, out } => {
            let seeds: Vec<u64> = (0..trials).map(|i| harness::trial_seed(seed, i)).collect();
            let rows = harness::nibble_stats(n, k, p, nu, &seeds, steps).map_err(usage)?;
            write_out(&out, |w| harness::write_nibble_stats_csv(&rows, w).map_err(|e| e.to_string()))?;
        }
        Command::VerifyOperators { k, m, seed, out } => {
            if k < 2 {
                return Err(Failure::Usage(format!("k={k} must be at least 2")));
            }
            let field = FieldCtx::new(m).map_err(usage)?;
            let report = verify_properties(k, field, seed);
            write_out(&out, |w| writeln!(w, "{}", report.to_json()).map_err(|e| e.to_string()))?;
            if !report.passed {
                return Err(Failure::Experiment("operator property check failed".into()));
            }
        }
        Command::Decompose { leave, budget_ms, restarts, nodes, seed, out } => {
            let l = load_hypergraph(&leave)?;
            let problem = DecompositionProblem {
                leave: &l,
                prefer: None,
                budget: SolverBudget { base_nodes: nodes, restarts, attempt_time: Duration::from_millis(budget_ms) },
                seed,
            };
            match decompose_exact(&problem) {
                Decomposition::Solved { edges, restart, nodes } => {
                    eprintln!("solved with {} edges (restart {restart}, {nodes} nodes)", edges.len());
                    match &out {
                        Some(path) => save_hypergraph(&edges, path)?,
                        None => print!("{}", edges.to_text()),
                    }
                }
                other => return Err(Failure::Experiment(format!("no decomposition: {}", other.label()))),
            }
        }
        Command::FracHitting { n, k, trials, seed, jobs, out } => {
            let rows = harness::par_trials(trials, jobs, |i| hitting_times(n, k, harness::trial_seed(seed, i)));
            let rows = rows.into_iter().collect::<Result<Vec<_>, _>>().map_err(usage)?;
            let equal = rows.iter().filter(|r| r.equal()).count();
            write_out(&out, |w| write_hitting_csv(&rows, w).map_err(|e| e.to_string()))?;
            eprintln!("t_frac = t_cover in {equal}/{trials} trials");
        }
        Command::ThresholdScan { pipeline, p_grid } => {
            let config = pipeline.config(ConfigCommand::ThresholdScan).map_err(Failure::Usage)?;
            let grid = if config.p_grid.is_empty() { p_grid } else { config.p_grid.clone() };
            let pc: PipelineConfig = config.pipeline();
            let table = harness::threshold_scan(config.n, config.k, &grid, config.trials, config.seed, &pc, pipeline.jobs).map_err(usage)?;
            std::fs::create_dir_all(&config.out_dir).map_err(io)?;
            let path = config.out_dir.join("scan.csv");
            harness::write_scan_csv(&table, std::fs::File::create(&path).map_err(io)?).map_err(io)?;
            for r in &table.rows {
                eprintln!("p={:<6} {}/{}", r.p, r.successes, r.trials);
            }
        }
        Command::Verify { design, host } => {
            let d = load_hypergraph(&design)?;
            let h = host.as_deref().map(load_hypergraph).transpose()?;
            if !verify_steiner(&d, h.as_ref()) {
                let why = steiner_core::absorb::steiner_violation(&d, h.as_ref()).map(|v| v.to_string()).unwrap_or_default();
                return Err(Failure::Experiment(format!("not a Steiner system: {why}")));
            }
            eprintln!("ok: ({}, {}, {}) Steiner system with {} edges", d.n(), d.k(), d.k() - 1, d.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Experiment(m)) => {
            eprintln!("failed: {m}");
            ExitCode::from(1)
        }
    }
}
