//! Command-line front end: simulate ensembles, estimate difference
//! functionals, fit scaling laws, and run the scenario registry.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or
//! configuration error, 3 runtime error.

use clap::{Args, Parser, Subcommand};
use densitylab::drivers::SeedSpec;
use densitylab::error::{Error, Result};
use densitylab::estimators::{
    fit_scaling, make_test_function, mc_weighted_difference, read_sweep_csv, TestFamily,
};
use densitylab::models::{
    simulate_ensemble, simulate_with_checkpoint, write_ensemble_csv, PathEnsemble,
};
use densitylab::scenarios::{
    emit_report, list_scenarios, named_model, read_report_json, run_scenario, ReportFormat,
    ScenarioConfig,
};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "densitylab",
    about = "Monte Carlo laboratory for density smoothness of stochastic evolutions",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SimArgs {
    /// Named model: brownian, holder-sigma, rough-drift, hypoelliptic,
    /// geometric, stable.
    #[arg(long, default_value = "brownian")]
    model: String,
    /// Terminal time.
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Euler steps on [0, t].
    #[arg(long, default_value_t = 64)]
    steps: usize,
    /// Number of paths.
    #[arg(long, default_value_t = 10_000)]
    paths: usize,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Base stream id; path i draws from stream id + i.
    #[arg(long, default_value_t = 0)]
    stream_id: u64,
}

impl SimArgs {
    fn run(&self, epsilon: Option<f64>) -> Result<PathEnsemble> {
        let model = named_model(&self.model)?;
        let seed = SeedSpec::new(self.seed, self.stream_id);
        match epsilon {
            Some(eps) => {
                simulate_with_checkpoint(&model, self.t, eps, self.steps, self.paths, seed)
            }
            None => simulate_ensemble(&model, self.t, self.steps, self.paths, seed),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate an ensemble and dump endpoints (and checkpoints) as CSV.
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Also checkpoint at t - epsilon and retain tail noise.
        #[arg(long)]
        epsilon: Option<f64>,
        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo difference functional on fresh ensemble endpoints.
    Estimate {
        #[command(flatten)]
        sim: SimArgs,
        /// Test function family: cosine, sine, kink, bump.
        #[arg(long, default_value = "cosine")]
        phi: String,
        /// Hoelder exponent certified for the test function.
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Difference order.
        #[arg(long, default_value_t = 2)]
        m: usize,
        /// Displacement vector, comma-separated per state dimension.
        #[arg(long, default_value = "0.125", allow_hyphen_values = true)]
        h: String,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a log-log scaling law to a sweep CSV (scale,value,stderr).
    Scaling {
        /// Input sweep CSV.
        #[arg(long)]
        input: PathBuf,
        /// Output JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scenario registry.
    Scenario {
        #[command(subcommand)]
        command: ScenarioCommand,
    },
    /// Pretty-print a report file; exits 1 when any check failed.
    Report { file: PathBuf },
}

#[derive(Subcommand)]
enum ScenarioCommand {
    /// List registered scenarios.
    List,
    /// Run one scenario and print its checks.
    Run {
        name: String,
        /// key=value configuration file; unknown keys are rejected.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Artifact directory; also receives report.json and report.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (0 = all cores); emitted numbers do not depend
        /// on it.
        #[arg(long, env = "DENSITYLAB_WORKERS", default_value_t = 0)]
        workers: usize,
        /// Paths per sweep point.
        #[arg(long)]
        paths: Option<usize>,
        /// Print the configuration key reference and exit.
        #[arg(long)]
        explain_keys: bool,
    },
}

fn parse_h(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| Error::Parameter(format!("bad displacement '{tok}': {e}")))
        })
        .collect()
}

fn write_or_stdout(out: Option<&PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Simulate { sim, epsilon, out } => {
            let ensemble = sim.run(epsilon)?;
            let mut buf = Vec::new();
            write_ensemble_csv(&ensemble, &mut buf).map_err(|e| Error::io("<csv>", e))?;
            write_or_stdout(out.as_ref(), std::str::from_utf8(&buf).unwrap())?;
            Ok(0)
        }
        Command::Estimate {
            sim,
            phi,
            alpha,
            m,
            h,
            out,
        } => {
            let ensemble = sim.run(None)?;
            let h = parse_h(&h)?;
            let dim = ensemble.dim();
            let family = match phi.as_str() {
                "cosine" => TestFamily::cosine(vec![1.0; dim]),
                "sine" => TestFamily::sine(vec![1.0; dim]),
                "kink" => TestFamily::Kink {
                    center: vec![0.0; dim],
                },
                "bump" => TestFamily::Bump {
                    center: vec![0.0; dim],
                    radius: 2.0,
                },
                other => return Err(Error::Parameter(format!(
                    "unknown test function family '{other}'; available: cosine, sine, kink, bump"
                ))),
            };
            let test_fn = make_test_function(&family, alpha)?;
            let probe = test_fn.probe(m, vec![])?;
            let estimate = mc_weighted_difference(&ensemble.endpoints, &probe, &h, None)?;
            let mut text = serde_json::to_string_pretty(&estimate)?;
            text.push('\n');
            write_or_stdout(out.as_ref(), &text)?;
            Ok(0)
        }
        Command::Scaling { input, out } => {
            let file = std::fs::File::open(&input)
                .map_err(|e| Error::io(input.display().to_string(), e))?;
            let pairs = read_sweep_csv(std::io::BufReader::new(file))?;
            let fit = fit_scaling(&pairs)?;
            let mut text = serde_json::to_string_pretty(&fit)?;
            text.push('\n');
            write_or_stdout(out.as_ref(), &text)?;
            Ok(0)
        }
        Command::Scenario { command } => match command {
            ScenarioCommand::List => {
                for info in list_scenarios() {
                    println!("{:<18} {}", info.name, info.description);
                    println!("{:<18}   checks: {}", "", info.anchor);
                }
                Ok(0)
            }
            ScenarioCommand::Run {
                name,
                config,
                seed,
                out,
                workers,
                paths,
                explain_keys,
            } => {
                if explain_keys {
                    print!("{}", ScenarioConfig::reference());
                    return Ok(0);
                }
                let mut cfg = ScenarioConfig::defaults(&name);
                if let Some(path) = config {
                    let text = std::fs::read_to_string(&path)
                        .map_err(|e| Error::io(path.display().to_string(), e))?;
                    cfg.apply_kv_text(&text)?;
                }
                if let Some(s) = seed {
                    cfg.seed.master_seed = s;
                }
                if let Some(p) = paths {
                    cfg.n_paths = p;
                }
                cfg.workers = workers;
                if let Some(dir) = out {
                    cfg.output_dir = Some(dir);
                }
                let report = run_scenario(&cfg)?;
                for line in report.render_lines() {
                    println!("{line}");
                }
                println!(
                    "{}: {} in {:.1}s",
                    report.name,
                    if report.overall_pass {
                        "all checks passed"
                    } else {
                        "CHECK FAILURE"
                    },
                    report.wall_time_secs
                );
                if let Some(dir) = &cfg.output_dir {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| Error::io(dir.display().to_string(), e))?;
                    emit_report(&report, ReportFormat::Json, &dir.join("report.json"))?;
                    emit_report(&report, ReportFormat::Csv, &dir.join("report.csv"))?;
                }
                Ok(if report.overall_pass { 0 } else { 1 })
            }
        },
        Command::Report { file } => {
            let report = read_report_json(&file)?;
            for line in report.render_lines() {
                println!("{line}");
            }
            Ok(if report.overall_pass { 0 } else { 1 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
