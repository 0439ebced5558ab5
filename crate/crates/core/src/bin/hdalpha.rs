use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hdalpha::dgp::generate_panel;
use hdalpha::mc::{run_study_with, RunOptions, SCHEMA_VERSION};
use hdalpha::panel_io::{self, DEFAULT_BOX_PIERCE_LAGS, DEFAULT_WINDOW};
use hdalpha::{fit_factor_model, run_alpha_tests, Bandwidth, Error, ErrorKind, Method, TestOutcome};

#[derive(Parser)]
#[command(name = "hdalpha", version, about = "High-dimensional alpha tests for factor pricing models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PanelArgs {
    /// Returns CSV (`date,<id1>,...`).
    #[arg(long)]
    returns: PathBuf,
    /// Factors CSV (`date,mkt_rf,smb,hml,rf`).
    #[arg(long)]
    factors: PathBuf,
}

#[derive(Args)]
struct Format {
    #[arg(long, conflicts_with = "csv")]
    json: bool,
    /// CSV output (the default).
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run SUM, MAX and Cauchy-combination tests on a panel.
    Test {
        #[command(flatten)]
        panel: PanelArgs,
        /// Lag truncation M; defaults to ceil(min(N,T)^(1/8)).
        #[arg(long)]
        bandwidth: Option<usize>,
        #[command(flatten)]
        format: Format,
    },
    /// Write a synthetic panel drawn from a study config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Monte Carlo size/power study.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        reps: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
        #[command(flatten)]
        format: Format,
    },
    /// Rolling-window tests.
    Rolling {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long)]
        bandwidth: Option<usize>,
        #[command(flatten)]
        format: Format,
    },
    /// Box-Pierce diagnostics on factor-model residuals.
    Diagnose {
        #[command(flatten)]
        panel: PanelArgs,
        #[arg(long, default_value_t = DEFAULT_BOX_PIERCE_LAGS)]
        lags: usize,
        /// Histogram bins over [0, 1].
        #[arg(long, default_value_t = 10)]
        bins: usize,
        /// Print the histogram instead of per-security p-values (CSV mode).
        #[arg(long)]
        histogram: bool,
        #[command(flatten)]
        format: Format,
    },
}

#[derive(Serialize)]
struct TestReport {
    schema_version: u32,
    n: usize,
    t: usize,
    bandwidth: usize,
    outcomes: Vec<TestOutcome>,
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            msg: e.to_string(),
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Test {
            panel,
            bandwidth,
            format,
        } => {
            let data = panel_io::load_panel(&panel.returns, &panel.factors)?;
            let bw = bandwidth
                .map(Bandwidth)
                .unwrap_or_else(|| Bandwidth::default_for(data.n_securities(), data.n_periods()));
            let fit = fit_factor_model(&data)?;
            let report = run_alpha_tests(&fit, bw)?;
            let outcomes = vec![report.sum, report.max, report.cauchy];
            let text = if format.json {
                let r = TestReport {
                    schema_version: SCHEMA_VERSION,
                    n: data.n_securities(),
                    t: data.n_periods(),
                    bandwidth: bw.0,
                    outcomes,
                };
                serde_json::to_string_pretty(&r).expect("report serializes") + "\n"
            } else {
                let mut s = String::from("method,statistic,standardized,p_value\n");
                for o in outcomes {
                    let adj = o.location_scale_adjusted.map(|v| v.to_string()).unwrap_or_default();
                    s += &format!("{},{},{},{}\n", o.method, o.statistic, adj, o.p_value);
                }
                s
            };
            emit(&text, None)
        }
        Command::Simulate { config, out, seed } => {
            let cfg = panel_io::read_config(&config)?;
            let mut dgp = cfg.study.dgp;
            dgp.seed = seed.or(cfg.seed).unwrap_or(0);
            let sim = generate_panel(&dgp)?;
            std::fs::create_dir_all(&out).map_err(|e| Error::Io {
                path: out.display().to_string(),
                msg: e.to_string(),
            })?;
            panel_io::write_panel(&sim.panel, out.join("returns.csv"), out.join("factors.csv"))?;
            let mut truth = String::from("security,alpha,beta_mkt,beta_smb,beta_hml\n");
            for (i, id) in sim.panel.security_ids().iter().enumerate() {
                let b = sim.beta.row(i);
                truth += &format!("{id},{},{},{},{}\n", sim.alpha[i], b[0], b[1], b[2]);
            }
            emit(&truth, Some(&out.join("truth.csv")))
        }
        Command::Mc {
            config,
            reps,
            seed,
            out,
            threads,
            format,
        } => {
            let cfg = panel_io::read_config(&config)?;
            let base_seed = seed.or(cfg.seed).unwrap_or(0);
            let options = RunOptions {
                threads,
                keep_raw: false,
            };
            let result = run_study_with(&cfg.study, &Method::ALL, reps, base_seed, options)?;
            let text = if format.json {
                result.to_json() + "\n"
            } else {
                result.to_csv()
            };
            emit(&text, out.as_ref())
        }
        Command::Rolling {
            panel,
            window,
            step,
            bandwidth,
            format,
        } => {
            let data = panel_io::load_panel(&panel.returns, &panel.factors)?;
            let report = panel_io::rolling_test(&data, window, step, bandwidth.map(Bandwidth))?;
            let text = if format.json {
                report.to_json() + "\n"
            } else {
                report.to_csv()
            };
            emit(&text, None)
        }
        Command::Diagnose {
            panel,
            lags,
            bins,
            histogram,
            format,
        } => {
            let data = panel_io::load_panel(&panel.returns, &panel.factors)?;
            let report = panel_io::diagnose(&data, lags, bins)?;
            let text = if format.json {
                report.to_json() + "\n"
            } else if histogram {
                report.histogram_csv()
            } else {
                report.to_csv()
            };
            emit(&text, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Data => 2,
                ErrorKind::Numerical => 3,
            })
        }
    }
}
