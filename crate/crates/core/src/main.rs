use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use viscowave::decay::{compare, default_window, fit_rate, predicted_rate, FitModel};
use viscowave::history::well_parts;
use viscowave::integrator::{RunOptions, Scenario, Termination};
use viscowave::kernel::{DecayClass, RelaxationKernel};
use viscowave::runner;
use viscowave::wellconst::WellConstants;
use viscowave::{verify, Error};

#[derive(Parser)]
#[command(name = "viscowave", version, about = "Viscoelastic wave simulator with memory, damping and a power source")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Exponential,
    Polynomial,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write config.toml, ledger.csv and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output root (defaults to $VISCOWAVE_OUT or ./runs).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        force: bool,
    },
    /// Print gamma, d, y0 and M as JSON.
    Constants {
        #[arg(long)]
        p: f64,
        /// 1d:L:N or 2d:LX:LY:NX:NY, lengths may be written as `pi`.
        #[arg(long, default_value = "1d:pi:200")]
        grid: String,
        /// exp:MU0:C or poly:C:R.
        #[arg(long, default_value = "exp:1:1")]
        kernel: String,
    },
    /// Classify the history of a config relative to the potential well.
    Classify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Fit a decay rate to a ledger, optionally against a predicted rate.
    DecayFit {
        #[arg(long)]
        ledger: PathBuf,
        #[arg(long, value_enum, default_value = "exponential")]
        model: Model,
        /// Fit window as LO,HI (defaults to the second half).
        #[arg(long, value_delimiter = ',', value_name = "LO,HI")]
        window: Option<Vec<f64>>,
        /// Also report the predicted rate and a verdict: M R SIGMA COMPACT,
        /// where R is `exp` for an exponential kernel, SIGMA may be `-`, and
        /// COMPACT is true or false.
        #[arg(long, num_args = 4, value_names = ["M", "R", "SIGMA", "COMPACT"])]
        predict: Option<Vec<String>>,
    },
    /// Run amplitude x m x kernel variations of a config and print a CSV verdict table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
        amplitudes: Vec<f64>,
        /// Damping exponents (defaults to the config's).
        #[arg(long, value_delimiter = ',')]
        m: Vec<f64>,
        /// Kernels (defaults to the config's).
        #[arg(long, value_delimiter = ',')]
        kernels: Vec<String>,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a run directory per scenario under this root.
        #[arg(long)]
        persist: Option<PathBuf>,
        #[arg(long, requires = "persist")]
        force: bool,
    },
    /// Run the acceptance suite.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        json: bool,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Kernel(_) | Error::AlreadyExists(_) => 1,
        _ => 2,
    }
}

fn parse_prediction(args: &[String]) -> viscowave::Result<(f64, DecayClass, Option<f64>, bool)> {
    let bad = |what: &str, v: &str| Error::Config(vec![format!("--predict: bad {what} `{v}`")]);
    let m = args[0].parse().map_err(|_| bad("M", &args[0]))?;
    let class = match args[1].as_str() {
        "exp" | "exponential" => DecayClass::Exponential,
        r => DecayClass::Polynomial {
            r: r.parse().map_err(|_| bad("R", r))?,
        },
    };
    let sigma = match args[2].as_str() {
        "-" | "none" => None,
        v => Some(v.parse().map_err(|_| bad("SIGMA", v))?),
    };
    let compact = args[3].parse().map_err(|_| bad("COMPACT", &args[3]))?;
    Ok((m, class, sigma, compact))
}

fn print_json(value: &impl serde::Serialize) -> viscowave::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn dispatch(command: Command) -> viscowave::Result<ExitCode> {
    match command {
        Command::Run { config, out, force } => {
            let cfg = runner::load_config(&config)?;
            let record = runner::execute(&cfg, &RunOptions::default())?;
            let root = out.unwrap_or_else(runner::output_root);
            let paths = runner::persist(&record, &root, force)?;
            for w in &record.summary.warnings {
                eprintln!("warning: {w}");
            }
            print_json(&json!({
                "run_dir": paths.dir,
                "termination": record.summary.termination,
                "E0": record.summary.e0,
                "E_final": record.summary.e_final,
                "blowup": record.summary.blowup,
            }))?;
            if matches!(record.summary.termination, Termination::Unstable { .. }) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Constants { p, grid, kernel } => {
            let grid = runner::parse_grid(&grid)?.build()?;
            let kernel = RelaxationKernel::new(runner::parse_kernel(&kernel)?)?;
            print_json(&WellConstants::compute(&grid, p, kernel.k0())?)?;
        }
        Command::Classify { config } => {
            let cfg = runner::load_config(&config)?;
            let scn = Scenario::build(&cfg)?;
            let constants = WellConstants::compute(&scn.grid, cfg.p, scn.kernel.k0())?;
            let parts = well_parts(&scn.grid, &scn.kernel, &scn.history, cfg.p)?;
            print_json(&json!({
                "class": parts.classify(constants.d),
                "I": parts.functional_i(),
                "nehari_gap": parts.nehari_gap(),
                "d": constants.d,
            }))?;
        }
        Command::DecayFit {
            ledger,
            model,
            window,
            predict,
        } => {
            let ledger = runner::read_ledger(&ledger)?;
            let window = match window.as_deref() {
                None => default_window(&ledger),
                Some(&[lo, hi]) => [lo, hi],
                Some(_) => return Err(Error::Config(vec!["--window takes exactly two values, LO,HI".into()])),
            };
            let model = match model {
                Model::Exponential => FitModel::Exponential,
                Model::Polynomial => FitModel::Polynomial,
            };
            let fit = fit_rate(&ledger, window, model)?;
            let mut report = json!({
                "fitted_rate": fit.rate,
                "model": fit.model,
                "goodness": fit.goodness,
                "rows_used": fit.rows_used,
                "window": fit.window,
            });
            if let Some(args) = predict {
                let (m, class, sigma, compact) = parse_prediction(&args)?;
                let predicted = predicted_rate(m, class, sigma, compact)?;
                report["predicted"] = json!(predicted);
                report["verdict"] = json!(compare(&fit, predicted));
            }
            print_json(&report)?;
        }
        Command::Sweep {
            config,
            amplitudes,
            m,
            kernels,
            out,
            persist,
            force,
        } => {
            let base = runner::load_config(&config)?;
            let ms = if m.is_empty() { vec![base.m] } else { m };
            let kernels = if kernels.is_empty() {
                vec![base.kernel]
            } else {
                kernels
                    .iter()
                    .map(|k| runner::parse_kernel(k))
                    .collect::<viscowave::Result<Vec<_>>>()?
            };
            let rows = runner::sweep(&base, &amplitudes, &ms, &kernels, persist.as_deref().map(|p| (p, force)));
            match out {
                Some(path) => runner::write_sweep_csv(&rows, std::fs::File::create(path)?)?,
                None => runner::write_sweep_csv(&rows, std::io::stdout().lock())?,
            }
            if rows.iter().any(|r| r.status.starts_with("error")) {
                return Ok(ExitCode::from(2));
            }
        }
        Command::Verify { quick, json } => {
            let results = verify::run_all(quick);
            if json {
                print_json(&results)?;
            } else {
                for r in &results {
                    println!("{r}");
                }
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                eprintln!("{failed} of {} criteria failed", results.len());
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
