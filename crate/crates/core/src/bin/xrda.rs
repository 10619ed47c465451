use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use xrda::harness::{
    check_bound, compare, default_presets, gen_problem, parse_config_in, parse_preset, run_experiment,
    ExperimentConfig, HarnessError, DEFAULT_SLACK,
};

/// Extended regularized dual averaging experiments.
#[derive(Parser)]
#[command(name = "xrda", version)]
struct Cli {
    /// Experiment config (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Accept schedules outside the convergence constraints; bounds are
    /// then reported as invalid.
    #[arg(long = "unsafe", global = true)]
    allow_unsafe: bool,
    /// Logging stride; overrides `run.stride`.
    #[arg(long, global = true, value_name = "N")]
    stride: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment, one trace per seed.
    Run,
    /// Run several presets on the configured problem and tabulate them.
    Compare {
        /// Comma-separated presets, e.g. `forward-backward,leap-frog,rda:2`.
        #[arg(long, value_delimiter = ',')]
        presets: Vec<String>,
    },
    /// Check traces against their theoretical bound column.
    CheckBound {
        #[arg(required = false)]
        traces: Vec<PathBuf>,
        /// Compare the seed mean of the final gap with 1.10 x bound instead
        /// of checking every row.
        #[arg(long)]
        stochastic: bool,
        #[arg(long, default_value_t = DEFAULT_SLACK)]
        slack: f64,
    },
    /// Write the configured problem's data to text files.
    GenProblem,
}

fn load(cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| HarnessError::Usage("--config PATH is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_config_in(&text, base, cli.allow_unsafe)?;
    if let Some(stride) = cli.stride {
        if stride == 0 {
            return Err(HarnessError::Usage("--stride must be at least 1".into()));
        }
        cfg.stride = stride;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    match &cli.command {
        Command::Run => {
            let cfg = load(cli)?;
            for path in run_experiment(&cfg, &out_dir(cli, &cfg))? {
                println!("{}", path.display());
            }
        }
        Command::Compare { presets } => {
            let cfg = load(cli)?;
            let presets = if presets.is_empty() {
                default_presets(&cfg)
            } else {
                presets
                    .iter()
                    .map(|p| parse_preset(p))
                    .collect::<Result<_, _>>()?
            };
            print!("{}", compare(&cfg, &presets, &out_dir(cli, &cfg))?.to_table());
        }
        Command::CheckBound {
            traces,
            stochastic,
            slack,
        } => {
            let report = check_bound(traces, !stochastic, *slack)?;
            for line in &report.lines {
                println!("{line}");
            }
            if !report.passed {
                let failed = report.lines.iter().filter(|l| l.starts_with("FAIL")).count();
                return Err(HarnessError::BoundViolated(format!("{failed} failing check(s)")));
            }
        }
        Command::GenProblem => {
            let cfg = load(cli)?;
            for path in gen_problem(&cfg, &out_dir(cli, &cfg))? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
