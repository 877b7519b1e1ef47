use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use qeffect_cli::config::{parse_seed, split_pair};
use qeffect_cli::{
    list_scenarios, parse_config_text, run, write_outputs, CliError, ExitKind, ScenarioConfig,
    Status,
};

/// Runs one qeffect scenario and writes report.json (and series.csv).
#[derive(Parser, Debug)]
#[command(name = "qeffect", version)]
struct Args {
    /// Scenario name; see --list.
    #[arg(long)]
    scenario: Option<String>,
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tolerance override, repeatable.
    #[arg(long = "tol-override", value_name = "KEY=VALUE")]
    tol_override: Vec<String>,
    /// Model parameter, repeatable.
    #[arg(long = "param", short = 'p', value_name = "KEY=VALUE")]
    params: Vec<String>,
    /// Print the scenarios and exit.
    #[arg(long)]
    list: bool,
}

fn build_config(args: &Args) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
            parse_config_text(&text)?
        }
        None => ScenarioConfig::new("", 0),
    };
    if let Some(s) = &args.scenario {
        cfg.scenario = s.clone();
    }
    if let Some(s) = &args.seed {
        cfg.seed = parse_seed(s)?;
    }
    if let Some(o) = &args.out {
        cfg.out = Some(o.clone());
    }
    for item in &args.params {
        let (k, v) = split_pair(item)?;
        if matches!(k.as_str(), "scenario" | "seed" | "out") || k.starts_with("tol.") {
            return Err(CliError::invalid(format!("`{k}` has its own flag")));
        }
        cfg.apply(&k, &v)?;
    }
    for item in &args.tol_override {
        let (k, v) = split_pair(item)?;
        cfg.tolerances.set(&k, &v)?;
    }
    if cfg.scenario.is_empty() {
        return Err(CliError::invalid(
            "no scenario given (use --scenario or a config file)",
        ));
    }
    Ok(cfg)
}

fn main_inner(args: &Args) -> Result<ExitKind, CliError> {
    let cfg = build_config(args)?;
    let outcome = run(&cfg)?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    for path in write_outputs(&dir, &outcome)? {
        eprintln!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&outcome.report.values)?);
    Ok(match outcome.report.status {
        Status::Ok => ExitKind::Success,
        Status::Inconclusive => ExitKind::Inconclusive,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitKind::InvalidInput
            } else {
                ExitKind::Success
            };
            let _ = e.print();
            return ExitCode::from(code.code() as u8);
        }
    };
    if args.list {
        print!("{}", list_scenarios());
        return ExitCode::SUCCESS;
    }
    let kind = match main_inner(&args) {
        Ok(kind) => kind,
        Err(e) => {
            eprintln!("error: {e}");
            e.kind
        }
    };
    ExitCode::from(kind.code() as u8)
}
