use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;
use simbiped::{run_scenario, HarnessError, ScenarioConfig, ScenarioId};

#[derive(Parser)]
#[command(name = "simbiped", version, about = "Planar LIPM biped: walking runs and joint tuning rigs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and print its summary as JSON.
    Run(RunArgs),
    /// Run a grid of parameter values in parallel.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct Common {
    /// JSON config; omitted fields take the scenario's defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-key override such as `gains.hip.kp=50`; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: Option<ScenarioId>,
    /// Simulated seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Telemetry CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// `key:lo:hi:n` evenly spaced values; repeat for a cartesian grid.
    #[arg(long, required = true)]
    grid: Vec<String>,
    /// Directory for one telemetry CSV per grid point.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

struct GridAxis {
    key: String,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Result<GridAxis, HarnessError> {
    let bad = || HarnessError::Config(format!("grid `{spec}` is not key:lo:hi:n"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [key, lo, hi, n] = parts[..] else { return Err(bad()) };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let n: usize = n.parse().map_err(|_| bad())?;
    if n == 0 || key.is_empty() {
        return Err(bad());
    }
    let values = (0..n)
        .map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect();
    Ok(GridAxis { key: key.to_string(), values })
}

fn read_config_text(path: Option<&Path>) -> Result<String, HarnessError> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e)),
        None => Ok("{}".into()),
    }
}

fn run(args: RunArgs) -> Result<i32, HarnessError> {
    let text = read_config_text(args.common.config.as_deref())?;
    let mut overrides = args.common.overrides;
    if let Some(s) = args.scenario {
        overrides.push(format!("scenario={s}"));
    }
    if let Some(d) = args.duration {
        overrides.push(format!("duration={d}"));
    }
    if let Some(out) = &args.out {
        overrides.push(format!("output={}", json!(out)));
    }
    let config = ScenarioConfig::from_json_with_overrides(&text, &overrides)?;
    let out = run_scenario(&config)?;
    println!("{}", serde_json::to_string_pretty(&out.summary).expect("summary serialises"));
    Ok(out.summary.outcome.exit_code())
}

fn sweep(args: SweepArgs) -> Result<i32, HarnessError> {
    let text = read_config_text(args.common.config.as_deref())?;
    let axes = args.grid.iter().map(|g| parse_axis(g)).collect::<Result<Vec<_>, _>>()?;
    let mut points: Vec<Vec<(String, f64)>> = vec![Vec::new()];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                axis.values.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((axis.key.clone(), *v));
                    q
                })
            })
            .collect();
    }
    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }

    let results: Vec<Result<serde_json::Value, HarnessError>> = points
        .par_iter()
        .enumerate()
        .map(|(i, point)| {
            let mut overrides = args.common.overrides.clone();
            overrides.extend(point.iter().map(|(k, v)| format!("{k}={v}")));
            if let Some(dir) = &args.out_dir {
                overrides.push(format!("output={}", json!(dir.join(format!("run_{i:04}.csv")))));
            }
            let config = ScenarioConfig::from_json_with_overrides(&text, &overrides)?;
            let out = run_scenario(&config)?;
            let params: serde_json::Map<_, _> = point.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
            Ok(json!({ "index": i, "params": params, "summary": out.summary }))
        })
        .collect();
    for r in results {
        println!("{}", serde_json::to_string(&r?).expect("summary serialises"));
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
