use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use drem_core::acceptance;
use drem_core::harness::{builtin, builtin_names, emit_csv, run_scenario, Scenario, ScenarioKind};
use drem_core::linear::pe_metric;
use drem_core::matalg::l2_energy;
use drem_core::{Error, Signal, TimeGrid, Trajectory};

#[derive(Parser)]
#[command(
    name = "drem",
    version,
    about = "Simulate gradient, DREM and monotone DREM estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run scenarios from JSON files or built-in names and write their CSV files.
    Run {
        /// Config file (one scenario or an array) or built-in name; `all` runs every built-in.
        #[arg(required = true)]
        configs: Vec<String>,
        /// Print final error norms, energies and decay factors.
        #[arg(long)]
        summary: bool,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// List the built-in scenarios.
    ListBuiltins,
    /// Sliding-window excitation report for a linear regressor.
    CheckPe {
        config: String,
        /// Window length; defaults to the scenario's `pe_window`, else 2 pi.
        #[arg(long)]
        window: Option<f64>,
    },
    /// Energy of phi over [from, to].
    Energy {
        config: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
    },
    /// Run the acceptance suite and print a PASS/FAIL table.
    Verify,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalAbort { .. } | Error::NonFinite { .. } | Error::RankDeficient { .. } => 2,
        _ => 1,
    }
}

fn load(arg: &str) -> Result<Vec<Scenario>, Error> {
    if arg == "all" {
        return builtin_names().map(builtin).collect();
    }
    let path = Path::new(arg);
    if !path.exists() {
        return builtin(arg).map(|s| vec![s]);
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.trim_start().starts_with('[') {
        let values: Vec<serde_json::Value> = serde_json::from_str(&text)?;
        values
            .iter()
            .map(|v| Scenario::from_json(&v.to_string()))
            .collect()
    } else {
        Scenario::from_json(&text).map(|s| vec![s])
    }
}

fn load_one(arg: &str) -> Result<Scenario, Error> {
    let mut all = load(arg)?;
    if all.len() != 1 {
        return Err(Error::Validation(vec![format!(
            "`{arg}` holds {} scenarios, expected one",
            all.len()
        )]));
    }
    Ok(all.remove(0))
}

fn run(configs: &[String], summary: bool, out_dir: &Path) -> Result<(), Error> {
    std::fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let scenarios = configs
        .iter()
        .map(|c| load(c))
        .collect::<Result<Vec<_>, _>>()?
        .concat();
    for s in &scenarios {
        s.validate()?;
    }
    for s in &scenarios {
        for rec in run_scenario(s)? {
            let file = rec
                .output
                .clone()
                .unwrap_or_else(|| format!("{}.csv", rec.scenario));
            let path = out_dir.join(file);
            emit_csv(&rec, &path)?;
            if summary {
                println!("{} -> {}", rec.scenario, path.display());
                for (k, v) in &rec.summary {
                    println!("  {k:<20} {v:.6e}");
                }
            } else {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn check_pe(config: &str, window: Option<f64>) -> Result<(), Error> {
    let s = load_one(config)?;
    let regressor = s
        .regressor
        .as_ref()
        .ok_or_else(|| Error::Validation(vec!["missing `regressor`".into()]))?;
    let m = match regressor.resolve()? {
        drem_core::harness::RegressorSource::Linear(m) => m,
        _ => {
            return Err(Error::Validation(vec![
                "check-pe needs a linear regressor".into()
            ]))
        }
    };
    let grid = s
        .grid
        .ok_or_else(|| Error::Validation(vec!["missing `grid`".into()]))?
        .grid()?;
    let window = window.or(s.pe_window).unwrap_or(2.0 * std::f64::consts::PI);
    let signals: Vec<Signal> = m.into_iter().map(Signal::Analytic).collect();
    let metric = pe_metric(&signals, window, &grid)?;
    let v = metric.values();
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let periods: Vec<f64> = (0..)
        .map(|k| metric.grid().t0() + window * k as f64)
        .take_while(|&t| t <= metric.grid().t_end() + 1e-9)
        .map(|t| v[metric.grid().nearest_index(t)])
        .collect();
    let decreasing = periods.windows(2).all(|w| w[1] < w[0]);
    println!("scenario            {}", s.name);
    println!("window              {window:.6}");
    println!("initial             {:.6e}", v[0]);
    println!("final               {:.6e}", metric.last());
    println!("minimum             {min:.6e}");
    println!("decreasing per window  {decreasing}");
    Ok(())
}

fn energy(config: &str, from: f64, to: f64) -> Result<(), Error> {
    let s = load_one(config)?;
    if !matches!(
        s.kind,
        ScenarioKind::DremLinear
            | ScenarioKind::DremScalarMonotone
            | ScenarioKind::DremVectorMonotone
    ) {
        return Err(Error::Validation(vec![format!(
            "scenario `{}` has no phi signal",
            s.name
        )]));
    }
    let rec = run_scenario(&s)?.remove(0);
    let t = rec.column("t").expect("t column");
    let grid = TimeGrid::new(t[0], s.grid.expect("validated").dt, t.len())?;
    let phi = Trajectory::new(grid, rec.column("phi").expect("phi column").to_vec())?;
    println!("{:.16e}", l2_energy(&phi, from, to)?);
    Ok(())
}

fn verify() -> bool {
    let outcomes = acceptance::run_all();
    for o in &outcomes {
        println!("{o}");
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed} / {} criteria pass", outcomes.len());
    passed == outcomes.len()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            configs,
            summary,
            out_dir,
        } => run(&configs, summary, &out_dir),
        Command::ListBuiltins => {
            for name in builtin_names() {
                let s = builtin(name).expect("built-ins parse");
                println!(
                    "{name:<28} {:<24} {}",
                    format!("{:?}", s.kind),
                    s.description.unwrap_or_default()
                );
            }
            Ok(())
        }
        Command::CheckPe { config, window } => check_pe(&config, window),
        Command::Energy { config, from, to } => energy(&config, from, to),
        Command::Verify => {
            return if verify() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
