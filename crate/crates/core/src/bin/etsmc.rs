use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use etsmc::cli::{self, exit, ConfigError};
use etsmc::engine::{self, inter_event_stats, SimConfig};
use etsmc::ScenarioPreset;

#[derive(Parser)]
#[command(name = "etsmc", version, about = "Event-triggered sliding-mode consensus simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML config and write CSV output.
    Run {
        /// Preset name (see `etsmc presets`) or path to a config file.
        target: String,
        /// Output directory for trajectory.csv, events.csv, diagnostics.csv.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Feed the true disturbance values into the control law.
        #[arg(long = "oracle-disturbance")]
        oracle_disturbance: bool,
        /// Write the resolved config next to the CSV files.
        #[arg(long = "save-config")]
        save_config: bool,
    },
    /// Print the topology matrices and their spectral properties.
    Topology { target: String },
    /// List the built-in presets.
    Presets {
        /// Print the preset as a config file instead of listing.
        #[arg(long)]
        dump: Option<String>,
    },
}

fn load(target: &str) -> Result<SimConfig, ConfigError> {
    match target.parse::<ScenarioPreset>() {
        Ok(p) => Ok(p.config()),
        Err(_) => cli::parse_config(target),
    }
}

fn config_failure(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(exit::CONFIG as u8)
}

fn main() -> ExitCode {
    let args = Cli::parse();
    match args.command {
        Command::Presets { dump } => {
            if let Some(name) = dump {
                match name.parse::<ScenarioPreset>() {
                    Ok(p) => print!("{}", cli::to_toml(&p.config())),
                    Err(e) => return config_failure(e),
                }
            } else {
                for p in ScenarioPreset::ALL {
                    println!("{:<22} {}", p.name(), p.description());
                }
            }
            ExitCode::SUCCESS
        }
        Command::Topology { target } => {
            let config = match load(&target) {
                Ok(c) => c,
                Err(ConfigError::Topology(msg)) => {
                    eprintln!("warning: {msg}");
                    // Still report the matrices of an unreachable topology.
                    match std::fs::read_to_string(&target)
                        .ok()
                        .and_then(|t| toml::from_str::<toml::Table>(&t).ok())
                        .and_then(|t| raw_topology(&t))
                    {
                        Some(spec) => return print_report(&spec),
                        None => return config_failure(msg),
                    }
                }
                Err(e) => return config_failure(e),
            };
            print_report(&config.topology)
        }
        Command::Run {
            target,
            out,
            dt,
            t_end,
            seed,
            oracle_disturbance,
            save_config,
        } => {
            let mut config = match load(&target) {
                Ok(c) => c,
                Err(e) => return config_failure(e),
            };
            if let Some(dt) = dt {
                config.dt = dt;
            }
            if let Some(t_end) = t_end {
                config.t_end = t_end;
            }
            if let Some(seed) = seed {
                config.seed = seed;
            }
            config.oracle_disturbance |= oracle_disturbance;
            if let Err(e) = cli::validate_config(&config) {
                return config_failure(e);
            }
            let output = match engine::run(&config) {
                Ok(o) => o,
                Err(e) if e.is_numeric_failure() => {
                    eprintln!("error: {e}");
                    return ExitCode::from(exit::NUMERIC as u8);
                }
                Err(e) => return config_failure(e),
            };
            for w in &output.diagnostics.warnings {
                eprintln!("warning: {w}");
            }
            let paths = match cli::emit_csv(&output, &out) {
                Ok(p) => p,
                Err(e) => return config_failure(format!("writing {}: {e}", out.display())),
            };
            if save_config {
                if let Err(e) = std::fs::write(out.join("config.toml"), cli::to_toml(&config)) {
                    return config_failure(e);
                }
            }
            summarize(&output);
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
    }
}

fn raw_topology(table: &toml::Table) -> Option<engine::TopologySpec> {
    let topo = table.get("topology")?.as_table()?;
    let as_f64 = |v: &toml::Value| v.as_float().or_else(|| v.as_integer().map(|i| i as f64));
    let adjacency = topo
        .get("adjacency")?
        .as_array()?
        .iter()
        .map(|r| r.as_array()?.iter().map(as_f64).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()?;
    let pinning = topo
        .get("pinning")?
        .as_array()?
        .iter()
        .map(as_f64)
        .collect::<Option<Vec<_>>>()?;
    Some(engine::TopologySpec { adjacency, pinning })
}

fn print_report(spec: &engine::TopologySpec) -> ExitCode {
    match cli::topology_report(spec) {
        Ok(r) => {
            print!("{r}");
            ExitCode::SUCCESS
        }
        Err(e) => config_failure(e),
    }
}

fn summarize(out: &engine::RunOutput) {
    let d = &out.diagnostics;
    let n = out.trajectory.n_followers;
    let half = out.trajectory.len() / 2;
    println!(
        "steps: {}  dt: {}  lambda2: {}",
        out.trajectory.len(),
        out.trajectory.dt,
        d.lambda2.map_or("n/a".into(), |l| format!("{l:.6}"))
    );
    for s in inter_event_stats(&out.events) {
        let i = s.agent - 1;
        let tail_err = out.trajectory.records[half..]
            .iter()
            .map(|r| r.e[i].abs())
            .fold(0.0, f64::max);
        println!(
            "agent {}: events {:>6}  min T {:>10}  max |e| (2nd half) {:.3e}",
            s.agent,
            s.count,
            s.min.map_or("-".into(), |m| format!("{m:.4}")),
            tail_err
        );
    }
    println!(
        "gain: K = {}  empirical sup = {:.4}  adequate = {}  (L = {:.4}, F = {:.4})",
        d.gain.k, d.gain.supremum, d.gain.adequate, d.lipschitz, d.forcing_bound
    );
    let reach_ok = d.reaching.iter().flatten().filter(|r| r.passes()).count();
    println!("reaching check passed for {reach_ok}/{n} followers (band {})", d.reaching_band);
}
