//! `rydlink` — scenario runner for the retroreflected Rydberg RF-link
//! simulator.
//!
//! Exit codes: 0 success, 1 configuration/input error, 2 numerical or model
//! failure during a scan (including scans aborted partway; partial results
//! are still flushed with a marker).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rydlink_core::error::Error;
use rydlink_core::scenario::{
    load_config, load_preset, preset_descriptions, preset_toml, run_scan, write_outputs,
    OutputFormat, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "rydlink",
    version,
    about = "Simulate an EIT-based atomic RF transducer behind a free-space optical link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a bundled preset or a configuration file and write the results.
    Simulate {
        /// Preset name (see `presets list`) or path to a config file — TOML,
        /// or the JSON sidecar of a previous run.
        target: String,
        /// Override the primary scan axis point count.
        #[arg(long)]
        points: Option<usize>,
        /// Worker pool size (default: all available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Directory for the result files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Output format: csv (data + JSON sidecar) or json (single file).
        #[arg(long, default_value = "csv")]
        format: String,
    },
    /// Parse, resolve and validate a configuration file without running it.
    Validate {
        /// Path to the configuration file.
        config: PathBuf,
    },
    /// Inspect bundled presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List preset names and what they reproduce.
    List,
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config { .. } | Error::Io(_) => 1,
        Error::Model(_) | Error::Numerical { .. } | Error::Physics(_) => 2,
    }
}

/// Resolve the simulate target to a configuration and an output file stem.
fn load_target(target: &str) -> Result<(ScenarioConfig, String), Error> {
    if preset_toml(target).is_some() {
        return Ok((load_preset(target)?, target.to_string()));
    }
    let path = Path::new(target);
    if !path.exists() {
        return Err(Error::config(
            "target",
            format!(
                "'{target}' is neither a bundled preset nor an existing file; \
                 run `rydlink presets list` for the preset names"
            ),
        ));
    }
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scan").to_string();
    Ok((load_config(path)?, stem))
}

fn simulate(
    target: &str,
    points: Option<usize>,
    workers: Option<usize>,
    out: &Path,
    format: &str,
) -> Result<u8, Error> {
    let format: OutputFormat = format.parse()?;
    let (mut cfg, stem) = load_target(target)?;
    if let Some(n) = points {
        if n < 2 {
            return Err(Error::config("points", "a scan needs at least 2 points"));
        }
        cfg.scan.set_primary_points(n);
    }

    let outcome = run_scan(&cfg, workers)?;
    let files = write_outputs(out, &stem, &cfg, &outcome, format)?;

    println!(
        "{}: {} scan, {} point(s) in {:.2} s",
        cfg.name,
        cfg.scan.type_name(),
        outcome.result.rows.len(),
        outcome.wall_seconds
    );
    println!("  data:    {}", files.data.display());
    if files.sidecar != files.data {
        println!("  sidecar: {}", files.sidecar.display());
    }
    if let Some(abort) = &outcome.abort {
        eprintln!("error: scan aborted early; partial results were written");
        eprintln!("  {}", abort.message);
        return Ok(2);
    }
    Ok(0)
}

fn validate(config: &Path) -> Result<(), Error> {
    let cfg = load_config(config)?;
    println!(
        "OK: '{}' resolves to a {} scan with {} point(s)",
        cfg.name,
        cfg.scan.type_name(),
        cfg.scan.row_count()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Simulate { target, points, workers, out, format } => {
            simulate(&target, points, workers, &out, &format)
        }
        Command::Validate { config } => {
            validate(&config)?;
            Ok(0)
        }
        Command::Presets { action: PresetsAction::List } => {
            for (name, description) in preset_descriptions() {
                println!("{name:<20} {description}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
