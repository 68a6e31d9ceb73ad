use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dbie_cli::{error_record, execute, exit_code, load_config, preset, Verb};

#[derive(Parser)]
#[command(name = "dbie", version, about = "Boundary integral solver for the 2D Dirac equation with sign-changing mass")]
struct Cli {
    #[command(subcommand)]
    verb: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Relative residual required of the linear solves.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write the density CSV.
    Solve,
    /// Field grids of the config.
    Grid,
    /// Parameter sweeps of the config.
    Sweep,
    /// Convergence studies of the config.
    Converge,
    /// Every experiment of the config.
    Run,
    /// Every experiment of a shipped preset (fig1..fig7).
    Preset { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", serde_json::json!({ "error": { "kind": "validation", "message": e.to_string() } }));
            return ExitCode::from(2);
        }
    }
    let (cfg, verb, default_out) = match &cli.verb {
        Command::Preset { name } => (preset(name), Verb::All, PathBuf::from("out").join(name)),
        v => {
            let verb = match v {
                Command::Solve => Verb::Solve,
                Command::Grid => Verb::Grid,
                Command::Sweep => Verb::Sweep,
                Command::Converge => Verb::Converge,
                _ => Verb::All,
            };
            let cfg = match &cli.config {
                Some(p) => load_config(p),
                None => Err(dbie::error::Error::Validation("--config is required".into())),
            };
            (cfg, verb, PathBuf::from("out"))
        }
    };
    let out = cli.out.clone().unwrap_or(default_out);
    let result = cfg.and_then(|mut c| execute(&mut c, verb, &out, cli.tol));
    match result {
        Ok(meta) => {
            println!("{}", serde_json::to_string(&meta).unwrap_or_default());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", error_record(&e));
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
