//! Command-line driver for the dbie solver: JSON run configurations,
//! experiments (solve, grid, sweep, converge) and shipped presets.

pub mod config;
pub mod run;

use std::path::Path;

use dbie::error::{Error, Result};

pub use config::RunConfig;
pub use run::{select, Runner, Verb};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Presets shipped with the crate (also in `presets/` at the workspace root).
pub const PRESETS: [(&str, &str); 7] = [
    ("fig1", include_str!("../../../presets/fig1.json")),
    ("fig2", include_str!("../../../presets/fig2.json")),
    ("fig3", include_str!("../../../presets/fig3.json")),
    ("fig4", include_str!("../../../presets/fig4.json")),
    ("fig5", include_str!("../../../presets/fig5.json")),
    ("fig6", include_str!("../../../presets/fig6.json")),
    ("fig7", include_str!("../../../presets/fig7.json")),
];

pub fn preset(name: &str) -> Result<RunConfig> {
    let (_, text) = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Validation(format!("unknown preset '{name}' (known: fig1..fig7)")))?;
    RunConfig::from_json(text)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    RunConfig::from_json(&text)
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_NUMERICAL
    }
}

/// Machine-readable error record.
pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) } })
}

/// Loads, overrides, runs; the single entry point behind the binary.
pub fn execute(cfg: &mut RunConfig, verb: Verb, out: &Path, tol: Option<f64>) -> Result<serde_json::Value> {
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(Error::Validation("--tol must be positive".into()));
        }
        cfg.discretization.tol = t;
    }
    cfg.validate()?;
    let experiments = select(cfg, verb)?;
    Runner::new(cfg, out)?.run(&experiments)
}
