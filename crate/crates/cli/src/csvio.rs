//! Byte-stable CSV and sidecar emission.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::runs::CliError;
use gaugeline_core::report::fmt_f64;

/// Shortest round-trip float cell (≤ 17 significant digits).
pub fn cell(x: f64) -> Result<String, CliError> {
    fmt_f64(x).map_err(CliError::Core)
}

pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e: std::io::Error| CliError::Io(format!("write {}: {e}", path.display()));
    writeln!(w, "{header}").map_err(io)?;
    for row in rows {
        writeln!(w, "{}", row.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

/// key=value sidecar; pair order is the emission order (fixed upstream).
pub fn write_sidecar(path: &Path, pairs: &[(String, String)]) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("create {}: {e}", path.display())))?;
    let mut w = std::io::BufWriter::new(file);
    let io = |e: std::io::Error| CliError::Io(format!("write {}: {e}", path.display()));
    for (k, v) in pairs {
        writeln!(w, "{k}={v}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Output directory precedence: CLI flag, then config `out_dir`, then the
/// GAUGELINE_OUT environment variable, then ./out.
pub fn resolve_out_dir(flag: Option<&Path>, config_dir: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    if let Some(p) = config_dir {
        return p.to_path_buf();
    }
    if let Ok(env) = std::env::var("GAUGELINE_OUT") {
        if !env.is_empty() {
            return PathBuf::from(env);
        }
    }
    PathBuf::from("out")
}
