//! Report and table output.
//!
//! Every JSON report embeds the resolved configuration, so an artifact is
//! reproducible from itself.  CSV cells are written with 17 significant
//! digits, `.` decimal separator, `,` field separator and LF line endings —
//! enough to round-trip every f64 bit pattern.

use crate::config::RunConfig;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// One named invariant: measured residual against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn measure(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Check { name, residual, tolerance, pass: residual <= tolerance }
    }
}

/// The JSON artifact shared by all subcommands: resolved config, a task tag,
/// and task-specific payload.
#[derive(Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub task: &'static str,
    pub config: &'a RunConfig,
    #[serde(flatten)]
    pub payload: T,
}

pub fn write_json<T: Serialize>(path: &Path, report: &Report<'_, T>) -> std::io::Result<()> {
    let mut out = serde_json::to_vec_pretty(report).expect("report serialization cannot fail");
    out.push(b'\n');
    std::fs::write(path, out)
}

/// 17 significant digits; NaN marks field points suppressed by the
/// near-boundary evaluation guard.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_csv(
    path: &Path,
    header: &str,
    rows: impl IntoIterator<Item = Vec<f64>>,
) -> std::io::Result<()> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    out.write_all(header.as_bytes())?;
    out.write_all(b"\n")?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        out.write_all(cells.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

/// Resolved artifact locations for one run: `<dir>/<base>.json` and
/// `<dir>/<base>.csv`.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub json: PathBuf,
    pub csv: PathBuf,
}

impl OutputPaths {
    pub fn resolve(config: &RunConfig, out_override: Option<&Path>) -> Self {
        let dir = out_override
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(&config.output.dir));
        let base = config
            .output
            .basename
            .clone()
            .unwrap_or_else(|| config.task.kind().to_owned());
        OutputPaths {
            json: dir.join(format!("{base}.json")),
            csv: dir.join(format!("{base}.csv")),
        }
    }
}
