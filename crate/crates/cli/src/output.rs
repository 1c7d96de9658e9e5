//! Plot-ready CSV emission: fixed 17-significant-digit scientific formatting
//! (round-trips doubles), atomic writes, and a JSON metadata sidecar next to
//! every file.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Format a double with 17 significant digits.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `content` to `dir/name` atomically (temp file + rename).
fn write_atomic(dir: &Path, name: &str, content: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    let tmp = dir.join(format!(".tmp-{name}"));
    let target = dir.join(name);
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("cannot create {}", tmp.display()))?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)
        .with_context(|| format!("cannot move output into place at {}", target.display()))?;
    Ok(target)
}

/// Emit a CSV (header plus rows of doubles) and its `<name>.meta.json`
/// sidecar.
pub fn emit_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[Vec<f64>],
    meta: &serde_json::Value,
) -> Result<PathBuf> {
    let mut body = String::with_capacity(rows.len() * 24 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for row in rows {
        let mut first = true;
        for x in row {
            if !first {
                body.push(',');
            }
            body.push_str(&sci(*x));
            first = false;
        }
        body.push('\n');
    }
    let path = write_atomic(dir, name, body.as_bytes())?;
    let sidecar = serde_json::to_string_pretty(meta)?;
    write_atomic(dir, &format!("{name}.meta.json"), sidecar.as_bytes())?;
    Ok(path)
}

/// Emit a CSV whose rows are preformatted lines, plus the sidecar.
pub fn emit_rows(
    dir: &Path,
    name: &str,
    header: &str,
    lines: &[String],
    meta: &serde_json::Value,
) -> Result<PathBuf> {
    let mut body = String::with_capacity(lines.len() * 24 + header.len() + 1);
    body.push_str(header);
    body.push('\n');
    for line in lines {
        body.push_str(line);
        body.push('\n');
    }
    let path = write_atomic(dir, name, body.as_bytes())?;
    let sidecar = serde_json::to_string_pretty(meta)?;
    write_atomic(dir, &format!("{name}.meta.json"), sidecar.as_bytes())?;
    Ok(path)
}

/// Emit a standalone JSON document (atomically), without a sidecar.
pub fn emit_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<PathBuf> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(dir, name, text.as_bytes())
}

/// Common sidecar skeleton: command, code version and the resolved run
/// configuration; `extra` carries subcommand-specific fields.
pub fn sidecar(
    command: &str,
    resolved: &crate::config::Resolved,
    extra: serde_json::Value,
) -> serde_json::Value {
    serde_json::json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": resolved.describe(),
        "extra": extra,
    })
}
