//! Deterministic file formatting: 15 significant digits, `.` decimal
//! separator, LF line endings, `#` metadata ahead of every table.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

pub const TOOL_VERSION: &str = concat!("dirac-lfv ", env!("CARGO_PKG_VERSION"));

/// Scientific notation with 15 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// SHA-256 of the canonical serialization of the config. The output
/// directory is left out so that a run's files do not depend on where
/// they were written.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut c = cfg.clone();
    c.out_dir = Default::default();
    hex::encode(Sha256::digest(c.to_ini_string().as_bytes()))
}

/// Metadata lines shared by every output file of one run.
pub fn metadata(cfg: &RunConfig, command: &str, seed: u64, extra: &[(&str, String)]) -> Vec<String> {
    let mut lines = vec![
        format!("tool {TOOL_VERSION}"),
        format!("command {command}"),
        format!("scenario {}", cfg.scenario),
        format!("config_sha256 {}", config_hash(cfg)),
        format!("seed {seed}"),
    ];
    lines.extend(extra.iter().map(|(k, v)| format!("{k} {v}")));
    lines
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<PathBuf, CliError> {
    fs::write(path, contents).map_err(|e| io_error(path, e))?;
    Ok(path.to_path_buf())
}

/// RFC 4180 table with a header row, preceded by `# ` metadata lines.
pub fn csv_bytes(meta: &[String], header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = Vec::new();
    for line in meta {
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(&mut out);
        w.write_record(header).expect("in-memory csv");
        for row in rows {
            w.write_record(row).expect("in-memory csv");
        }
        w.flush().expect("in-memory csv");
    }
    out
}

/// Two whitespace-separated columns under a `#` header.
pub fn dat_bytes(meta: &[String], columns: (&str, &str), xs: &[f64], ys: &[f64]) -> Vec<u8> {
    let mut s = String::new();
    for line in meta {
        s.push_str(&format!("# {line}\n"));
    }
    s.push_str(&format!("# {} {}\n", columns.0, columns.1));
    for (x, y) in xs.iter().zip(ys) {
        s.push_str(&format!("{} {}\n", num(*x), num(*y)));
    }
    s.into_bytes()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_fifteen_digits() {
        assert_eq!(num(1.0), "1.00000000000000e0");
        assert_eq!(num(-0.0625), "-6.25000000000000e-2");
        assert_eq!(opt_num(None), "");
    }

    #[test]
    fn csv_uses_lf_and_quotes_when_needed() {
        let bytes = csv_bytes(&["a b".into()], &["x", "y"], &[vec!["1".into(), "p,q".into()]]);
        assert_eq!(String::from_utf8(bytes).unwrap(), "# a b\nx,y\n1,\"p,q\"\n");
    }
}
