use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use tempfile::NamedTempFile;

use crate::error::CliError;

/// Formats `x` with 9 significant digits; plain decimal notation for
/// moderate magnitudes, scientific otherwise.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if !(-5..9).contains(&exp) {
        return sci;
    }
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let body = if exp >= 0 {
        let split = (exp + 1) as usize;
        let (int, frac) = digits.split_at(split);
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        format!("0.{}{}", "0".repeat((-exp - 1) as usize), digits)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

/// CSV text with a header row; every value formatted by [`sig9`].
pub fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Provenance record written next to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<&Path>, seed: Option<u64>, timestamp: &str) -> Self {
        Self {
            command: command.into(),
            config_path: config.map(|p| p.display().to_string()),
            outputs: Vec::new(),
            seed,
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: timestamp.into(),
        }
    }
}

pub fn now_timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

/// Pending file writes, committed together once every output is rendered.
#[derive(Default)]
pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    pub fn add(&mut self, path: impl Into<PathBuf>, contents: impl Into<Vec<u8>>) {
        self.files.push((path.into(), contents.into()));
    }

    /// Writes each file to a temporary sibling and renames it into place.
    pub fn commit(self) -> Result<(), CliError> {
        let mut staged = Vec::with_capacity(self.files.len());
        for (path, contents) in self.files {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
                _ => PathBuf::from("."),
            };
            let write = || -> std::io::Result<NamedTempFile> {
                let mut tmp = NamedTempFile::new_in(&dir)?;
                tmp.write_all(&contents)?;
                tmp.flush()?;
                Ok(tmp)
            };
            let tmp = write().map_err(|e| CliError::io(format!("writing {}: {e}", path.display())))?;
            staged.push((tmp, path));
        }
        for (tmp, path) in staged {
            tmp.persist(&path)
                .map_err(|e| CliError::io(format!("writing {}: {}", path.display(), e.error)))?;
        }
        Ok(())
    }
}

pub fn json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    path.with_file_name(name)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(format!("creating {}: {e}", dir.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(0.110), "0.110000000");
        assert_eq!(sig9(2.0997), "2.09970000");
        assert_eq!(sig9(-0.0005), "-0.000500000000");
        assert_eq!(sig9(123456789.0), "123456789");
        assert_eq!(sig9(1.5e-9), "1.50000000e-9");
        assert_eq!(sig9(9.9999999996), "10.0000000");
        assert_eq!(sig9(0.0), "0");
    }

    #[test]
    fn sidecar_name() {
        assert_eq!(sidecar_path(Path::new("out/a.csv")), PathBuf::from("out/a.csv.manifest.json"));
    }
}
