//! Result files: CSV with a `#` metadata header and JSON summaries with a `meta` object.
//! Everything below the header is a deterministic function of the configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::error::CliError;

/// `%.12e` as in C: twelve mantissa decimals, signed exponent of at least two digits.
pub fn fmt_e(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// Header data shared by every file of one run.
#[derive(Clone, Debug)]
pub struct Meta {
    pub command: String,
    pub config_sha256: String,
    pub version: &'static str,
    pub created: String,
}

impl Meta {
    pub fn new(command: &str, cfg: &RunConfig) -> Meta {
        let canonical = RunConfig { out_dir: None, ..cfg.clone() };
        let digest = Sha256::digest(canonical.to_json().as_bytes());
        let config_sha256 = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Meta {
            command: command.to_string(),
            config_sha256,
            version: env!("CARGO_PKG_VERSION"),
            created: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "config_sha256": self.config_sha256,
            "version": self.version,
            "created": self.created,
        })
    }
}

/// CSV table built in memory and written in one go.
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(meta: &Meta, columns: &[String]) -> Csv {
        let mut text = String::new();
        let _ = writeln!(text, "# swingup {}", meta.version);
        let _ = writeln!(text, "# command: {}", meta.command);
        let _ = writeln!(text, "# config_sha256: {}", meta.config_sha256);
        let _ = writeln!(text, "# created: {}", meta.created);
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv { text, width: columns.len() }
    }

    pub fn row(&mut self, values: &[f64]) {
        debug_assert_eq!(values.len(), self.width);
        let cells: Vec<String> = values.iter().map(|v| fmt_e(*v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    /// Row whose first cell is a label instead of a number.
    pub fn labelled_row(&mut self, label: &str, values: &[f64]) {
        debug_assert_eq!(values.len() + 1, self.width);
        self.text.push_str(label);
        for v in values {
            self.text.push(',');
            self.text.push_str(&fmt_e(*v));
        }
        self.text.push('\n');
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, &self.text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
    }
}

/// Writes `{"meta": …, "result": …}`.
pub fn write_json(path: &Path, meta: &Meta, result: &Value) -> Result<(), CliError> {
    let doc = json!({ "meta": meta.to_json(), "result": result });
    let mut text = serde_json::to_string_pretty(&doc).expect("values always serialise");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Where result files go and which ones were written.
pub struct OutDir {
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(dir: PathBuf) -> Result<OutDir, CliError> {
        std::fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(OutDir { dir, written: Vec::new() })
    }

    pub fn csv(&mut self, name: &str, csv: &Csv) -> Result<(), CliError> {
        let p = self.dir.join(name);
        csv.write(&p)?;
        self.written.push(p);
        Ok(())
    }

    pub fn json(&mut self, name: &str, meta: &Meta, result: &Value) -> Result<(), CliError> {
        let p = self.dir.join(name);
        write_json(&p, meta, result)?;
        self.written.push(p);
        Ok(())
    }
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_style_exponent() {
        assert_eq!(fmt_e(-7595.58), "-7.595580000000e+03");
        assert_eq!(fmt_e(1.22e-6), "1.220000000000e-06");
        assert_eq!(fmt_e(0.0), "0.000000000000e+00");
        assert_eq!(fmt_e(1e100), "1.000000000000e+100");
        assert_eq!(fmt_e(f64::NAN), "nan");
    }
}
