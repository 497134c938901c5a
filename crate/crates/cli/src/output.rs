use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use abscompat::{CMatrix, Error};

/// Exit codes: 0 ok, 1 usage or parse, 2 not compatible, 3 not strict,
/// 4 structural failure.
pub mod code {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const NOT_COMPATIBLE: u8 = 2;
    pub const NOT_STRICT: u8 = 3;
    pub const STRUCTURAL: u8 = 4;
}

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: code::USAGE, message: message.into() }
    }

    /// Every core error as a usage-class failure, for commands where a bad
    /// result can only come from bad parameters.
    pub fn params(e: Error) -> Self {
        Self::usage(e.to_string())
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::NotAbsolutelyCompatible(_) | Error::SpectralAmbiguity(_) => code::NOT_COMPATIBLE,
            Error::NotStrict(_) | Error::NotStrictParams(_) | Error::NotStrictUnitary | Error::NotStrictProjection => {
                code::NOT_STRICT
            }
            Error::PairingFailure(_)
            | Error::PostconditionFailure(_)
            | Error::OddDimension(_)
            | Error::NoConvergence { .. } => code::STRUCTURAL,
            _ => code::USAGE,
        };
        Self { code, message: e.to_string() }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

pub fn read_matrix(path: &Path) -> CliResult<CMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    CMatrix::from_json(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> CliResult {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

/// Writes to `out` if given, stdout otherwise. Adds a trailing newline.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult {
    let mut body = text.to_owned();
    if !body.ends_with('\n') {
        body.push('\n');
    }
    match out {
        Some(path) => write_file(path, &body),
        None => std::io::stdout().write_all(body.as_bytes()).map_err(|e| Failure::usage(format!("stdout: {e}"))),
    }
}

pub fn to_json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::usage(format!("serialization: {e}")))
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::usage(format!("csv: {e}"));
    w.write_record(header).map_err(fail)?;
    for row in rows {
        w.write_record(row).map_err(fail)?;
    }
    let bytes = w.into_inner().map_err(|e| Failure::usage(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Failure::usage(format!("csv: {e}")))
}
