//! Exit-code mapping and report printing.

use std::fmt::Write as _;
use std::path::Path;
use std::process::ExitCode;

use bicycle_core::io::save_polygon;
use bicycle_core::{BicycleError, Polygon};
use serde::Serialize;

/// `print!` that exits quietly once stdout is closed (e.g. piped into `head`).
macro_rules! out {
    ($($arg:tt)*) => {
        $crate::output::emit(format_args!($($arg)*))
    };
}

macro_rules! outln {
    ($($arg:tt)*) => {
        out!("{}\n", format_args!($($arg)*))
    };
}

pub fn emit(args: std::fmt::Arguments) {
    use std::io::Write;
    if let Err(e) = std::io::stdout().lock().write_fmt(args) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        eprintln!("error: writing output: {e}");
        std::process::exit(2);
    }
}

/// A failed command. `Input` covers malformed files and unmet
/// preconditions (exit 2); `Verification` is a check that ran and failed
/// (exit 1).
#[derive(Debug)]
pub enum Failure {
    Input(String),
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Input(_) => ExitCode::from(2),
            Failure::Verification(_) => ExitCode::from(1),
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<BicycleError> for Failure {
    fn from(e: BicycleError) -> Self {
        match e {
            BicycleError::ClosureFailure { .. } => Failure::Verification(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

pub type CmdResult = Result<(), Failure>;

/// Key/value lines with the values aligned in one column.
#[derive(Debug, Default)]
pub struct Aligned {
    rows: Vec<(String, String)>,
}

impl Aligned {
    pub fn row(&mut self, key: impl Into<String>, value: impl std::fmt::Display) -> &mut Self {
        self.rows.push((key.into(), value.to_string()));
        self
    }

    pub fn render(&self) -> String {
        let width = self.rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in &self.rows {
            let pad = width - k.chars().count();
            let _ = writeln!(out, "{k}{}  {v}", " ".repeat(pad));
        }
        out
    }
}

pub fn print_json<T: Serialize>(value: &T) {
    outln!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
}

/// Twelve decimals, without a sign on zero.
pub fn fixed(x: f64) -> String {
    let s = format!("{x:.12}");
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

pub fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|&x| fixed(x)).collect();
    format!("[{}]", parts.join(", "))
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}

pub fn point(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|&x| fixed(x)).collect();
    format!("({})", parts.join(", "))
}

pub fn vertex_lines(v: &Polygon) -> String {
    let mut out = String::new();
    for (i, p) in v.vertices().iter().enumerate() {
        let _ = writeln!(out, "  {i:>3}  {}", point(p.coords()));
    }
    out
}

pub fn write_polygon(path: &Path, v: &Polygon, name: Option<String>) -> CmdResult {
    save_polygon(path, v, name).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}
