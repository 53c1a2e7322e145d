use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;

use crate::determining::ResidualReport;
use crate::error::Result;

pub fn timestamp() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Writes `content` to `path`, or to standard output.
pub fn emit(path: Option<&Path>, content: &[u8]) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content)?,
        None => {
            let mut out = io::stdout().lock();
            out.write_all(content)?;
            out.flush()?;
        }
    }
    Ok(())
}

pub fn to_json(value: &impl Serialize) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("reports serialize");
    s.push(b'\n');
    s
}

#[derive(Debug, Serialize)]
pub struct ResultRow {
    pub equation: String,
    pub max_abs: f64,
    pub rms: f64,
    pub scale: f64,
    pub pass: bool,
}

impl From<&ResidualReport> for ResultRow {
    fn from(r: &ResidualReport) -> Self {
        ResultRow {
            equation: r.equation.clone(),
            max_abs: r.max_abs,
            rms: r.rms,
            scale: r.scale,
            pass: r.pass,
        }
    }
}
