use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;

use super::config::CampaignConfig;
use super::report::{emit, timestamp, to_json};
use super::verify::entry_with_includes;
use super::{Outcome, SCHEMA_VERSION};
use crate::catalog::Params;
use crate::classical::{classical_monitors, integrate, PhasePoint};
use crate::error::Result;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Serialize)]
struct Drift {
    quantity: String,
    drift: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    schema_version: u32,
    family: &'a str,
    params: &'a Params,
    initial_state: PhasePoint,
    dt: f64,
    steps: usize,
    tolerance: f64,
    drifts: Vec<Drift>,
    exited_at: Option<usize>,
    pass: bool,
    timestamp: String,
}

/// Trajectory CSV goes to `--output` (or standard output); the JSON summary
/// goes to `--summary`, else to standard output when the CSV went to a
/// file, else to standard error.
pub fn run(cfg: &CampaignConfig) -> Result<Outcome> {
    let entry = entry_with_includes(cfg)?;
    let state = cfg.initial_state(entry.grid_box);
    let monitors = classical_monitors(&entry);
    let rec = integrate(&entry, state, cfg.dt, cfg.steps, &monitors)?;

    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            rec.write_csv(&mut w)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            rec.write_csv(&mut w)?;
            w.flush()?;
        }
    }

    let drifts: Vec<Drift> = rec
        .drift()
        .into_iter()
        .map(|(quantity, drift)| Drift {
            pass: drift <= cfg.tolerance,
            quantity,
            drift,
        })
        .collect();
    let pass = rec.exited_at.is_none() && drifts.iter().all(|d| d.pass);
    let summary = SimulateSummary {
        schema_version: SCHEMA_VERSION,
        family: entry.family.id(),
        params: &entry.params,
        initial_state: state,
        dt: cfg.dt,
        steps: cfg.steps,
        tolerance: cfg.tolerance,
        drifts,
        exited_at: rec.exited_at,
        pass,
        timestamp: timestamp(),
    };
    let json = to_json(&summary);
    match (&cfg.summary, &cfg.output) {
        (Some(path), _) => emit(Some(path), &json)?,
        (None, Some(_)) => emit(None, &json)?,
        (None, None) => io::stderr().write_all(&json)?,
    }
    if let Some(step) = rec.exited_at {
        eprintln!(
            "error: trajectory left the admissible domain at step {step} (t = {:.6})",
            step as f64 * cfg.dt
        );
        return Ok(Outcome::Numerical);
    }
    Ok(Outcome::from_pass(pass))
}
