use serde::Serialize;

use super::config::{CampaignConfig, ModeChoice};
use super::report::{emit, timestamp, to_json, ResultRow};
use super::{Outcome, SCHEMA_VERSION};
use crate::catalog::{instantiate, Params, PotentialEntry};
use crate::determining::{
    classical_limit_campaign, elliptic_closure_report, run_campaign, CampaignOptions, Mode, ResidualReport,
};
use crate::error::Result;
use crate::sampling::{sample_domain, DEFAULT_MARGIN};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Planck constant of the classical-limit rerun.
pub const CLASSICAL_LIMIT_HBAR: f64 = 1e-6;

#[derive(Serialize)]
struct VerifyReport<'a> {
    schema_version: u32,
    family: &'a str,
    params: &'a Params,
    mode: &'a str,
    seed: u64,
    samples: usize,
    tolerance: f64,
    results: Vec<ResultRow>,
    pass: bool,
    timestamp: String,
}

pub fn entry_with_includes(cfg: &CampaignConfig) -> Result<PotentialEntry> {
    let mut entry = instantiate(cfg.family, &cfg.params)?;
    for name in &cfg.include {
        entry.include(name)?;
    }
    Ok(entry)
}

pub fn campaign(cfg: &CampaignConfig, entry: &PotentialEntry) -> Result<Vec<ResidualReport>> {
    let mode = match cfg.mode {
        ModeChoice::Classical => Mode::Classical,
        ModeChoice::Quantum => Mode::Quantum { hbar: entry.hbar() },
    };
    let samples = sample_domain(&entry.domain, cfg.samples, cfg.seed, DEFAULT_MARGIN)?;
    let mut reports = run_campaign(entry, &entry.integrals, &samples, CampaignOptions::new(mode, cfg.tolerance))?;
    reports.extend(elliptic_closure_report(entry, &samples, cfg.tolerance)?);
    if cfg.classical_limit {
        reports.extend(classical_limit_campaign(
            entry,
            &entry.integrals,
            &samples,
            CLASSICAL_LIMIT_HBAR,
            cfg.tolerance,
        )?);
    }
    Ok(reports)
}

pub fn run(cfg: &CampaignConfig) -> Result<Outcome> {
    let entry = entry_with_includes(cfg)?;
    let reports = campaign(cfg, &entry)?;
    let pass = reports.iter().all(|r| r.pass);
    for r in reports.iter().filter(|r| !r.pass) {
        eprintln!(
            "FAIL {}: max |r| = {:.3e}, max |r|/(1+scale) = {:.3e}",
            r.equation, r.max_abs, r.max_rel
        );
    }
    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        family: entry.family.id(),
        params: &entry.params,
        mode: match cfg.mode {
            ModeChoice::Classical => "classical",
            ModeChoice::Quantum => "quantum",
        },
        seed: cfg.seed,
        samples: cfg.samples,
        tolerance: cfg.tolerance,
        results: reports.iter().map(ResultRow::from).collect(),
        pass,
        timestamp: timestamp(),
    };
    emit(cfg.output.as_deref(), &to_json(&report))?;
    Ok(Outcome::from_pass(pass))
}
