use std::path::Path;

use serde::Serialize;

use super::report::{emit, timestamp, to_json};
use super::{Outcome, SCHEMA_VERSION};
use crate::elliptic::{self_test, SelfTestReport};
use crate::error::Result;

/// Size of the `dn` perturbation of the fault hook.
pub const INJECTED_DN_FAULT: f64 = 1e-6;

#[derive(Serialize)]
struct SelftestOutput {
    schema_version: u32,
    seed: u64,
    fault_injected: bool,
    #[serde(flatten)]
    report: SelfTestReport,
    timestamp: String,
}

pub fn run(samples: usize, seed: u64, inject_fault: bool, output: Option<&Path>) -> Result<Outcome> {
    let fault = if inject_fault { INJECTED_DN_FAULT } else { 0.0 };
    let report = self_test(samples, seed, fault)?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "FAIL {} at k = {}: error {:.3e} > {:.1e}",
            c.name, c.k, c.max_error, c.tolerance
        );
    }
    let pass = report.pass;
    let out = SelftestOutput {
        schema_version: SCHEMA_VERSION,
        seed,
        fault_injected: inject_fault,
        report,
        timestamp: timestamp(),
    };
    emit(output, &to_json(&out))?;
    Ok(Outcome::from_pass(pass))
}
