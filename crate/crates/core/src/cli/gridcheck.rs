use std::fs::File;
use std::io::{self, BufWriter, Write};

use super::config::CampaignConfig;
use super::verify::entry_with_includes;
use super::Outcome;
use crate::catalog::{hamiltonian_spec, trivial_integrals, PotentialEntry};
use crate::error::{Error, Result};
use crate::integral::{IntegralSpec, Mechanics};
use crate::quantum_grid::{
    convergence_orders, corrupted_control, gaussian_tests, write_convergence_csv, GridSpec, COMMUTATOR_RADIUS,
};

/// Accepted window for the measured order of a true integral.
pub const ORDER_WINDOW: (f64, f64) = (1.7, 2.3);

/// `L^i p1^j p2^k` written as e.g. `p1^3`, `L p2^2` or `L^2*p1`, as a spec
/// without corrections.
pub fn parse_monomial_spec(name: &str) -> Option<IntegralSpec> {
    let mut powers = [0u8; 3];
    let mut rest = name.trim();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(['*', ' ']);
        let (slot, tail) = if let Some(t) = rest.strip_prefix("p1") {
            (1, t)
        } else if let Some(t) = rest.strip_prefix("p2") {
            (2, t)
        } else if let Some(t) = rest.strip_prefix("L3").or_else(|| rest.strip_prefix('L')) {
            (0, t)
        } else {
            return None;
        };
        let (exp, tail) = match tail.strip_prefix('^') {
            Some(t) => {
                let digits = t.chars().take_while(char::is_ascii_digit).count();
                (t[..digits].parse().ok()?, &t[digits..])
            }
            None => (1, tail),
        };
        powers[slot] += exp;
        rest = tail.trim_start_matches(['*', ' ']);
    }
    let order: u8 = powers.iter().sum();
    if !(1..=3).contains(&order) {
        return None;
    }
    Some(IntegralSpec::new(name, order, Mechanics::Both).lead(powers[0], powers[1], powers[2], 1.0))
}

fn resolve_spec(entry: &PotentialEntry, name: &str) -> Result<IntegralSpec> {
    if let Some(s) = entry.integral(name) {
        return Ok(s.clone());
    }
    if name == "H" {
        return Ok(hamiltonian_spec(entry));
    }
    if let Some(s) = trivial_integrals(entry).into_iter().find(|s| s.name == name) {
        return Ok(s);
    }
    parse_monomial_spec(name).ok_or_else(|| {
        Error::InvalidParams(format!(
            "unknown spec `{name}` for {} (use a catalog name, H, or a monomial such as p1^3)",
            entry.family
        ))
    })
}

pub fn run(cfg: &CampaignConfig) -> Result<Outcome> {
    let entry = entry_with_includes(cfg)?;
    let mut specs: Vec<IntegralSpec> = if cfg.grid.specs.is_empty() {
        entry.integrals.iter().filter(|s| s.kind.quantum()).cloned().collect()
    } else {
        cfg.grid.specs.iter().map(|n| resolve_spec(&entry, n)).collect::<Result<_>>()?
    };
    if specs.is_empty() {
        return Err(Error::Precondition(format!("{} has no quantum integrals to check", entry.family)));
    }
    if cfg.grid.corrupt {
        specs = specs
            .into_iter()
            .flat_map(|s| {
                let control = corrupted_control(&s);
                std::iter::once(s).chain(control)
            })
            .collect();
    }
    let coarse = GridSpec::new(cfg.grid.bbox.unwrap_or(entry.grid_box), cfg.grid.h, COMMUTATOR_RADIUS)?;
    let tests = gaussian_tests(&coarse, cfg.grid.tests, cfg.seed)?;
    let reports = convergence_orders(&entry, &specs, entry.hbar(), &coarse.levels(cfg.grid.levels), &tests)?;

    match &cfg.output {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_convergence_csv(&reports, &mut w)?;
            w.flush()?;
        }
        None => write_convergence_csv(&reports, io::stdout().lock())?,
    }
    let (lo, hi) = ORDER_WINDOW;
    let mut pass = true;
    for r in &reports {
        let ok = r.converges(lo, hi);
        pass &= ok;
        let status = if r.floor_limited {
            "floor-limited"
        } else if ok {
            "converges"
        } else if r.stalls(0.5) {
            "FAIL, stalls"
        } else {
            "FAIL"
        };
        eprintln!(
            "{}: order {:.3}, finest residual {:.3e} ({status})",
            r.spec,
            r.order(),
            r.finest_residual()
        );
    }
    Ok(Outcome::from_pass(pass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integral::Monomial;

    #[test]
    fn monomial_specs() {
        let lead = |s: &str| parse_monomial_spec(s).map(|x| x.leading);
        assert_eq!(lead("p1^3"), Some(vec![(Monomial::new(0, 3, 0), 1.0)]));
        assert_eq!(lead("L^2*p1"), Some(vec![(Monomial::new(2, 1, 0), 1.0)]));
        assert_eq!(lead("L3 p2^2"), Some(vec![(Monomial::new(1, 0, 2), 1.0)]));
        assert_eq!(lead("p1 p1 p2"), Some(vec![(Monomial::new(0, 2, 1), 1.0)]));
        assert!(parse_monomial_spec("p1^4").is_none());
        assert!(parse_monomial_spec("q1").is_none());
        assert!(parse_monomial_spec("").is_none());
    }
}
