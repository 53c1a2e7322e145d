//! Campaign configuration: flat `key = value` files merged with flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::catalog::{Family, Params};
use crate::classical::PhasePoint;
use crate::error::{Error, Result};
use crate::sampling::BBox;

/// Every key understood in a config file; flags use the same names with
/// `-` in place of `_`.
pub const KEYS: &[&str] = &[
    "family",
    "hbar",
    "omega",
    "k",
    "a",
    "alpha",
    "mode",
    "samples",
    "seed",
    "tolerance",
    "include",
    "classical_limit",
    "h",
    "levels",
    "tests",
    "spec",
    "corrupt",
    "box",
    "x",
    "y",
    "p1",
    "p2",
    "dt",
    "steps",
    "output",
    "summary",
];

const PARAM_KEYS: &[&str] = &["hbar", "omega", "k", "a", "alpha"];

/// Raw settings in the order file first, then flags.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig(BTreeMap<String, String>);

impl RawConfig {
    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::InvalidParams(format!("config line {}: expected key = value", n + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::InvalidParams(format!("config line {}: unknown key `{key}`", n + 1)));
            }
            raw.0.insert(key, value.trim().to_string());
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read config {}: {e}", path.display())))?;
        RawConfig::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        debug_assert!(KEYS.contains(&key), "{key}");
        self.0.insert(key.to_string(), value.to_string());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::InvalidParams(format!("cannot parse {key} = `{v}`")))
            })
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None | Some("false") | Some("0") => Ok(false),
            Some("true") | Some("1") | Some("") => Ok(true),
            Some(v) => Err(Error::InvalidParams(format!("{key} must be true or false, got `{v}`"))),
        }
    }

    fn list(&self, key: &str) -> Vec<String> {
        self.get(key)
            .map(|v| v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect())
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModeChoice {
    Classical,
    Quantum,
}

impl FromStr for ModeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classical" => Ok(ModeChoice::Classical),
            "quantum" => Ok(ModeChoice::Quantum),
            _ => Err(Error::InvalidParams(format!("mode must be classical or quantum, got `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub h: f64,
    pub levels: usize,
    pub tests: usize,
    /// Spec names or monomials to check; empty means every quantum integral.
    pub specs: Vec<String>,
    pub corrupt: bool,
    pub bbox: Option<BBox>,
}

/// Everything a command needs, validated before any computation.
#[derive(Clone, Debug, PartialEq)]
pub struct CampaignConfig {
    pub family: Family,
    /// Parameters as given; defaults are filled in by the catalog.
    pub params: Params,
    pub mode: ModeChoice,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub include: Vec<String>,
    pub classical_limit: bool,
    pub grid: GridConfig,
    /// Initial state; position defaults to the centre of the grid box.
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub p1: f64,
    pub p2: f64,
    pub dt: f64,
    pub steps: usize,
    pub output: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

impl CampaignConfig {
    /// `default_tolerance` differs between commands.
    pub fn from_raw(raw: &RawConfig, default_tolerance: f64) -> Result<Self> {
        let family: Family = raw
            .get("family")
            .ok_or_else(|| Error::InvalidParams("--family is required".into()))?
            .parse()?;
        let mut params = Params::new();
        for key in PARAM_KEYS {
            if let Some(v) = raw.parsed::<f64>(key)? {
                params.set(key, v);
            }
        }
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(Error::InvalidParams(format!("{key} must be positive and finite")))
            }
        };
        let at_least = |key: &str, v: usize, min: usize| {
            if v >= min {
                Ok(v)
            } else {
                Err(Error::InvalidParams(format!("{key} must be at least {min}")))
            }
        };
        let bbox = match raw.get("box") {
            None => None,
            Some(v) => {
                let c: Vec<f64> = v
                    .split(',')
                    .map(|t| t.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidParams(format!("cannot parse box = `{v}`")))?;
                match c[..] {
                    [x0, x1, y0, y1] if BBox::new(x0, x1, y0, y1).is_nonempty() => Some(BBox::new(x0, x1, y0, y1)),
                    _ => return Err(Error::InvalidParams("box needs x0,x1,y0,y1 with x0 < x1, y0 < y1".into())),
                }
            }
        };
        Ok(CampaignConfig {
            family,
            params,
            mode: raw.parsed("mode")?.unwrap_or(ModeChoice::Quantum),
            samples: at_least("samples", raw.parsed("samples")?.unwrap_or(1000), 1)?,
            seed: raw.parsed("seed")?.unwrap_or(42),
            tolerance: positive("tolerance", raw.parsed("tolerance")?.unwrap_or(default_tolerance))?,
            include: raw.list("include"),
            classical_limit: raw.flag("classical_limit")?,
            grid: GridConfig {
                h: positive("h", raw.parsed("h")?.unwrap_or(0.03))?,
                levels: at_least("levels", raw.parsed("levels")?.unwrap_or(3), 2)?,
                tests: at_least("tests", raw.parsed("tests")?.unwrap_or(8), 1)?,
                specs: raw.list("spec"),
                corrupt: raw.flag("corrupt")?,
                bbox,
            },
            x: raw.parsed("x")?,
            y: raw.parsed("y")?,
            p1: raw.parsed("p1")?.unwrap_or(0.0),
            p2: raw.parsed("p2")?.unwrap_or(0.5),
            dt: positive("dt", raw.parsed("dt")?.unwrap_or(1e-3))?,
            steps: at_least("steps", raw.parsed("steps")?.unwrap_or(100_000), 1)?,
            output: raw.get("output").map(PathBuf::from),
            summary: raw.get("summary").map(PathBuf::from),
        })
    }

    pub fn initial_state(&self, grid_box: BBox) -> PhasePoint {
        PhasePoint::new(
            self.x.unwrap_or(0.5 * (grid_box.x0 + grid_box.x1)),
            self.y.unwrap_or(0.5 * (grid_box.y0 + grid_box.y1)),
            self.p1,
            self.p2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_flags() {
        let mut raw = RawConfig::parse("family = oscillator\n# comment\nomega=2 # inline\nseed = 7\n").unwrap();
        raw.set("seed", 9);
        let cfg = CampaignConfig::from_raw(&raw, 1e-9).unwrap();
        assert_eq!(cfg.family, Family::Oscillator);
        assert_eq!(cfg.params.get("omega"), Some(2.0));
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.samples, 1000);
        assert_eq!(cfg.mode, ModeChoice::Quantum);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RawConfig::parse("colour = red").is_err());
        assert!(RawConfig::parse("family oscillator").is_err());
        let mut raw = RawConfig::default();
        assert!(CampaignConfig::from_raw(&raw, 1e-9).is_err());
        raw.set("family", "nosuch");
        assert!(matches!(CampaignConfig::from_raw(&raw, 1e-9), Err(Error::UnknownFamily(_))));
        raw.set("family", "free");
        raw.set("mode", "semiclassical");
        assert!(CampaignConfig::from_raw(&raw, 1e-9).is_err());
        raw.set("mode", "classical");
        raw.set("box", "1,0,0,1");
        assert!(CampaignConfig::from_raw(&raw, 1e-9).is_err());
        raw.set("box", "0,1,0,1");
        raw.set("levels", 1);
        assert!(CampaignConfig::from_raw(&raw, 1e-9).is_err());
    }

    #[test]
    fn lists_and_flags() {
        let raw = RawConfig::parse("family=inverse_sq\ninclude = X4, X5\ncorrupt = true\nbox=0.5,2,-1,1").unwrap();
        let cfg = CampaignConfig::from_raw(&raw, 1e-9).unwrap();
        assert_eq!(cfg.include, ["X4", "X5"]);
        assert!(cfg.grid.corrupt);
        assert_eq!(cfg.grid.bbox, Some(BBox::new(0.5, 2.0, -1.0, 1.0)));
        let s = cfg.initial_state(BBox::new(0.0, 2.0, -1.0, 3.0));
        assert_eq!((s.x, s.y, s.p1, s.p2), (1.0, 1.0, 0.0, 0.5));
    }
}
