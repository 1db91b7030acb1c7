//! Experiment configuration: a flat key = value text format, one key per
//! line, `#` comments. Every run is fully determined by one of these
//! files plus the code version, and `to_text` emits a canonical form that
//! parses back to the identical config.

use crate::error::{invalid, Error, Result};
use crate::regularize::BoundaryPolicy;
use crate::table::fmt_f64;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// How the smoothing times are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum TimePolicy {
    /// Single t = min(1 / mean V, 1e-2), the potential's own scale.
    InverseMean,
    /// Explicit strictly decreasing list; the first entry is the primary
    /// smoothing time, the full list feeds the residual sweep.
    List(Vec<f64>),
}

/// Right-hand side of the landscape equation.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsSpec {
    Constant(f64),
    /// The slowly modulated positive profile from the generator module.
    Modulated,
    /// Column `value` of a CSV file.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub n: usize,
    pub intervals: usize,
    pub vmax: f64,
    /// When set, the potential is read from this CSV instead of generated.
    pub potential_file: Option<PathBuf>,
    pub times: TimePolicy,
    /// Eigenpairs to compute.
    pub k: usize,
    pub rhs: RhsSpec,
    pub mc_paths: usize,
    pub mc_substeps: usize,
    pub boundary: BoundaryPolicy,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            n: 3000,
            intervals: 20,
            vmax: 1e5,
            potential_file: None,
            times: TimePolicy::InverseMean,
            k: 5,
            rhs: RhsSpec::Constant(1.0),
            mc_paths: crate::stochastic::DEFAULT_PATHS,
            mc_substeps: crate::stochastic::DEFAULT_SUBSTEPS,
            boundary: BoundaryPolicy::Reflect,
            out: PathBuf::from("artifacts"),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parse(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let ctx = |e: String| Error::Parse(format!("line {}: {e}", lineno + 1));
            match key {
                "seed" => cfg.seed = parse_num(value).map_err(ctx)?,
                "n" => cfg.n = parse_num(value).map_err(ctx)?,
                "intervals" => cfg.intervals = parse_num(value).map_err(ctx)?,
                "vmax" => cfg.vmax = parse_num(value).map_err(ctx)?,
                "potential_file" => cfg.potential_file = Some(PathBuf::from(value)),
                "t" => cfg.times = parse_times(value).map_err(ctx)?,
                "k" => cfg.k = parse_num(value).map_err(ctx)?,
                "rhs" => cfg.rhs = parse_rhs(value).map_err(ctx)?,
                "mc_paths" => cfg.mc_paths = parse_num(value).map_err(ctx)?,
                "mc_substeps" => cfg.mc_substeps = parse_num(value).map_err(ctx)?,
                "boundary" => {
                    cfg.boundary =
                        BoundaryPolicy::from_str(value).map_err(|e| ctx(e.to_string()))?
                }
                "out" => cfg.out = PathBuf::from(value),
                other => return Err(ctx(format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)?;
        ExperimentConfig::parse(&text)
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "intervals = {}", self.intervals);
        let _ = writeln!(out, "vmax = {}", fmt_f64(self.vmax));
        if let Some(p) = &self.potential_file {
            let _ = writeln!(out, "potential_file = {}", p.display());
        }
        match &self.times {
            TimePolicy::InverseMean => {
                let _ = writeln!(out, "t = auto");
            }
            TimePolicy::List(ts) => {
                let list: Vec<String> = ts.iter().map(|&t| fmt_f64(t)).collect();
                let _ = writeln!(out, "t = {}", list.join(","));
            }
        }
        let _ = writeln!(out, "k = {}", self.k);
        match &self.rhs {
            RhsSpec::Constant(c) => {
                let _ = writeln!(out, "rhs = constant:{}", fmt_f64(*c));
            }
            RhsSpec::Modulated => {
                let _ = writeln!(out, "rhs = modulated");
            }
            RhsSpec::File(p) => {
                let _ = writeln!(out, "rhs = file:{}", p.display());
            }
        }
        let _ = writeln!(out, "mc_paths = {}", self.mc_paths);
        let _ = writeln!(out, "mc_substeps = {}", self.mc_substeps);
        let _ = writeln!(out, "boundary = {}", self.boundary);
        let _ = writeln!(out, "out = {}", self.out.display());
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(invalid(format!("n must be at least 3, got {}", self.n)));
        }
        if self.potential_file.is_none() {
            if self.intervals == 0 || self.intervals > self.n {
                return Err(invalid(format!(
                    "intervals must be in 1..={}, got {}",
                    self.n, self.intervals
                )));
            }
            if !(self.vmax.is_finite() && self.vmax >= 0.0) {
                return Err(invalid(format!(
                    "vmax must be finite and >= 0, got {}",
                    self.vmax
                )));
            }
        }
        if let TimePolicy::List(ts) = &self.times {
            if ts.is_empty() {
                return Err(invalid("t list cannot be empty"));
            }
            if ts.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
                return Err(invalid("every t must be finite and >= 0"));
            }
            if !ts.windows(2).all(|w| w[0] > w[1]) {
                return Err(invalid("t list must be strictly decreasing"));
            }
        }
        if self.k == 0 || self.k > self.n {
            return Err(invalid(format!(
                "k must be in 1..={}, got {}",
                self.n, self.k
            )));
        }
        if let RhsSpec::Constant(c) = self.rhs {
            if !(c.is_finite() && c > 0.0) {
                return Err(invalid(format!("constant rhs must be positive, got {c}")));
            }
        }
        if self.mc_paths == 0 {
            return Err(invalid("mc_paths must be positive"));
        }
        if self.mc_substeps < 8 {
            return Err(invalid(format!(
                "mc_substeps must be at least 8, got {}",
                self.mc_substeps
            )));
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("cannot parse {s:?}"))
}

fn parse_times(s: &str) -> std::result::Result<TimePolicy, String> {
    if s == "auto" {
        return Ok(TimePolicy::InverseMean);
    }
    let ts: std::result::Result<Vec<f64>, String> =
        s.split(',').map(|p| parse_num::<f64>(p.trim())).collect();
    Ok(TimePolicy::List(ts?))
}

fn parse_rhs(s: &str) -> std::result::Result<RhsSpec, String> {
    if s == "modulated" {
        return Ok(RhsSpec::Modulated);
    }
    if let Some(c) = s.strip_prefix("constant:") {
        return Ok(RhsSpec::Constant(parse_num(c.trim())?));
    }
    if let Some(p) = s.strip_prefix("file:") {
        return Ok(RhsSpec::File(PathBuf::from(p.trim())));
    }
    Err(format!(
        "rhs must be constant:<value>, modulated, or file:<path>, got {s:?}"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = ExperimentConfig::default();
        let text = cfg.to_text();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn explicit_fields_round_trip() {
        let cfg = ExperimentConfig {
            seed: 7,
            n: 999,
            intervals: 12,
            vmax: 3.5e4,
            potential_file: Some(PathBuf::from("pot.csv")),
            times: TimePolicy::List(vec![1e-3, 1e-4, 1e-5]),
            k: 3,
            rhs: RhsSpec::Modulated,
            mc_paths: 500,
            mc_substeps: 16,
            boundary: BoundaryPolicy::ZeroPad,
            out: PathBuf::from("runs/x"),
        };
        let text = cfg.to_text();
        assert_eq!(ExperimentConfig::parse(&text).unwrap(), cfg);
        let rhs_file = ExperimentConfig {
            rhs: RhsSpec::File(PathBuf::from("f.csv")),
            ..ExperimentConfig::default()
        };
        assert_eq!(
            ExperimentConfig::parse(&rhs_file.to_text()).unwrap(),
            rhs_file
        );
    }

    #[test]
    fn comments_and_blanks_are_ignored() {
        let text = "# a comment\n\nseed = 9   # trailing\nn = 100\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n, 100);
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        assert!(ExperimentConfig::parse("typo = 1\n").is_err());
        assert!(ExperimentConfig::parse("seed\n").is_err());
        assert!(ExperimentConfig::parse("n = many\n").is_err());
        assert!(ExperimentConfig::parse("rhs = sine\n").is_err());
        assert!(ExperimentConfig::parse("boundary = open\n").is_err());
    }

    #[test]
    fn validation_catches_bad_ranges() {
        assert!(ExperimentConfig::parse("n = 2\n").is_err());
        assert!(ExperimentConfig::parse("k = 0\n").is_err());
        assert!(ExperimentConfig::parse("t = 1e-5,1e-4\n").is_err()); // increasing
        assert!(ExperimentConfig::parse("t = \n").is_err());
        assert!(ExperimentConfig::parse("rhs = constant:0\n").is_err());
        assert!(ExperimentConfig::parse("mc_substeps = 4\n").is_err());
        assert!(ExperimentConfig::parse("intervals = 0\n").is_err());
    }

    #[test]
    fn float_precision_survives_the_round_trip() {
        let cfg = ExperimentConfig {
            vmax: 0.1 + 0.2, // 0.30000000000000004
            times: TimePolicy::List(vec![1.0 / 3.0]),
            ..ExperimentConfig::default()
        };
        let back = ExperimentConfig::parse(&cfg.to_text()).unwrap();
        assert_eq!(back.vmax.to_bits(), cfg.vmax.to_bits());
        match (back.times, &cfg.times) {
            (TimePolicy::List(a), TimePolicy::List(b)) => {
                assert_eq!(a[0].to_bits(), b[0].to_bits())
            }
            _ => panic!("time policy changed shape"),
        }
    }
}
