//! Plain-text experiment configuration.
//!
//! ```text
//! # comment
//! experiment = pnt_kochergin
//! seed = 7
//!
//! [alpha]
//! preset = kochergin_dense
//!
//! [grid]
//! n = 10000, 100000, 1000000
//! ```
//!
//! Top-level keys precede the first section header. Lists are comma
//! separated. Keys in the fixed sections are checked against the table in
//! [`SECTIONS`]; `[params]` is free-form and read by the experiment.

use crate::error::{Error, Result};
use crate::rotation::{construct_alpha, AlphaMode, AlphaParams, RotationNumber};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

/// Known sections and their keys; `None` accepts any well-formed key.
pub const SECTIONS: &[(&str, Option<&[&str]>)] = &[
    ("", Some(&["experiment", "seed", "threads"])),
    (
        "alpha",
        Some(&["preset", "quotients", "mode", "seed", "growth", "depth", "window_low", "require_prime", "max_candidates"]),
    ),
    ("roof", Some(&["gamma", "c0"])),
    ("sieve", Some(&["limit"])),
    ("grid", Some(&["n", "samples", "starts"])),
    ("observable", Some(&["transfer_n"])),
    ("output", Some(&["json", "csv"])),
    ("params", None),
];

#[derive(Debug, Clone, Default)]
pub struct Config {
    /// section -> key -> (value, line)
    entries: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

impl PartialEq for Config {
    fn eq(&self, other: &Self) -> bool {
        let strip = |c: &Config| -> BTreeMap<String, BTreeMap<String, String>> {
            c.entries
                .iter()
                .map(|(s, m)| (s.clone(), m.iter().map(|(k, v)| (k.clone(), v.0.clone())).collect()))
                .collect()
        };
        strip(self) == strip(other)
    }
}

fn valid_key(k: &str) -> bool {
    let mut chars = k.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase() || c == '_')
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse { line, msg: format!("unterminated section header `{body}`") })?
                    .trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) || name.is_empty() {
                    return Err(Error::Parse { line, msg: format!("unknown section `{name}`") });
                }
                section = name.to_string();
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Parse { line, msg: format!("expected `key = value`, found `{body}`") })?;
            let (k, v) = (k.trim(), v.trim());
            if !valid_key(k) {
                return Err(Error::Parse { line, msg: format!("malformed key `{k}`") });
            }
            let allowed = SECTIONS.iter().find(|(s, _)| *s == section).and_then(|(_, keys)| *keys);
            if let Some(keys) = allowed {
                if !keys.contains(&k) {
                    let where_ = if section.is_empty() { "top level".to_string() } else { format!("[{section}]") };
                    return Err(Error::Parse { line, msg: format!("unknown key `{k}` in {where_}") });
                }
            }
            let sec = cfg.entries.entry(section.clone()).or_default();
            if sec.contains_key(k) {
                return Err(Error::Parse { line, msg: format!("duplicate key `{k}`") });
            }
            sec.insert(k.to_string(), (v.to_string(), line));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        Config::parse(&std::fs::read_to_string(path)?)
    }

    /// Canonical text: top-level keys, then sections in name order.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        if let Some(top) = self.entries.get("") {
            for (k, (v, _)) in top {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        for (s, m) in &self.entries {
            if s.is_empty() || m.is_empty() {
                continue;
            }
            out.push_str(&format!("\n[{s}]\n"));
            for (k, (v, _)) in m {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl ToString) {
        self.entries.entry(section.to_string()).or_default().insert(key.to_string(), (value.to_string(), 0));
    }

    pub fn has_section(&self, section: &str) -> bool {
        self.entries.get(section).is_some_and(|m| !m.is_empty())
    }

    pub fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.entries.get(section)?.get(key).map(|v| v.0.as_str())
    }

    fn line(&self, section: &str, key: &str) -> usize {
        self.entries.get(section).and_then(|m| m.get(key)).map_or(0, |v| v.1)
    }

    fn bad(&self, section: &str, key: &str, v: &str) -> Error {
        Error::Parse { line: self.line(section, key), msg: format!("cannot read `{key}` = `{v}`") }
    }

    pub fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| self.bad(section, key, v)),
        }
    }

    pub fn get_or<T: FromStr>(&self, section: &str, key: &str, default: T) -> Result<T> {
        Ok(self.get(section, key)?.unwrap_or(default))
    }

    pub fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>> {
        match self.raw(section, key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().replace('_', "").parse::<T>().map_err(|_| self.bad(section, key, v)))
                .collect::<Result<Vec<T>>>()
                .map(Some),
        }
    }

    /// All key/value pairs as `section.key` (top-level keys bare).
    pub fn flatten(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        for (s, m) in &self.entries {
            for (k, (v, _)) in m {
                let name = if s.is_empty() { k.clone() } else { format!("{s}.{k}") };
                out.insert(name, v.clone());
            }
        }
        out
    }
}

/// A parsed config with typed accessors and documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub raw: Config,
}

pub const DEFAULT_SEED: u64 = 20_190_101;
pub const DEFAULT_SIEVE_LIMIT: u64 = 1_000_000;

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw = Config::parse(text)?;
        if raw.raw("", "experiment").is_none() {
            return Err(Error::Parse { line: 0, msg: "missing `experiment`".into() });
        }
        Ok(ExperimentConfig { raw })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Config naming `experiment` with every other value at its default.
    pub fn minimal(experiment: &str) -> Self {
        let mut raw = Config::default();
        raw.set("", "experiment", experiment);
        ExperimentConfig { raw }
    }

    pub fn emit(&self) -> String {
        self.raw.emit()
    }

    pub fn name(&self) -> &str {
        self.raw.raw("", "experiment").unwrap_or("")
    }

    pub fn seed(&self) -> Result<u64> {
        self.raw.get_or("", "seed", DEFAULT_SEED)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.raw.set("", "seed", seed);
        self
    }

    pub fn sieve_limit(&self, default: u64) -> Result<u64> {
        let v: Option<String> = self.raw.get("sieve", "limit")?;
        match v {
            None => Ok(default),
            Some(s) => s
                .replace('_', "")
                .parse::<f64>()
                .ok()
                .filter(|x| *x >= 2.0)
                .map(|x| x as u64)
                .ok_or_else(|| self.raw.bad("sieve", "limit", &s)),
        }
    }

    pub fn grid(&self, default: &[u64]) -> Result<Vec<u64>> {
        Ok(self.raw.list("grid", "n")?.unwrap_or_else(|| default.to_vec()))
    }

    pub fn samples(&self, default: usize) -> Result<usize> {
        self.raw.get_or("grid", "samples", default)
    }

    pub fn starts(&self, default: usize) -> Result<usize> {
        self.raw.get_or("grid", "starts", default)
    }

    pub fn param<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        self.raw.get_or("params", key, default)
    }

    pub fn param_list<T: FromStr>(&self, key: &str, default: &[T]) -> Result<Vec<T>>
    where
        T: Clone,
    {
        Ok(self.raw.list("params", key)?.unwrap_or_else(|| default.to_vec()))
    }

    /// Rotation number from `[alpha]`: `quotients`, or a `preset`, or the
    /// constructor fields; `default` when the section is absent.
    pub fn alpha(&self, default: AlphaPreset) -> Result<RotationNumber> {
        if let Some(q) = self.raw.list::<u64>("alpha", "quotients")? {
            return RotationNumber::from_partial_quotients(&q);
        }
        let preset = match self.raw.raw("alpha", "preset") {
            Some(p) => p.parse::<AlphaPreset>().map_err(|_| self.raw.bad("alpha", "preset", p))?,
            None => default,
        };
        let base = match preset.params() {
            Some(p) => p,
            None if self.raw.raw("alpha", "mode").is_none() => return Ok(preset.quotients()),
            None => AlphaParams::default(),
        };
        let mut p = base;
        if let Some(m) = self.raw.raw("alpha", "mode") {
            p.mode = match m {
                "scaled_d" => AlphaMode::ScaledD,
                "scaled_c_a" | "scaled_ca" => AlphaMode::ScaledCA,
                _ => return Err(self.raw.bad("alpha", "mode", m)),
            };
        }
        if let Some(g) = self.raw.list("alpha", "growth")? {
            p.growth = g;
        }
        if let Some(s) = self.raw.list("alpha", "seed")? {
            p.seed = s;
        }
        p.depth = self.raw.get_or("alpha", "depth", p.depth)?;
        p.window_low = self.raw.get_or("alpha", "window_low", p.window_low)?;
        p.require_prime = self.raw.get_or("alpha", "require_prime", p.require_prime)?;
        p.max_candidates = self.raw.get_or("alpha", "max_candidates", p.max_candidates)?;
        construct_alpha(&p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaPreset {
    /// `[0; 1, 1, ...]` with 20 explicit quotients.
    Golden,
    /// `[0; 2, 2, ...]` with 20 explicit quotients.
    Pell,
    /// `q = 4, 257, 16974597`.
    Kochergin,
    /// `q = 4, 17, 293, 85866, 7372970249`.
    KocherginDense,
    /// Prime denominators `q = 5, 331, ...` with `q_{n+1} ~ q_n^4`.
    Reparam,
}

impl AlphaPreset {
    fn params(self) -> Option<AlphaParams> {
        match self {
            AlphaPreset::Kochergin => Some(AlphaParams::kochergin()),
            AlphaPreset::KocherginDense => Some(AlphaParams::kochergin_dense()),
            AlphaPreset::Reparam => Some(AlphaParams::reparam()),
            _ => None,
        }
    }

    fn quotients(self) -> RotationNumber {
        let a = if self == AlphaPreset::Pell { 2 } else { 1 };
        RotationNumber::from_partial_quotients(&[a; 20]).expect("valid quotients")
    }

    pub fn build(self) -> Result<RotationNumber> {
        match self.params() {
            Some(p) => construct_alpha(&p),
            None => Ok(self.quotients()),
        }
    }
}

impl FromStr for AlphaPreset {
    type Err = ();
    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Ok(match s {
            "golden" => AlphaPreset::Golden,
            "pell" => AlphaPreset::Pell,
            "kochergin" => AlphaPreset::Kochergin,
            "kochergin_dense" => AlphaPreset::KocherginDense,
            "reparam" => AlphaPreset::Reparam,
            _ => return Err(()),
        })
    }
}
