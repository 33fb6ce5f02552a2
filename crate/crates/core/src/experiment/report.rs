//! Experiment reports and their JSON/CSV forms.

use crate::error::Result;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use std::path::Path;

pub const REPORT_SCHEMA: u32 = 1;

fn ser_value<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_value<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// One measured number. Non-finite values are written as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    #[serde(rename = "N")]
    pub n: Option<u64>,
    pub z: Option<i8>,
    #[serde(serialize_with = "ser_value", deserialize_with = "de_value")]
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictKind {
    /// Equality or an inequality with no slack.
    Exact,
    /// A bound checked with a pinned numerical tolerance.
    Tolerance,
    /// Monotone behaviour across a finite grid.
    Trend,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub kind: VerdictKind,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, kind: VerdictKind, ok: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.into(),
            kind,
            status: if ok { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub experiment: String,
    pub params: BTreeMap<String, String>,
    pub metrics: Vec<Metric>,
    pub verdicts: Vec<Verdict>,
    pub seconds: f64,
    pub version: String,
}

impl ExperimentReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(Verdict::passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn metric(&self, name: &str, n: Option<u64>, z: Option<i8>) -> Option<f64> {
        self.metrics.iter().find(|m| m.name == name && m.n == n && m.z == z).map(|m| m.value)
    }

    pub fn metrics_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Metric> + 'a {
        self.metrics.iter().filter(move |m| m.name == name)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Metrics as rows `schema,experiment,name,N,z,value`; verdicts follow
    /// as `verdict:<name>` with value 1 (pass) or 0.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["schema", "experiment", "name", "N", "z", "value"])?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for m in &self.metrics {
            w.write_record([
                self.schema.to_string(),
                self.experiment.clone(),
                m.name.clone(),
                opt(m.n.map(|n| n.to_string())),
                opt(m.z.map(|z| z.to_string())),
                format!("{:e}", m.value),
            ])?;
        }
        for v in &self.verdicts {
            w.write_record([
                self.schema.to_string(),
                self.experiment.clone(),
                format!("verdict:{}", v.name),
                String::new(),
                String::new(),
                if v.passed() { "1".into() } else { "0".into() },
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Collects metrics and verdicts while an experiment runs.
#[derive(Debug, Default)]
pub struct Recorder {
    pub metrics: Vec<Metric>,
    pub verdicts: Vec<Verdict>,
}

impl Recorder {
    pub fn metric(&mut self, name: &str, n: Option<u64>, z: Option<i8>, value: f64) {
        self.metrics.push(Metric { name: name.into(), n, z, value });
    }

    pub fn at(&mut self, name: &str, n: u64, value: f64) {
        self.metric(name, Some(n), None, value);
    }

    pub fn scalar(&mut self, name: &str, value: f64) {
        self.metric(name, None, None, value);
    }

    pub fn verdict(&mut self, name: &str, kind: VerdictKind, ok: bool, detail: impl Into<String>) -> bool {
        self.verdicts.push(Verdict::new(name, kind, ok, detail));
        ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentReport {
        ExperimentReport {
            schema: REPORT_SCHEMA,
            experiment: "x".into(),
            params: BTreeMap::from([("seed".into(), "1".into())]),
            metrics: vec![
                Metric { name: "a".into(), n: Some(10), z: Some(-1), value: 0.5 },
                Metric { name: "b".into(), n: None, z: None, value: f64::INFINITY },
            ],
            verdicts: vec![Verdict::new("v", VerdictKind::Trend, true, "ok")],
            seconds: 0.0,
            version: "0".into(),
        }
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.json");
        let r = sample();
        r.write_json(&p).unwrap();
        let back = ExperimentReport::read_json(&p).unwrap();
        assert_eq!(back.metrics[0], r.metrics[0]);
        assert!(back.metrics[1].value.is_nan());
        assert_eq!(back.verdicts, r.verdicts);
        let text = std::fs::read_to_string(&p).unwrap();
        assert!(text.contains("\"N\": 10"));
    }

    #[test]
    fn csv_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        sample().write_csv(&p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "schema,experiment,name,N,z,value");
        assert_eq!(lines.len(), 4);
        assert!(lines[3].starts_with("1,x,verdict:v"));
    }
}
