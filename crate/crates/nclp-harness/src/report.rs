//! Report layout, aggregation and JSON/CSV output.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trial {
    pub id: usize,
    pub inputs_digest: String,
    pub metrics: BTreeMap<String, f64>,
    pub pass: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub max: f64,
    pub mean: f64,
}

/// `measured <= threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub threshold: f64,
    pub measured: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Assertion { name: name.into(), threshold, measured, pass: measured <= threshold }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: ExperimentConfig,
    pub trials: Vec<Trial>,
    pub aggregate: BTreeMap<String, Aggregate>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(config: ExperimentConfig, trials: Vec<Trial>, assertions: Vec<Assertion>) -> Self {
        let mut acc: BTreeMap<String, (f64, f64, usize)> = BTreeMap::new();
        for t in &trials {
            for (k, &v) in &t.metrics {
                let e = acc.entry(k.clone()).or_insert((f64::NEG_INFINITY, 0.0, 0));
                e.0 = e.0.max(v);
                e.1 += v;
                e.2 += 1;
            }
        }
        let aggregate = acc.into_iter().map(|(k, (max, sum, n))| (k, Aggregate { max, mean: sum / n as f64 })).collect();
        Report { experiment: config.experiment.name(), config, trials, aggregate, assertions }
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.pass)
    }

    pub fn assertion(&self, name: &str) -> Option<&Assertion> {
        self.assertions.iter().find(|a| a.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| HarnessError::Serialize(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// One row per trial: id, digest, pass, then every metric name in sorted order.
    pub fn to_csv(&self) -> Result<String> {
        let names: BTreeSet<&String> = self.trials.iter().flat_map(|t| t.metrics.keys()).collect();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string(), "inputs_digest".to_string(), "pass".to_string()];
        header.extend(names.iter().map(|s| s.to_string()));
        let err = |e: csv::Error| HarnessError::Serialize(e.to_string());
        w.write_record(&header).map_err(err)?;
        for t in &self.trials {
            let mut row = vec![t.id.to_string(), t.inputs_digest.clone(), t.pass.to_string()];
            row.extend(names.iter().map(|n| t.metrics.get(*n).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Serialize(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Experiment, ExperimentConfig};

    fn trial(id: usize, v: f64) -> Trial {
        Trial { id, inputs_digest: format!("d{id}"), metrics: [("x".to_string(), v)].into(), pass: true }
    }

    #[test]
    fn aggregates_and_csv() {
        let cfg = ExperimentConfig::defaults(Experiment::Norms);
        let r = Report::new(cfg, vec![trial(0, 1.0), trial(1, 3.0)], vec![Assertion::at_most("a", 3.0, 2.0)]);
        assert_eq!(r.aggregate["x"], Aggregate { max: 3.0, mean: 2.0 });
        assert!(!r.passed());
        assert_eq!(r.to_csv().unwrap(), "id,inputs_digest,pass,x\n0,d0,true,1\n1,d1,true,3\n");
        assert!(r.to_json().unwrap().ends_with("}\n"));
    }

    #[test]
    fn nan_never_passes() {
        assert!(!Assertion::at_most("a", f64::NAN, 1.0).pass);
    }
}
