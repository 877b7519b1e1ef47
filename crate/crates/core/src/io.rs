//! JSON and CSV exchange formats.

use serde::{Deserialize, Serialize};

use crate::effects::Effect;
use crate::error::{Error, Result};
use crate::incompat::{RegionMap, ThresholdReport};
use crate::numerics::{HermitianMatrix, TolerancePolicy};
use crate::observables::{ComplementarityVerdict, DiscreteObservable};

/// `{dim, labels, effects}` with each effect as row-major `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmDocument {
    pub dim: usize,
    pub labels: Vec<String>,
    pub effects: Vec<Vec<[f64; 2]>>,
}

impl PovmDocument {
    pub fn from_observable(obs: &DiscreteObservable) -> Self {
        Self {
            dim: obs.dim(),
            labels: obs.labels().to_vec(),
            effects: obs
                .effects()
                .iter()
                .map(|e| e.matrix().to_row_major_pairs())
                .collect(),
        }
    }

    pub fn to_observable(&self, pol: &TolerancePolicy) -> Result<DiscreteObservable> {
        let effects = self
            .effects
            .iter()
            .map(|entries| {
                Effect::new(
                    HermitianMatrix::from_row_major_pairs(self.dim, entries)?,
                    pol,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        DiscreteObservable::new(self.labels.clone(), effects)
    }
}

fn ser_err(e: serde_json::Error) -> Error {
    Error::Serialization(e.to_string())
}

pub fn povm_from_json(text: &str, pol: &TolerancePolicy) -> Result<DiscreteObservable> {
    let doc: PovmDocument = serde_json::from_str(text).map_err(ser_err)?;
    doc.to_observable(pol)
}

pub fn povm_to_json(obs: &DiscreteObservable) -> Result<String> {
    serde_json::to_string_pretty(&PovmDocument::from_observable(obs)).map_err(ser_err)
}

pub fn verdicts_to_json(verdicts: &[ComplementarityVerdict]) -> Result<String> {
    serde_json::to_string_pretty(verdicts).map_err(ser_err)
}

pub fn verdicts_from_json(text: &str) -> Result<Vec<ComplementarityVerdict>> {
    serde_json::from_str(text).map_err(ser_err)
}

pub fn threshold_to_json(report: &ThresholdReport) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(ser_err)
}

/// `lambda,mu,feasible` with feasible in `{1, 0, -1}`.
pub fn region_to_csv(map: &RegionMap) -> String {
    let mut out = String::from("lambda,mu,feasible\n");
    for (l, m, code) in map.rows() {
        out.push_str(&format!("{l},{m},{code}\n"));
    }
    out
}
