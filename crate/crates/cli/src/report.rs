//! Serialized command outputs; every report carries the schema version.

use std::collections::BTreeMap;

use serde::Serialize;

use aeqs_core::aeqs::{Outcome, Verdict};
use aeqs_core::doc::{HamiltonianDoc, SCHEMA_VERSION};
use aeqs_core::gallery::{Membership, VerifyReport};
use aeqs_core::numfmt::{fmt_sig, sig};
use aeqs_core::qqa::BasisIndex;

#[derive(Debug, Clone, Serialize)]
pub struct VerdictFields {
    pub outcome: Outcome,
    #[serde(serialize_with = "sig")]
    pub ground_energy: f64,
    #[serde(serialize_with = "sig")]
    pub spectral_gap: f64,
    #[serde(serialize_with = "sig")]
    pub accuracy: f64,
    #[serde(serialize_with = "sig")]
    pub acc_overlap: f64,
    #[serde(serialize_with = "sig")]
    pub rej_overlap: f64,
    pub unique_ground_state: bool,
}

impl From<&Verdict> for VerdictFields {
    fn from(v: &Verdict) -> Self {
        Self {
            outcome: v.outcome,
            ground_energy: v.ground_energy,
            spectral_gap: v.spectral_gap,
            accuracy: v.accuracy,
            acc_overlap: v.acc_overlap,
            rej_overlap: v.rej_overlap,
            unique_ground_state: v.unique_ground_state,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub target: String,
    pub input: String,
    #[serde(flatten)]
    pub verdict: VerdictFields,
    pub dimension: usize,
    pub qubits: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub membership: Option<Membership>,
    pub tags: Vec<String>,
    #[serde(serialize_with = "sig")]
    pub elapsed_ms: f64,
}

impl RunReport {
    pub fn text(&self) -> String {
        let v = &self.verdict;
        let mut lines = vec![
            format!("target: {}", self.target),
            format!("input: \"{}\"", self.input),
            format!("outcome: {}", v.outcome),
            format!("ground_energy: {}", fmt_sig(v.ground_energy)),
            format!("spectral_gap: {}", fmt_sig(v.spectral_gap)),
            format!("accuracy: {}", fmt_sig(v.accuracy)),
            format!("acc_overlap: {}", fmt_sig(v.acc_overlap)),
            format!("rej_overlap: {}", fmt_sig(v.rej_overlap)),
            format!("unique_ground_state: {}", v.unique_ground_state),
            format!("dimension: {}", self.dimension),
            format!("qubits: {}", self.qubits),
        ];
        if let Some(m) = self.membership {
            lines.push(format!("oracle: {m}"));
        }
        lines.join("\n")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RegisterSchema {
    pub name: String,
    pub labels: Vec<String>,
}

pub fn basis_schema(basis: &BasisIndex) -> Vec<RegisterSchema> {
    basis.registers().iter().map(|r| RegisterSchema { name: r.name.clone(), labels: r.labels.clone() }).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CompileReport {
    pub schema: u32,
    pub target: String,
    pub input: String,
    pub dimension: usize,
    pub qubits: u32,
    pub basis: Vec<RegisterSchema>,
    #[serde(serialize_with = "sig")]
    pub epsilon: f64,
    pub accept: Vec<usize>,
    pub reject: Vec<usize>,
    #[serde(flatten)]
    pub verdict: VerdictFields,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_ini: Option<HamiltonianDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_fin: Option<HamiltonianDoc>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub schema: u32,
    pub target: String,
    pub input: String,
    #[serde(serialize_with = "sig")]
    pub ground_energy: f64,
    #[serde(serialize_with = "sig")]
    pub spectral_gap: f64,
    pub grid: usize,
    #[serde(serialize_with = "sig")]
    pub minimum_gap: f64,
}

impl GapReport {
    pub fn text(&self) -> String {
        [
            format!("target: {}", self.target),
            format!("input: \"{}\"", self.input),
            format!("ground_energy: {}", fmt_sig(self.ground_energy)),
            format!("spectral_gap: {}", fmt_sig(self.spectral_gap)),
            format!("minimum_gap: {} (grid {})", fmt_sig(self.minimum_gap), self.grid),
        ]
        .join("\n")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyRowOut {
    pub input: String,
    pub membership: Membership,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<Outcome>,
    #[serde(flatten, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictFields>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation_holds: Option<bool>,
    pub mismatch: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOut {
    pub schema: u32,
    pub entry: String,
    pub bounds: String,
    pub passed: bool,
    pub checked: usize,
    pub skipped: usize,
    pub mismatches: usize,
    pub degenerate: usize,
    pub expectation_hits: BTreeMap<String, usize>,
    pub rows: Vec<VerifyRowOut>,
}

impl From<&VerifyReport> for VerifyOut {
    fn from(r: &VerifyReport) -> Self {
        let rows = r
            .rows
            .iter()
            .map(|row| VerifyRowOut {
                input: row.input.clone(),
                membership: row.membership,
                expected: row.expected,
                verdict: row.verdict.as_ref().map(VerdictFields::from),
                error: row.error.clone(),
                expectation: row.expectation.as_ref().map(|(l, _)| l.clone()),
                expectation_holds: row.expectation.as_ref().map(|(_, ok)| *ok),
                mismatch: row.is_mismatch(),
            })
            .collect();
        Self {
            schema: SCHEMA_VERSION,
            entry: r.entry.clone(),
            bounds: r.bounds.clone(),
            passed: r.passed(),
            checked: r.rows.len(),
            skipped: r.skipped,
            mismatches: r.mismatches().count(),
            degenerate: r.degenerate().count(),
            expectation_hits: r.expectation_hits.clone(),
            rows,
        }
    }
}

impl VerifyOut {
    pub fn text(&self) -> String {
        let mut lines = vec![format!("entry: {}", self.entry), format!("bounds: {}", self.bounds)];
        if self.checked == 0 {
            lines.push("note: 0 inputs checked".to_string());
        }
        lines.push(format!("checked: {}, skipped (not promised): {}", self.checked, self.skipped));
        for (label, hits) in &self.expectation_hits {
            lines.push(format!("expectation \"{label}\": {hits} inputs"));
        }
        for row in self.rows.iter().filter(|r| r.mismatch) {
            let got = row.verdict.as_ref().map_or_else(|| row.error.clone().unwrap_or_default(), |v| v.outcome.to_string());
            let expected = row.expected.map_or("-".to_string(), |o| o.to_string());
            lines.push(format!("MISMATCH \"{}\": expected {expected}, got {got}", row.input));
        }
        lines.push(format!("degenerate ground states: {}", self.degenerate));
        lines.push(format!("result: {} ({} mismatches)", if self.passed { "pass" } else { "fail" }, self.mismatches));
        lines.join("\n")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GalleryListing {
    pub name: String,
    pub alphabet: String,
    pub orientation: String,
    pub tags: Vec<String>,
    pub notes: String,
}
