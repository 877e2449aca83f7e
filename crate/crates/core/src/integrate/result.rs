//! Certified integral values and their traces.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bodies::AxisBox;
use crate::error::Error;
use crate::spaces::analysis::Evidence;
use crate::spaces::MeasurableSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Gould,
    BirkhoffSimple,
    #[serde(rename = "mcshane")]
    McShane,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Gould, Method::BirkhoffSimple, Method::McShane];

    pub fn name(self) -> &'static str {
        match self {
            Method::Gould => "gould",
            Method::BirkhoffSimple => "birkhoff-simple",
            Method::McShane => "mcshane",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownId { kind: "method", id: s.to_string() })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Status {
    Converged,
    Diverged,
    Inconclusive,
}

/// One Riemann-type sum visited by an integrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TraceEntry {
    pub partition: String,
    pub sum: AxisBox,
    /// `h(sum, value)`; for certified windows the worst `h` over the window
    /// and tag draws plus the tail bound.
    pub h_to_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tag_oscillation: Option<f64>,
    /// `M * μ(tail)` for truncated countable partitions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
}

/// How a value was certified.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub evidence: Option<Evidence>,
    /// Trace index after which every entry is within `errorBound` of the value.
    pub stabilization_index: Option<usize>,
    pub partitions_checked: usize,
    pub tag_draws: usize,
    /// Worst `h` to the value seen during certification.
    pub worst_h: f64,
    /// Truncation `N` chosen by the tail rule on the stabilized partition.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    /// Worst `h` between a free-tag sum and the sum of its glued univocal version.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub univocal_agreement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub free_tags: Option<bool>,
    /// Value of an auxiliary integral the certificate builds on.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<AxisBox>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct IntegralResult {
    pub method: Method,
    pub multifunction: String,
    pub set_function: String,
    pub domain: MeasurableSet,
    pub tol: f64,
    pub seed: u64,
    pub value: AxisBox,
    pub status: Status,
    pub error_bound: f64,
    pub tag_oscillation: f64,
    /// Refinement depth at which the value was taken.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    pub trace: Vec<TraceEntry>,
    pub certificate: Certificate,
}

impl IntegralResult {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    /// Every trace entry past the stabilization index is within `errorBound`.
    pub fn trace_is_consistent(&self) -> bool {
        if !self.converged() {
            return true;
        }
        let from = self.certificate.stabilization_index.unwrap_or(0);
        self.trace.iter().skip(from).all(|e| e.h_to_value <= self.error_bound)
    }
}
