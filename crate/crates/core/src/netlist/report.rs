//! Structured analysis reports.
//!
//! The JSON report is the second stable file interface next to the netlist
//! text format. Every report carries a `version` field and a `kind` tag;
//! the remaining fields depend on the kind. Serialization is deterministic:
//! identical inputs produce byte-identical reports. Timing is attached only
//! on request, because wall-clock values would break that guarantee.

use serde::Serialize;

use crate::fixedpoint::{ConsistencyReport, Verdict};

pub const REPORT_VERSION: u32 = 1;

/// Payload of a report, tagged by `kind` in the serialized form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportBody {
    /// A netlist parsed and validated.
    Validate { inputs: usize, outputs: usize, gates: usize },
    /// A circuit closed over its identified boundary.
    Close { state_width: usize },
    /// A fixed-point analysis of a closed circuit.
    Consistency {
        verdict: String,
        engine: String,
        state_width: usize,
        states_examined: u64,
        #[serde(skip_serializing_if = "Option::is_none")]
        fixed_point: Option<String>,
        #[serde(skip_serializing_if = "Vec::is_empty")]
        counterexamples: Vec<String>,
        /// Explicit enumeration, present when a listing was requested.
        #[serde(skip_serializing_if = "Option::is_none")]
        fixed_points: Option<Vec<String>>,
    },
    /// An accept/reject run of a decision circuit.
    Decision { accepted: bool, witness: String },
    /// A factoring run.
    Factorization {
        n: u64,
        mode: String,
        status: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        factors: Option<Vec<(u64, u32)>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        display: Option<String>,
    },
    /// A process-function consistency check.
    CtcCheck {
        parties: usize,
        verdict: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        violation_kind: Option<String>,
        /// Value tables of the first violating joint operation, one row
        /// per party, entry `i` holding the output for input `i`.
        #[serde(skip_serializing_if = "Option::is_none")]
        operations: Option<Vec<Vec<u64>>>,
    },
    /// A sweep for a consistent process function without a fixed order.
    CtcSearch {
        parties: usize,
        bits_per_party: usize,
        found: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        table: Option<Vec<u64>>,
    },
    /// A generated construction, carrying its netlist document.
    Construct {
        construction: String,
        instance: String,
        state_width: usize,
        netlist: String,
    },
}

/// A versioned report envelope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub version: u32,
    #[serde(flatten)]
    pub body: ReportBody,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

/// Report-layer verdict labels.
fn verdict_label(verdict: &Verdict) -> &'static str {
    match verdict {
        Verdict::Consistent { .. } => "consistent",
        Verdict::NoFixedPoint => "no_fixed_point",
        Verdict::MultipleFixedPoints { .. } => "multiple",
    }
}

impl Report {
    pub fn new(body: ReportBody) -> Self {
        Report { version: REPORT_VERSION, body, timing_ms: None }
    }

    pub fn with_timing(mut self, elapsed_ms: u64) -> Self {
        self.timing_ms = Some(elapsed_ms);
        self
    }

    /// Wraps an engine verdict, optionally with an explicit enumeration.
    pub fn from_consistency(
        report: &ConsistencyReport,
        fixed_points: Option<Vec<String>>,
    ) -> Self {
        let (fixed_point, counterexamples) = match &report.verdict {
            Verdict::Consistent { fixed_point } => (Some(fixed_point.to_string()), vec![]),
            Verdict::NoFixedPoint => (None, vec![]),
            Verdict::MultipleFixedPoints { first, second } => {
                (None, vec![first.to_string(), second.to_string()])
            }
        };
        Report::new(ReportBody::Consistency {
            verdict: verdict_label(&report.verdict).to_string(),
            engine: report.engine.name().to_string(),
            state_width: report.state_width,
            states_examined: report.states_examined,
            fixed_point,
            counterexamples,
            fixed_points,
        })
    }

    /// The canonical JSON document, newline terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Key/value lines for terminal reading. Construction reports render as
    /// their netlist document so the output can be piped straight back in.
    pub fn render_text(&self) -> String {
        fn push(out: &mut String, k: &str, v: &str) {
            out.push_str(k);
            out.push_str(": ");
            out.push_str(v);
            out.push('\n');
        }
        let mut out = String::new();
        let line = |out: &mut String, k: &str, v: &str| push(out, k, v);
        match &self.body {
            ReportBody::Validate { inputs, outputs, gates } => {
                line(&mut out, "inputs", &inputs.to_string());
                line(&mut out, "outputs", &outputs.to_string());
                line(&mut out, "gates", &gates.to_string());
            }
            ReportBody::Close { state_width } => {
                line(&mut out, "state_width", &state_width.to_string());
            }
            ReportBody::Consistency {
                verdict,
                engine,
                state_width,
                states_examined,
                fixed_point,
                counterexamples,
                fixed_points,
            } => {
                line(&mut out, "verdict", verdict);
                line(&mut out, "engine", engine);
                line(&mut out, "state_width", &state_width.to_string());
                line(&mut out, "states_examined", &states_examined.to_string());
                if let Some(fp) = fixed_point {
                    line(&mut out, "fixed_point", fp);
                }
                if !counterexamples.is_empty() {
                    line(&mut out, "counterexamples", &counterexamples.join(", "));
                }
                if let Some(fps) = fixed_points {
                    line(&mut out, "fixed_points", &fps.join(", "));
                }
            }
            ReportBody::Decision { accepted, witness } => {
                line(&mut out, "accepted", if *accepted { "true" } else { "false" });
                line(&mut out, "witness", witness);
            }
            ReportBody::Factorization { n, mode, status, display, .. } => {
                line(&mut out, "n", &n.to_string());
                line(&mut out, "mode", mode);
                line(&mut out, "status", status);
                if let Some(d) = display {
                    line(&mut out, "factorization", d);
                }
            }
            ReportBody::CtcCheck { parties, verdict, violation_kind, operations } => {
                line(&mut out, "parties", &parties.to_string());
                line(&mut out, "verdict", verdict);
                if let Some(kind) = violation_kind {
                    line(&mut out, "violation_kind", kind);
                }
                if let Some(ops) = operations {
                    for (j, table) in ops.iter().enumerate() {
                        let row: Vec<String> = table.iter().map(u64::to_string).collect();
                        line(&mut out, &format!("operation {j}"), &row.join(" "));
                    }
                }
            }
            ReportBody::CtcSearch { parties, bits_per_party, found, table } => {
                line(&mut out, "parties", &parties.to_string());
                line(&mut out, "bits_per_party", &bits_per_party.to_string());
                line(&mut out, "found", if *found { "true" } else { "false" });
                if let Some(t) = table {
                    let row: Vec<String> = t.iter().map(u64::to_string).collect();
                    line(&mut out, "table", &row.join(" "));
                }
            }
            ReportBody::Construct { netlist, .. } => {
                out.push_str(netlist);
            }
        }
        if let Some(ms) = self.timing_ms {
            line(&mut out, "timing_ms", &ms.to_string());
        }
        out
    }
}
