//! Certification reports and witnesses.
//!
//! Every check returns a [`CertReport`]. A report never claims more than the
//! evidence supports: the positive status is literally named
//! `certified_on_samples`, and a refutation always carries a [`Witness`]
//! whose violation margin can be recomputed independently from the reported
//! sample alone.

use crate::plan::SamplingPlan;
use serde::{Deserialize, Serialize};

/// Outcome of a check or a verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every sampled instance of the defining inequality held (within
    /// tolerance). Not a proof: the quantifiers were discretized.
    CertifiedOnSamples,
    /// A concrete sample violated a definition or a hypothesis; see the
    /// witness.
    Refuted,
    /// All hypotheses of a verified statement certified on the samples, yet
    /// its conclusion was refuted on the same samples. Either the tolerance
    /// model broke down or the implementation disagrees with the statement,
    /// so this is reported louder than an ordinary refutation.
    TheoremViolation,
}

impl Status {
    pub fn is_certified(self) -> bool {
        matches!(self, Status::CertifiedOnSamples)
    }

    /// Process exit code mandated for this status: 0 certified, 2 refuted,
    /// 3 theorem violation.
    pub fn exit_code(self) -> i32 {
        match self {
            Status::CertifiedOnSamples => 0,
            Status::Refuted => 2,
            Status::TheoremViolation => 3,
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Status::CertifiedOnSamples => "certified-on-samples",
            Status::Refuted => "refuted",
            Status::TheoremViolation => "theorem-violation",
        };
        f.write_str(s)
    }
}

/// A concrete violating sample.
///
/// The interpretation of `lhs` and `rhs` depends on the property: for the
/// path inequalities they are the two sides of the defining inequality, for
/// gradient characterizations `lhs` is the directional term and `rhs` the
/// function difference, for set membership `lhs` is the worst constraint
/// value and `rhs` its tolerance. In every case `margin > 0` quantifies how
/// badly the sample violates the property and is recomputable from
/// `(s, t, alpha, lambda)` and the problem data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    /// Position of the sample in the plan's deterministic enumeration.
    pub sample_index: u64,
}

/// Result of one check, possibly with staged sub-results.
///
/// Serialization field order is fixed by declaration order below; together
/// with the deterministic scan this makes `--json` output byte-identical
/// across runs and thread counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    /// What was checked, e.g. `"qsep"` or `"suite:sup_family"`.
    pub property: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
    /// Number of sampled instances of the defining inequality evaluated.
    pub samples_checked: u64,
    /// Base relative tolerance; each inequality scales it by
    /// `max(1, |lhs|, |rhs|)`.
    pub tolerance: f64,
    pub plan: SamplingPlan,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub sub_reports: Vec<CertReport>,
}

impl CertReport {
    pub fn certified(property: impl Into<String>, samples_checked: u64, tolerance: f64, plan: SamplingPlan) -> Self {
        CertReport {
            property: property.into(),
            status: Status::CertifiedOnSamples,
            witness: None,
            samples_checked,
            tolerance,
            plan,
            notes: Vec::new(),
            sub_reports: Vec::new(),
        }
    }

    pub fn refuted(
        property: impl Into<String>,
        witness: Witness,
        samples_checked: u64,
        tolerance: f64,
        plan: SamplingPlan,
    ) -> Self {
        CertReport {
            property: property.into(),
            status: Status::Refuted,
            witness: Some(witness),
            samples_checked,
            tolerance,
            plan,
            notes: Vec::new(),
            sub_reports: Vec::new(),
        }
    }

    pub fn is_certified(&self) -> bool {
        self.status.is_certified()
    }

    pub fn push_note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.push_note(note);
        self
    }

    /// Relabels the property, typically to tag a stage inside a suite.
    pub fn labeled(mut self, property: impl Into<String>) -> Self {
        self.property = property.into();
        self
    }

    /// Stable, human-readable JSON encoding of the report.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// One line per report node, indented by stage depth.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, 0);
        out
    }

    fn render_into(&self, out: &mut String, depth: usize) {
        use std::fmt::Write as _;
        let pad = "  ".repeat(depth);
        let _ = write!(out, "{pad}{:<28} {}", self.property, self.status);
        if let Some(w) = &self.witness {
            let _ = write!(
                out,
                "  witness s={:?} t={:?} alpha={} lambda={} lhs={} rhs={} margin={:.3e}",
                w.s, w.t, w.alpha, w.lambda, w.lhs, w.rhs, w.margin
            );
        }
        let _ = writeln!(out, "  [{} samples]", self.samples_checked);
        for note in &self.notes {
            let _ = writeln!(out, "{pad}  note: {note}");
        }
        for sub in &self.sub_reports {
            sub.render_into(out, depth + 1);
        }
    }
}
