//! Check records and the JSON report envelope.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "1.0";

/// JSON schema of [`Report`].
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// abs_err ≤ tol
    Abs,
    /// rel_err ≤ tol
    Rel,
    /// abs_err ≤ tol or rel_err ≤ tol
    Either,
    /// computed ≤ reference; abs_err is the excess
    UpperBound,
    /// computed ≥ reference; abs_err is the shortfall
    LowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_id: String,
    pub paper_ref: String,
    #[serde(with = "nullable")]
    pub computed: f64,
    pub reference: Option<f64>,
    #[serde(with = "nullable")]
    pub abs_err: f64,
    #[serde(with = "nullable")]
    pub rel_err: f64,
    pub tol: f64,
    pub mode: Mode,
    pub pass: bool,
    pub metadata: BTreeMap<String, String>,
}

// non-finite values travel as null
mod nullable {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl CheckReport {
    pub fn compare(id: impl Into<String>, paper_ref: &str, computed: f64, reference: f64, tol: f64, mode: Mode) -> Self {
        let (abs_err, rel_err) = match mode {
            Mode::UpperBound | Mode::LowerBound => {
                let d = if mode == Mode::UpperBound { computed - reference } else { reference - computed };
                let e = d.max(0.0);
                (e, if e == 0.0 { 0.0 } else { e / reference.abs() })
            }
            _ => {
                let e = (computed - reference).abs();
                (e, if reference == 0.0 { if e == 0.0 { 0.0 } else { f64::INFINITY } } else { e / reference.abs() })
            }
        };
        let mut r = CheckReport {
            check_id: id.into(),
            paper_ref: paper_ref.to_string(),
            computed,
            reference: Some(reference),
            abs_err,
            rel_err,
            tol,
            mode,
            pass: false,
            metadata: BTreeMap::new(),
        };
        r.pass = r.passes_rule();
        r
    }

    pub fn upper_bound(id: impl Into<String>, paper_ref: &str, computed: f64, limit: f64, slack: f64) -> Self {
        Self::compare(id, paper_ref, computed, limit, slack, Mode::UpperBound)
    }

    pub fn lower_bound(id: impl Into<String>, paper_ref: &str, computed: f64, limit: f64, slack: f64) -> Self {
        Self::compare(id, paper_ref, computed, limit, slack, Mode::LowerBound)
    }

    /// A check whose computation raised an error.
    pub fn errored(id: impl Into<String>, paper_ref: &str, err: &Error) -> Self {
        let mut r = CheckReport {
            check_id: id.into(),
            paper_ref: paper_ref.to_string(),
            computed: f64::NAN,
            reference: None,
            abs_err: f64::NAN,
            rel_err: f64::NAN,
            tol: 0.0,
            mode: Mode::Abs,
            pass: false,
            metadata: BTreeMap::new(),
        };
        r.metadata.insert("error".into(), err.to_string());
        r
    }

    fn passes_rule(&self) -> bool {
        let (a, r) = (self.abs_err <= self.tol, self.rel_err <= self.tol);
        self.computed.is_finite()
            && match self.mode {
                Mode::Abs | Mode::UpperBound | Mode::LowerBound => a,
                Mode::Rel => r,
                Mode::Either => a || r,
            }
    }

    pub fn meta(mut self, key: &str, value: impl ToString) -> Self {
        self.metadata.insert(key.to_string(), value.to_string());
        self
    }

    /// Non-convergence forces a failure regardless of the error.
    pub fn converged(mut self, ok: bool) -> Self {
        self.metadata.insert("converged".into(), ok.to_string());
        if !ok {
            self.pass = false;
        }
        self
    }

    /// Re-evaluates `pass` under a different tolerance.
    pub fn with_tol(mut self, tol: f64) -> Self {
        let conv = self.metadata.get("converged").map(|v| v == "true").unwrap_or(true);
        self.tol = tol;
        self.pass = self.passes_rule() && conv && !self.metadata.contains_key("error");
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<P> {
    pub schema_version: String,
    pub suite: String,
    pub params: P,
    pub checks: Vec<CheckReport>,
}

impl<P: Serialize> Report<P> {
    pub fn new(suite: &str, params: P, mut checks: Vec<CheckReport>) -> Self {
        checks.sort_by(|a, b| a.check_id.cmp(&b.check_id));
        Report { schema_version: SCHEMA_VERSION.into(), suite: suite.into(), params, checks }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Validation(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Flat CSV: one row per check.
    pub fn to_csv(&self) -> Result<String> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        wr.write_record(["check_id", "computed", "reference", "abs_err", "rel_err", "tol", "mode", "pass"]).map_err(io)?;
        let f = |v: f64| if v.is_finite() { crate::counterexamples::fmt17(v) } else { String::new() };
        for c in &self.checks {
            let mode = serde_json::to_value(c.mode).map_err(|e| Error::Validation(e.to_string()))?;
            wr.write_record([
                c.check_id.clone(),
                f(c.computed),
                c.reference.map(f).unwrap_or_default(),
                f(c.abs_err),
                f(c.rel_err),
                f(c.tol),
                mode.as_str().unwrap_or_default().to_string(),
                c.pass.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = wr.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_rules() {
        assert!(CheckReport::compare("a", "", 1.0005, 1.0, 1e-3, Mode::Abs).pass);
        assert!(!CheckReport::compare("a", "", 1.01, 1.0, 1e-3, Mode::Abs).pass);
        assert!(CheckReport::compare("a", "", 1001.0, 1000.0, 1e-3, Mode::Rel).pass);
        assert!(CheckReport::compare("a", "", 1001.0, 1000.0, 1e-3, Mode::Either).pass);
        assert!(CheckReport::upper_bound("a", "", 0.5, 1.0, 0.0).pass);
        let b = CheckReport::upper_bound("a", "", 1.5, 1.0, 0.0);
        assert!(!b.pass && b.abs_err == 0.5);
        assert!(CheckReport::lower_bound("a", "", 12.0, 10.0, 0.0).pass);
        assert!(!CheckReport::lower_bound("a", "", 9.0, 10.0, 0.0).pass);
        assert!(!CheckReport::compare("a", "", f64::NAN, 1.0, 1.0, Mode::Abs).pass);
    }

    #[test]
    fn non_convergence_fails() {
        let r = CheckReport::compare("a", "", 1.0, 1.0, 1e-3, Mode::Abs).converged(false);
        assert!(!r.pass);
        assert!(!r.clone().with_tol(1.0).pass);
    }

    #[test]
    fn json_roundtrip_and_order() {
        let checks = vec![
            CheckReport::compare("z.last", "x", 2.0, 1.0, 0.1, Mode::Abs),
            CheckReport::errored("a.first", "y", &Error::Domain("bad".into())),
        ];
        let r = Report::new("demo", serde_json::json!({"n": 2}), checks);
        assert_eq!(r.checks[0].check_id, "a.first");
        assert!(!r.all_pass());
        let s = r.to_json().unwrap();
        assert!(s.contains("\"computed\": null"));
        let back: Report<serde_json::Value> = serde_json::from_str(&s).unwrap();
        assert_eq!(back.checks[1], r.checks[1]);
        assert!(back.checks[0].computed.is_nan());
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn schema_is_valid_json() {
        let v: serde_json::Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
        assert_eq!(v["properties"]["schema_version"]["const"], SCHEMA_VERSION);
    }
}
