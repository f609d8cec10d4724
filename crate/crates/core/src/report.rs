//! Check report records and their text / JSON rendering.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::poisson::BracketKind;

/// How `measured` is compared with `expected`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// `measured < expected` (residuals against a tolerance).
    Below,
    /// `measured == expected` (ranks, counts).
    Equal,
}

impl Comparison {
    pub fn holds(self, measured: f64, expected: f64) -> bool {
        match self {
            Comparison::Below => measured < expected,
            Comparison::Equal => measured == expected,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Comparison::Below => "<",
            Comparison::Equal => "==",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

/// One verified claim. The verdict is derived from the comparison and can
/// not be set independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub anchor: String,
    pub algebra: String,
    pub bracket: Option<BracketKind>,
    pub samples: usize,
    pub seed: u64,
    pub tolerance: Option<f64>,
    pub comparison: Comparison,
    #[serde(serialize_with = "nan_as_null", deserialize_with = "null_as_nan")]
    pub measured: f64,
    pub expected: f64,
    pub verdict: Verdict,
    pub detail: String,
}

fn nan_as_null<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_nan<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Common fields of the reports produced by one check function.
#[derive(Debug, Clone)]
pub struct ReportContext {
    pub algebra: String,
    pub samples: usize,
    pub seed: u64,
}

impl ReportContext {
    /// Residual report: passes iff `measured < tol`.
    pub fn residual(
        &self,
        check: &str,
        anchor: &str,
        bracket: Option<BracketKind>,
        measured: f64,
        tol: f64,
        detail: impl Into<String>,
    ) -> CheckReport {
        CheckReport::new(check, anchor, self, bracket, Some(tol), Comparison::Below, measured, tol, detail)
    }

    /// Exact integer report: passes iff `measured == expected`.
    pub fn exact(
        &self,
        check: &str,
        anchor: &str,
        bracket: Option<BracketKind>,
        measured: usize,
        expected: usize,
        detail: impl Into<String>,
    ) -> CheckReport {
        CheckReport::new(check, anchor, self, bracket, None, Comparison::Equal, measured as f64, expected as f64, detail)
    }
}

impl CheckReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        check: &str,
        anchor: &str,
        ctx: &ReportContext,
        bracket: Option<BracketKind>,
        tolerance: Option<f64>,
        comparison: Comparison,
        measured: f64,
        expected: f64,
        detail: impl Into<String>,
    ) -> Self {
        let verdict = if comparison.holds(measured, expected) { Verdict::Pass } else { Verdict::Fail };
        CheckReport {
            check: check.into(),
            anchor: anchor.into(),
            algebra: ctx.algebra.clone(),
            bracket,
            samples: ctx.samples,
            seed: ctx.seed,
            tolerance,
            comparison,
            measured,
            expected,
            verdict,
            detail: detail.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Recomputes the verdict from the stored numbers.
    pub fn is_consistent(&self) -> bool {
        self.passed() == self.comparison.holds(self.measured, self.expected)
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bracket = self.bracket.map(|b| format!(" [{b}]")).unwrap_or_default();
        let num = |v: f64| match self.comparison {
            Comparison::Equal if v.is_finite() => format!("{v}"),
            _ => format!("{v:.3e}"),
        };
        write!(
            f,
            "{} {} {}{}: measured {} {} {} | {}",
            self.verdict,
            self.check,
            self.algebra,
            bracket,
            num(self.measured),
            self.comparison.symbol(),
            num(self.expected),
            self.anchor
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Parse(format!("unknown report format `{other}` (expected text or json)"))),
        }
    }
}

/// Text: one line per report. JSON: a pretty-printed array.
pub fn emit_report(reports: &[CheckReport], format: ReportFormat) -> String {
    match format {
        ReportFormat::Text => reports.iter().map(|r| format!("{r}\n")).collect(),
        ReportFormat::Json if reports.is_empty() => String::new(),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(reports).expect("reports serialise");
            s.push('\n');
            s
        }
    }
}

pub fn parse_reports(json: &str) -> Result<Vec<CheckReport>> {
    if json.trim().is_empty() {
        return Ok(vec![]);
    }
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> ReportContext {
        ReportContext { algebra: "sl3".into(), samples: 20, seed: 42 }
    }

    #[test]
    fn verdict_follows_comparison() {
        let r = ctx().residual("mcybe", "a", None, 1e-13, 1e-11, "");
        assert!(r.passed());
        let r = ctx().residual("mcybe", "a", None, f64::NAN, 1e-11, "");
        assert!(!r.passed());
        let r = ctx().exact("rank", "a", Some(BracketKind::Linear), 10, 10, "");
        assert!(r.passed());
        let r = ctx().exact("rank", "a", Some(BracketKind::Linear), 12, 10, "");
        assert!(!r.passed() && r.is_consistent());
    }

    #[test]
    fn json_round_trip_with_nan() {
        let reports = vec![
            ctx().residual("casimir", "anchor", None, f64::NAN, 1e-9, "blew up"),
            ctx().exact("rank", "anchor", Some(BracketKind::Quadratic), 4, 4, ""),
        ];
        let text = emit_report(&reports, ReportFormat::Json);
        assert!(text.contains("\"measured\": null"));
        let back = parse_reports(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert!(back[0].measured.is_nan());
        assert_eq!(back[1], reports[1]);
    }

    #[test]
    fn text_is_one_line_per_report() {
        assert_eq!(emit_report(&[], ReportFormat::Text), "");
        assert_eq!(emit_report(&[], ReportFormat::Json), "");
        let r = ctx().exact("rank", "restricted rank is dim g + l", Some(BracketKind::Linear), 9, 10, "");
        let text = emit_report(&[r.clone(), r], ReportFormat::Text);
        assert_eq!(text.lines().count(), 2);
        let line = text.lines().next().unwrap();
        assert!(line.starts_with("FAIL rank sl3 [linear]: measured 9 == 10"));
        assert!(line.contains("restricted rank is dim g + l"));
    }

    #[test]
    fn format_parsing() {
        assert_eq!("json".parse::<ReportFormat>().unwrap(), ReportFormat::Json);
        assert!("yaml".parse::<ReportFormat>().is_err());
    }
}
