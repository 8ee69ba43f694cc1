//! Structured suite reports: one record per checked instance, rendered as
//! aligned text or JSON lines. Reports embed the seed and cap configuration
//! so a run can be reproduced exactly.

use serde::Serialize;

use crate::caps::Caps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Expected-valid instance came out valid (or a property check passed).
    Pass,
    /// Expected-valid instance was refuted: a suite failure.
    Fail,
    /// A classical (not expected to be valid) instance was refuted here.
    Countermodel,
    /// A classical instance happened to be valid on this model.
    HoldsHere,
    /// Enumeration cap exceeded; reported per instance, not a failure.
    CapSkipped,
    /// A hard error while building or evaluating the instance.
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    /// Schema or battery item name.
    pub schema: String,
    /// Concrete instance: formula text or check description.
    pub instance: String,
    /// Model or structure label.
    pub model: String,
    /// Truth value as a sorted point list, when one was computed.
    pub truth_value: Option<Vec<String>>,
    pub verdict: Verdict,
    /// Diagnostic detail for caps and errors.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: Option<u64>,
    pub caps: Caps,
    pub models: usize,
    pub items: Vec<InstanceRecord>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.items
            .iter()
            .filter(|i| i.verdict == Verdict::Pass)
            .count()
    }

    pub fn failed(&self) -> usize {
        self.items
            .iter()
            .filter(|i| matches!(i.verdict, Verdict::Fail | Verdict::Error))
            .count()
    }

    pub fn countermodels(&self) -> usize {
        self.items
            .iter()
            .filter(|i| i.verdict == Verdict::Countermodel)
            .count()
    }

    pub fn skipped(&self) -> usize {
        self.items
            .iter()
            .filter(|i| i.verdict == Verdict::CapSkipped)
            .count()
    }

    /// Suite success: no expected-valid instance failed or errored.
    pub fn ok(&self) -> bool {
        self.failed() == 0
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "suite {} | seed {} | caps {} | models {}\n",
            self.suite,
            self.seed.map_or("-".to_string(), |s| s.to_string()),
            self.caps,
            self.models,
        ));
        let width = self
            .items
            .iter()
            .map(|i| i.schema.len())
            .max()
            .unwrap_or(6)
            .max(6);
        let mwidth = self
            .items
            .iter()
            .map(|i| i.model.len())
            .max()
            .unwrap_or(5)
            .max(5);
        for item in &self.items {
            let verdict = match item.verdict {
                Verdict::Pass => "pass",
                Verdict::Fail => "FAIL",
                Verdict::Countermodel => "countermodel",
                Verdict::HoldsHere => "holds-here",
                Verdict::CapSkipped => "cap-skipped",
                Verdict::Error => "ERROR",
            };
            let tv = item
                .truth_value
                .as_ref()
                .map(|pts| format!("{{{}}}", pts.join(",")))
                .unwrap_or_else(|| "-".to_string());
            out.push_str(&format!(
                "{:width$}  {:mwidth$}  {:12}  {}  {}\n",
                item.schema,
                item.model,
                verdict,
                tv,
                item.instance,
                width = width,
                mwidth = mwidth,
            ));
            if let Some(d) = &item.detail {
                out.push_str(&format!("{:width$}    ({d})\n", "", width = width));
            }
        }
        out.push_str(&format!(
            "summary: {} pass, {} fail, {} countermodel, {} cap-skipped, {} total\n",
            self.passed(),
            self.failed(),
            self.countermodels(),
            self.skipped(),
            self.items.len(),
        ));
        out
    }

    /// One JSON object per line: a header line, then the items.
    pub fn render_json_lines(&self) -> String {
        let mut out = String::new();
        let header = serde_json::json!({
            "suite": self.suite,
            "seed": self.seed,
            "caps": self.caps,
            "models": self.models,
            "pass": self.passed(),
            "fail": self.failed(),
            "countermodels": self.countermodels(),
            "cap_skipped": self.skipped(),
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for item in &self.items {
            out.push_str(&serde_json::to_string(item).expect("records serialize"));
            out.push('\n');
        }
        out
    }
}
