use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const P_THRESHOLD: f64 = 0.01;
pub const Z_THRESHOLD: f64 = 4.0;

/// One criterion inside a report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub label: String,
    pub statistic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    /// Accepted range for `statistic` when the criterion is an interval.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bounds: Option<[f64; 2]>,
    pub threshold: f64,
    pub pass: bool,
}

impl Component {
    /// Passes when `p > 0.01`.
    pub fn p(label: impl Into<String>, statistic: f64, p_value: f64) -> Self {
        Self {
            label: label.into(),
            statistic,
            p_value: Some(p_value),
            z_score: None,
            bounds: None,
            threshold: P_THRESHOLD,
            pass: p_value > P_THRESHOLD,
        }
    }

    /// Passes when `|z| < 4`.
    pub fn z(label: impl Into<String>, statistic: f64, z: f64) -> Self {
        Self {
            label: label.into(),
            statistic,
            p_value: None,
            z_score: Some(z),
            bounds: None,
            threshold: Z_THRESHOLD,
            pass: z.abs() < Z_THRESHOLD,
        }
    }

    /// Passes when `lo <= value <= hi`.
    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            statistic: value,
            p_value: None,
            z_score: None,
            bounds: Some([lo, hi]),
            threshold: 0.0,
            pass: value >= lo && value <= hi,
        }
    }

    /// Passes when `|value − reference| < tol·|reference|`; the statistic is the relative error.
    pub fn rel_err(label: impl Into<String>, value: f64, reference: f64, tol: f64) -> Self {
        let err = ((value - reference) / reference).abs();
        Self {
            label: label.into(),
            statistic: err,
            p_value: None,
            z_score: None,
            bounds: None,
            threshold: tol,
            pass: err < tol,
        }
    }

    /// A yes/no property; the statistic counts violations.
    pub fn holds(label: impl Into<String>, violations: u64) -> Self {
        Self {
            label: label.into(),
            statistic: violations as f64,
            p_value: None,
            z_score: None,
            bounds: None,
            threshold: 0.0,
            pass: violations == 0,
        }
    }
}

/// Outcome of one named check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub z_score: Option<f64>,
    pub threshold: f64,
    /// Whether every criterion held.
    pub pass: bool,
    /// Set for checks that are supposed to fail; they guard against vacuous passes.
    pub negative_control: bool,
    pub n_replicates: u64,
    pub n_grid: u64,
    /// Seed of the replicate streams; rerunning the check with it reproduces the report.
    pub master_seed: u64,
    pub notes: String,
    pub components: Vec<Component>,
}

impl TestReport {
    pub fn new(name: impl Into<String>, components: Vec<Component>, n_replicates: u64, n_grid: u64, master_seed: u64) -> Self {
        let pass = components.iter().all(|c| c.pass);
        let lead = components
            .iter()
            .find(|c| !c.pass)
            .or_else(|| components.first())
            .cloned();
        let (statistic, threshold) = lead.as_ref().map_or((f64::NAN, f64::NAN), |c| (c.statistic, c.threshold));
        let p_value = components
            .iter()
            .filter_map(|c| c.p_value)
            .min_by(f64::total_cmp);
        let z_score = components
            .iter()
            .filter_map(|c| c.z_score)
            .max_by(|a, b| a.abs().total_cmp(&b.abs()));
        Self {
            name: name.into(),
            statistic,
            p_value,
            z_score,
            threshold,
            pass,
            negative_control: false,
            n_replicates,
            n_grid,
            master_seed,
            notes: String::new(),
            components,
        }
    }

    pub fn negative_control(mut self) -> Self {
        self.negative_control = true;
        self
    }

    pub fn with_note(mut self, note: impl AsRef<str>) -> Self {
        if !self.notes.is_empty() {
            self.notes.push_str("; ");
        }
        self.notes.push_str(note.as_ref());
        self
    }

    /// Passed, or failed as a negative control should.
    pub fn as_expected(&self) -> bool {
        self.pass != self.negative_control
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("reports serialize")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

/// Fixed-width table of reports, one line per check and one per component.
pub fn summary_table(reports: &[TestReport]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<44} {:>11} {:>9} {:>9} {:>8} {:>9}  result",
        "check", "statistic", "p", "z", "reps", "grid"
    );
    for r in reports {
        let verdict = match (r.pass, r.negative_control) {
            (true, false) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "PASS (control failed as designed)",
            (true, true) => "FAIL (control did not fail)",
        };
        let _ = writeln!(
            s,
            "{:<44} {:>11.4e} {:>9} {:>9} {:>8} {:>9}  {verdict}",
            r.name,
            r.statistic,
            fmt_opt(r.p_value),
            fmt_opt(r.z_score),
            r.n_replicates,
            r.n_grid
        );
        for c in &r.components {
            let _ = writeln!(
                s,
                "  {:<42} {:>11.4e} {:>9} {:>9} {:>18}  {}",
                c.label,
                c.statistic,
                fmt_opt(c.p_value),
                fmt_opt(c.z_score),
                c.bounds.map_or(String::new(), |[lo, hi]| format!("[{lo}, {hi}]")),
                if c.pass { "ok" } else { "x" }
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_follows_components() {
        let r = TestReport::new("demo", vec![Component::p("a", 0.1, 0.5), Component::z("b", 1.0, -5.0)], 10, 4, 1);
        assert!(!r.pass);
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, Some(0.5));
        assert_eq!(r.z_score, Some(-5.0));
        assert!(!r.as_expected());
        assert!(r.clone().negative_control().as_expected());
        assert!(Component::within("d", 1.05, 0.9, 1.1).pass);
        assert!(!Component::rel_err("e", 1.03, 1.0, 0.02).pass);
    }

    #[test]
    fn json_line_round_trip() {
        let r = TestReport::new("demo", vec![Component::holds("h", 0)], 1, 2, 3).with_note("x");
        let line = r.to_json_line();
        assert!(!line.contains('\n'));
        let back: TestReport = serde_json::from_str(&line).unwrap();
        assert_eq!(back.name, "demo");
        assert!(back.pass);
        assert!(summary_table(&[r]).contains("PASS"));
    }
}
