//! Verdict reports: one `check,value,threshold,verdict` line per check.

use serde::Serialize;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
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

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub value: f64,
    pub threshold: String,
    pub verdict: Verdict,
}

fn verdict(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

impl Check {
    /// `value <= threshold`.
    pub fn at_most(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            check: check.into(),
            value,
            threshold: format!("<={threshold:e}"),
            verdict: verdict(value <= threshold),
        }
    }

    /// `value >= threshold`.
    pub fn at_least(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            check: check.into(),
            value,
            threshold: format!(">={threshold:e}"),
            verdict: verdict(value >= threshold),
        }
    }

    /// `value > threshold`.
    pub fn above(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            check: check.into(),
            value,
            threshold: format!(">{threshold:e}"),
            verdict: verdict(value > threshold),
        }
    }

    /// `value < threshold`.
    pub fn below(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        Check {
            check: check.into(),
            value,
            threshold: format!("<{threshold:e}"),
            verdict: verdict(value < threshold),
        }
    }

    /// `lo <= value <= hi`.
    pub fn within(check: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Check {
            check: check.into(),
            value,
            threshold: format!("[{lo};{hi}]"),
            verdict: verdict(value >= lo && value <= hi),
        }
    }

    /// A boolean property; the value is 1 when it holds.
    pub fn holds(check: impl Into<String>, ok: bool) -> Self {
        Check {
            check: check.into(),
            value: if ok { 1.0 } else { 0.0 },
            threshold: "==1".into(),
            verdict: verdict(ok),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn line(&self) -> String {
        format!("{},{:.6e},{},{}", self.check, self.value, self.threshold, self.verdict)
    }
}

/// A titled list of checks with free-form notes.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub title: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Report {
            title: title.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, c: Check) -> &mut Self {
        self.checks.push(c);
        self
    }

    pub fn note(&mut self, n: impl Into<String>) -> &mut Self {
        self.notes.push(n.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// Header, one line per check, then `# `-prefixed notes.
    pub fn render(&self) -> String {
        let mut s = format!("# {}\ncheck,value,threshold,verdict\n", self.title);
        for c in &self.checks {
            s.push_str(&c.line());
            s.push('\n');
        }
        for n in &self.notes {
            s.push_str("# ");
            s.push_str(n);
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lines_and_verdicts() {
        let mut r = Report::new("demo");
        r.push(Check::at_most("err", 0.01, 0.05)).push(Check::within("beta", 0.6, 0.45, 0.55));
        assert!(!r.passed());
        let text = r.render();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "check,value,threshold,verdict");
        assert_eq!(lines[2], "err,1.000000e-2,<=5e-2,PASS");
        assert_eq!(lines[3], "beta,6.000000e-1,[0.45;0.55],FAIL");
        assert!(Check::holds("x", true).passed());
    }
}
