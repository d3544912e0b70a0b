use serde::{Deserialize, Serialize};

/// Outcome of one numerical check: `lhs` is the measured side, `rhs` the
/// bound or reference it is held to, `slack` how much room is left.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check_name: String,
    pub instance_spec: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl CheckReport {
    /// Passes iff lhs ≤ rhs.
    pub fn at_most(check_name: impl Into<String>, instance_spec: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        let slack = rhs - lhs;
        Self { check_name: check_name.into(), instance_spec: instance_spec.into(), lhs, rhs, slack, pass: slack >= 0.0 }
    }

    /// Passes iff |lhs − rhs| ≤ tol; slack is tol − |lhs − rhs|.
    pub fn close(check_name: impl Into<String>, instance_spec: impl Into<String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        let slack = tol - (lhs - rhs).abs();
        Self { check_name: check_name.into(), instance_spec: instance_spec.into(), lhs, rhs, slack, pass: slack >= 0.0 }
    }

    /// A boolean property; lhs/rhs are 1/0 and slack is 0 or −1.
    pub fn holds(check_name: impl Into<String>, instance_spec: impl Into<String>, ok: bool) -> Self {
        let lhs = if ok { 1.0 } else { 0.0 };
        Self { check_name: check_name.into(), instance_spec: instance_spec.into(), lhs, rhs: 1.0, slack: lhs - 1.0, pass: ok }
    }
}

pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.pass)
}
