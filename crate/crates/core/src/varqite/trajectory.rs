use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};

pub const TRAJECTORY_HEADER: &str = "iter,tau,energy,delta_theta_norm,lambda,n_deflations,event";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryEvent {
    Step,
    Converged,
    Deflated,
    Rerandomized,
    /// Parameters returned to their initial values (reset mode).
    Reset,
}

impl TrajectoryEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TrajectoryEvent::Step => "step",
            TrajectoryEvent::Converged => "converged",
            TrajectoryEvent::Deflated => "deflated",
            TrajectoryEvent::Rerandomized => "rerandomized",
            TrajectoryEvent::Reset => "reset",
        }
    }
}

impl fmt::Display for TrajectoryEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One CSV row. `iter` counts rows. `energy` is `<H>` without deflation
/// terms; `lambda` and `delta_theta_norm` are NaN where they do not apply.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iter: usize,
    pub tau: f64,
    pub energy: f64,
    pub delta_theta_norm: f64,
    pub lambda: f64,
    pub n_deflations: usize,
    pub event: TrajectoryEvent,
}

/// Header plus one line per record, floats with 17 significant digits.
pub fn trajectory_csv(records: &[TrajectoryRecord]) -> String {
    let mut s = String::with_capacity(96 * (records.len() + 1));
    s.push_str(TRAJECTORY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.iter, r.tau, r.energy, r.delta_theta_norm, r.lambda, r.n_deflations, r.event
        );
    }
    s
}
