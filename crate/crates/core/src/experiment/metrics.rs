//! Metrics rows and CSV emission.

use std::fmt;
use std::io::Write;

use crate::contact::ContactEvent;
use crate::error::Result;

pub const METRICS_HEADER: &str =
    "sim_time_s,event,round_index,satellite_id,staleness,test_accuracy,test_loss,global_grad_norm_proxy";
pub const WINDOWS_HEADER: &str = "satellite_id,start_s,end_s";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Visit,
    Aggregate,
    Eval,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::Visit => "visit",
            EventKind::Aggregate => "aggregate",
            EventKind::Eval => "eval",
        })
    }
}

/// One line of the run log. Absent fields are written as `-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub sim_time_s: f64,
    pub event: EventKind,
    pub round_index: u64,
    pub satellite_id: Option<usize>,
    pub staleness: Option<u64>,
    pub test_accuracy: Option<f64>,
    pub test_loss: Option<f64>,
    /// `‖W^{i+1} − W^i‖` on aggregate rows.
    pub step_norm: Option<f64>,
}

impl MetricsRow {
    pub(crate) fn new(sim_time_s: f64, event: EventKind, round_index: u64) -> Self {
        Self {
            sim_time_s,
            event,
            round_index,
            satellite_id: None,
            staleness: None,
            test_accuracy: None,
            test_loss: None,
            step_norm: None,
        }
    }
}

fn int_or_missing<I: fmt::Display>(v: Option<I>) -> String {
    v.map_or_else(|| "-1".to_string(), |x| x.to_string())
}

fn real_or_missing(v: Option<f64>) -> String {
    format!("{:.6}", v.unwrap_or(-1.0))
}

pub fn write_metrics_csv(rows: &[MetricsRow], mut out: impl Write) -> Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.6},{},{},{},{},{},{},{}",
            r.sim_time_s,
            r.event,
            r.round_index,
            int_or_missing(r.satellite_id),
            int_or_missing(r.staleness),
            real_or_missing(r.test_accuracy),
            real_or_missing(r.test_loss),
            real_or_missing(r.step_norm),
        )?;
    }
    Ok(())
}

pub fn write_windows_csv(windows: &[ContactEvent<f64>], mut out: impl Write) -> Result<()> {
    writeln!(out, "{WINDOWS_HEADER}")?;
    for w in windows {
        writeln!(out, "{},{:.6},{:.6}", w.satellite_id, w.start_s, w.end_s)?;
    }
    Ok(())
}
