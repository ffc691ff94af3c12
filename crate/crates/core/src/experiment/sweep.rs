//! Multi-strategy, multi-seed comparisons over one shared visit schedule.

use std::io::Write;

use rayon::prelude::*;

use crate::error::Result;
use crate::strategies::StrategyKind;

use super::config::RunConfig;
use super::run::{run_with_schedule, RunOutput, Schedule};

/// One column of a sweep: a strategy, optionally with its own epoch count.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepArm {
    pub label: String,
    pub strategy: StrategyKind,
    pub epochs: Option<usize>,
}

impl SweepArm {
    pub fn new(strategy: StrategyKind) -> Self {
        Self {
            label: strategy.to_string(),
            strategy,
            epochs: None,
        }
    }

    pub fn with_epochs(strategy: StrategyKind, epochs: usize) -> Self {
        Self {
            label: format!("{strategy}/E={epochs}"),
            strategy,
            epochs: Some(epochs),
        }
    }

    pub fn config_for(&self, base: &RunConfig, seed: u64) -> RunConfig {
        let mut cfg = base.clone();
        cfg.seed = seed;
        cfg.fl.strategy = self.strategy;
        if let Some(e) = self.epochs {
            cfg.trainer.epochs = e;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_accuracy: f64,
    pub final_loss: f64,
    pub aggregations: u64,
    pub time_to_target_s: Option<f64>,
    pub truncated: bool,
}

impl RunSummary {
    pub fn from_output(out: &RunOutput, target: f64) -> Self {
        Self {
            final_accuracy: out.final_eval.accuracy,
            final_loss: out.final_eval.loss,
            aggregations: out.aggregations,
            time_to_target_s: out.time_to_accuracy(target),
            truncated: out.truncated,
        }
    }
}

/// Outcome of one `(arm, seed)` run; failures are kept as their error text.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub label: String,
    pub seed: u64,
    pub result: std::result::Result<RunSummary, String>,
}

/// Mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self {
            mean,
            std,
            count: values.len(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmSummary {
    pub arm: SweepArm,
    pub runs: usize,
    pub failures: usize,
    pub final_accuracy: Option<Stat>,
    pub aggregations: Option<Stat>,
    /// Over the runs that reached the target only.
    pub time_to_target_s: Option<Stat>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub target_accuracy: f64,
    pub arms: Vec<ArmSummary>,
    pub cells: Vec<SweepCell>,
}

impl SweepReport {
    pub fn arm(&self, label: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.arm.label == label)
    }
}

/// Runs every arm on every seed, in parallel, over one schedule computed from
/// `base`. A failing run is recorded in its cell and does not stop the sweep.
pub fn compare_sweep(base: &RunConfig, arms: &[SweepArm], seeds: &[u64], target_accuracy: f64) -> Result<SweepReport> {
    if seeds.is_empty() {
        return Err(crate::Error::config("seeds", "sweep needs at least one seed"));
    }
    if arms.is_empty() {
        return Err(crate::Error::config("strategies", "sweep needs at least one strategy"));
    }
    base.validate()?;
    let schedule = Schedule::from_config(base)?;

    let jobs: Vec<(&SweepArm, u64)> = arms.iter().flat_map(|a| seeds.iter().map(move |&s| (a, s))).collect();
    let cells: Vec<SweepCell> = jobs
        .par_iter()
        .map(|&(arm, seed)| SweepCell {
            label: arm.label.clone(),
            seed,
            result: run_with_schedule(&arm.config_for(base, seed), &schedule)
                .map(|out| RunSummary::from_output(&out, target_accuracy))
                .map_err(|e| format!("{}: {e}", e.code())),
        })
        .collect();

    let arms = arms
        .iter()
        .map(|arm| {
            let mine: Vec<&SweepCell> = cells.iter().filter(|c| c.label == arm.label).collect();
            let ok: Vec<&RunSummary> = mine.iter().filter_map(|c| c.result.as_ref().ok()).collect();
            let acc: Vec<f64> = ok.iter().map(|r| r.final_accuracy).collect();
            let aggs: Vec<f64> = ok.iter().map(|r| r.aggregations as f64).collect();
            let ttt: Vec<f64> = ok.iter().filter_map(|r| r.time_to_target_s).collect();
            ArmSummary {
                arm: arm.clone(),
                runs: mine.len(),
                failures: mine.len() - ok.len(),
                final_accuracy: Stat::of(&acc),
                aggregations: Stat::of(&aggs),
                time_to_target_s: Stat::of(&ttt),
            }
        })
        .collect();

    Ok(SweepReport {
        target_accuracy,
        arms,
        cells,
    })
}

pub const SUMMARY_HEADER: &str = "label,strategy,epochs,runs,failed,final_acc_mean,final_acc_std,\
aggregations_mean,time_to_target_mean_s,time_to_target_std_s,reached_target";

fn stat_cols(s: Option<Stat>) -> (String, String) {
    match s {
        Some(s) => (format!("{:.6}", s.mean), format!("{:.6}", s.std)),
        None => ("-1.000000".into(), "-1.000000".into()),
    }
}

pub fn write_summary_csv(report: &SweepReport, mut out: impl Write) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for a in &report.arms {
        let (acc_m, acc_s) = stat_cols(a.final_accuracy);
        let (agg_m, _) = stat_cols(a.aggregations);
        let (t_m, t_s) = stat_cols(a.time_to_target_s);
        let epochs = a.arm.epochs.map_or_else(|| "-1".to_string(), |e| e.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            a.arm.label,
            a.arm.strategy,
            epochs,
            a.runs,
            a.failures,
            acc_m,
            acc_s,
            agg_m,
            t_m,
            t_s,
            a.time_to_target_s.map_or(0, |s| s.count),
        )?;
    }
    Ok(())
}

pub const CELLS_HEADER: &str = "label,seed,status,final_accuracy,aggregations,time_to_target_s,truncated,error";

pub fn write_cells_csv(report: &SweepReport, mut out: impl Write) -> Result<()> {
    writeln!(out, "{CELLS_HEADER}")?;
    for c in &report.cells {
        match &c.result {
            Ok(r) => writeln!(
                out,
                "{},{},ok,{:.6},{},{:.6},{},",
                c.label,
                c.seed,
                r.final_accuracy,
                r.aggregations,
                r.time_to_target_s.unwrap_or(-1.0),
                r.truncated,
            )?,
            Err(e) => writeln!(
                out,
                "{},{},failed,-1.000000,-1,-1.000000,false,{}",
                c.label,
                c.seed,
                e.replace(',', ";")
            )?,
        }
    }
    Ok(())
}
