//! Single-run orchestration: geometry → visits → federation → metrics.

use crate::contact::{contact_windows, visit_stream, ContactEvent, Visit, WindowSearch};
use crate::error::Result;
use crate::flcore::Federation;
use crate::learn::{
    evaluate, gen_blobs, partition_dirichlet, partition_iid, train_test_split, Dataset, Evaluation, Model,
    ModelKind, Partition, ShardTrainer, TrainerConfig,
};
use crate::orbital::build_constellation;
use crate::strategies::StrategyKind;

use super::config::{DataKind, PartitionKind, RunConfig};
use super::metrics::{EventKind, MetricsRow};
use super::seeding::{stream_rng, stream_seed, Stream};

/// Visibility windows and the derived visit order; depends only on geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub satellites: usize,
    pub windows: Vec<ContactEvent<f64>>,
    pub visits: Vec<Visit<f64>>,
}

impl Schedule {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let sats = build_constellation(&cfg.constellation_spec())?;
        let gs = cfg.ground_station()?;
        let search = WindowSearch {
            t0_s: 0.0,
            t1_s: cfg.sim.duration_s,
            coarse_step_s: cfg.sim.coarse_step_s,
            refine_tol_s: cfg.sim.refine_tol_s,
        };
        let windows = contact_windows(&sats, &gs, &search)?;
        let visits = visit_stream(&windows);
        Ok(Self {
            satellites: sats.len(),
            windows,
            visits,
        })
    }
}

/// Everything a run needs from the data side.
#[derive(Debug, Clone)]
pub struct Workload {
    pub model: Model,
    pub train: Dataset<f64>,
    pub test: Dataset<f64>,
    pub partition: Partition,
}

impl Workload {
    pub fn from_config(cfg: &RunConfig, clients: usize) -> Result<Self> {
        let d = &cfg.data;
        let full: Dataset<f64> = match d.kind {
            DataKind::Blobs => gen_blobs(
                d.n_samples,
                d.classes,
                d.dim,
                d.spread,
                stream_seed(cfg.seed, Stream::Data),
            )?,
        };
        let (train, test) = train_test_split(&full, d.test_fraction, stream_seed(cfg.seed, Stream::Split))?;
        let part_seed = stream_seed(cfg.seed, Stream::Partition);
        let partition = match d.partition {
            PartitionKind::Iid => partition_iid(&train, clients, part_seed)?,
            PartitionKind::Dirichlet => partition_dirichlet(&train, clients, d.dirichlet_beta, part_seed)?,
        };
        let model = match cfg.trainer.model {
            ModelKind::SoftmaxLinear => Model::softmax_linear(d.dim, d.classes),
            ModelKind::Mlp1 => Model::mlp1(d.dim, cfg.trainer.hidden_width, d.classes),
        };
        Ok(Self {
            model,
            train,
            test,
            partition,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub rows: Vec<MetricsRow>,
    pub aggregations: u64,
    /// Last evaluation of the global model.
    pub final_eval: Evaluation,
    /// FedAvg only: the horizon ended with reports buffered for a round that
    /// never completed.
    pub truncated: bool,
}

impl RunOutput {
    /// First simulated time at which an eval row reaches `target` accuracy.
    pub fn time_to_accuracy(&self, target: f64) -> Option<f64> {
        self.rows
            .iter()
            .find(|r| r.event == EventKind::Eval && r.test_accuracy.is_some_and(|a| a >= target))
            .map(|r| r.sim_time_s)
    }

    pub fn eval_rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(|r| r.event == EventKind::Eval)
    }

    pub fn visit_rows(&self) -> impl Iterator<Item = &MetricsRow> {
        self.rows.iter().filter(|r| r.event == EventKind::Visit)
    }
}

pub fn run_simulation(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let schedule = Schedule::from_config(cfg)?;
    run_with_schedule(cfg, &schedule)
}

/// Replays a precomputed schedule; `schedule` must come from a config with
/// the same geometry as `cfg`.
pub fn run_with_schedule(cfg: &RunConfig, schedule: &Schedule) -> Result<RunOutput> {
    cfg.validate()?;
    let workload = Workload::from_config(cfg, schedule.satellites)?;
    run_workload(cfg, schedule, workload)
}

pub fn run_workload(cfg: &RunConfig, schedule: &Schedule, workload: Workload) -> Result<RunOutput> {
    let Workload {
        model,
        train,
        test,
        partition,
    } = workload;
    let n = schedule.satellites;
    let initial = model.init_params::<f64>(&mut stream_rng(cfg.seed, Stream::Init));
    let mut federation = Federation::new(
        initial,
        &partition.importances::<f64>(),
        cfg.strategy(),
        cfg.fl.buffer_size,
        cfg.fl.eta_g,
        cfg.fl.first_visit_mode,
    )?;
    let client_seeds: Vec<u64> = (0..n).map(|id| stream_seed(cfg.seed, Stream::Client(id))).collect();
    let trainer_cfg = TrainerConfig {
        epochs: cfg.trainer.epochs,
        batch_size: cfg.trainer.batch_size,
        eta_l0: cfg.trainer.eta_l0,
        lr_decay: cfg.trainer.lr_decay,
    };
    let mut trainer = ShardTrainer::new(model, train, partition, trainer_cfg, &client_seeds)?;

    let mut rows = Vec::with_capacity(schedule.visits.len() + 2);
    let mut last_eval = evaluate(&model, federation.global_model(), &test)?;
    rows.push(eval_row(0.0, 0, last_eval));

    for visit in &schedule.visits {
        let t = visit.time_s;
        let outcome = federation.on_visit(visit.satellite_id, &mut trainer)?;
        if let Some(agg) = &outcome.aggregation {
            let mut row = MetricsRow::new(t, EventKind::Aggregate, agg.round);
            row.satellite_id = Some(visit.satellite_id);
            row.step_norm = Some(agg.step_norm);
            rows.push(row);
            last_eval = evaluate(&model, federation.global_model(), &test)?;
            rows.push(eval_row(t, agg.round, last_eval));
        }
        let mut row = MetricsRow::new(t, EventKind::Visit, outcome.downloaded_round.unwrap_or(federation.round()));
        row.satellite_id = Some(visit.satellite_id);
        row.staleness = outcome.staleness.map(|s| s.staleness);
        rows.push(row);
    }

    // Reports already collected for an unfinished synchronous round are lost.
    let truncated = cfg.fl.strategy == StrategyKind::FedAvg && federation.server.arrivals > 0;
    Ok(RunOutput {
        rows,
        aggregations: federation.round(),
        final_eval: last_eval,
        truncated,
    })
}

fn eval_row(t: f64, round: u64, e: Evaluation) -> MetricsRow {
    let mut row = MetricsRow::new(t, EventKind::Eval, round);
    row.test_accuracy = Some(e.accuracy);
    row.test_loss = Some(e.loss);
    row
}
