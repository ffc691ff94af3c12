//! Ground-station and satellite state machines for buffered asynchronous FL.
//!
//! Every visit is one atomic exchange: the satellite first uploads whatever it
//! computed since its previous pass, the server folds it into the round buffer
//! (aggregating when `K` uploads have arrived), then the satellite downloads
//! the current global model and immediately trains on it.
//!
//! A satellite's first visit is download-only, and its round record `r_n(j)`
//! is the server round index at the instant of its `j`-th download.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::scalar::Scalar;
use crate::strategies::{fedasync_alpha, Strategy};

/// Produces a client's locally trained model `W_n^{r_n(j),E}`.
pub trait LocalTrainer<T: Scalar> {
    /// Trains client `client` starting from `start`. `participation` is the
    /// 0-based count of the client's previous trainings.
    fn train(&mut self, client: usize, start: &ModelParams<T>, participation: u32) -> Result<ModelParams<T>>;
}

impl<T: Scalar, F> LocalTrainer<T> for F
where
    F: FnMut(usize, &ModelParams<T>, u32) -> Result<ModelParams<T>>,
{
    fn train(&mut self, client: usize, start: &ModelParams<T>, participation: u32) -> Result<ModelParams<T>> {
        self(client, start, participation)
    }
}

/// Initial value of a client's previous end model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum FirstVisitMode {
    /// No previous end model: the first upload is the plain local increment.
    #[default]
    #[serde(rename = "bootstrap")]
    Bootstrap,
    /// Previous end model starts as the zero vector.
    #[serde(rename = "paper_literal")]
    ZeroPrevious,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerState<T> {
    /// Current global model `W^i`.
    pub global_model: ModelParams<T>,
    /// Completed aggregations `i`.
    pub round: u64,
    /// Weighted update accumulator for the open round.
    pub buffer_sum: ModelParams<T>,
    /// Sum of `p_n` over uploads buffered this round.
    pub weight_sum: T,
    /// Uploads buffered this round, `k`.
    pub arrivals: usize,
    /// Uploads per aggregation, `K`.
    pub buffer_size: usize,
    pub eta_g: T,
    buffered: Vec<(usize, T)>,
}

impl<T: Scalar> ServerState<T> {
    pub fn new(initial: ModelParams<T>, buffer_size: usize, eta_g: T) -> Result<Self> {
        if buffer_size == 0 {
            return Err(Error::config("fl.K", "buffer size must be at least 1"));
        }
        if !(eta_g >= T::zero() && eta_g.is_finite()) {
            return Err(Error::config("fl.eta_g", "must be finite and non-negative"));
        }
        if !initial.is_finite() {
            return Err(Error::NonFinite("initial global model".into()));
        }
        let d = initial.len();
        Ok(Self {
            global_model: initial,
            round: 0,
            buffer_sum: ModelParams::zeros(d),
            weight_sum: T::zero(),
            arrivals: 0,
            buffer_size,
            eta_g,
            buffered: Vec::with_capacity(buffer_size),
        })
    }

    fn reset_buffer(&mut self) {
        self.buffer_sum.fill_zero();
        self.weight_sum = T::zero();
        self.arrivals = 0;
        self.buffered.clear();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientState<T> {
    pub satellite_id: usize,
    /// Data importance `p_n`.
    pub importance: T,
    /// Round index recorded at each download, `r_n`.
    pub rounds: Vec<u64>,
    /// Global model the latest training started from.
    pub start_model: Option<ModelParams<T>>,
    /// End model of the latest completed training.
    pub end_model_prev: Option<ModelParams<T>>,
    /// Payload awaiting upload at the next visit.
    pub pending_update: Option<ModelParams<T>>,
}

impl<T: Scalar> ClientState<T> {
    pub fn new(satellite_id: usize, importance: T, mode: FirstVisitMode, dim: usize) -> Self {
        let end_model_prev = match mode {
            FirstVisitMode::Bootstrap => None,
            FirstVisitMode::ZeroPrevious => Some(ModelParams::zeros(dim)),
        };
        Self {
            satellite_id,
            importance,
            rounds: Vec::new(),
            start_model: None,
            end_model_prev,
            pending_update: None,
        }
    }

    /// Number of completed downloads, `j`.
    pub fn participations(&self) -> usize {
        self.rounds.len()
    }
}

/// Staleness `τ = r_n(j) − r_n(j−1)` of the latest participation.
pub fn staleness<T>(client: &ClientState<T>) -> Result<u64> {
    match client.rounds.as_slice() {
        [.., prev, cur] => Ok(cur - prev),
        _ => Err(Error::NoPriorParticipation(client.satellite_id)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StalenessRecord {
    pub satellite_id: usize,
    pub round: u64,
    pub staleness: u64,
}

/// One global model update.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationRecord<T> {
    /// Round index after the update, `i + 1`.
    pub round: u64,
    /// Contributing satellites with their normalized weights `p_n / p`.
    pub contributors: Vec<(usize, T)>,
    /// Mixing weight of an immediate (FedAsync) update.
    pub mix_alpha: Option<T>,
    /// `‖W^{i+1} − W^i‖`.
    pub step_norm: T,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VisitOutcome<T> {
    pub uploaded: bool,
    pub aggregation: Option<AggregationRecord<T>>,
    /// `r_n(j)` if the satellite downloaded a model on this visit.
    pub downloaded_round: Option<u64>,
    pub staleness: Option<StalenessRecord>,
}

/// Ground-station side of one visit.
pub fn server_on_visit<T: Scalar>(
    server: &mut ServerState<T>,
    client: &mut ClientState<T>,
    strategy: &Strategy<T>,
    trainer: &mut impl LocalTrainer<T>,
) -> Result<VisitOutcome<T>> {
    let mut outcome = VisitOutcome::default();

    if let Some(update) = client.pending_update.take() {
        outcome.uploaded = true;
        outcome.aggregation = match *strategy {
            Strategy::FedAsync { alpha0, poly_a } => Some(mix_immediately(server, client, &update, alpha0, poly_a)?),
            _ => buffer_upload(server, client, &update, strategy)?,
        };
    }

    // Under FedAvg a satellite holding the current round's model waits.
    let holds_current = client.rounds.last() == Some(&server.round);
    if !(matches!(strategy, Strategy::FedAvg) && holds_current) {
        let received = server.global_model.clone();
        client_on_visit(client, received, server.round, strategy, trainer)?;
        outcome.downloaded_round = Some(server.round);
        if let Ok(tau) = staleness(client) {
            outcome.staleness = Some(StalenessRecord {
                satellite_id: client.satellite_id,
                round: server.round,
                staleness: tau,
            });
        }
    }
    Ok(outcome)
}

/// Adds `p_n · ∇_n` to the round buffer; aggregates once `K` uploads are in.
fn buffer_upload<T: Scalar>(
    server: &mut ServerState<T>,
    client: &ClientState<T>,
    update: &ModelParams<T>,
    strategy: &Strategy<T>,
) -> Result<Option<AggregationRecord<T>>> {
    server.buffer_sum.add_scaled(client.importance, update)?;
    server.weight_sum += client.importance;
    server.arrivals += 1;
    server.buffered.push((client.satellite_id, client.importance));
    if server.arrivals < server.buffer_size {
        return Ok(None);
    }

    let p = server.weight_sum;
    let next = match strategy {
        // Synchronous averaging of the reported models.
        Strategy::FedAvg => {
            let mut avg = server.buffer_sum.clone();
            avg.scale(T::one() / p);
            avg
        }
        _ => {
            let mut w = server.global_model.clone();
            w.add_scaled(server.eta_g / p, &server.buffer_sum)?;
            w
        }
    };
    let contributors = server.buffered.iter().map(|&(id, pn)| (id, pn / p)).collect();
    Ok(Some(install(server, next, contributors, None)?))
}

/// FedAsync: mix the uploaded end model straight into the global model.
fn mix_immediately<T: Scalar>(
    server: &mut ServerState<T>,
    client: &ClientState<T>,
    local_end: &ModelParams<T>,
    alpha0: T,
    poly_a: T,
) -> Result<AggregationRecord<T>> {
    let based_on = client.rounds.last().copied().unwrap_or(0);
    let tau = server.round + 1 - based_on;
    let alpha = fedasync_alpha(tau, alpha0, poly_a);
    let next = server.global_model.zip_map(local_end, |g, l| (T::one() - alpha) * g + alpha * l)?;
    install(server, next, vec![(client.satellite_id, T::one())], Some(alpha))
}

fn install<T: Scalar>(
    server: &mut ServerState<T>,
    next: ModelParams<T>,
    contributors: Vec<(usize, T)>,
    mix_alpha: Option<T>,
) -> Result<AggregationRecord<T>> {
    let new_round = server.round + 1;
    if !next.is_finite() {
        return Err(Error::Diverged { round: new_round });
    }
    let step_norm = next.sub(&server.global_model)?.norm();
    server.global_model = next;
    server.round = new_round;
    server.reset_buffer();
    Ok(AggregationRecord {
        round: new_round,
        contributors,
        mix_alpha,
        step_norm,
    })
}

/// Satellite side: adopt the received model, train, and prepare the next upload.
pub fn client_on_visit<T: Scalar>(
    client: &mut ClientState<T>,
    received_global: ModelParams<T>,
    round: u64,
    strategy: &Strategy<T>,
    trainer: &mut impl LocalTrainer<T>,
) -> Result<()> {
    if !received_global.is_finite() {
        return Err(Error::NonFinite("received global model".into()));
    }
    let participation = client.rounds.len() as u32;
    let end = trainer.train(client.satellite_id, &received_global, participation)?;
    let payload = strategy.client_payload(&end, &received_global, client.end_model_prev.as_ref())?;
    client.pending_update = Some(payload);
    client.start_model = Some(received_global);
    client.end_model_prev = Some(end);
    client.rounds.push(round);
    Ok(())
}

/// Server plus its satellites, driven one visit at a time.
#[derive(Debug, Clone)]
pub struct Federation<T> {
    pub server: ServerState<T>,
    pub clients: Vec<ClientState<T>>,
    pub strategy: Strategy<T>,
}

impl<T: Scalar> Federation<T> {
    /// `buffer_size` is ignored for FedAvg (which waits for every client) and
    /// for FedAsync (which applies each upload immediately).
    pub fn new(
        initial: ModelParams<T>,
        importances: &[T],
        strategy: Strategy<T>,
        buffer_size: usize,
        eta_g: T,
        mode: FirstVisitMode,
    ) -> Result<Self> {
        let n = importances.len();
        if n == 0 {
            return Err(Error::InvalidData("federation needs at least one client".into()));
        }
        if let Some(bad) = importances.iter().find(|p| !(**p > T::zero() && p.is_finite())) {
            return Err(Error::InvalidData(format!("importance {bad} must be positive")));
        }
        let k = match strategy {
            Strategy::FedAvg => n,
            Strategy::FedAsync { .. } => 1,
            _ => {
                if buffer_size > n {
                    return Err(Error::config(
                        "fl.K",
                        format!("buffer size {buffer_size} exceeds {n} satellites"),
                    ));
                }
                buffer_size
            }
        };
        let dim = initial.len();
        let server = ServerState::new(initial, k, eta_g)?;
        let clients = importances
            .iter()
            .enumerate()
            .map(|(id, &p)| ClientState::new(id, p, mode, dim))
            .collect();
        Ok(Self {
            server,
            clients,
            strategy,
        })
    }

    pub fn on_visit(&mut self, satellite_id: usize, trainer: &mut impl LocalTrainer<T>) -> Result<VisitOutcome<T>> {
        let n = self.clients.len();
        let client = self
            .clients
            .get_mut(satellite_id)
            .ok_or_else(|| Error::InvalidData(format!("satellite {satellite_id} outside [0, {n})")))?;
        server_on_visit(&mut self.server, client, &self.strategy, trainer)
    }

    pub fn global_model(&self) -> &ModelParams<T> {
        &self.server.global_model
    }

    pub fn round(&self) -> u64 {
        self.server.round
    }
}
