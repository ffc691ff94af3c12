use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use satfl::flcore::{FirstVisitMode, Federation, LocalTrainer};
use satfl::strategies::{weighted_average, Strategy};
use satfl::{ModelParams, Result};

fn p(v: &[f64]) -> ModelParams<f64> {
    ModelParams::from_vec(v.to_vec())
}

/// Deterministic nonlinear stand-in for local training.
fn pull_towards(targets: Vec<Vec<f64>>) -> impl FnMut(usize, &ModelParams<f64>, u32) -> Result<ModelParams<f64>> {
    move |id, start, j| {
        let rate = 0.5 * 0.9f64.powi(j as i32);
        Ok(ModelParams::from_vec(
            start
                .iter()
                .zip(&targets[id])
                .map(|(w, t)| w + rate * (t - w) + 0.01 * (w * w).sin())
                .collect(),
        ))
    }
}

fn targets(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()).collect()
}

fn random_visits(n: usize, len: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.random_range(0..n)).collect()
}

const BUFFERED: [Strategy<f64>; 3] = [Strategy::FedGsm, Strategy::FedBuff, Strategy::FedSat];

#[test]
fn rounds_count_every_k_uploads() {
    for (seed, k) in [(1, 1), (2, 3), (3, 5), (4, 7)] {
        for strategy in BUFFERED {
            let n = 8;
            let mut fed = Federation::new(p(&[0.0, 0.0]), &[1.0 / n as f64; 8], strategy, k, 0.3, FirstVisitMode::Bootstrap).unwrap();
            let mut trainer = pull_towards(targets(n, 2, seed));
            let mut uploads = 0;
            for sat in random_visits(n, 300, seed) {
                let before = fed.round();
                let out = fed.on_visit(sat, &mut trainer).unwrap();
                uploads += usize::from(out.uploaded);
                assert_eq!(fed.round() - before, u64::from(out.aggregation.is_some()));
                assert!(fed.server.arrivals < k);
                if let Some(agg) = out.aggregation {
                    assert_eq!(agg.contributors.len(), k);
                    let total: f64 = agg.contributors.iter().map(|c| c.1).sum();
                    assert!((total - 1.0).abs() < 1e-12);
                }
            }
            assert_eq!(fed.round(), (uploads / k) as u64);
        }
    }
}

#[test]
fn frozen_server_keeps_the_initial_model_bit_for_bit() {
    let w0 = p(&[0.3, -1.7, 2.5]);
    for strategy in BUFFERED {
        let mut fed = Federation::new(w0.clone(), &[0.25; 4], strategy, 2, 0.0, FirstVisitMode::Bootstrap).unwrap();
        let mut trainer = pull_towards(targets(4, 3, 9));
        for sat in random_visits(4, 200, 9) {
            fed.on_visit(sat, &mut trainer).unwrap();
            assert_eq!(fed.global_model(), &w0);
        }
        assert!(fed.round() > 50);
    }
}

#[test]
fn clients_only_see_models_from_their_recorded_round() {
    for strategy in BUFFERED {
        let n = 6;
        let mut fed = Federation::new(p(&[1.0, -1.0]), &[1.0; 6], strategy, 3, 0.5, FirstVisitMode::Bootstrap).unwrap();
        let mut trainer = pull_towards(targets(n, 2, 4));
        let mut history = vec![fed.global_model().clone()];
        for sat in random_visits(n, 250, 4) {
            let out = fed.on_visit(sat, &mut trainer).unwrap();
            if out.aggregation.is_some() {
                history.push(fed.global_model().clone());
            }
            let client = &fed.clients[sat];
            let r = *client.rounds.last().unwrap();
            assert_eq!(out.downloaded_round, Some(r));
            assert_eq!(client.start_model.as_ref(), Some(&history[r as usize]));
            assert!(client.rounds.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}

#[test]
fn round_robin_pairs_form_consecutive_rounds() {
    // Three satellites, buffer of two: rounds close on every second upload.
    let mut fed = Federation::new(p(&[0.0]), &[1.0; 3], Strategy::FedBuff, 2, 1.0, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = pull_towards(targets(3, 1, 2));
    let order = [0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2];
    let mut groups = Vec::new();
    let mut open = Vec::new();
    for &sat in &order {
        let out = fed.on_visit(sat, &mut trainer).unwrap();
        if out.uploaded {
            open.push(sat);
        }
        if let Some(agg) = out.aggregation {
            assert_eq!(agg.contributors.iter().map(|c| c.0).collect::<Vec<_>>(), open);
            groups.push(std::mem::take(&mut open));
        }
    }
    assert_eq!(groups, vec![vec![0, 1], vec![2, 0], vec![1, 2], vec![0, 1]]);
}

#[test]
fn frozen_system_gives_zero_staleness_compensated_updates() {
    let w0 = p(&[0.4, 0.9]);
    let mut fed = Federation::new(w0.clone(), &[0.5, 0.5], Strategy::FedGsm, 1, 0.0, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = |_: usize, s: &ModelParams<f64>, _: u32| -> Result<ModelParams<f64>> { Ok(s.clone()) };
    for sat in [0, 1, 0, 1, 0] {
        fed.on_visit(sat, &mut trainer).unwrap();
    }
    assert_eq!(fed.clients[0].pending_update, Some(p(&[0.0, 0.0])));
}

#[test]
fn paper_literal_first_upload_scales_with_the_model() {
    let w0 = p(&[10.0]);
    let mut trainer = |_: usize, s: &ModelParams<f64>, _: u32| -> Result<ModelParams<f64>> { Ok(p(&[s[0] + 1.0])) };
    let mut literal = Federation::new(w0.clone(), &[1.0], Strategy::FedGsm, 1, 1.0, FirstVisitMode::ZeroPrevious).unwrap();
    literal.on_visit(0, &mut trainer).unwrap();
    // (11 − 10) + (11 − 0)
    assert_eq!(literal.clients[0].pending_update, Some(p(&[12.0])));
    let mut boot = Federation::new(w0, &[1.0], Strategy::FedGsm, 1, 1.0, FirstVisitMode::Bootstrap).unwrap();
    boot.on_visit(0, &mut trainer).unwrap();
    assert_eq!(boot.clients[0].pending_update, Some(p(&[1.0])));
}

/// Visits every satellite in id order, `passes` times.
fn round_robin<T: LocalTrainer<f64>>(fed: &mut Federation<f64>, trainer: &mut T, passes: usize) -> Vec<ModelParams<f64>> {
    let mut rounds = Vec::new();
    for _ in 0..passes {
        for sat in 0..fed.clients.len() {
            if fed.on_visit(sat, trainer).unwrap().aggregation.is_some() {
                rounds.push(fed.global_model().clone());
            }
        }
    }
    rounds
}

#[test]
fn full_buffer_first_round_is_a_weighted_model_average() {
    let n = 5;
    let imp = [0.1, 0.3, 0.2, 0.25, 0.15];
    let w0 = p(&[0.5, -0.5, 1.5]);
    let tg = targets(n, 3, 17);
    let mut fed = Federation::new(w0.clone(), &imp, Strategy::FedBuff, n, 1.0, FirstVisitMode::Bootstrap).unwrap();
    let rounds = round_robin(&mut fed, &mut pull_towards(tg.clone()), 2);
    assert_eq!(rounds.len(), 1);

    let mut local = pull_towards(tg);
    let ends: Vec<ModelParams<f64>> = (0..n).map(|id| local(id, &w0, 0).unwrap()).collect();
    let reference = weighted_average(imp.iter().copied().zip(&ends)).unwrap();
    assert!(rounds[0].max_abs_diff(&reference).unwrap() < 1e-12);
}

#[test]
fn full_buffer_rounds_apply_the_averaged_increments() {
    // Later rounds mix increments trained from different global models; the
    // aggregate is W^i + Σ p̂_n (end_n − start_n) over whatever each carried.
    let n = 4;
    let imp = [0.4, 0.1, 0.3, 0.2];
    let tg = targets(n, 2, 5);
    let mut fed = Federation::new(p(&[0.0, 0.0]), &imp, Strategy::FedBuff, n, 1.0, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = pull_towards(tg.clone());
    let mut reference_trainer = pull_towards(tg);
    for _ in 0..6 {
        let global = fed.global_model().clone();
        let carried: Vec<ModelParams<f64>> = fed.clients.iter().map(|c| c.pending_update.clone().unwrap_or_else(|| ModelParams::zeros(2))).collect();
        let starts: Vec<Option<ModelParams<f64>>> = fed.clients.iter().map(|c| c.start_model.clone()).collect();
        let counts: Vec<u32> = fed.clients.iter().map(|c| (c.rounds.len() as u32).saturating_sub(1)).collect();
        let had_update = fed.clients.iter().all(|c| c.pending_update.is_some());
        let rounds = round_robin(&mut fed, &mut trainer, 1);
        if !had_update {
            continue;
        }
        // Recompute each carried increment from its recorded start model.
        let mut expected = global.clone();
        for id in 0..n {
            let start = starts[id].as_ref().unwrap();
            let end = reference_trainer(id, start, counts[id]).unwrap();
            let inc = end.sub(start).unwrap();
            assert!(inc.max_abs_diff(&carried[id]).unwrap() < 1e-15);
            expected.add_scaled(imp[id], &inc).unwrap();
        }
        assert_eq!(rounds.len(), 1);
        assert!(rounds[0].max_abs_diff(&expected).unwrap() < 1e-12);
    }
}

#[test]
fn synchronous_average_waits_for_everyone() {
    let mut fed = Federation::new(p(&[0.0]), &[1.0 / 3.0; 3], Strategy::FedAvg, 99, 0.1, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = |id: usize, s: &ModelParams<f64>, _: u32| -> Result<ModelParams<f64>> { Ok(p(&[s[0] + id as f64 + 1.0])) };
    // Satellite 0 passes repeatedly before the others report.
    for sat in [0, 1, 2, 0, 0, 0, 1] {
        let out = fed.on_visit(sat, &mut trainer).unwrap();
        assert!(out.aggregation.is_none());
    }
    let out = fed.on_visit(2, &mut trainer).unwrap();
    let agg = out.aggregation.unwrap();
    assert_eq!(agg.round, 1);
    // Mean of 1, 2, 3.
    assert!((fed.global_model()[0] - 2.0).abs() < 1e-15);
    // Satellite 0 reported once and still holds round 0; it picks up round 1 next time.
    assert_eq!(fed.clients[0].rounds, vec![0]);
    let out = fed.on_visit(0, &mut trainer).unwrap();
    assert_eq!(out.downloaded_round, Some(1));
}

#[test]
fn single_client_fedavg_is_one_local_training() {
    let mut fed = Federation::new(p(&[2.0]), &[1.0], Strategy::FedAvg, 1, 1.0, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = |_: usize, s: &ModelParams<f64>, _: u32| -> Result<ModelParams<f64>> { Ok(p(&[s[0] * 0.5 + 3.0])) };
    fed.on_visit(0, &mut trainer).unwrap();
    fed.on_visit(0, &mut trainer).unwrap();
    assert_eq!(fed.global_model(), &p(&[4.0]));
}

#[test]
fn immediate_mixing_aggregates_every_upload() {
    let strategy = Strategy::FedAsync { alpha0: 0.6, poly_a: 0.5 };
    let mut fed = Federation::new(p(&[0.0, 1.0]), &[0.5, 0.5], strategy, 5, 0.1, FirstVisitMode::Bootstrap).unwrap();
    let mut trainer = pull_towards(targets(2, 2, 1));
    let mut uploads = 0;
    for sat in random_visits(2, 40, 1) {
        let out = fed.on_visit(sat, &mut trainer).unwrap();
        if out.uploaded {
            uploads += 1;
            let a = out.aggregation.unwrap().mix_alpha.unwrap();
            assert!(a > 0.0 && a <= 0.6);
        }
    }
    assert_eq!(fed.round(), uploads);
}
