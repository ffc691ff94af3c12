use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use satfl::learn::{
    entropy, evaluate, gen_blobs, local_sgd, local_sgd_observed, partition_dirichlet, partition_iid,
    train_test_split, Batch, Dataset, Model, TrainerConfig,
};
use satfl::ModelParams;

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, zero when both vanish.
fn relative_error(a: &ModelParams<f64>, b: &ModelParams<f64>) -> f64 {
    let diff = a.sub(b).unwrap().norm();
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// Central differences of the batch loss, one coordinate at a time.
fn numeric_gradient(model: &Model, params: &ModelParams<f64>, data: &Dataset<f64>, batch: &[usize]) -> ModelParams<f64> {
    const H: f64 = 1e-5;
    let mut probe = params.clone();
    let mut g = Vec::with_capacity(params.len());
    for k in 0..params.len() {
        let w = params[k];
        probe.as_mut_slice()[k] = w + H;
        let up = model.loss(&probe, Batch::new(data, batch)).unwrap();
        probe.as_mut_slice()[k] = w - H;
        let down = model.loss(&probe, Batch::new(data, batch)).unwrap();
        probe.as_mut_slice()[k] = w;
        g.push((up - down) / (2.0 * H));
    }
    ModelParams::from_vec(g)
}

fn worst_gradient_error(model: &Model, seed: u64) -> f64 {
    let data: Dataset<f64> = gen_blobs(200, model.classes, model.dim, 1.5, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let params = ModelParams::from_vec((0..model.num_params()).map(|_| rng.random_range(-1.0..1.0)).collect());
        let size = rng.random_range(1..=16);
        let batch: Vec<usize> = (0..size).map(|_| rng.random_range(0..data.len())).collect();
        let (_, analytic) = model.loss_and_grad(&params, Batch::new(&data, &batch)).unwrap();
        let numeric = numeric_gradient(model, &params, &data, &batch);
        worst = worst.max(relative_error(&analytic, &numeric));
    }
    worst
}

#[test]
fn softmax_gradient_matches_finite_differences() {
    let err = worst_gradient_error(&Model::softmax_linear(6, 4), 11);
    assert!(err < 1e-4, "relative error {err:e}");
}

#[test]
fn mlp_gradient_matches_finite_differences() {
    let err = worst_gradient_error(&Model::mlp1(5, 7, 3), 12);
    assert!(err < 1e-4, "relative error {err:e}");
}

#[test]
fn duplicated_batch_has_the_same_mean_loss_and_gradient() {
    let data: Dataset<f64> = gen_blobs(40, 3, 4, 1.0, 3).unwrap();
    for model in [Model::softmax_linear(4, 3), Model::mlp1(4, 5, 3)] {
        let params = model.init_params::<f64>(&mut ChaCha8Rng::seed_from_u64(8));
        let batch: Vec<usize> = (0..13).collect();
        let doubled: Vec<usize> = batch.iter().chain(&batch).copied().collect();
        let (l1, g1) = model.loss_and_grad(&params, Batch::new(&data, &batch)).unwrap();
        let (l2, g2) = model.loss_and_grad(&params, Batch::new(&data, &doubled)).unwrap();
        assert!((l1 - l2).abs() < 1e-14);
        assert!(g1.max_abs_diff(&g2).unwrap() < 1e-14);
    }
}

#[test]
fn loss_is_bounded_by_uniform_predictor() {
    let data: Dataset<f64> = gen_blobs(50, 5, 3, 1.0, 1).unwrap();
    let all: Vec<usize> = (0..50).collect();
    let model = Model::softmax_linear(3, 5);
    let zero = ModelParams::zeros(model.num_params());
    let (loss, _) = model.loss_and_grad(&zero, Batch::new(&data, &all)).unwrap();
    assert!((loss - 5f64.ln()).abs() < 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let p = ModelParams::from_vec((0..model.num_params()).map(|_| rng.random_range(-3.0..3.0)).collect());
        assert!(model.loss(&p, Batch::new(&data, &all)).unwrap() >= 0.0);
    }
}

fn is_exact_partition(assignments: &[Vec<usize>], n: usize) -> bool {
    let mut all: Vec<usize> = assignments.iter().flatten().copied().collect();
    all.sort_unstable();
    let before = all.len();
    all.dedup();
    all.len() == before && all.iter().all(|&i| i < n)
}

#[test]
fn partitions_are_disjoint_and_uniform() {
    let ds: Dataset<f64> = gen_blobs(1003, 10, 4, 1.0, 5).unwrap();
    for seed in 0..5 {
        let iid = partition_iid(&ds, 40, seed).unwrap();
        assert!(is_exact_partition(iid.assignments(), ds.len()));
        assert!(iid.volumes().iter().all(|&v| v == 25));
        let dir = partition_dirichlet(&ds, 40, 0.3, seed).unwrap();
        assert!(is_exact_partition(dir.assignments(), ds.len()));
        assert!(dir.volumes().iter().all(|&v| v == 25));
    }
}

#[test]
fn iid_shards_track_the_global_class_mix() {
    let ds: Dataset<f64> = gen_blobs(10_000, 10, 32, 1.0, 7).unwrap();
    let global: Vec<f64> = ds
        .class_counts(&(0..ds.len()).collect::<Vec<_>>())
        .into_iter()
        .map(|c| c as f64 / ds.len() as f64)
        .collect();
    for seed in 0..5 {
        let part = partition_iid(&ds, 40, seed).unwrap();
        let props = part.class_proportions(&ds);
        // Per class, the deviation averaged over clients; single shards of 250
        // carry about 0.019 sampling noise per class, so the per-shard extreme
        // only gets a loose sanity bound.
        let avg = (0..10)
            .map(|c| props.iter().map(|p| (p[c] - global[c]).abs()).sum::<f64>() / props.len() as f64)
            .fold(0.0, f64::max);
        let worst = props
            .iter()
            .flat_map(|p| p.iter().zip(&global).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        assert!(avg < 0.05, "seed {seed}: mean deviation {avg}");
        assert!(worst < 0.1, "seed {seed}: worst shard deviation {worst}");
    }
}

#[test]
fn dirichlet_shards_are_more_skewed_than_iid() {
    let ds: Dataset<f64> = gen_blobs(10_000, 10, 32, 1.0, 7).unwrap();
    let mean_entropy = |props: Vec<Vec<f64>>| props.iter().map(|p| entropy(p)).sum::<f64>() / props.len() as f64;
    for seed in 0..5 {
        let iid = mean_entropy(partition_iid(&ds, 40, seed).unwrap().class_proportions(&ds));
        let dir = mean_entropy(partition_dirichlet(&ds, 40, 0.3, seed).unwrap().class_proportions(&ds));
        assert!(dir < iid, "seed {seed}: {dir} >= {iid}");
    }
}

#[test]
fn huge_concentration_is_nearly_uniform() {
    let ds: Dataset<f64> = gen_blobs(10_000, 10, 4, 1.0, 9).unwrap();
    let part = partition_dirichlet(&ds, 10, 1e6, 3).unwrap();
    for p in part.class_proportions(&ds) {
        assert!(p.iter().all(|&q| (q - 0.1).abs() < 0.05), "{p:?}");
    }
}

#[test]
fn centralized_softmax_learns_blobs() {
    let ds: Dataset<f64> = gen_blobs(10_000, 10, 32, 1.0, 21).unwrap();
    let (train, test) = train_test_split(&ds, 0.2, 22).unwrap();
    let model = Model::softmax_linear(32, 10);
    let params0 = model.init_params::<f64>(&mut ChaCha8Rng::seed_from_u64(23));
    let cfg = TrainerConfig {
        epochs: 30,
        batch_size: 10,
        eta_l0: 0.1,
        lr_decay: 1.0,
    };
    let shard: Vec<usize> = (0..train.len()).collect();
    let params = local_sgd(&model, &params0, &train, &shard, &cfg, 0, &mut ChaCha8Rng::seed_from_u64(24)).unwrap();
    let eval = evaluate(&model, &params, &test).unwrap();
    assert!(eval.accuracy > 0.8, "accuracy {}", eval.accuracy);
}

#[test]
fn full_batch_training_ignores_the_shuffle_seed() {
    let ds: Dataset<f64> = gen_blobs(60, 3, 4, 1.0, 2).unwrap();
    let model = Model::mlp1(4, 6, 3);
    let p0 = model.init_params::<f64>(&mut ChaCha8Rng::seed_from_u64(1));
    let shard: Vec<usize> = (10..50).collect();
    let cfg = TrainerConfig {
        epochs: 4,
        batch_size: shard.len(),
        eta_l0: 0.2,
        lr_decay: 0.998,
    };
    let a = local_sgd(&model, &p0, &ds, &shard, &cfg, 3, &mut ChaCha8Rng::seed_from_u64(100)).unwrap();
    let b = local_sgd(&model, &p0, &ds, &shard, &cfg, 3, &mut ChaCha8Rng::seed_from_u64(200)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn local_increment_telescopes_over_steps() {
    let ds: Dataset<f64> = gen_blobs(90, 3, 5, 1.0, 4).unwrap();
    let model = Model::softmax_linear(5, 3);
    let p0 = model.init_params::<f64>(&mut ChaCha8Rng::seed_from_u64(5));
    let shard: Vec<usize> = (0..90).step_by(2).collect();
    let cfg = TrainerConfig {
        epochs: 3,
        batch_size: 7,
        eta_l0: 0.1,
        lr_decay: 0.998,
    };
    let lr = cfg.learning_rate(4);
    let mut sum = ModelParams::zeros(model.num_params());
    let mut steps = 0;
    let end = local_sgd_observed(&model, &p0, &ds, &shard, &cfg, 4, &mut ChaCha8Rng::seed_from_u64(6), |_, g| {
        sum.add_scaled(-lr, g).unwrap();
        steps += 1;
    })
    .unwrap();
    // 45 samples in batches of 7 → 7 steps per epoch.
    assert_eq!(steps, 21);
    let increment = end.sub(&p0).unwrap();
    assert!(increment.max_abs_diff(&sum).unwrap() < 1e-12);
}
