use bvpkit::nn::{
    evaluate, evaluate_indices, softmax, softmax_cross_entropy, split_dataset, train, Dataset,
    Model, ModelConfig, SplitMode, Tensor, TrainConfig, NUM_CLASSES,
};
use bvpkit::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: usize = 48;

/// Sinusoids whose frequency encodes the class, with a random phase and
/// light noise.
fn tones(per_class: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class * NUM_CLASSES {
        let class = i % NUM_CLASSES;
        let freq = 2.0 + 3.0 * class as f64;
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        for t in 0..P {
            let x = (std::f64::consts::TAU * freq * t as f64 / P as f64 + phase).sin();
            data.push(x + rng.random_range(-0.1..0.1));
        }
        labels.push(class);
    }
    let n = labels.len();
    Dataset::new(vec![P], data, labels, vec![0; n]).unwrap()
}

fn quick(epochs: usize, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs,
        seed,
        batch_size: 16,
        learning_rate: 3e-3,
        ..TrainConfig::default()
    }
}

#[test]
fn separable_tones_are_learned() {
    let data = tones(40, 1);
    let trained = train(&ModelConfig::raw1d(P, 2), &quick(20, 3), &data).unwrap();
    let acc = trained.report.test_accuracy().unwrap();
    assert!(acc >= 0.9, "test accuracy {acc}");
}

#[test]
fn shuffled_labels_stay_near_chance() {
    let data = tones(150, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let labels = (0..data.len())
        .map(|_| rng.random_range(0..NUM_CLASSES))
        .collect();
    let data = data.with_labels(labels).unwrap();
    let trained = train(&ModelConfig::raw1d(P, 6), &quick(8, 7), &data).unwrap();
    let acc = trained.report.test_accuracy().unwrap();
    assert!((0.15..=0.35).contains(&acc), "test accuracy {acc}");
}

#[test]
fn training_loss_does_not_rise_over_first_epochs() {
    let data = tones(8, 8);
    let cfg = TrainConfig {
        epochs: 5,
        seed: 9,
        batch_size: 32,
        ..TrainConfig::default()
    };
    let report = train(&ModelConfig::raw1d(P, 10), &cfg, &data)
        .unwrap()
        .report;
    let losses: Vec<f64> = report.epochs.iter().map(|e| e.train_loss).collect();
    assert_eq!(losses.len(), 5);
    for w in losses.windows(2) {
        assert!(w[1] <= w[0], "{losses:?}");
    }
}

#[test]
fn training_is_deterministic() {
    let data = tones(10, 11);
    let model = ModelConfig::raw1d(P, 12);
    let a = train(&model, &quick(3, 13), &data).unwrap();
    let b = train(&model, &quick(3, 13), &data).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.model.params(), b.model.params());
    let c = train(&model, &quick(3, 14), &data).unwrap();
    assert_ne!(a.model.params(), c.model.params());
}

#[test]
fn evaluate_counts_matches() {
    let data = tones(6, 15);
    let model = Model::new(ModelConfig::raw1d(P, 16)).unwrap();
    let idx: Vec<usize> = (0..data.len()).collect();
    let preds = model.predict(&data.batch(&idx)).unwrap();
    let hits = preds
        .iter()
        .zip(data.labels())
        .filter(|(p, l)| p == l)
        .count();
    let ev = evaluate(&model, &data).unwrap();
    assert_eq!(ev.accuracy, hits as f64 / data.len() as f64);
    assert_eq!(ev.confusion.iter().flatten().sum::<usize>(), data.len());
    let diag: usize = (0..NUM_CLASSES).map(|k| ev.confusion[k][k]).sum();
    assert_eq!(diag, hits);
    assert!(evaluate_indices(&model, &data, &[]).is_err());
}

#[test]
fn batched_forward_equals_single_forwards() {
    for cfg in [ModelConfig::raw1d(P, 17), ModelConfig::gaf2d(10, 17)] {
        let model = Model::new(cfg).unwrap();
        let shape = model.config().input_shape();
        let per: usize = shape.iter().product();
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let xs: Vec<f64> = (0..2 * per).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut both_shape = vec![2];
        both_shape.extend(&shape);
        let both = model
            .forward(&Tensor::new(both_shape, xs.clone()).unwrap())
            .unwrap();
        for i in 0..2 {
            let mut one_shape = vec![1];
            one_shape.extend(&shape);
            let one = Tensor::new(one_shape, xs[i * per..(i + 1) * per].to_vec()).unwrap();
            let y = model.forward(&one).unwrap();
            for (a, b) in y.data().iter().zip(both.item(i)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn duplicated_batch_gives_same_gradients() {
    let data = tones(1, 19);
    let model = Model::new(ModelConfig::raw1d(P, 20)).unwrap();
    let idx: Vec<usize> = (0..data.len()).collect();
    let twice: Vec<usize> = idx.iter().chain(&idx).copied().collect();
    let labels: Vec<usize> = twice.iter().map(|&i| data.labels()[i]).collect();
    let (l1, g1) = model
        .loss_and_grad(&data.batch(&idx), data.labels())
        .unwrap();
    let (l2, g2) = model.loss_and_grad(&data.batch(&twice), &labels).unwrap();
    assert!((l1 - l2).abs() < 1e-12);
    for (a, b) in g1.iter().flatten().zip(g2.iter().flatten()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn wrong_input_shape_is_reported() {
    let model = Model::new(ModelConfig::gaf2d(16, 1)).unwrap();
    match model.forward(&Tensor::zeros(vec![2, 8, 8])) {
        Err(Error::Shape { expected, .. }) => assert!(expected.contains("[batch, 16, 16]")),
        other => panic!("{other:?}"),
    }
}

#[test]
fn weights_round_trip_through_bytes() {
    let data = tones(10, 21);
    let trained = train(
        &ModelConfig::gaf2d(12, 22),
        &quick(1, 23),
        &tones_as_images(&data),
    )
    .unwrap();
    let bytes = trained.model.to_bytes();
    let back = Model::from_bytes(&bytes).unwrap();
    assert_eq!(back.params(), trained.model.params());
    assert_eq!(back.config(), trained.model.config());
    assert!(Model::from_bytes(&bytes[..bytes.len() - 3]).is_err());
    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    assert!(Model::from_bytes(&bad).is_err());
}

fn tones_as_images(data: &Dataset) -> Dataset {
    // Outer product of the first 12 samples: a cheap 2D input with class structure.
    let mut out = Vec::new();
    for i in 0..data.len() {
        let x = &data.sample(i)[..12];
        for a in x {
            for b in x {
                out.push(a * b);
            }
        }
    }
    Dataset::new(
        vec![12, 12],
        out,
        data.labels().to_vec(),
        data.groups().to_vec(),
    )
    .unwrap()
}

#[test]
fn participant_split_keeps_groups_together() {
    let data = tones(12, 24);
    let groups = (0..data.len()).map(|i| i % 6).collect();
    let data = data.with_groups(groups).unwrap();
    let cfg = TrainConfig {
        split_mode: SplitMode::ByParticipant,
        seed: 25,
        ..TrainConfig::default()
    };
    let s = split_dataset(&data, &cfg).unwrap();
    let owners = |idx: &[usize]| {
        let mut g: Vec<usize> = idx.iter().map(|&i| data.groups()[i]).collect();
        g.sort();
        g.dedup();
        g
    };
    let (tr, va, te) = (owners(&s.train), owners(&s.val), owners(&s.test));
    for g in &tr {
        assert!(!va.contains(g) && !te.contains(g));
    }
    for g in &va {
        assert!(!te.contains(g));
    }
    assert_eq!(s.train.len() + s.val.len() + s.test.len(), data.len());

    let single = tones(12, 26);
    assert!(matches!(split_dataset(&single, &cfg), Err(Error::Split(_))));
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(logits in prop::collection::vec(-500f64..500.0, 1..12)) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| (0.0..=1.0).contains(&v)));
    }

    #[test]
    fn cross_entropy_is_non_negative(
        logits in prop::collection::vec(-50f64..50.0, NUM_CLASSES * 3),
        labels in prop::collection::vec(0usize..NUM_CLASSES, 3),
    ) {
        let t = Tensor::new(vec![3, NUM_CLASSES], logits).unwrap();
        let (loss, grad) = softmax_cross_entropy(&t, &labels).unwrap();
        prop_assert!(loss >= 0.0);
        for row in 0..3 {
            let s: f64 = grad.item(row).iter().sum();
            prop_assert!(s.abs() < 1e-12);
        }
    }
}
