use bregman_perceptron::core::optim::objective;
use bregman_perceptron::core::{ProximalActivation, TrainerKind};
use bregman_perceptron::experiment::{
    alpha_sweep, prepare_data, run_experiment, write_metadata_json, write_trace_csv, DataSource,
    ExperimentConfig, ScheduleKind, TrainerSpec,
};

fn small(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default_comparison(
        DataSource::Synthetic {
            features: 40,
            classes: 4,
            noise: 0.5,
        },
        seed,
    );
    cfg.train_count = 120;
    cfg.val_count = 80;
    cfg.iterations = 15;
    cfg
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in 0..2 {
        let res = run_experiment(&small(3)).unwrap();
        let csv = dir.path().join(format!("t{run}.csv"));
        let json = dir.path().join(format!("m{run}.json"));
        write_trace_csv(&res.traces, &csv).unwrap();
        write_metadata_json(&res.metadata, &json).unwrap();
        outputs.push((std::fs::read(csv).unwrap(), std::fs::read(json).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn serial_and_threaded_runs_agree() {
    let mut cfg = small(4);
    let threaded = run_experiment(&cfg).unwrap();
    cfg.parallel = false;
    let serial = run_experiment(&cfg).unwrap();
    for (a, b) in threaded.traces.iter().zip(&serial.traces) {
        assert_eq!(a.spec.label, b.spec.label);
        assert_eq!(a.records, b.records);
    }
}

#[test]
fn all_trainers_start_from_the_same_point() {
    let res = run_experiment(&small(5)).unwrap();
    let first = &res.traces[0].initial;
    for t in &res.traces {
        assert_eq!(t.initial.train_accuracy, first.train_accuracy);
        assert_eq!(t.initial.val_accuracy, first.val_accuracy);
        assert_eq!(t.initial.weight_sparsity, first.weight_sparsity);
    }
}

#[test]
fn recorded_objective_matches_fresh_evaluation() {
    let mut cfg = small(6);
    cfg.keep_snapshots = true;
    let (train, _) = prepare_data(&cfg).unwrap();
    let res = run_experiment(&cfg).unwrap();
    let act = ProximalActivation::Rectifier;
    for t in &res.traces {
        assert_eq!(t.snapshots.len(), t.records.len());
        let alpha = t.spec.alpha / cfg.alpha_divisor;
        for ((k, model), record) in t.snapshots.iter().zip(&t.records) {
            assert_eq!(*k, record.iteration);
            let fresh = objective(model, &train, &act, t.spec.kind.loss(), alpha).unwrap();
            assert!(
                (fresh - record.objective).abs() <= 1e-12,
                "{} k={k}: {fresh} vs {}",
                t.spec.label,
                record.objective
            );
        }
    }
}

#[test]
fn larger_alpha_never_gives_fewer_zeros() {
    let mut cfg = small(7);
    cfg.alpha_divisor = 1.0;
    cfg.iterations = 40;
    let template = TrainerSpec::new(
        "rosenblatt-ista",
        TrainerKind::RosenblattISTA,
        0.0,
        ScheduleKind::Constant,
    );
    let alphas = [0.0, 0.002, 0.01, 0.05, 0.25];
    let res = alpha_sweep(&cfg, &template, &alphas).unwrap();
    let sparsity: Vec<f64> = res
        .traces
        .iter()
        .map(|t| t.last().weight_sparsity)
        .collect();
    assert!(sparsity.windows(2).all(|w| w[0] <= w[1]), "{sparsity:?}");
    assert!(sparsity[alphas.len() - 1] > sparsity[0], "{sparsity:?}");
}

#[test]
fn metadata_lists_every_trainer() {
    let res = run_experiment(&small(8)).unwrap();
    let m = &res.metadata;
    assert_eq!(m.trainers.len(), 4);
    let alphas: Vec<f64> = m.trainers.iter().map(|t| t.alpha).collect();
    assert_eq!(alphas, vec![0.9, 0.81, 0.81, 0.85]);
    assert_eq!(m.alpha_divisor, 255.0);
    assert_eq!(m.initial_model_sha256.len(), 64);
    assert!((m.step_size * m.gram_lipschitz - 1.0).abs() < 1e-12);
}
