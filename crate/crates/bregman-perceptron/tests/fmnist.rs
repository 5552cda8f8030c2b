//! Runs against real files when `BREGMAN_PERCEPTRON_DATA` points at them.

use bregman_perceptron::idx::{load_dataset, locate_dataset};

#[test]
fn official_files_have_the_published_shape() {
    let Some(dir) = std::env::var_os("BREGMAN_PERCEPTRON_DATA").map(std::path::PathBuf::from)
    else {
        eprintln!("skipped: BREGMAN_PERCEPTRON_DATA is not set");
        return;
    };
    if locate_dataset(&dir).is_err() {
        eprintln!("skipped: no IDX files in {}", dir.display());
        return;
    }
    let ds = load_dataset(&dir, 10).unwrap();
    assert_eq!(ds.train.len(), 60_000);
    assert_eq!(ds.test.len(), 10_000);
    assert_eq!(ds.train.features(), 784);
    assert!(ds
        .train
        .labels()
        .iter()
        .chain(ds.test.labels())
        .all(|&l| l < 10));
    assert!(ds
        .train
        .inputs()
        .as_slice()
        .iter()
        .all(|&v| (0.0..=1.0).contains(&v)));
}
