//! End-to-end checks over the simulate -> detect -> estimate chain.

use num_complex::Complex64;

use sounder_core::channel::{simulate_capture, ScenarioSpec};
use sounder_core::estimator::{estimate_stream, EstimationMethod, StreamConfig};
use sounder_core::pca::train_classifier;
use sounder_core::sync::{detect_bursts, TrainingWindow};

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn detector_recovers_every_ground_truth_boundary() {
    let spec = ScenarioSpec::new("exact", 12, vec![cplx(1.0, 0.0)], 300.0, 50);
    let cap = simulate_capture(&spec).unwrap();
    let found = detect_bursts(&cap.stream.samples, 1, 0.2);
    assert_eq!(found.len(), cap.boundaries.len());
    for (b, truth) in found.iter().zip(&cap.boundaries) {
        assert_eq!((b.start_sample, b.end_sample), *truth);
    }
}

#[test]
fn ls_stream_estimates_match_fixed_channel() {
    // Noiseless fixed channel, interior taps known exactly by the
    // central-16 window model up to its deterministic edge bias; the
    // estimate must be identical across bursts and close to truth.
    let template = vec![cplx(1.0, 0.0), cplx(0.35, -0.2)];
    let spec = ScenarioSpec::new("fixed", 30, template.clone(), 300.0, 51);
    let cap = simulate_capture(&spec).unwrap();
    let config = StreamConfig::new(
        EstimationMethod::LeastSquares,
        TrainingWindow::Central16,
        2,
        0,
    );
    let ds = estimate_stream(&cap.stream, &config).unwrap();
    assert_eq!(ds.len(), 30);
    for row in &ds.rows {
        assert!((row[0] - template[0]).norm() < 0.15);
        assert!((row[1] - template[1]).norm() < 0.15);
    }
}

#[test]
fn correlation_stream_width_matches_dataset_convention() {
    let spec = ScenarioSpec::new("w40", 25, vec![cplx(1.0, 0.0)], 20.0, 52);
    let cap = simulate_capture(&spec).unwrap();
    let config = StreamConfig {
        cl: 40,
        ..StreamConfig::new(EstimationMethod::Correlation, TrainingWindow::Full26, 40, 0)
    };
    let ds = estimate_stream(&cap.stream, &config).unwrap();
    assert_eq!(ds.len(), 25);
    assert!(ds.rows.iter().all(|r| r.len() == 40));
}

#[test]
fn two_scene_pipeline_classifies_held_out_bursts() {
    // Small-scale version of the scene-discrimination experiment. The
    // classifier works on tap magnitudes, so the templates differ there.
    let template_a = vec![cplx(1.0, 0.0), cplx(0.63, 0.3), cplx(0.05, -0.09)];
    let template_b = vec![cplx(1.0, 0.0), cplx(-0.1, 0.12), cplx(0.5, 0.25)];
    let make = |label: &str, template: &Vec<Complex64>, seed: u64| {
        let mut spec = ScenarioSpec::new(label, 60, template.clone(), 20.0, seed);
        spec.tap_spread = 0.03;
        simulate_capture(&spec).unwrap()
    };
    let config = StreamConfig {
        cl: 3,
        ..StreamConfig::new(EstimationMethod::LeastSquares, TrainingWindow::Central16, 3, 0)
    };
    let estimate = |cap: &sounder_core::channel::SimulatedCapture, label: &str| {
        let mut ds = estimate_stream(&cap.stream, &config).unwrap();
        ds.label = label.into();
        ds
    };

    let train_a = estimate(&make("a", &template_a, 60), "a");
    let train_b = estimate(&make("b", &template_b, 61), "b");
    let test_a = estimate(&make("a", &template_a, 62), "a");
    let test_b = estimate(&make("b", &template_b, 63), "b");

    let clf = train_classifier(&[(&train_a, "a"), (&train_b, "b")], 2).unwrap();
    let mut correct = 0usize;
    let mut total = 0usize;
    for (ds, label) in [(&test_a, "a"), (&test_b, "b")] {
        let mags = ds.magnitude_matrix();
        for r in 0..mags.rows {
            if clf.classify(mags.row(r)).unwrap().label == label {
                correct += 1;
            }
            total += 1;
        }
    }
    assert!(
        correct as f64 / total as f64 >= 0.95,
        "accuracy {correct}/{total}"
    );
}

#[test]
fn oversampled_stream_estimates_cleanly() {
    let template = vec![cplx(1.0, 0.0), cplx(0.4, -0.2)];
    let mut spec = ScenarioSpec::new("os2", 15, template.clone(), 25.0, 99);
    spec.oversample = 2;
    spec.tsc_id = 2;
    let cap = simulate_capture(&spec).unwrap();
    let config = StreamConfig {
        oversample: 2,
        tsc_id: 2,
        ..StreamConfig::new(EstimationMethod::LeastSquares, TrainingWindow::Central16, 2, 2)
    };
    let ds = estimate_stream(&cap.stream, &config).unwrap();
    assert_eq!(ds.len(), 15);
    for row in &ds.rows {
        assert!((row[0] - template[0]).norm() < 0.2, "tap0 {}", row[0]);
        assert!((row[1] - template[1]).norm() < 0.2, "tap1 {}", row[1]);
    }
}

#[test]
fn no_std_build_holds() {
    // This integration test links the library compiled without the test
    // cfg, i.e. the real no_std + alloc build.
    let spec = ScenarioSpec::new("ns", 1, vec![cplx(1.0, 0.0)], 30.0, 1);
    assert_eq!(simulate_capture(&spec).unwrap().truth.len(), 1);
}
