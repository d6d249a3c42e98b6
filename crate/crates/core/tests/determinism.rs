use polya_urn::ensemble::{run_ensemble, EnsembleConfig};
use polya_urn::sequence::SequenceSpec;
use polya_urn::theory::laplace_mc;

fn report_at(workers: usize) -> String {
    let spec = SequenceSpec::power_law(0.5, 2.0).unwrap();
    let mut cfg = EnsembleConfig::new(spec, 1.0, 500, 2_000, 0xfeed);
    cfg.workers = workers;
    serde_json::to_string(&run_ensemble(&cfg).unwrap()).unwrap()
}

#[test]
fn ensemble_report_ignores_worker_count() {
    let one = report_at(1);
    assert_eq!(one, report_at(4));
    assert_eq!(one, report_at(16));
}

#[test]
fn laplace_estimate_ignores_worker_count() {
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    let at = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| laplace_mc(&spec, 1.0, 40, 2.0, 5_000, 11).unwrap())
    };
    let one = at(1);
    assert_eq!(one, at(4));
    assert_eq!(one, at(16));
}

#[test]
fn different_seeds_give_different_reports() {
    let spec = SequenceSpec::constant(1.0, 2.0).unwrap();
    let a = run_ensemble(&EnsembleConfig::new(spec.clone(), 1.0, 200, 500, 1)).unwrap();
    let b = run_ensemble(&EnsembleConfig::new(spec, 1.0, 200, 500, 2)).unwrap();
    assert_ne!(a.final_theta, b.final_theta);
}
