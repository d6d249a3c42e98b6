//! Parallel ensemble with checkpoints and Wilson intervals, printed as JSON.

use polya_urn::ensemble::{run_ensemble, EnsembleConfig};
use polya_urn::sequence::SequenceSpec;

fn main() -> polya_urn::Result<()> {
    let spec = SequenceSpec::power_law(1.0, 2.0)?;
    let mut cfg = EnsembleConfig::new(spec, 1.0, 4000, 5000, 11);
    cfg.checkpoints = vec![500, 1000, 2000];
    let report = run_ensemble(&cfg)?;
    for row in &report.checkpoints {
        println!(
            "n = {:>5}  monopoly {:.4} [{:.4}, {:.4}]  domination {:.4}  bound {:.2e}",
            row.n,
            row.monopoly.freq,
            row.monopoly.lo,
            row.monopoly.hi,
            row.domination.freq,
            row.proxy_consistency_bound
        );
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&report.final_theta).unwrap()
    );
    Ok(())
}
