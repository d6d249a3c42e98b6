//! Constant reinforcement: the limit of Θ is Uniform(0,1) from a balanced start.

use polya_urn::ensemble::{run_ensemble, EnsembleConfig};
use polya_urn::sequence::SequenceSpec;

fn main() -> polya_urn::Result<()> {
    let cfg = EnsembleConfig::new(SequenceSpec::constant(1.0, 2.0)?, 1.0, 10_000, 10_000, 1);
    let r = run_ensemble(&cfg)?;
    println!("KS distance to Uniform(0,1): {:.5}", r.ks_uniform_stat);
    println!(
        "mean {:.4}, sd {:.4} (uniform: 0.5, 0.2887)",
        r.final_theta.mean, r.final_theta.std_dev
    );
    let total: u64 = r.theta_histogram.iter().sum();
    for (k, chunk) in r.theta_histogram.chunks(10).enumerate() {
        let mass = chunk.iter().sum::<u64>() as f64 / total as f64;
        println!(
            "[{:.1}, {:.1})  {:.4} {}",
            k as f64 / 10.0,
            (k + 1) as f64 / 10.0,
            mass,
            "#".repeat((mass * 200.0) as usize)
        );
    }
    Ok(())
}
