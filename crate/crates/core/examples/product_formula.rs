//! Probability of never drawing white: closed product against simulation.

use polya_urn::ensemble::{run_ensemble, EnsembleConfig};
use polya_urn::sequence::SequenceSpec;
use polya_urn::theory::{product_never_white, Horizon};

fn main() -> polya_urn::Result<()> {
    for (seed, (spec, n)) in [
        (SequenceSpec::constant(1.0, 2.0)?, 100),
        (SequenceSpec::power_law(1.0, 2.0)?, 100),
        (SequenceSpec::geometric(2.0, 2.0)?, 50),
    ]
    .into_iter()
    .enumerate()
    {
        let exact = product_never_white(&spec, 1.0, Horizon::Finite(n), 1e-12)?;
        let mc = run_ensemble(&EnsembleConfig::new(
            spec.clone(),
            1.0,
            n,
            100_000,
            seed as u64,
        ))?
        .never_white;
        println!(
            "{:<24} N = {n:<4} product {:.6}  simulated {:.6} [{:.6}, {:.6}]",
            spec.label(),
            exact.value,
            mc.freq,
            mc.lo,
            mc.hi
        );
    }
    let spec = SequenceSpec::geometric(2.0, 2.0)?;
    let inf = product_never_white(&spec, 1.0, Horizon::Infinite, 1e-12)?;
    println!(
        "geometric r=2, N = inf: {:.9} after {} factors",
        inf.value, inf.factors
    );
    Ok(())
}
