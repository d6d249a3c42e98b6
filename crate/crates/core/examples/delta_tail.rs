//! Certified tail sums of squared step shares.

use polya_urn::sequence::{delta_tail, SequenceSpec};

fn main() -> polya_urn::Result<()> {
    for spec in [
        SequenceSpec::constant(1.0, 2.0)?,
        SequenceSpec::power_law(1.0, 2.0)?,
        SequenceSpec::decay_power(2.0, 2.0)?,
        SequenceSpec::geometric(2.0, 2.0)?,
    ] {
        let row: Vec<String> = [0, 10, 100, 1000]
            .iter()
            .map(|&n| delta_tail(&spec, n, 1e-10).map(|d| format!("{d:.9}")))
            .collect::<Result<_, _>>()?;
        println!("{:<24} {}", spec.label(), row.join("  "));
    }
    Ok(())
}
