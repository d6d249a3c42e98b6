//! Regime verdicts for each built-in reinforcement family.

use polya_urn::sequence::SequenceSpec;
use polya_urn::theory::classify;

fn main() -> polya_urn::Result<()> {
    let specs = [
        SequenceSpec::constant(1.0, 2.0)?,
        SequenceSpec::log_power(2.0, 2.0)?,
        SequenceSpec::power_law(1.0, 2.0)?,
        SequenceSpec::geometric(2.0, 2.0)?,
        SequenceSpec::exp_sqrt(2.0)?,
        SequenceSpec::decay_power(0.5, 2.0)?,
    ];
    println!(
        "{:<28} {:<14} {:<14} rules",
        "sequence", "P(monopoly)", "P(domination)"
    );
    for spec in &specs {
        let v = classify(spec);
        let rules: Vec<String> = v.fired.iter().map(|f| format!("{:?}", f.rule)).collect();
        println!(
            "{:<28} {:<14} {:<14} {}",
            spec.label(),
            format!("{:?}", v.p_monopoly),
            format!("{:?}", v.p_domination),
            rules.join(", ")
        );
        for c in &v.conditions {
            println!("    {:<22} {:?}", c.condition.name(), c.value);
        }
    }
    Ok(())
}
