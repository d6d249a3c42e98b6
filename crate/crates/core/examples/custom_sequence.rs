//! User-supplied σ tables. A table is classified from its extrapolation rule
//! only when the tabulated tail agrees with that rule.

use polya_urn::sequence::{CustomTable, SequenceSpec};
use polya_urn::theory::classify;
use polya_urn::urn::simulate;

const ROWS: &str = "\
# n sigma
1 3
2 1
3 4
4 1
5 5
6 6
7 7
8 8
9 9
10 10
11 11
12 12
";

fn main() -> polya_urn::Result<()> {
    for rule in ["power 1", "geometric 2"] {
        let table = CustomTable::parse(&format!("{ROWS}extrapolate {rule}\n"))?;
        let spec = SequenceSpec::custom(table, 2.0)?;
        let v = classify(&spec);
        println!(
            "{}: monopoly {:?}, domination {:?}",
            spec.label(),
            v.p_monopoly,
            v.p_domination
        );
        for note in &v.notes {
            println!("    {note}");
        }
    }

    let spec = SequenceSpec::custom(
        CustomTable::parse(&format!("{ROWS}extrapolate power 1\n"))?,
        2.0,
    )?;
    for n in [1, 12, 13, 100] {
        println!("sigma_{n} = {}", spec.sigma(n)?);
    }
    let s = simulate(&spec, 1.0, 10_000, 5)?;
    println!(
        "theta after 10^4 steps: {:.6}, last flip {:?}",
        s.final_theta, s.last_flip
    );
    Ok(())
}
