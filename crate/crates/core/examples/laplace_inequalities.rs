//! Monte Carlo checks of the one-step Laplace recursion and the tail bound.

use polya_urn::sequence::SequenceSpec;
use polya_urn::theory::{check_laplace_recursion, proposition_delta_bound};

fn main() -> polya_urn::Result<()> {
    let spec = SequenceSpec::constant(1.0, 2.0)?;
    for (n, lambda) in [(1, 1.0), (20, 5.0), (100, 50.0)] {
        let r = check_laplace_recursion(&spec, 1.0, n, lambda, 50_000, 1)?;
        println!(
            "n = {n:<4} lambda = {lambda:<5} slack {:+.4e}  {:?}",
            r.slack, r.outcome
        );
    }
    let p = proposition_delta_bound(&spec, 1.0, 10, &[20, 100, 1000], 50_000, 2)?;
    println!(
        "m = {}  delta_m = {:.6}  lambda_m = {:.4}  bound {:.6}",
        p.m, p.delta_m, p.lambda_m, p.bound.mean
    );
    for row in &p.rows {
        println!(
            "  n = {:<5} E exp(-lambda_m theta_n) = {:.6}  {:?}",
            row.n, row.estimate.mean, row.outcome
        );
    }
    Ok(())
}
