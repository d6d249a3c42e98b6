//! One trajectory with its full path, written as CSV to stdout.
//!
//! cargo run --release --example simulate_trajectory -- [seed]

use polya_urn::sequence::SequenceSpec;
use polya_urn::urn::{monopoly_proxy, simulate_with, write_path_csv, SimOptions};

fn main() -> polya_urn::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let spec = SequenceSpec::geometric(2.0, 2.0)?;
    let opts = SimOptions {
        record_path: true,
        ..Default::default()
    };
    let t = simulate_with(&spec, 1.0, 60, seed, &opts)?;
    let s = &t.summary;
    eprintln!(
        "final theta {:.6}, last flip {:?}, first white {:?}, monopoly proxy {}",
        s.final_theta,
        s.last_flip,
        s.first_white,
        monopoly_proxy(s)
    );
    write_path_csv(
        t.path.as_deref().unwrap_or_default(),
        std::io::stdout().lock(),
    )
}
