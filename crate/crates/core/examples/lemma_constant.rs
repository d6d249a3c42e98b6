//! Smallest admissible constant in the exponential inequality, and a grid check.

use polya_urn::theory::{check_lemma_inequality, find_lemma_c, lemma_h, DEFAULT_X_MAX};

fn main() {
    let r = find_lemma_c(DEFAULT_X_MAX, 20);
    println!(
        "c_min = {:.12} at x = {:.3e} ({} grid points)",
        r.c_min, r.argmax, r.x_points
    );
    println!(
        "h(0+) = {:.12}, h(1) = {:.12}",
        lemma_h(1e-12),
        lemma_h(1.0)
    );
    for c in [0.5, 0.45] {
        let g = check_lemma_inequality(c, 100, 100, DEFAULT_X_MAX);
        println!(
            "c = {c}: {} violations of {} points, worst margin {:.3e} at {:?}",
            g.violations,
            g.points(),
            g.worst_margin,
            g.worst_at
        );
    }
}
