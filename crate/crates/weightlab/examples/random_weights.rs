//! Seeded random test weights: exponentials of mean-zero dyadic martingales.
//! Bounded oscillation keeps them inside A_infty on the grid, the
//! counter-based draws make them reproducible, and cellwise (discrete-mode)
//! duals satisfy the Holder floors exactly.
//!
//! ```bash
//! cargo run --release --example random_weights
//! ```

use weightlab::constants::{ap_sweep, fw_sweep_with};
use weightlab::maximal::Algorithm;
use weightlab::weights::random_weight;
use weightlab::{CubeFamily, Grid};

fn main() {
    let family = CubeFamily::dyadic();

    println!("Fujii-Wilson constants of seeded martingale weights (roughness 0.3):");
    for seed in 0..5u64 {
        let mut series = Vec::new();
        for n in [1 << 10, 1 << 12] {
            let grid = Grid::line(n, 0.0, 1.0).unwrap();
            let w = random_weight(seed, &grid, 0.3).unwrap();
            let fw = fw_sweep_with(&w, family, Algorithm::Fast).unwrap();
            series.push(format!("{:.5}@{n}", fw.max));
        }
        println!("  seed {seed}: {}", series.join(" -> "));
    }

    // Same seed, same field: the draws are a pure function of
    // (seed, level, node).
    let grid = Grid::line(1 << 10, 0.0, 1.0).unwrap();
    let a = random_weight(42, &grid, 0.3).unwrap();
    let b = random_weight(42, &grid, 0.3).unwrap();
    assert_eq!(a.field().values(), b.field().values());
    println!("\nsame seed reproduces the same field exactly");

    // Rough fields still satisfy the per-cube Holder floor in discrete mode.
    let w = random_weight(7, &grid, 0.8).unwrap();
    let sigma = w.cellwise_pow(-1.0).unwrap(); // dual at p = 2, cellwise
    let outcome = ap_sweep(&w, &sigma, 2.0, family).unwrap();
    println!(
        "roughness 0.8: [w]_(A_2) = {:.4}, per-cube minimum {:.12} (floor 1)",
        outcome.max, outcome.min
    );

    let values = w.field().values();
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    println!("value range at roughness 0.8: [{lo:.4}, {hi:.4}]");
}
