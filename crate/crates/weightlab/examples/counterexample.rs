//! The singular counterexample: a weight pair inside the multilinear class
//! whose first component fails every component-wise condition.
//!
//! `w_1 = 1/(|x| log^2(e/|x|))` on `[-1,1]` (1 outside) is integrable but in
//! no `L^p` for p > 1, so it satisfies no reverse Holder inequality; yet
//! `(w_1, 1)` is a vector weight at `p_1 = p_2 = 2`. The scenario checks both
//! sides numerically: the vector constant and the relevant `A_1` constants
//! stay stable under refinement while the component characteristics blow up.
//!
//! ```bash
//! cargo run --release --example counterexample
//! ```

use weightlab::constants::{GridLadder, VerdictPolicy};
use weightlab::verify::counterexample_scenario;
use weightlab::weights::QuadratureConfig;
use weightlab::CubeFamily;

fn main() {
    let ladder = GridLadder::new(vec![1 << 10, 1 << 12, 1 << 14], -2.0, 2.0).unwrap();
    let doc = counterexample_scenario(
        2.0,
        &ladder,
        &[10, 20],
        CubeFamily::dyadic(),
        &QuadratureConfig::default(),
        &VerdictPolicy::default(),
    )
    .unwrap();

    println!("series:");
    for series in &doc.series {
        let values: Vec<String> = series
            .entries
            .iter()
            .map(|e| format!("{:.4}", e.value))
            .collect();
        println!(
            "  {:30} [{}] -> {:?}",
            series.characteristic,
            values.join(", "),
            series.verdict
        );
    }
    println!("assertions:");
    for a in &doc.assertions {
        println!(
            "  [{}] {} (measured {:.4}, bound {:.4})",
            if a.pass { "pass" } else { "FAIL" },
            a.name,
            a.measured,
            a.bound
        );
    }
    println!("overall: {}", if doc.pass { "PASS" } else { "FAIL" });
    std::process::exit(if doc.pass { 0 } else { 1 });
}
