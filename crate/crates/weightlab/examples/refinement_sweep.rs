//! Refinement sweeps: how the stability/divergence verdicts separate weights
//! inside a class from weights outside it. The truncated supremum over grid
//! cubes stands in for the continuum supremum; its behavior under grid
//! doubling is the testable surrogate for finiteness.
//!
//! ```bash
//! cargo run --release --example refinement_sweep
//! ```

use weightlab::constants::{ConstantRequest, GridLadder, VerdictPolicy};
use weightlab::weights::{parse_weight_spec, QuadratureConfig};
use weightlab::CubeFamily;

fn main() {
    let quad = QuadratureConfig::default();
    let policy = VerdictPolicy::default();
    let family = CubeFamily::dyadic();

    // |x|^a lies in A_2 exactly for -1 < a < 1: inside the range the series
    // settles, at the boundary it blows up.
    println!("[w]_(A_2) of |x|^a across N = 2^8 .. 2^14:");
    let ladder = GridLadder::new(vec![1 << 8, 1 << 10, 1 << 12, 1 << 14], -1.0, 1.0).unwrap();
    for a in [-0.5, 0.0, 0.5, 0.9, 1.0] {
        let w = parse_weight_spec(&format!("powlog(x0=0, a={}, b=0)", -a)).unwrap();
        match (ConstantRequest::Ap { w, p: 2.0 }).evaluate_ladder(&ladder, family, &quad, &policy)
        {
            Ok(report) => {
                let series: Vec<String> = report
                    .refinement
                    .iter()
                    .map(|e| format!("{:.4}", e.value))
                    .collect();
                println!(
                    "  a={a:+.2}: [{}] -> {}",
                    series.join(", "),
                    report.flags.join(",")
                );
            }
            Err(err) => println!("  a={a:+.2}: {err}"),
        }
    }

    // The singular model weight is the boundary case of the log scale:
    // integrable, but outside every A_p.
    println!("\n[w]_(A_2) of the singular log weight (divergence is the expected outcome):");
    let w1 = parse_weight_spec("piecewise([-1,1]: powlog(x0=0,a=1,b=2); else: const(1))").unwrap();
    let wide = GridLadder::new(vec![1 << 8, 1 << 12, 1 << 16, 1 << 20], -2.0, 2.0).unwrap();
    let report = ConstantRequest::Ap { w: w1, p: 2.0 }
        .evaluate_ladder(&wide, family, &quad, &policy)
        .unwrap();
    for e in &report.refinement {
        println!("  N={:>8}: {:.4}", e.n, e.value);
    }
    println!("  verdict: {}", report.flags.join(","));
}
