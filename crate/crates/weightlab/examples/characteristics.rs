//! Weight characteristics as suprema over cube families: A_1, A_p, RH_s, the
//! Fujii-Wilson A_infty constant, and the multilinear vector constant.
//!
//! ```bash
//! cargo run --release --example characteristics
//! ```

use weightlab::constants::{ConstantRequest, GridLadder, VerdictPolicy};
use weightlab::weights::{parse_weight_spec, QuadratureConfig};
use weightlab::{CubeFamily, ExponentVector};

fn main() {
    let quad = QuadratureConfig::default();
    let policy = VerdictPolicy::default();
    let family = CubeFamily::dyadic();
    let ladder = GridLadder::new(vec![1 << 10, 1 << 12], -1.0, 1.0).unwrap();

    // |x|^(1/2) lies in A_p for every p > 3/2 and satisfies a reverse Holder
    // inequality; all of its characteristics are finite and stable.
    let w = parse_weight_spec("powlog(x0=0, a=-0.5, b=0)").unwrap();
    let requests = [
        ConstantRequest::A1 { w: w.clone() },
        ConstantRequest::Ap { w: w.clone(), p: 2.0 },
        ConstantRequest::Rh { w: w.clone(), s: 2.0 },
        ConstantRequest::Fw { w: w.clone() },
        ConstantRequest::ApVec {
            weights: vec![w.clone(), parse_weight_spec("const(1)").unwrap()],
            pvec: ExponentVector::new(&[2.0, 2.0]).unwrap(),
        },
    ];
    println!("characteristics of |x|^(1/2) on [-1,1], dyadic family:");
    for request in requests {
        let report = request
            .evaluate_ladder(&ladder, family, &quad, &policy)
            .unwrap();
        let series: Vec<String> = report
            .refinement
            .iter()
            .map(|e| format!("{:.6}@{}", e.value, e.n))
            .collect();
        println!(
            "  {:6} = {:.6}  (argmax side {} at {:?}; series {}; {})",
            report.characteristic,
            report.value,
            report.argmax.side,
            report.argmax.anchor,
            series.join(" -> "),
            report.flags.join(","),
        );
    }

    // Full JSON report for one characteristic.
    let report = ConstantRequest::Ap { w, p: 2.0 }
        .evaluate_ladder(&ladder, family, &quad, &policy)
        .unwrap();
    println!("\nJSON report:\n{}", report.to_json());
}
