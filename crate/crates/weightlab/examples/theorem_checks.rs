//! Theorem-level verification scenarios: the multilinear reverse Holder
//! inequality, its corollary form, the product bound, the structure theorem
//! chain, the A_infty characterization, and the bilinear complement.
//!
//! ```bash
//! cargo run --release --example theorem_checks
//! ```

use weightlab::constants::{GridLadder, VerdictPolicy};
use weightlab::verify::{
    product_bound_check, rh_complement_check, theorem15_check, theorem17_check,
    verify_cor_multrh, verify_multrh, ReportDocument,
};
use weightlab::weights::{parse_weight_spec, QuadratureConfig};
use weightlab::{CubeFamily, ExponentVector, Grid, WeightSpec};

fn summarize(doc: &ReportDocument) {
    let failed = doc.assertions.iter().filter(|a| !a.pass).count();
    println!(
        "{:14} {:4}  ({} assertions, {} failed{})",
        doc.scenario,
        if doc.pass { "PASS" } else { "FAIL" },
        doc.assertions.len(),
        failed,
        if doc.flags.is_empty() {
            String::new()
        } else {
            format!("; flags: {}", doc.flags.join(","))
        }
    );
    for series in &doc.series {
        let values: Vec<String> = series
            .entries
            .iter()
            .map(|e| format!("{:.4}", e.value))
            .collect();
        println!(
            "    {:24} [{}] {:?}",
            series.characteristic,
            values.join(", "),
            series.verdict
        );
    }
}

fn main() {
    let quad = QuadratureConfig::default();
    let policy = VerdictPolicy::default();
    let family = CubeFamily::dyadic();
    let ladder = GridLadder::new(vec![1 << 10, 1 << 12], -1.0, 1.0).unwrap();

    let w1: WeightSpec = parse_weight_spec("powlog(x0=0, a=-0.25, b=0)").unwrap(); // |x|^(1/4)
    let w2: WeightSpec = parse_weight_spec("powlog(x0=0, a=0.125, b=0)").unwrap(); // |x|^(-1/8)
    let pvec = ExponentVector::new(&[2.0, 2.0]).unwrap();

    // Reverse Holder for the pair with s_1 = s_2 = 2.
    let doc = verify_multrh(
        &[w1.clone(), w2.clone()],
        &[2.0, 2.0],
        &ladder,
        family,
        &quad,
        &policy,
    )
    .unwrap();
    summarize(&doc);

    // Corollary form at p_i = (2, 2).
    let doc = verify_cor_multrh(&[w1.clone(), w2.clone()], &pvec, &ladder, family, &quad, &policy)
        .unwrap();
    summarize(&doc);

    // Product bound at one resolution.
    let grid = Grid::line(1 << 12, -1.0, 1.0).unwrap();
    let doc = product_bound_check(&[w1.clone(), w2.clone()], &pvec, &grid, family, &quad).unwrap();
    summarize(&doc);

    // Structure theorem: vector membership plus component A_infty forces
    // component A_{p_i} membership, via the measured corollary ratio.
    let doc =
        theorem15_check(&[w1.clone(), w2.clone()], &pvec, &ladder, family, &quad, &policy).unwrap();
    summarize(&doc);

    // A_infty characterization: the vector constant is stable exactly when
    // the combined weight and every dual have stable A_infty series.
    let doc =
        theorem17_check(&[w1.clone(), w2.clone()], &pvec, &ladder, family, &quad, &policy).unwrap();
    summarize(&doc);

    // Bilinear complement: a stable reverse Holder ratio plus one component
    // in RH forces the other component into its class.
    let doc = rh_complement_check(&w1, &w2, 2.0, 2.0, &ladder, family, &quad, &policy).unwrap();
    summarize(&doc);
}
