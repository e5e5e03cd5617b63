//! Two-weight testing: the Sawyer-type testing constant, the empirical norm
//! lower bound with indicator and random probes, and the sufficiency
//! scenario across a grid ladder.
//!
//! ```bash
//! cargo run --release --example two_weight_testing
//! ```

use weightlab::constants::{GridLadder, VerdictPolicy};
use weightlab::twoweight::{empirical_norm, sp_constant, theorem19_scenario, ProbeSet};
use weightlab::weights::{parse_weight_spec, sample, QuadratureConfig};
use weightlab::{CubeFamily, ExponentVector, Grid};

fn main() {
    let quad = QuadratureConfig::default();
    let family = CubeFamily::dyadic();
    let grid = Grid::line(256, -1.0, 1.0).unwrap();
    let pvec = ExponentVector::new(&[2.0, 2.0]).unwrap();

    let u = sample(&parse_weight_spec("const(1)").unwrap(), &grid, &quad).unwrap();
    let s1 = sample(
        &parse_weight_spec("powlog(x0=0, a=0.5, b=0)").unwrap(),
        &grid,
        &quad,
    )
    .unwrap();
    let s2 = sample(
        &parse_weight_spec("powlog(x0=0, a=-0.25, b=0)").unwrap(),
        &grid,
        &quad,
    )
    .unwrap();

    let sp = sp_constant(&u, &[&s1, &s2], &pvec, family).unwrap();
    println!(
        "testing constant = {:.6} (argmax side {} at {:?})",
        sp.value, sp.argmax.side, sp.argmax.anchor
    );

    // Indicator probes realize the testing quotient; random dyadic steps
    // search beyond it. The result is always a lower bound for the norm.
    let report = empirical_norm(
        &u,
        &[&s1, &s2],
        &pvec,
        family,
        &ProbeSet::with_random(64, 7),
    )
    .unwrap();
    println!(
        "empirical norm lower bound = {:.6} via {:?} probe; ordering holds: {}",
        report.empirical_norm, report.argmax_probe.kind, report.ordering_holds
    );

    // The sufficiency scenario: stable A_infty duals and a stable testing
    // constant must come with a stable empirical norm.
    let ladder = GridLadder::new(vec![1 << 6, 1 << 8], -1.0, 1.0).unwrap();
    let doc = theorem19_scenario(
        &[
            parse_weight_spec("powlog(x0=0, a=0.5, b=0)").unwrap(),
            parse_weight_spec("powlog(x0=0, a=-0.25, b=0)").unwrap(),
        ],
        &parse_weight_spec("const(1)").unwrap(),
        &pvec,
        &ladder,
        family,
        &ProbeSet::indicators(),
        &quad,
        &VerdictPolicy::default(),
    )
    .unwrap();
    println!("sufficiency scenario verdict: {}", doc.verdict);
    println!("{}", doc.to_json());
}
