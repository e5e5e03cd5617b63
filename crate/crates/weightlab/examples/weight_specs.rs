//! Weight specs: the grammar, duals, and exact sampling.
//!
//! ```bash
//! cargo run --release --example weight_specs
//! ```

use weightlab::weights::{dual_spec, integrate, parse_weight_spec, sample, QuadratureConfig};
use weightlab::Grid;

fn main() {
    let quad = QuadratureConfig::default();

    // The grammar: const, powlog, pow, prod, piecewise.
    let texts = [
        "const(1)",
        "powlog(x0=0, a=0.5, b=2)",
        "prod(const(2), powlog(x0=-1, a=0.25, b=0))",
        "piecewise([-1,1]: powlog(x0=0,a=1,b=2); else: const(1))",
    ];
    println!("parsed specs (canonical form):");
    for text in texts {
        let spec = parse_weight_spec(text).unwrap();
        println!("  {text}\n    -> {spec}");
    }

    // Dual weights are formed symbolically, so their cell averages are exact.
    let w = parse_weight_spec("powlog(x0=0, a=-0.5, b=0)").unwrap(); // |x|^(1/2)
    for p in [1.5, 2.0, 3.0] {
        let sigma = dual_spec(&w, p).simplify();
        println!("dual of {w} at p={p}: {sigma}");
    }

    // Sampling stores exact cell averages: here |x|^(1/2) on [-1, 1].
    let grid = Grid::line(8, -1.0, 1.0).unwrap();
    let sampled = sample(&w, &grid, &quad).unwrap();
    println!("cell averages of {w} at N=8 on [-1,1]:");
    for (i, v) in sampled.field().values().iter().enumerate() {
        let (lo, hi) = grid.cell_bounds(0, i);
        println!("  [{lo:+.3}, {hi:+.3}) -> {v:.6}");
    }

    // The singular model weight integrates in closed form:
    // int_0^t dx/(x log^2(e/x)) = 1/log(e/t).
    let w1 = parse_weight_spec("powlog(x0=0, a=1, b=2)").unwrap();
    for t in [1.0, 0.5, 0.001] {
        let mass = integrate(&w1, 0.0, t, &quad).unwrap();
        let exact = 1.0 / (1.0 - t.ln());
        println!("int_0^{t} of the singular model weight = {mass:.12} (exact {exact:.12})");
    }
}
