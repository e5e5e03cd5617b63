//! Property tests for the structural invariants: parser round-trips, prefix
//! sums against naive summation, cube average/minimum ordering, and the
//! discrete Holder floors.

use proptest::prelude::*;

use weightlab::constants::{ap_sweep, sweep};
use weightlab::exponents::ExponentVector;
use weightlab::grid::{CellField, Cube, CubeFamily, Grid};
use weightlab::weights::{parse_weight_spec, SampledWeight, SampleMode, WeightSpec};

fn spec_strategy() -> impl Strategy<Value = WeightSpec> {
    let leaf = prop_oneof![
        (0.001f64..100.0).prop_map(WeightSpec::Const),
        (-2.0f64..2.0, -1.5f64..1.0, -3.0f64..3.0)
            .prop_map(|(x0, a, b)| WeightSpec::powlog(x0, a, b)),
    ];
    leaf.prop_recursive(3, 16, 4, |inner| {
        prop_oneof![
            (inner.clone(), -3.0f64..3.0)
                .prop_map(|(s, r)| WeightSpec::Power(Box::new(s), r)),
            prop::collection::vec(inner.clone(), 1..4).prop_map(WeightSpec::Product),
            (inner.clone(), inner, -5.0f64..0.0, 0.001f64..5.0).prop_map(
                |(piece, default, lo, span)| WeightSpec::Piecewise {
                    pieces: vec![(lo, lo + span, piece)],
                    default: Box::new(default),
                }
            ),
        ]
    })
}

/// Grid size, positive cell values, and a cube inside the grid.
fn field_and_cube() -> impl Strategy<Value = (usize, Vec<f64>, usize, usize)> {
    (1u32..=7).prop_flat_map(|k| {
        let n = 1usize << k;
        (
            Just(n),
            prop::collection::vec(1e-6f64..1e6, n),
            0..n,
            1..=n,
        )
            .prop_filter("cube fits", |(n, _, anchor, side)| anchor + side <= *n)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn parse_print_parse_is_identity(spec in spec_strategy()) {
        let printed = spec.to_string();
        let reparsed = parse_weight_spec(&printed).unwrap();
        prop_assert_eq!(&spec, &reparsed);
        // Canonical form: printing is a fixed point.
        prop_assert_eq!(printed, reparsed.to_string());
    }

    #[test]
    fn prefix_average_matches_naive_summation((n, values, anchor, side) in field_and_cube()) {
        let grid = Grid::line(n, 0.0, 1.0).unwrap();
        let field = CellField::new(grid, values.clone()).unwrap();
        let q = Cube::new([anchor, 0], side);
        let naive: f64 = values[anchor..anchor + side].iter().sum::<f64>() / side as f64;
        let fast = field.cube_average(&q).unwrap();
        prop_assert!((fast - naive).abs() <= 1e-12 * naive.abs());
    }

    #[test]
    fn cube_average_dominates_cube_min((n, values, anchor, side) in field_and_cube()) {
        let grid = Grid::line(n, 0.0, 1.0).unwrap();
        let field = CellField::new(grid, values).unwrap();
        let q = Cube::new([anchor, 0], side);
        prop_assert!(field.cube_average(&q).unwrap() >= field.cube_min(&q).unwrap());
    }

    #[test]
    fn discrete_ap_quotients_meet_holder_floor(
        (n, values, _, _) in field_and_cube(),
        p in 1.1f64..6.0,
    ) {
        let grid = Grid::line(n, 0.0, 1.0).unwrap();
        // Clamp the dynamic range so cellwise powers stay finite.
        let clamped: Vec<f64> = values.iter().map(|v| v.clamp(1e-3, 1e3)).collect();
        let field = CellField::new(grid, clamped).unwrap();
        let w = SampledWeight::from_field(field, SampleMode::Discrete, "prop".into());
        let sigma = w.cellwise_pow(1.0 - p / (p - 1.0)).unwrap();
        let outcome = ap_sweep(&w, &sigma, p, CubeFamily::all_windows()).unwrap();
        prop_assert!(outcome.min >= 1.0 - 1e-9, "min quotient {}", outcome.min);
        prop_assert!(outcome.max >= outcome.min);
    }

    #[test]
    fn dyadic_supremum_below_all_windows((n, values, _, _) in field_and_cube()) {
        let grid = Grid::line(n, 0.0, 1.0).unwrap();
        let field = CellField::new(grid, values).unwrap();
        let quotient = |q: &Cube| field.cube_average(q).unwrap() / field.cube_min(q).unwrap();
        let dyadic = sweep(&grid, CubeFamily::dyadic(), quotient).unwrap();
        let all = sweep(&grid, CubeFamily::all_windows(), quotient).unwrap();
        prop_assert!(dyadic.max <= all.max * (1.0 + 1e-12));
    }

    #[test]
    fn exponent_identity_residual_is_tiny(
        ps in prop::collection::vec(1.01f64..50.0, 1..6),
    ) {
        let pvec = ExponentVector::new(&ps).unwrap();
        prop_assert!(pvec.identity_residual().abs() <= 1e-14);
    }
}
