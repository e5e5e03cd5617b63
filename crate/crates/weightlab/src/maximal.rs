//! The multilinear maximal operator over a cube family, with a naive
//! reference implementation and an accelerated one, plus weighted `L^p`
//! norms.
//!
//! `M(f_1, ..., f_m)(x)` is the maximum over family cubes `Q` containing the
//! cell `x` of the product of the cube averages of the `f_i`. Both algorithm
//! tags draw candidate averages from the same prefix sums, so they produce
//! bit-identical values; they differ only in how the (cell, cube) incidences
//! are enumerated.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{CellField, Cube, CubeFamily, FamilyKind, Grid, GridError};

#[derive(Debug, Error)]
pub enum MaximalError {
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("maximal operator needs at least one field")]
    EmptyInput,
    #[error("exponent must be positive and finite, got {0}")]
    BadExponent(f64),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Algorithm {
    Naive,
    Fast,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Fast => "fast",
        }
    }
}

/// `M(f_vec)` evaluated at cell centers.
#[derive(Debug)]
pub struct MaximalResult {
    pub field: CellField,
    pub family: CubeFamily,
    pub algorithm: Algorithm,
}

/// Product of the cube averages of all fields, in log space when a factor is
/// tiny (duals of singular weights produce very small averages).
#[inline]
fn product_of_averages(fields: &[&CellField], cube: &Cube) -> f64 {
    let mut min_factor = f64::INFINITY;
    let mut plain = 1.0f64;
    for f in fields {
        let avg = f.cube_average_unchecked(cube);
        if avg == 0.0 {
            return 0.0;
        }
        min_factor = min_factor.min(avg);
        plain *= avg;
    }
    if min_factor < 1e-300 {
        let log_sum: f64 = fields
            .iter()
            .map(|f| f.cube_average_unchecked(cube).ln())
            .sum();
        log_sum.exp()
    } else {
        plain
    }
}

/// Multilinear maximal function restricted to cubes of the family contained
/// in `region`; returns one value per region cell in region-local canonical
/// order. The full-grid operator is the special case `region = whole grid`.
///
/// For the dyadic family the region must itself be dyadic-aligned (family
/// cubes intersected with a family cube are nested), which holds for every
/// caller: sweeps iterate regions that are family members.
pub(crate) fn maximal_over_region(
    fields: &[&CellField],
    region: &Cube,
    family: CubeFamily,
    algorithm: Algorithm,
) -> Vec<f64> {
    let grid = fields[0].grid();
    match (family.kind, algorithm) {
        (FamilyKind::Dyadic, Algorithm::Fast) => dyadic_fast(fields, region, family, grid),
        (FamilyKind::AllWindows, Algorithm::Fast) => match grid.dim() {
            1 => windows_fast_1d(fields, region, family),
            _ => windows_fast_2d(fields, region, family),
        },
        (_, Algorithm::Naive) => naive(fields, region, family, grid),
    }
}

/// Reference path: enumerate every (cell, cube) incidence in canonical cube
/// order.
fn naive(fields: &[&CellField], region: &Cube, family: CubeFamily, grid: &Grid) -> Vec<f64> {
    let dim = grid.dim();
    let side = region.side;
    let mut out = vec![0.0f64; region.cells(dim)];
    let sides: Vec<usize> = match family.kind {
        FamilyKind::Dyadic => {
            let mut v = Vec::new();
            let mut s = 1;
            while s <= side {
                if s >= family.min_side_cells {
                    v.push(s);
                }
                s *= 2;
            }
            v
        }
        FamilyKind::AllWindows => (family.min_side_cells.max(1)..=side).collect(),
    };
    for s in sides {
        let step = match family.kind {
            FamilyKind::Dyadic => s,
            FamilyKind::AllWindows => 1,
        };
        let per_axis = (side - s) / step + 1;
        let anchors: Vec<[usize; 2]> = match dim {
            1 => (0..per_axis).map(|i| [region.anchor[0] + i * step, 0]).collect(),
            _ => {
                let mut v = Vec::new();
                for a0 in 0..per_axis {
                    for a1 in 0..per_axis {
                        v.push([
                            region.anchor[0] + a0 * step,
                            region.anchor[1] + a1 * step,
                        ]);
                    }
                }
                v
            }
        };
        for anchor in anchors {
            let cube = Cube::new(anchor, s);
            let candidate = product_of_averages(fields, &cube);
            match dim {
                1 => {
                    let base = anchor[0] - region.anchor[0];
                    for x in base..base + s {
                        if candidate > out[x] {
                            out[x] = candidate;
                        }
                    }
                }
                _ => {
                    for y in 0..s {
                        let row = (anchor[1] - region.anchor[1] + y) * side;
                        let base = anchor[0] - region.anchor[0];
                        for x in 0..s {
                            let idx = row + base + x;
                            if candidate > out[idx] {
                                out[idx] = candidate;
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Dyadic fast path: each cell lies in exactly one cube per level.
fn dyadic_fast(
    fields: &[&CellField],
    region: &Cube,
    family: CubeFamily,
    grid: &Grid,
) -> Vec<f64> {
    let dim = grid.dim();
    let side = region.side;
    let mut out = vec![0.0f64; region.cells(dim)];
    let mut s = 1;
    while s <= side {
        if s >= family.min_side_cells {
            let per_axis = side / s;
            match dim {
                1 => {
                    let layer: Vec<f64> = (0..per_axis)
                        .map(|i| {
                            let cube = Cube::new([region.anchor[0] + i * s, 0], s);
                            product_of_averages(fields, &cube)
                        })
                        .collect();
                    for (x, slot) in out.iter_mut().enumerate() {
                        let v = layer[x / s];
                        if v > *slot {
                            *slot = v;
                        }
                    }
                }
                _ => {
                    let mut layer = vec![0.0f64; per_axis * per_axis];
                    for by in 0..per_axis {
                        for bx in 0..per_axis {
                            let cube = Cube::new(
                                [region.anchor[0] + bx * s, region.anchor[1] + by * s],
                                s,
                            );
                            layer[by * per_axis + bx] = product_of_averages(fields, &cube);
                        }
                    }
                    for y in 0..side {
                        for x in 0..side {
                            let v = layer[(y / s) * per_axis + x / s];
                            let slot = &mut out[y * side + x];
                            if v > *slot {
                                *slot = v;
                            }
                        }
                    }
                }
            }
        }
        s *= 2;
    }
    out
}

/// Monotone-deque sliding maximum: `out[x] = max(out[x], layer-max covering
/// x)` where anchors `l` cover cells `l..l+window`.
fn fold_sliding_max(values: &[f64], window: usize, cells: usize, out: &mut [f64]) {
    let anchors = values.len();
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    for x in 0..cells {
        if x < anchors {
            while let Some(&back) = deque.back() {
                if values[back] <= values[x] {
                    deque.pop_back();
                } else {
                    break;
                }
            }
            deque.push_back(x);
        }
        while let Some(&front) = deque.front() {
            if front + window <= x {
                deque.pop_front();
            } else {
                break;
            }
        }
        let v = values[*deque.front().expect("window covers every cell")];
        if v > out[x] {
            out[x] = v;
        }
    }
}

/// Per-side sweeps with a monotone deque; one pass per window length.
fn windows_fast_1d(fields: &[&CellField], region: &Cube, family: CubeFamily) -> Vec<f64> {
    let side = region.side;
    let min_side = family.min_side_cells.max(1);
    let sides: Vec<usize> = (min_side..=side).collect();
    let merge = |mut acc: Vec<f64>, layer: Vec<f64>| {
        for (a, l) in acc.iter_mut().zip(&layer) {
            if *l > *a {
                *a = *l;
            }
        }
        acc
    };
    sides
        .par_iter()
        .fold(
            || vec![0.0f64; side],
            |mut acc, &s| {
                let anchors = side - s + 1;
                let values: Vec<f64> = (0..anchors)
                    .map(|l| {
                        product_of_averages(fields, &Cube::new([region.anchor[0] + l, 0], s))
                    })
                    .collect();
                fold_sliding_max(&values, s, side, &mut acc);
                acc
            },
        )
        .reduce(|| vec![0.0f64; side], merge)
}

fn windows_fast_2d(fields: &[&CellField], region: &Cube, family: CubeFamily) -> Vec<f64> {
    let side = region.side;
    let min_side = family.min_side_cells.max(1);
    let sides: Vec<usize> = (min_side..=side).collect();
    let merge = |mut acc: Vec<f64>, layer: Vec<f64>| {
        for (a, l) in acc.iter_mut().zip(&layer) {
            if *l > *a {
                *a = *l;
            }
        }
        acc
    };
    sides
        .par_iter()
        .fold(
            || vec![0.0f64; side * side],
            |mut acc, &s| {
                let anchors = side - s + 1;
                let mut products = vec![0.0f64; anchors * anchors];
                for ay in 0..anchors {
                    for ax in 0..anchors {
                        let cube = Cube::new(
                            [region.anchor[0] + ax, region.anchor[1] + ay],
                            s,
                        );
                        products[ay * anchors + ax] = product_of_averages(fields, &cube);
                    }
                }
                // Horizontal pass: per anchor row, max over anchor columns
                // covering each x.
                let mut horiz = vec![0.0f64; anchors * side];
                for ay in 0..anchors {
                    let row = &products[ay * anchors..(ay + 1) * anchors];
                    fold_sliding_max(row, s, side, &mut horiz[ay * side..(ay + 1) * side]);
                }
                // Vertical pass: per x, max over anchor rows covering each y.
                let mut column = vec![0.0f64; anchors];
                let mut col_out = vec![0.0f64; side];
                for x in 0..side {
                    for ay in 0..anchors {
                        column[ay] = horiz[ay * side + x];
                    }
                    col_out.iter_mut().for_each(|v| *v = 0.0);
                    fold_sliding_max(&column, s, side, &mut col_out);
                    for y in 0..side {
                        let slot = &mut acc[y * side + x];
                        if col_out[y] > *slot {
                            *slot = col_out[y];
                        }
                    }
                }
                acc
            },
        )
        .reduce(|| vec![0.0f64; side * side], merge)
}

fn check_shared_grid(fields: &[&CellField]) -> Result<Grid, MaximalError> {
    let first = fields.first().ok_or(MaximalError::EmptyInput)?;
    let grid = *first.grid();
    if fields.iter().any(|f| f.grid() != &grid) {
        return Err(MaximalError::GridMismatch);
    }
    Ok(grid)
}

/// The multilinear maximal operator over a cube family.
pub fn mult_maximal(
    fields: &[&CellField],
    family: CubeFamily,
    algorithm: Algorithm,
) -> Result<MaximalResult, MaximalError> {
    let grid = check_shared_grid(fields)?;
    let whole = Cube::new([0, 0], grid.n());
    let values = maximal_over_region(fields, &whole, family, algorithm);
    Ok(MaximalResult {
        field: CellField::new(grid, values)?,
        family,
        algorithm,
    })
}

/// `(sum_cells f^p u dV)^(1/p)`.
pub fn lp_norm(f: &CellField, u: &CellField, p: f64) -> Result<f64, MaximalError> {
    if f.grid() != u.grid() {
        return Err(MaximalError::GridMismatch);
    }
    if !(p > 0.0) || !p.is_finite() {
        return Err(MaximalError::BadExponent(p));
    }
    let vol = f.grid().cell_volume();
    let sum: f64 = f
        .values()
        .iter()
        .zip(u.values())
        .map(|(&fv, &uv)| fv.powf(p) * uv)
        .sum();
    Ok((sum * vol).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{enumerate_cubes, Grid};

    fn unit_field(n: usize) -> CellField {
        CellField::constant(Grid::line(n, 0.0, 1.0).unwrap(), 1.0).unwrap()
    }

    #[test]
    fn constant_inputs_give_constant_one() {
        let f = unit_field(8);
        for kind in [FamilyKind::Dyadic, FamilyKind::AllWindows] {
            for algo in [Algorithm::Naive, Algorithm::Fast] {
                let m = mult_maximal(&[&f, &f], CubeFamily::new(kind), algo).unwrap();
                assert!(m.field.values().iter().all(|&v| v == 1.0));
            }
        }
    }

    #[test]
    fn indicator_half_interval_dyadic() {
        // f = indicator of [0, 1/2) on [0,1], N=8: M = 1 on [0,1/2), 1/2 on
        // [1/2, 1) for the dyadic family.
        let grid = Grid::line(8, 0.0, 1.0).unwrap();
        let mut v = vec![0.0; 8];
        for cell in v.iter_mut().take(4) {
            *cell = 1.0;
        }
        let f = CellField::new(grid, v).unwrap();
        let m = mult_maximal(&[&f], CubeFamily::dyadic(), Algorithm::Naive).unwrap();
        for x in 0..4 {
            assert_eq!(m.field.values()[x], 1.0);
        }
        for x in 4..8 {
            assert_eq!(m.field.values()[x], 0.5);
        }
    }

    #[test]
    fn homogeneity_in_first_argument() {
        let grid = Grid::line(16, 0.0, 1.0).unwrap();
        let f1: Vec<f64> = (0..16).map(|i| 1.0 + (i % 5) as f64).collect();
        let f2: Vec<f64> = (0..16).map(|i| 2.0 + (i % 3) as f64).collect();
        let a = CellField::new(grid, f1.clone()).unwrap();
        let b = CellField::new(grid, f2.clone()).unwrap();
        // Scaling by a power of two is exact in floating point.
        let by_four = CellField::new(grid, f1.iter().map(|v| 4.0 * v).collect()).unwrap();
        let base = mult_maximal(&[&a, &b], CubeFamily::all_windows(), Algorithm::Fast).unwrap();
        let lam = mult_maximal(&[&by_four, &b], CubeFamily::all_windows(), Algorithm::Fast).unwrap();
        for (x, y) in base.field.values().iter().zip(lam.field.values()) {
            assert_eq!(4.0 * x, *y);
        }
        // Generic scalar: equal to within a rounding step.
        let by_three = CellField::new(grid, f1.iter().map(|v| 3.0 * v).collect()).unwrap();
        let lam3 = mult_maximal(&[&by_three, &b], CubeFamily::all_windows(), Algorithm::Fast).unwrap();
        for (x, y) in base.field.values().iter().zip(lam3.field.values()) {
            assert!((3.0 * x - y).abs() <= 4.0 * f64::EPSILON * y);
        }
    }

    #[test]
    fn naive_equals_fast_exactly() {
        let grid = Grid::line(64, -1.0, 1.0).unwrap();
        let values: Vec<f64> = (0..64)
            .map(|i| 0.5 + ((i * 2654435761usize) % 17) as f64 / 3.0)
            .collect();
        let f = CellField::new(grid, values).unwrap();
        let g = f.map(|v| 1.0 / v).unwrap();
        for kind in [FamilyKind::Dyadic, FamilyKind::AllWindows] {
            let naive = mult_maximal(&[&f, &g], CubeFamily::new(kind), Algorithm::Naive).unwrap();
            let fast = mult_maximal(&[&f, &g], CubeFamily::new(kind), Algorithm::Fast).unwrap();
            assert_eq!(naive.field.values(), fast.field.values(), "{kind:?}");
        }
    }

    #[test]
    fn naive_equals_fast_2d() {
        let grid = Grid::square(8, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let values: Vec<f64> = (0..64)
            .map(|i| 0.25 + ((i * 40503) % 23) as f64 / 5.0)
            .collect();
        let f = CellField::new(grid, values).unwrap();
        for kind in [FamilyKind::Dyadic, FamilyKind::AllWindows] {
            let naive = mult_maximal(&[&f], CubeFamily::new(kind), Algorithm::Naive).unwrap();
            let fast = mult_maximal(&[&f], CubeFamily::new(kind), Algorithm::Fast).unwrap();
            assert_eq!(naive.field.values(), fast.field.values(), "{kind:?}");
        }
    }

    #[test]
    fn dominates_every_candidate_and_submultiplicative() {
        let grid = Grid::line(32, 0.0, 1.0).unwrap();
        let f = CellField::new(grid, (0..32).map(|i| 1.0 + (i % 7) as f64).collect()).unwrap();
        let g = CellField::new(grid, (0..32).map(|i| 1.0 + (i % 4) as f64).collect()).unwrap();
        let family = CubeFamily::all_windows();
        let m = mult_maximal(&[&f, &g], family, Algorithm::Fast).unwrap();
        let mf = mult_maximal(&[&f], family, Algorithm::Fast).unwrap();
        let mg = mult_maximal(&[&g], family, Algorithm::Fast).unwrap();
        for q in enumerate_cubes(&grid, family).unwrap() {
            let candidate = f.cube_average(&q).unwrap() * g.cube_average(&q).unwrap();
            for x in q.anchor[0]..q.anchor[0] + q.side {
                assert!(m.field.values()[x] >= candidate - 1e-12 * candidate);
            }
        }
        for x in 0..32 {
            assert!(
                m.field.values()[x]
                    <= mf.field.values()[x] * mg.field.values()[x] * (1.0 + 1e-12)
            );
        }
    }

    #[test]
    fn dyadic_below_all_windows() {
        let grid = Grid::line(32, 0.0, 1.0).unwrap();
        let f = CellField::new(grid, (0..32).map(|i| 1.0 + (i % 9) as f64).collect()).unwrap();
        let d = mult_maximal(&[&f], CubeFamily::dyadic(), Algorithm::Fast).unwrap();
        let a = mult_maximal(&[&f], CubeFamily::all_windows(), Algorithm::Fast).unwrap();
        for (dv, av) in d.field.values().iter().zip(a.field.values()) {
            assert!(dv <= av);
        }
    }

    #[test]
    fn lp_norm_basics() {
        let f = unit_field(16);
        for p in [0.5, 1.0, 2.0, 7.0] {
            assert!((lp_norm(&f, &f, p).unwrap() - 1.0).abs() < 1e-12);
        }
        let two = CellField::constant(*f.grid(), 2.0).unwrap();
        assert!((lp_norm(&two, &f, 0.5).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn lp_norm_of_identity_function() {
        // f = |x| on [0,1], u = 1, p = 2: norm = 1/sqrt(3).
        let n = 2048;
        let grid = Grid::line(n, 0.0, 1.0).unwrap();
        let h = 1.0 / n as f64;
        let f = CellField::new(grid, (0..n).map(|i| (i as f64 + 0.5) * h).collect()).unwrap();
        let u = CellField::constant(grid, 1.0).unwrap();
        let got = lp_norm(&f, &u, 2.0).unwrap();
        assert!((got - 1.0 / 3f64.sqrt()).abs() < 1e-6);
    }
}
