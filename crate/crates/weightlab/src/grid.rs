//! Discretized domains, cube enumeration, and O(1) cube averages and minima
//! over cell-valued fields.
//!
//! A [`Grid`] is an axis-aligned box split into `N = 2^k` cells per side
//! (dimension 1 or 2). A [`Cube`] is a grid-aligned box of cells with equal
//! side length on every axis. A [`CellField`] stores one nonnegative value per
//! cell (the cell average of the function it represents) together with a
//! summed-area table and a range-minimum structure, so cube averages and cube
//! minima cost O(1) per query.

use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimension must be 1 or 2, got {0}")]
    BadDim(usize),
    #[error("cells per side must be a power of two >= 2, got {0}")]
    BadCellCount(usize),
    #[error("domain upper bound must exceed lower bound on axis {axis}: [{lo}, {hi}]")]
    BadDomain { axis: usize, lo: f64, hi: f64 },
    #[error("cube out of bounds: anchor {anchor:?} side {side} on grid with {n} cells per side")]
    OutOfBounds {
        anchor: [usize; 2],
        side: usize,
        n: usize,
    },
    #[error("minimum side {min_side} exceeds grid side {n}: family is empty")]
    EmptyFamily { min_side: usize, n: usize },
    #[error("expected {expected} cell values, got {got}")]
    BadValueCount { expected: usize, got: usize },
    #[error("cell {index} holds a non-finite or negative value: {value}")]
    BadCellValue { index: usize, value: f64 },
    #[error("fields live on different grids")]
    GridMismatch,
}

/// Axis-aligned discretized domain with `n` cells per side, `n` a power of two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    lo: [f64; 2],
    hi: [f64; 2],
}

impl Grid {
    pub fn new(dim: usize, n: usize, lo: [f64; 2], hi: [f64; 2]) -> Result<Self, GridError> {
        if dim != 1 && dim != 2 {
            return Err(GridError::BadDim(dim));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(GridError::BadCellCount(n));
        }
        for axis in 0..dim {
            if !(hi[axis] > lo[axis]) || !lo[axis].is_finite() || !hi[axis].is_finite() {
                return Err(GridError::BadDomain {
                    axis,
                    lo: lo[axis],
                    hi: hi[axis],
                });
            }
        }
        Ok(Grid { dim, n, lo, hi })
    }

    pub fn line(n: usize, lo: f64, hi: f64) -> Result<Self, GridError> {
        Grid::new(1, n, [lo, 0.0], [hi, 1.0])
    }

    pub fn square(n: usize, lo: [f64; 2], hi: [f64; 2]) -> Result<Self, GridError> {
        Grid::new(2, n, lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo[..self.dim]
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi[..self.dim]
    }

    pub fn cell_width(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.cell_width(a)).product()
    }

    pub fn cell_count(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Interval of axis `axis` covered by cell index `i` along that axis.
    pub fn cell_bounds(&self, axis: usize, i: usize) -> (f64, f64) {
        let w = self.cell_width(axis);
        (
            self.lo[axis] + i as f64 * w,
            self.lo[axis] + (i + 1) as f64 * w,
        )
    }

    /// Linear index of a cell; axis 0 varies fastest.
    pub fn cell_index(&self, coords: [usize; 2]) -> usize {
        match self.dim {
            1 => coords[0],
            _ => coords[1] * self.n + coords[0],
        }
    }

    pub fn cell_coords(&self, index: usize) -> [usize; 2] {
        match self.dim {
            1 => [index, 0],
            _ => [index % self.n, index / self.n],
        }
    }
}

/// Grid-aligned cube: lower-corner cell indices plus a common side in cells.
/// Cubes are closed-open boxes of cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cube {
    pub anchor: [usize; 2],
    pub side: usize,
}

impl Cube {
    pub fn new(anchor: [usize; 2], side: usize) -> Self {
        Cube { anchor, side }
    }

    pub fn cells(&self, dim: usize) -> usize {
        self.side.pow(dim as u32)
    }

    pub fn contains_cell(&self, dim: usize, coords: [usize; 2]) -> bool {
        (0..dim).all(|a| coords[a] >= self.anchor[a] && coords[a] < self.anchor[a] + self.side)
    }

    fn check(&self, grid: &Grid) -> Result<(), GridError> {
        let ok = self.side >= 1
            && (0..grid.dim).all(|a| self.anchor[a] + self.side <= grid.n)
            && (grid.dim..2).all(|a| self.anchor[a] == 0);
        if ok {
            Ok(())
        } else {
            Err(GridError::OutOfBounds {
                anchor: self.anchor,
                side: self.side,
                n: grid.n,
            })
        }
    }
}

/// Which cubes a supremum runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FamilyKind {
    /// Sides `2^j`, anchors multiples of `2^j`.
    Dyadic,
    /// Every grid-aligned cube.
    AllWindows,
}

impl FamilyKind {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyKind::Dyadic => "dyadic",
            FamilyKind::AllWindows => "all",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeFamily {
    pub kind: FamilyKind,
    pub min_side_cells: usize,
}

impl CubeFamily {
    pub fn dyadic() -> Self {
        CubeFamily {
            kind: FamilyKind::Dyadic,
            min_side_cells: 1,
        }
    }

    pub fn all_windows() -> Self {
        CubeFamily {
            kind: FamilyKind::AllWindows,
            min_side_cells: 1,
        }
    }

    pub fn new(kind: FamilyKind) -> Self {
        CubeFamily {
            kind,
            min_side_cells: 1,
        }
    }
}

/// Indexed view of a cube family on a grid: O(1) access by canonical ordinal
/// (increasing side, then lexicographic anchor), so sweeps can be partitioned
/// arbitrarily while keeping one deterministic order.
#[derive(Debug, Clone)]
struct SideBlock {
    side: usize,
    per_axis: usize,
    anchor_step: usize,
    offset: u64,
}

#[derive(Debug, Clone)]
pub struct FamilyIndex {
    dim: usize,
    blocks: Vec<SideBlock>,
    total: u64,
}

impl FamilyIndex {
    pub fn new(grid: &Grid, family: CubeFamily) -> Result<Self, GridError> {
        let n = grid.n;
        let min_side = family.min_side_cells.max(1);
        if min_side > n {
            return Err(GridError::EmptyFamily { min_side, n });
        }
        let mut blocks = Vec::new();
        let mut total = 0u64;
        match family.kind {
            FamilyKind::Dyadic => {
                let mut side = 1;
                while side <= n {
                    if side >= min_side {
                        let per_axis = n / side;
                        blocks.push(SideBlock {
                            side,
                            per_axis,
                            anchor_step: side,
                            offset: total,
                        });
                        total += (per_axis as u64).pow(grid.dim as u32);
                    }
                    side *= 2;
                }
            }
            FamilyKind::AllWindows => {
                for side in min_side..=n {
                    let per_axis = n - side + 1;
                    blocks.push(SideBlock {
                        side,
                        per_axis,
                        anchor_step: 1,
                        offset: total,
                    });
                    total += (per_axis as u64).pow(grid.dim as u32);
                }
            }
        }
        Ok(FamilyIndex {
            dim: grid.dim,
            blocks,
            total,
        })
    }

    pub fn len(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Sides present in the family, ascending.
    pub fn sides(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().map(|b| b.side)
    }

    /// Cube at canonical ordinal `ord`.
    pub fn cube(&self, ord: u64) -> Cube {
        debug_assert!(ord < self.total);
        let bi = match self.blocks.binary_search_by(|b| b.offset.cmp(&ord)) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let block = &self.blocks[bi];
        let local = (ord - block.offset) as usize;
        let anchor = match self.dim {
            1 => [local * block.anchor_step, 0],
            _ => [
                (local / block.per_axis) * block.anchor_step,
                (local % block.per_axis) * block.anchor_step,
            ],
        };
        Cube::new(anchor, block.side)
    }

    pub fn iter(&self) -> impl Iterator<Item = Cube> + '_ {
        (0..self.total).map(|ord| self.cube(ord))
    }
}

/// Every cube of the family on this grid, exactly once, in canonical order.
pub fn enumerate_cubes(grid: &Grid, family: CubeFamily) -> Result<Vec<Cube>, GridError> {
    let index = FamilyIndex::new(grid, family)?;
    Ok(index.iter().collect())
}

// --- double-double accumulation ------------------------------------------
//
// Prefix sums are held as unevaluated (hi, lo) pairs so that cube sums keep
// ~107 bits through the inclusion-exclusion, even on long sweeps.

#[derive(Debug, Clone, Copy, Default)]
struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    #[inline]
    fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn add(self, other: Dd) -> Dd {
        let (s1, e1) = two_sum(self.hi, other.hi);
        let (s2, e2) = two_sum(self.lo, other.lo);
        let (s1, e1) = quick_two_sum(s1, e1 + s2);
        let (hi, lo) = quick_two_sum(s1, e1 + e2);
        Dd { hi, lo }
    }

    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    #[inline]
    fn sub(self, other: Dd) -> Dd {
        self.add(other.neg())
    }

    #[inline]
    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

// --- range-minimum tables --------------------------------------------------

/// 1D sparse table: `table[k][i]` = min over `[i, i + 2^k)`.
#[derive(Debug)]
struct SparseTable1d {
    levels: Vec<Vec<f64>>,
}

impl SparseTable1d {
    fn build(values: &[f64]) -> Self {
        let n = values.len();
        let kmax = n.ilog2() as usize;
        let mut levels = Vec::with_capacity(kmax + 1);
        levels.push(values.to_vec());
        for k in 1..=kmax {
            let half = 1usize << (k - 1);
            let prev = &levels[k - 1];
            let len = n - (1usize << k) + 1;
            let mut row = Vec::with_capacity(len);
            for i in 0..len {
                row.push(prev[i].min(prev[i + half]));
            }
            levels.push(row);
        }
        SparseTable1d { levels }
    }

    #[inline]
    fn min(&self, start: usize, len: usize) -> f64 {
        let k = len.ilog2() as usize;
        let row = &self.levels[k];
        row[start].min(row[start + len - (1usize << k)])
    }
}

/// 2D square-block table: `levels[k]` holds the min over every `2^k x 2^k`
/// square; an arbitrary `s x s` square is covered by four overlapping blocks.
#[derive(Debug)]
struct SparseTable2d {
    n: usize,
    levels: Vec<Vec<f64>>,
}

impl SparseTable2d {
    fn build(values: &[f64], n: usize) -> Self {
        let kmax = n.ilog2() as usize;
        let mut levels = Vec::with_capacity(kmax + 1);
        levels.push(values.to_vec());
        for k in 1..=kmax {
            let half = 1usize << (k - 1);
            let prev_per = n - half + 1;
            let per = n - (1usize << k) + 1;
            let prev = &levels[k - 1];
            let mut cur = vec![0.0f64; per * per];
            for y in 0..per {
                for x in 0..per {
                    let a = prev[y * prev_per + x];
                    let b = prev[y * prev_per + x + half];
                    let c = prev[(y + half) * prev_per + x];
                    let d = prev[(y + half) * prev_per + x + half];
                    cur[y * per + x] = a.min(b).min(c).min(d);
                }
            }
            levels.push(cur);
        }
        SparseTable2d { n, levels }
    }

    #[inline]
    fn min(&self, x: usize, y: usize, side: usize) -> f64 {
        let k = side.ilog2() as usize;
        let block = 1usize << k;
        let per = self.n - block + 1;
        let row = &self.levels[k];
        let dx = x + side - block;
        let dy = y + side - block;
        row[y * per + x]
            .min(row[y * per + dx])
            .min(row[dy * per + x])
            .min(row[dy * per + dx])
    }
}

enum MinTable {
    One(SparseTable1d),
    Two(SparseTable2d),
}

/// Per-cell nonnegative values with prefix sums for O(1) cube averages and a
/// range-minimum table for O(1) cube minima. Immutable after construction;
/// all queries are pure and safe to run concurrently.
pub struct CellField {
    grid: Grid,
    values: Vec<f64>,
    prefix: Vec<Dd>,
    mins: OnceLock<MinTable>,
}

impl std::fmt::Debug for CellField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CellField")
            .field("grid", &self.grid)
            .field("cells", &self.values.len())
            .finish()
    }
}

impl Clone for CellField {
    fn clone(&self) -> Self {
        CellField {
            grid: self.grid,
            values: self.values.clone(),
            prefix: self.prefix.clone(),
            mins: OnceLock::new(),
        }
    }
}

impl CellField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.cell_count() {
            return Err(GridError::BadValueCount {
                expected: grid.cell_count(),
                got: values.len(),
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() || value < 0.0 {
                return Err(GridError::BadCellValue { index, value });
            }
        }
        let prefix = match grid.dim {
            1 => {
                let mut p = Vec::with_capacity(values.len() + 1);
                p.push(Dd::default());
                let mut acc = Dd::default();
                for &v in &values {
                    acc = acc.add(Dd::from_f64(v));
                    p.push(acc);
                }
                p
            }
            _ => {
                let n = grid.n;
                let mut p = vec![Dd::default(); (n + 1) * (n + 1)];
                for y in 0..n {
                    for x in 0..n {
                        let v = Dd::from_f64(values[y * n + x]);
                        let up = p[y * (n + 1) + (x + 1)];
                        let left = p[(y + 1) * (n + 1) + x];
                        let diag = p[y * (n + 1) + x];
                        p[(y + 1) * (n + 1) + (x + 1)] = v.add(up).add(left).sub(diag);
                    }
                }
                p
            }
        };
        Ok(CellField {
            grid,
            values,
            prefix,
            mins: OnceLock::new(),
        })
    }

    pub fn constant(grid: Grid, value: f64) -> Result<Self, GridError> {
        let n = grid.cell_count();
        CellField::new(grid, vec![value; n])
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Apply a cellwise map, producing a new field on the same grid.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        CellField::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    fn min_table(&self) -> &MinTable {
        self.mins.get_or_init(|| match self.grid.dim {
            1 => MinTable::One(SparseTable1d::build(&self.values)),
            _ => MinTable::Two(SparseTable2d::build(&self.values, self.grid.n)),
        })
    }

    /// Sum of cell values over the cube (not scaled by cell volume).
    pub fn cube_value_sum(&self, q: &Cube) -> Result<f64, GridError> {
        q.check(&self.grid)?;
        Ok(self.cube_value_sum_unchecked(q))
    }

    #[inline]
    pub(crate) fn cube_value_sum_unchecked(&self, q: &Cube) -> f64 {
        match self.grid.dim {
            1 => {
                let a = q.anchor[0];
                self.prefix[a + q.side].sub(self.prefix[a]).value()
            }
            _ => {
                let n1 = self.grid.n + 1;
                let (x1, y1) = (q.anchor[0], q.anchor[1]);
                let (x2, y2) = (x1 + q.side, y1 + q.side);
                self.prefix[y2 * n1 + x2]
                    .sub(self.prefix[y1 * n1 + x2])
                    .sub(self.prefix[y2 * n1 + x1])
                    .add(self.prefix[y1 * n1 + x1])
                    .value()
            }
        }
    }

    /// Average of cell values over the cube. Because stored values are cell
    /// averages, this equals the integral average over the cube's box.
    pub fn cube_average(&self, q: &Cube) -> Result<f64, GridError> {
        q.check(&self.grid)?;
        Ok(self.cube_average_unchecked(q))
    }

    #[inline]
    pub(crate) fn cube_average_unchecked(&self, q: &Cube) -> f64 {
        self.cube_value_sum_unchecked(q) / q.cells(self.grid.dim) as f64
    }

    /// Integral of the represented function over the cube: value sum times
    /// cell volume.
    pub fn cube_mass(&self, q: &Cube) -> Result<f64, GridError> {
        Ok(self.cube_value_sum(q)? * self.grid.cell_volume())
    }

    /// Minimum stored cell value over the cube.
    pub fn cube_min(&self, q: &Cube) -> Result<f64, GridError> {
        q.check(&self.grid)?;
        Ok(self.cube_min_unchecked(q))
    }

    #[inline]
    pub(crate) fn cube_min_unchecked(&self, q: &Cube) -> f64 {
        match self.min_table() {
            MinTable::One(t) => t.min(q.anchor[0], q.side),
            MinTable::Two(t) => t.min(q.anchor[0], q.anchor[1], q.side),
        }
    }
}

/// Deterministic max-reduction item: larger value wins, ties break toward the
/// smaller canonical ordinal, so results are identical across any partition of
/// the sweep.
#[derive(Debug, Clone, Copy)]
pub struct MaxCandidate {
    pub value: f64,
    pub ord: u64,
}

impl MaxCandidate {
    pub fn empty() -> Self {
        MaxCandidate {
            value: f64::NEG_INFINITY,
            ord: u64::MAX,
        }
    }

    #[inline]
    pub fn merge(self, other: MaxCandidate) -> MaxCandidate {
        if other.value > self.value || (other.value == self.value && other.ord < self.ord) {
            other
        } else {
            self
        }
    }
}
