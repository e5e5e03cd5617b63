//! Shared serialization primitives for reports.
//!
//! JSON is the canonical output (schema tag `weightlab-report/1`); CSV is a
//! flat projection for spreadsheets.

use serde::Serialize;

use crate::grid::{Cube, Grid};

pub const REPORT_SCHEMA: &str = "weightlab-report/1";

#[derive(Debug, Clone, Serialize)]
pub struct GridMeta {
    pub dim: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl GridMeta {
    pub fn of(grid: &Grid) -> Self {
        GridMeta {
            dim: grid.dim(),
            n: grid.n(),
            lo: grid.lo().to_vec(),
            hi: grid.hi().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ArgmaxCube {
    pub anchor: Vec<usize>,
    pub side: usize,
}

impl ArgmaxCube {
    pub fn of(cube: &Cube, dim: usize) -> Self {
        ArgmaxCube {
            anchor: cube.anchor[..dim].to_vec(),
            side: cube.side,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RefinementEntry {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization");
    s.push('\n');
    s
}

/// Sidecar metadata for exported maximal-function fields.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalMeta {
    pub schema: &'static str,
    pub kind: &'static str,
    pub family: String,
    pub algorithm: String,
    pub weights: Vec<String>,
    pub grid: GridMeta,
}
