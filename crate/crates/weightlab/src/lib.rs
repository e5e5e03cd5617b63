//! weightlab: a numerical laboratory for Muckenhoupt-weight theory on
//! discretized domains.
//!
//! The crate computes weight characteristics (`A_1`, `A_p`, `RH_s`, the
//! Fujii-Wilson `A_infty` constant, and the multilinear `A_p-vector`
//! constant), the multilinear maximal operator, and two-weight testing
//! constants, each as a supremum over a finite cube family on a grid. On top
//! of those it runs theorem-level verification scenarios: every inequality is
//! checked numerically across grid refinements, and a known singular weight
//! reproduces the boundary behavior the theory predicts.
//!
//! Weights enter either as closed-form specs (see [`weights::WeightSpec`] and
//! the small grammar parsed by [`weights::parse_weight_spec`]), sampled onto
//! grids by exact antiderivatives or adaptive quadrature, or as raw cell
//! data. Spec-level sampling stores exact cell averages, which makes the
//! continuum Holder-type inequalities hold exactly for the discretized
//! objects.
//!
//! Start with the `examples/` directory: each runnable example demonstrates
//! one capability (constants, maximal operator, two-weight testing, theorem
//! scenarios, the counterexample reproduction). The `weightlab` binary
//! exposes the same functionality as a command-line tool.

pub mod constants;
pub mod exponents;
pub mod grid;
pub mod io;
pub mod maximal;
pub mod report;
pub mod twoweight;
pub mod verify;
pub mod weights;

pub mod cli;

pub use exponents::ExponentVector;
pub use grid::{enumerate_cubes, CellField, Cube, CubeFamily, FamilyKind, Grid};
pub use weights::{
    dual_spec, parse_weight_spec, sample, QuadratureConfig, SampleMode, SampledWeight, WeightSpec,
};
