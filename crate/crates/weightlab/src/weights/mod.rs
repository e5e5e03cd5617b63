//! Closed-form weight specifications, a parser for them, exact and adaptive
//! quadrature of cell averages (including endpoint singularities), and the
//! special integrals used by the verification scenarios.
//!
//! A [`WeightSpec`] is a small AST over positive functions of one variable:
//! constants, power-log singularities `|x-x0|^(-a) * log(e/|x-x0|)^(-b)`,
//! powers, products, and piecewise combinations. Sampling a spec onto a
//! [`Grid`](crate::grid::Grid) produces exact cell averages, so the continuum
//! Holder-type inequalities hold exactly for the sampled fields.

mod parse;
mod quad;
mod sample;

pub use parse::parse_weight_spec;
pub use quad::integrate;
pub use sample::{logcalc_integral, random_weight, sample, LogcalcResult};
pub(crate) use sample::{hash3, unit_f64};

use thiserror::Error;

use crate::grid::{CellField, Grid, GridError};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("semantic error at offset {offset}: {message}")]
    Semantic { offset: usize, message: String },
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("not locally integrable: {detail}")]
    NotIntegrable { detail: String },
    #[error("quadrature tolerance not reached: {detail}")]
    ToleranceNotReached { detail: String },
    #[error("log factor nonpositive at distance >= e from center {center}")]
    LogDomain { center: f64 },
    #[error("sampled cell value not strictly positive: {detail}")]
    NonPositive { detail: String },
    #[error("bad quadrature config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

/// Abstract syntax tree for closed-form weight families.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// Positive constant.
    Const(f64),
    /// `|x - x0|^(-a) * log(e/|x - x0|)^(-b)`.
    PowLog { x0: f64, a: f64, b: f64 },
    /// Pointwise power of a spec.
    Power(Box<WeightSpec>, f64),
    /// Pointwise product.
    Product(Vec<WeightSpec>),
    /// First matching `[lo, hi]` region wins; `default` elsewhere.
    Piecewise {
        pieces: Vec<(f64, f64, WeightSpec)>,
        default: Box<WeightSpec>,
    },
}

impl WeightSpec {
    pub fn powlog(x0: f64, a: f64, b: f64) -> Self {
        WeightSpec::PowLog { x0, a, b }
    }

    /// `|x|^a` as a spec (note the sign convention: PowLog stores `-a`).
    pub fn abs_power(exponent: f64) -> Self {
        WeightSpec::PowLog {
            x0: 0.0,
            a: -exponent,
            b: 0.0,
        }
    }

    /// The counterexample weight: `1/(|x| log(e/|x|)^2)` on `[-1, 1]`, `1`
    /// outside.
    pub fn singular_log_weight() -> Self {
        WeightSpec::Piecewise {
            pieces: vec![(-1.0, 1.0, WeightSpec::powlog(0.0, 1.0, 2.0))],
            default: Box::new(WeightSpec::Const(1.0)),
        }
    }

    /// Pointwise value; `inf` at singular points is possible.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            WeightSpec::Const(c) => *c,
            WeightSpec::PowLog { x0, a, b } => {
                let d = (x - x0).abs();
                let pow = d.powf(-a);
                if *b == 0.0 {
                    pow
                } else {
                    pow * (1.0 - d.ln()).powf(-b)
                }
            }
            WeightSpec::Power(inner, r) => inner.eval(x).powf(*r),
            WeightSpec::Product(children) => children.iter().map(|c| c.eval(x)).product(),
            WeightSpec::Piecewise { pieces, default } => pieces
                .iter()
                .find(|(lo, hi, _)| x >= *lo && x <= *hi)
                .map(|(_, _, s)| s.eval(x))
                .unwrap_or_else(|| default.eval(x)),
        }
    }

    /// Push powers down and flatten products, merging power-log factors that
    /// share a center. The result evaluates to the same function.
    pub fn simplify(&self) -> WeightSpec {
        match self {
            WeightSpec::Const(c) => WeightSpec::Const(*c),
            WeightSpec::PowLog { x0: _, a, b } => {
                if *a == 0.0 && *b == 0.0 {
                    WeightSpec::Const(1.0)
                } else {
                    self.clone()
                }
            }
            WeightSpec::Power(inner, r) => {
                if *r == 0.0 {
                    return WeightSpec::Const(1.0);
                }
                match inner.simplify() {
                    WeightSpec::Const(c) => WeightSpec::Const(c.powf(*r)),
                    WeightSpec::PowLog { x0, a, b } => WeightSpec::PowLog {
                        x0,
                        a: a * r,
                        b: b * r,
                    },
                    WeightSpec::Power(inner2, r2) => {
                        WeightSpec::Power(inner2, r * r2).simplify()
                    }
                    WeightSpec::Product(children) => WeightSpec::Product(
                        children
                            .into_iter()
                            .map(|c| WeightSpec::Power(Box::new(c), *r).simplify())
                            .collect(),
                    )
                    .simplify(),
                    WeightSpec::Piecewise { pieces, default } => WeightSpec::Piecewise {
                        pieces: pieces
                            .into_iter()
                            .map(|(lo, hi, s)| {
                                (lo, hi, WeightSpec::Power(Box::new(s), *r).simplify())
                            })
                            .collect(),
                        default: Box::new(WeightSpec::Power(default, *r).simplify()),
                    },
                }
            }
            WeightSpec::Product(children) => {
                let mut coeff = 1.0f64;
                let mut powlogs: Vec<(f64, f64, f64)> = Vec::new();
                let mut rest: Vec<WeightSpec> = Vec::new();
                let mut stack: Vec<WeightSpec> =
                    children.iter().map(|c| c.simplify()).rev().collect();
                while let Some(child) = stack.pop() {
                    match child {
                        WeightSpec::Const(c) => coeff *= c,
                        WeightSpec::PowLog { x0, a, b } => {
                            if let Some(entry) = powlogs.iter_mut().find(|(c, _, _)| *c == x0) {
                                entry.1 += a;
                                entry.2 += b;
                            } else {
                                powlogs.push((x0, a, b));
                            }
                        }
                        WeightSpec::Product(inner) => stack.extend(inner.into_iter().rev()),
                        other => rest.push(other),
                    }
                }
                let mut out: Vec<WeightSpec> = Vec::new();
                if coeff != 1.0 || (powlogs.is_empty() && rest.is_empty()) {
                    out.push(WeightSpec::Const(coeff));
                }
                out.extend(powlogs.into_iter().filter_map(|(x0, a, b)| {
                    if a == 0.0 && b == 0.0 {
                        None
                    } else {
                        Some(WeightSpec::PowLog { x0, a, b })
                    }
                }));
                out.extend(rest);
                if out.is_empty() {
                    WeightSpec::Const(1.0)
                } else if out.len() == 1 {
                    out.pop().unwrap()
                } else {
                    WeightSpec::Product(out)
                }
            }
            WeightSpec::Piecewise { pieces, default } => WeightSpec::Piecewise {
                pieces: pieces
                    .iter()
                    .map(|(lo, hi, s)| (*lo, *hi, s.simplify()))
                    .collect(),
                default: Box::new(default.simplify()),
            },
        }
    }
}

/// Dual weight at exponent `p`: `w^(1-p')` with `p' = p/(p-1)`, formed
/// symbolically so its cell averages are sampled exactly.
pub fn dual_spec(spec: &WeightSpec, p: f64) -> WeightSpec {
    let conj = p / (p - 1.0);
    WeightSpec::Power(Box::new(spec.clone()), 1.0 - conj)
}

impl std::fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            WeightSpec::Const(c) => write!(f, "const({c})"),
            WeightSpec::PowLog { x0, a, b } => write!(f, "powlog(x0={x0}, a={a}, b={b})"),
            WeightSpec::Power(inner, r) => write!(f, "pow({inner}, {r})"),
            WeightSpec::Product(children) => {
                write!(f, "prod(")?;
                for (i, c) in children.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, ")")
            }
            WeightSpec::Piecewise { pieces, default } => {
                write!(f, "piecewise(")?;
                for (lo, hi, s) in pieces {
                    write!(f, "[{lo},{hi}]: {s}; ")?;
                }
                write!(f, "else: {default})")
            }
        }
    }
}

/// Tolerances for the adaptive quadrature used when no antiderivative is
/// available.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub max_depth: u32,
    pub split_singularities: bool,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            max_depth: 60,
            split_singularities: true,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), SampleError> {
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(SampleError::BadConfig(format!(
                "relative tolerance must lie in (0, 1e-3], got {}",
                self.rel_tol
            )));
        }
        if self.max_depth < 10 {
            return Err(SampleError::BadConfig(format!(
                "max depth must be >= 10, got {}",
                self.max_depth
            )));
        }
        Ok(())
    }
}

/// How a field's companion fields (duals, powers) were produced. Spec-level
/// fields carry exact cell averages of the continuum function; discrete
/// fields are cellwise transforms of stored values. The two are never mixed
/// inside one constant evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SampleMode {
    SpecLevel,
    Discrete,
}

impl SampleMode {
    pub fn label(&self) -> &'static str {
        match self {
            SampleMode::SpecLevel => "spec",
            SampleMode::Discrete => "discrete",
        }
    }
}

/// A cell field plus the provenance that produced it.
#[derive(Debug, Clone)]
pub struct SampledWeight {
    field: CellField,
    mode: SampleMode,
    provenance: String,
}

impl SampledWeight {
    pub fn from_field(field: CellField, mode: SampleMode, provenance: String) -> Self {
        SampledWeight {
            field,
            mode,
            provenance,
        }
    }

    pub fn field(&self) -> &CellField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn mode(&self) -> SampleMode {
        self.mode
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Rebrand as raw cell data, the starting point of discrete-mode
    /// evaluations.
    pub fn as_discrete(&self) -> SampledWeight {
        SampledWeight {
            field: self.field.clone(),
            mode: SampleMode::Discrete,
            provenance: self.provenance.clone(),
        }
    }

    /// Cellwise power of the stored values (discrete mode).
    pub fn cellwise_pow(&self, r: f64) -> Result<SampledWeight, SampleError> {
        let values: Vec<f64> = self.field.values().iter().map(|v| v.powf(r)).collect();
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(SampleError::NonPositive {
                detail: format!("cellwise power {r} produced {bad}"),
            });
        }
        let field = CellField::new(*self.field.grid(), values)?;
        Ok(SampledWeight {
            field,
            mode: SampleMode::Discrete,
            provenance: format!("cellwise-pow({}, {r})", self.provenance),
        })
    }

    /// Cellwise product of several sampled fields (discrete mode).
    pub fn cellwise_product(parts: &[(&SampledWeight, f64)]) -> Result<SampledWeight, SampleError> {
        let first = parts
            .first()
            .ok_or_else(|| SampleError::BadConfig("empty product".into()))?;
        let grid = *first.0.grid();
        let n = grid.cell_count();
        let mut values = vec![1.0f64; n];
        for (w, r) in parts {
            if w.grid() != &grid {
                return Err(SampleError::Grid(GridError::GridMismatch));
            }
            for (acc, &v) in values.iter_mut().zip(w.field.values()) {
                *acc *= v.powf(*r);
            }
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
            return Err(SampleError::NonPositive {
                detail: format!("cellwise product produced {bad}"),
            });
        }
        let field = CellField::new(grid, values)?;
        let provenance = format!(
            "cellwise-prod({})",
            parts
                .iter()
                .map(|(w, r)| format!("{}^{r}", w.provenance))
                .collect::<Vec<_>>()
                .join(" * ")
        );
        Ok(SampledWeight {
            field,
            mode: SampleMode::Discrete,
            provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplify_collapses_powers() {
        let spec = WeightSpec::Power(Box::new(WeightSpec::powlog(0.0, 0.5, 1.0)), 2.0);
        assert_eq!(spec.simplify(), WeightSpec::powlog(0.0, 1.0, 2.0));
    }

    #[test]
    fn simplify_merges_same_center_products() {
        let spec = WeightSpec::Product(vec![
            WeightSpec::powlog(0.0, 0.25, 0.0),
            WeightSpec::Const(2.0),
            WeightSpec::powlog(0.0, 0.25, 1.0),
        ]);
        let s = spec.simplify();
        match s {
            WeightSpec::Product(children) => {
                assert_eq!(children.len(), 2);
                assert_eq!(children[0], WeightSpec::Const(2.0));
                assert_eq!(children[1], WeightSpec::powlog(0.0, 0.5, 1.0));
            }
            other => panic!("unexpected simplification: {other:?}"),
        }
    }

    #[test]
    fn dual_of_constant_is_constant() {
        let dual = dual_spec(&WeightSpec::Const(1.0), 2.0).simplify();
        assert_eq!(dual, WeightSpec::Const(1.0));
    }

    #[test]
    fn dual_of_power_weight_shifts_exponent() {
        // w = |x|^(1/2) at p = 3: sigma = |x|^(1/2 * (1 - p')) = |x|^(-1/4).
        let w = WeightSpec::abs_power(0.5);
        let sigma = dual_spec(&w, 3.0).simplify();
        match sigma {
            WeightSpec::PowLog { a, b, .. } => {
                assert!((a - 0.25).abs() < 1e-15);
                assert_eq!(b, 0.0);
            }
            other => panic!("unexpected dual: {other:?}"),
        }
    }

    #[test]
    fn power_of_one_is_identity_on_eval() {
        let spec = WeightSpec::singular_log_weight();
        let powered = WeightSpec::Power(Box::new(spec.clone()), 1.0);
        for x in [-1.5, -0.25, 0.125, 0.75, 1.8] {
            assert_eq!(spec.eval(x), powered.simplify().eval(x));
        }
    }
}
