//! Weight characteristics as suprema over cube families: `A_1`, `A_p`,
//! `RH_s`, the Fujii-Wilson `A_infty` constant, the multilinear vector
//! constant, and the rescaling-lemma consistency check.
//!
//! Suprema are evaluated in parallel with a deterministic max-reduction
//! (ties break toward the canonical cube order), so reports are bit-identical
//! regardless of worker count. Divergence is reported as a flagged refinement
//! series, never as a thrown error: "not in the class" is a first-class,
//! testable outcome.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exponents::{ExponentError, ExponentVector};
use crate::grid::{Cube, CubeFamily, FamilyIndex, Grid, GridError, MaxCandidate};
use crate::maximal::{maximal_over_region, Algorithm};
use crate::report::{ArgmaxCube, GridMeta, RefinementEntry};
use crate::weights::{
    dual_spec, integrate, sample, QuadratureConfig, SampleError, SampledWeight,
    WeightSpec,
};

#[derive(Debug, Error)]
pub enum ConstantError {
    #[error("weight and companion were sampled in different modes ({left} vs {right})")]
    ModeMismatch { left: String, right: String },
    #[error("exponent out of range: {0}")]
    BadExponent(f64),
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

// --- refinement verdicts ----------------------------------------------------

/// Operational verdict on a constant's refinement series, standing in for
/// finiteness/infiniteness of the continuum supremum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Stable,
    Divergent,
    Inconclusive,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Stable => "stable",
            Verdict::Divergent => "divergent",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

/// Thresholds for the stability/divergence rules.
#[derive(Debug, Clone, Copy)]
pub struct VerdictPolicy {
    /// Relative change between the two finest levels below which a series is
    /// stable.
    pub stable_rel_change: f64,
    /// Growth factor for the divergence rule.
    pub divergence_factor: f64,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        VerdictPolicy {
            stable_rel_change: 0.05,
            divergence_factor: 1.5,
        }
    }
}

/// Classify a refinement series. Divergent when the value grows by the
/// divergence factor against the value two levels prior, sustained for two
/// consecutive checks; also when the series increases strictly across the
/// whole ladder by the divergence factor in total while still moving at the
/// finest level (log-rate divergences grow too slowly for the two-level rule
/// on short ladders). Stable when the last relative change is small.
pub fn classify_series(values: &[f64], policy: &VerdictPolicy) -> Verdict {
    let n = values.len();
    if n < 2 {
        return Verdict::Inconclusive;
    }
    let f = policy.divergence_factor;
    let rule_fires = match n {
        2 => values[1] >= f * values[0],
        3 => values[2] >= f * values[0],
        _ => values[n - 1] >= f * values[n - 3] && values[n - 2] >= f * values[n - 4],
    };
    let strictly_increasing = values.windows(2).all(|w| w[1] > w[0]);
    let last_step = values[n - 1] / values[n - 2];
    let sustained_growth = strictly_increasing
        && values[n - 1] >= f * values[0]
        && last_step > 1.0 + policy.stable_rel_change;
    if rule_fires || sustained_growth {
        return Verdict::Divergent;
    }
    if (last_step - 1.0).abs() <= policy.stable_rel_change {
        return Verdict::Stable;
    }
    Verdict::Inconclusive
}

// --- sweeps ------------------------------------------------------------------

/// Extrema of a per-cube quotient over a family, with canonical-order
/// tie-breaking for a deterministic argmax/argmin.
#[derive(Debug, Clone, Copy)]
pub struct SweepOutcome {
    pub max: f64,
    pub argmax: Cube,
    pub argmax_ord: u64,
    pub min: f64,
    pub argmin: Cube,
}

#[derive(Clone, Copy)]
struct Extrema {
    max: MaxCandidate,
    min: MaxCandidate, // stored negated
}

impl Extrema {
    fn empty() -> Self {
        Extrema {
            max: MaxCandidate::empty(),
            min: MaxCandidate::empty(),
        }
    }

    fn update(mut self, value: f64, ord: u64) -> Self {
        self.max = self.max.merge(MaxCandidate { value, ord });
        self.min = self.min.merge(MaxCandidate { value: -value, ord });
        self
    }

    fn merge(mut self, other: Extrema) -> Self {
        self.max = self.max.merge(other.max);
        self.min = self.min.merge(other.min);
        self
    }
}

/// Evaluate a pure per-cube quotient over the whole family, in parallel, with
/// a deterministic reduction.
pub fn sweep<F>(grid: &Grid, family: CubeFamily, quotient: F) -> Result<SweepOutcome, ConstantError>
where
    F: Fn(&Cube) -> f64 + Sync,
{
    let index = FamilyIndex::new(grid, family)?;
    let extrema = (0..index.len())
        .into_par_iter()
        .fold(Extrema::empty, |acc, ord| {
            acc.update(quotient(&index.cube(ord)), ord)
        })
        .reduce(Extrema::empty, Extrema::merge);
    Ok(SweepOutcome {
        max: extrema.max.value,
        argmax: index.cube(extrema.max.ord),
        argmax_ord: extrema.max.ord,
        min: -extrema.min.value,
        argmin: index.cube(extrema.min.ord),
    })
}

// --- the characteristic report ----------------------------------------------

/// Computed characteristic value with argmax cube, family and grid metadata,
/// and (when produced by a ladder driver) the refinement series.
#[derive(Debug, Clone, Serialize)]
pub struct ConstantReport {
    pub characteristic: String,
    pub value: f64,
    pub argmax: ArgmaxCube,
    pub family: String,
    pub grid: GridMeta,
    pub refinement: Vec<RefinementEntry>,
    pub flags: Vec<String>,
}

impl ConstantReport {
    fn from_sweep(
        characteristic: &str,
        outcome: &SweepOutcome,
        grid: &Grid,
        family: CubeFamily,
    ) -> Self {
        ConstantReport {
            characteristic: characteristic.to_string(),
            value: outcome.max,
            argmax: ArgmaxCube::of(&outcome.argmax, grid.dim()),
            family: family.kind.label().to_string(),
            grid: GridMeta::of(grid),
            refinement: Vec::new(),
            flags: Vec::new(),
        }
    }

    pub fn verdict(&self, policy: &VerdictPolicy) -> Verdict {
        let values: Vec<f64> = self.refinement.iter().map(|e| e.value).collect();
        classify_series(&values, policy)
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json_pretty(self)
    }

    /// Flat projection for spreadsheets: headline row plus one row per
    /// refinement level.
    pub fn to_csv(&self) -> String {
        let anchor = self
            .argmax
            .anchor
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join("|");
        let bounds = |xs: &[f64]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join("|")
        };
        let mut out =
            String::from("characteristic,family,dim,N,lo,hi,argmax_anchor,argmax_side,value,flags\n");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            self.characteristic,
            self.family,
            self.grid.dim,
            self.grid.n,
            bounds(&self.grid.lo),
            bounds(&self.grid.hi),
            anchor,
            self.argmax.side,
            self.value,
            self.flags.join("|"),
        ));
        for entry in &self.refinement {
            out.push_str(&format!(
                "{},{},{},{},{},{},,,{},\n",
                self.characteristic,
                self.family,
                self.grid.dim,
                entry.n,
                bounds(&self.grid.lo),
                bounds(&self.grid.hi),
                entry.value,
            ));
        }
        out
    }
}

// --- mode checks --------------------------------------------------------------

fn check_pair(w: &SampledWeight, companion: &SampledWeight) -> Result<(), ConstantError> {
    if w.grid() != companion.grid() {
        return Err(ConstantError::Grid(GridError::GridMismatch));
    }
    if w.mode() != companion.mode() {
        return Err(ConstantError::ModeMismatch {
            left: w.mode().label().to_string(),
            right: companion.mode().label().to_string(),
        });
    }
    Ok(())
}

// --- characteristics -----------------------------------------------------------

/// `sup_Q avg(w, Q) / min(w, Q)` — the grid proxy for the `A_1`
/// characteristic, with the cube minimum standing in for the essential
/// infimum.
pub fn a1_sweep(w: &SampledWeight, family: CubeFamily) -> Result<SweepOutcome, ConstantError> {
    let field = w.field();
    sweep(field.grid(), family, |q| {
        field.cube_average_unchecked(q) / field.cube_min_unchecked(q)
    })
}

pub fn a1_constant(w: &SampledWeight, family: CubeFamily) -> Result<ConstantReport, ConstantError> {
    let outcome = a1_sweep(w, family)?;
    Ok(ConstantReport::from_sweep("a1", &outcome, w.grid(), family))
}

/// `sup_Q avg(w, Q) * avg(sigma, Q)^(p-1)` with `sigma = w^(1-p')`.
pub fn ap_sweep(
    w: &SampledWeight,
    sigma: &SampledWeight,
    p: f64,
    family: CubeFamily,
) -> Result<SweepOutcome, ConstantError> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(ConstantError::BadExponent(p));
    }
    check_pair(w, sigma)?;
    let wf = w.field();
    let sf = sigma.field();
    sweep(wf.grid(), family, |q| {
        wf.cube_average_unchecked(q) * sf.cube_average_unchecked(q).powf(p - 1.0)
    })
}

pub fn ap_constant(
    w: &SampledWeight,
    sigma: &SampledWeight,
    p: f64,
    family: CubeFamily,
) -> Result<ConstantReport, ConstantError> {
    let outcome = ap_sweep(w, sigma, p, family)?;
    Ok(ConstantReport::from_sweep("ap", &outcome, w.grid(), family))
}

/// `sup_Q avg(w^s, Q)^(1/s) / avg(w, Q)`.
pub fn rh_sweep(
    w: &SampledWeight,
    ws: &SampledWeight,
    s: f64,
    family: CubeFamily,
) -> Result<SweepOutcome, ConstantError> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(ConstantError::BadExponent(s));
    }
    check_pair(w, ws)?;
    let wf = w.field();
    let sf = ws.field();
    sweep(wf.grid(), family, |q| {
        sf.cube_average_unchecked(q).powf(1.0 / s) / wf.cube_average_unchecked(q)
    })
}

pub fn rh_constant(
    w: &SampledWeight,
    ws: &SampledWeight,
    s: f64,
    family: CubeFamily,
) -> Result<ConstantReport, ConstantError> {
    let outcome = rh_sweep(w, ws, s, family)?;
    Ok(ConstantReport::from_sweep("rh", &outcome, w.grid(), family))
}

/// Fujii-Wilson quotient: `sup_Q (1/int_Q w) int_Q M(w chi_Q)`, with the
/// maximal operator over the same family. Clipping a family cube to `Q` never
/// lowers its average, so restricting the inner maximal to cubes inside `Q`
/// computes the same supremum exactly.
pub fn fw_sweep_with(
    w: &SampledWeight,
    family: CubeFamily,
    algorithm: Algorithm,
) -> Result<SweepOutcome, ConstantError> {
    let field = w.field();
    sweep(field.grid(), family, |q| {
        let m_values = maximal_over_region(&[field], q, family, algorithm);
        let numerator: f64 = m_values.iter().sum();
        let denominator = field.cube_value_sum_unchecked(q);
        numerator / denominator
    })
}

pub fn fw_ainfty_constant(
    w: &SampledWeight,
    family: CubeFamily,
) -> Result<ConstantReport, ConstantError> {
    fw_ainfty_constant_with(w, family, Algorithm::Fast)
}

pub fn fw_ainfty_constant_with(
    w: &SampledWeight,
    family: CubeFamily,
    algorithm: Algorithm,
) -> Result<ConstantReport, ConstantError> {
    let outcome = fw_sweep_with(w, family, algorithm)?;
    Ok(ConstantReport::from_sweep("fw", &outcome, w.grid(), family))
}

// --- the multilinear vector constant -------------------------------------------

/// A weight vector prepared for the multilinear constant: the combined weight
/// `w = prod w_i^(p/p_i)` and the duals `sigma_i = w_i^(1-p_i')`, all sampled
/// in one mode.
#[derive(Debug, Clone)]
pub struct VectorWeight {
    pub pvec: ExponentVector,
    pub combined: SampledWeight,
    pub sigmas: Vec<SampledWeight>,
    pub flags: Vec<String>,
}

impl VectorWeight {
    /// Spec-level construction: every component sampled by exact cell
    /// averages of its closed form.
    pub fn from_specs(
        specs: &[WeightSpec],
        pvec: &ExponentVector,
        grid: &Grid,
        quad: &QuadratureConfig,
    ) -> Result<Self, ConstantError> {
        pvec.check_arity(specs.len())?;
        let p = pvec.p();
        let combined_spec = WeightSpec::Product(
            specs
                .iter()
                .zip(pvec.p_i())
                .map(|(s, pi)| WeightSpec::Power(Box::new(s.clone()), p / pi))
                .collect(),
        )
        .simplify();
        let combined = sample(&combined_spec, grid, quad)?;
        let sigmas = specs
            .iter()
            .zip(pvec.p_i())
            .map(|(s, pi)| sample(&dual_spec(s, *pi).simplify(), grid, quad))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorWeight {
            pvec: pvec.clone(),
            combined,
            sigmas,
            flags: Vec::new(),
        })
    }

    /// Discrete construction: components are raw cell data; the combined
    /// weight and duals are cellwise powers/products of the stored values.
    pub fn from_fields_discrete(
        weights: &[&SampledWeight],
        pvec: &ExponentVector,
    ) -> Result<Self, ConstantError> {
        pvec.check_arity(weights.len())?;
        let p = pvec.p();
        let parts: Vec<(&SampledWeight, f64)> = weights
            .iter()
            .zip(pvec.p_i())
            .map(|(w, pi)| (*w, p / pi))
            .collect();
        let combined = SampledWeight::cellwise_product(&parts)?;
        let sigmas = weights
            .iter()
            .zip(pvec.conj_i())
            .map(|(w, conj)| w.cellwise_pow(1.0 - conj))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(VectorWeight {
            pvec: pvec.clone(),
            combined,
            sigmas,
            flags: vec!["mode=discrete".to_string()],
        })
    }

    pub fn grid(&self) -> &Grid {
        self.combined.grid()
    }
}

/// `sup_Q avg(w, Q)^(1/p) * prod_i avg(sigma_i, Q)^(1/p_i')`.
pub fn apvec_sweep(vw: &VectorWeight, family: CubeFamily) -> Result<SweepOutcome, ConstantError> {
    for sigma in &vw.sigmas {
        check_pair(&vw.combined, sigma)?;
    }
    let inv_p = 1.0 / vw.pvec.p();
    let inv_conj: Vec<f64> = vw.pvec.conj_i().iter().map(|c| 1.0 / c).collect();
    let wf = vw.combined.field();
    let sigma_fields: Vec<_> = vw.sigmas.iter().map(|s| s.field()).collect();
    sweep(wf.grid(), family, |q| {
        let mut value = wf.cube_average_unchecked(q).powf(inv_p);
        for (sf, e) in sigma_fields.iter().zip(&inv_conj) {
            value *= sf.cube_average_unchecked(q).powf(*e);
        }
        value
    })
}

pub fn apvec_constant(
    vw: &VectorWeight,
    family: CubeFamily,
) -> Result<ConstantReport, ConstantError> {
    let outcome = apvec_sweep(vw, family)?;
    let mut report = ConstantReport::from_sweep("apvec", &outcome, vw.grid(), family);
    report.flags.extend(vw.flags.iter().cloned());
    Ok(report)
}

// --- grid ladders and spec-driven evaluation ------------------------------------

/// A strictly increasing list of grid resolutions on a fixed 1D domain.
#[derive(Debug, Clone, PartialEq)]
pub struct GridLadder {
    pub ns: Vec<usize>,
    pub lo: f64,
    pub hi: f64,
}

impl GridLadder {
    pub fn new(ns: Vec<usize>, lo: f64, hi: f64) -> Result<Self, ConstantError> {
        if ns.is_empty() {
            return Err(ConstantError::BadInput("empty grid ladder".into()));
        }
        for pair in ns.windows(2) {
            if pair[1] <= pair[0] {
                return Err(ConstantError::BadInput(format!(
                    "grid ladder must be strictly increasing, got {ns:?}"
                )));
            }
        }
        for &n in &ns {
            if n < 2 || !n.is_power_of_two() {
                return Err(ConstantError::BadInput(format!(
                    "ladder entries must be powers of two >= 2, got {n}"
                )));
            }
        }
        if !(hi > lo) {
            return Err(ConstantError::BadInput(format!(
                "domain out of order: [{lo}, {hi}]"
            )));
        }
        Ok(GridLadder { ns, lo, hi })
    }

    /// Default sweep ladder: N in {2^10, 2^12, 2^14}.
    pub fn default_1d(lo: f64, hi: f64) -> Self {
        GridLadder {
            ns: vec![1 << 10, 1 << 12, 1 << 14],
            lo,
            hi,
        }
    }

    pub fn grids(&self) -> Result<Vec<Grid>, ConstantError> {
        self.ns
            .iter()
            .map(|&n| Grid::line(n, self.lo, self.hi).map_err(ConstantError::from))
            .collect()
    }
}

/// A characteristic to evaluate from closed-form specs (the CLI surface).
#[derive(Debug, Clone)]
pub enum ConstantRequest {
    A1 { w: WeightSpec },
    Ap { w: WeightSpec, p: f64 },
    Rh { w: WeightSpec, s: f64 },
    Fw { w: WeightSpec },
    ApVec {
        weights: Vec<WeightSpec>,
        pvec: ExponentVector,
    },
}

impl ConstantRequest {
    pub fn name(&self) -> &'static str {
        match self {
            ConstantRequest::A1 { .. } => "a1",
            ConstantRequest::Ap { .. } => "ap",
            ConstantRequest::Rh { .. } => "rh",
            ConstantRequest::Fw { .. } => "fw",
            ConstantRequest::ApVec { .. } => "apvec",
        }
    }

    /// Spec-level evaluation on one grid.
    pub fn evaluate(
        &self,
        grid: &Grid,
        family: CubeFamily,
        quad: &QuadratureConfig,
    ) -> Result<SweepOutcome, ConstantError> {
        match self {
            ConstantRequest::A1 { w } => {
                let ws = sample(w, grid, quad)?;
                a1_sweep(&ws, family)
            }
            ConstantRequest::Ap { w, p } => {
                if !(p > &1.0) {
                    return Err(ConstantError::BadExponent(*p));
                }
                let ws = sample(w, grid, quad)?;
                let sigma = sample(&dual_spec(w, *p).simplify(), grid, quad)?;
                ap_sweep(&ws, &sigma, *p, family)
            }
            ConstantRequest::Rh { w, s } => {
                if !(s > &1.0) {
                    return Err(ConstantError::BadExponent(*s));
                }
                let ws = sample(w, grid, quad)?;
                let wpow = sample(
                    &WeightSpec::Power(Box::new(w.clone()), *s).simplify(),
                    grid,
                    quad,
                )?;
                rh_sweep(&ws, &wpow, *s, family)
            }
            ConstantRequest::Fw { w } => {
                let ws = sample(w, grid, quad)?;
                fw_sweep_with(&ws, family, Algorithm::Fast)
            }
            ConstantRequest::ApVec { weights, pvec } => {
                let vw = VectorWeight::from_specs(weights, pvec, grid, quad)?;
                apvec_sweep(&vw, family)
            }
        }
    }

    /// Evaluate across a ladder; the report carries the refinement series and
    /// its verdict flag, and the headline value comes from the finest level.
    pub fn evaluate_ladder(
        &self,
        ladder: &GridLadder,
        family: CubeFamily,
        quad: &QuadratureConfig,
        policy: &VerdictPolicy,
    ) -> Result<ConstantReport, ConstantError> {
        let grids = ladder.grids()?;
        let mut refinement = Vec::with_capacity(grids.len());
        let mut last: Option<(SweepOutcome, Grid)> = None;
        for grid in grids {
            let outcome = self.evaluate(&grid, family, quad)?;
            refinement.push(RefinementEntry {
                n: grid.n(),
                value: outcome.max,
            });
            last = Some((outcome, grid));
        }
        let (outcome, grid) = last.expect("ladder is non-empty");
        let mut report = ConstantReport::from_sweep(self.name(), &outcome, &grid, family);
        let values: Vec<f64> = refinement.iter().map(|e| e.value).collect();
        report.refinement = refinement;
        report
            .flags
            .push(classify_series(&values, policy).label().to_string());
        Ok(report)
    }
}

/// The `A_p` quotient of a closed-form weight on one explicit interval,
/// computed from exact integrals rather than grid cells. The counterexample's
/// centered-interval growth checks use this at scales far below any feasible
/// cell width.
pub fn ap_quotient_on_interval(
    w: &WeightSpec,
    p: f64,
    lo: f64,
    hi: f64,
    quad: &QuadratureConfig,
) -> Result<f64, ConstantError> {
    if !(p > 1.0) {
        return Err(ConstantError::BadExponent(p));
    }
    let len = hi - lo;
    if !(len > 0.0) {
        return Err(ConstantError::BadInput(format!(
            "interval out of order: [{lo}, {hi}]"
        )));
    }
    let avg_w = integrate(w, lo, hi, quad)? / len;
    let avg_sigma = integrate(&dual_spec(w, p).simplify(), lo, hi, quad)? / len;
    Ok(avg_w * avg_sigma.powf(p - 1.0))
}

// --- the rescaling-lemma check ---------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct SeriesReport {
    pub characteristic: String,
    pub entries: Vec<RefinementEntry>,
    pub verdict: Verdict,
    pub flags: Vec<String>,
}

impl SeriesReport {
    pub fn new(characteristic: &str, entries: Vec<RefinementEntry>, policy: &VerdictPolicy) -> Self {
        let values: Vec<f64> = entries.iter().map(|e| e.value).collect();
        SeriesReport {
            characteristic: characteristic.to_string(),
            entries,
            verdict: classify_series(&values, policy),
            flags: Vec::new(),
        }
    }

    /// A series cut short by an integrability failure: flagged and treated as
    /// divergent.
    pub fn integrability_failure(characteristic: &str, detail: String) -> Self {
        SeriesReport {
            characteristic: characteristic.to_string(),
            entries: Vec::new(),
            verdict: Verdict::Divergent,
            flags: vec![format!("integrability-failure: {detail}")],
        }
    }

    pub fn values(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.value).collect()
    }
}

/// Rescaling-lemma consistency report: `[w]_{A_p}`, `[w]_{RH_s}`, and
/// `[w^s]_{A_q}` with `q = s(p-1)+1` on the same ladder and family.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaJnReport {
    pub p: f64,
    pub s: f64,
    pub q: f64,
    pub ap: SeriesReport,
    pub rh: SeriesReport,
    pub aq: SeriesReport,
    pub consistent: bool,
}

pub fn lemma_jn_check(
    wspec: &WeightSpec,
    p: f64,
    s: f64,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<LemmaJnReport, ConstantError> {
    if !(p > 1.0) {
        return Err(ConstantError::BadExponent(p));
    }
    if !(s > 1.0) {
        return Err(ConstantError::BadExponent(s));
    }
    let q = s * (p - 1.0) + 1.0;
    let ws_spec = WeightSpec::Power(Box::new(wspec.clone()), s).simplify();

    let ap_series = series_or_failure(
        "ap",
        &ConstantRequest::Ap {
            w: wspec.clone(),
            p,
        },
        ladder,
        family,
        quad,
        policy,
    )?;
    let rh_series = series_or_failure(
        "rh",
        &ConstantRequest::Rh { w: wspec.clone(), s },
        ladder,
        family,
        quad,
        policy,
    )?;
    let aq_series = series_or_failure(
        "aq",
        &ConstantRequest::Ap { w: ws_spec, p: q },
        ladder,
        family,
        quad,
        policy,
    )?;

    let all_stable = [&ap_series, &rh_series, &aq_series]
        .iter()
        .all(|s| s.verdict == Verdict::Stable);
    let joint_divergence =
        rh_series.verdict == Verdict::Divergent && aq_series.verdict == Verdict::Divergent;
    Ok(LemmaJnReport {
        p,
        s,
        q,
        ap: ap_series,
        rh: rh_series,
        aq: aq_series,
        consistent: all_stable || joint_divergence,
    })
}

/// Run a request over a ladder; integrability failures become flagged
/// divergent series instead of errors.
pub fn series_or_failure(
    name: &str,
    request: &ConstantRequest,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<SeriesReport, ConstantError> {
    let mut entries = Vec::new();
    for grid in ladder.grids()? {
        match request.evaluate(&grid, family, quad) {
            Ok(outcome) => entries.push(RefinementEntry {
                n: grid.n(),
                value: outcome.max,
            }),
            Err(ConstantError::Sample(SampleError::NotIntegrable { detail })) => {
                return Ok(SeriesReport::integrability_failure(name, detail));
            }
            Err(other) => return Err(other),
        }
    }
    Ok(SeriesReport::new(name, entries, policy))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FamilyKind;
    use crate::weights::random_weight;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn policy() -> VerdictPolicy {
        VerdictPolicy::default()
    }

    #[test]
    fn constants_are_one_for_unit_weight() {
        let grid = Grid::line(64, 0.0, 1.0).unwrap();
        let one = WeightSpec::Const(1.0);
        for kind in [FamilyKind::Dyadic, FamilyKind::AllWindows] {
            let family = CubeFamily::new(kind);
            for request in [
                ConstantRequest::A1 { w: one.clone() },
                ConstantRequest::Ap { w: one.clone(), p: 2.0 },
                ConstantRequest::Rh { w: one.clone(), s: 2.0 },
                ConstantRequest::Fw { w: one.clone() },
                ConstantRequest::ApVec {
                    weights: vec![one.clone(), one.clone()],
                    pvec: ExponentVector::new(&[2.0, 2.0]).unwrap(),
                },
            ] {
                let outcome = request.evaluate(&grid, family, &quad()).unwrap();
                assert!(
                    (outcome.max - 1.0).abs() <= 1e-12,
                    "{} on {kind:?}: {}",
                    request.name(),
                    outcome.max
                );
            }
        }
    }

    #[test]
    fn a1_of_singular_a1_weight_is_stable() {
        // v = powlog(a=1/2, b=2) on [0, 1] lies in A_1.
        let v = WeightSpec::powlog(0.0, 0.5, 2.0);
        let ladder = GridLadder::new(vec![1 << 8, 1 << 10, 1 << 12], 0.0, 1.0).unwrap();
        let report = ConstantRequest::A1 { w: v }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        assert!(report.value >= 1.0);
        assert!(report.flags.contains(&"stable".to_string()), "{report:?}");
    }

    #[test]
    fn a1_of_identity_function_diverges() {
        let w = WeightSpec::abs_power(1.0); // w(x) = x on [0, 1]
        let ladder = GridLadder::new(vec![1 << 6, 1 << 8, 1 << 10], 0.0, 1.0).unwrap();
        let report = ConstantRequest::A1 { w }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        assert!(report.flags.contains(&"divergent".to_string()), "{report:?}");
    }

    #[test]
    fn ap_of_half_power_weight_refines_below_one_percent() {
        let w = WeightSpec::abs_power(0.5);
        let ladder = GridLadder::new(vec![1 << 12, 1 << 14], -1.0, 1.0).unwrap();
        let report = ConstantRequest::Ap { w, p: 2.0 }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        let coarse = report.refinement[0].value;
        let fine = report.refinement[1].value;
        assert!((fine / coarse - 1.0).abs() < 0.01, "{coarse} -> {fine}");
        assert!(fine >= 1.0);
    }

    #[test]
    fn counterexample_ap_quotient_grows_on_centered_intervals() {
        // Exact closed form for the A_2 quotient of w1 on [-t, t]:
        // (5/4 - (3/2) ln t + (ln t)^2/2) / (1 - ln t).
        let w1 = WeightSpec::singular_log_weight();
        let exact = |t: f64| {
            let lt = t.ln();
            (1.25 - 1.5 * lt + 0.5 * lt * lt) / (1.0 - lt)
        };
        let mut values = Vec::new();
        for k in [10, 20] {
            let t = 2f64.powi(-k);
            let got = ap_quotient_on_interval(&w1, 2.0, -t, t, &quad()).unwrap();
            let want = exact(t);
            assert!(
                (got - want).abs() <= 1e-9 * want,
                "k={k}: {got} vs {want}"
            );
            values.push(got);
        }
        assert!(values[1] >= 1.5 * values[0]);
    }

    #[test]
    fn rh_of_counterexample_weight_fails_integrability() {
        let w1 = WeightSpec::singular_log_weight();
        let ladder = GridLadder::new(vec![1 << 8, 1 << 10], -2.0, 2.0).unwrap();
        let series = series_or_failure(
            "rh",
            &ConstantRequest::Rh { w: w1, s: 2.0 },
            &ladder,
            CubeFamily::dyadic(),
            &quad(),
            &policy(),
        )
        .unwrap();
        assert_eq!(series.verdict, Verdict::Divergent);
        assert!(!series.flags.is_empty());
    }

    #[test]
    fn rh_of_half_power_weight_is_stable() {
        let w = WeightSpec::abs_power(0.5);
        let ladder = GridLadder::new(vec![1 << 10, 1 << 12], -1.0, 1.0).unwrap();
        let series = series_or_failure(
            "rh",
            &ConstantRequest::Rh { w, s: 2.0 },
            &ladder,
            CubeFamily::dyadic(),
            &quad(),
            &policy(),
        )
        .unwrap();
        assert_eq!(series.verdict, Verdict::Stable, "{series:?}");
    }

    #[test]
    fn fw_of_inverse_sqrt_is_stable_and_at_least_one() {
        let w = WeightSpec::abs_power(-0.5);
        let ladder = GridLadder::new(vec![1 << 8, 1 << 10, 1 << 12], -1.0, 1.0).unwrap();
        let report = ConstantRequest::Fw { w }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        assert!(report.value >= 1.0);
        assert!(report.flags.contains(&"stable".to_string()), "{report:?}");
    }

    #[test]
    fn fw_of_counterexample_weight_keeps_growing() {
        // The FW constant of w1 grows roughly linearly in the grid level, so
        // a wide ladder must classify it divergent.
        let w1 = WeightSpec::singular_log_weight();
        let ladder = GridLadder::new(vec![1 << 6, 1 << 10, 1 << 14, 1 << 18], -2.0, 2.0).unwrap();
        let report = ConstantRequest::Fw { w: w1 }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        assert!(report.flags.contains(&"divergent".to_string()), "{report:?}");
    }

    #[test]
    fn apvec_m1_reduction_identity() {
        let w = WeightSpec::abs_power(0.25);
        let grid = Grid::line(256, -1.0, 1.0).unwrap();
        let p = 2.5;
        let pvec = ExponentVector::new(&[p]).unwrap();
        let vw = VectorWeight::from_specs(&[w.clone()], &pvec, &grid, &quad()).unwrap();
        let apvec = apvec_sweep(&vw, CubeFamily::dyadic()).unwrap();
        let ws = sample(&w, &grid, &quad()).unwrap();
        let sigma = sample(&dual_spec(&w, p).simplify(), &grid, &quad()).unwrap();
        let ap = ap_sweep(&ws, &sigma, p, CubeFamily::dyadic()).unwrap();
        let reduced = ap.max.powf(1.0 / p);
        assert!(
            (apvec.max - reduced).abs() <= 1e-12 * reduced,
            "{} vs {}",
            apvec.max,
            reduced
        );
        assert_eq!(apvec.argmax_ord, ap.argmax_ord);
    }

    #[test]
    fn apvec_of_counterexample_pair_is_bounded() {
        let w1 = WeightSpec::singular_log_weight();
        let one = WeightSpec::Const(1.0);
        let pvec = ExponentVector::new(&[2.0, 2.0]).unwrap();
        let ladder = GridLadder::new(vec![1 << 10, 1 << 12], -2.0, 2.0).unwrap();
        let report = ConstantRequest::ApVec {
            weights: vec![w1, one],
            pvec,
        }
        .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
        .unwrap();
        assert!(report.flags.contains(&"stable".to_string()), "{report:?}");
        assert!(report.value >= 1.0);
    }

    #[test]
    fn mode_mismatch_is_rejected() {
        let grid = Grid::line(32, -1.0, 1.0).unwrap();
        let w = sample(&WeightSpec::abs_power(0.5), &grid, &quad()).unwrap();
        let sigma_discrete = w.cellwise_pow(-1.0).unwrap();
        let err = ap_sweep(&w, &sigma_discrete, 2.0, CubeFamily::dyadic()).unwrap_err();
        assert!(matches!(err, ConstantError::ModeMismatch { .. }));
    }

    #[test]
    fn nesting_of_ap_classes() {
        // [w]_{A_4} <= [w]_{A_2} cube by cube, hence for the sup.
        let w = WeightSpec::abs_power(0.5);
        let grid = Grid::line(512, -1.0, 1.0).unwrap();
        let a2 = ConstantRequest::Ap { w: w.clone(), p: 2.0 }
            .evaluate(&grid, CubeFamily::dyadic(), &quad())
            .unwrap();
        let a4 = ConstantRequest::Ap { w, p: 4.0 }
            .evaluate(&grid, CubeFamily::dyadic(), &quad())
            .unwrap();
        assert!(a4.max <= a2.max * (1.0 + 1e-9));
    }

    #[test]
    fn family_monotonicity() {
        let w = WeightSpec::abs_power(0.25);
        let grid = Grid::line(64, -1.0, 1.0).unwrap();
        for request in [
            ConstantRequest::A1 { w: w.clone() },
            ConstantRequest::Ap { w: w.clone(), p: 2.0 },
            ConstantRequest::Fw { w: w.clone() },
        ] {
            let dyadic = request
                .evaluate(&grid, CubeFamily::dyadic(), &quad())
                .unwrap();
            let all = request
                .evaluate(&grid, CubeFamily::all_windows(), &quad())
                .unwrap();
            assert!(
                dyadic.max <= all.max * (1.0 + 1e-12),
                "{}: {} vs {}",
                request.name(),
                dyadic.max,
                all.max
            );
        }
    }

    #[test]
    fn refinement_monotonicity_of_dyadic_supremum() {
        let w = WeightSpec::abs_power(0.5);
        let ladder = GridLadder::new(vec![1 << 6, 1 << 8, 1 << 10], -1.0, 1.0).unwrap();
        let report = ConstantRequest::Ap { w, p: 2.0 }
            .evaluate_ladder(&ladder, CubeFamily::dyadic(), &quad(), &policy())
            .unwrap();
        for pair in report.refinement.windows(2) {
            assert!(pair[1].value >= pair[0].value * (1.0 - 1e-12));
        }
    }

    #[test]
    fn per_cube_quotients_stay_above_holder_floor() {
        let grid = Grid::line(256, 0.0, 1.0).unwrap();
        let w = random_weight(42, &grid, 0.4).unwrap();
        let sigma = w.cellwise_pow(1.0 - 2.0).unwrap(); // p = 2
        let outcome = ap_sweep(&w.as_discrete(), &sigma, 2.0, CubeFamily::dyadic()).unwrap();
        assert!(outcome.min >= 1.0 - 1e-9, "min quotient {}", outcome.min);
    }

    #[test]
    fn lemma_jn_consistent_for_quarter_power() {
        // w = |x|^(1/4), p=2, s=2 -> q=3; w^2 = |x|^(1/2) lies in A_3.
        let w = WeightSpec::abs_power(0.25);
        let ladder = GridLadder::new(vec![1 << 10, 1 << 12], -1.0, 1.0).unwrap();
        let report = lemma_jn_check(
            &w,
            2.0,
            2.0,
            &ladder,
            CubeFamily::dyadic(),
            &quad(),
            &policy(),
        )
        .unwrap();
        assert_eq!(report.q, 3.0);
        assert!(report.consistent, "{report:?}");
        assert_eq!(report.ap.verdict, Verdict::Stable);
    }

    #[test]
    fn lemma_jn_joint_divergence_for_inverse_sqrt() {
        // w = |x|^(-1/2), s=2: w^2 = 1/|x| is not integrable; RH and A_q
        // diverge together, which is still consistent.
        let w = WeightSpec::abs_power(-0.5);
        let ladder = GridLadder::new(vec![1 << 8, 1 << 10], -1.0, 1.0).unwrap();
        let report = lemma_jn_check(
            &w,
            2.0,
            2.0,
            &ladder,
            CubeFamily::dyadic(),
            &quad(),
            &policy(),
        )
        .unwrap();
        assert_eq!(report.rh.verdict, Verdict::Divergent);
        assert_eq!(report.aq.verdict, Verdict::Divergent);
        assert!(report.consistent, "{report:?}");
    }

    #[test]
    fn random_weight_fw_is_stable_under_refinement() {
        let policy = policy();
        let mut values = Vec::new();
        for n in [1 << 10, 1 << 12] {
            let grid = Grid::line(n, 0.0, 1.0).unwrap();
            let w = random_weight(1, &grid, 0.3).unwrap();
            let outcome = fw_sweep_with(&w, CubeFamily::dyadic(), Algorithm::Fast).unwrap();
            assert!(outcome.max.is_finite() && outcome.max >= 1.0);
            values.push(outcome.max);
        }
        assert_eq!(classify_series(&values, &policy), Verdict::Stable, "{values:?}");
    }

    #[test]
    fn classify_series_rules() {
        let p = policy();
        assert_eq!(classify_series(&[1.0, 1.01, 1.012], &p), Verdict::Stable);
        assert_eq!(
            classify_series(&[1.0, 2.0, 4.0, 8.0], &p),
            Verdict::Divergent
        );
        // Log-rate growth: slow but strictly increasing and 1.5x overall.
        assert_eq!(
            classify_series(&[2.0, 2.6, 3.1, 3.5], &p),
            Verdict::Divergent
        );
        // Converged from below after early growth: stable, not divergent.
        assert_eq!(
            classify_series(&[1.0, 2.0, 2.9, 2.95], &p),
            Verdict::Stable
        );
        assert_eq!(classify_series(&[1.0], &p), Verdict::Inconclusive);
    }
}
