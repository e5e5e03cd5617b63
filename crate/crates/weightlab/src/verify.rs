//! Theorem-level verification scenarios: each one measures the quantities a
//! result relates, across a grid ladder, and records every inequality as an
//! assertion with its measured value, bound, and tolerance. Reruns are
//! bit-identical: every scenario is a pure function of (specs, exponents,
//! ladder, family, tolerances).

use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::constants::{
    a1_sweep, ap_quotient_on_interval, ap_sweep, apvec_sweep, fw_sweep_with,
    rh_sweep, series_or_failure, sweep, ConstantError, ConstantRequest, GridLadder, SeriesReport,
    SweepOutcome, VectorWeight, Verdict, VerdictPolicy,
};
use crate::exponents::{ExponentError, ExponentVector};
use crate::grid::{CellField, CubeFamily, Grid, GridError};
use crate::maximal::Algorithm;
use crate::report::RefinementEntry;
use crate::twoweight::TwoWeightError;
use crate::weights::{
    dual_spec, sample, QuadratureConfig, SampleError, SampledWeight, WeightSpec,
};

pub const HOLDER_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("{0}")]
    BadInput(String),
    #[error(transparent)]
    Constant(#[from] ConstantError),
    #[error(transparent)]
    Exponent(#[from] ExponentError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Sample(#[from] SampleError),
    #[error(transparent)]
    TwoWeight(#[from] TwoWeightError),
}

/// One checked inequality: what was measured, what it was compared against,
/// and the tolerance actually used.
#[derive(Debug, Clone, Serialize)]
pub struct Assertion {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Assertion {
    /// `measured >= bound (1 - tol)`.
    pub fn ge(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        Assertion {
            name: name.into(),
            measured,
            bound,
            tolerance: tol,
            pass: measured >= bound * (1.0 - tol),
        }
    }

    /// `measured <= bound (1 + tol)`.
    pub fn le(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        Assertion {
            name: name.into(),
            measured,
            bound,
            tolerance: tol,
            pass: measured <= bound * (1.0 + tol),
        }
    }

    /// `measured <= bound + tol` (absolute).
    pub fn le_abs(name: impl Into<String>, measured: f64, bound: f64, tol: f64) -> Self {
        Assertion {
            name: name.into(),
            measured,
            bound,
            tolerance: tol,
            pass: measured <= bound + tol,
        }
    }

    pub fn vacuous(name: impl Into<String>, reason: &str) -> Self {
        Assertion {
            name: format!("{} (vacuous: {reason})", name.into()),
            measured: f64::NAN,
            bound: f64::NAN,
            tolerance: 0.0,
            pass: true,
        }
    }
}

/// Scenario report: metadata, measured series, and pass/fail per assertion.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema: &'static str,
    pub scenario: String,
    pub config: serde_json::Value,
    pub series: Vec<SeriesReport>,
    pub assertions: Vec<Assertion>,
    pub flags: Vec<String>,
    pub pass: bool,
}

impl ReportDocument {
    fn new(scenario: &str, config: serde_json::Value) -> Self {
        ReportDocument {
            schema: crate::report::REPORT_SCHEMA,
            scenario: scenario.to_string(),
            config,
            series: Vec::new(),
            assertions: Vec::new(),
            flags: Vec::new(),
            pass: true,
        }
    }

    fn finish(mut self) -> Self {
        self.pass = self.assertions.iter().all(|a| a.pass);
        self
    }

    pub fn to_json(&self) -> String {
        crate::report::to_json_pretty(self)
    }

    pub fn series_named(&self, name: &str) -> Option<&SeriesReport> {
        self.series.iter().find(|s| s.characteristic == name)
    }
}

/// Relative change between the two finest levels of a series (NaN when the
/// series is shorter than 2).
fn last_rel_change(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return f64::NAN;
    }
    (values[values.len() - 1] / values[values.len() - 2] - 1.0).abs()
}

fn stability_assertion(
    name: &str,
    series: &SeriesReport,
    policy: &VerdictPolicy,
) -> Assertion {
    if series.entries.is_empty() {
        return Assertion {
            name: format!("{name}: refinement stability"),
            measured: f64::NAN,
            bound: policy.stable_rel_change,
            tolerance: 0.0,
            pass: false,
        };
    }
    Assertion::le_abs(
        format!("{name}: relative change across the two finest levels"),
        last_rel_change(&series.values()),
        policy.stable_rel_change,
        0.0,
    )
}

/// Sweep of `prod_i avg(num_i, Q)^(e_i) / avg(den, Q)`.
fn ratio_sweep(
    numerators: &[(&CellField, f64)],
    denominator: &CellField,
    grid: &Grid,
    family: CubeFamily,
) -> Result<SweepOutcome, ConstantError> {
    sweep(grid, family, |q| {
        let mut v = 1.0;
        for (field, e) in numerators {
            v *= field.cube_average_unchecked(q).powf(*e);
        }
        v / denominator.cube_average_unchecked(q)
    })
}

// --- multilinear reverse Holder -------------------------------------------------

/// Sup ratio of the multilinear reverse Holder inequality:
/// `prod (avg w_i^{s_i})^{1/s_i} <= C avg(prod w_i)` for `sum 1/s_i = 1`.
/// The lower direction (ratio >= 1) is plain Holder and holds for arbitrary
/// positive inputs; stability of the sup is asserted when every measured
/// `RH_{s_i}` constant is stable.
pub fn verify_multrh(
    wspecs: &[WeightSpec],
    svec: &[f64],
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    if wspecs.len() != svec.len() || wspecs.is_empty() {
        return Err(VerifyError::BadInput(format!(
            "{} weights for {} exponents",
            wspecs.len(),
            svec.len()
        )));
    }
    let inv_sum: f64 = svec.iter().map(|s| 1.0 / s).sum();
    if (inv_sum - 1.0).abs() > 1e-12 {
        return Err(VerifyError::BadInput(format!(
            "sum of 1/s_i must be 1, got {inv_sum}"
        )));
    }
    if svec.iter().any(|s| !(*s > 1.0)) {
        return Err(VerifyError::BadInput("every s_i must exceed 1".into()));
    }

    let config = json!({
        "weights": wspecs.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "s": svec,
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "family": family.kind.label(),
        "tolerances": {"holder": HOLDER_TOL, "stable_rel_change": policy.stable_rel_change},
    });
    let mut doc = ReportDocument::new("multrh", config);

    let product_spec = WeightSpec::Product(wspecs.to_vec()).simplify();
    let mut ratio_entries = Vec::new();
    let mut floor = f64::INFINITY;
    let mut failure: Option<String> = None;
    for grid in ladder.grids().map_err(VerifyError::Constant)? {
        let mut nums = Vec::new();
        let mut ok = true;
        for (w, s) in wspecs.iter().zip(svec) {
            let powered = WeightSpec::Power(Box::new(w.clone()), *s).simplify();
            match sample(&powered, &grid, quad) {
                Ok(f) => nums.push((f, 1.0 / s)),
                Err(SampleError::NotIntegrable { detail }) => {
                    failure = Some(detail);
                    ok = false;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !ok {
            break;
        }
        let den = sample(&product_spec, &grid, quad)?;
        let num_refs: Vec<(&CellField, f64)> =
            nums.iter().map(|(f, e)| (f.field(), *e)).collect();
        let outcome = ratio_sweep(&num_refs, den.field(), &grid, family)?;
        floor = floor.min(outcome.min);
        ratio_entries.push(RefinementEntry {
            n: grid.n(),
            value: outcome.max,
        });
    }
    let ratio_series = match failure {
        Some(detail) => SeriesReport::integrability_failure("multrh-ratio", detail),
        None => SeriesReport::new("multrh-ratio", ratio_entries, policy),
    };

    // Per-component RH constants on the same ladder.
    let mut rh_series = Vec::new();
    for (i, (w, s)) in wspecs.iter().zip(svec).enumerate() {
        rh_series.push(series_or_failure(
            &format!("rh(w_{i}, s={s})"),
            &ConstantRequest::Rh { w: w.clone(), s: *s },
            ladder,
            family,
            quad,
            policy,
        )?);
    }

    if floor.is_finite() {
        doc.assertions.push(Assertion::ge(
            "multrh ratio >= 1 (Holder direction, per-cube minimum)",
            floor,
            1.0,
            HOLDER_TOL,
        ));
    }
    let all_rh_stable = rh_series.iter().all(|s| s.verdict == Verdict::Stable);
    if all_rh_stable {
        doc.assertions
            .push(stability_assertion("multrh ratio", &ratio_series, policy));
    } else {
        doc.assertions.push(Assertion::vacuous(
            "multrh ratio: refinement stability",
            "some RH_{s_i} constant is not stable",
        ));
    }
    doc.series.push(ratio_series);
    doc.series.extend(rh_series);
    Ok(doc.finish())
}

// --- corollary form ---------------------------------------------------------------

/// Sup ratio of `prod (avg w_i)^{p/p_i} <= C avg(prod w_i^{p/p_i})`, asserted
/// stable when every component's Fujii-Wilson constant is stable.
pub fn verify_cor_multrh(
    wspecs: &[WeightSpec],
    pvec: &ExponentVector,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    pvec.check_arity(wspecs.len())?;
    let config = json!({
        "weights": wspecs.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "p_i": pvec.p_i(),
        "p": pvec.p(),
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "family": family.kind.label(),
        "tolerances": {"holder": HOLDER_TOL, "stable_rel_change": policy.stable_rel_change},
    });
    let mut doc = ReportDocument::new("cormultrh", config);

    let (ratio_series, floor) = cor_ratio_series(wspecs, pvec, ladder, family, quad, policy)?;
    let mut fw_series = Vec::new();
    for (i, w) in wspecs.iter().enumerate() {
        fw_series.push(series_or_failure(
            &format!("fw(w_{i})"),
            &ConstantRequest::Fw { w: w.clone() },
            ladder,
            family,
            quad,
            policy,
        )?);
    }

    if floor.is_finite() {
        doc.assertions.push(Assertion::ge(
            "cor-multrh ratio >= 1 (Holder direction, per-cube minimum)",
            floor,
            1.0,
            HOLDER_TOL,
        ));
    }
    if fw_series.iter().all(|s| s.verdict == Verdict::Stable) {
        doc.assertions
            .push(stability_assertion("cor-multrh ratio", &ratio_series, policy));
    } else {
        doc.assertions.push(Assertion::vacuous(
            "cor-multrh ratio: refinement stability",
            "some A_infty constant is not stable",
        ));
    }
    doc.series.push(ratio_series);
    doc.series.extend(fw_series);
    Ok(doc.finish())
}

/// The corollary's sup ratio per level, plus the global per-cube floor.
fn cor_ratio_series(
    wspecs: &[WeightSpec],
    pvec: &ExponentVector,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<(SeriesReport, f64), VerifyError> {
    let p = pvec.p();
    let combined_spec = WeightSpec::Product(
        wspecs
            .iter()
            .zip(pvec.p_i())
            .map(|(w, pi)| WeightSpec::Power(Box::new(w.clone()), p / pi))
            .collect(),
    )
    .simplify();
    let mut entries = Vec::new();
    let mut floor = f64::INFINITY;
    for grid in ladder.grids().map_err(VerifyError::Constant)? {
        let ws: Vec<SampledWeight> = wspecs
            .iter()
            .map(|w| sample(w, &grid, quad))
            .collect::<Result<_, _>>()?;
        let den = sample(&combined_spec, &grid, quad)?;
        let nums: Vec<(&CellField, f64)> = ws
            .iter()
            .zip(pvec.p_i())
            .map(|(w, pi)| (w.field(), p / pi))
            .collect();
        let outcome = ratio_sweep(&nums, den.field(), &grid, family)?;
        floor = floor.min(outcome.min);
        entries.push(RefinementEntry {
            n: grid.n(),
            value: outcome.max,
        });
    }
    Ok((SeriesReport::new("cor-ratio", entries, policy), floor))
}

// --- product bound -----------------------------------------------------------------

/// `[w_vec]_{A_pvec} <= prod [w_i]_{A_{p_i}}^{1/p_i}` for component weights in
/// their own classes.
pub fn product_bound_check(
    wspecs: &[WeightSpec],
    pvec: &ExponentVector,
    grid: &Grid,
    family: CubeFamily,
    quad: &QuadratureConfig,
) -> Result<ReportDocument, VerifyError> {
    pvec.check_arity(wspecs.len())?;
    let config = json!({
        "weights": wspecs.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "p_i": pvec.p_i(),
        "N": grid.n(),
        "domain": [grid.lo()[0], grid.hi()[0]],
        "family": family.kind.label(),
        "tolerances": {"bound": HOLDER_TOL},
    });
    let mut doc = ReportDocument::new("product-bound", config);

    let vw = VectorWeight::from_specs(wspecs, pvec, grid, quad)?;
    let apvec = apvec_sweep(&vw, family)?;
    let mut bound = 1.0;
    for (i, (w, pi)) in wspecs.iter().zip(pvec.p_i()).enumerate() {
        let ws = sample(w, grid, quad)?;
        let sigma = sample(&dual_spec(w, *pi).simplify(), grid, quad)?;
        let ap = ap_sweep(&ws, &sigma, *pi, family)?;
        bound *= ap.max.powf(1.0 / pi);
        doc.series.push(SeriesReport::new(
            &format!("ap(w_{i}, p={pi})"),
            vec![RefinementEntry {
                n: grid.n(),
                value: ap.max,
            }],
            &VerdictPolicy::default(),
        ));
    }
    doc.assertions.push(Assertion::le(
        "vector constant <= product of component constants^(1/p_i)",
        apvec.max,
        bound,
        HOLDER_TOL,
    ));
    doc.series.push(SeriesReport::new(
        "apvec",
        vec![RefinementEntry {
            n: grid.n(),
            value: apvec.max,
        }],
        &VerdictPolicy::default(),
    ));
    Ok(doc.finish())
}

// --- structure theorem ---------------------------------------------------------------

/// Numerical proof chain of the structure theorem: per level,
/// `[w_i]_{A_{p_i}}^{p/p_i} <= R' * [w_vec]^p`, with `R'` the measured
/// corollary ratio; component constants are additionally asserted stable when
/// every component's `A_infty` constant is stable.
pub fn theorem15_check(
    wspecs: &[WeightSpec],
    pvec: &ExponentVector,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    pvec.check_arity(wspecs.len())?;
    let config = json!({
        "weights": wspecs.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "p_i": pvec.p_i(),
        "p": pvec.p(),
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "family": family.kind.label(),
        "tolerances": {"chain": HOLDER_TOL, "stable_rel_change": policy.stable_rel_change},
    });
    let mut doc = ReportDocument::new("thm-structure", config);
    let p = pvec.p();

    let mut apvec_entries = Vec::new();
    let mut ap_entries: Vec<Vec<RefinementEntry>> = vec![Vec::new(); wspecs.len()];
    let mut cor_entries = Vec::new();
    for grid in ladder.grids().map_err(VerifyError::Constant)? {
        let vw = VectorWeight::from_specs(wspecs, pvec, &grid, quad)?;
        let apvec = apvec_sweep(&vw, family)?;
        apvec_entries.push(RefinementEntry {
            n: grid.n(),
            value: apvec.max,
        });
        // Corollary ratio at this level.
        let ws: Vec<SampledWeight> = wspecs
            .iter()
            .map(|w| sample(w, &grid, quad))
            .collect::<Result<_, _>>()?;
        let nums: Vec<(&CellField, f64)> = ws
            .iter()
            .zip(pvec.p_i())
            .map(|(w, pi)| (w.field(), p / pi))
            .collect();
        let cor = ratio_sweep(&nums, vw.combined.field(), &grid, family)?;
        cor_entries.push(RefinementEntry {
            n: grid.n(),
            value: cor.max,
        });
        for (i, ((w, sigma), pi)) in ws.iter().zip(&vw.sigmas).zip(pvec.p_i()).enumerate() {
            let ap = ap_sweep(w, sigma, *pi, family)?;
            ap_entries[i].push(RefinementEntry {
                n: grid.n(),
                value: ap.max,
            });
            doc.assertions.push(Assertion::le(
                format!(
                    "chain @N={}: [w_{i}]^(p/p_{i}) <= R' * [w_vec]^p",
                    grid.n()
                ),
                ap.max.powf(p / pi),
                cor.max * apvec.max.powf(p),
                HOLDER_TOL,
            ));
        }
    }

    let mut fw_series = Vec::new();
    for (i, w) in wspecs.iter().enumerate() {
        fw_series.push(series_or_failure(
            &format!("fw(w_{i})"),
            &ConstantRequest::Fw { w: w.clone() },
            ladder,
            family,
            quad,
            policy,
        )?);
    }
    let all_fw_stable = fw_series.iter().all(|s| s.verdict == Verdict::Stable);
    let ap_series: Vec<SeriesReport> = ap_entries
        .into_iter()
        .enumerate()
        .map(|(i, entries)| SeriesReport::new(&format!("ap(w_{i})"), entries, policy))
        .collect();
    for (i, series) in ap_series.iter().enumerate() {
        if all_fw_stable {
            doc.assertions
                .push(stability_assertion(&format!("ap(w_{i})"), series, policy));
        } else {
            doc.assertions.push(Assertion::vacuous(
                format!("ap(w_{i}): refinement stability"),
                "some A_infty constant is not stable",
            ));
        }
    }

    doc.series
        .push(SeriesReport::new("apvec", apvec_entries, policy));
    doc.series
        .push(SeriesReport::new("cor-ratio", cor_entries, policy));
    doc.series.extend(ap_series);
    doc.series.extend(fw_series);
    Ok(doc.finish())
}

// --- the A_infty characterization ------------------------------------------------------

/// Empirical biconditional: the vector constant's series is stable exactly
/// when the `A_infty` series of the combined weight and of every dual are all
/// stable. Falls back to discrete (cellwise) duals, with a flag, when a dual
/// is not integrable at spec level.
pub fn theorem17_check(
    wspecs: &[WeightSpec],
    pvec: &ExponentVector,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    pvec.check_arity(wspecs.len())?;
    let config = json!({
        "weights": wspecs.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
        "p_i": pvec.p_i(),
        "p": pvec.p(),
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "family": family.kind.label(),
        "tolerances": {"identity": 1e-14, "stable_rel_change": policy.stable_rel_change},
    });
    let mut doc = ReportDocument::new("thm-ainfty", config);

    doc.assertions.push(Assertion::le_abs(
        "exponent identity |1/p + sum 1/p_i' - m|",
        pvec.identity_residual().abs(),
        0.0,
        1e-14,
    ));

    let mut discrete = false;
    let mut fw_w = Vec::new();
    let mut fw_sigma: Vec<Vec<RefinementEntry>> = vec![Vec::new(); wspecs.len()];
    let mut apvec_entries = Vec::new();
    for grid in ladder.grids().map_err(VerifyError::Constant)? {
        let vw = match VectorWeight::from_specs(wspecs, pvec, &grid, quad) {
            Ok(vw) => vw,
            Err(ConstantError::Sample(SampleError::NotIntegrable { .. })) => {
                discrete = true;
                let ws: Vec<SampledWeight> = wspecs
                    .iter()
                    .map(|w| sample(w, &grid, quad))
                    .collect::<Result<_, _>>()?;
                let refs: Vec<&SampledWeight> = ws.iter().collect();
                VectorWeight::from_fields_discrete(&refs, pvec)?
            }
            Err(e) => return Err(e.into()),
        };
        let fw = fw_sweep_with(&vw.combined, family, Algorithm::Fast)?;
        fw_w.push(RefinementEntry {
            n: grid.n(),
            value: fw.max,
        });
        for (i, sigma) in vw.sigmas.iter().enumerate() {
            let fws = fw_sweep_with(sigma, family, Algorithm::Fast)?;
            fw_sigma[i].push(RefinementEntry {
                n: grid.n(),
                value: fws.max,
            });
        }
        let apvec = apvec_sweep(&vw, family)?;
        apvec_entries.push(RefinementEntry {
            n: grid.n(),
            value: apvec.max,
        });
    }
    if discrete {
        doc.flags.push("mode=discrete".to_string());
    }

    let fw_w_series = SeriesReport::new("fw(w)", fw_w, policy);
    let fw_sigma_series: Vec<SeriesReport> = fw_sigma
        .into_iter()
        .enumerate()
        .map(|(i, e)| SeriesReport::new(&format!("fw(sigma_{i})"), e, policy))
        .collect();
    let apvec_series = SeriesReport::new("apvec", apvec_entries, policy);

    let all_fw_stable = fw_w_series.verdict == Verdict::Stable
        && fw_sigma_series.iter().all(|s| s.verdict == Verdict::Stable);
    let apvec_stable = apvec_series.verdict == Verdict::Stable;
    doc.assertions.push(Assertion {
        name: format!(
            "biconditional: all A_infty series stable ({}) <=> vector constant stable ({})",
            all_fw_stable, apvec_stable
        ),
        measured: if all_fw_stable { 1.0 } else { 0.0 },
        bound: if apvec_stable { 1.0 } else { 0.0 },
        tolerance: 0.0,
        pass: all_fw_stable == apvec_stable,
    });
    if !all_fw_stable && !apvec_stable {
        doc.flags.push("jointly-divergent".to_string());
    }

    doc.series.push(fw_w_series);
    doc.series.extend(fw_sigma_series);
    doc.series.push(apvec_series);
    Ok(doc.finish())
}

// --- the counterexample ------------------------------------------------------------------

/// Reproduction of the singular construction: `w_1 = 1/(|x| log^2(e/|x|))` on
/// `[-1,1]` (1 outside), `w_2 = 1` on `[-2, 2]`, with `p_2 = p_1`. The vector
/// weight lies in the multilinear class while `w_1` fails every component
/// condition; each claim is checked as a flagged series.
#[allow(clippy::too_many_arguments)]
pub fn counterexample_scenario(
    p1: f64,
    ladder: &GridLadder,
    interval_ks: &[u32],
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    if !(p1 > 1.0) || !p1.is_finite() {
        return Err(VerifyError::BadInput(format!(
            "p1 must lie in (1, inf), got {p1}"
        )));
    }
    if interval_ks.len() < 2 {
        return Err(VerifyError::BadInput(
            "need at least two centered-interval scales".into(),
        ));
    }
    let config = json!({
        "p1": p1,
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "interval_scales": interval_ks,
        "family": family.kind.label(),
        "tolerances": {
            "stable_rel_change": policy.stable_rel_change,
            "divergence_factor": policy.divergence_factor,
        },
    });
    let mut doc = ReportDocument::new("counterexample", config);

    let w1 = WeightSpec::singular_log_weight();
    let one = WeightSpec::Const(1.0);
    let pvec = ExponentVector::new(&[p1, p1])?;
    let conj1 = p1 / (p1 - 1.0);

    // (i) w = w_1^(p/p_1) = w_1^(1/2) lies in A_1.
    let w_combined = WeightSpec::Power(Box::new(w1.clone()), 0.5).simplify();
    let a1_w = series_over_ladder("a1(w)", ladder, quad, policy, |grid| {
        let ws = sample(&w_combined, grid, quad)?;
        Ok(a1_sweep(&ws, family)?.max)
    })?;
    doc.assertions
        .push(stability_assertion("a1(w)", &a1_w, policy));

    // (ii) the dual-dual weight w_1^((p_1'-1)/(2 p_1'-1)) lies in A_1.
    let dd_exp = (conj1 - 1.0) / (2.0 * conj1 - 1.0);
    let dd_spec = WeightSpec::Power(Box::new(w1.clone()), dd_exp).simplify();
    let a1_dd = series_over_ladder("a1(dual-dual)", ladder, quad, policy, |grid| {
        let ws = sample(&dd_spec, grid, quad)?;
        Ok(a1_sweep(&ws, family)?.max)
    })?;
    doc.assertions
        .push(stability_assertion("a1(dual-dual)", &a1_dd, policy));

    // (iii) the pair (w_1, 1) lies in the vector class.
    let apvec_series = series_over_ladder("apvec", ladder, quad, policy, |grid| {
        let vw = VectorWeight::from_specs(
            &[w1.clone(), one.clone()],
            &pvec,
            grid,
            quad,
        )?;
        Ok(apvec_sweep(&vw, family)?.max)
    })?;
    doc.assertions
        .push(stability_assertion("apvec", &apvec_series, policy));

    // (iv) [w_1]_{A_{p_1}} blows up on centered intervals: the quotient on
    // [-2^-k, 2^-k] comes from exact integrals, far below any cell width.
    let mut interval_entries = Vec::new();
    for &k in interval_ks {
        let t = 2f64.powi(-(k as i32));
        let value = ap_quotient_on_interval(&w1, p1, -t, t, quad)?;
        interval_entries.push(RefinementEntry {
            n: 1usize << k.min(63),
            value,
        });
    }
    let growth = interval_entries.last().unwrap().value / interval_entries[0].value;
    doc.assertions.push(Assertion::ge(
        format!(
            "ap(w_1) centered-interval growth: value at 2^-{} over value at 2^-{}",
            interval_ks.last().unwrap(),
            interval_ks[0]
        ),
        growth,
        policy.divergence_factor,
        0.0,
    ));
    let interval_series = SeriesReport::new("ap(w_1) centered intervals", interval_entries, policy);

    // (v) w_1 satisfies no reverse Holder inequality: the discrete-mode RH
    // series diverges for s in {3/2, 2} (the spec-level power w_1^s is not
    // even integrable, which is flagged alongside).
    let mut rh_series_all = Vec::new();
    for s in [1.5, 2.0] {
        let mut entries = Vec::new();
        for grid in ladder.grids().map_err(VerifyError::Constant)? {
            let ws = sample(&w1, &grid, quad)?;
            let disc = ws.as_discrete();
            let powered = disc.cellwise_pow(s)?;
            let outcome = rh_sweep(&disc, &powered, s, family)?;
            entries.push(RefinementEntry {
                n: grid.n(),
                value: outcome.max,
            });
        }
        let mut series = SeriesReport::new(&format!("rh(w_1, s={s})"), entries, policy);
        series.flags.push("mode=discrete".to_string());
        series
            .flags
            .push("spec-level power not integrable".to_string());
        let values = series.values();
        let check = if values.len() >= 3 {
            values[values.len() - 1] / values[values.len() - 3]
        } else {
            values[values.len() - 1] / values[0]
        };
        doc.assertions.push(Assertion {
            name: format!("rh(w_1, s={s}) divergent per the divergence rule"),
            measured: check,
            bound: policy.divergence_factor,
            tolerance: 0.0,
            pass: series.verdict == Verdict::Divergent,
        });
        rh_series_all.push(series);
    }

    doc.series.push(a1_w);
    doc.series.push(a1_dd);
    doc.series.push(apvec_series);
    doc.series.push(interval_series);
    doc.series.extend(rh_series_all);
    Ok(doc.finish())
}

fn series_over_ladder(
    name: &str,
    ladder: &GridLadder,
    _quad: &QuadratureConfig,
    policy: &VerdictPolicy,
    mut f: impl FnMut(&Grid) -> Result<f64, VerifyError>,
) -> Result<SeriesReport, VerifyError> {
    let mut entries = Vec::new();
    for grid in ladder.grids().map_err(VerifyError::Constant)? {
        entries.push(RefinementEntry {
            n: grid.n(),
            value: f(&grid)?,
        });
    }
    Ok(SeriesReport::new(name, entries, policy))
}

// --- bilinear RH complement ------------------------------------------------------------

/// If the bilinear reverse Holder sup ratio is stable and `w_1` lies in
/// `RH_{s_1}`, then `w_2` lies in `RH_{s_2}`.
#[allow(clippy::too_many_arguments)]
pub fn rh_complement_check(
    w1spec: &WeightSpec,
    w2spec: &WeightSpec,
    s1: f64,
    s2: f64,
    ladder: &GridLadder,
    family: CubeFamily,
    quad: &QuadratureConfig,
    policy: &VerdictPolicy,
) -> Result<ReportDocument, VerifyError> {
    if (1.0 / s1 + 1.0 / s2 - 1.0).abs() > 1e-12 {
        return Err(VerifyError::BadInput(format!(
            "1/s1 + 1/s2 must equal 1, got {}",
            1.0 / s1 + 1.0 / s2
        )));
    }
    let config = json!({
        "w1": w1spec.to_string(),
        "w2": w2spec.to_string(),
        "s1": s1,
        "s2": s2,
        "ladder": ladder.ns,
        "domain": [ladder.lo, ladder.hi],
        "family": family.kind.label(),
        "tolerances": {"stable_rel_change": policy.stable_rel_change},
    });
    let mut doc = ReportDocument::new("rh-complement", config);

    let specs = [w1spec.clone(), w2spec.clone()];
    let svec = [s1, s2];
    let multrh_doc = verify_multrh(&specs, &svec, ladder, family, quad, policy)?;
    let ratio = multrh_doc
        .series_named("multrh-ratio")
        .expect("ratio series present")
        .clone();
    let rh1 = series_or_failure(
        "rh(w_1)",
        &ConstantRequest::Rh {
            w: w1spec.clone(),
            s: s1,
        },
        ladder,
        family,
        quad,
        policy,
    )?;
    let rh2 = series_or_failure(
        "rh(w_2)",
        &ConstantRequest::Rh {
            w: w2spec.clone(),
            s: s2,
        },
        ladder,
        family,
        quad,
        policy,
    )?;

    let hypothesis = ratio.verdict == Verdict::Stable && rh1.verdict == Verdict::Stable;
    if hypothesis {
        doc.assertions
            .push(stability_assertion("rh(w_2)", &rh2, policy));
    } else {
        doc.assertions.push(Assertion::vacuous(
            "rh(w_2): refinement stability",
            "ratio or rh(w_1) not stable",
        ));
        doc.flags.push("hypothesis-unmet".to_string());
    }
    doc.series.push(ratio);
    doc.series.push(rh1);
    doc.series.push(rh2);
    Ok(doc.finish())
}
