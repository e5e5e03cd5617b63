//! Sampling of weight specs onto grids (exact cell averages), the seeded
//! random test-weight generator, and the singular model integral used by the
//! counterexample analysis.

use rayon::prelude::*;

use super::{integrate, QuadratureConfig, SampleError, SampledWeight, SampleMode, WeightSpec};
use crate::grid::{CellField, Grid};

/// Sample a spec onto a grid: every cell value is the cell average of the
/// spec, exact where an antiderivative exists and within the quadrature
/// tolerance otherwise. In two dimensions the (one-variable) spec extends
/// constantly in the second coordinate.
pub fn sample(
    spec: &WeightSpec,
    grid: &Grid,
    quad: &QuadratureConfig,
) -> Result<SampledWeight, SampleError> {
    quad.validate()?;
    let n = grid.n();
    let averages = cell_averages_1d(spec, n, grid.lo()[0], grid.hi()[0], quad)?;
    let values = match grid.dim() {
        1 => averages,
        _ => {
            let mut v = Vec::with_capacity(n * n);
            for _row in 0..n {
                v.extend_from_slice(&averages);
            }
            v
        }
    };
    let field = CellField::new(*grid, values)?;
    Ok(SampledWeight::from_field(
        field,
        SampleMode::SpecLevel,
        spec.to_string(),
    ))
}

fn cell_averages_1d(
    spec: &WeightSpec,
    n: usize,
    lo: f64,
    hi: f64,
    quad: &QuadratureConfig,
) -> Result<Vec<f64>, SampleError> {
    let width = (hi - lo) / n as f64;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let cl = lo + i as f64 * width;
            let ch = lo + (i + 1) as f64 * width;
            let mass = integrate(spec, cl, ch, quad)?;
            let avg = mass / width;
            if !avg.is_finite() || avg <= 0.0 {
                return Err(SampleError::NonPositive {
                    detail: format!("cell {i} on [{cl}, {ch}] averaged to {avg}"),
                });
            }
            Ok(avg)
        })
        .collect()
}

/// Result of the model integral `I(t) = int_0^t s^(-a) log(e/s)^(-b) ds`.
#[derive(Debug, Clone, Copy)]
pub struct LogcalcResult {
    pub integral: f64,
    /// `I(t) / (t^(1-a) log(e/t)^(-b))` — bounded above and below for fixed
    /// `(a, b)` as `t -> 0`.
    pub ratio: f64,
}

pub fn logcalc_integral(a: f64, b: f64, t: f64) -> Result<LogcalcResult, SampleError> {
    if a >= 1.0 {
        return Err(SampleError::NotIntegrable {
            detail: format!("model integral diverges for a = {a} >= 1"),
        });
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(SampleError::BadConfig(format!(
            "t must lie in (0, 1], got {t}"
        )));
    }
    if b < 0.0 {
        return Err(SampleError::BadConfig(format!(
            "log power b must be >= 0, got {b}"
        )));
    }
    let quad = QuadratureConfig::default();
    let spec = WeightSpec::PowLog { x0: 0.0, a, b };
    let integral = integrate(&spec, 0.0, t, &quad)?;
    let comparator = t.powf(1.0 - a) * (1.0 - t.ln()).powf(-b);
    Ok(LogcalcResult {
        integral,
        ratio: integral / comparator,
    })
}

// Counter-based hashing: the same (seed, level, node) always yields the same
// draw, independent of evaluation order, so parallel sampling is
// deterministic.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn hash3(seed: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b)
}

/// Uniform draw in [0, 1).
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 / (1u64 << 53) as f64
}

/// Deterministic positive test weight: the exponential of a mean-zero dyadic
/// martingale with per-level amplitude at most `roughness`, so values stay in
/// `[e^-K, e^K]` with `K = roughness * log2(N)` and the field is trivially in
/// `A_infty` on the grid.
pub fn random_weight(
    seed: u64,
    grid: &Grid,
    roughness: f64,
) -> Result<SampledWeight, SampleError> {
    if !(0.0..1.0).contains(&roughness) {
        return Err(SampleError::BadConfig(format!(
            "roughness must lie in [0, 1), got {roughness}"
        )));
    }
    let n = grid.n();
    let k = n.ilog2();
    let values: Vec<f64> = match grid.dim() {
        1 => (0..n)
            .into_par_iter()
            .map(|i| {
                let mut x = 0.0;
                for level in 1..=k {
                    let parent = (i >> (k - level + 1)) as u64;
                    let delta =
                        (2.0 * unit_f64(hash3(seed, level as u64, parent)) - 1.0) * roughness;
                    let right_child = (i >> (k - level)) & 1 == 1;
                    x += if right_child { -delta } else { delta };
                }
                x.exp()
            })
            .collect(),
        _ => (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (ix, iy) = (idx % n, idx / n);
                let mut x = 0.0;
                for level in 1..=k {
                    let shift = k - level;
                    let px = (ix >> (shift + 1)) as u64;
                    let py = (iy >> (shift + 1)) as u64;
                    let parent = py * (n as u64) + px;
                    let child = ((ix >> shift) & 1) + 2 * ((iy >> shift) & 1);
                    // Four child draws re-centered to mean zero within the
                    // parent block.
                    let mut draws = [0.0f64; 4];
                    for (c, d) in draws.iter_mut().enumerate() {
                        *d = (unit_f64(hash3(seed, (level as u64) << 32 | c as u64, parent))
                            - 0.5)
                            * roughness;
                    }
                    let mean = draws.iter().sum::<f64>() / 4.0;
                    x += draws[child] - mean;
                }
                x.exp()
            })
            .collect(),
    };
    let field = CellField::new(*grid, values)?;
    Ok(SampledWeight::from_field(
        field,
        SampleMode::Discrete,
        format!("random(seed={seed}, roughness={roughness})"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn constant_sampling() {
        let grid = Grid::line(8, -1.0, 1.0).unwrap();
        let w = sample(&WeightSpec::Const(3.0), &grid, &quad()).unwrap();
        assert!(w.field().values().iter().all(|&v| v == 3.0));
        assert_eq!(w.mode(), SampleMode::SpecLevel);
    }

    #[test]
    fn singular_first_cell_matches_antiderivative() {
        // Cell [0, h] of 1/(x log^2(e/x)) averages to 1/(h log(e/h)).
        let n = 64;
        let grid = Grid::line(n, 0.0, 0.5).unwrap();
        let w = sample(&WeightSpec::powlog(0.0, 1.0, 2.0), &grid, &quad()).unwrap();
        let h = 0.5 / n as f64;
        let exact = 1.0 / (h * (1.0 - h.ln()));
        let got = w.field().values()[0];
        assert!(
            (got - exact).abs() <= 1e-12 * exact,
            "{got} vs {exact}"
        );
    }

    #[test]
    fn non_integrable_spec_fails_at_sampling() {
        let grid = Grid::line(8, -1.0, 1.0).unwrap();
        let err = sample(&WeightSpec::powlog(0.0, 2.0, 0.0), &grid, &quad()).unwrap_err();
        assert!(matches!(err, SampleError::NotIntegrable { .. }));
    }

    #[test]
    fn power_one_samples_identically() {
        let spec = WeightSpec::singular_log_weight();
        let powered = WeightSpec::Power(Box::new(spec.clone()), 1.0);
        let grid = Grid::line(64, -2.0, 2.0).unwrap();
        let a = sample(&spec, &grid, &quad()).unwrap();
        let b = sample(&powered, &grid, &quad()).unwrap();
        assert_eq!(a.field().values(), b.field().values());
    }

    #[test]
    fn sampled_averages_match_power_antiderivative() {
        // |x|^(1/2) on [-1, 1]: cell averages from the exact antiderivative.
        let n = 128;
        let grid = Grid::line(n, -1.0, 1.0).unwrap();
        let w = sample(&WeightSpec::abs_power(0.5), &grid, &quad()).unwrap();
        let h = 2.0 / n as f64;
        let anti = |x: f64| x.abs().powf(1.5) / 1.5 * x.signum();
        for i in 0..n {
            let (cl, ch) = (-1.0 + i as f64 * h, -1.0 + (i + 1) as f64 * h);
            let exact = (anti(ch) - anti(cl)) / h;
            let got = w.field().values()[i];
            assert!(
                (got - exact).abs() <= 1e-9 * exact.abs(),
                "cell {i}: {got} vs {exact}"
            );
        }
    }

    #[test]
    fn logcalc_trivial_cases() {
        // b = 0: I(t) = t^(1-a)/(1-a), ratio = 1/(1-a).
        let r = logcalc_integral(0.5, 0.0, 0.25).unwrap();
        assert!((r.integral - 2.0 * 0.25f64.sqrt()).abs() < 1e-12);
        assert!((r.ratio - 2.0).abs() < 1e-12);
        let r = logcalc_integral(1e-12, 0.0, 0.5).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn logcalc_rejects_divergent_exponent() {
        assert!(matches!(
            logcalc_integral(1.0, 2.0, 0.5),
            Err(SampleError::NotIntegrable { .. })
        ));
    }

    #[test]
    fn random_weight_deterministic_and_bounded() {
        let grid = Grid::line(256, 0.0, 1.0).unwrap();
        let a = random_weight(7, &grid, 0.3).unwrap();
        let b = random_weight(7, &grid, 0.3).unwrap();
        assert_eq!(a.field().values(), b.field().values());
        let c = random_weight(8, &grid, 0.3).unwrap();
        assert_ne!(a.field().values(), c.field().values());
        let k = 8.0; // log2(256)
        let bound = (0.3f64 * k).exp();
        for &v in a.field().values() {
            assert!(v <= bound && v >= 1.0 / bound);
        }
    }

    #[test]
    fn random_weight_zero_roughness_is_one() {
        let grid = Grid::line(16, 0.0, 1.0).unwrap();
        let w = random_weight(3, &grid, 0.0).unwrap();
        assert!(w.field().values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn random_weight_2d_levels_are_mean_zero() {
        let grid = Grid::square(8, [0.0, 0.0], [1.0, 1.0]).unwrap();
        let w = random_weight(11, &grid, 0.4).unwrap();
        for &v in w.field().values() {
            assert!(v > 0.0 && v.is_finite());
        }
        // Log-values sum to zero across the four children of every parent,
        // so the whole field's log-sum vanishes.
        let vals = w.field().values();
        let logsum: f64 = vals.iter().map(|v| v.ln()).sum();
        assert!(logsum.abs() < 1e-9);
    }
}
