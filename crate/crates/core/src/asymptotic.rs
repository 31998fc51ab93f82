//! Saturating dimensionality-vs-size model and its two-stage extrapolation.
//!
//! The model is
//!
//! ```text
//! z(x) = a [1 - (b / (exp(x^c / d) - 1 + b))^e]^f
//! ```
//!
//! with all six parameters positive. It is zero at `x = 0`, non-decreasing,
//! and tends to `a` as `x` grows, so `a` is the asymptotic dimensionality.
//! Only `a` is treated as identifiable.

use alloc::vec::Vec;

use rand::Rng;

use crate::dimension::IdSurface;
use crate::optim::cholesky_solve;
use crate::rng::{derive_seed, rng_from_seed, StatRng};
use crate::{Error, Result};

/// Six parameters must be pinned by at least seven points.
pub const MIN_FIT_POINTS: usize = 7;

/// Beyond this `x^c / d`, `exp` would overflow; the log form is used.
const EXP_LIMIT: f64 = 700.0;

const LM_MAX_ITER: usize = 2000;
const LM_TOL: f64 = 1e-10;
const JACOBIAN_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AsymptoticModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

impl AsymptoticModelParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Result<Self> {
        let p = Self { a, b, c, d, e, f };
        if p.to_array().iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(p)
        } else {
            Err(Error::InvalidParameter("model parameters must be finite and positive"))
        }
    }

    /// Limit of the model as `x` grows without bound.
    pub fn asymptote(&self) -> f64 {
        self.a
    }

    pub fn eval(&self, x: f64) -> f64 {
        eval_model(self, x)
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    fn from_log(v: &[f64; 6]) -> Self {
        let [a, b, c, d, e, f] = v.map(libm::exp);
        Self { a, b, c, d, e, f }
    }
}

/// Evaluates the model, saturating to `a` where `exp(x^c / d)` overflows.
pub fn eval_model(p: &AsymptoticModelParams, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let t = libm::exp(p.c * libm::log(x) - libm::log(p.d));
    let ln_q = if t > EXP_LIMIT {
        libm::log(p.b) - t
    } else {
        libm::log(p.b) - libm::log(libm::expm1(t) + p.b)
    };
    let e_ln_q = p.e * ln_q;
    let qe = libm::exp(e_ln_q);
    let ln_inner = if qe < 0.5 {
        libm::log1p(-qe)
    } else {
        let inner = -libm::expm1(e_ln_q);
        if inner <= 0.0 {
            return 0.0;
        }
        libm::log(inner)
    };
    p.a * libm::exp(p.f * ln_inner)
}

/// Per-parameter positive intervals, in `[a, b, c, d, e, f]` order.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamBounds {
    pub lower: [f64; 6],
    pub upper: [f64; 6],
}

impl ParamBounds {
    /// Initialization ranges derived from the data: `a` in
    /// `[max z, 20 max z]`, `d` in `[1, 10 max x]`, the rest in `[0.1, 10]`.
    pub fn from_data(xs: &[f64], zs: &[f64]) -> Self {
        let z_max = zs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
        let x_max = xs.iter().cloned().fold(0.0, f64::max).max(0.1);
        Self {
            lower: [z_max, 0.1, 0.1, 1.0, 0.1, 0.1],
            upper: [20.0 * z_max, 10.0, 10.0, 10.0 * x_max, 10.0, 10.0],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self
            .lower
            .iter()
            .zip(&self.upper)
            .all(|(l, u)| l.is_finite() && u.is_finite() && *l > 0.0 && l <= u);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("parameter bounds must be positive intervals"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Target relative RMSE (rmse / mean z) that ends the restart loop.
    pub epsilon: f64,
    pub max_restarts: usize,
    /// Ranges for random initial parameters; `None` derives them from data.
    pub init_bounds: Option<ParamBounds>,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.02,
            max_restarts: 200,
            init_bounds: None,
            seed: 0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter("epsilon must be positive"));
        }
        if self.max_restarts == 0 {
            return Err(Error::InvalidParameter("max_restarts must be at least 1"));
        }
        if let Some(b) = &self.init_bounds {
            b.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurveFit {
    pub params: AsymptoticModelParams,
    pub rmse: f64,
    pub relative_rmse: f64,
    /// Whether `relative_rmse < epsilon` was reached.
    pub below_threshold: bool,
    /// Restarts run, including the successful one.
    pub restarts: usize,
}

impl CurveFit {
    pub fn asymptote(&self) -> f64 {
        self.params.a
    }
}

/// Search box in log space; wide enough for any saturation regime while
/// keeping every parameter strictly positive and finite.
fn search_box(zs: &[f64]) -> ([f64; 6], [f64; 6]) {
    let z_max = zs.iter().cloned().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let lo = [z_max * 1e-6, 1e-4, 1e-3, 1e-8, 1e-4, 1e-4];
    let hi = [z_max * 1e6, 1e4, 1e2, 1e12, 1e4, 1e4];
    (lo.map(libm::log), hi.map(libm::log))
}

fn sse(p: &[f64; 6], xs: &[f64], zs: &[f64], resid: &mut [f64]) -> f64 {
    let params = AsymptoticModelParams::from_log(p);
    let mut s = 0.0;
    for ((r, &x), &z) in resid.iter_mut().zip(xs).zip(zs) {
        *r = eval_model(&params, x) - z;
        s += *r * *r;
    }
    if s.is_finite() {
        s
    } else {
        f64::INFINITY
    }
}

/// Damped least squares (Levenberg-Marquardt) on log-parameters.
fn levenberg_marquardt(start: [f64; 6], xs: &[f64], zs: &[f64], lo: &[f64; 6], hi: &[f64; 6]) -> ([f64; 6], f64) {
    let n = xs.len();
    let mut p = start;
    for i in 0..6 {
        p[i] = p[i].clamp(lo[i], hi[i]);
    }
    let mut resid = alloc::vec![0.0; n];
    let mut trial_resid = alloc::vec![0.0; n];
    let mut cost = sse(&p, xs, zs, &mut resid);
    if !cost.is_finite() {
        return (p, cost);
    }
    let mut lambda = 1e-3;
    let mut jac = alloc::vec![0.0; n * 6];
    let mut plus = alloc::vec![0.0; n];
    let mut minus = alloc::vec![0.0; n];

    for _ in 0..LM_MAX_ITER {
        if cost == 0.0 {
            break;
        }
        for k in 0..6 {
            let mut pp = p;
            let mut pm = p;
            pp[k] += JACOBIAN_STEP;
            pm[k] -= JACOBIAN_STEP;
            sse(&pp, xs, zs, &mut plus);
            sse(&pm, xs, zs, &mut minus);
            for i in 0..n {
                jac[i * 6 + k] = (plus[i] - minus[i]) / (2.0 * JACOBIAN_STEP);
            }
        }
        let mut jtj = [0.0; 36];
        let mut jtr = [0.0; 6];
        for i in 0..n {
            let row = &jac[i * 6..i * 6 + 6];
            for a in 0..6 {
                jtr[a] += row[a] * resid[i];
                for b in 0..6 {
                    jtj[a * 6 + b] += row[a] * row[b];
                }
            }
        }
        if jtj.iter().chain(&jtr).any(|v| !v.is_finite()) {
            break;
        }
        let diag_max = (0..6).map(|k| jtj[k * 7]).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

        let mut accepted = false;
        let mut step_small = false;
        while lambda < 1e16 {
            let mut damped = jtj;
            for k in 0..6 {
                damped[k * 7] += lambda * (jtj[k * 7] + 1e-9 * diag_max);
            }
            let neg_g = jtr.map(|g| -g);
            let Some(delta) = cholesky_solve(&damped, &neg_g) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for k in 0..6 {
                trial[k] = (p[k] + delta[k]).clamp(lo[k], hi[k]);
            }
            let trial_cost = sse(&trial, xs, zs, &mut trial_resid);
            if trial_cost < cost {
                let step = (0..6).map(|k| libm::fabs(trial[k] - p[k])).fold(0.0, f64::max);
                let scale = p.iter().map(|v| libm::fabs(*v)).fold(1.0, f64::max);
                let rmse_change = 1.0 - libm::sqrt(trial_cost / cost);
                step_small = step <= LM_TOL * scale || rmse_change <= LM_TOL;
                p = trial;
                cost = trial_cost;
                core::mem::swap(&mut resid, &mut trial_resid);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted || step_small {
            break;
        }
    }
    (p, cost)
}

fn log_uniform(rng: &mut StatRng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        libm::exp(rng.random_range(libm::log(lo)..libm::log(hi)))
    }
}

/// Least-squares fit of the model to `(xs, zs)`.
///
/// Each restart draws initial parameters log-uniformly from the
/// initialization ranges and runs Levenberg-Marquardt to convergence. The
/// loop ends as soon as a fit reaches `relative_rmse < epsilon`, otherwise
/// after `max_restarts`; the best fit seen is returned either way, ties
/// going to the earlier restart.
pub fn fit_curve(xs: &[f64], zs: &[f64], cfg: &FitConfig) -> Result<CurveFit> {
    cfg.validate()?;
    if xs.len() != zs.len() {
        return Err(Error::InvalidParameter("xs and zs must have equal length"));
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            got: xs.len(),
        });
    }
    if xs.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::InvalidParameter("sizes must be finite and non-negative"));
    }
    if zs.iter().any(|z| !z.is_finite() || *z < 0.0) {
        return Err(Error::InvalidParameter(
            "dimensionality values must be finite and non-negative",
        ));
    }
    let z_mean = zs.iter().sum::<f64>() / zs.len() as f64;
    if !(z_mean > 0.0) {
        return Err(Error::InvalidParameter("dimensionality values must not all be zero"));
    }

    let init = cfg.init_bounds.unwrap_or_else(|| ParamBounds::from_data(xs, zs));
    let (lo, hi) = search_box(zs);
    let mut rng = rng_from_seed(cfg.seed);
    let mut best: Option<([f64; 6], f64)> = None;
    let mut restarts = 0;
    for _ in 0..cfg.max_restarts {
        restarts += 1;
        let start: [f64; 6] = core::array::from_fn(|k| libm::log(log_uniform(&mut rng, init.lower[k], init.upper[k])));
        let (p, cost) = levenberg_marquardt(start, xs, zs, &lo, &hi);
        if best.is_none_or(|(_, c)| cost < c) {
            best = Some((p, cost));
        }
        let rmse = libm::sqrt(best.map_or(f64::INFINITY, |(_, c)| c) / xs.len() as f64);
        if rmse / z_mean < cfg.epsilon {
            break;
        }
    }
    let (p, cost) = best.ok_or(Error::NotConverged {
        relative_rmse: f64::INFINITY,
    })?;
    if !cost.is_finite() {
        return Err(Error::NotConverged {
            relative_rmse: f64::INFINITY,
        });
    }
    let rmse = libm::sqrt(cost / xs.len() as f64);
    let relative_rmse = rmse / z_mean;
    Ok(CurveFit {
        params: AsymptoticModelParams::from_log(&p),
        rmse,
        relative_rmse,
        below_threshold: relative_rmse < cfg.epsilon,
        restarts,
    })
}

/// Which axis is fitted first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FitOrder {
    /// Fit along neuron counts at each image count, then along image counts.
    NeuronThenImage,
    /// Fit along image counts at each neuron count, then along neuron counts.
    ImageThenNeuron,
}

impl FitOrder {
    pub const BOTH: [FitOrder; 2] = [FitOrder::NeuronThenImage, FitOrder::ImageThenNeuron];

    pub fn label(&self) -> &'static str {
        match self {
            FitOrder::NeuronThenImage => "neuron -> image",
            FitOrder::ImageThenNeuron => "image -> neuron",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stage1Fit {
    /// Size held fixed along the second axis.
    pub fixed_size: usize,
    pub fit: CurveFit,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExtrapolationResult {
    pub order: FitOrder,
    pub asymptotic_dimensionality: f64,
    pub stage1_fits: Vec<Stage1Fit>,
    /// Fixed sizes whose stage-1 curve had too few valid cells or failed.
    pub stage1_skipped: Vec<usize>,
    pub stage2_fit: CurveFit,
}

const STAGE2_STREAM: u64 = u64::MAX;

/// Two-stage extrapolation of a dimensionality surface.
///
/// Stage 1 fits, for every size of the second axis, the dimensionality
/// against the first axis and keeps the asymptote. Stage 2 fits those
/// asymptotes against the second axis; its asymptote is the result.
/// Flagged cells are ignored. Stage 2 must meet `epsilon`.
pub fn extrapolate_surface(surface: &IdSurface, order: FitOrder, cfg: &FitConfig) -> Result<ExtrapolationResult> {
    cfg.validate()?;
    let (first, second) = match order {
        FitOrder::NeuronThenImage => (&surface.neuron_sizes, &surface.image_sizes),
        FitOrder::ImageThenNeuron => (&surface.image_sizes, &surface.neuron_sizes),
    };
    for axis in [first, second] {
        if axis.len() < MIN_FIT_POINTS {
            return Err(Error::InsufficientPoints {
                needed: MIN_FIT_POINTS,
                got: axis.len(),
            });
        }
    }
    let value = |fixed: usize, along: usize| match order {
        FitOrder::NeuronThenImage => surface.mean_dimensionality(fixed, along),
        FitOrder::ImageThenNeuron => surface.mean_dimensionality(along, fixed),
    };

    let mut stage1_fits = Vec::new();
    let mut stage1_skipped = Vec::new();
    for (si, &fixed_size) in second.iter().enumerate() {
        let (xs, zs): (Vec<f64>, Vec<f64>) = first
            .iter()
            .enumerate()
            .filter_map(|(fi, &size)| value(si, fi).map(|z| (size as f64, z)))
            .unzip();
        let stage_cfg = FitConfig {
            seed: derive_seed(cfg.seed, si as u64),
            ..*cfg
        };
        match fit_curve(&xs, &zs, &stage_cfg) {
            Ok(fit) => stage1_fits.push(Stage1Fit { fixed_size, fit }),
            Err(_) => stage1_skipped.push(fixed_size),
        }
    }
    if stage1_fits.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            got: stage1_fits.len(),
        });
    }
    let xs: Vec<f64> = stage1_fits.iter().map(|s| s.fixed_size as f64).collect();
    let zs: Vec<f64> = stage1_fits.iter().map(|s| s.fit.asymptote()).collect();
    let stage2_fit = fit_curve(
        &xs,
        &zs,
        &FitConfig {
            seed: derive_seed(cfg.seed, STAGE2_STREAM),
            ..*cfg
        },
    )?;
    if !stage2_fit.below_threshold {
        return Err(Error::NotConverged {
            relative_rmse: stage2_fit.relative_rmse,
        });
    }
    Ok(ExtrapolationResult {
        order,
        asymptotic_dimensionality: stage2_fit.asymptote(),
        stage1_fits,
        stage1_skipped,
        stage2_fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn p(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> AsymptoticModelParams {
        AsymptoticModelParams::new(a, b, c, d, e, f).unwrap()
    }

    #[test]
    fn closed_form_points() {
        let q = p(100.0, 1.0, 1.0, 1.0, 1.0, 1.0);
        assert_eq!(eval_model(&q, 0.0), 0.0);
        // With b = c = d = e = f = 1 the model is 100 (1 - exp(-x)).
        let expected = 100.0 * (1.0 - (-1.0f64).exp());
        assert!((eval_model(&q, 1.0) - expected).abs() < 1e-12);
        assert!((eval_model(&q, 1e6) - 100.0).abs() < 1e-9);
        assert!((eval_model(&q, 0.5) - 100.0 * (1.0 - (-0.5f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn overflow_region_saturates() {
        let q = p(42.0, 3.0, 2.0, 1.0, 0.5, 2.0);
        assert_eq!(eval_model(&q, 1e300), 42.0);
        assert!(eval_model(&q, 1e3).is_finite());
    }

    #[test]
    fn rejects_non_positive_params() {
        assert!(AsymptoticModelParams::new(1.0, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(AsymptoticModelParams::new(1.0, 1.0, 1.0, f64::NAN, 1.0, 1.0).is_err());
    }

    #[test]
    fn too_few_points() {
        let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
        let zs = [1.0, 2.0, 3.0, 3.5, 3.8];
        assert_eq!(
            fit_curve(&xs, &zs, &FitConfig::default()),
            Err(Error::InsufficientPoints { needed: 7, got: 5 })
        );
    }

    #[test]
    fn recovers_asymptote_of_exact_curve() {
        let truth = p(120.0, 2.0, 0.8, 30.0, 1.5, 1.2);
        let xs: Vec<f64> = (1..=40).map(|i| 20.0 * i as f64).collect();
        let zs: Vec<f64> = xs.iter().map(|&x| eval_model(&truth, x)).collect();
        let fit = fit_curve(&xs, &zs, &FitConfig::default()).unwrap();
        assert!(fit.below_threshold);
        assert!((fit.asymptote() - 120.0).abs() <= 2.4, "a = {}", fit.asymptote());
    }

    #[test]
    fn constant_curve() {
        let xs: Vec<f64> = (1..=12).map(|i| 10.0 * i as f64).collect();
        let zs = vec![50.0; 12];
        let fit = fit_curve(&xs, &zs, &FitConfig::default()).unwrap();
        assert!(fit.rmse <= 1e-6, "rmse = {}", fit.rmse);
        assert!((49.0..=51.0).contains(&fit.asymptote()));
    }

    #[test]
    fn deterministic_under_seed() {
        let truth = p(60.0, 1.0, 1.0, 50.0, 1.0, 1.0);
        let xs: Vec<f64> = (1..=10).map(|i| 15.0 * i as f64).collect();
        let zs: Vec<f64> = xs
            .iter()
            .map(|&x| eval_model(&truth, x) + if (x as usize).is_multiple_of(2) { 0.5 } else { -0.5 })
            .collect();
        let cfg = FitConfig {
            seed: 9,
            ..FitConfig::default()
        };
        assert_eq!(fit_curve(&xs, &zs, &cfg), fit_curve(&xs, &zs, &cfg));
    }

    #[test]
    fn short_surface_axis_errors() {
        let s = IdSurface::from_values(
            vec![10, 20, 30],
            (1..=8).map(|i| i * 10).collect(),
            &vec![Some(5.0); 24],
        )
        .unwrap();
        for order in FitOrder::BOTH {
            assert!(matches!(
                extrapolate_surface(&s, order, &FitConfig::default()),
                Err(Error::InsufficientPoints { .. })
            ));
        }
    }
}
