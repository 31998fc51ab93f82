//! Upper-tail heaviness by maximum-likelihood generalized Pareto fits.
//!
//! Exceedances `r > theta` are modelled with density
//!
//! ```text
//! p(r | k, sigma, theta) = (1 / sigma) (1 + k (r - theta) / sigma)^(-1 - 1/k)
//! ```
//!
//! where `k` is the tail index: `k > 0` heavy (power-law) tail, `k = 0` the
//! exponential limit, `k < 0` bounded support `r <= theta - sigma / k`.

use alloc::vec::Vec;

use rand::Rng;

use crate::matrix::{normalize_per_neuron, ResponseMatrix};
use crate::optim::nelder_mead;
use crate::rng::{derive_seed, rng_from_seed};
use crate::stats::{mean, median, quantile_sorted};
use crate::{Axis, Error, Result};

/// Below this |k| the log-density uses its first-order series in k.
const K_SERIES_CUTOFF: f64 = 1e-8;
/// The likelihood is unbounded for k <= -1, so the search stays above it.
const K_LOWER_LIMIT: f64 = -1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConfig {
    /// Share of the vector treated as tail; the threshold is the empirical
    /// `1 - tail_fraction` quantile.
    pub tail_fraction: f64,
    pub min_exceedances: usize,
    /// Random restarts of the local search after the first run.
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for TailConfig {
    fn default() -> Self {
        Self {
            tail_fraction: 0.1,
            min_exceedances: 20,
            max_restarts: 10,
            seed: 0,
        }
    }
}

/// Maximum-likelihood generalized Pareto parameters for one tail.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GpdFit {
    pub k: f64,
    pub sigma: f64,
    pub theta: f64,
    pub n_exceedances: usize,
    pub log_likelihood: f64,
    pub converged: bool,
}

impl GpdFit {
    /// Upper end of the support, finite only when `k < 0`.
    pub fn upper_bound(&self) -> f64 {
        if self.k < 0.0 {
            self.theta - self.sigma / self.k
        } else {
            f64::INFINITY
        }
    }
}

/// Log-density of an excess `y = r - theta` (zero outside the support).
pub fn gpd_log_density(y: f64, k: f64, sigma: f64) -> f64 {
    if !(sigma > 0.0) || y < 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = y / sigma;
    let ln_sigma = libm::log(sigma);
    if libm::fabs(k) < K_SERIES_CUTOFF {
        // (1 + 1/k) ln(1 + k z) = z + k (z - z^2 / 2) + O(k^2)
        return -ln_sigma - z - k * (z - 0.5 * z * z);
    }
    let kz = k * z;
    if kz <= -1.0 {
        return f64::NEG_INFINITY;
    }
    -ln_sigma - (1.0 + 1.0 / k) * libm::log1p(kz)
}

/// Density at response `r` for threshold `theta`.
pub fn gpd_density(r: f64, k: f64, sigma: f64, theta: f64) -> f64 {
    libm::exp(gpd_log_density(r - theta, k, sigma))
}

/// Inverse CDF: the response with upper-tail probability `1 - u`.
pub fn gpd_quantile(u: f64, k: f64, sigma: f64, theta: f64) -> f64 {
    if libm::fabs(k) < K_SERIES_CUTOFF {
        theta - sigma * libm::log1p(-u)
    } else {
        theta + sigma * libm::expm1(-k * libm::log1p(-u)) / k
    }
}

/// Sum of log-densities of the excesses `y`.
pub fn gpd_log_likelihood(excesses: &[f64], k: f64, sigma: f64) -> f64 {
    excesses.iter().map(|&y| gpd_log_density(y, k, sigma)).sum()
}

/// Threshold at the empirical `1 - tail_fraction` quantile (linear
/// interpolation between order statistics) and the values strictly above it.
pub fn select_exceedances(v: &[f64], tail_fraction: f64, min_exceedances: usize) -> Result<(f64, Vec<f64>)> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidParameter("tail fraction must lie in (0, 1)"));
    }
    let expected = libm::ceil(tail_fraction * v.len() as f64) as usize;
    if expected < min_exceedances {
        return Err(Error::InsufficientData {
            needed: min_exceedances,
            got: expected,
        });
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let theta = quantile_sorted(&sorted, 1.0 - tail_fraction).ok_or(Error::EmptySummary)?;
    let exceedances: Vec<f64> = v.iter().copied().filter(|&r| r > theta).collect();
    if exceedances.len() < min_exceedances {
        return Err(Error::TooFewExceedances {
            needed: min_exceedances,
            got: exceedances.len(),
        });
    }
    Ok((theta, exceedances))
}

/// Probability-weighted-moment estimate (Hosking-Wallis), returned as
/// `(k, sigma)` in this module's sign convention.
fn pwm_start(z: &[f64]) -> (f64, f64) {
    let mut sorted = z.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let a0 = sorted.iter().sum::<f64>() / n as f64;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(j, y)| (n - 1 - j) as f64 / (n - 1) as f64 * y)
        .sum::<f64>()
        / n as f64;
    let denom = a0 - 2.0 * a1;
    let (mut k, mut sigma) = if denom > 0.0 {
        (2.0 - a0 / denom, 2.0 * a0 * a1 / denom)
    } else {
        (0.1, a0)
    };
    if !k.is_finite() || !sigma.is_finite() || sigma <= 0.0 {
        k = 0.1;
        sigma = a0;
    }
    k = k.clamp(-0.9, 5.0);
    let z_max = sorted[n - 1];
    if k < 0.0 && sigma <= -k * z_max {
        sigma = -k * z_max * 1.1;
    }
    (k, sigma)
}

/// Fits with the default configuration.
pub fn fit_gpd(exceedances: &[f64], theta: f64) -> Result<GpdFit> {
    fit_gpd_with(exceedances, theta, &TailConfig::default())
}

/// Maximizes the log-likelihood over `(k, ln sigma)` with Nelder-Mead,
/// started from probability-weighted moments and followed by up to
/// `max_restarts` restarts. `converged` is set once a restart from the
/// incumbent optimum fails to improve it.
pub fn fit_gpd_with(exceedances: &[f64], theta: f64, cfg: &TailConfig) -> Result<GpdFit> {
    let n = exceedances.len();
    if n < cfg.min_exceedances.max(2) {
        return Err(Error::TooFewExceedances {
            needed: cfg.min_exceedances.max(2),
            got: n,
        });
    }
    if exceedances.iter().any(|&r| !(r > theta) || !r.is_finite()) {
        return Err(Error::InvalidParameter("every exceedance must lie above the threshold"));
    }
    if exceedances.iter().all(|&r| r == exceedances[0]) {
        return Err(Error::DegenerateTail);
    }

    // Work on excesses rescaled to unit mean so tolerances are scale free.
    let excess: Vec<f64> = exceedances.iter().map(|&r| r - theta).collect();
    let scale = excess.iter().sum::<f64>() / n as f64;
    let z: Vec<f64> = excess.iter().map(|y| y / scale).collect();
    let nll = |p: &[f64]| -> f64 {
        if p[0] <= K_LOWER_LIMIT {
            return f64::INFINITY;
        }
        let ll = gpd_log_likelihood(&z, p[0], libm::exp(p[1]));
        if ll.is_finite() {
            -ll / n as f64
        } else {
            f64::INFINITY
        }
    };

    const TOL: f64 = 1e-11;
    const MAX_ITER: usize = 5_000;
    let step = [0.1, 0.1];
    let (k0, s0) = pwm_start(&z);
    let mut best = nelder_mead(nll, &[k0, libm::log(s0)], &step, TOL, MAX_ITER);
    let mut rng = rng_from_seed(cfg.seed);
    let mut converged = false;
    for restart in 0..cfg.max_restarts {
        let start = if restart == 0 {
            best.x.clone()
        } else {
            let k = (best.x[0] + rng.random_range(-0.5..0.5)).max(-0.9);
            alloc::vec![k, best.x[1] + rng.random_range(-0.5..0.5)]
        };
        let run = nelder_mead(nll, &start, &step, TOL, MAX_ITER);
        if run.value < best.value - 1e-12 * (1.0 + libm::fabs(best.value)) {
            best = run;
        } else if best.converged {
            converged = true;
            break;
        }
    }
    if cfg.max_restarts == 0 {
        converged = best.converged;
    }
    if !best.value.is_finite() {
        return Err(Error::NotConverged {
            relative_rmse: f64::INFINITY,
        });
    }

    let k = best.x[0];
    let sigma = libm::exp(best.x[1]) * scale;
    Ok(GpdFit {
        k,
        sigma,
        theta,
        n_exceedances: n,
        log_likelihood: gpd_log_likelihood(&excess, k, sigma),
        converged,
    })
}

/// Threshold selection followed by a fit.
pub fn fit_tail(v: &[f64], cfg: &TailConfig) -> Result<GpdFit> {
    let (theta, exceedances) = select_exceedances(v, cfg.tail_fraction, cfg.min_exceedances)?;
    fit_gpd_with(&exceedances, theta, cfg)
}

/// Tail indices of every column or row.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TailSummary {
    pub axis: Axis,
    pub normalized: bool,
    pub tail_fraction: f64,
    /// Column or row index of each fit.
    pub indices: Vec<usize>,
    pub fits: Vec<GpdFit>,
    pub per_vector_k: Vec<f64>,
    /// Vectors that failed a precondition or did not converge.
    pub skipped: Vec<usize>,
    pub mean_k: f64,
    pub median_k: f64,
}

/// Fits one tail per column (`Axis::Neuron`) or per row (`Axis::Image`),
/// optionally after per-neuron normalization. Vectors that cannot be fit
/// are skipped and listed; an error is returned only when none succeed.
pub fn tail_summary(m: &ResponseMatrix, axis: Axis, normalized: bool, cfg: &TailConfig) -> Result<TailSummary> {
    let owned;
    let source = if normalized {
        owned = normalize_per_neuron(m)?;
        &owned
    } else {
        m
    };
    let count = match axis {
        Axis::Neuron => source.cols(),
        Axis::Image => source.rows(),
    };
    let mut indices = Vec::new();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for idx in 0..count {
        let v = match axis {
            Axis::Neuron => source.column(idx),
            Axis::Image => source.row(idx).to_vec(),
        };
        let vcfg = TailConfig {
            seed: derive_seed(cfg.seed, idx as u64),
            ..*cfg
        };
        match fit_tail(&v, &vcfg) {
            Ok(fit) if fit.converged => {
                indices.push(idx);
                fits.push(fit);
            }
            _ => skipped.push(idx),
        }
    }
    let per_vector_k: Vec<f64> = fits.iter().map(|f| f.k).collect();
    let (Some(mean_k), Some(median_k)) = (mean(&per_vector_k), median(&per_vector_k)) else {
        return Err(Error::EmptySummary);
    };
    Ok(TailSummary {
        axis,
        normalized,
        tail_fraction: cfg.tail_fraction,
        indices,
        fits,
        per_vector_k,
        skipped,
        mean_k,
        median_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::open_unit;
    use alloc::vec;

    fn gpd_sample(n: usize, k: f64, sigma: f64, seed: u64) -> Vec<f64> {
        let mut rng = rng_from_seed(seed);
        (0..n)
            .map(|_| {
                let u = open_unit(&mut rng);
                // Written out directly rather than via gpd_quantile.
                if k == 0.0 {
                    -sigma * libm::log(1.0 - u)
                } else {
                    sigma * (libm::pow(1.0 - u, -k) - 1.0) / k
                }
            })
            .collect()
    }

    #[test]
    fn select_threshold_on_ramp() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let (theta, ex) = select_exceedances(&v, 0.1, 10).unwrap();
        assert!((theta - 90.1).abs() < 1e-12);
        let expected: Vec<f64> = (91..=100).map(|i| i as f64).collect();
        assert_eq!(ex, expected);
    }

    #[test]
    fn select_rejects_bad_inputs() {
        assert!(matches!(
            select_exceedances(&[4.0; 500], 0.1, 20),
            Err(Error::TooFewExceedances { got: 0, .. })
        ));
        let v: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(
            select_exceedances(&v, 0.999, 20),
            Err(Error::InsufficientData { .. })
        ));
        assert!(matches!(
            select_exceedances(&v, 1.0, 1),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn degenerate_and_small_tails() {
        assert_eq!(fit_gpd(&[2.0; 30], 1.0), Err(Error::DegenerateTail));
        assert!(matches!(
            fit_gpd(&[2.0, 3.0], 1.0),
            Err(Error::TooFewExceedances { .. })
        ));
        let below: Vec<f64> = (0..30).map(|i| i as f64).collect();
        assert!(matches!(fit_gpd(&below, 5.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn series_branch_is_continuous() {
        for &y in &[0.0, 0.3, 2.0, 7.5] {
            let a = gpd_log_density(y, 0.0, 1.3);
            let b = gpd_log_density(y, 2e-8, 1.3);
            let c = gpd_log_density(y, -2e-8, 1.3);
            assert!((a - b).abs() < 1e-6 && (a - c).abs() < 1e-6);
        }
    }

    #[test]
    fn bounded_support_is_respected() {
        let x = gpd_sample(2000, -0.3, 2.0, 4);
        let fit = fit_gpd(&x.iter().map(|v| v + 1.0).collect::<Vec<_>>(), 1.0 - 1e-12).unwrap();
        assert!(fit.k < 0.0);
        let top = x.iter().cloned().fold(f64::MIN, f64::max) + 1.0;
        assert!(top <= fit.upper_bound());
    }

    #[test]
    fn recovers_heavy_tail() {
        let x: Vec<f64> = gpd_sample(20_000, 0.3, 1.0, 11).iter().map(|v| v + 1e-9).collect();
        let fit = fit_gpd(&x, 0.0).unwrap();
        assert!(fit.converged);
        assert!((fit.k - 0.3).abs() < 0.05, "k = {}", fit.k);
        assert!((fit.sigma - 1.0).abs() < 0.05, "sigma = {}", fit.sigma);
    }

    #[test]
    fn summary_skips_unfittable_vectors() {
        let n = 400;
        let col = gpd_sample(n, 0.2, 1.0, 2);
        let m = ResponseMatrix::from_fn(n, 2, |i, j| if j == 0 { col[i] } else { 3.0 }).unwrap();
        let s = tail_summary(&m, Axis::Neuron, false, &TailConfig::default()).unwrap();
        assert_eq!(s.indices, vec![0]);
        assert_eq!(s.skipped, vec![1]);
        let c = ResponseMatrix::new(n, 1, vec![3.0; n]).unwrap();
        assert_eq!(
            tail_summary(&c, Axis::Neuron, false, &TailConfig::default()),
            Err(Error::EmptySummary)
        );
    }
}
