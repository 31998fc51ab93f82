//! Intrinsic dimensionality by PCA against a reshuffled null.
//!
//! The eigenvalue spectra of a response matrix and of a copy whose columns
//! were independently permuted are each normalized to unit sum and sorted
//! in descending order. Leading ranks where the original spectrum stays
//! above the shuffled one carry signal; their count is the estimate.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::symmetric_eigenvalues;
use crate::matrix::{remove_dead_neurons, shuffle, subsample, ResponseMatrix, ShuffleMode, SubsampleSpec};
use crate::rng::{derive_seed, derive_seed_path};
use crate::{Error, Result};

/// Which matrix dimension plays the role of PCA variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Orientation {
    /// Neurons are variables, stimuli are observations.
    #[default]
    NeuronsAsVariables,
    /// Transposed: stimuli are variables.
    StimuliAsVariables,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PcaConfig {
    pub orientation: Orientation,
    /// Subtract each variable's mean before forming the covariance.
    pub centered: bool,
}

impl Default for PcaConfig {
    fn default() -> Self {
        Self {
            orientation: Orientation::NeuronsAsVariables,
            centered: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdConfig {
    pub pca: PcaConfig,
    pub shuffle_mode: ShuffleMode,
    /// Shuffled spectra averaged per estimate. One is enough in practice.
    pub n_shuffles: usize,
}

impl Default for IdConfig {
    fn default() -> Self {
        Self {
            pca: PcaConfig::default(),
            shuffle_mode: ShuffleMode::WithinColumns,
            n_shuffles: 1,
        }
    }
}

/// Covariance eigenvalues, descending, normalized to sum to one.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub n_components: usize,
}

pub fn eigen_spectrum(m: &ResponseMatrix) -> Result<EigenSpectrum> {
    eigen_spectrum_with(m, &PcaConfig::default())
}

pub fn eigen_spectrum_with(m: &ResponseMatrix, cfg: &PcaConfig) -> Result<EigenSpectrum> {
    let (obs, vars, data) = match cfg.orientation {
        Orientation::NeuronsAsVariables => (m.rows(), m.cols(), m.values().to_vec()),
        Orientation::StimuliAsVariables => {
            let t = m.transpose();
            (t.rows(), t.cols(), t.values().to_vec())
        }
    };
    if obs < 2 {
        return Err(Error::InsufficientData { needed: 2, got: obs });
    }
    let mut x = data;
    let raw_energy: f64 = x.iter().map(|v| v * v).sum();
    if cfg.centered {
        let means = {
            let mut s = vec![0.0; vars];
            for row in x.chunks_exact(vars) {
                for (acc, v) in s.iter_mut().zip(row) {
                    *acc += v;
                }
            }
            s.into_iter().map(|v| v / obs as f64).collect::<Vec<_>>()
        };
        for row in x.chunks_exact_mut(vars) {
            for (v, mu) in row.iter_mut().zip(&means) {
                *v -= mu;
            }
        }
    }
    let total: f64 = x.iter().map(|v| v * v).sum();
    if !(total > 1e-24 * raw_energy) || total == 0.0 {
        return Err(Error::ZeroTotalVariance);
    }

    // The nonzero spectrum of X^T X equals that of X X^T; use the smaller.
    let eig = if vars <= obs {
        let mut c = vec![0.0; vars * vars];
        for row in x.chunks_exact(vars) {
            for i in 0..vars {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in 0..=i {
                    c[i * vars + j] += ri * row[j];
                }
            }
        }
        symmetric_eigenvalues(&c, vars)?
    } else {
        let mut g = vec![0.0; obs * obs];
        for i in 0..obs {
            let ri = &x[i * vars..(i + 1) * vars];
            for j in 0..=i {
                let rj = &x[j * vars..(j + 1) * vars];
                g[i * obs + j] = ri.iter().zip(rj).map(|(a, b)| a * b).sum();
            }
        }
        symmetric_eigenvalues(&g, obs)?
    };

    let n_components = if cfg.centered {
        (obs - 1).min(vars)
    } else {
        obs.min(vars)
    };
    let mut eigenvalues: Vec<f64> = eig.into_iter().take(n_components).map(|v| v.max(0.0)).collect();
    let sum: f64 = eigenvalues.iter().sum();
    if !(sum > 0.0) {
        return Err(Error::ZeroTotalVariance);
    }
    for v in &mut eigenvalues {
        *v /= sum;
    }
    Ok(EigenSpectrum {
        eigenvalues,
        n_components,
    })
}

/// Number of leading ranks where `original` exceeds `shuffled`; the first
/// rank with `original <= shuffled` ends the count.
pub fn crossing_dimension(original: &[f64], shuffled: &[f64]) -> usize {
    original
        .iter()
        .zip(shuffled)
        .position(|(o, s)| o <= s)
        .unwrap_or(original.len().min(shuffled.len()))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdEstimate {
    pub dimensionality: usize,
    pub original_spectrum: EigenSpectrum,
    pub shuffled_spectrum: EigenSpectrum,
    pub seed: u64,
}

pub fn estimate_id(m: &ResponseMatrix, seed: u64) -> Result<IdEstimate> {
    estimate_id_with(m, seed, &IdConfig::default())
}

/// With `n_shuffles > 1`, shuffle `s` uses seed `derive_seed(seed, s)` and
/// the shuffled spectra are averaged; a single shuffle uses `seed` itself.
pub fn estimate_id_with(m: &ResponseMatrix, seed: u64, cfg: &IdConfig) -> Result<IdEstimate> {
    if cfg.n_shuffles == 0 {
        return Err(Error::InvalidParameter("at least one shuffle is required"));
    }
    let original_spectrum = eigen_spectrum_with(m, &cfg.pca)?;
    let shuffled_spectrum = if cfg.n_shuffles == 1 {
        eigen_spectrum_with(&shuffle(m, seed, cfg.shuffle_mode), &cfg.pca)?
    } else {
        let mut acc = vec![0.0; original_spectrum.n_components];
        for s in 0..cfg.n_shuffles {
            let sp = eigen_spectrum_with(&shuffle(m, derive_seed(seed, s as u64), cfg.shuffle_mode), &cfg.pca)?;
            for (a, v) in acc.iter_mut().zip(&sp.eigenvalues) {
                *a += v / cfg.n_shuffles as f64;
            }
        }
        EigenSpectrum {
            eigenvalues: acc,
            n_components: original_spectrum.n_components,
        }
    };
    Ok(IdEstimate {
        dimensionality: crossing_dimension(&original_spectrum.eigenvalues, &shuffled_spectrum.eigenvalues),
        original_spectrum,
        shuffled_spectrum,
        seed,
    })
}

/// Share of total variance carried by the `top_m` leading components.
pub fn variance_explained(m: &ResponseMatrix, top_m: usize) -> Result<f64> {
    variance_explained_with(m, top_m, &PcaConfig::default())
}

pub fn variance_explained_with(m: &ResponseMatrix, top_m: usize, cfg: &PcaConfig) -> Result<f64> {
    let sp = eigen_spectrum_with(m, cfg)?;
    if top_m > sp.n_components {
        return Err(Error::OutOfBounds {
            what: "components",
            requested: top_m,
            available: sp.n_components,
        });
    }
    Ok(sp.eigenvalues[..top_m].iter().sum())
}

/// Mean dimensionality over the valid repeats of one grid cell.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceCell {
    pub image_size: usize,
    pub neuron_size: usize,
    /// `None` when every repeat was degenerate.
    pub mean_dimensionality: Option<f64>,
    pub n_valid_repeats: usize,
}

/// Dimensionality over an (image count x neuron count) grid; cells are
/// stored row-major with image sizes along rows.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IdSurface {
    pub image_sizes: Vec<usize>,
    pub neuron_sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub cells: Vec<SurfaceCell>,
}

impl IdSurface {
    pub fn cell(&self, image_idx: usize, neuron_idx: usize) -> &SurfaceCell {
        &self.cells[image_idx * self.neuron_sizes.len() + neuron_idx]
    }

    pub fn mean_dimensionality(&self, image_idx: usize, neuron_idx: usize) -> Option<f64> {
        self.cell(image_idx, neuron_idx).mean_dimensionality
    }

    /// Builds a surface from precomputed values (`None` marks a flagged
    /// cell), e.g. for extrapolating externally produced grids.
    pub fn from_values(image_sizes: Vec<usize>, neuron_sizes: Vec<usize>, values: &[Option<f64>]) -> Result<Self> {
        if values.len() != image_sizes.len() * neuron_sizes.len() {
            return Err(Error::Shape {
                rows: image_sizes.len(),
                cols: neuron_sizes.len(),
                len: values.len(),
            });
        }
        let cells = values
            .iter()
            .enumerate()
            .map(|(k, v)| SurfaceCell {
                image_size: image_sizes[k / neuron_sizes.len()],
                neuron_size: neuron_sizes[k % neuron_sizes.len()],
                mean_dimensionality: *v,
                n_valid_repeats: usize::from(v.is_some()),
            })
            .collect();
        Ok(Self {
            image_sizes,
            neuron_sizes,
            repeats: 1,
            seed: 0,
            cells,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceParams {
    pub image_sizes: Vec<usize>,
    pub neuron_sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub config: IdConfig,
}

pub fn validate_surface(m: &ResponseMatrix, p: &SurfaceParams) -> Result<()> {
    if p.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1"));
    }
    if p.image_sizes.is_empty() || p.neuron_sizes.is_empty() {
        return Err(Error::InvalidParameter("surface needs at least one size per axis"));
    }
    for &s in &p.image_sizes {
        if s == 0 || s > m.rows() {
            return Err(Error::OutOfBounds {
                what: "images",
                requested: s,
                available: m.rows(),
            });
        }
    }
    for &n in &p.neuron_sizes {
        if n == 0 || n > m.cols() {
            return Err(Error::OutOfBounds {
                what: "neurons",
                requested: n,
                available: m.cols(),
            });
        }
    }
    Ok(())
}

/// Seeds used by repeat `repeat` of cell `(image_size, neuron_size)`:
/// the subsample spec seed and the shuffle seed.
pub fn cell_seeds(seed: u64, image_size: usize, neuron_size: usize, repeat: usize) -> (u64, u64) {
    let cell = derive_seed_path(seed, &[image_size as u64, neuron_size as u64]);
    (cell, derive_seed_path(cell, &[repeat as u64, 0x5348_5546]))
}

/// One surface cell. Each repeat subsamples, drops dead neurons and
/// estimates the dimensionality; failed repeats are left out of the mean.
pub fn surface_cell(
    m: &ResponseMatrix,
    image_size: usize,
    neuron_size: usize,
    p: &SurfaceParams,
) -> Result<SurfaceCell> {
    let mut sum = 0.0;
    let mut valid = 0usize;
    for r in 0..p.repeats {
        let (sub_seed, shuffle_seed) = cell_seeds(p.seed, image_size, neuron_size, r);
        let sub = subsample(m, &SubsampleSpec::new(image_size, neuron_size, sub_seed, r as u64))?;
        let estimate =
            remove_dead_neurons(&sub).and_then(|(alive, _)| estimate_id_with(&alive, shuffle_seed, &p.config));
        if let Ok(est) = estimate {
            sum += est.dimensionality as f64;
            valid += 1;
        }
    }
    Ok(SurfaceCell {
        image_size,
        neuron_size,
        mean_dimensionality: (valid > 0).then(|| sum / valid as f64),
        n_valid_repeats: valid,
    })
}

/// Dimensionality surface: each cell is the mean over `repeats`
/// independent subsamples, with seeds from [`cell_seeds`].
pub fn id_surface(m: &ResponseMatrix, p: &SurfaceParams) -> Result<IdSurface> {
    validate_surface(m, p)?;
    let mut cells = Vec::with_capacity(p.image_sizes.len() * p.neuron_sizes.len());
    for &s in &p.image_sizes {
        for &n in &p.neuron_sizes {
            cells.push(surface_cell(m, s, n, p)?);
        }
    }
    Ok(assemble_surface(p, cells))
}

pub fn assemble_surface(p: &SurfaceParams, cells: Vec<SurfaceCell>) -> IdSurface {
    IdSurface {
        image_sizes: p.image_sizes.clone(),
        neuron_sizes: p.neuron_sizes.clone(),
        repeats: p.repeats,
        seed: p.seed,
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outer(u: &[f64], v: &[f64]) -> ResponseMatrix {
        ResponseMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j]).unwrap()
    }

    #[test]
    fn rank_one_spectrum() {
        let m = outer(&[1.0, 2.0, 3.0, 5.0, 8.0], &[1.0, -1.0, 0.5, 2.0]);
        let sp = eigen_spectrum(&m).unwrap();
        assert_eq!(sp.n_components, 4);
        assert!((sp.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!(sp.eigenvalues[1..].iter().all(|v| v.abs() < 1e-12));
        assert!((variance_explained(&m, 1).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_equal_orthogonal_components() {
        // Centered, orthogonal score vectors of equal norm times orthonormal
        // loadings give covariance eigenvalues (1/2, 1/2, 0, ...).
        let a = [1.0, -1.0, 1.0, -1.0];
        let b = [1.0, 1.0, -1.0, -1.0];
        let m = ResponseMatrix::from_fn(4, 3, |i, j| match j {
            0 => a[i],
            1 => b[i],
            _ => 0.0,
        })
        .unwrap();
        let sp = eigen_spectrum(&m).unwrap();
        assert_eq!(sp.n_components, 3);
        assert!((sp.eigenvalues[0] - 0.5).abs() < 1e-10);
        assert!((sp.eigenvalues[1] - 0.5).abs() < 1e-10);
        assert!(sp.eigenvalues[2].abs() < 1e-10);
        assert!((variance_explained(&m, 1).unwrap() - 0.5).abs() < 1e-10);
        assert!((variance_explained(&m, 3).unwrap() - 1.0).abs() < 1e-10);
        assert!(matches!(variance_explained(&m, 4), Err(Error::OutOfBounds { .. })));
    }

    #[test]
    fn constant_matrix_has_no_variance() {
        let m = ResponseMatrix::new(3, 3, vec![0.1; 9]).unwrap();
        assert_eq!(eigen_spectrum(&m), Err(Error::ZeroTotalVariance));
        let one_row = ResponseMatrix::new(1, 3, vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(eigen_spectrum(&one_row), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn wide_matrix_uses_gram_route() {
        // 3 observations, 6 variables: at most 2 centered components.
        let m = ResponseMatrix::from_fn(3, 6, |i, j| ((i * 7 + j * j) % 5) as f64).unwrap();
        let sp = eigen_spectrum(&m).unwrap();
        assert_eq!(sp.n_components, 2);
        let t = eigen_spectrum_with(
            &m.transpose(),
            &PcaConfig {
                orientation: Orientation::StimuliAsVariables,
                centered: true,
            },
        )
        .unwrap();
        for (x, y) in sp.eigenvalues.iter().zip(&t.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn uncentered_component_count() {
        let m = ResponseMatrix::from_fn(4, 6, |i, j| ((i + 2 * j) % 3) as f64 + 1.0).unwrap();
        let sp = eigen_spectrum_with(
            &m,
            &PcaConfig {
                orientation: Orientation::NeuronsAsVariables,
                centered: false,
            },
        )
        .unwrap();
        assert_eq!(sp.n_components, 4);
    }

    #[test]
    fn crossing_rule() {
        assert_eq!(crossing_dimension(&[0.5, 0.3, 0.2], &[0.4, 0.35, 0.25]), 1);
        assert_eq!(crossing_dimension(&[0.5, 0.3, 0.2], &[0.5, 0.3, 0.2]), 0);
        assert_eq!(crossing_dimension(&[0.9, 0.1], &[0.5, 0.05]), 2);
    }

    #[test]
    fn two_by_two_is_zero_or_one() {
        let m = ResponseMatrix::from_rows(&[[1.0, 3.0], [2.0, 0.5]]).unwrap();
        for seed in 0..8 {
            let est = estimate_id(&m, seed).unwrap();
            assert!(est.dimensionality <= 1);
            assert_eq!(est.original_spectrum.n_components, 1);
        }
    }

    #[test]
    fn averaged_shuffles() {
        let m = ResponseMatrix::from_fn(20, 6, |i, j| ((i * 31 + j * 17) % 13) as f64).unwrap();
        let cfg = IdConfig {
            n_shuffles: 4,
            ..IdConfig::default()
        };
        let est = estimate_id_with(&m, 3, &cfg).unwrap();
        let s: f64 = est.shuffled_spectrum.eigenvalues.iter().sum();
        assert!((s - 1.0).abs() < 1e-10);
        assert!(matches!(
            estimate_id_with(&m, 3, &IdConfig { n_shuffles: 0, ..cfg }),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn degenerate_cells_are_flagged() {
        // Only column 0 is alive; 1-row draws cannot be estimated.
        let m = ResponseMatrix::from_fn(5, 3, |i, j| if j == 0 { i as f64 } else { 0.0 }).unwrap();
        let p = SurfaceParams {
            image_sizes: vec![1, 5],
            neuron_sizes: vec![3],
            repeats: 2,
            seed: 1,
            config: IdConfig::default(),
        };
        let s = id_surface(&m, &p).unwrap();
        assert_eq!(s.cell(0, 0).mean_dimensionality, None);
        assert_eq!(s.cell(0, 0).n_valid_repeats, 0);
        assert_eq!(s.cell(1, 0).n_valid_repeats, 2);
    }
}
