//! Excess kurtosis of single-neuron responses (selectivity) and population
//! responses (sparseness), and the dataset-size resampling grid.

use alloc::vec::Vec;

use crate::matrix::{normalize_per_neuron, remove_dead_neurons, subsample, ResponseMatrix, SubsampleSpec};
use crate::rng::derive_seed_path;
use crate::stats::{mean, median};
use crate::{Axis, Error, Result};

/// Minimum vector length for a kurtosis estimate.
pub const MIN_KURTOSIS_LEN: usize = 4;

/// Excess kurtosis with population (1/N) moments:
/// `m4 / m2^2 - 3`, where `mk` is the k-th central moment.
pub fn excess_kurtosis(v: &[f64]) -> Result<f64> {
    if v.len() < MIN_KURTOSIS_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_KURTOSIS_LEN,
            got: v.len(),
        });
    }
    if v.iter().all(|&x| x == v[0]) {
        return Err(Error::DegenerateVariance);
    }
    let n = v.len() as f64;
    let mu = v.iter().sum::<f64>() / n;
    let (mut m2, mut m4) = (0.0, 0.0);
    for &x in v {
        let d2 = (x - mu) * (x - mu);
        m2 += d2;
        m4 += d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    if !(m2 > 0.0) || !m4.is_finite() {
        return Err(Error::DegenerateVariance);
    }
    // m4 >= m2^2 always; rounding can dip a hair below.
    Ok((m4 / (m2 * m2) - 3.0).max(-2.0))
}

/// Per-vector kurtosis values along one axis with their aggregates.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KurtosisSummary {
    pub axis: Axis,
    pub normalized: bool,
    /// Index (column or row) of each entry in `per_vector`.
    pub indices: Vec<usize>,
    pub per_vector: Vec<f64>,
    /// Vectors skipped because their kurtosis is undefined.
    pub skipped: Vec<usize>,
    pub n_vectors: usize,
    /// Length of each vector (the N of the moment sums).
    pub n_samples_per_vector: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
}

impl KurtosisSummary {
    fn from_vectors<'a>(
        axis: Axis,
        normalized: bool,
        len: usize,
        vectors: impl Iterator<Item = (usize, alloc::borrow::Cow<'a, [f64]>)>,
    ) -> Self {
        let mut indices = Vec::new();
        let mut per_vector = Vec::new();
        let mut skipped = Vec::new();
        for (idx, v) in vectors {
            match excess_kurtosis(&v) {
                Ok(k) => {
                    indices.push(idx);
                    per_vector.push(k);
                }
                Err(_) => skipped.push(idx),
            }
        }
        Self {
            axis,
            normalized,
            n_vectors: per_vector.len(),
            n_samples_per_vector: len,
            mean: mean(&per_vector),
            median: median(&per_vector),
            indices,
            per_vector,
            skipped,
        }
    }
}

/// Kurtosis of every column: how selective each neuron is across stimuli.
///
/// Zero-variance columns are listed in `skipped`.
pub fn selectivity_kurtosis(m: &ResponseMatrix) -> Result<KurtosisSummary> {
    if m.rows() < MIN_KURTOSIS_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_KURTOSIS_LEN,
            got: m.rows(),
        });
    }
    Ok(KurtosisSummary::from_vectors(
        Axis::Neuron,
        false,
        m.rows(),
        (0..m.cols()).map(|j| (j, m.column(j).into())),
    ))
}

/// Kurtosis of every row: how sparse the population response to each
/// stimulus is. With `normalized`, each neuron is first divided by its mean
/// response, which fails on zero-mean columns (remove dead neurons first).
pub fn sparseness_kurtosis(m: &ResponseMatrix, normalized: bool) -> Result<KurtosisSummary> {
    if m.cols() < MIN_KURTOSIS_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_KURTOSIS_LEN,
            got: m.cols(),
        });
    }
    let owned;
    let source = if normalized {
        owned = normalize_per_neuron(m)?;
        &owned
    } else {
        m
    };
    Ok(KurtosisSummary::from_vectors(
        Axis::Image,
        normalized,
        source.cols(),
        (0..source.rows()).map(|i| (i, source.row(i).into())),
    ))
}

/// Kurtosis along `axis`, with optional per-neuron normalization.
/// Selectivity is unaffected by normalization, so the flag is only recorded.
pub fn kurtosis_summary(m: &ResponseMatrix, axis: Axis, normalized: bool) -> Result<KurtosisSummary> {
    match axis {
        Axis::Neuron => {
            let mut s = if normalized {
                selectivity_kurtosis(&normalize_per_neuron(m)?)?
            } else {
                selectivity_kurtosis(m)?
            };
            s.normalized = normalized;
            Ok(s)
        }
        Axis::Image => sparseness_kurtosis(m, normalized),
    }
}

/// Mean over repeats of the per-draw mean and median kurtosis for one
/// subsample size.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridCell {
    pub size: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    /// Repeats that produced at least one valid kurtosis.
    pub n_valid_repeats: usize,
}

/// Kurtosis as a function of dataset size.
///
/// Selectivity varies the number of images with all neurons kept;
/// sparseness varies the number of neurons with all images kept.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KurtosisGrid {
    pub image_sizes: Vec<usize>,
    pub neuron_sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub normalized: bool,
    pub selectivity: Vec<GridCell>,
    pub sparseness: Vec<GridCell>,
}

impl KurtosisGrid {
    pub fn mean_selectivity(&self) -> Vec<Option<f64>> {
        self.selectivity.iter().map(|c| c.mean).collect()
    }
    pub fn median_selectivity(&self) -> Vec<Option<f64>> {
        self.selectivity.iter().map(|c| c.median).collect()
    }
    pub fn mean_sparseness(&self) -> Vec<Option<f64>> {
        self.sparseness.iter().map(|c| c.mean).collect()
    }
    pub fn median_sparseness(&self) -> Vec<Option<f64>> {
        self.sparseness.iter().map(|c| c.median).collect()
    }
}

/// Parameters of a kurtosis grid run.
#[derive(Debug, Clone, PartialEq)]
pub struct GridParams {
    pub image_sizes: Vec<usize>,
    pub neuron_sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub normalized: bool,
}

const STREAM_SELECTIVITY: u64 = 1;
const STREAM_SPARSENESS: u64 = 2;

fn check_grid(m: &ResponseMatrix, p: &GridParams) -> Result<()> {
    if p.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1"));
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

fn aggregate(size: usize, draws: impl Iterator<Item = Option<(f64, f64)>>) -> GridCell {
    let (mut means, mut medians) = (Vec::new(), Vec::new());
    for (mu, med) in draws.flatten() {
        means.push(mu);
        medians.push(med);
    }
    GridCell {
        size,
        mean: mean(&means),
        median: mean(&medians),
        n_valid_repeats: means.len(),
    }
}

/// One selectivity cell: `repeats` draws of `n_images` rows, all columns.
pub fn selectivity_cell(m: &ResponseMatrix, n_images: usize, repeats: usize, seed: u64) -> Result<GridCell> {
    let cell_seed = derive_seed_path(seed, &[STREAM_SELECTIVITY, n_images as u64]);
    let mut draws = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let sub = subsample(m, &SubsampleSpec::new(n_images, m.cols(), cell_seed, r as u64))?;
        draws.push(selectivity_kurtosis(&sub).ok().and_then(|s| Some((s.mean?, s.median?))));
    }
    Ok(aggregate(n_images, draws.into_iter()))
}

/// One sparseness cell: `repeats` draws of `n_neurons` columns, all rows.
/// Normalized draws drop dead neurons before dividing by column means.
pub fn sparseness_cell(
    m: &ResponseMatrix,
    n_neurons: usize,
    repeats: usize,
    seed: u64,
    normalized: bool,
) -> Result<GridCell> {
    let cell_seed = derive_seed_path(seed, &[STREAM_SPARSENESS, n_neurons as u64]);
    let mut draws = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let sub = subsample(m, &SubsampleSpec::new(m.rows(), n_neurons, cell_seed, r as u64))?;
        let summary = if normalized {
            remove_dead_neurons(&sub).and_then(|(alive, _)| sparseness_kurtosis(&alive, true))
        } else {
            sparseness_kurtosis(&sub, false)
        };
        draws.push(summary.ok().and_then(|s| Some((s.mean?, s.median?))));
    }
    Ok(aggregate(n_neurons, draws.into_iter()))
}

/// Resampling grid: for each size, `repeats` independent subsamples, each
/// summarized by its mean and median kurtosis, then averaged over repeats.
pub fn kurtosis_grid(m: &ResponseMatrix, p: &GridParams) -> Result<KurtosisGrid> {
    check_grid(m, p)?;
    let selectivity = p
        .image_sizes
        .iter()
        .map(|&s| selectivity_cell(m, s, p.repeats, p.seed))
        .collect::<Result<Vec<_>>>()?;
    let sparseness = p
        .neuron_sizes
        .iter()
        .map(|&n| sparseness_cell(m, n, p.repeats, p.seed, p.normalized))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_grid(p, selectivity, sparseness))
}

/// Validates grid parameters against a matrix; for callers that evaluate
/// cells themselves.
pub fn validate_grid(m: &ResponseMatrix, p: &GridParams) -> Result<()> {
    check_grid(m, p)
}

pub fn assemble_grid(p: &GridParams, selectivity: Vec<GridCell>, sparseness: Vec<GridCell>) -> KurtosisGrid {
    KurtosisGrid {
        image_sizes: p.image_sizes.clone(),
        neuron_sizes: p.neuron_sizes.clone(),
        repeats: p.repeats,
        seed: p.seed,
        normalized: p.normalized,
        selectivity,
        sparseness,
    }
}
