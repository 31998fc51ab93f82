//! The stimulus × neuron response matrix and the transformations applied to
//! it before any statistic is computed.

use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::{index, SliceRandom};

use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Stimuli × neurons grid of finite responses, stored row-major.
///
/// Row `i` is the population response to stimulus `i`; column `j` is the
/// response profile of neuron `j`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    row_labels: Option<Vec<String>>,
    col_labels: Option<Vec<String>>,
}

impl ResponseMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyMatrix);
        }
        if rows.checked_mul(cols) != Some(values.len()) {
            return Err(Error::Shape {
                rows,
                cols,
                len: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols,
                col: pos % cols,
            });
        }
        Ok(Self {
            rows,
            cols,
            values,
            row_labels: None,
            col_labels: None,
        })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::Shape {
                    rows: rows.len(),
                    cols,
                    len: values.len() + r.len(),
                });
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    /// Builds a matrix from a generator `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn with_row_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.rows {
            return Err(Error::InvalidParameter("row label count must equal row count"));
        }
        self.row_labels = Some(labels);
        Ok(self)
    }

    pub fn with_col_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.cols {
            return Err(Error::InvalidParameter("column label count must equal column count"));
        }
        self.col_labels = Some(labels);
        Ok(self)
    }

    /// Number of stimuli.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of neurons.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row_labels(&self) -> Option<&[String]> {
        self.row_labels.as_deref()
    }

    pub fn col_labels(&self) -> Option<&[String]> {
        self.col_labels.as_deref()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.values[row * self.cols..(row + 1) * self.cols]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, col)).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = alloc::vec![0.0; self.cols];
        for row in self.values.chunks_exact(self.cols) {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        let n = self.rows as f64;
        sums.into_iter().map(|s| s / n).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                values.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            values,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// Picks the given rows and columns, in the order given.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if let Some(&r) = rows.iter().find(|&&r| r >= self.rows) {
            return Err(Error::OutOfBounds {
                what: "row index",
                requested: r,
                available: self.rows,
            });
        }
        if let Some(&c) = cols.iter().find(|&&c| c >= self.cols) {
            return Err(Error::OutOfBounds {
                what: "column index",
                requested: c,
                available: self.cols,
            });
        }
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            let row = self.row(i);
            values.extend(cols.iter().map(|&j| row[j]));
        }
        let mut out = Self::new(rows.len(), cols.len(), values)?;
        out.row_labels = self
            .row_labels
            .as_ref()
            .map(|l| rows.iter().map(|&i| l[i].clone()).collect());
        out.col_labels = self
            .col_labels
            .as_ref()
            .map(|l| cols.iter().map(|&j| l[j].clone()).collect());
        Ok(out)
    }

    fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            values,
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
        }
    }
}

/// Divides every column by its mean response across all stimuli, so each
/// column has mean 1.
pub fn normalize_per_neuron(m: &ResponseMatrix) -> Result<ResponseMatrix> {
    let means = m.column_means();
    if let Some(col) = means.iter().position(|&mu| mu == 0.0 || !mu.is_finite()) {
        return Err(Error::ZeroMeanColumn { col });
    }
    let mut values = m.values.clone();
    for row in values.chunks_exact_mut(m.cols) {
        for (v, mu) in row.iter_mut().zip(&means) {
            *v /= mu;
        }
    }
    if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::ZeroMeanColumn { col: pos % m.cols });
    }
    Ok(m.with_values(values))
}

/// Drops columns whose responses are all exactly zero. Returns the reduced
/// matrix and the removed column indices in ascending order.
pub fn remove_dead_neurons(m: &ResponseMatrix) -> Result<(ResponseMatrix, Vec<usize>)> {
    remove_dead_neurons_with_tolerance(m, 0.0)
}

/// As [`remove_dead_neurons`], treating `|r| <= tolerance` as silent.
pub fn remove_dead_neurons_with_tolerance(m: &ResponseMatrix, tolerance: f64) -> Result<(ResponseMatrix, Vec<usize>)> {
    if !(tolerance >= 0.0) {
        return Err(Error::InvalidParameter("dead-neuron tolerance must be non-negative"));
    }
    let mut alive = Vec::with_capacity(m.cols);
    let mut removed = Vec::new();
    for j in 0..m.cols {
        let dead = (0..m.rows).all(|i| libm::fabs(m.get(i, j)) <= tolerance);
        if dead {
            removed.push(j);
        } else {
            alive.push(j);
        }
    }
    if alive.is_empty() {
        return Err(Error::AllColumnsDead);
    }
    if removed.is_empty() {
        return Ok((m.clone(), removed));
    }
    let rows: Vec<usize> = (0..m.rows).collect();
    Ok((m.select(&rows, &alive)?, removed))
}

/// Size and seed of one random subsample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubsampleSpec {
    pub n_rows: usize,
    pub n_cols: usize,
    pub seed: u64,
    pub repeat_index: u64,
}

impl SubsampleSpec {
    pub fn new(n_rows: usize, n_cols: usize, seed: u64, repeat_index: u64) -> Self {
        Self {
            n_rows,
            n_cols,
            seed,
            repeat_index,
        }
    }
}

/// Uniform sample of rows and columns without replacement. Selected indices
/// keep their original order, so a full-size sample returns the matrix
/// unchanged.
pub fn subsample(m: &ResponseMatrix, spec: &SubsampleSpec) -> Result<ResponseMatrix> {
    if spec.n_rows > m.rows || spec.n_rows == 0 {
        return Err(Error::OutOfBounds {
            what: "rows",
            requested: spec.n_rows,
            available: m.rows,
        });
    }
    if spec.n_cols > m.cols || spec.n_cols == 0 {
        return Err(Error::OutOfBounds {
            what: "columns",
            requested: spec.n_cols,
            available: m.cols,
        });
    }
    let mut rng = rng_from_seed(derive_seed(spec.seed, spec.repeat_index));
    let mut rows = index::sample(&mut rng, m.rows, spec.n_rows).into_vec();
    let mut cols = index::sample(&mut rng, m.cols, spec.n_cols).into_vec();
    rows.sort_unstable();
    cols.sort_unstable();
    m.select(&rows, &cols)
}

/// How the null model destroys structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum ShuffleMode {
    /// Each column permuted independently across rows; every neuron keeps
    /// its marginal distribution.
    #[default]
    WithinColumns,
    /// All entries permuted together.
    WholeMatrix,
}

/// Permutes each column independently across rows.
pub fn shuffle_within_columns(m: &ResponseMatrix, seed: u64) -> ResponseMatrix {
    shuffle(m, seed, ShuffleMode::WithinColumns)
}

pub fn shuffle(m: &ResponseMatrix, seed: u64, mode: ShuffleMode) -> ResponseMatrix {
    let mut rng = rng_from_seed(seed);
    match mode {
        ShuffleMode::WithinColumns => {
            let mut values = m.values.clone();
            let mut col = Vec::with_capacity(m.rows);
            for j in 0..m.cols {
                col.clear();
                col.extend((0..m.rows).map(|i| m.get(i, j)));
                col.shuffle(&mut rng);
                for (i, v) in col.iter().enumerate() {
                    values[i * m.cols + j] = *v;
                }
            }
            m.with_values(values)
        }
        ShuffleMode::WholeMatrix => {
            let mut values = m.values.clone();
            values.shuffle(&mut rng);
            m.with_values(values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn m(rows: &[&[f64]]) -> ResponseMatrix {
        ResponseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn rejects_non_finite_with_position() {
        let err = ResponseMatrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 4.0]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 1, col: 0 });
        let err = ResponseMatrix::new(1, 2, vec![1.0, f64::INFINITY]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn rejects_ragged_and_empty() {
        assert!(matches!(
            ResponseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]),
            Err(Error::Shape { .. })
        ));
        assert_eq!(ResponseMatrix::new(0, 3, vec![]), Err(Error::EmptyMatrix));
        assert!(matches!(
            ResponseMatrix::new(2, 2, vec![1.0; 3]),
            Err(Error::Shape { .. })
        ));
    }

    #[test]
    fn normalize_divides_by_column_mean() {
        let a = m(&[&[2.0, 1.0], &[4.0, 1.0]]);
        let n = normalize_per_neuron(&a).unwrap();
        assert!((n.get(0, 0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((n.get(1, 0) - 4.0 / 3.0).abs() < 1e-15);
        for mu in n.column_means() {
            assert!((mu - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_all_ones_is_identity() {
        let a = ResponseMatrix::new(3, 4, vec![1.0; 12]).unwrap();
        assert_eq!(normalize_per_neuron(&a).unwrap(), a);
    }

    #[test]
    fn normalize_zero_mean_column_errors() {
        let a = m(&[&[1.0, 0.0], &[2.0, 0.0]]);
        assert_eq!(normalize_per_neuron(&a), Err(Error::ZeroMeanColumn { col: 1 }));
        let b = m(&[&[1.0, -1.0], &[2.0, 1.0]]);
        assert_eq!(normalize_per_neuron(&b), Err(Error::ZeroMeanColumn { col: 1 }));
    }

    #[test]
    fn dead_neurons_removed_in_order() {
        let a = m(&[&[1.0, 0.0, 3.0], &[4.0, 0.0, 6.0]]);
        let (b, removed) = remove_dead_neurons(&a).unwrap();
        assert_eq!(removed, vec![1]);
        assert_eq!(b, m(&[&[1.0, 3.0], &[4.0, 6.0]]));

        let (c, removed) = remove_dead_neurons(&b).unwrap();
        assert!(removed.is_empty());
        assert_eq!(c, b);

        let z = ResponseMatrix::new(2, 1, vec![0.0, 0.0]).unwrap();
        assert_eq!(remove_dead_neurons(&z), Err(Error::AllColumnsDead));
    }

    #[test]
    fn dead_tolerance() {
        let a = m(&[&[1e-9, 1.0], &[-1e-9, 2.0]]);
        assert_eq!(remove_dead_neurons(&a).unwrap().1, Vec::<usize>::new());
        assert_eq!(remove_dead_neurons_with_tolerance(&a, 1e-8).unwrap().1, vec![0]);
    }

    #[test]
    fn labels_follow_selection() {
        let a = m(&[&[1.0, 0.0, 3.0], &[4.0, 0.0, 6.0]])
            .with_col_labels(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        let (b, _) = remove_dead_neurons(&a).unwrap();
        assert_eq!(b.col_labels().unwrap(), &["a".to_string(), "c".to_string()]);
    }

    #[test]
    fn full_subsample_is_identity() {
        let a = ResponseMatrix::from_fn(6, 5, |i, j| (i * 5 + j) as f64).unwrap();
        let s = subsample(&a, &SubsampleSpec::new(6, 5, 3, 0)).unwrap();
        assert_eq!(s, a);
    }

    #[test]
    fn subsample_deterministic_and_bounded() {
        let a = ResponseMatrix::from_fn(30, 20, |i, j| (i * 20 + j) as f64).unwrap();
        let spec = SubsampleSpec::new(10, 7, 42, 3);
        assert_eq!(subsample(&a, &spec).unwrap(), subsample(&a, &spec).unwrap());
        let other = SubsampleSpec::new(10, 7, 42, 4);
        assert_ne!(subsample(&a, &spec).unwrap(), subsample(&a, &other).unwrap());
        assert!(matches!(
            subsample(&a, &SubsampleSpec::new(31, 7, 42, 0)),
            Err(Error::OutOfBounds { what: "rows", .. })
        ));
        assert!(matches!(
            subsample(&a, &SubsampleSpec::new(3, 21, 42, 0)),
            Err(Error::OutOfBounds { what: "columns", .. })
        ));
    }

    #[test]
    fn shuffle_single_row_and_constant_unchanged() {
        let a = ResponseMatrix::from_fn(1, 8, |_, j| j as f64).unwrap();
        assert_eq!(shuffle_within_columns(&a, 9), a);
        let c = ResponseMatrix::new(5, 5, vec![2.5; 25]).unwrap();
        assert_eq!(shuffle_within_columns(&c, 9), c);
    }

    #[test]
    fn whole_matrix_shuffle_preserves_multiset() {
        let a = ResponseMatrix::from_fn(7, 3, |i, j| (i * 3 + j) as f64).unwrap();
        let s = shuffle(&a, 5, ShuffleMode::WholeMatrix);
        let mut x = a.values().to_vec();
        let mut y = s.values().to_vec();
        x.sort_by(f64::total_cmp);
        y.sort_by(f64::total_cmp);
        assert_eq!(x, y);
        assert_ne!(s, a);
    }
}
