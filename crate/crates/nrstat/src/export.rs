//! JSON and CSV renderings of analysis results.

use std::fmt::Write as _;
use std::io::Write;

use nrstat_core::asymptotic::ExtrapolationResult;
use nrstat_core::dimension::{IdEstimate, IdSurface};
use nrstat_core::moments::{KurtosisGrid, KurtosisSummary};
use nrstat_core::stats::histogram;
use nrstat_core::tail::TailSummary;
use nrstat_core::Axis;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins spanning the data; `None` for empty input.
    pub fn of(values: &[f64], bins: usize) -> Option<Self> {
        let lo = values.iter().cloned().reduce(f64::min)?;
        let hi = values.iter().cloned().reduce(f64::max)?;
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Some(Self {
            lo,
            hi,
            counts: histogram(values, lo, hi, bins.max(1)),
        })
    }

    pub fn edges(&self) -> Vec<f64> {
        let n = self.counts.len();
        (0..=n)
            .map(|i| self.lo + (self.hi - self.lo) * i as f64 / n as f64)
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct KurtosisReport<'a> {
    pub axis: Axis,
    pub normalized: bool,
    pub n_vectors: usize,
    pub n_samples_per_vector: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub skipped: &'a [usize],
    pub histogram: Option<Histogram>,
}

pub fn kurtosis_report(s: &KurtosisSummary, bins: usize) -> KurtosisReport<'_> {
    KurtosisReport {
        axis: s.axis,
        normalized: s.normalized,
        n_vectors: s.n_vectors,
        n_samples_per_vector: s.n_samples_per_vector,
        mean: s.mean,
        median: s.median,
        skipped: &s.skipped,
        histogram: Histogram::of(&s.per_vector, bins),
    }
}

/// One row per size: `kind,size,mean,median,n_valid_repeats`, where kind
/// is `selectivity` or `sparseness`. Undefined cells are left empty.
pub fn grid_csv<W: Write>(g: &KurtosisGrid, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["kind", "size", "mean", "median", "n_valid_repeats"])?;
    for (kind, cells) in [("selectivity", &g.selectivity), ("sparseness", &g.sparseness)] {
        for c in cells {
            out.write_record([
                kind.to_string(),
                c.size.to_string(),
                opt(c.mean),
                opt(c.median),
                c.n_valid_repeats.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct TailFitRecord {
    pub axis_index: usize,
    pub k: f64,
    pub sigma: f64,
    pub theta: f64,
    pub n_exceedances: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct TailReport<'a> {
    pub axis: Axis,
    pub normalized: bool,
    pub tail_fraction: f64,
    pub mean_k: f64,
    pub median_k: f64,
    pub skipped: &'a [usize],
    pub fits: Vec<TailFitRecord>,
    pub histogram: Option<Histogram>,
}

pub fn tail_report(s: &TailSummary, bins: usize) -> TailReport<'_> {
    TailReport {
        axis: s.axis,
        normalized: s.normalized,
        tail_fraction: s.tail_fraction,
        mean_k: s.mean_k,
        median_k: s.median_k,
        skipped: &s.skipped,
        fits: s
            .indices
            .iter()
            .zip(&s.fits)
            .map(|(&axis_index, f)| TailFitRecord {
                axis_index,
                k: f.k,
                sigma: f.sigma,
                theta: f.theta,
                n_exceedances: f.n_exceedances,
                converged: f.converged,
            })
            .collect(),
        histogram: Histogram::of(&s.per_vector_k, bins),
    }
}

/// Histogram rows `bin_lo,bin_hi,count`.
pub fn histogram_csv<W: Write>(h: &Histogram, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["bin_lo", "bin_hi", "count"])?;
    let edges = h.edges();
    for (i, c) in h.counts.iter().enumerate() {
        out.write_record([format!("{:?}", edges[i]), format!("{:?}", edges[i + 1]), c.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn surface_csv<W: Write>(s: &IdSurface, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["image_size", "neuron_size", "mean_dimensionality", "n_valid_repeats"])?;
    for c in &s.cells {
        out.write_record([
            c.image_size.to_string(),
            c.neuron_size.to_string(),
            opt(c.mean_dimensionality),
            c.n_valid_repeats.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a surface written by [`surface_csv`]. Sizes may appear in any
/// order; a missing combination or empty value is a flagged cell.
pub fn read_surface_csv<R: std::io::Read>(r: R) -> Result<IdSurface, String> {
    let mut reader = csv::Reader::from_reader(r);
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |j: usize| {
            rec.get(j)
                .map(str::trim)
                .ok_or_else(|| format!("line {line}: missing column {}", j + 1))
        };
        let image: usize = field(0)?.parse().map_err(|_| format!("line {line}: bad image_size"))?;
        let neuron: usize = field(1)?.parse().map_err(|_| format!("line {line}: bad neuron_size"))?;
        let raw = field(2)?;
        let value = if raw.is_empty() {
            None
        } else {
            let v: f64 = raw
                .parse()
                .map_err(|_| format!("line {line}: bad mean_dimensionality"))?;
            v.is_finite().then_some(v)
        };
        rows.push((image, neuron, value));
    }
    let mut images: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let mut neurons: Vec<usize> = rows.iter().map(|r| r.1).collect();
    images.sort_unstable();
    images.dedup();
    neurons.sort_unstable();
    neurons.dedup();
    let mut values = vec![None; images.len() * neurons.len()];
    for (image, neuron, value) in rows {
        let i = images.binary_search(&image).unwrap();
        let j = neurons.binary_search(&neuron).unwrap();
        values[i * neurons.len() + j] = value;
    }
    IdSurface::from_values(images, neurons, &values).map_err(|e| e.to_string())
}

pub fn spectrum_csv<W: Write>(est: &IdEstimate, w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["rank", "original", "shuffled"])?;
    let o = &est.original_spectrum.eigenvalues;
    let s = &est.shuffled_spectrum.eigenvalues;
    for i in 0..o.len().max(s.len()) {
        out.write_record([(i + 1).to_string(), opt(o.get(i).copied()), opt(s.get(i).copied())])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct ExtrapolationReport<'a> {
    pub results: &'a [ExtrapolationResult],
    pub failures: Vec<OrderFailure>,
}

#[derive(Debug, Serialize)]
pub struct OrderFailure {
    pub order: nrstat_core::asymptotic::FitOrder,
    pub error: String,
}

/// A dataset name with one `(order label, asymptote)` pair per fit order.
pub type TableRow = (String, Vec<(&'static str, Option<f64>)>);

/// Plain-text table of asymptotic dimensionality per dataset and fit order.
pub fn asymptote_table(rows: &[TableRow]) -> String {
    let mut out = String::from("Estimated asymptotic dimensionality values\n");
    let orders: Vec<&str> = rows
        .first()
        .map(|(_, v)| v.iter().map(|(o, _)| *o).collect())
        .unwrap_or_default();
    let name_w = rows.iter().map(|(n, _)| n.len()).chain([7]).max().unwrap();
    let _ = write!(out, "{:<name_w$}", "dataset");
    for o in &orders {
        let _ = write!(out, "  {o:>16}");
    }
    out.push('\n');
    for (name, values) in rows {
        let _ = write!(out, "{name:<name_w$}");
        for (_, v) in values {
            match v {
                Some(v) => {
                    let _ = write!(out, "  {v:>16.2}");
                }
                None => {
                    let _ = write!(out, "  {:>16}", "n/a");
                }
            }
        }
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nrstat_core::dimension::IdSurface;

    #[test]
    fn histogram_covers_all_values() {
        let h = Histogram::of(&[0.0, 1.0, 2.0, 3.0], 3).unwrap();
        assert_eq!(h.counts.iter().sum::<usize>(), 4);
        assert_eq!(h.edges().len(), 4);
        assert!(Histogram::of(&[], 3).is_none());
        let flat = Histogram::of(&[2.0, 2.0], 2).unwrap();
        assert_eq!(flat.counts.iter().sum::<usize>(), 2);
    }

    #[test]
    fn surface_csv_round_trip() {
        let s = IdSurface::from_values(
            vec![10, 20],
            vec![5, 15, 25],
            &[Some(1.5), None, Some(3.0), Some(2.0), Some(4.25), Some(5.0)],
        )
        .unwrap();
        let mut buf = Vec::new();
        surface_csv(&s, &mut buf).unwrap();
        let back = read_surface_csv(buf.as_slice()).unwrap();
        assert_eq!(back.image_sizes, s.image_sizes);
        assert_eq!(back.neuron_sizes, s.neuron_sizes);
        for (a, b) in back.cells.iter().zip(&s.cells) {
            assert_eq!(a.mean_dimensionality, b.mean_dimensionality);
        }
    }

    #[test]
    fn table_lists_every_order() {
        let t = asymptote_table(&[(
            "synthetic".into(),
            vec![("neuron -> image", Some(80.123)), ("image -> neuron", None)],
        )]);
        assert!(t.starts_with("Estimated asymptotic dimensionality values\n"));
        assert!(t.contains("neuron -> image") && t.contains("image -> neuron"));
        assert!(t.contains("80.12") && t.contains("n/a"));
    }
}
