//! Command-line interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use nrstat_core::asymptotic::{extrapolate_surface, FitConfig, FitOrder};
use nrstat_core::dimension::{estimate_id_with, IdConfig, Orientation, PcaConfig, SurfaceParams};
use nrstat_core::matrix::{normalize_per_neuron, remove_dead_neurons_with_tolerance};
use nrstat_core::moments::{kurtosis_summary, GridParams};
use nrstat_core::synthetic::{analytic_truth, generate, SyntheticKind, SyntheticSpec};
use nrstat_core::tail::{tail_summary, TailConfig};
use nrstat_core::{Axis, ResponseMatrix, ShuffleMode};
use serde::Serialize;
use thiserror::Error;

use crate::export;
use crate::io::{load_matrix, save_matrix, Format, IoError};
use crate::parallel;

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;
pub const EXIT_NOT_CONVERGED: i32 = 5;

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  2  usage error (bad flag or argument)
  3  I/O error (unreadable, malformed or unwritable file)
  4  domain error (e.g. too few samples, zero-mean neuron, zero variance)
  5  a fit did not converge

Logging goes to stderr; set NRSTAT_LOG=debug (or use -v) for detail.";

#[derive(Debug, Parser)]
#[command(name = "nrstat", version, about = "Response statistics for neural populations", after_help = EXIT_CODES)]
pub struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for grid and surface runs (0 = all cores). Results do
    /// not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Increase log verbosity (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Excess kurtosis per neuron (selectivity) and per image (sparseness).
    Stats(StatsArgs),
    /// Mean and median kurtosis as a function of dataset size.
    Grid(GridArgs),
    /// Generalized Pareto tail index per neuron or image.
    Tail(TailArgs),
    /// Eigenvalue spectra of the data and of its reshuffled copy.
    Spectrum(SpectrumArgs),
    /// Intrinsic dimensionality against a reshuffled null.
    Iddim(IdArgs),
    /// Dimensionality over a grid of image and neuron counts.
    Surface(SurfaceArgs),
    /// Asymptotic dimensionality from a surface CSV, in both fit orders.
    Extrapolate(ExtrapolateArgs),
    /// Write a synthetic response matrix.
    Synth(SynthArgs),
    /// Divide every neuron by its mean response.
    Normalize(TransformArgs),
    /// Drop neurons whose responses are all zero.
    Clean(CleanArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Response matrix, stimuli x neurons (.csv, otherwise NRSM binary).
    pub input: PathBuf,
    /// Override the format inferred from the extension.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl InputArgs {
    fn load(&self) -> Result<ResponseMatrix, CliError> {
        let fmt = self.format.unwrap_or_else(|| Format::from_path(&self.input));
        let m = load_matrix(&self.input, fmt)?;
        info!(
            "loaded {} x {} matrix from {}",
            m.rows(),
            m.cols(),
            self.input.display()
        );
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    /// Per neuron (selectivity).
    Neuron,
    /// Per image (sparseness).
    Image,
    Both,
}

impl AxisArg {
    fn axes(self) -> &'static [Axis] {
        match self {
            AxisArg::Neuron => &[Axis::Neuron],
            AxisArg::Image => &[Axis::Image],
            AxisArg::Both => &[Axis::Neuron, Axis::Image],
        }
    }
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "both")]
    pub axis: AxisArg,
    /// Divide each neuron by its mean before computing sparseness.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// JSON output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Image counts, e.g. `20,40,60` or `20:20:200`.
    #[arg(long, value_parser = parse_sizes)]
    pub image_sizes: Option<Sizes>,
    /// Neuron counts, same syntax as --image-sizes.
    #[arg(long, value_parser = parse_sizes)]
    pub neuron_sizes: Option<Sizes>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    #[arg(long)]
    pub normalize: bool,
    /// CSV output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "neuron")]
    pub axis: AxisArg,
    #[arg(long)]
    pub normalize: bool,
    /// Share of each vector above the threshold.
    #[arg(long, default_value_t = 0.1)]
    pub tail_fraction: f64,
    #[arg(long, default_value_t = 20)]
    pub min_exceedances: usize,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    /// JSON output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Also write the tail-index histogram as CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    /// Neurons are the PCA variables.
    Neurons,
    /// Stimuli are the PCA variables.
    Stimuli,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShuffleArg {
    /// Permute each neuron's responses independently.
    Columns,
    /// Permute all entries at once.
    Matrix,
}

#[derive(Debug, Args)]
pub struct PcaArgs {
    #[arg(long, value_enum, default_value = "neurons")]
    pub orientation: OrientationArg,
    /// Skip mean-centering of the PCA variables.
    #[arg(long)]
    pub no_center: bool,
    #[arg(long, value_enum, default_value = "columns")]
    pub shuffle: ShuffleArg,
    /// Average the null spectrum over this many reshuffles.
    #[arg(long, default_value_t = 1)]
    pub shuffles: usize,
}

impl PcaArgs {
    fn config(&self) -> IdConfig {
        IdConfig {
            pca: PcaConfig {
                orientation: match self.orientation {
                    OrientationArg::Neurons => Orientation::NeuronsAsVariables,
                    OrientationArg::Stimuli => Orientation::StimuliAsVariables,
                },
                centered: !self.no_center,
            },
            shuffle_mode: match self.shuffle {
                ShuffleArg::Columns => ShuffleMode::WithinColumns,
                ShuffleArg::Matrix => ShuffleMode::WholeMatrix,
            },
            n_shuffles: self.shuffles,
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pca: PcaArgs,
    /// CSV output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IdArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pca: PcaArgs,
    /// JSON output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub pca: PcaArgs,
    /// Image counts, e.g. `20:20:200`.
    #[arg(long, value_parser = parse_sizes)]
    pub image_sizes: Option<Sizes>,
    /// Neuron counts, e.g. `20:20:200`.
    #[arg(long, value_parser = parse_sizes)]
    pub neuron_sizes: Option<Sizes>,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// CSV output file (stdout if omitted).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Both,
    NeuronImage,
    ImageNeuron,
}

#[derive(Debug, Args)]
pub struct ExtrapolateArgs {
    /// Surface CSV as written by `nrstat surface`.
    pub surface: PathBuf,
    #[arg(long, value_enum, default_value = "both")]
    pub order: OrderArg,
    /// Relative RMSE that ends the restart loop.
    #[arg(long, default_value_t = 0.02)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 200)]
    pub max_restarts: usize,
    /// Dataset name for the summary table.
    #[arg(long)]
    pub name: Option<String>,
    /// JSON output with every fit (the summary table goes to stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum SynthKindArg {
    IidNormal,
    IidExponential,
    IidLaplace,
    GpdTail,
    PlantedRank,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub kind: SynthKindArg,
    #[arg(long)]
    pub rows: usize,
    #[arg(long)]
    pub cols: usize,
    /// GPD shape.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub k: f64,
    /// GPD scale.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// GPD location.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Planted rank.
    #[arg(long, default_value_t = 5)]
    pub rank: usize,
    /// Noise standard deviation added to the planted signal.
    #[arg(long, default_value_t = 0.01)]
    pub noise: f64,
    /// Output file (.csv, otherwise NRSM binary).
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TransformArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Drop all-zero neurons first instead of failing on them.
    #[arg(long)]
    pub drop_dead: bool,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Output format (inferred from the extension if omitted).
    #[arg(long, value_enum)]
    pub output_format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct CleanArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Treat |x| <= tolerance as zero.
    #[arg(long, default_value_t = 0.0)]
    pub tolerance: f64,
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long, value_enum)]
    pub output_format: Option<Format>,
}

/// An ordered list of subsample sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sizes(pub Vec<usize>);

/// Parses comma-separated sizes; each item is a number or an inclusive
/// range `start:step:end`.
pub fn parse_sizes(s: &str) -> Result<Sizes, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|i| !i.is_empty()) {
        let parts: Vec<&str> = item.split(':').collect();
        let num = |p: &str| p.trim().parse::<usize>().map_err(|_| format!("invalid size {p:?}"));
        match parts.as_slice() {
            [n] => out.push(num(n)?),
            [start, step, end] => {
                let (start, step, end) = (num(start)?, num(step)?, num(end)?);
                if step == 0 || start > end {
                    return Err(format!("invalid range {item:?}"));
                }
                out.extend((start..=end).step_by(step));
            }
            _ => return Err(format!("expected N or start:step:end, got {item:?}")),
        }
    }
    if out.is_empty() {
        return Err("empty size list".into());
    }
    if out.contains(&0) {
        return Err("sizes must be positive".into());
    }
    Ok(Sizes(out))
}

/// Default sizes when none are given: steps of 20 up to `max`, ending at
/// `max` itself.
pub fn default_sizes(max: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (20..max).step_by(20).collect();
    v.push(max);
    v
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Domain(#[from] nrstat_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) | CliError::Write { .. } | CliError::Input(_) => EXIT_IO,
            CliError::Domain(nrstat_core::Error::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| CliError::Write {
            path: p.display().to_string(),
            source,
        })?)),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn write_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CliError> {
    let mut w = open_output(path)?;
    let name = path.map_or_else(|| "stdout".to_string(), |p| p.display().to_string());
    let wrap = |source| CliError::Write {
        path: name.clone(),
        source,
    };
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| wrap(e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(wrap)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stats(a) => stats(a),
        Command::Grid(a) => grid(cli, a),
        Command::Tail(a) => tail(cli, a),
        Command::Spectrum(a) => spectrum(cli, a),
        Command::Iddim(a) => iddim(cli, a),
        Command::Surface(a) => surface(cli, a),
        Command::Extrapolate(a) => extrapolate(cli, a),
        Command::Synth(a) => synth(cli, a),
        Command::Normalize(a) => normalize(a),
        Command::Clean(a) => clean(a),
    }
}

fn stats(a: &StatsArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let mut out = serde_json::Map::new();
    for &axis in a.axis.axes() {
        let s = kurtosis_summary(&m, axis, a.normalize)?;
        if !s.skipped.is_empty() {
            warn!("{} {axis} vectors have undefined kurtosis", s.skipped.len());
        }
        let key = match axis {
            Axis::Neuron => "selectivity",
            Axis::Image => "sparseness",
        };
        out.insert(
            key.into(),
            serde_json::to_value(export::kurtosis_report(&s, a.bins)).expect("serializable"),
        );
    }
    write_json(&out, a.output.as_deref())
}

fn grid(cli: &Cli, a: &GridArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let p = GridParams {
        image_sizes: a.image_sizes.clone().map_or_else(|| default_sizes(m.rows()), |s| s.0),
        neuron_sizes: a.neuron_sizes.clone().map_or_else(|| default_sizes(m.cols()), |s| s.0),
        repeats: a.repeats,
        seed: cli.seed,
        normalized: a.normalize,
    };
    let g = parallel::kurtosis_grid(&m, &p, cli.threads)?;
    export::grid_csv(&g, open_output(a.output.as_deref())?)?;
    Ok(())
}

fn tail(cli: &Cli, a: &TailArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let cfg = TailConfig {
        tail_fraction: a.tail_fraction,
        min_exceedances: a.min_exceedances,
        max_restarts: a.restarts,
        seed: cli.seed,
    };
    let mut out = serde_json::Map::new();
    let mut hist_rows = Vec::new();
    for &axis in a.axis.axes() {
        let s = tail_summary(&m, axis, a.normalize, &cfg)?;
        if !s.skipped.is_empty() {
            warn!("{} {axis} vectors skipped", s.skipped.len());
        }
        let report = export::tail_report(&s, a.bins);
        if let Some(h) = &report.histogram {
            hist_rows.push(h.clone());
        }
        out.insert(axis.to_string(), serde_json::to_value(report).expect("serializable"));
    }
    if let Some(path) = &a.histogram {
        // With both axes the neuron histogram comes first, then the image one.
        let mut w = open_output(Some(path))?;
        for h in &hist_rows {
            export::histogram_csv(h, &mut w)?;
        }
    }
    write_json(&out, a.output.as_deref())
}

fn spectrum(cli: &Cli, a: &SpectrumArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let est = estimate_id_with(&m, cli.seed, &a.pca.config())?;
    info!("dimensionality {}", est.dimensionality);
    export::spectrum_csv(&est, open_output(a.output.as_deref())?)?;
    Ok(())
}

#[derive(Serialize)]
struct IdReport {
    dimensionality: usize,
    n_components: usize,
    seed: u64,
    rng: &'static str,
}

fn iddim(cli: &Cli, a: &IdArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let est = estimate_id_with(&m, cli.seed, &a.pca.config())?;
    write_json(
        &IdReport {
            dimensionality: est.dimensionality,
            n_components: est.original_spectrum.n_components,
            seed: cli.seed,
            rng: nrstat_core::rng::RNG_ALGORITHM,
        },
        a.output.as_deref(),
    )
}

fn surface(cli: &Cli, a: &SurfaceArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let p = SurfaceParams {
        image_sizes: a.image_sizes.clone().map_or_else(|| default_sizes(m.rows()), |s| s.0),
        neuron_sizes: a.neuron_sizes.clone().map_or_else(|| default_sizes(m.cols()), |s| s.0),
        repeats: a.repeats,
        seed: cli.seed,
        config: a.pca.config(),
    };
    info!(
        "surface of {} x {} cells, {} repeats",
        p.image_sizes.len(),
        p.neuron_sizes.len(),
        p.repeats
    );
    let s = parallel::id_surface(&m, &p, cli.threads)?;
    let flagged = s.cells.iter().filter(|c| c.mean_dimensionality.is_none()).count();
    if flagged > 0 {
        warn!("{flagged} cells had no valid repeat");
    }
    export::surface_csv(&s, open_output(a.output.as_deref())?)?;
    Ok(())
}

fn extrapolate(cli: &Cli, a: &ExtrapolateArgs) -> Result<(), CliError> {
    let file = File::open(&a.surface).map_err(|source| {
        CliError::Io(IoError::Io {
            path: a.surface.clone(),
            source,
        })
    })?;
    let surface =
        export::read_surface_csv(file).map_err(|e| CliError::Input(format!("{}: {e}", a.surface.display())))?;
    let orders: &[FitOrder] = match a.order {
        OrderArg::Both => &FitOrder::BOTH,
        OrderArg::NeuronImage => &[FitOrder::NeuronThenImage],
        OrderArg::ImageNeuron => &[FitOrder::ImageThenNeuron],
    };
    let cfg = FitConfig {
        epsilon: a.epsilon,
        max_restarts: a.max_restarts,
        init_bounds: None,
        seed: cli.seed,
    };
    let mut results = Vec::new();
    let mut failures = Vec::new();
    let mut first_error = None;
    let mut row = Vec::new();
    for &order in orders {
        match extrapolate_surface(&surface, order, &cfg) {
            Ok(r) => {
                row.push((order.label(), Some(r.asymptotic_dimensionality)));
                results.push(r);
            }
            Err(e) => {
                warn!("{}: {e}", order.label());
                row.push((order.label(), None));
                failures.push(export::OrderFailure {
                    order,
                    error: e.to_string(),
                });
                first_error.get_or_insert(e);
            }
        }
    }
    if let Some(path) = &a.output {
        write_json(
            &export::ExtrapolationReport {
                results: &results,
                failures,
            },
            Some(path),
        )?;
    }
    let name = a.name.clone().unwrap_or_else(|| {
        a.surface
            .file_stem()
            .map_or_else(|| "surface".into(), |s| s.to_string_lossy().into_owned())
    });
    print!("{}", export::asymptote_table(&[(name, row)]));
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<(), CliError> {
    let kind = match a.kind {
        SynthKindArg::IidNormal => SyntheticKind::IidNormal,
        SynthKindArg::IidExponential => SyntheticKind::IidExponential,
        SynthKindArg::IidLaplace => SyntheticKind::IidLaplace,
        SynthKindArg::GpdTail => SyntheticKind::GpdTail {
            k: a.k,
            sigma: a.sigma,
            theta: a.theta,
        },
        SynthKindArg::PlantedRank => SyntheticKind::PlantedRank {
            rank: a.rank,
            noise: a.noise,
        },
    };
    let spec = SyntheticSpec::new(kind, a.rows, a.cols, cli.seed);
    let m = generate(&spec)?;
    info!("truth: {:?}", analytic_truth(&spec));
    let fmt = a.format.unwrap_or_else(|| Format::from_path(&a.output));
    save_matrix(&m, &a.output, fmt)?;
    Ok(())
}

fn normalize(a: &TransformArgs) -> Result<(), CliError> {
    let mut m = a.input.load()?;
    if a.drop_dead {
        let (alive, dropped) = remove_dead_neurons_with_tolerance(&m, 0.0)?;
        info!("dropped {} dead neurons", dropped.len());
        m = alive;
    }
    let out = normalize_per_neuron(&m)?;
    let fmt = a.output_format.unwrap_or_else(|| Format::from_path(&a.output));
    save_matrix(&out, &a.output, fmt)?;
    Ok(())
}

fn clean(a: &CleanArgs) -> Result<(), CliError> {
    let m = a.input.load()?;
    let (alive, dropped) = remove_dead_neurons_with_tolerance(&m, a.tolerance)?;
    info!("dropped {} of {} neurons", dropped.len(), m.cols());
    let fmt = a.output_format.unwrap_or_else(|| Format::from_path(&a.output));
    save_matrix(&alive, &a.output, fmt)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("20:20:100").unwrap().0, vec![20, 40, 60, 80, 100]);
        assert_eq!(parse_sizes("5, 10,20:30:80").unwrap().0, vec![5, 10, 20, 50, 80]);
        for bad in ["", "0", "a", "1:0:5", "9:1:3", "1:2"] {
            assert!(parse_sizes(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn default_sizes_step_by_twenty() {
        assert_eq!(default_sizes(100), vec![20, 40, 60, 80, 100]);
        assert_eq!(default_sizes(50), vec![20, 40, 50]);
        assert_eq!(default_sizes(7), vec![7]);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_code_mapping() {
        assert_eq!(
            CliError::Domain(nrstat_core::Error::EmptyMatrix).exit_code(),
            EXIT_DOMAIN
        );
        assert_eq!(
            CliError::Domain(nrstat_core::Error::NotConverged { relative_rmse: 0.1 }).exit_code(),
            EXIT_NOT_CONVERGED
        );
        assert_eq!(CliError::Io(IoError::BadMagic).exit_code(), EXIT_IO);
    }
}
