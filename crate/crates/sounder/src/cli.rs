//! Subcommand implementations wiring the pipeline end to end.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sounder_core::channel::simulate_capture;
use sounder_core::dataset::{CaptureDataset, CaptureMethod};
use sounder_core::estimator::{estimate_stream, EstimationMethod, StreamConfig};
use sounder_core::pca::train_classifier;
use sounder_core::stats::{
    chi_square, empirical_pdf, fit_gamma, fit_lognormal, fit_normal, fit_rayleigh,
    pdf_value, sample_moments, DistFamily, DistributionFit, DEFAULT_PDF_BINS,
};
use sounder_core::sync::TrainingWindow;

use crate::capture::{read_capture, write_capture};
use crate::error::{CliError, CliResult};
use crate::iqfile::{read_iq, write_iq, IqFile};
use crate::model::{read_model, write_model};
use crate::scenario::read_scenario;
use crate::svg::scatter_svg;
use crate::timestamp;

#[derive(Parser)]
#[command(
    name = "sounder",
    version,
    about = "Burst-level channel sounding: simulate, estimate, and classify"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Synthesize a burst train through a simulated channel.
    Simulate(SimulateArgs),
    /// Detect bursts in an IQ file and estimate per-burst channel taps.
    Estimate(EstimateArgs),
    /// Fit distributions to capture magnitudes and emit the empirical PDF.
    Fit(FitArgs),
    /// Chi-square goodness of fit between the empirical and fitted PDFs.
    Chisq(ChisqArgs),
    /// PCA over labeled captures; emit scores and optionally a classifier.
    Pca(PcaArgs),
    /// Classify capture rows with a trained nearest-centroid model.
    Classify(ClassifyArgs),
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Scenario configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output IQ file.
    #[arg(long = "out-iq")]
    pub out_iq: PathBuf,
    /// Output ground-truth capture file.
    #[arg(long = "out-truth")]
    pub out_truth: PathBuf,
    /// Timestamp to record in headers (defaults to now); fix it for
    /// byte-identical outputs.
    #[arg(long)]
    pub created: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum MethodArg {
    Ls,
    Corr,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum WindowArg {
    #[value(name = "16")]
    Central16,
    #[value(name = "26")]
    Full26,
}

#[derive(Args)]
pub struct EstimateArgs {
    /// Input IQ file.
    #[arg(long = "in-iq")]
    pub in_iq: PathBuf,
    /// Estimation method.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Training window: the central 16 bits or the full 26.
    #[arg(long, value_enum, default_value = "16")]
    pub window: WindowArg,
    /// Channel impulse response length in taps.
    #[arg(long)]
    pub cl: usize,
    /// Output capture file.
    #[arg(long = "out-capture")]
    pub out_capture: PathBuf,
    /// TSC id expected in the bursts.
    #[arg(long, default_value_t = 0)]
    pub tsc: u8,
    /// Guard power threshold as a fraction of mean stream power.
    #[arg(long, default_value_t = 0.2)]
    pub threshold: f64,
    /// Remove a known carrier offset (Hz) before processing.
    #[arg(long = "freq-offset-hz")]
    pub freq_offset_hz: Option<f64>,
    /// Label recorded in the capture header (defaults to the IQ file's
    /// scenario id).
    #[arg(long)]
    pub label: Option<String>,
    /// Ground-truth capture for an NMSE report.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub created: Option<String>,
}

#[derive(Args)]
pub struct FitArgs {
    /// Input capture file.
    #[arg(long)]
    pub capture: PathBuf,
    /// Tap index to analyze.
    #[arg(long, conflicts_with = "pooled")]
    pub index: Option<usize>,
    /// Pool all tap indices into one sample set.
    #[arg(long)]
    pub pooled: bool,
    /// Comma-separated families (rayleigh, normal, lognormal, gamma).
    #[arg(long, value_delimiter = ',')]
    pub families: Option<Vec<String>>,
    /// Histogram bins for the empirical PDF.
    #[arg(long, default_value_t = DEFAULT_PDF_BINS)]
    pub bins: usize,
}

#[derive(Args)]
pub struct ChisqArgs {
    #[arg(long)]
    pub capture: PathBuf,
    /// Tap index to analyze.
    #[arg(long, conflicts_with = "pooled")]
    pub index: Option<usize>,
    #[arg(long)]
    pub pooled: bool,
    /// Distribution family to test against.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = DEFAULT_PDF_BINS)]
    pub bins: usize,
}

#[derive(Args)]
pub struct PcaArgs {
    /// Labeled capture files (labels come from their headers).
    #[arg(long = "captures", num_args = 1.., required = true)]
    pub captures: Vec<PathBuf>,
    /// Leading components to report.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Persist a nearest-centroid classifier trained on these captures.
    #[arg(long = "out-model")]
    pub out_model: Option<PathBuf>,
    /// Write a scatter plot of the first two components.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Args)]
pub struct ClassifyArgs {
    /// Trained classifier model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Capture whose rows get classified.
    #[arg(long)]
    pub capture: PathBuf,
}

/// Write a line to stdout; when the reader has gone away (broken pipe),
/// exit quietly like any well-behaved filter.
fn outln(args: std::fmt::Arguments) {
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = stdout.write_fmt(args).and_then(|_| stdout.write_all(b"\n")) {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            std::process::exit(0);
        }
        panic!("failed writing to stdout: {e}");
    }
}

macro_rules! outln {
    ($($t:tt)*) => { outln(format_args!($($t)*)) };
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Estimate(args) => cmd_estimate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Chisq(args) => cmd_chisq(args),
        Command::Pca(args) => cmd_pca(args),
        Command::Classify(args) => cmd_classify(args),
    }
}

fn cmd_simulate(args: SimulateArgs) -> CliResult<()> {
    let spec = read_scenario(&args.config)?;
    let capture = simulate_capture(&spec)?;
    let created = args.created.unwrap_or_else(timestamp::utc_now);

    let iq = IqFile {
        stream: capture.stream,
        oversample: spec.oversample as u32,
        scenario: spec.label.clone(),
    };
    write_iq(&args.out_iq, &iq)?;

    let mut truth = CaptureDataset::new(
        spec.label.clone(),
        CaptureMethod::GroundTruth,
        spec.tsc_id,
        spec.template.len(),
        capture.truth.iter().map(|cir| cir.taps.clone()).collect(),
    )?;
    truth.snr_db = Some(spec.snr_db);
    write_capture(&args.out_truth, &truth, &created)?;

    outln!(
        "simulated {} burst(s) of scenario '{}' at {} dB SNR: {} samples at {} Hz \
         (oversample {})",
        spec.bursts,
        spec.label,
        spec.snr_db,
        iq.stream.len(),
        iq.stream.sample_rate_hz,
        spec.oversample
    );
    outln!("wrote {}", args.out_iq.display());
    outln!("wrote {}", args.out_truth.display());
    Ok(())
}

fn cmd_estimate(args: EstimateArgs) -> CliResult<()> {
    let iq = read_iq(&args.in_iq)?;
    let method = match args.method {
        MethodArg::Ls => EstimationMethod::LeastSquares,
        MethodArg::Corr => EstimationMethod::Correlation,
    };
    let window = match args.window {
        WindowArg::Central16 => TrainingWindow::Central16,
        WindowArg::Full26 => TrainingWindow::Full26,
    };
    if !(args.threshold > 0.0 && args.threshold < 1.0) {
        return Err(CliError::Usage(format!(
            "--threshold must lie in (0, 1), got {}",
            args.threshold
        )));
    }
    let config = StreamConfig {
        method,
        window,
        cl: args.cl,
        tsc_id: args.tsc,
        oversample: iq.oversample.max(1) as usize,
        power_threshold: args.threshold,
        freq_offset_hz: args.freq_offset_hz,
        label: args.label.unwrap_or_else(|| iq.scenario.clone()),
    };
    let dataset = estimate_stream(&iq.stream, &config)?;
    let created = args.created.unwrap_or_else(timestamp::utc_now);
    write_capture(&args.out_capture, &dataset, &created)?;

    let detected = sounder_core::sync::detect_bursts(
        &iq.stream.samples,
        config.oversample,
        config.power_threshold,
    )
    .len();
    outln!(
        "accepted {} of {} detected burst(s) ({} skipped)",
        dataset.len(),
        detected,
        detected - dataset.len()
    );
    outln!("wrote {}", args.out_capture.display());

    if let Some(truth_path) = args.truth {
        let truth = read_capture(&truth_path)?;
        if dataset.len() == truth.len() {
            let nmse = median_nmse(&dataset, &truth)?;
            outln!("median NMSE vs truth: {:.2} dB", 10.0 * nmse.log10());
        } else {
            outln!(
                "NMSE skipped: {} accepted burst(s) vs {} in the truth file, \
                 row alignment would be ambiguous",
                dataset.len(),
                truth.len()
            );
        }
    }
    Ok(())
}

/// Median over bursts of ||est - truth||^2 / ||truth||^2 with rows matched
/// by order; the caller checks that the counts agree.
fn median_nmse(est: &CaptureDataset, truth: &CaptureDataset) -> CliResult<f64> {
    if est.cl != truth.cl {
        return Err(CliError::Usage(format!(
            "estimate has cl {} but truth has cl {}",
            est.cl, truth.cl
        )));
    }
    let mut values: Vec<f64> = Vec::with_capacity(est.len());
    for (row, truth_row) in est.rows.iter().zip(&truth.rows) {
        let err: f64 = row
            .iter()
            .zip(truth_row)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let energy: f64 = truth_row.iter().map(|t| t.norm_sqr()).sum();
        if energy > 0.0 {
            values.push(err / energy);
        }
    }
    if values.is_empty() {
        return Err(CliError::Empty("no overlapping bursts between estimate and truth".into()));
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(values[values.len() / 2])
}

/// Sample vector selected by --index or --pooled.
fn select_samples(
    dataset: &CaptureDataset,
    index: Option<usize>,
    pooled: bool,
) -> CliResult<(String, Vec<f64>)> {
    match (index, pooled) {
        (Some(i), false) => Ok((format!("index {i}"), dataset.index_magnitudes(i)?)),
        (None, true) => Ok(("pooled".into(), dataset.pooled_magnitudes())),
        (None, false) => Err(CliError::Usage(
            "select samples with --index <i> or --pooled".into(),
        )),
        (Some(_), true) => unreachable!("clap conflicts_with"),
    }
}

fn fit_family(family: DistFamily, samples: &[f64]) -> CliResult<DistributionFit> {
    let fit = match family {
        DistFamily::Rayleigh => fit_rayleigh(samples),
        DistFamily::Normal => fit_normal(samples),
        DistFamily::Lognormal => fit_lognormal(samples),
        DistFamily::Gamma => fit_gamma(samples),
    };
    fit.map_err(CliError::from)
}

fn describe_fit(fit: &DistributionFit) -> String {
    match fit {
        DistributionFit::Rayleigh { sigma } => format!("rayleigh sigma = {sigma:.6e}"),
        DistributionFit::Normal { mean, variance } => {
            format!("normal mean = {mean:.6e} variance = {variance:.6e}")
        }
        DistributionFit::Lognormal { log_mean, log_sigma, median } => format!(
            "lognormal shape = {log_sigma:.6} log_mean = {log_mean:.6} median = {median:.6e}"
        ),
        DistributionFit::Gamma { shape, scale } => {
            format!("gamma shape = {shape:.6} scale = {scale:.6e}")
        }
    }
}

fn parse_families(names: &Option<Vec<String>>) -> CliResult<Vec<DistFamily>> {
    match names {
        None => Ok(DistFamily::ALL.to_vec()),
        Some(list) => list
            .iter()
            .map(|n| {
                DistFamily::parse(n.trim()).ok_or_else(|| {
                    CliError::Usage(format!(
                        "unknown family '{n}' (rayleigh, normal, lognormal, gamma)"
                    ))
                })
            })
            .collect(),
    }
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let dataset = read_capture(&args.capture)?;
    let (selection, samples) = select_samples(&dataset, args.index, args.pooled)?;
    let families = parse_families(&args.families)?;

    outln!(
        "dataset '{}' method {} {} n={}",
        dataset.label,
        dataset.method.name(),
        selection,
        samples.len()
    );

    let mut lognormal_shape = None;
    let mut gamma_shape = None;
    for family in &families {
        let fit = fit_family(*family, &samples)?;
        outln!("{}", describe_fit(&fit));
        match fit {
            DistributionFit::Lognormal { log_sigma, .. } => lognormal_shape = Some(log_sigma),
            DistributionFit::Gamma { shape, .. } => gamma_shape = Some(shape),
            _ => {}
        }
    }

    // Moment row in the report column order: lognormal shape, gamma shape,
    // then the sample moments.
    let moments = sample_moments(&samples)?;
    let fmt_shape = |s: Option<f64>| s.map_or("-".to_string(), |v| format!("{v:.4}"));
    outln!(
        "moments shape_lognormal={} shape_gamma={} mean={:.4e} variance={:.4e} skew={:.4} kurtosis={:.4}",
        fmt_shape(lognormal_shape),
        fmt_shape(gamma_shape),
        moments.mean,
        moments.variance,
        moments.skew,
        moments.excess_kurtosis
    );

    let pdf = empirical_pdf(&samples, args.bins)?;
    outln!("pdf bins={}", pdf.bins());
    for (center, density) in pdf.bin_centers().iter().zip(&pdf.density) {
        outln!("{center:.6e} {density:.6e}");
    }
    Ok(())
}

fn cmd_chisq(args: ChisqArgs) -> CliResult<()> {
    let dataset = read_capture(&args.capture)?;
    let (selection, samples) = select_samples(&dataset, args.index, args.pooled)?;
    let family = DistFamily::parse(args.family.trim()).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown family '{}' (rayleigh, normal, lognormal, gamma)",
            args.family
        ))
    })?;
    let fit = fit_family(family, &samples)?;

    // Observed: empirical density array. Expected: fitted density at the
    // bin centers, floored at 1e-12 with a notice.
    let pdf = empirical_pdf(&samples, args.bins)?;
    let observed = pdf.density.clone();
    let mut floored = 0usize;
    let expected: Vec<f64> = pdf
        .bin_centers()
        .iter()
        .map(|&c| {
            let e = pdf_value(&fit, c);
            if e < 1e-12 {
                floored += 1;
                1e-12
            } else {
                e
            }
        })
        .collect();
    let result = chi_square(&observed, &expected)?;
    outln!(
        "dataset '{}' {} family {} chi_square {:.4} dof {} p_value {:.6e}",
        dataset.label,
        selection,
        family.name(),
        result.statistic,
        result.dof,
        result.p_value
    );
    if floored > 0 {
        outln!("notice: {floored} expected bin(s) below 1e-12 floored");
    }
    Ok(())
}

fn cmd_pca(args: PcaArgs) -> CliResult<()> {
    let datasets: Vec<CaptureDataset> = args
        .captures
        .iter()
        .map(|p| read_capture(p))
        .collect::<CliResult<_>>()?;
    let pairs: Vec<(&CaptureDataset, &str)> =
        datasets.iter().map(|d| (d, d.label.as_str())).collect();
    let clf = train_classifier(&pairs, args.dim).map_err(CliError::from)?;
    if let Some((a, b)) = clf.coincident_labels() {
        eprintln!("warning: centroids for '{a}' and '{b}' coincide");
    }

    let variance = clf.model.explained_variance();
    let parts: Vec<String> = variance
        .iter()
        .take(args.dim)
        .enumerate()
        .map(|(i, v)| format!("pc{}={:.1}%", i + 1, 100.0 * v))
        .collect();
    outln!("explained_variance {}", parts.join(" "));

    let mut labels: Vec<String> = Vec::new();
    let mut points: Vec<(usize, f64, f64)> = Vec::new();
    let mut score_lines: Vec<String> = Vec::new();
    for dataset in &datasets {
        let scores = clf.model.project(&dataset.magnitude_matrix())?;
        let label_idx = match labels.iter().position(|l| l == &dataset.label) {
            Some(i) => i,
            None => {
                labels.push(dataset.label.clone());
                labels.len() - 1
            }
        };
        for r in 0..scores.rows {
            let row: Vec<String> =
                (0..args.dim).map(|d| format!("{:.6e}", scores.get(r, d))).collect();
            score_lines.push(format!("{} {}", dataset.label, row.join(" ")));
            points.push((label_idx, scores.get(r, 0), scores.get(r, 1.min(args.dim - 1))));
        }
    }

    // Artifacts land before the score dump, so a truncated pipe never
    // loses them.
    if let Some(model_path) = &args.out_model {
        write_model(model_path, &clf)?;
        outln!("wrote {}", model_path.display());
    }
    if let Some(svg_path) = &args.svg {
        let body = scatter_svg(&labels, &points);
        std::fs::write(svg_path, body).map_err(|e| CliError::io(svg_path, e))?;
        outln!("wrote {}", svg_path.display());
    }
    for line in &score_lines {
        outln!("{line}");
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> CliResult<()> {
    let clf = read_model(&args.model)?;
    let dataset = read_capture(&args.capture)?;
    let mags = dataset.magnitude_matrix();
    let truth_label = clf
        .centroids
        .iter()
        .any(|(l, _)| *l == dataset.label)
        .then_some(dataset.label.as_str());

    let header: Vec<String> = clf
        .centroids
        .iter()
        .map(|(l, _)| format!("dist_{l}"))
        .collect();
    outln!("row label {}", header.join(" "));
    let mut correct = 0usize;
    for r in 0..mags.rows {
        let result = clf.classify(mags.row(r)).map_err(CliError::from)?;
        let dists: Vec<String> =
            result.distances.iter().map(|(_, d)| format!("{d:.4}")).collect();
        outln!("{r} {} {}", result.label, dists.join(" "));
        if Some(result.label.as_str()) == truth_label {
            correct += 1;
        }
    }
    if truth_label.is_some() {
        outln!(
            "accuracy {correct}/{} = {:.1}%",
            mags.rows,
            100.0 * correct as f64 / mags.rows as f64
        );
    }
    Ok(())
}
