use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tabgauge::fixtures;
use tabgauge::metrics::{ClusterWeights, Gamma};
use tabgauge::report::{emit_report, evaluate_detailed, EvaluationConfig, ReportFormat};
use tabgauge::stats::Bins;
use tabgauge::tabular::{load_csv, load_csv_with_schema, write_csv};
use tabgauge::wgan::{augment_with_trace, GanConfig, NoiseKind};
use tabgauge::Result;

#[derive(Parser)]
#[command(
    name = "tabgauge",
    version,
    about = "Augment small tables with a WGAN and gauge synthetic data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a WGAN on a CSV table and write `rate * n` synthetic rows.
    Augment {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rate: usize,
        #[arg(long, default_value_t = 500)]
        steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        /// Write per-step losses as `step,gen_loss,critic_loss`.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        latent_dim: Option<usize>,
        #[arg(long, default_value_t = 2)]
        hidden_layers: usize,
        #[arg(long, default_value_t = 32)]
        hidden_width: usize,
        #[arg(long, default_value_t = 10)]
        batch_size: usize,
        #[arg(long, default_value_t = 1)]
        n_critic: usize,
        #[arg(long, default_value_t = 1e-5)]
        learning_rate: f64,
        #[arg(long, default_value_t = 0.01)]
        clip: f64,
        #[arg(long, default_value = "uniform", value_parser = parse_noise)]
        noise: NoiseKind,
    },
    /// Compare a synthetic table against the real one and write a report.
    Evaluate {
        #[arg(long)]
        real: PathBuf,
        #[arg(long)]
        synth: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        clusters: usize,
        /// Weight clusters by size instead of uniformly.
        #[arg(long)]
        size_weighted: bool,
        /// RBF bandwidth, or `auto` for the median heuristic.
        #[arg(long, default_value = "auto", value_parser = parse_gamma)]
        gamma: Gamma,
        #[arg(long, default_value_t = 50)]
        subsamples: usize,
        #[arg(long)]
        subsample_size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        dim: usize,
        /// Bin count, or `auto` for Sturges' rule.
        #[arg(long, default_value = "auto", value_parser = parse_bins)]
        bins: Bins,
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        plots: Option<PathBuf>,
        #[arg(long)]
        markdown: Option<PathBuf>,
        /// Include the raw barcode-distance samples in the report.
        #[arg(long)]
        emit_raw: bool,
    },
    /// Write one of the bundled seeded datasets.
    Fixtures {
        #[arg(long)]
        name: String,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        rows: Option<usize>,
    },
}

fn parse_gamma(s: &str) -> std::result::Result<Gamma, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Gamma::Auto);
    }
    match s.parse::<f64>() {
        Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Fixed(g)),
        _ => Err(format!("expected `auto` or a positive number, got {s:?}")),
    }
}

fn parse_bins(s: &str) -> std::result::Result<Bins, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Bins::Auto);
    }
    match s.parse::<usize>() {
        Ok(k) if k >= 2 => Ok(Bins::Fixed(k)),
        _ => Err(format!("expected `auto` or an integer >= 2, got {s:?}")),
    }
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "uniform" => Ok(NoiseKind::Uniform),
        "normal" => Ok(NoiseKind::Normal),
        _ => Err(format!("expected `uniform` or `normal`, got {s:?}")),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Augment {
            input,
            rate,
            steps,
            seed,
            output,
            trace,
            latent_dim,
            hidden_layers,
            hidden_width,
            batch_size,
            n_critic,
            learning_rate,
            clip,
            noise,
        } => {
            let real = load_csv(&input)?;
            let cfg = GanConfig {
                latent_dim,
                hidden_layers,
                hidden_width,
                batch_size,
                n_critic,
                learning_rate,
                clip,
                steps,
                seed,
                noise,
            };
            let (synth, losses) = augment_with_trace(&real, rate, &cfg)?;
            write_csv(&synth, &output)?;
            if let Some(path) = trace {
                losses.write_csv(path)?;
            }
        }
        Command::Evaluate {
            real,
            synth,
            seed,
            clusters,
            size_weighted,
            gamma,
            subsamples,
            subsample_size,
            dim,
            bins,
            report,
            plots,
            markdown,
            emit_raw,
        } => {
            let real = load_csv(&real)?;
            let synth = load_csv_with_schema(&synth, real.schema())?;
            let cfg = EvaluationConfig {
                clusters,
                cluster_weights: if size_weighted {
                    ClusterWeights::BySize
                } else {
                    ClusterWeights::Uniform
                },
                gamma,
                subsample_size,
                replicates: subsamples,
                homology_dim: dim,
                seed,
                bins,
                emit_raw,
            };
            let (rep, plot_data) = evaluate_detailed(&real, &synth, &cfg)?;
            emit_report(&rep, None, ReportFormat::Json, &report)?;
            if let Some(path) = markdown {
                emit_report(&rep, None, ReportFormat::Markdown, path)?;
            }
            if let Some(path) = plots {
                emit_report(&rep, Some(&plot_data), ReportFormat::PlotCsv, path)?;
            }
        }
        Command::Fixtures {
            name,
            output,
            seed,
            rows,
        } => {
            let ds = fixtures::by_name(&name, rows, seed)?;
            write_csv(&ds, &output)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("TABGAUGE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|n| *n > 0)
    {
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
