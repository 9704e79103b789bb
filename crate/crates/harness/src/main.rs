use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xai_core::{decode_image, open_model, FillPolicy, Pipeline, Preprocessing};
use xai_harness::{
    occlusion_sweep, render_report, run_experiment, ExperimentManifest, HarnessError,
    ReportFormat, Result,
};

#[derive(Debug, Parser)]
#[command(name = "xai-harness", version, about = "Masking experiments and occlusion sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// ONNX classifier path, or `stub` for the built-in deterministic model.
    #[arg(long, env = "XAI_MODEL", default_value = "stub")]
    model: String,

    /// 1000-line label file; defaults to the bundled ImageNet labels.
    #[arg(long, env = "XAI_LABELS")]
    labels: Option<PathBuf>,

    /// `direct` (224×224 resize) or `crop` (256 resize + center crop).
    #[arg(long, default_value = "direct")]
    preprocessing: Preprocessing,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Baseline plus masked interactions for every manifest entry.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        /// mean, black, white or #RRGGBB; overrides the manifest.
        #[arg(long)]
        fill: Option<FillPolicy>,
        /// md, csv or json.
        #[arg(long, default_value = "md")]
        format: ReportFormat,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slide a filled square over the image and record baseline-class confidence.
    Sweep {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        patch: u32,
        #[arg(long)]
        stride: u32,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "mean")]
        fill: FillPolicy,
        /// csv or json.
        #[arg(long, default_value = "json")]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn pipeline(args: &ModelArgs) -> Result<Pipeline> {
    let model = open_model(&args.model, args.labels.as_deref())?;
    Ok(Pipeline::new(model, args.preprocessing))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| HarnessError::asset(path, e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| HarnessError::asset("<stdout>", e)),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            manifest,
            model,
            fill,
            format,
            out,
        } => {
            let manifest = ExperimentManifest::load(&manifest)?;
            let pipeline = pipeline(&model)?;
            let report = run_experiment(&pipeline, &manifest, fill)?;
            emit(out.as_deref(), &render_report(&report, format))?;
            for f in &report.failures {
                eprintln!(
                    "failed: {} / {}: {}",
                    f.name,
                    f.interaction.as_deref().unwrap_or("image"),
                    f.message
                );
            }
            Ok(if report.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Sweep {
            image,
            patch,
            stride,
            model,
            fill,
            format,
            out,
        } => {
            let bytes = std::fs::read(&image).map_err(|e| HarnessError::asset(&image, e))?;
            let decoded = decode_image(&bytes).map_err(|e| HarnessError::asset(&image, e))?;
            let pipeline = pipeline(&model)?;
            let heatmap = occlusion_sweep(&pipeline, &decoded, patch, stride, fill)?;
            let rendered = match format {
                ReportFormat::Csv => heatmap.to_csv(),
                ReportFormat::Json => {
                    let mut v = serde_json::to_vec_pretty(&heatmap).expect("heatmap serializes");
                    v.push(b'\n');
                    v
                }
                ReportFormat::Markdown => {
                    return Err(HarnessError::Usage("sweep supports csv or json output".into()))
                }
            };
            emit(out.as_deref(), &rendered)?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
