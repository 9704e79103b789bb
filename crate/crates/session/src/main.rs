use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use clap::Parser;
use tracing::info;
use xai_core::{open_model, Pipeline, Preprocessing};
use xai_session::{router, ServiceOptions, SessionService};

#[derive(Debug, Parser)]
#[command(name = "xai-session", version, about = "Interactive mask-and-classify session service")]
struct Args {
    /// ONNX classifier path, or `stub` for the built-in deterministic model.
    #[arg(long, env = "XAI_MODEL", default_value = "stub")]
    model: String,

    /// 1000-line label file; defaults to the bundled ImageNet labels.
    #[arg(long, env = "XAI_LABELS")]
    labels: Option<PathBuf>,

    #[arg(long, env = "XAI_CORPUS_DIR")]
    corpus: Option<PathBuf>,

    /// Persist sessions here; without it sessions live in memory only.
    #[arg(long, env = "XAI_STORE_DIR")]
    store: Option<PathBuf>,

    #[arg(long, env = "XAI_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,

    /// Remote image API URL template containing `{selector}`.
    #[arg(long, env = "XAI_IMAGE_API")]
    image_api: Option<String>,

    #[arg(long, env = "XAI_SESSION_TTL_SECS")]
    ttl_secs: Option<u64>,

    /// `direct` (224×224 resize) or `crop` (256 resize + center crop).
    #[arg(long, env = "XAI_PREPROCESSING", default_value = "direct")]
    preprocessing: Preprocessing,
}

#[tokio::main]
async fn main() -> Result<(), Box<dyn std::error::Error>> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();

    let model = open_model(&args.model, args.labels.as_deref())?;
    info!(model_id = model.model_id(), "model loaded");
    let service = SessionService::new(
        Pipeline::new(model, args.preprocessing),
        ServiceOptions {
            corpus_dir: args.corpus,
            image_api: args.image_api,
            store_dir: args.store,
            ttl: args.ttl_secs.map(Duration::from_secs),
            ..Default::default()
        },
    )?;

    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, router(Arc::new(service)))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
