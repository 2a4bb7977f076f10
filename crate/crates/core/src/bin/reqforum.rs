use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use reqforum::model::TopicState;
use reqforum::service::{http, Config, Fixture, Forum};

/// Administration for a reqforum instance.
#[derive(Parser)]
#[command(name = "reqforum", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load stakeholders, templates, gifts and tests from a JSON fixture.
    Seed {
        #[arg(long, short)]
        config: PathBuf,
        fixture: PathBuf,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, short)]
        config: PathBuf,
    },
    /// Write aggregated topic views as a JSON array.
    Export {
        #[arg(long, short)]
        config: PathBuf,
        /// Only topics in these states; repeatable.
        #[arg(long = "state", value_parser = parse_state)]
        states: Vec<TopicState>,
        out: PathBuf,
    },
    /// Write the score ledger as JSON lines.
    Ledger {
        #[arg(long, short)]
        config: PathBuf,
        out: PathBuf,
    },
}

fn parse_state(raw: &str) -> Result<TopicState, String> {
    raw.parse().map_err(|e: reqforum::Error| e.to_string())
}

fn open(config: &Path) -> Result<Forum, String> {
    let config = Config::load(config).map_err(|e| e.to_string())?;
    Forum::from_config(config).map_err(|e| e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, String> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Seed { config, fixture } => {
            let fixture = Fixture::load(&fixture).map_err(|e| e.to_string())?;
            let forum = open(&config)?;
            let report = fixture.apply(&forum).map_err(|e| e.to_string())?;
            println!("{}", serde_json::to_string(&report).map_err(|e| e.to_string())?);
            Ok(())
        }
        Command::Serve { config } => {
            let forum = Arc::new(open(&config)?);
            let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&forum.config().listen)
                    .await
                    .map_err(|e| format!("cannot listen on {}: {e}", forum.config().listen))?;
                let addr = listener.local_addr().map_err(|e| e.to_string())?;
                println!("listening on http://{addr}");
                std::io::stdout().flush().ok();
                http::serve(forum, listener).await.map_err(|e| e.to_string())
            })
        }
        Command::Export { config, states, out } => {
            let forum = open(&config)?;
            let filter = (!states.is_empty()).then_some(states.as_slice());
            let views = forum.export_all(filter).map_err(|e| e.to_string())?;
            let mut file = create(&out)?;
            serde_json::to_writer_pretty(&mut file, &views).map_err(|e| e.to_string())?;
            file.write_all(b"\n")
                .and_then(|_| file.flush())
                .map_err(|e| format!("cannot write {}: {e}", out.display()))
        }
        Command::Ledger { config, out } => {
            let forum = open(&config)?;
            let file = create(&out)?;
            forum.export_ledger(file).map_err(|e| e.to_string())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("reqforum: {message}");
            ExitCode::FAILURE
        }
    }
}
