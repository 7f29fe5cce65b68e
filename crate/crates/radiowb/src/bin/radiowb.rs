use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use radiowb::{cli, router, Config, Workbench};
use radiowb_graph::{Error, GraphSpec};

#[derive(Parser)]
#[command(name = "radiowb", version, about = "Radiomics workbench")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a graph document and write per-node payloads plus run.json.
    Run {
        graph: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        parallelism: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        /// Root directory of the stores.
        #[arg(long)]
        root: PathBuf,
        /// Directory that volume paths and run data resolve against.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 2)]
        workers: usize,
    },
}

fn run(graph: PathBuf, data: PathBuf, out: PathBuf, parallelism: usize, seed: u64) -> ExitCode {
    let spec = match std::fs::read_to_string(&graph).map_err(Error::from).and_then(|t| GraphSpec::parse(&t)) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{}: {e}", graph.display());
            return ExitCode::from(2);
        }
    };
    match cli::run_to_dir(&spec, &data, &out, parallelism, seed) {
        Ok((_, summary)) => {
            for (id, n) in &summary.nodes {
                let detail = n.error.as_deref().unwrap_or("");
                println!("{id:<24} {:<16} {:>9.1} ms  {detail}", format!("{:?}", n.status), n.elapsed_ms);
            }
            if summary.failed().is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::Invalid(diagnostics)) => {
            for d in diagnostics {
                eprintln!("{}: {}", d.code, d.message);
            }
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}

fn serve(addr: String, root: PathBuf, data: PathBuf, workers: usize) -> ExitCode {
    let wb = match Workbench::open(Config { root, data_dir: data, workers }) {
        Ok(wb) => wb,
        Err(e) => {
            eprintln!("cannot open stores: {e}");
            return ExitCode::from(2);
        }
    };
    let rt = tokio::runtime::Runtime::new().expect("tokio runtime");
    rt.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(&addr).await {
            Ok(l) => l,
            Err(e) => {
                eprintln!("cannot bind {addr}: {e}");
                return ExitCode::from(2);
            }
        };
        eprintln!("listening on {addr}");
        match axum::serve(listener, router(wb)).await {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(1)
            }
        }
    })
}

fn main() -> ExitCode {
    match Args::parse().command {
        Command::Run { graph, data, out, parallelism, seed } => run(graph, data, out, parallelism, seed),
        Command::Serve { addr, root, data, workers } => serve(addr, root, data, workers),
    }
}
