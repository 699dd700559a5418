use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use cropplan_cli::{cmd_compare, cmd_rank, cmd_solve, http, CliError};
use cropplan_core::pareto::{GridMode, DEFAULT_GRID_SIZE};
use cropplan_core::scenario::DEMO_SCENARIO_TEXT;
use cropplan_core::service::SessionStore;

#[derive(Parser)]
#[command(name = "cropplan", version, about = "Collaborative crop planning: Pareto fronts and group rankings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the Pareto front of a scenario.
    Solve {
        /// Scenario TOML file.
        #[arg(long)]
        scenario: PathBuf,
        /// Grid points per constrained objective.
        #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
        grid_size: usize,
        /// `diagonal` pairs the two grids, `full` solves every combination.
        #[arg(long, default_value = "diagonal")]
        mode: GridMode,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a ballot file with weighted Borda.
    Rank {
        /// Ballot set document.
        #[arg(long)]
        ballots: PathBuf,
        /// Front export, alternative set or JSON list of ids.
        #[arg(long)]
        alternatives: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare two rankings position by position.
    Compare {
        /// First ranking document.
        first: PathBuf,
        /// Second ranking document.
        second: PathBuf,
        /// Front export or alternative set carrying the objectives.
        #[arg(long)]
        alternatives: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the session service.
    Serve {
        /// Directory holding the event log; created when missing.
        #[arg(long)]
        state_dir: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
    /// Print the bundled demo scenario.
    Demo {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

async fn serve(state_dir: &Path, listen: SocketAddr) -> Result<(), CliError> {
    let store = Arc::new(SessionStore::open(state_dir)?);
    let listener = tokio::net::TcpListener::bind(listen)
        .await
        .map_err(|source| CliError::Io { path: PathBuf::from(listen.to_string()), source })?;
    let addr = listener.local_addr().map_err(|source| CliError::Io { path: PathBuf::from(listen.to_string()), source })?;
    eprintln!("listening on {addr}");
    axum::serve(listener, http::router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| CliError::Io { path: PathBuf::from(addr.to_string()), source })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Solve { scenario, grid_size, mode, out } => {
            if grid_size == 0 {
                return Err(CliError::Usage("--grid-size must be at least 1".into()));
            }
            let summary = cmd_solve(&scenario, grid_size, mode, out.as_deref())?;
            eprintln!("{summary}");
        }
        Command::Rank { ballots, alternatives, out } => {
            cmd_rank(&ballots, &alternatives, out.as_deref())?;
        }
        Command::Compare { first, second, alternatives, out } => {
            cmd_compare(&first, &second, &alternatives, out.as_deref())?;
        }
        Command::Serve { state_dir, listen } => {
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Usage(e.to_string()))?;
            runtime.block_on(serve(&state_dir, listen))?;
        }
        Command::Demo { out } => match out {
            Some(path) => std::fs::write(&path, DEMO_SCENARIO_TEXT).map_err(|source| CliError::Io { path, source })?,
            None => print!("{DEMO_SCENARIO_TEXT}"),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
