//! `dcr`: validate, simulate, replay and export DCR graphs.

mod commands;
mod repl;
mod style;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "dcr", version, about = "Timed DCR graphs with data, sub-processes and roles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and check a model; exits 1 when it has errors.
    Validate { file: PathBuf },
    /// List the events a role may execute, one per line.
    Enabled {
        file: PathBuf,
        #[arg(long)]
        role: String,
        /// Marking JSON to start from instead of the model's initial marking.
        #[arg(long)]
        marking: Option<PathBuf>,
    },
    /// Interactive line-based simulation reading commands from stdin.
    Simulate { file: PathBuf },
    /// Check a JSON Lines trace against a model and print the verdict.
    Replay {
        file: PathBuf,
        trace: PathBuf,
        /// Role whose due events fire automatically at their deadline.
        #[arg(long = "agent")]
        agents: Vec<String>,
    },
    /// Print a catalog pattern as DSL, or list the catalog when no name is given.
    Pattern {
        name: Option<String>,
        /// Override a parameter, e.g. `--param limit=50`.
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a model in Graphviz DOT.
    ExportDot {
        file: PathBuf,
        #[arg(long)]
        marking: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Start the HTTP simulation service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long)]
        cors: bool,
        /// Address to bind.
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Idle time in seconds after which a session is dropped.
        #[arg(long, default_value_t = 3600)]
        ttl: u64,
        /// Directory of static web assets to serve alongside the API.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { file } => commands::validate(&file),
        Command::Enabled { file, role, marking } => commands::enabled(&file, &role, marking.as_deref()),
        Command::Simulate { file } => commands::simulate(&file),
        Command::Replay { file, trace, agents } => commands::replay(&file, &trace, &agents),
        Command::Pattern { name, params, output } => commands::pattern(name.as_deref(), &params, output.as_deref()),
        Command::ExportDot { file, marking, output } => {
            commands::export_dot(&file, marking.as_deref(), output.as_deref())
        }
        Command::Serve {
            port,
            cors,
            host,
            ttl,
            static_dir,
        } => commands::serve(host, port, cors, ttl, static_dir),
    };
    match result {
        Ok(code) => code,
        Err(message) => {
            eprintln!("{} {message}", style::error("error:"));
            ExitCode::from(2)
        }
    }
}
