use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use dcr_core::conformance::{load_trace, replay as run_replay, AgentPolicy};
use dcr_core::dsl::{parse_graph_named, serialize_graph};
use dcr_core::json::marking_from_json;
use dcr_core::patterns::{catalog, find};
use dcr_core::{enabled_events, Graph};

use crate::style;

type CmdResult = Result<ExitCode, String>;

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph, String> {
    let text = read(path)?;
    parse_graph_named(&text, &path.display().to_string()).map_err(|e| e.to_string())
}

/// Loads a model that must be free of validation errors, optionally
/// starting from a marking read from JSON.
fn load_runnable(path: &Path, marking: Option<&Path>) -> Result<Graph, String> {
    let mut graph = load_graph(path)?;
    if let Some(marking) = marking {
        let m = marking_from_json(&read(marking)?).map_err(|e| format!("{}: {e}", marking.display()))?;
        graph = graph.with_initial(m);
    }
    let report = dcr_core::validate(&graph);
    match report.errors.first() {
        Some(first) => Err(format!("{}: {first}", path.display())),
        None => Ok(graph),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), String> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

pub fn validate(file: &Path) -> CmdResult {
    let graph = load_graph(file)?;
    let report = dcr_core::validate(&graph);
    for finding in &report.errors {
        println!("{} {finding}", style::error("error:"));
    }
    for finding in &report.warnings {
        println!("{} {finding}", style::warning("warning:"));
    }
    if report.is_valid() {
        println!(
            "ok: {} events, {} relations, {} warnings",
            graph.events().len(),
            graph.relations().len(),
            report.warnings.len()
        );
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

pub fn enabled(file: &Path, role: &str, marking: Option<&Path>) -> CmdResult {
    let graph = load_runnable(file, marking)?;
    let mut out = String::new();
    for id in enabled_events(&graph, graph.initial_marking(), role) {
        out.push_str(id.as_str());
        out.push('\n');
    }
    emit(&out, None)?;
    Ok(ExitCode::SUCCESS)
}

pub fn simulate(file: &Path) -> CmdResult {
    let graph = load_runnable(file, None)?;
    let stdin = io::stdin();
    let interactive = std::io::IsTerminal::is_terminal(&stdin);
    crate::repl::run(&graph, stdin.lock(), io::stdout().lock(), interactive).map_err(|e| e.to_string())?;
    Ok(ExitCode::SUCCESS)
}

pub fn replay(file: &Path, trace: &Path, agents: &[String]) -> CmdResult {
    let graph = load_runnable(file, None)?;
    let entries = load_trace(&read(trace)?).map_err(|e| format!("{}: {e}", trace.display()))?;
    let policies: Vec<AgentPolicy> = agents.iter().map(AgentPolicy::at_deadline).collect();
    let verdict = run_replay(&graph, &entries, &policies);
    println!("{}", verdict.to_json());
    Ok(if verdict.is_conformant() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn pattern(name: Option<&str>, params: &[String], output: Option<&Path>) -> CmdResult {
    let Some(name) = name else {
        let mut out = String::new();
        for d in catalog() {
            out.push_str(d.name);
            out.push('\n');
        }
        emit(&out, output)?;
        return Ok(ExitCode::SUCCESS);
    };
    let descriptor = find(name).map_err(|e| e.to_string())?;
    let overrides = params
        .iter()
        .map(|p| {
            p.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| format!("parameter {p:?} is not of the form key=value"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let text = if overrides.is_empty() {
        descriptor.source.to_string()
    } else {
        serialize_graph(&descriptor.build_with(&overrides).map_err(|e| e.to_string())?)
    };
    emit(&text, output)?;
    Ok(ExitCode::SUCCESS)
}

pub fn export_dot(file: &Path, marking: Option<&Path>, output: Option<&Path>) -> CmdResult {
    let graph = load_runnable(file, marking)?;
    emit(&dcr_core::dot::export_dot(&graph, Some(graph.initial_marking())), output)?;
    Ok(ExitCode::SUCCESS)
}

pub fn serve(host: std::net::IpAddr, port: u16, cors: bool, ttl: u64, static_dir: Option<PathBuf>) -> CmdResult {
    let config = dcr_service::Config {
        cors,
        idle_ttl: std::time::Duration::from_secs(ttl),
        static_dir,
    };
    let runtime = tokio::runtime::Runtime::new().map_err(|e| e.to_string())?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| format!("cannot bind {host}:{port}: {e}"))?;
        let addr = listener.local_addr().map_err(|e| e.to_string())?;
        eprintln!("listening on http://{addr}");
        dcr_service::serve_on(listener, config).await.map_err(|e| e.to_string())
    })?;
    Ok(ExitCode::SUCCESS)
}
