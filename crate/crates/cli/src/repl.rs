use std::io::{self, BufRead, Write};

use dcr_core::dsl::parse_expr;
use dcr_core::engine::EffectReport;
use dcr_core::expr::Expr;
use dcr_core::json::marking_to_json;
use dcr_core::{
    advance_time, enabled_events, execute, is_accepting, parse_duration, Duration, EventId, Graph, Value,
};

const HELP: &str = "commands:
  enabled <role>                 list events the role may execute
  exec <role> <event> [value]    execute an event, with a value for input events
  advance <duration>             let time pass (ISO-8601 such as PT1H, or steps)
  marking                        print the current marking as JSON
  accepting                      print whether the run is accepting
  reset                          return to the initial marking
  quit                           leave";

/// Reads REPL commands line by line until `quit` or end of input.
pub fn run(graph: &Graph, input: impl BufRead, mut out: impl Write, interactive: bool) -> io::Result<()> {
    let mut marking = graph.initial_marking().clone();
    let mut now: u64 = 0;
    if interactive {
        writeln!(out, "simulating {} (type `help` for commands)", graph.name())?;
    }
    let mut lines = input.lines();
    loop {
        if interactive {
            write!(out, "[t={now}] > ")?;
            out.flush()?;
        }
        let Some(line) = lines.next() else { break };
        let line = line?;
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            [] => {}
            ["quit" | "exit"] => break,
            ["help"] => writeln!(out, "{HELP}")?,
            ["enabled", role] => {
                let set = enabled_events(graph, &marking, role);
                if set.is_empty() {
                    writeln!(out, "(none)")?;
                }
                for id in set {
                    writeln!(out, "{id}")?;
                }
            }
            ["exec", role, event, rest @ ..] => {
                let value = match parse_value(rest) {
                    Ok(v) => v,
                    Err(msg) => {
                        writeln!(out, "rejected: {msg}")?;
                        continue;
                    }
                };
                let Ok(id) = EventId::new(*event) else {
                    writeln!(out, "rejected: unknown event `{event}`")?;
                    continue;
                };
                match execute(graph, &marking, &id, role, value) {
                    Ok((next, report)) => {
                        marking = next;
                        describe(&mut out, &report)?;
                    }
                    Err(e) => writeln!(out, "rejected: {e}")?,
                }
            }
            ["advance", amount] => match parse_amount(amount) {
                Ok(delta) => match advance_time(&marking, delta) {
                    Ok(next) => {
                        marking = next;
                        now = now.saturating_add(delta.steps());
                        writeln!(out, "time is now {now}")?;
                    }
                    Err(e) => writeln!(out, "rejected: {e}")?,
                },
                Err(msg) => writeln!(out, "rejected: {msg}")?,
            },
            ["marking"] => writeln!(out, "{}", marking_to_json(&marking))?,
            ["accepting"] => writeln!(out, "{}", is_accepting(&marking))?,
            ["reset"] => {
                marking = graph.initial_marking().clone();
                now = 0;
                writeln!(out, "reset")?;
            }
            _ => writeln!(out, "unknown command {:?}; type `help`", line.trim())?,
        }
    }
    Ok(())
}

fn parse_amount(text: &str) -> Result<Duration, String> {
    if let Ok(steps) = text.parse::<u64>() {
        return Ok(Duration::from_steps(steps));
    }
    parse_duration(text).map_err(|e| e.to_string())
}

/// A value is a DSL literal: an integer, `true`, `false` or a quoted
/// string. Any other text is taken verbatim as a string.
fn parse_value(words: &[&str]) -> Result<Option<Value>, String> {
    if words.is_empty() {
        return Ok(None);
    }
    let text = words.join(" ");
    match parse_expr(&text) {
        Ok(Expr::Literal(v)) => Ok(Some(v)),
        _ if text.starts_with('"') => Err(format!("malformed string literal {text}")),
        _ => Ok(Some(Value::Text(text))),
    }
}

fn describe(out: &mut impl Write, r: &EffectReport) -> io::Result<()> {
    write!(out, "executed {}", r.executed_event)?;
    if let Some(v) = &r.new_value {
        write!(out, " = {v}")?;
    }
    writeln!(out)?;
    let list = |set: &mut dyn Iterator<Item = String>| set.collect::<Vec<_>>().join(", ");
    if !r.included.is_empty() {
        writeln!(out, "  included: {}", list(&mut r.included.iter().map(|e| e.to_string())))?;
    }
    if !r.excluded.is_empty() {
        writeln!(out, "  excluded: {}", list(&mut r.excluded.iter().map(|e| e.to_string())))?;
    }
    if !r.responses_set.is_empty() {
        writeln!(
            out,
            "  required: {}",
            list(&mut r.responses_set.iter().map(|(e, d)| format!("{e} (deadline {d})")))
        )?;
    }
    if !r.cancelled.is_empty() {
        writeln!(out, "  cancelled: {}", list(&mut r.cancelled.iter().map(|e| e.to_string())))?;
    }
    if !r.values_copied.is_empty() {
        writeln!(out, "  values: {}", list(&mut r.values_copied.iter().map(|(e, v)| format!("{e} = {v}"))))?;
    }
    if !r.completed_subprocesses.is_empty() {
        writeln!(
            out,
            "  completed: {}",
            list(&mut r.completed_subprocesses.iter().map(|e| e.to_string()))
        )?;
    }
    for d in &r.diagnostics {
        writeln!(out, "  note: {d}")?;
    }
    Ok(())
}
