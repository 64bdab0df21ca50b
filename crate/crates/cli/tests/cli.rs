use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn patterns() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/patterns")
}

fn fixture(name: &str) -> PathBuf {
    patterns().join(name)
}

fn dcr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dcr"))
        .args(args)
        .env("DCR_NO_COLOR", "1")
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8(bytes.to_vec()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn enabled_lists_commit_for_user() {
    let out = dcr(&["enabled", path(&fixture("commit-and-reveal.dcr")), "--role", "user"]);
    assert!(out.status.success());
    assert_eq!(text(&out.stdout), "commit\n");
}

#[test]
fn enabled_starts_from_a_given_marking() {
    let dir = tempfile::tempdir().unwrap();
    let marking = dir.path().join("m.json");
    std::fs::write(
        &marking,
        r#"{"executed":{"commit":0},"required":{"reveal":"inf"},"included":["commit","reveal","decide"],"values":{"commit":"x"}}"#,
    )
    .unwrap();
    let out = dcr(&[
        "enabled",
        path(&fixture("commit-and-reveal.dcr")),
        "--role",
        "user",
        "--marking",
        path(&marking),
    ]);
    assert_eq!(text(&out.stdout), "reveal\n", "{}", text(&out.stderr));
}

#[test]
fn replay_prints_verdict_and_sets_exit_code() {
    let casino = fixture("casino.dcr");
    let out = dcr(&["replay", path(&casino), path(&fixture("traces/casino-happy-path.jsonl"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with(r#"{"status":"Conformant""#), "{}", text(&out.stdout));

    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.jsonl");
    std::fs::write(&trace, "{\"seq\":1,\"at\":0,\"role\":\"player\",\"event\":\"timeoutBet\"}\n").unwrap();
    let out = dcr(&["replay", path(&casino), path(&trace)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains(r#""status":"Violation""#));
    assert_eq!(out.stdout, dcr(&["replay", path(&casino), path(&trace)]).stdout);
}

#[test]
fn replay_with_agent() {
    let out = dcr(&[
        "replay",
        path(&fixture("rate-limitation.dcr")),
        path(&fixture("traces/rate-limitation.jsonl")),
        "--agent",
        "system",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stdout));
}

#[test]
fn validate_exit_codes() {
    let out = dcr(&["validate", path(&fixture("casino.dcr"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).starts_with("ok: 9 events"));

    let dir = tempfile::tempdir().unwrap();
    let broken = dir.path().join("broken.dcr");
    std::fs::write(&broken, "graph g { event a; condition a -> ghost; }").unwrap();
    let out = dcr(&["validate", path(&broken)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out.stdout).contains("error:"));

    std::fs::write(&broken, "graph g {\n  event a roles [;\n}").unwrap();
    let out = dcr(&["validate", path(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.starts_with("error: ") && err.contains("broken.dcr:2:"), "{err}");
    assert!(!err.contains('\x1b'));

    assert_eq!(dcr(&["validate", "/no/such/file.dcr"]).status.code(), Some(2));
    assert_eq!(dcr(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn pattern_emits_fixtures_and_applies_params() {
    let out = dcr(&["pattern"]);
    let names = text(&out.stdout);
    assert_eq!(names.lines().count(), 20);
    assert!(names.lines().any(|n| n == "casino"));

    let out = dcr(&["pattern", "speed-bump"]);
    assert_eq!(text(&out.stdout), std::fs::read_to_string(fixture("speed-bump.dcr")).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("rl.dcr");
    let out = dcr(&["pattern", "rate-limitation", "--param", "limit=50", "-o", path(&file)]);
    assert!(out.status.success(), "{}", text(&out.stderr));
    let written = std::fs::read_to_string(&file).unwrap();
    assert!(written.contains("50"));
    assert_eq!(dcr(&["validate", path(&file)]).status.code(), Some(0));

    assert_eq!(dcr(&["pattern", "nope"]).status.code(), Some(2));
    assert_eq!(dcr(&["pattern", "rate-limitation", "--param", "limit=-1"]).status.code(), Some(2));
    assert_eq!(dcr(&["pattern", "rate-limitation", "--param", "oops"]).status.code(), Some(2));
}

#[test]
fn export_dot_writes_a_digraph() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("cb.dot");
    let out = dcr(&["export-dot", path(&fixture("circuit-breaker.dcr")), "-o", path(&file)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let dot = std::fs::read_to_string(&file).unwrap();
    assert!(dot.starts_with("digraph \"circuit_breaker\""));
    assert_eq!(text(&dcr(&["export-dot", path(&fixture("circuit-breaker.dcr"))]).stdout), dot);
}

#[test]
fn simulate_reads_commands_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dcr"))
        .args(["simulate", path(&fixture("time-incentivization.dcr"))])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"exec bank give_loan\nadvance P29D\nenabled bank\nadvance P1D\nenabled bank\nquit\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(
        text(&out.stdout),
        "executed give_loan\n  included: fine, pay_loan\ntime is now 2505600\ngive_loan\ntime is now 2592000\nfine\ngive_loan\n"
    );
}

#[test]
fn serve_answers_http() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dcr"))
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut line = String::new();
    stderr.read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /patterns HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("commit-and-reveal"));
}
