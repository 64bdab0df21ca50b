//! Executable checks for the end-to-end scenarios. Each returns a short
//! summary on success and a description of the first mismatch otherwise.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use dcr_core::conformance::{load_trace, replay, replay_detailed, AgentPolicy, Reason, Status};
use dcr_core::dsl::{parse_expr, parse_graph, serialize_graph};
use dcr_core::engine::{advance_time, check_enabled, enabled_events, execute, is_accepting, is_enabled};
use dcr_core::json::{graph_from_json, graph_to_json, marking_from_json, marking_to_json};
use dcr_core::patterns::{
    build_casino, build_circuit_breaker, build_commit_and_reveal, build_rate_limitation,
    build_time_incentivization, catalog,
};
use dcr_core::{Clause, Duration, EventId, EventKind, ExecError, Graph, Marking, Value};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::generate::{self, Shape, ROLES};
use super::oracle;

pub type Outcome = Result<String, String>;

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn id(s: &str) -> EventId {
    EventId::new(s).unwrap()
}

fn ids(list: &[&str]) -> BTreeSet<EventId> {
    list.iter().map(|s| id(s)).collect()
}

fn run(g: &Graph, m: &Marking, event: &str, role: &str, input: Option<Value>) -> Result<Marking, String> {
    execute(g, m, &id(event), role, input)
        .map(|(next, _)| next)
        .map_err(|e| format!("executing {event} as {role}: {e}"))
}

fn advance(m: &Marking, steps: u64) -> Result<Marking, String> {
    advance_time(m, Duration::from_steps(steps)).map_err(|e| e.to_string())
}

fn enabled(g: &Graph, m: &Marking, event: &str, role: &str) -> bool {
    is_enabled(g, m, &id(event), role).unwrap()
}

fn blocked_by(g: &Graph, m: &Marking, event: &str, role: &str) -> Option<Clause> {
    match check_enabled(g, m, &id(event), role) {
        Err(ExecError::NotEnabled { blocker, .. }) => Some(blocker.clause()),
        _ => None,
    }
}

fn hash_text(s: &str) -> Value {
    Value::Text(dcr_core::expr::fnv1a_hex(&Value::Text(s.into())).unwrap())
}

pub fn commit_and_reveal() -> Outcome {
    let started = Instant::now();
    let g = build_commit_and_reveal();
    let m0 = g.initial_marking().clone();
    for role in ["user", "anyone"] {
        ensure(enabled_events(&g, &m0, role) == ids(&["commit"]), || {
            format!("initial enabled set for {role}: {:?}", enabled_events(&g, &m0, role))
        })?;
    }
    ensure(is_accepting(&m0), || "initial marking not accepting".into())?;

    let m1 = run(&g, &m0, "commit", "user", Some(hash_text("42")))?;
    ensure(m1.is_required(&id("reveal")) && m1.is_included(&id("reveal")), || {
        "reveal not pending after commit".into()
    })?;
    ensure(blocked_by(&g, &m1, "commit", "user") == Some(Clause::Milestone), || {
        "commit not milestone-blocked after commit".into()
    })?;
    ensure(!is_accepting(&m1), || "accepting while reveal is pending".into())?;

    let m2 = run(&g, &m1, "reveal", "user", Some(Value::Text("42".into())))?;
    let (m3, report) = execute(&g, &m2, &id("decide"), "user", None).map_err(|e| e.to_string())?;
    ensure(report.new_value == Some(Value::Bool(true)), || {
        format!("decide computed {:?}", report.new_value)
    })?;
    ensure(m3.is_included(&id("pass")) && !m3.is_included(&id("fail")), || {
        "matching run should leave pass included and fail excluded".into()
    })?;
    let m4 = run(&g, &m3, "pass", "user", None)?;
    ensure(is_accepting(&m4), || "complete run not accepting".into())?;

    let bad = run(&g, &m0, "commit", "user", Some(Value::Text("nope".into())))?;
    let bad = run(&g, &bad, "reveal", "user", Some(Value::Text("42".into())))?;
    let bad = run(&g, &bad, "decide", "user", None)?;
    ensure(bad.value(&id("decide")) == Some(&Value::Bool(false)), || "mismatch decided true".into())?;
    ensure(bad.is_included(&id("fail")) && !bad.is_included(&id("pass")), || {
        "mismatching run should leave fail included and pass excluded".into()
    })?;

    let elapsed = started.elapsed();
    ensure(elapsed.as_secs_f64() < 1.0, || format!("took {elapsed:?}"))?;
    Ok(format!("enabled {{commit}}, milestone block, pass/fail split ({elapsed:?})"))
}

pub fn time_incentivization() -> Outcome {
    let g = build_time_incentivization(Duration::from_steps(dcr_core::duration::MONTH));
    let m0 = g.initial_marking().clone();
    ensure(enabled_events(&g, &m0, "bank") == ids(&["give_loan"]), || {
        "only give_loan should be enabled for bank".into()
    })?;
    let loaned = run(&g, &m0, "give_loan", "bank", None)?;
    let before = advance(&loaned, 2_591_999)?;
    ensure(!enabled(&g, &before, "fine", "bank"), || "fine enabled at 2,591,999 steps".into())?;
    ensure(blocked_by(&g, &before, "fine", "bank") == Some(Clause::Condition), || {
        "fine should be blocked by its delayed condition".into()
    })?;
    let at = advance(&before, 1)?;
    ensure(at.executed_age(&id("give_loan")) == Some(2_592_000), || "age mismatch".into())?;
    ensure(enabled(&g, &at, "fine", "bank"), || "fine disabled at 2,592,000 steps".into())?;
    ensure(advance(&loaned, 2_592_000)? == at, || "advance is not additive".into())?;

    let paid = run(&g, &loaned, "pay_loan", "client", None)?;
    ensure(!paid.is_included(&id("fine")), || "pay_loan did not exclude fine".into())?;
    let later = advance(&paid, 10 * dcr_core::duration::YEAR)?;
    for role in ["bank", "client", "other"] {
        ensure(!enabled_events(&g, &later, role).contains(&id("fine")), || {
            format!("fine enabled for {role} after payment")
        })?;
    }
    Ok("fine boundary at 2,592,000 steps; payment excludes fine".into())
}

pub fn rate_limitation() -> Outcome {
    let g = build_rate_limitation(100, Duration::from_steps(dcr_core::duration::DAY))
        .map_err(|e| e.to_string())?;
    let m = g.initial_marking().clone();
    let all: BTreeSet<EventId> = ["admin", "system", "user"]
        .iter()
        .flat_map(|r| enabled_events(&g, &m, r))
        .collect();
    ensure(all == ids(&["set_limit"]), || format!("fresh enabled set {all:?}"))?;

    let m = run(&g, &m, "set_limit", "admin", Some(Value::Int(100)))?;
    let m = run(&g, &m, "withdraw", "user", Some(Value::Int(60)))?;
    ensure(blocked_by(&g, &m, "withdraw", "user") == Some(Clause::Milestone), || {
        "withdraw should wait for the accumulator".into()
    })?;
    let m = run(&g, &m, "rate_limiter", "system", None)?;
    ensure(enabled(&g, &m, "withdraw", "user"), || "withdraw blocked below the limit".into())?;
    let m = run(&g, &m, "withdraw", "user", Some(Value::Int(40)))?;
    let m = run(&g, &m, "rate_limiter", "system", None)?;
    ensure(m.value(&id("rate_limiter")) == Some(&Value::Int(100)), || {
        format!("accumulator holds {:?}", m.value(&id("rate_limiter")))
    })?;
    ensure(blocked_by(&g, &m, "withdraw", "user") == Some(Clause::Milestone), || {
        "withdraw enabled at the limit".into()
    })?;
    ensure(!enabled(&g, &m, "new_period", "system"), || "new period fired early".into())?;
    ensure(advance(&m, 86_401).is_err(), || "time passed the period deadline".into())?;
    let m = advance(&m, 86_400)?;
    let (m, report) = execute(&g, &m, &id("new_period"), "system", None).map_err(|e| e.to_string())?;
    ensure(
        report.values_copied.get(&id("rate_limiter")) == Some(&Value::Int(0)) && report.values_copied.len() == 1,
        || format!("values copied {:?}", report.values_copied),
    )?;
    ensure(enabled(&g, &m, "withdraw", "user"), || "withdraw still blocked in new period".into())?;

    // The same story driven by an automatic agent during replay.
    let agents = [AgentPolicy::at_deadline("system")];
    let trace = load_trace(
        r#"{"seq":1,"at":0,"role":"admin","event":"set_limit","value":100}
{"seq":2,"at":1,"role":"user","event":"withdraw","value":60}
{"seq":3,"at":2,"role":"user","event":"withdraw","value":40}
{"seq":4,"at":3,"role":"user","event":"withdraw","value":1}"#,
    )
    .unwrap();
    let verdict = replay(&g, &trace, &agents);
    ensure(
        matches!(&verdict.violation, Some(v) if v.seq == 4 && v.reason == Reason::NotEnabled { clause: Clause::Milestone }),
        || format!("over-limit withdrawal: {verdict:?}"),
    )?;
    let trace = load_trace(
        r#"{"seq":1,"at":0,"role":"admin","event":"set_limit","value":100}
{"seq":2,"at":1,"role":"user","event":"withdraw","value":100}
{"seq":3,"at":"P3DT1S","role":"user","event":"withdraw","value":5}"#,
    )
    .unwrap();
    let outcome = replay_detailed(&g, &trace, &agents);
    ensure(outcome.verdict.is_conformant(), || format!("{:?}", outcome.verdict))?;
    let periods: Vec<u64> = outcome
        .firings
        .iter()
        .filter(|f| f.event.as_str() == "new_period")
        .map(|f| f.at)
        .collect();
    ensure(periods == vec![86_400, 172_800, 259_200], || format!("new period fired at {periods:?}"))?;
    ensure(
        outcome.final_marking.value(&id("rate_limiter")) == Some(&Value::Int(5)),
        || "accumulator not reset by the agent".into(),
    )?;
    ensure(replay(&g, &trace, &[]).status == Status::Violation, || {
        "without an agent the period deadline should be missed".into()
    })?;
    Ok("limit blocks withdraw; agent runs new period every P1D and copies 0".into())
}

pub fn circuit_breaker() -> Outcome {
    let g = build_circuit_breaker();
    let m0 = g.initial_marking().clone();
    ensure(enabled(&g, &m0, "buy", "user"), || "buy disabled before panic".into())?;
    let panicked = run(&g, &m0, "panic", "monitor", None)?;
    let user = enabled_events(&g, &panicked, "user");
    ensure(user.is_empty(), || format!("user can still run {user:?}"))?;
    for (event, role) in [("buy", "user"), ("sell", "user"), ("transfer", "user"), ("panic", "monitor")] {
        ensure(blocked_by(&g, &panicked, event, role) == Some(Clause::Milestone), || {
            format!("{event} not blocked by the breaker")
        })?;
    }
    let revived = run(&g, &panicked, "revive", "owner", None)?;
    for (event, role) in [("buy", "user"), ("sell", "user"), ("transfer", "user"), ("panic", "monitor")] {
        ensure(enabled(&g, &revived, event, role), || format!("{event} not restored by revive"))?;
    }
    ensure(!enabled(&g, &revived, "escape_hatch", "owner"), || "escape opened by revive".into())?;
    let escaped = run(&g, &panicked, "contingency", "owner", None)?;
    ensure(enabled(&g, &escaped, "escape_hatch", "owner"), || "contingency did not enable escape".into())?;
    ensure(escaped.is_required(&id("escape_hatch")), || "escape not required".into())?;
    ensure(enabled_events(&g, &escaped, "user").is_empty(), || "trading open after contingency".into())?;
    Ok("panic blocks all four, revive restores, contingency opens escape".into())
}

fn casino_events(g: &Graph) -> Vec<EventId> {
    g.descendants(&id("casino")).into_iter().cloned().collect()
}

pub fn casino() -> Outcome {
    let d = catalog().into_iter().find(|d| d.name == "casino").unwrap();
    let g = build_casino(Duration::from_steps(dcr_core::duration::DAY));
    ensure(g == d.fixture(), || "builder and fixture differ".into())?;
    let mut names = Vec::new();
    for s in &d.scenarios {
        let v = replay(&g, &load_trace(s.trace).unwrap(), &[]);
        ensure(v.is_conformant(), || format!("{}: {v:?}", s.name))?;
        names.push(s.name);
    }
    ensure(names == ["happy-path", "operator-wins", "player-timeout", "close-casino"], || {
        format!("scenarios {names:?}")
    })?;

    let early = load_trace(
        r#"{"seq":1,"at":0,"role":"operator","event":"createGame","value":"41135e19c90e68b7"}
{"seq":2,"at":10,"role":"player","event":"placeBet","value":7}
{"seq":3,"at":86409,"role":"player","event":"timeoutBet"}"#,
    )
    .unwrap();
    let v = replay(&g, &early, &[]);
    ensure(
        matches!(&v.violation, Some(x) if x.seq == 3 && x.reason == Reason::NotEnabled { clause: Clause::Condition }),
        || format!("early timeout: {v:?}"),
    )?;

    let m = g.initial_marking().clone();
    let m = run(&g, &m, "createGame", "operator", Some(hash_text("s")))?;
    let m = run(&g, &m, "placeBet", "player", Some(Value::Int(1)))?;
    ensure(!enabled(&g, &m, "removeFromPot", "operator"), || "pot removable during a bet".into())?;
    ensure(!enabled(&g, &m, "timeoutBet", "player"), || "timeout available immediately".into())?;
    ensure(blocked_by(&g, &m, "placeBet", "player") == Some(Clause::Milestone), || {
        "a second bet is possible while one is open".into()
    })?;
    let waited = advance(&m, 86_400)?;
    ensure(enabled(&g, &waited, "timeoutBet", "player"), || "timeout unavailable after a day".into())?;

    let closed = run(&g, g.initial_marking(), "closeCasino", "operator", None)?;
    for role in ["operator", "player", "someone"] {
        for e in casino_events(&g) {
            ensure(!is_enabled(&g, &closed, &e, role).unwrap(), || {
                format!("{e} enabled for {role} after closeCasino")
            })?;
        }
    }
    ensure(blocked_by(&g, &closed, "addToPot", "operator") == Some(Clause::Parent), || {
        "closure should block through the enclosing sub-process".into()
    })?;
    Ok("4 shipped traces conformant; early timeout rejected; closure disables all".into())
}

/// Compares the engine with the naive evaluator on random graphs and runs.
pub fn oracle_agreement(graphs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape {
        max_events: 8,
        max_relations: 16,
        data: false,
    };
    let roles: Vec<&str> = ROLES.iter().copied().chain(["mallory"]).collect();
    let mut steps = 0usize;
    for n in 0..graphs {
        let g = generate::graph(&mut rng, &shape);
        let mut m = g.initial_marking().clone();
        let len = rng.gen_range(1..=12);
        for step in 0..len {
            let ctx = |what: String| format!("graph #{n} step {step}: {what}\n{}", serialize_graph(&g));
            let mut candidates = Vec::new();
            for e in g.events() {
                for role in &roles {
                    let fast = is_enabled(&g, &m, &e.id, role).unwrap();
                    let slow = oracle::enabled(&g, &m, &e.id, role);
                    if fast != slow {
                        return Err(ctx(format!("enabled({}, {role}): engine {fast}, oracle {slow}", e.id)));
                    }
                    if fast {
                        candidates.push((e, *role));
                    }
                }
            }
            if is_accepting(&m) != oracle::accepting(&m) {
                return Err(ctx("acceptance differs".into()));
            }
            steps += 1;
            if !candidates.is_empty() && rng.gen_bool(0.75) {
                let (e, role) = *candidates.choose(&mut rng).unwrap();
                let input = (e.kind == EventKind::Input).then(|| generate::value(&mut rng));
                let fast = execute(&g, &m, &e.id, role, input.clone()).map(|(next, _)| next).ok();
                let slow = oracle::execute(&g, &m, &e.id, role, input);
                if fast != slow {
                    return Err(ctx(format!("execute({}, {role}) differs: {fast:?} vs {slow:?}", e.id)));
                }
                if let Some(next) = fast {
                    if next.executed_age(&e.id) != Some(0) {
                        return Err(ctx(format!("{} not marked executed", e.id)));
                    }
                    m = next;
                }
            } else {
                // Disabled executions must be rejected by both without effect.
                if let Some(e) = g.events().choose(&mut rng) {
                    let role = *roles.choose(&mut rng).unwrap();
                    if !is_enabled(&g, &m, &e.id, role).unwrap() {
                        let before = marking_to_json(&m);
                        let fast = execute(&g, &m, &e.id, role, None);
                        if fast.is_ok() || oracle::execute(&g, &m, &e.id, role, None).is_some() {
                            return Err(ctx(format!("disabled {} executed", e.id)));
                        }
                        if marking_to_json(&m) != before {
                            return Err(ctx("rejected execution changed the marking".into()));
                        }
                    }
                }
                let delta = rng.gen_range(0..4);
                let fast = advance_time(&m, Duration::from_steps(delta)).ok();
                let slow = oracle::advance(&m, delta);
                if fast != slow {
                    return Err(ctx(format!("advance({delta}) differs")));
                }
                if let Some(next) = fast {
                    m = next;
                }
            }
        }
    }
    Ok(format!("{graphs} graphs, {steps} compared states, 0 disagreements"))
}

/// DSL and JSON round trips on every fixture and on random graphs.
pub fn round_trips(graphs: usize, seed: u64) -> Outcome {
    for d in catalog() {
        let g = d.fixture();
        ensure(parse_graph(&serialize_graph(&g)).as_ref() == Ok(&g), || {
            format!("{} does not round-trip", d.name)
        })?;
        ensure(graph_from_json(&graph_to_json(&g)).as_ref() == Ok(&g), || {
            format!("{} does not round-trip through JSON", d.name)
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = Shape {
        max_events: 8,
        max_relations: 16,
        data: true,
    };
    for n in 0..graphs {
        let g = generate::graph(&mut rng, &shape);
        let text = serialize_graph(&g);
        match parse_graph(&text) {
            Ok(back) if back == g => {}
            Ok(_) => return Err(format!("graph #{n} changed after a round trip:\n{text}")),
            Err(e) => return Err(format!("graph #{n} failed to reparse: {e}\n{text}")),
        }
        ensure(serialize_graph(&parse_graph(&text).unwrap()) == text, || {
            format!("graph #{n}: serializer not stable")
        })?;
        let json = graph_to_json(&g);
        ensure(graph_from_json(&json).as_ref() == Ok(&g), || format!("graph #{n}: JSON round trip"))?;
        let mj = marking_to_json(g.initial_marking());
        ensure(marking_from_json(&mj).as_ref() == Ok(g.initial_marking()), || {
            format!("graph #{n}: marking round trip")
        })?;
    }
    Ok(format!("{} fixtures and {graphs} generated graphs", catalog().len()))
}

const TOKENS: [&str; 24] = [
    "graph", "event", "roles", "{", "}", "(", ")", "[", "]", ";", ",", "->", "condition", "response", "guard",
    "delay", "P1D", "\"", "#", "-", "9223372036854775808", "hash(", "not", "\u{0}",
];

pub fn mutate(rng: &mut impl Rng, seed_text: &str) -> String {
    let mut bytes = seed_text.as_bytes().to_vec();
    for _ in 0..rng.gen_range(1..6) {
        let pos = if bytes.is_empty() { 0 } else { rng.gen_range(0..=bytes.len()) };
        match rng.gen_range(0..5) {
            0 if pos < bytes.len() => bytes[pos] = rng.gen(),
            1 if pos < bytes.len() => {
                let end = rng.gen_range(pos..=bytes.len());
                bytes.drain(pos..end);
            }
            2 => bytes.truncate(pos),
            3 => {
                let t = TOKENS.choose(rng).unwrap();
                bytes.splice(pos..pos, t.bytes());
            }
            _ => {
                let noise: Vec<u8> = (0..rng.gen_range(1..8)).map(|_| rng.gen()).collect();
                bytes.splice(pos..pos, noise);
            }
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

/// Feeds mutated fixtures and noise to the parsers; none may panic.
pub fn parser_fuzz(inputs: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seeds: Vec<&str> = catalog().iter().map(|d| d.source).collect();
    let mut rejected = 0usize;
    for n in 0..inputs {
        let text = match n % 10 {
            0 => (0..rng.gen_range(0..200)).map(|_| rng.gen::<char>()).collect(),
            1 => "(".repeat(rng.gen_range(0..5000)) + &"not -".repeat(rng.gen_range(0..3000)),
            _ => {
                let seed_text = *seeds.choose(&mut rng).unwrap();
                mutate(&mut rng, seed_text)
            }
        };
        let result = catch_unwind(AssertUnwindSafe(|| {
            let g = parse_graph(&text);
            let _ = parse_expr(&text);
            if let Ok(g) = &g {
                let _ = dcr_core::validate(g);
                let _ = dcr_core::dot::export_dot(g, None);
                let _ = parse_graph(&serialize_graph(g));
            }
            g.is_err()
        }));
        match result {
            Ok(true) => rejected += 1,
            Ok(false) => {}
            Err(_) => return Err(format!("parser panicked on input #{n}: {text:?}")),
        }
    }
    Ok(format!("{inputs} inputs, {rejected} rejected cleanly, 0 panics"))
}

/// Replays every shipped trace twice and compares the serialized results.
pub fn determinism() -> Outcome {
    let mut count = 0;
    for d in catalog() {
        let g = d.build();
        for s in &d.scenarios {
            let trace = load_trace(s.trace).unwrap();
            let agents: Vec<_> = s.agents.iter().map(|r| AgentPolicy::at_deadline(*r)).collect();
            let a = replay_detailed(&g, &trace, &agents);
            let b = replay_detailed(&d.build(), &load_trace(s.trace).unwrap(), &agents);
            ensure(a.verdict.to_json() == b.verdict.to_json(), || format!("{}: verdicts differ", s.name))?;
            ensure(
                marking_to_json(&a.final_marking) == marking_to_json(&b.final_marking),
                || format!("{}: final markings differ", s.name),
            )?;
            count += 1;
        }
    }
    Ok(format!("{count} traces replayed twice with identical output"))
}
