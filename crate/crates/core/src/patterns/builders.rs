use super::PatternError;
use crate::dsl::parse_expr;
use crate::duration::{Deadline, Duration};
use crate::expr::{Expr, Value};
use crate::model::{Graph, GraphBuilder};

fn expr(src: &str) -> Expr {
    parse_expr(src).unwrap_or_else(|e| panic!("built-in expression `{src}`: {e}"))
}

pub fn build_commit_and_reveal() -> Graph {
    let mut b = GraphBuilder::new("commit_and_reveal");
    b.input("commit");
    b.input("reveal");
    b.compute("decide", expr("commit = hash(reveal)"));
    b.simple("fail").excluded();
    b.simple("pass").excluded();
    b.condition("commit", "reveal");
    b.response("commit", "reveal");
    b.condition("reveal", "decide");
    b.response("reveal", "decide");
    for source in ["reveal", "decide", "fail", "pass"] {
        b.milestone(source, "commit");
    }
    b.include("decide", "fail").guard(expr("not decide"));
    b.include("decide", "pass").guard(expr("decide"));
    b.exclude("decide", "fail").guard(expr("decide"));
    b.exclude("decide", "pass").guard(expr("not decide"));
    b.build()
}

/// `term` is how long the client has before the bank may fine.
pub fn build_time_incentivization(term: Duration) -> Graph {
    let mut b = GraphBuilder::new("time_incentivization");
    b.role("bank").role("client");
    b.simple("give_loan").label("give loan").roles(["bank"]);
    b.simple("pay_loan").label("pay loan").roles(["client"]).excluded();
    b.simple("fine").roles(["bank"]).excluded();
    b.include("give_loan", "pay_loan");
    b.include("give_loan", "fine");
    b.condition_after("give_loan", "fine", term);
    b.exclude("pay_loan", "fine");
    b.build()
}

pub fn build_rate_limitation(limit: i64, period: Duration) -> Result<Graph, PatternError> {
    if limit <= 0 {
        return Err(PatternError::InvalidParam {
            name: "limit".into(),
            reason: "must be positive".into(),
        });
    }
    if period == Duration::ZERO {
        return Err(PatternError::InvalidParam {
            name: "period".into(),
            reason: "must be longer than zero".into(),
        });
    }
    let mut b = GraphBuilder::new("rate_limitation");
    b.role("admin").role("system").role("user");
    b.input("set_limit")
        .label("set limit")
        .roles(["admin"])
        .value(Value::Int(limit));
    b.compute("new_period", Expr::int(0))
        .label("new period")
        .roles(["system"])
        .executed()
        .pending(Deadline::Finite(period.steps()));
    b.compute("rate_limiter", expr("rate_limiter + withdraw"))
        .label("rate limiter")
        .roles(["system"])
        .excluded()
        .value(Value::Int(0));
    b.input("withdraw").roles(["user"]);
    b.condition_after("new_period", "new_period", period);
    b.response_within("new_period", "new_period", Deadline::Finite(period.steps()));
    b.value("new_period", "rate_limiter");
    b.condition("set_limit", "withdraw");
    b.milestone("new_period", "withdraw")
        .guard(expr("rate_limiter >= set_limit"));
    b.include("withdraw", "rate_limiter");
    b.response_within("withdraw", "rate_limiter", Deadline::Finite(0));
    b.exclude("rate_limiter", "rate_limiter");
    b.milestone("rate_limiter", "withdraw");
    Ok(b.build())
}

pub fn build_speed_bump(delay: Duration) -> Graph {
    let mut b = GraphBuilder::new("speed_bump");
    b.role("user");
    b.simple("request").roles(["user"]);
    b.simple("act").roles(["user"]).excluded();
    b.include("request", "act");
    b.condition_after("request", "act", delay);
    b.exclude("act", "act");
    b.build()
}

pub fn build_circuit_breaker() -> Graph {
    const NORMAL: [&str; 3] = ["buy", "sell", "transfer"];
    let mut b = GraphBuilder::new("circuit_breaker");
    b.role("user").role("monitor").role("owner");
    for name in NORMAL {
        b.simple(name).roles(["user"]);
    }
    b.simple("panic").roles(["monitor"]);
    b.simple("circuit_breaker")
        .label("circuit breaker")
        .roles(["owner"])
        .excluded();
    b.simple("revive").roles(["owner"]).parent("circuit_breaker");
    b.simple("contingency").roles(["owner"]).parent("circuit_breaker");
    b.simple("escape_hatch")
        .label("escape hatch")
        .roles(["owner"])
        .excluded();
    b.include("panic", "circuit_breaker");
    b.response("panic", "circuit_breaker");
    for target in NORMAL.into_iter().chain(["panic"]) {
        b.milestone("circuit_breaker", target);
    }
    b.exclude("circuit_breaker", "circuit_breaker");
    b.include("contingency", "escape_hatch");
    b.response("contingency", "escape_hatch");
    for target in NORMAL {
        b.exclude("contingency", target);
    }
    b.build()
}

/// `timeout` is how long the operator has to settle a bet.
pub fn build_casino(timeout: Duration) -> Graph {
    const IDLE: [&str; 3] = ["createGame", "removeFromPot", "closeCasino"];
    const BET: [&str; 4] = ["placeBet", "decideBet", "reveal", "timeoutBet"];
    let mut b = GraphBuilder::new("casino");
    b.role("operator").role("player");
    b.simple("casino");
    b.input("createGame").roles(["operator"]).parent("casino");
    b.input("addToPot").roles(["operator"]).parent("casino");
    b.input("removeFromPot").roles(["operator"]).parent("casino");
    b.simple("closeCasino").roles(["operator"]).parent("casino");
    b.input("placeBet").excluded().parent("casino");
    b.input("reveal").roles(["operator"]).excluded().parent("casino");
    b.compute("decideBet", expr("createGame = hash(reveal)"))
        .roles(["operator"])
        .excluded()
        .parent("casino");
    b.simple("timeoutBet").roles(["player"]).excluded().parent("casino");

    b.exclude("createGame", "createGame");
    b.exclude("createGame", "closeCasino");
    b.include("createGame", "placeBet");
    b.exclude("placeBet", "removeFromPot");
    b.include("placeBet", "reveal");
    b.include("placeBet", "decideBet");
    b.include("placeBet", "timeoutBet");
    b.response("placeBet", "reveal");
    b.response("placeBet", "decideBet");
    b.condition_after("placeBet", "timeoutBet", timeout);
    b.milestone("decideBet", "placeBet");
    b.milestone("reveal", "decideBet");
    for target in IDLE {
        b.include("decideBet", target).guard(expr("decideBet"));
    }
    for target in BET {
        b.exclude("decideBet", target).guard(expr("decideBet"));
    }
    b.response("decideBet", "decideBet").guard(expr("not decideBet"));
    for target in IDLE {
        b.include("timeoutBet", target);
    }
    for target in ["placeBet", "timeoutBet", "reveal", "decideBet"] {
        b.exclude("timeoutBet", target);
    }
    b.cancel("timeoutBet", "decideBet");
    b.exclude("closeCasino", "casino");
    b.build()
}
