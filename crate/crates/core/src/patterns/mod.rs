//! Catalogue of smart-contract design patterns as graphs.
//!
//! Every pattern ships as a `.dcr` fixture together with at least one
//! conformant scenario trace. Six of them also have a parameterised builder;
//! with default parameters each builder reproduces its fixture exactly.

mod builders;

use std::collections::BTreeMap;
use std::fmt;

pub use builders::{
    build_casino, build_circuit_breaker, build_commit_and_reveal, build_rate_limitation, build_speed_bump,
    build_time_incentivization,
};

use crate::dsl::parse_graph_named;
use crate::duration::{parse_duration, Duration, DAY, MONTH};
use crate::model::Graph;

const MODELS: &str = "https://github.com/mojtaba-eshghie/SmartContractDesignPatternsInDCRGraphs";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PatternError {
    #[error("unknown pattern `{0}`")]
    UnknownPattern(String),
    #[error("pattern `{pattern}` has no parameter `{name}`")]
    UnknownParam { pattern: String, name: String },
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamValue {
    Int(i64),
    Duration(Duration),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Int(i) => write!(f, "{i}"),
            ParamValue::Duration(d) => write!(f, "{d}"),
        }
    }
}

impl ParamValue {
    /// Parses `text` as a value of the same type as `self`.
    fn parse_like(&self, name: &str, text: &str) -> Result<ParamValue, PatternError> {
        let invalid = |reason: String| PatternError::InvalidParam {
            name: name.to_string(),
            reason,
        };
        match self {
            ParamValue::Int(_) => text
                .trim()
                .parse()
                .map(ParamValue::Int)
                .map_err(|_| invalid(format!("expected an integer, got {text:?}"))),
            ParamValue::Duration(_) => parse_duration(text.trim())
                .map(ParamValue::Duration)
                .map_err(|e| invalid(e.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub default: ParamValue,
}

pub type Params = BTreeMap<&'static str, ParamValue>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: &'static str,
    pub trace: &'static str,
    /// Roles driven by automatic agents during replay.
    pub agents: &'static [&'static str],
}

type BuildFn = fn(&Params) -> Result<Graph, PatternError>;

#[derive(Debug, Clone)]
pub struct PatternDescriptor {
    pub name: &'static str,
    pub citation: String,
    pub params: Vec<ParamSpec>,
    /// Fixture source in the DSL.
    pub source: &'static str,
    pub scenarios: Vec<Scenario>,
    builder: Option<BuildFn>,
}

impl PatternDescriptor {
    pub fn defaults(&self) -> Params {
        self.params.iter().map(|p| (p.name, p.default)).collect()
    }

    /// Builds with defaults overridden by `overrides` (name, text) pairs.
    pub fn build_with(&self, overrides: &[(String, String)]) -> Result<Graph, PatternError> {
        let mut params = self.defaults();
        for (name, text) in overrides {
            let spec = self
                .params
                .iter()
                .find(|p| p.name == name)
                .ok_or_else(|| PatternError::UnknownParam {
                    pattern: self.name.to_string(),
                    name: name.clone(),
                })?;
            params.insert(spec.name, spec.default.parse_like(name, text)?);
        }
        match self.builder {
            Some(build) => build(&params),
            None => Ok(self.fixture()),
        }
    }

    pub fn build(&self) -> Graph {
        self.build_with(&[]).expect("defaults are always valid")
    }

    /// The shipped fixture, parsed.
    pub fn fixture(&self) -> Graph {
        parse_graph_named(self.source, &format!("{}.dcr", self.name))
            .unwrap_or_else(|e| panic!("built-in fixture {}: {e}", self.name))
    }
}

fn int(params: &Params, name: &str) -> i64 {
    match params[name] {
        ParamValue::Int(i) => i,
        ParamValue::Duration(d) => d.steps() as i64,
    }
}

fn dur(params: &Params, name: &str) -> Duration {
    match params[name] {
        ParamValue::Duration(d) => d,
        ParamValue::Int(i) => Duration::from_steps(i.max(0) as u64),
    }
}

macro_rules! fixture {
    ($file:literal) => {
        include_str!(concat!("../../patterns/", $file, ".dcr"))
    };
}

macro_rules! trace {
    ($file:literal) => {
        include_str!(concat!("../../patterns/traces/", $file, ".jsonl"))
    };
}

fn one_trace(name: &'static str, trace: &'static str) -> Vec<Scenario> {
    vec![Scenario {
        name,
        trace,
        agents: &[],
    }]
}

fn descriptor(
    name: &'static str,
    doc: &'static str,
    source: &'static str,
    scenarios: Vec<Scenario>,
) -> PatternDescriptor {
    PatternDescriptor {
        name,
        citation: format!("{MODELS}/blob/main/design-pattern-models/{doc}.md"),
        params: Vec::new(),
        source,
        scenarios,
        builder: None,
    }
}

fn with_builder(mut d: PatternDescriptor, params: Vec<ParamSpec>, builder: BuildFn) -> PatternDescriptor {
    d.params = params;
    d.builder = Some(builder);
    d
}

/// The nineteen high-level patterns followed by the casino case study.
pub fn catalog() -> Vec<PatternDescriptor> {
    vec![
        descriptor(
            "time-constraint",
            "time-constraint",
            fixture!("time-constraint"),
            one_trace("claim-after-a-week", trace!("time-constraint")),
        ),
        with_builder(
            descriptor(
                "time-incentivization",
                "time-incentivizing",
                fixture!("time-incentivization"),
                one_trace("fine-after-term", trace!("time-incentivization")),
            ),
            vec![ParamSpec {
                name: "term",
                default: ParamValue::Duration(Duration::from_steps(MONTH)),
            }],
            |p| Ok(build_time_incentivization(dur(p, "term"))),
        ),
        descriptor(
            "automatic-deprecation",
            "automatic-deprecation",
            fixture!("automatic-deprecation"),
            one_trace("deprecated-at-height", trace!("automatic-deprecation")),
        ),
        with_builder(
            descriptor(
                "rate-limitation",
                "rate-limiting",
                fixture!("rate-limitation"),
                vec![Scenario {
                    name: "limit-then-new-period",
                    trace: trace!("rate-limitation"),
                    agents: &["system"],
                }],
            ),
            vec![
                ParamSpec {
                    name: "limit",
                    default: ParamValue::Int(100),
                },
                ParamSpec {
                    name: "period",
                    default: ParamValue::Duration(Duration::from_steps(DAY)),
                },
            ],
            |p| build_rate_limitation(int(p, "limit"), dur(p, "period")),
        ),
        with_builder(
            descriptor(
                "speed-bump",
                "speed-bump",
                fixture!("speed-bump"),
                one_trace("act-after-delay", trace!("speed-bump")),
            ),
            vec![ParamSpec {
                name: "delay",
                default: ParamValue::Duration(Duration::from_steps(DAY)),
            }],
            |p| Ok(build_speed_bump(dur(p, "delay"))),
        ),
        descriptor(
            "safe-self-destruction",
            "safe-self-destruction",
            fixture!("safe-self-destruction"),
            one_trace("admin-destroys", trace!("safe-self-destruction")),
        ),
        descriptor(
            "access-control",
            "access-control",
            fixture!("access-control"),
            one_trace("owner-and-user", trace!("access-control")),
        ),
        with_builder(
            descriptor(
                "commit-and-reveal",
                "commit-and-reveal",
                fixture!("commit-and-reveal"),
                one_trace("matching-reveal", trace!("commit-and-reveal")),
            ),
            Vec::new(),
            |_| Ok(build_commit_and_reveal()),
        ),
        with_builder(
            descriptor(
                "circuit-breaker",
                "circuit-breaker",
                fixture!("circuit-breaker"),
                one_trace("panic-revive-contingency", trace!("circuit-breaker")),
            ),
            Vec::new(),
            |_| Ok(build_circuit_breaker()),
        ),
        descriptor(
            "escapability",
            "escapability",
            fixture!("escapability"),
            one_trace("escape", trace!("escapability")),
        ),
        descriptor(
            "checks-effects-interactions",
            "checks-effects-interactions",
            fixture!("checks-effects-interactions"),
            one_trace("two-rounds", trace!("checks-effects-interactions")),
        ),
        descriptor(
            "guard-check",
            "guard-check",
            fixture!("guard-check"),
            one_trace("rejected-then-accepted", trace!("guard-check")),
        ),
        descriptor(
            "abstract-contract-states",
            "abstract-contract-states",
            fixture!("abstract-contract-states"),
            one_trace("full-cycle", trace!("abstract-contract-states")),
        ),
        descriptor(
            "secure-ether-transfer",
            "secure-ether-transfer",
            fixture!("secure-ether-transfer"),
            one_trace("withdraw", trace!("secure-ether-transfer")),
        ),
        descriptor(
            "oracle",
            "oracle",
            fixture!("oracle"),
            one_trace("request-callback", trace!("oracle")),
        ),
        descriptor(
            "token",
            "tokens",
            fixture!("token"),
            one_trace("mint-transfer-approve", trace!("token")),
        ),
        descriptor(
            "pull-over-push",
            "pull-over-push",
            fixture!("pull-over-push"),
            one_trace("credit-withdraw", trace!("pull-over-push")),
        ),
        descriptor(
            "upgradability",
            "upgradability",
            fixture!("upgradability"),
            one_trace("upgrade-between-calls", trace!("upgradability")),
        ),
        descriptor(
            "governance",
            "governance",
            fixture!("governance"),
            one_trace("proposal-passes", trace!("governance")),
        ),
        PatternDescriptor {
            name: "casino",
            citation: format!("{MODELS} (casino case study)"),
            params: vec![ParamSpec {
                name: "timeout",
                default: ParamValue::Duration(Duration::from_steps(DAY)),
            }],
            source: fixture!("casino"),
            scenarios: vec![
                Scenario {
                    name: "happy-path",
                    trace: trace!("casino-happy-path"),
                    agents: &[],
                },
                Scenario {
                    name: "operator-wins",
                    trace: trace!("casino-operator-wins"),
                    agents: &[],
                },
                Scenario {
                    name: "player-timeout",
                    trace: trace!("casino-player-timeout"),
                    agents: &[],
                },
                Scenario {
                    name: "close-casino",
                    trace: trace!("casino-close-casino"),
                    agents: &[],
                },
            ],
            builder: Some(|p| Ok(build_casino(dur(p, "timeout")))),
        },
    ]
}

pub fn find(name: &str) -> Result<PatternDescriptor, PatternError> {
    catalog()
        .into_iter()
        .find(|d| d.name == name)
        .ok_or_else(|| PatternError::UnknownPattern(name.to_string()))
}
