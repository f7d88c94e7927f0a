//! Deterministic two-counter (Minsky) machines.
//!
//! File format, one definition per line:
//!
//! ```text
//! # comment
//! @init q0
//! q0: inc c q1
//! q1: test d q2 q1
//! q2: halt
//! ```
//!
//! `test e z nz` moves to `z` when counter `e` is zero and otherwise
//! decrements it and moves to `nz`. The first defined state is initial
//! unless `@init` says otherwise.

mod encoding;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use encoding::{
    decode_best, encode, mu_nonzero, mu_zero, nearest_member, Decoded, DomainError, Family, Nearest,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MachineError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: state `{state}` already has a transition")]
    Determinism { line: usize, state: String },
    #[error("line {line}: {message}")]
    Halt { line: usize, message: String },
    #[error("state `{0}` has no transition and is not the halting state")]
    Stuck(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Counter {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "d")]
    D,
}

impl Counter {
    /// Index used by the game construction: `c ↦ 1`, `d ↦ 2`.
    pub fn index(self) -> u32 {
        match self {
            Counter::C => 1,
            Counter::D => 2,
        }
    }

    fn parse(s: &str) -> Option<Counter> {
        match s {
            "c" => Some(Counter::C),
            "d" => Some(Counter::D),
            _ => None,
        }
    }
}

impl fmt::Display for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Counter::C => "c",
            Counter::D => "d",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum Instr {
    Inc {
        counter: Counter,
        next: String,
    },
    Test {
        counter: Counter,
        if_zero: String,
        if_nonzero: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCounterMachine {
    states: Vec<String>,
    initial: String,
    halt: String,
    transitions: BTreeMap<String, Instr>,
}

impl TwoCounterMachine {
    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn initial(&self) -> &str {
        &self.initial
    }

    pub fn halt(&self) -> &str {
        &self.halt
    }

    pub fn instr(&self, state: &str) -> Option<&Instr> {
        self.transitions.get(state)
    }

    pub fn transitions(&self) -> impl Iterator<Item = (&String, &Instr)> {
        self.transitions.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MachineConfig {
    pub state: String,
    pub c: u64,
    pub d: u64,
}

impl MachineConfig {
    pub fn new(state: impl Into<String>, c: u64, d: u64) -> Self {
        MachineConfig {
            state: state.into(),
            c,
            d,
        }
    }

    pub fn get(&self, counter: Counter) -> u64 {
        match counter {
            Counter::C => self.c,
            Counter::D => self.d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Next(MachineConfig),
    Halted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    HaltsIn(usize),
    NoHaltWithin(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub outcome: Outcome,
    /// `(q_p, c_p, d_p)` for p = 1, 2, ... (index 0 is the initial configuration).
    pub trajectory: Vec<MachineConfig>,
}

impl Execution {
    pub fn halts(&self) -> Option<usize> {
        match self.outcome {
            Outcome::HaltsIn(n) => Some(n),
            Outcome::NoHaltWithin(_) => None,
        }
    }
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_machine(text: &str) -> Result<TwoCounterMachine, MachineError> {
    let mut states: Vec<String> = Vec::new();
    let mut transitions = BTreeMap::new();
    let mut halt: Option<(String, usize)> = None;
    let mut init: Option<String> = None;
    let mut refs: Vec<(usize, String)> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let perr = |message: String| MachineError::Parse {
            line: line_no,
            message,
        };
        if let Some(rest) = line.strip_prefix("@init") {
            let s = rest.trim();
            if s.is_empty() || s.contains(char::is_whitespace) {
                return Err(perr("expected `@init <state>`".into()));
            }
            init = Some(s.to_string());
            refs.push((line_no, s.to_string()));
            continue;
        }
        let (state, body) = line
            .split_once(':')
            .ok_or_else(|| perr(format!("expected `<state>: ...`, got `{line}`")))?;
        let state = state.trim();
        if state.is_empty() || state.contains(char::is_whitespace) {
            return Err(perr(format!("bad state name `{state}`")));
        }
        let words: Vec<&str> = body.split_whitespace().collect();
        let is_halt = words == ["halt"];
        if is_halt {
            if let Some((h, _)) = &halt {
                if h == state {
                    return Err(perr(format!("`{state}` declared halting twice")));
                }
                return Err(MachineError::Halt {
                    line: line_no,
                    message: format!("second halting state `{state}` (already `{h}`)"),
                });
            }
            if transitions.contains_key(state) {
                return Err(MachineError::Halt {
                    line: line_no,
                    message: format!("halting state `{state}` has an outgoing transition"),
                });
            }
        } else if halt.as_ref().is_some_and(|(h, _)| h == state) {
            return Err(MachineError::Halt {
                line: line_no,
                message: format!("transition out of halting state `{state}`"),
            });
        } else if transitions.contains_key(state) {
            return Err(MachineError::Determinism {
                line: line_no,
                state: state.to_string(),
            });
        }
        if !states.iter().any(|s| s == state) {
            states.push(state.to_string());
        }
        if is_halt {
            halt = Some((state.to_string(), line_no));
            continue;
        }
        let counter =
            |w: &str| Counter::parse(w).ok_or_else(|| perr(format!("unknown counter `{w}`")));
        let instr = match words.as_slice() {
            ["inc", e, next] => Instr::Inc {
                counter: counter(e)?,
                next: next.to_string(),
            },
            ["test", e, z, nz] => Instr::Test {
                counter: counter(e)?,
                if_zero: z.to_string(),
                if_nonzero: nz.to_string(),
            },
            _ => return Err(perr(format!("unrecognised instruction `{}`", body.trim()))),
        };
        match &instr {
            Instr::Inc { next, .. } => refs.push((line_no, next.clone())),
            Instr::Test {
                if_zero,
                if_nonzero,
                ..
            } => {
                refs.push((line_no, if_zero.clone()));
                refs.push((line_no, if_nonzero.clone()));
            }
        }
        transitions.insert(state.to_string(), instr);
    }

    let (halt, _) = halt.ok_or(MachineError::Parse {
        line: 0,
        message: "no halting state declared".into(),
    })?;
    for (line, r) in refs {
        if !states.contains(&r) {
            return Err(MachineError::Parse {
                line,
                message: format!("unknown state `{r}`"),
            });
        }
    }
    let initial = init.unwrap_or_else(|| states[0].clone());
    Ok(TwoCounterMachine {
        states,
        initial,
        halt,
        transitions,
    })
}

pub fn step_machine(
    config: &MachineConfig,
    m: &TwoCounterMachine,
) -> Result<StepResult, MachineError> {
    if config.state == m.halt {
        return Ok(StepResult::Halted);
    }
    let instr = m
        .instr(&config.state)
        .ok_or_else(|| MachineError::Stuck(config.state.clone()))?;
    let mut next = config.clone();
    match instr {
        Instr::Inc { counter, next: q } => {
            match counter {
                Counter::C => next.c += 1,
                Counter::D => next.d += 1,
            }
            next.state = q.clone();
        }
        Instr::Test {
            counter,
            if_zero,
            if_nonzero,
        } => {
            if config.get(*counter) == 0 {
                next.state = if_zero.clone();
            } else {
                match counter {
                    Counter::C => next.c -= 1,
                    Counter::D => next.d -= 1,
                }
                next.state = if_nonzero.clone();
            }
        }
    }
    Ok(StepResult::Next(next))
}

/// Runs from `(q_i, 0, 0)` for at most `step_cap` steps.
pub fn run_machine(m: &TwoCounterMachine, step_cap: usize) -> Execution {
    let mut trajectory = vec![MachineConfig::new(m.initial.clone(), 0, 0)];
    for steps in 0..=step_cap {
        let cur = trajectory.last().expect("non-empty");
        match step_machine(cur, m) {
            Ok(StepResult::Halted) => {
                return Execution {
                    outcome: Outcome::HaltsIn(steps),
                    trajectory,
                }
            }
            Ok(StepResult::Next(next)) if steps < step_cap => trajectory.push(next),
            // a validated machine never gets stuck; treat it like the cap
            _ => break,
        }
    }
    Execution {
        outcome: Outcome::NoHaltWithin(step_cap),
        trajectory,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_inc_and_halt() {
        let m = parse_machine("q0: inc c q1\nq1: halt").unwrap();
        assert_eq!(m.states(), ["q0", "q1"]);
        assert_eq!(m.initial(), "q0");
        assert_eq!(m.halt(), "q1");
        assert_eq!(
            m.instr("q0"),
            Some(&Instr::Inc {
                counter: Counter::C,
                next: "q1".into()
            })
        );
    }

    #[test]
    fn parses_test_comments_and_init() {
        let m =
            parse_machine("# demo\nq0: test c q1 q2  # branch\nq2: inc d q0\n@init q2\nq1: halt\n")
                .unwrap();
        assert!(matches!(m.instr("q0"), Some(Instr::Test { .. })));
        assert_eq!(m.initial(), "q2");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_machine("q0: inc c q1\nq0: inc d q1\nq1: halt"),
            Err(MachineError::Determinism { line: 2, .. })
        ));
        assert!(matches!(
            parse_machine("q1: halt\nq1: inc c q1"),
            Err(MachineError::Halt { .. })
        ));
        assert!(matches!(
            parse_machine("q0: inc c q9\nq1: halt"),
            Err(MachineError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_machine("q0: inc x q0\nq1: halt"),
            Err(MachineError::Parse { .. })
        ));
        assert!(matches!(
            parse_machine("q0: inc c q0"),
            Err(MachineError::Parse { .. })
        ));
        assert!(matches!(
            parse_machine("q0 inc c q0"),
            Err(MachineError::Parse { .. })
        ));
    }

    #[test]
    fn step_semantics() {
        let m = parse_machine("q0: inc c q1\nq1: halt").unwrap();
        assert_eq!(
            step_machine(&MachineConfig::new("q0", 0, 0), &m).unwrap(),
            StepResult::Next(MachineConfig::new("q1", 1, 0))
        );
        assert_eq!(
            step_machine(&MachineConfig::new("q1", 1, 0), &m).unwrap(),
            StepResult::Halted
        );

        let t = parse_machine("q0: test c qz qn\nqz: halt\nqn: inc c qz").unwrap();
        assert_eq!(
            step_machine(&MachineConfig::new("q0", 0, 5), &t).unwrap(),
            StepResult::Next(MachineConfig::new("qz", 0, 5))
        );
        assert_eq!(
            step_machine(&MachineConfig::new("q0", 2, 0), &t).unwrap(),
            StepResult::Next(MachineConfig::new("qn", 1, 0))
        );
    }

    #[test]
    fn run_examples() {
        let m = parse_machine("q0: inc c q1\nq1: halt").unwrap();
        let ex = run_machine(&m, 100);
        assert_eq!(ex.outcome, Outcome::HaltsIn(1));
        assert_eq!(
            ex.trajectory,
            vec![
                MachineConfig::new("q0", 0, 0),
                MachineConfig::new("q1", 1, 0)
            ]
        );

        let l = parse_machine("q0: inc c q0\nqh: halt").unwrap();
        let ex = run_machine(&l, 10);
        assert_eq!(ex.outcome, Outcome::NoHaltWithin(10));
        assert_eq!(ex.trajectory.len(), 11);

        let two = parse_machine("q0: inc c q1\nq1: inc d q2\nq2: halt").unwrap();
        let ex = run_machine(&two, 100);
        assert_eq!(ex.outcome, Outcome::HaltsIn(2));
        assert_eq!(
            ex.trajectory.last().unwrap(),
            &MachineConfig::new("q2", 1, 1)
        );
    }

    #[test]
    fn halt_at_start() {
        let m = parse_machine("q0: halt").unwrap();
        let ex = run_machine(&m, 5);
        assert_eq!(ex.outcome, Outcome::HaltsIn(0));
        assert_eq!(ex.trajectory.len(), 1);
    }
}
