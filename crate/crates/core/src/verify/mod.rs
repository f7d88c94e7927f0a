//! Experiment suites replaying the construction's cost identities and value
//! bounds, with exact pass/fail verdicts.

mod control;
mod fixtures;
mod gadgets;
mod mutation;
mod reduction;

use std::fmt::Write as _;

use serde::Serialize;

use crate::rational::{self, Frac, Rational};

pub use control::{control_entries, controls, replay_control, suite_cz_cnz, ControlEntry};
pub use fixtures::{fixture, fixture_names, load_fixtures, Fixture, FixtureError, FIXTURES_ENV};
pub use gadgets::{compiled_gadgets, suite_gadgets};
pub use mutation::{mutation_sweep, MutantOutcome};
pub use reduction::{cheat_family, halting_bound, suite_existence, suite_reduction};

/// What a check's expected value rests on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// A closed-form cost formula.
    Formula,
    /// A scripted play between two strategies.
    Replay,
    /// An exhaustive search over a finite set.
    Enumeration,
    /// A property of the game graph.
    Structural,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub id: String,
    /// Plain statement of what is being checked.
    pub claim: String,
    pub basis: Basis,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Check {
    pub fn new(id: impl Into<String>, claim: impl Into<String>, basis: Basis) -> CheckBuilder {
        CheckBuilder {
            id: id.into(),
            claim: claim.into(),
            basis,
            witness: None,
        }
    }
}

pub struct CheckBuilder {
    id: String,
    claim: String,
    basis: Basis,
    witness: Option<String>,
}

impl CheckBuilder {
    pub fn witness(mut self, w: impl Into<String>) -> Self {
        self.witness = Some(w.into());
        self
    }

    fn done(self, expected: String, observed: String, pass: bool) -> Check {
        Check {
            id: self.id,
            claim: self.claim,
            basis: self.basis,
            expected,
            observed,
            pass,
            witness: self.witness,
        }
    }

    pub fn eq(self, expected: &Rational, observed: &Rational) -> Check {
        self.done(
            format!("= {}", Frac(expected)),
            Frac(observed).to_string(),
            expected == observed,
        )
    }

    pub fn ge(self, bound: &Rational, observed: &Rational) -> Check {
        self.done(
            format!(">= {}", Frac(bound)),
            Frac(observed).to_string(),
            observed >= bound,
        )
    }

    pub fn gt(self, bound: &Rational, observed: &Rational) -> Check {
        self.done(
            format!("> {}", Frac(bound)),
            Frac(observed).to_string(),
            observed > bound,
        )
    }

    pub fn le(self, bound: &Rational, observed: &Rational) -> Check {
        self.done(
            format!("<= {}", Frac(bound)),
            Frac(observed).to_string(),
            observed <= bound,
        )
    }

    pub fn within(self, lo: &Rational, hi: &Rational, observed: &Rational) -> Check {
        self.done(
            format!("in [{}, {}]", Frac(lo), Frac(hi)),
            Frac(observed).to_string(),
            lo <= observed && observed <= hi,
        )
    }

    pub fn holds(
        self,
        expected: impl Into<String>,
        observed: impl Into<String>,
        pass: bool,
    ) -> Check {
        self.done(expected.into(), observed.into(), pass)
    }
}

pub const SAMPLED_OPPONENTS: &str = "bounds are secured by the named strategies against the listed \
opponent sets only; they are not game values, and a lower bound over all Min strategies is sampled, \
not proven";

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub header: String,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>) -> Self {
        VerificationReport {
            suite: suite.into(),
            header: SAMPLED_OPPONENTS.into(),
            checks: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// Adds one check that every listed play lasted at most 3 time units.
    pub fn push_duration_bound(&mut self, durations: &[(String, Rational)]) {
        let three = rational::int(3);
        let worst = durations.iter().max_by(|a, b| a.1.cmp(&b.1));
        let (who, max) = match worst {
            Some((w, d)) => (w.clone(), d.clone()),
            None => ("-".into(), rational::zero()),
        };
        self.push(
            Check::new(
                format!("{}/duration", self.suite),
                format!("all {} plays last at most 3 time units", durations.len()),
                Basis::Replay,
            )
            .witness(who)
            .le(&three, &max),
        );
    }

    /// Fixed-width table, one row per check.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "suite {}: {}",
            self.suite,
            if self.pass() { "PASS" } else { "FAIL" }
        );
        let _ = writeln!(out, "note: {}", self.header);
        let w = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{verdict}  {:w$}  {}  expected {}  observed {}",
                c.id, c.claim, c.expected, c.observed
            );
        }
        out
    }
}

/// Contract and bound checks for one standalone gadget, e.g. one read from
/// a file.
pub fn check_gadget(h: &crate::gadgets::GadgetHandle) -> VerificationReport {
    let mut report = VerificationReport::new(format!("gadget/{}", gadgets::label(h)));
    report.checks = mutation::checks_for(h);
    report
}

/// Knobs shared by all suites.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    /// 1 runs checks sequentially, 0 uses every core.
    pub jobs: usize,
    pub step_cap: usize,
    /// Randomised Max samples per threshold in the non-halting checks.
    pub random_samples: u64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            jobs: 1,
            step_cap: 600,
            random_samples: 50,
        }
    }
}
