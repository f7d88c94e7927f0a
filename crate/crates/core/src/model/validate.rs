use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use super::{Game, Owner};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NotTurnBased,
    NegativeWeight,
    GoalWeight,
    GoalOutgoing,
    NegativeBound,
    UnknownClock,
    UnknownLocation,
    DuplicateId,
    DeadEnd,
}

impl ViolationKind {
    pub fn label(self) -> &'static str {
        match self {
            ViolationKind::NotTurnBased => "not turn-based",
            ViolationKind::NegativeWeight => "negative weight",
            ViolationKind::GoalWeight => "goal location with weight",
            ViolationKind::GoalOutgoing => "goal location with outgoing transition",
            ViolationKind::NegativeBound => "guard bound is not a natural",
            ViolationKind::UnknownClock => "unknown clock",
            ViolationKind::UnknownLocation => "unknown location",
            ViolationKind::DuplicateId => "duplicate id",
            ViolationKind::DeadEnd => "non-goal location without outgoing transitions",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub subject: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind.label(), self.subject)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    fn push(&mut self, kind: ViolationKind, subject: impl Into<String>) {
        self.violations.push(Violation {
            kind,
            subject: subject.into(),
        });
    }
}

/// Structural well-formedness. Never fails; problems become report entries.
pub fn validate(game: &Game) -> ValidationReport {
    let mut report = ValidationReport::default();
    let clocks: HashSet<&str> = game.clocks().iter().map(String::as_str).collect();

    let mut seen = HashSet::new();
    for l in game.locations() {
        if !seen.insert(l.id.as_str()) {
            report.push(ViolationKind::DuplicateId, &l.id);
        }
        if l.weight < 0 {
            report.push(ViolationKind::NegativeWeight, &l.id);
        }
        if l.owner == Owner::Goal && l.weight != 0 {
            report.push(ViolationKind::GoalWeight, &l.id);
        }
    }
    if game.location(game.initial()).is_err() {
        report.push(ViolationKind::UnknownLocation, game.initial());
    }

    let mut seen = HashSet::new();
    for t in game.transitions() {
        if !seen.insert(t.id.as_str()) {
            report.push(ViolationKind::DuplicateId, &t.id);
        }
        if t.weight < 0 {
            report.push(ViolationKind::NegativeWeight, &t.id);
        }
        for end in [&t.source, &t.target] {
            if game.location(end).is_err() {
                report.push(
                    ViolationKind::UnknownLocation,
                    format!("{} in {}", end, t.id),
                );
            }
        }
        for c in &t.guard {
            if c.bound < 0 {
                report.push(ViolationKind::NegativeBound, format!("{} in {}", c, t.id));
            }
            if !clocks.contains(c.clock.as_str()) {
                report.push(
                    ViolationKind::UnknownClock,
                    format!("{} in {}", c.clock, t.id),
                );
            }
        }
        for r in &t.resets {
            if !clocks.contains(r.as_str()) {
                report.push(ViolationKind::UnknownClock, format!("{} in {}", r, t.id));
            }
        }
        if let Ok(src) = game.location(&t.source) {
            if src.owner == Owner::Goal {
                report.push(ViolationKind::GoalOutgoing, &t.id);
            } else if let Some(owner) = t.owner {
                if owner != src.owner {
                    report.push(
                        ViolationKind::NotTurnBased,
                        format!("{} via {}", src.id, t.id),
                    );
                }
            }
        }
    }

    for l in game.locations() {
        if l.owner != Owner::Goal
            && game
                .outgoing(&l.id)
                .map(|mut it| it.next().is_none())
                .unwrap_or(false)
        {
            report.push(ViolationKind::DeadEnd, &l.id);
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cmp, GameDef, Location, Transition};

    fn base() -> GameDef {
        GameDef {
            clocks: vec!["x".into()],
            locations: vec![
                Location::new("a", Owner::Min, 1),
                Location::new("g", Owner::Goal, 0),
            ],
            transitions: vec![Transition::new("t", "a", "g").guard("x", Cmp::Le, 2)],
            initial: "a".into(),
        }
    }

    #[test]
    fn clean_game_passes() {
        assert!(validate(&Game::new(base())).is_ok());
    }

    #[test]
    fn negative_weight_reported() {
        let mut d = base();
        d.locations[0].weight = -1;
        let r = validate(&Game::new(d));
        assert!(r.has(ViolationKind::NegativeWeight));
        assert_eq!(r.violations[0].to_string(), "negative weight: a");
    }

    #[test]
    fn mixed_controllers_are_not_turn_based() {
        let mut d = base();
        let mut t1 = Transition::new("t1", "a", "g");
        t1.owner = Some(Owner::Min);
        let mut t2 = Transition::new("t2", "a", "g");
        t2.owner = Some(Owner::Max);
        d.transitions.extend([t1, t2]);
        let r = validate(&Game::new(d));
        assert!(r.has(ViolationKind::NotTurnBased));
        assert!(r
            .violations
            .iter()
            .any(|v| v.to_string().starts_with("not turn-based")));
    }

    #[test]
    fn structural_problems() {
        let mut d = base();
        d.transitions.push(Transition::new("back", "g", "a"));
        d.transitions
            .push(Transition::new("neg", "a", "g").guard("z", Cmp::Lt, -1));
        d.locations.push(Location::new("stuck", Owner::Max, 0));
        let r = validate(&Game::new(d));
        for k in [
            ViolationKind::GoalOutgoing,
            ViolationKind::NegativeBound,
            ViolationKind::UnknownClock,
            ViolationKind::DeadEnd,
        ] {
            assert!(r.has(k), "{k:?} missing from {:?}", r.violations);
        }
    }
}
