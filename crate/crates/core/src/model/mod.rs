//! Turn-based weighted timed games with exact semantics.
//!
//! A game is a finite set of locations (owned by MIN, MAX, or marked GOAL),
//! a finite set of clocks, and guarded transitions that may reset clocks.
//! Time elapses uniformly on all clocks while control sits in a location; a
//! delayed move `(d, t)` costs `d * w(location) + w(t)`.

mod io;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

pub use io::{deserialize, serialize};
pub use validate::{validate, ValidationReport, Violation, ViolationKind};

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown clock `{0}`")]
    UnknownClock(String),
    #[error("unknown location `{0}`")]
    UnknownLocation(String),
    #[error("unknown transition `{0}`")]
    UnknownTransition(String),
    #[error(
        "transition `{transition}` leaves `{expected}` but the configuration is in `{actual}`"
    )]
    SourceMismatch {
        transition: String,
        expected: String,
        actual: String,
    },
    #[error("location `{0}` is a goal; no move is possible")]
    FromGoal(String),
    #[error("negative delay {0}")]
    InvalidDelay(String),
    #[error("guard of `{transition}` violated after delay {delay}")]
    GuardViolation { transition: String, delay: String },
    #[error("run step {index} is inconsistent: {reason}")]
    InvalidRun { index: usize, reason: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Owner {
    #[serde(rename = "MIN")]
    Min,
    #[serde(rename = "MAX")]
    Max,
    #[serde(rename = "GOAL")]
    Goal,
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Owner::Min => "MIN",
            Owner::Max => "MAX",
            Owner::Goal => "GOAL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = ">")]
    Gt,
}

impl Cmp {
    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }

    /// True for comparators that cap how long one may wait.
    pub fn bounds_above(self) -> bool {
        matches!(self, Cmp::Lt | Cmp::Le | Cmp::Eq)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

/// `clock ⋈ bound`. The bound is signed only so that malformed input can be
/// reported by [`validate`] instead of rejected at parse time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClockConstraint {
    pub clock: String,
    pub op: Cmp,
    pub bound: i64,
}

impl ClockConstraint {
    pub fn new(clock: impl Into<String>, op: Cmp, bound: i64) -> Self {
        ClockConstraint {
            clock: clock.into(),
            op,
            bound,
        }
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}{}", self.clock, self.op.symbol(), self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub id: String,
    pub owner: Owner,
    pub weight: i64,
}

impl Location {
    pub fn new(id: impl Into<String>, owner: Owner, weight: i64) -> Self {
        Location {
            id: id.into(),
            owner,
            weight,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub id: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub guard: Vec<ClockConstraint>,
    #[serde(default)]
    pub resets: Vec<String>,
    pub weight: i64,
    /// Optional explicit controller; when present it must agree with the
    /// owner of `source`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub owner: Option<Owner>,
}

impl Transition {
    pub fn new(
        id: impl Into<String>,
        source: impl Into<String>,
        target: impl Into<String>,
    ) -> Self {
        Transition {
            id: id.into(),
            source: source.into(),
            target: target.into(),
            guard: Vec::new(),
            resets: Vec::new(),
            weight: 0,
            owner: None,
        }
    }

    pub fn guard(mut self, clock: &str, op: Cmp, bound: i64) -> Self {
        self.guard.push(ClockConstraint::new(clock, op, bound));
        self
    }

    pub fn reset(mut self, clock: &str) -> Self {
        self.resets.push(clock.to_string());
        self
    }

    pub fn weight(mut self, weight: i64) -> Self {
        self.weight = weight;
        self
    }
}

/// The plain, serializable description of a game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameDef {
    pub clocks: Vec<String>,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    pub initial: String,
}

/// An indexed, immutable game.
#[derive(Debug, Clone)]
pub struct Game {
    def: GameDef,
    loc_index: HashMap<String, usize>,
    tr_index: HashMap<String, usize>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for Game {
    fn eq(&self, other: &Self) -> bool {
        self.def == other.def
    }
}

impl Game {
    pub fn new(def: GameDef) -> Self {
        let loc_index: HashMap<_, _> = def
            .locations
            .iter()
            .enumerate()
            .map(|(i, l)| (l.id.clone(), i))
            .collect();
        let tr_index = def
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| (t.id.clone(), i))
            .collect();
        let mut outgoing = vec![Vec::new(); def.locations.len()];
        for (i, t) in def.transitions.iter().enumerate() {
            if let Some(&src) = loc_index.get(&t.source) {
                outgoing[src].push(i);
            }
        }
        Game {
            def,
            loc_index,
            tr_index,
            outgoing,
        }
    }

    pub fn def(&self) -> &GameDef {
        &self.def
    }

    pub fn into_def(self) -> GameDef {
        self.def
    }

    pub fn clocks(&self) -> &[String] {
        &self.def.clocks
    }

    pub fn locations(&self) -> &[Location] {
        &self.def.locations
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.def.transitions
    }

    pub fn initial(&self) -> &str {
        &self.def.initial
    }

    pub fn location(&self, id: &str) -> Result<&Location, ModelError> {
        self.loc_index
            .get(id)
            .map(|&i| &self.def.locations[i])
            .ok_or_else(|| ModelError::UnknownLocation(id.to_string()))
    }

    pub fn transition(&self, id: &str) -> Result<&Transition, ModelError> {
        self.tr_index
            .get(id)
            .map(|&i| &self.def.transitions[i])
            .ok_or_else(|| ModelError::UnknownTransition(id.to_string()))
    }

    pub fn outgoing(
        &self,
        location: &str,
    ) -> Result<impl Iterator<Item = &Transition>, ModelError> {
        let i = *self
            .loc_index
            .get(location)
            .ok_or_else(|| ModelError::UnknownLocation(location.to_string()))?;
        Ok(self.outgoing[i]
            .iter()
            .map(move |&t| &self.def.transitions[t]))
    }

    pub fn owner(&self, location: &str) -> Result<Owner, ModelError> {
        Ok(self.location(location)?.owner)
    }

    /// The all-zero configuration at the initial location.
    pub fn initial_config(&self) -> Configuration {
        Configuration::new(self.initial(), Valuation::zero(self.clocks()))
    }
}

/// Clock values, all non-negative.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Valuation(BTreeMap<String, Rational>);

impl Serialize for Valuation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let strings: BTreeMap<&String, String> =
            self.0.iter().map(|(c, v)| (c, rational::fmt(v))).collect();
        strings.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Valuation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let strings = BTreeMap::<String, String>::deserialize(d)?;
        strings
            .into_iter()
            .map(|(c, v)| rational::parse(&v).map(|q| (c, q)))
            .collect::<Result<_, _>>()
            .map(Valuation)
            .map_err(serde::de::Error::custom)
    }
}

impl Valuation {
    pub fn zero<S: AsRef<str>>(clocks: &[S]) -> Self {
        Valuation(
            clocks
                .iter()
                .map(|c| (c.as_ref().to_string(), rational::zero()))
                .collect(),
        )
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        Valuation(pairs.into_iter().map(|(c, v)| (c.into(), v)).collect())
    }

    pub fn get(&self, clock: &str) -> Result<&Rational, ModelError> {
        self.0
            .get(clock)
            .ok_or_else(|| ModelError::UnknownClock(clock.to_string()))
    }

    /// `ν + d`.
    pub fn delayed(&self, d: &Rational) -> Valuation {
        Valuation(self.0.iter().map(|(c, v)| (c.clone(), v + d)).collect())
    }

    /// `ν[X := 0]`.
    pub fn reset<S: AsRef<str>>(&self, clocks: &[S]) -> Result<Valuation, ModelError> {
        let mut next = self.0.clone();
        for c in clocks {
            let slot = next
                .get_mut(c.as_ref())
                .ok_or_else(|| ModelError::UnknownClock(c.as_ref().to_string()))?;
            *slot = rational::zero();
        }
        Ok(Valuation(next))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.0.iter()
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(c, v)| format!("{}={}", c, rational::fmt(v)))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    pub location: String,
    pub valuation: Valuation,
}

impl Configuration {
    pub fn new(location: impl Into<String>, valuation: Valuation) -> Self {
        Configuration {
            location: location.into(),
            valuation,
        }
    }

    pub fn clock(&self, clock: &str) -> Result<&Rational, ModelError> {
        self.valuation.get(clock)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DelayedMove {
    #[serde(with = "rational::serde_str")]
    pub delay: Rational,
    pub transition: String,
}

impl DelayedMove {
    pub fn new(delay: Rational, transition: impl Into<String>) -> Self {
        DelayedMove {
            delay,
            transition: transition.into(),
        }
    }

    pub fn now(transition: impl Into<String>) -> Self {
        Self::new(rational::zero(), transition)
    }
}

/// `ν ⊨ C`.
pub fn satisfies(valuation: &Valuation, guard: &[ClockConstraint]) -> Result<bool, ModelError> {
    for c in guard {
        let v = valuation.get(&c.clock)?;
        if !c.op.holds(v, &rational::int(c.bound)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Performs the delayed transition `(ℓ,ν) -(d,t)-> (ℓ',ν')`.
pub fn apply_move(
    config: &Configuration,
    mv: &DelayedMove,
    game: &Game,
) -> Result<Configuration, ModelError> {
    if mv.delay.is_negative() {
        return Err(ModelError::InvalidDelay(rational::fmt(&mv.delay)));
    }
    let t = game.transition(&mv.transition)?;
    if t.source != config.location {
        return Err(ModelError::SourceMismatch {
            transition: t.id.clone(),
            expected: t.source.clone(),
            actual: config.location.clone(),
        });
    }
    if game.owner(&t.source)? == Owner::Goal {
        return Err(ModelError::FromGoal(t.source.clone()));
    }
    let shifted = config.valuation.delayed(&mv.delay);
    if !satisfies(&shifted, &t.guard)? {
        return Err(ModelError::GuardViolation {
            transition: t.id.clone(),
            delay: rational::fmt(&mv.delay),
        });
    }
    Ok(Configuration::new(
        t.target.clone(),
        shifted.reset(&t.resets)?,
    ))
}

/// `d * w(ℓ) + w(t)` for a move out of `location`.
pub fn move_weight(game: &Game, location: &str, mv: &DelayedMove) -> Result<Rational, ModelError> {
    let loc = game.location(location)?;
    let t = game.transition(&mv.transition)?;
    Ok(&mv.delay * rational::int(loc.weight) + rational::int(t.weight))
}

/// Earliest delay after which `guard` holds, if some delay works.
///
/// Strict lower bounds have no earliest point and yield `None` unless they
/// already hold at delay zero.
pub fn earliest_delay(
    valuation: &Valuation,
    guard: &[ClockConstraint],
) -> Result<Option<Rational>, ModelError> {
    let mut lo = rational::zero();
    for c in guard {
        let v = valuation.get(&c.clock)?;
        let need = rational::int(c.bound) - v;
        if matches!(c.op, Cmp::Eq | Cmp::Ge) && need > lo {
            lo = need;
        }
    }
    Ok(satisfies(&valuation.delayed(&lo), guard)?.then_some(lo))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    #[serde(rename = "move")]
    pub mv: DelayedMove,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    pub config: Configuration,
}

/// A finite run with cached weight and duration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub initial: Configuration,
    pub steps: Vec<Step>,
    #[serde(with = "rational::serde_str")]
    weight: Rational,
    #[serde(with = "rational::serde_str")]
    duration: Rational,
}

impl Run {
    pub fn new(initial: Configuration) -> Self {
        Run {
            initial,
            steps: Vec::new(),
            weight: rational::zero(),
            duration: rational::zero(),
        }
    }

    pub fn last(&self) -> &Configuration {
        self.steps
            .last()
            .map(|s| &s.config)
            .unwrap_or(&self.initial)
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn weight(&self) -> &Rational {
        &self.weight
    }

    pub fn duration(&self) -> &Rational {
        &self.duration
    }

    /// Appends a move, validating it against `game`.
    pub fn extend(&mut self, game: &Game, mv: DelayedMove) -> Result<&Step, ModelError> {
        let from = self.last().clone();
        let next = apply_move(&from, &mv, game)?;
        let cost = move_weight(game, &from.location, &mv)?;
        self.weight += &cost;
        self.duration += &mv.delay;
        self.steps.push(Step {
            mv,
            cost,
            config: next,
        });
        Ok(self.steps.last().expect("just pushed"))
    }

    /// Concatenation `self · other`; `other` must start where `self` ends.
    pub fn concat(&self, other: &Run, game: &Game) -> Result<Run, ModelError> {
        if other.initial != *self.last() {
            return Err(ModelError::InvalidRun {
                index: self.len(),
                reason: "second run does not start at the end of the first".into(),
            });
        }
        let mut out = self.clone();
        for s in &other.steps {
            out.extend(game, s.mv.clone())?;
        }
        Ok(out)
    }
}

/// Σ (dᵢ·w(ℓᵢ) + w(tᵢ)), recomputed from scratch and checked step by step.
pub fn run_weight(run: &Run, game: &Game) -> Result<Rational, ModelError> {
    let mut total = rational::zero();
    let mut at = run.initial.clone();
    for (index, s) in run.steps.iter().enumerate() {
        let next = apply_move(&at, &s.mv, game).map_err(|e| ModelError::InvalidRun {
            index,
            reason: e.to_string(),
        })?;
        if next != s.config {
            return Err(ModelError::InvalidRun {
                index,
                reason: "recorded configuration differs from the semantics".into(),
            });
        }
        total += move_weight(game, &at.location, &s.mv)?;
        at = next;
    }
    Ok(total)
}

pub fn run_duration(run: &Run) -> Rational {
    run.steps
        .iter()
        .fold(Rational::zero(), |acc, s| acc + &s.mv.delay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn xy(x: Rational, y: Rational) -> Valuation {
        Valuation::from_pairs([("x", x), ("y", y)])
    }

    fn two_loc(weight: i64, tweight: i64) -> Game {
        Game::new(GameDef {
            clocks: vec!["x".into(), "y".into()],
            locations: vec![
                Location::new("l", Owner::Min, weight),
                Location::new("m", Owner::Min, 0),
                Location::new("g", Owner::Goal, 0),
            ],
            transitions: vec![
                Transition::new("t", "l", "m").reset("y").weight(tweight),
                Transition::new("u", "l", "g").guard("x", Cmp::Eq, 1),
                Transition::new("v", "m", "g"),
            ],
            initial: "l".into(),
        })
    }

    #[test]
    fn satisfies_examples() {
        let g = [ClockConstraint::new("x", Cmp::Lt, 1)];
        assert!(satisfies(&xy(ratio(1, 2), int(0)), &g).unwrap());
        assert!(!satisfies(&xy(int(1), int(0)), &g).unwrap());
        let eq = [ClockConstraint::new("x", Cmp::Eq, 1)];
        assert!(!satisfies(&xy(ratio(49, 50), int(0)), &eq).unwrap());
        let bad = [ClockConstraint::new("z", Cmp::Eq, 1)];
        assert_eq!(
            satisfies(&xy(int(0), int(0)), &bad),
            Err(ModelError::UnknownClock("z".into()))
        );
    }

    #[test]
    fn apply_move_wait_and_reset() {
        let game = two_loc(30, 0);
        let c = Configuration::new("l", xy(ratio(4, 5), int(0)));
        let next = apply_move(&c, &DelayedMove::new(ratio(9, 50), "t"), &game).unwrap();
        assert_eq!(next, Configuration::new("m", xy(ratio(49, 50), int(0))));
        // the input is untouched
        assert_eq!(c.valuation.get("x").unwrap(), &ratio(4, 5));

        let same = apply_move(&c, &DelayedMove::now("t"), &game).unwrap();
        assert_eq!(same.location, "m");
        assert_eq!(same.valuation.get("x").unwrap(), &ratio(4, 5));

        let half = Configuration::new("l", xy(ratio(1, 2), int(0)));
        let at_one = apply_move(&half, &DelayedMove::new(ratio(1, 2), "u"), &game).unwrap();
        assert_eq!(at_one.valuation.get("x").unwrap(), &int(1));
    }

    #[test]
    fn apply_move_errors() {
        let game = two_loc(30, 0);
        let c = Configuration::new("l", xy(int(0), int(0)));
        assert!(matches!(
            apply_move(&c, &DelayedMove::new(ratio(-1, 2), "t"), &game),
            Err(ModelError::InvalidDelay(_))
        ));
        assert!(matches!(
            apply_move(&c, &DelayedMove::new(ratio(1, 2), "u"), &game),
            Err(ModelError::GuardViolation { .. })
        ));
        assert!(matches!(
            apply_move(&c, &DelayedMove::now("v"), &game),
            Err(ModelError::SourceMismatch { .. })
        ));
        let g = Configuration::new("g", xy(int(0), int(0)));
        assert!(apply_move(&g, &DelayedMove::now("v"), &game).is_err());
    }

    #[test]
    fn run_weight_examples() {
        let game = two_loc(30, 31);
        let empty = Run::new(game.initial_config());
        assert_eq!(run_weight(&empty, &game).unwrap(), int(0));
        assert_eq!(run_duration(&empty), int(0));

        let mut one = Run::new(game.initial_config());
        one.extend(&game, DelayedMove::new(ratio(1, 2), "t"))
            .unwrap();
        assert_eq!(run_weight(&one, &game).unwrap(), int(46));

        let game = two_loc(30, 0);
        let mut two = Run::new(game.initial_config());
        two.extend(&game, DelayedMove::new(ratio(1, 4), "t"))
            .unwrap();
        two.extend(&game, DelayedMove::new(ratio(1, 4), "v"))
            .unwrap();
        assert_eq!(run_weight(&two, &game).unwrap(), ratio(15, 2));
        assert_eq!(two.weight(), &ratio(15, 2));
        assert_eq!(run_duration(&two), ratio(1, 2));
    }

    #[test]
    fn durations_add_up() {
        let game = two_loc(1, 0);
        let mut r = Run::new(game.initial_config());
        r.extend(&game, DelayedMove::new(ratio(1, 2), "t")).unwrap();
        r.extend(&game, DelayedMove::new(ratio(1, 3), "v")).unwrap();
        assert_eq!(run_duration(&r), ratio(5, 6));
    }

    #[test]
    fn tampered_run_is_rejected() {
        let game = two_loc(30, 0);
        let mut r = Run::new(game.initial_config());
        r.extend(&game, DelayedMove::new(ratio(1, 4), "t")).unwrap();
        r.steps[0].config.location = "g".into();
        assert!(matches!(
            run_weight(&r, &game),
            Err(ModelError::InvalidRun { .. })
        ));
    }

    #[test]
    fn earliest_delay_for_equality_guard() {
        let v = xy(ratio(1, 4), int(0));
        let g = [ClockConstraint::new("x", Cmp::Eq, 1)];
        assert_eq!(earliest_delay(&v, &g).unwrap(), Some(ratio(3, 4)));
        let past = xy(ratio(5, 4), int(0));
        assert_eq!(earliest_delay(&past, &g).unwrap(), None);
        let strict = [ClockConstraint::new("x", Cmp::Gt, 1)];
        assert_eq!(earliest_delay(&v, &strict).unwrap(), None);
    }
}
