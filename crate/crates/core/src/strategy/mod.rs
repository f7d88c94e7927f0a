//! Strategies as executable objects and the play loop.
//!
//! A strategy only ever returns a move for a location its player owns. It
//! keeps its own internal state, advanced through [`Strategy::observe`]
//! after every step of the play, whoever moved.

mod cheat;
mod control;
mod faithful;
mod grid;
mod max;
mod spec;
mod trace;

use std::fmt;
use std::sync::Arc;

use num_traits::Signed;
use serde::Serialize;

use crate::compiler::{Layout, ModuleEntry};
use crate::model::{earliest_delay, Configuration, DelayedMove, Game, Owner, Run};
use crate::rational::{self, Rational};

pub use cheat::{cheating_min, Cheat, CheatingMin};
pub use control::{ControlMax, ControlMin};
pub use faithful::{faithful_min, FaithfulMin};
pub use grid::{grid_minimax, GridError, GridValue};
pub use max::{
    honest_max, punisher_max, random_max, strict_punisher_max, HonestMax, PunisherMax, RandomMax,
    Window,
};
pub use spec::{MaxSpec, MinSpec, SpecError};
pub use trace::{
    bookkeeping, control_bookkeeping, render_trace, trace_json, ControlRow, SimRow, TraceFile,
    TraceLine,
};

pub const DEFAULT_STEP_CAP: usize = 10_000;

pub trait Strategy: Send {
    fn name(&self) -> String;

    /// The move to play from `run.last()`, which is owned by this player.
    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String>;

    /// Called after every step appended to `run`.
    fn observe(&mut self, _game: &Game, _run: &Run) {}
}

impl<S: Strategy + ?Sized> Strategy for Box<S> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        (**self).decide(game, run)
    }

    fn observe(&mut self, game: &Game, run: &Run) {
        (**self).observe(game, run)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{player} strategy fault at step {step}: {reason}")]
pub struct StrategyFault {
    pub player: Owner,
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PlayStatus {
    Goal,
    StepCap,
}

/// A run's weight with the infinite-run convention.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(q) => Some(q),
            Cost::Infinite => None,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(q) => write!(f, "{}", rational::Frac(q)),
            Cost::Infinite => f.write_str("INFINITE"),
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlayOutcome {
    pub status: PlayStatus,
    /// INFINITE when the cap was hit.
    pub weight: Cost,
    /// Weight accumulated so far, finite even at the cap.
    #[serde(with = "rational::serde_str")]
    pub accumulated: Rational,
    #[serde(with = "rational::serde_str")]
    pub duration: Rational,
    pub trace: Run,
}

/// Plays the two strategies against each other from `initial`.
pub fn play(
    game: &Game,
    initial: Configuration,
    min: &mut dyn Strategy,
    max: &mut dyn Strategy,
    step_cap: usize,
) -> Result<PlayOutcome, StrategyFault> {
    let mut run = Run::new(initial);
    let status = loop {
        let owner = game
            .owner(&run.last().location)
            .map_err(|e| StrategyFault {
                player: Owner::Goal,
                step: run.len(),
                reason: e.to_string(),
            })?;
        if owner == Owner::Goal {
            break PlayStatus::Goal;
        }
        if run.len() >= step_cap {
            break PlayStatus::StepCap;
        }
        let step = run.len();
        let fault = |reason: String| StrategyFault {
            player: owner,
            step,
            reason,
        };
        let mover: &mut dyn Strategy = if owner == Owner::Min {
            &mut *min
        } else {
            &mut *max
        };
        let mv = mover.decide(game, &run).map_err(fault)?;
        run.extend(game, mv).map_err(|e| fault(e.to_string()))?;
        min.observe(game, &run);
        max.observe(game, &run);
    };
    let accumulated = run.weight().clone();
    Ok(PlayOutcome {
        status,
        weight: match status {
            PlayStatus::Goal => Cost::Finite(accumulated.clone()),
            PlayStatus::StepCap => Cost::Infinite,
        },
        accumulated,
        duration: run.duration().clone(),
        trace: run,
    })
}

/// Shared layout handle for strategies.
pub type SharedLayout = Arc<Layout>;

/// Earliest move along the first non-escape transition that can fire.
pub(crate) fn forced_move(
    game: &Game,
    layout: &Layout,
    at: &Configuration,
) -> Result<DelayedMove, String> {
    let mut fallback = None;
    for t in game.outgoing(&at.location).map_err(|e| e.to_string())? {
        if let Some(d) = earliest_delay(&at.valuation, &t.guard).map_err(|e| e.to_string())? {
            if !layout.is_escape(&t.id) {
                return Ok(DelayedMove::new(d, t.id.clone()));
            }
            fallback.get_or_insert(DelayedMove::new(d, t.id.clone()));
        }
    }
    fallback.ok_or_else(|| format!("no enabled transition at {}", at.location))
}

/// Weight of following forced moves from `at` until a goal.
fn forced_cost(
    game: &Game,
    layout: &Layout,
    at: Configuration,
    first: DelayedMove,
) -> Result<Rational, String> {
    let mut run = Run::new(at);
    run.extend(game, first).map_err(|e| e.to_string())?;
    for _ in 0..32 {
        if game
            .owner(&run.last().location)
            .map_err(|e| e.to_string())?
            == Owner::Goal
        {
            return Ok(run.weight().clone());
        }
        let mv = forced_move(game, layout, run.last())?;
        run.extend(game, mv).map_err(|e| e.to_string())?;
    }
    Err("stop path does not reach a goal".into())
}

/// The stop port of a CEC/CM entry with the larger exact cost; ties go upper.
pub(crate) fn costliest_stop(
    game: &Game,
    layout: &Layout,
    m: &ModuleEntry,
    at: &Configuration,
) -> Result<DelayedMove, String> {
    let up = DelayedMove::now(m.ports["upper"].clone());
    let lo = DelayedMove::now(m.ports["lower"].clone());
    let cu = forced_cost(game, layout, at.clone(), up.clone())?;
    let cl = forced_cost(game, layout, at.clone(), lo.clone())?;
    Ok(if cu >= cl { up } else { lo })
}

/// Wait to `target` on `clock`, never negative.
pub(crate) fn wait_until(at: &Configuration, clock: &str, target: &Rational) -> Rational {
    let v = at
        .valuation
        .get(clock)
        .cloned()
        .unwrap_or_else(|_| rational::zero());
    let d = target - v;
    if d.is_negative() {
        rational::zero()
    } else {
        d
    }
}

pub(crate) fn clock(at: &Configuration, c: &str) -> Rational {
    at.valuation
        .get(c)
        .cloned()
        .unwrap_or_else(|_| rational::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Cmp, GameDef, Location, Transition};
    use crate::rational::int;

    struct Waiter(Rational);

    impl Strategy for Waiter {
        fn name(&self) -> String {
            "waiter".into()
        }

        fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
            let t = game.outgoing(&run.last().location).unwrap().next().unwrap();
            Ok(DelayedMove::new(self.0.clone(), t.id.clone()))
        }
    }

    fn one_location() -> Game {
        Game::new(GameDef {
            clocks: vec!["x".into()],
            locations: vec![
                Location::new("l", Owner::Min, 2),
                Location::new("g", Owner::Goal, 0),
            ],
            transitions: vec![Transition::new("t", "l", "g").guard("x", Cmp::Eq, 1)],
            initial: "l".into(),
        })
    }

    #[test]
    fn trivial_play() {
        let g = one_location();
        let out = play(
            &g,
            g.initial_config(),
            &mut Waiter(int(1)),
            &mut Waiter(int(0)),
            10,
        )
        .unwrap();
        assert_eq!(out.status, PlayStatus::Goal);
        assert_eq!(out.weight, Cost::Finite(int(2)));
        assert_eq!(out.duration, int(1));
    }

    #[test]
    fn invalid_move_is_a_fault() {
        let g = one_location();
        let err = play(
            &g,
            g.initial_config(),
            &mut Waiter(int(0)),
            &mut Waiter(int(0)),
            10,
        )
        .unwrap_err();
        assert_eq!(err.player, Owner::Min);
        assert_eq!(err.step, 0);
    }

    #[test]
    fn cap_gives_infinite_weight() {
        let g = Game::new(GameDef {
            clocks: vec!["x".into()],
            locations: vec![Location::new("l", Owner::Min, 1)],
            transitions: vec![Transition::new("t", "l", "l")],
            initial: "l".into(),
        });
        let out = play(
            &g,
            g.initial_config(),
            &mut Waiter(rational::ratio(1, 1000)),
            &mut Waiter(int(0)),
            100,
        )
        .unwrap();
        assert_eq!(out.status, PlayStatus::StepCap);
        assert_eq!(out.weight, Cost::Infinite);
        assert_eq!(out.accumulated, rational::ratio(1, 10));
        assert!(Cost::Infinite > Cost::Finite(int(1000)));
    }
}
