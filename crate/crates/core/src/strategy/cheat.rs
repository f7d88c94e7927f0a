use num_traits::Signed;
use serde::{Deserialize, Serialize};

use super::{FaithfulMin, SharedLayout, Strategy};
use crate::machine::TwoCounterMachine;
use crate::model::{DelayedMove, Game, Run};
use crate::rational::{self, Rational};

/// One deliberate deviation from the faithful simulation, at state visit
/// `step` (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Cheat {
    /// Wait `delta` longer (or shorter) when updating `x`.
    Delay {
        step: usize,
        #[serde(with = "rational::serde_str")]
        delta: Rational,
    },
    /// Claim the other branch at a test.
    WrongBranch { step: usize },
    /// Leave through the exit.
    ExitAt { step: usize },
}

impl Cheat {
    pub fn step(&self) -> usize {
        match self {
            Cheat::Delay { step, .. } | Cheat::WrongBranch { step } | Cheat::ExitAt { step } => {
                *step
            }
        }
    }
}

/// Faithful Min with a list of cheats applied.
pub struct CheatingMin {
    inner: FaithfulMin,
    cheats: Vec<Cheat>,
}

pub fn cheating_min(
    m: &TwoCounterMachine,
    cheats: Vec<Cheat>,
    layout: SharedLayout,
) -> CheatingMin {
    CheatingMin {
        inner: super::faithful_min(m, None, layout),
        cheats,
    }
}

impl CheatingMin {
    fn at_step(&self) -> impl Iterator<Item = &Cheat> {
        let p = self.inner.step();
        self.cheats.iter().filter(move |c| c.step() == p)
    }
}

impl Strategy for CheatingMin {
    fn name(&self) -> String {
        format!("cheating({} cheats)", self.cheats.len())
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let mut mv = self.inner.decide(game, run)?;
        let at_state = self.inner_state(run);
        for c in self.at_step() {
            match c {
                Cheat::ExitAt { .. } => {
                    if let Some(q) = &at_state {
                        return self.inner.exit_move(q);
                    }
                }
                Cheat::WrongBranch { .. } => {
                    if mv.transition.ends_with(".claim_zero") {
                        mv.transition = mv.transition.replace(".claim_zero", ".claim_nonzero");
                    } else if mv.transition.ends_with(".claim_nonzero") {
                        mv.transition = mv.transition.replace(".claim_nonzero", ".claim_zero");
                    }
                }
                Cheat::Delay { delta, .. } => {
                    let updates =
                        mv.transition.ends_with(".inc") || mv.transition.ends_with("_wait.go");
                    if updates {
                        let d = &mv.delay + delta;
                        mv.delay = if d.is_negative() { rational::zero() } else { d };
                    }
                }
            }
        }
        Ok(mv)
    }

    fn observe(&mut self, game: &Game, run: &Run) {
        self.inner.observe(game, run)
    }
}

impl CheatingMin {
    fn inner_state(&self, run: &Run) -> Option<String> {
        self.inner.state_of(&run.last().location)
    }
}
