//! Brute-force game value on a delay grid, for small games only.

use std::collections::HashMap;

use serde::Serialize;

use super::Cost;
use crate::model::{apply_move, move_weight, Configuration, DelayedMove, Game, Owner};
use crate::rational::{self, int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GridError {
    #[error("node budget of {0} exceeded")]
    ResourceExceeded(usize),
    #[error("{0}")]
    Model(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct GridValue {
    /// INFINITE when Min cannot force a goal within the depth.
    pub value: Cost,
    pub best: Option<DelayedMove>,
    pub nodes: usize,
}

struct Search<'a> {
    game: &'a Game,
    delays: Vec<Rational>,
    budget: usize,
    nodes: usize,
    memo: HashMap<(Configuration, usize), (Cost, Option<DelayedMove>)>,
}

/// Minimax value where every delay is a multiple of `1/denominator` up to
/// `horizon`, and play is cut after `depth` moves (valued `+∞`).
pub fn grid_minimax(
    game: &Game,
    initial: &Configuration,
    denominator: u32,
    horizon: u32,
    depth: usize,
    budget: usize,
) -> Result<GridValue, GridError> {
    let den = denominator.max(1) as i64;
    let delays = (0..=horizon as i64 * den)
        .map(|j| rational::ratio(j, den))
        .collect();
    let mut s = Search {
        game,
        delays,
        budget,
        nodes: 0,
        memo: HashMap::new(),
    };
    let (value, best) = s.value(initial, depth)?;
    Ok(GridValue {
        value,
        best,
        nodes: s.nodes,
    })
}

impl Search<'_> {
    fn value(
        &mut self,
        at: &Configuration,
        depth: usize,
    ) -> Result<(Cost, Option<DelayedMove>), GridError> {
        let owner = self
            .game
            .owner(&at.location)
            .map_err(|e| GridError::Model(e.to_string()))?;
        if owner == Owner::Goal {
            return Ok((Cost::Finite(int(0)), None));
        }
        if depth == 0 {
            return Ok((Cost::Infinite, None));
        }
        let key = (at.clone(), depth);
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(GridError::ResourceExceeded(self.budget));
        }
        let mut best: Option<(Cost, DelayedMove)> = None;
        let ids: Vec<String> = self
            .game
            .outgoing(&at.location)
            .map_err(|e| GridError::Model(e.to_string()))?
            .map(|t| t.id.clone())
            .collect();
        for t in ids {
            for d in self.delays.clone() {
                let mv = DelayedMove::new(d, t.clone());
                let Ok(next) = apply_move(at, &mv, self.game) else {
                    continue;
                };
                let w = move_weight(self.game, &at.location, &mv)
                    .map_err(|e| GridError::Model(e.to_string()))?;
                let cost = match self.value(&next, depth - 1)?.0 {
                    Cost::Finite(v) => Cost::Finite(v + w),
                    Cost::Infinite => Cost::Infinite,
                };
                let better = match &best {
                    None => true,
                    Some((b, _)) if owner == Owner::Min => cost < *b,
                    Some((b, _)) => cost > *b,
                };
                if better {
                    best = Some((cost, mv));
                }
            }
        }
        // a dead end counts against whoever is stuck there as a non-ending play
        let out = match best {
            Some((c, mv)) => (c, Some(mv)),
            None => (Cost::Infinite, None),
        };
        self.memo.insert(key, out.clone());
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_exit, GadgetParams};
    use crate::model::{Cmp, GameDef, Location, Transition, Valuation};

    #[test]
    fn exit_from_zero_costs_62() {
        let g = build_exit().game();
        let v = grid_minimax(&g, &g.initial_config(), 2, 1, 4, 10_000).unwrap();
        assert_eq!(v.value, Cost::Finite(int(62)));
    }

    #[test]
    fn min_picks_the_cheaper_branch() {
        let g = Game::new(GameDef {
            clocks: vec!["x".into()],
            locations: vec![
                Location::new("l", Owner::Min, 1),
                Location::new("g", Owner::Goal, 0),
            ],
            transitions: vec![
                Transition::new("a", "l", "g").guard("x", Cmp::Eq, 1),
                Transition::new("b", "l", "g").weight(3),
            ],
            initial: "l".into(),
        });
        let v = grid_minimax(&g, &g.initial_config(), 1, 1, 2, 100).unwrap();
        assert_eq!(v.value, Cost::Finite(int(1)));
        assert_eq!(v.best.unwrap().transition, "a");
    }

    #[test]
    fn budget_is_enforced() {
        let g = crate::gadgets::build_cec(&GadgetParams::cec(30, 3, 28, 31))
            .unwrap()
            .game();
        let start = Configuration::new(
            g.initial(),
            Valuation::from_pairs([("x", rational::ratio(1, 2)), ("y", int(0))]),
        );
        assert!(matches!(
            grid_minimax(&g, &start, 10, 1, 8, 3),
            Err(GridError::ResourceExceeded(3))
        ));
    }
}
