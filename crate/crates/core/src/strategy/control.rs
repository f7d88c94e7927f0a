//! Inner strategies for the zero and non-zero controls.

use num_traits::Signed;

use super::{clock, costliest_stop, forced_move, wait_until, SharedLayout, Strategy};
use crate::compiler::ModuleEntry;
use crate::gadgets::GadgetKind;
use crate::machine::{mu_nonzero, mu_zero, nearest_member, Family};
use crate::model::{Configuration, DelayedMove, Game, Run};
use crate::rational::{self, int, ratio, Rational};

/// Min inside a control: multiply `y` towards 1 along the nearest member of
/// the gadget's family, or take the direct path when `1−a` is small.
pub struct ControlMin {
    layout: SharedLayout,
    target: Option<Rational>,
}

impl ControlMin {
    pub fn new(layout: SharedLayout) -> Self {
        ControlMin {
            layout,
            target: None,
        }
    }

    pub(crate) fn decide_in(
        &mut self,
        game: &Game,
        root: &ModuleEntry,
        at: &Configuration,
    ) -> Result<DelayedMove, String> {
        let loc = at.location.as_str();
        let k = root.params.k;
        let port = |name: &str| {
            root.ports
                .get(name)
                .cloned()
                .ok_or_else(|| format!("{} has no port {name}", root.id))
        };
        let y = clock(at, "y");

        if loc == root.anchors["entry"] {
            let x = clock(at, "x");
            let wait = wait_until(at, "x", &int(1));
            if root.kind == GadgetKind::Cnz {
                return Ok(DelayedMove::new(wait, port("translate")?));
            }
            let direct = x.is_positive() && x <= ratio(3 - k, 8 - 2 * k);
            let p = if direct { "to_flag4" } else { "to_flag1" };
            return Ok(DelayedMove::new(wait, port(p)?));
        }
        if root.anchors.get("flag4").is_some_and(|f| f == loc) {
            return Ok(DelayedMove::new(
                wait_until(at, "y", &int(1)),
                port("flag4")?,
            ));
        }
        if root.anchors.get("force").is_some_and(|f| f == loc) {
            let first = Family::nonzero_control(k as u32);
            let target = match nearest_member(&y, &first) {
                Ok(n) => int(k + 1) * n.value,
                Err(_) => y.clone(),
            };
            return Ok(DelayedMove::new(
                wait_until(at, "y", &target),
                port("force")?,
            ));
        }
        if loc == root.anchors["flag1"] {
            if y == int(1) {
                return Ok(DelayedMove::now(port("done")?));
            }
            let (factor, target) = self.plan(root, &y);
            self.target = Some(target);
            return Ok(DelayedMove::now(port(&format!("mul{factor}"))?));
        }
        // a branch location: its commit port leaves from here
        let commit = root
            .ports
            .iter()
            .filter(|(name, _)| name.starts_with("commit"))
            .find(|(_, t)| game.transition(t).is_ok_and(|t| t.source == loc));
        if let Some((_, t)) = commit {
            let target = self.target.take().unwrap_or_else(|| y.clone());
            return Ok(DelayedMove::new(wait_until(at, "y", &target), t.clone()));
        }
        forced_move(game, &self.layout, at)
    }

    /// Factor to multiply by next and the value of `y` to reach.
    fn plan(&self, root: &ModuleEntry, y: &Rational) -> (i64, Rational) {
        let k = root.params.k;
        let other = 4 - k;
        let bases: Vec<(u32, u32)> = match root.kind {
            GadgetKind::Cnz => vec![(k as u32 + 1, 0), (other as u32, 0), (5, 0)],
            _ => vec![(other as u32, 0), (5, 0)],
        };
        let family = Family { bases };
        match nearest_member(y, &family) {
            Ok(n) => match n.exps.iter().position(|&e| e >= 1) {
                Some(i) => {
                    let base = family.bases[i].0 as i64;
                    (base, int(base) * n.value)
                }
                None => (other, int(1)),
            },
            Err(_) => (other, int(1)),
        }
    }
}

impl Strategy for ControlMin {
    fn name(&self) -> String {
        "control-min".into()
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        match self.layout.root_module_at(&at.location).cloned() {
            Some(root) if matches!(root.kind, GadgetKind::Cz | GadgetKind::Cnz) => {
                self.decide_in(game, &root, at)
            }
            _ => forced_move(game, &self.layout, at),
        }
    }
}

/// Max inside a control: never waits, and stops the game at an inner CM as
/// soon as Min's multiplication is off by at least `μ`.
pub struct ControlMax {
    layout: SharedLayout,
    mu: Option<(String, Rational)>,
}

impl ControlMax {
    pub fn new(layout: SharedLayout) -> Self {
        ControlMax { layout, mu: None }
    }

    /// Distance from the control's entry value to its family.
    pub fn mu_for(root: &ModuleEntry, entry_x: &Rational) -> Rational {
        let a = int(1) - entry_x;
        let k = root.params.k as u32;
        let mu = match root.kind {
            GadgetKind::Cnz => mu_nonzero(&a, k),
            _ => mu_zero(&a, k),
        };
        mu.unwrap_or_else(|_| rational::zero())
    }

    pub(crate) fn decide_in(
        &mut self,
        game: &Game,
        root: &ModuleEntry,
        run: &Run,
    ) -> Result<DelayedMove, String> {
        let at = run.last();
        let inner = self.layout.module_at(&at.location).cloned();
        let Some(cm) =
            inner.filter(|m| m.kind == GadgetKind::Cm && m.anchors["entry"] == at.location)
        else {
            return forced_move(game, &self.layout, at);
        };
        let mu = match &self.mu {
            Some((id, mu)) if *id == root.id => mu.clone(),
            _ => {
                let entry = &root.anchors["entry"];
                let x = std::iter::once(&run.initial)
                    .chain(run.steps.iter().map(|s| &s.config))
                    .rev()
                    .find(|c| &c.location == entry)
                    .map(|c| clock(c, "x"))
                    .unwrap_or_else(rational::zero);
                let mu = Self::mu_for(root, &x);
                self.mu = Some((root.id.clone(), mu.clone()));
                mu
            }
        };
        let p = clock(at, &cm.roles.primary);
        let s = clock(at, &cm.roles.secondary);
        let a = &p - &s;
        let eta = (&s - (cm.params.factor() - int(1)) * a).abs();
        if eta >= mu {
            costliest_stop(game, &self.layout, &cm, at)
        } else {
            Ok(DelayedMove::now(cm.ports["continue"].clone()))
        }
    }
}

impl Strategy for ControlMax {
    fn name(&self) -> String {
        "control-max".into()
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        match self.layout.root_module_at(&at.location).cloned() {
            Some(root) if matches!(root.kind, GadgetKind::Cz | GadgetKind::Cnz) => {
                self.decide_in(game, &root, run)
            }
            _ => forced_move(game, &self.layout, at),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::compiler::Anchors;
    use crate::gadgets::{build_cnz, build_cz, GadgetHandle};
    use crate::model::Valuation;
    use crate::strategy::{honest_max, play, Cost};

    /// Enters with `x = 1−a`, `y = 0`, prior cost `30(1−a)`.
    fn replay(h: &GadgetHandle, a: Rational, honest: bool) -> (Cost, Rational) {
        let layout = Arc::new(Anchors::for_gadget(h).layout());
        let game = h.game();
        let start = Configuration::new(
            h.entry(),
            Valuation::from_pairs([("x", int(1) - &a), ("y", int(0))]),
        );
        let mut min = ControlMin::new(layout.clone());
        let out = if honest {
            play(&game, start, &mut min, &mut honest_max(layout), 1000).unwrap()
        } else {
            play(&game, start, &mut min, &mut ControlMax::new(layout), 1000).unwrap()
        };
        assert!(out.duration <= int(3));
        let prior = int(30) * (int(1) - &a);
        let total = match out.weight {
            Cost::Finite(w) => Cost::Finite(w + &prior),
            Cost::Infinite => Cost::Infinite,
        };
        (total, out.duration)
    }

    #[test]
    fn exact_encoding_costs_61() {
        let cz = build_cz(1, 0).unwrap();
        assert_eq!(replay(&cz, ratio(1, 5), false).0, Cost::Finite(int(61)));
        assert_eq!(replay(&cz, ratio(1, 5), true).0, Cost::Finite(int(61)));
        let cnz = build_cnz(1, 0).unwrap();
        assert_eq!(replay(&cnz, ratio(1, 2), false).0, Cost::Finite(int(61)));
        // the whole chain ×2, ×3, ×5 against a Max that never stops
        assert_eq!(replay(&cnz, ratio(1, 30), true).0, Cost::Finite(int(61)));
    }

    #[test]
    fn near_miss_lands_between_mu_and_five_mu() {
        let cz = build_cz(1, 0).unwrap();
        let a = ratio(1, 10) + ratio(1, 900);
        let mu = mu_zero(&a, 1).unwrap();
        let (Cost::Finite(c), _) = replay(&cz, a, false) else {
            panic!()
        };
        assert!(c >= int(61) + &mu && c <= int(61) + int(5) * &mu, "{c}");
    }

    #[test]
    fn direct_path_cost() {
        let cz = build_cz(1, 0).unwrap();
        let a = ratio(3, 4);
        let (c, _) = replay(&cz, a.clone(), false);
        assert_eq!(c, Cost::Finite(int(61) + int(5) * (int(1) - a)));
    }

    #[test]
    fn unaudited_near_miss_is_cheap() {
        // without stops Min simply rounds to the nearest member
        let cz = build_cz(2, 0).unwrap();
        let (c, _) = replay(&cz, ratio(1, 2) + ratio(1, 1000), true);
        assert_eq!(c, Cost::Finite(int(61)));
    }
}
