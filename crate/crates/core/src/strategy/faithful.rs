use num_traits::Signed;

use super::{clock, forced_move, wait_until, ControlMin, SharedLayout, Strategy, DEFAULT_STEP_CAP};
use crate::gadgets::GadgetKind;
use crate::machine::{encode, run_machine, Instr, MachineConfig, TwoCounterMachine};
use crate::model::{DelayedMove, Game, Run};
use crate::rational::{self, int};

/// Min simulating the machine run: at every state it moves `x` to the exact
/// encoding of the next configuration.
///
/// With a threshold `N` it gives up through the exit as soon as `1 − x`
/// drops below `1/30^N`; at the halt state of the existence variant it takes
/// the soft exit.
pub struct FaithfulMin {
    layout: SharedLayout,
    machine: TwoCounterMachine,
    trajectory: Vec<MachineConfig>,
    threshold: Option<u32>,
    control: ControlMin,
    p: usize,
}

pub fn faithful_min(
    m: &TwoCounterMachine,
    threshold: Option<u32>,
    layout: SharedLayout,
) -> FaithfulMin {
    FaithfulMin {
        control: ControlMin::new(layout.clone()),
        layout,
        machine: m.clone(),
        trajectory: run_machine(m, DEFAULT_STEP_CAP).trajectory,
        threshold,
        p: 1,
    }
}

impl FaithfulMin {
    /// State visits so far, counting the initial one.
    pub fn step(&self) -> usize {
        self.p
    }

    pub(crate) fn state_of(&self, location: &str) -> Option<String> {
        self.layout.state_at(location).map(str::to_string)
    }

    /// Encoding of the configuration after the current step.
    fn next_target(&self) -> Option<rational::Rational> {
        let next = self.trajectory.get(self.p)?;
        Some(encode(next.c as u32, next.d as u32, self.p as u32))
    }

    pub(crate) fn exit_move(&self, q: &str) -> Result<DelayedMove, String> {
        let s = self
            .layout
            .state(q)
            .ok_or_else(|| format!("unknown state {q}"))?;
        Ok(DelayedMove::now(s.ports["exit"].clone()))
    }

    /// The honest move at state location `q`.
    pub(crate) fn state_move(&self, q: &str, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        let s = self
            .layout
            .state(q)
            .ok_or_else(|| format!("unknown state {q}"))?;
        if q == self.machine.halt() {
            return Ok(DelayedMove::now(
                s.ports.get("soft_exit").unwrap_or(&s.ports["exit"]).clone(),
            ));
        }
        let on_track = self.trajectory.get(self.p - 1).filter(|c| c.state == q);
        let Some(cfg) = on_track else {
            return self.exit_move(q);
        };
        if let Some(n) = self.threshold {
            if int(1) - clock(at, "x") < rational::inv_pow(30, n) {
                return self.exit_move(q);
            }
        }
        match self.machine.instr(q) {
            Some(Instr::Inc { .. }) => {
                let Some(target) = self.next_target() else {
                    return self.exit_move(q);
                };
                let wait = target - clock(at, "x");
                if wait.is_negative() {
                    return self.exit_move(q);
                }
                Ok(DelayedMove::new(wait, s.ports["inc"].clone()))
            }
            Some(Instr::Test { counter, .. }) => {
                let side = if cfg.get(*counter) == 0 {
                    "zero"
                } else {
                    "nonzero"
                };
                Ok(DelayedMove::now(s.ports[&format!("claim_{side}")].clone()))
            }
            None => self.exit_move(q),
        }
    }
}

impl Strategy for FaithfulMin {
    fn name(&self) -> String {
        match self.threshold {
            Some(n) => format!("faithful(N={n})"),
            None => "faithful".into(),
        }
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        if let Some(q) = self.layout.state_at(&at.location).map(str::to_string) {
            return self.state_move(&q, run);
        }
        for s in self.layout.anchors.state_map.values() {
            for side in ["zero", "nonzero"] {
                if s.anchors.get(&format!("{side}_wait")) == Some(&at.location) {
                    let target = self.next_target().unwrap_or_else(|| clock(at, "x"));
                    let wait = wait_until(at, "x", &target);
                    return Ok(DelayedMove::new(
                        wait,
                        s.ports[&format!("{side}_wait")].clone(),
                    ));
                }
            }
        }
        if let Some(root) = self.layout.root_module_at(&at.location).cloned() {
            if matches!(root.kind, GadgetKind::Cz | GadgetKind::Cnz) {
                return self.control.decide_in(game, &root, at);
            }
        }
        forced_move(game, &self.layout, at)
    }

    fn observe(&mut self, _game: &Game, run: &Run) {
        if self.layout.state_at(&run.last().location).is_some() {
            self.p += 1;
        }
    }
}
