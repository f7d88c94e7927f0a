use std::collections::HashMap;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{clock, costliest_stop, forced_move, ControlMax, SharedLayout, Strategy};
use crate::compiler::Layout;
use crate::gadgets::GadgetKind;
use crate::machine::{decode_best, run_machine, Counter, Instr, MachineConfig, TwoCounterMachine};
use crate::model::{Configuration, DelayedMove, Game, Run};
use crate::rational::{self, int, Rational};

use super::DEFAULT_STEP_CAP;

/// `(state, side)` for every branch-check location, with its accept and
/// divert ports.
fn checks(layout: &Layout) -> HashMap<String, Check> {
    let mut out = HashMap::new();
    for (q, s) in &layout.anchors.state_map {
        for side in ["zero", "nonzero"] {
            if let Some(loc) = s.anchors.get(&format!("{side}_check")) {
                out.insert(
                    loc.clone(),
                    Check {
                        state: q.clone(),
                        zero_side: side == "zero",
                        accept: s.ports[&format!("accept_{side}")].clone(),
                        divert: s.ports[&format!("divert_{side}")].clone(),
                    },
                );
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Check {
    state: String,
    zero_side: bool,
    accept: String,
    divert: String,
}

/// Waits 0 everywhere and always lets play continue.
pub struct HonestMax {
    layout: SharedLayout,
    checks: HashMap<String, Check>,
}

pub fn honest_max(layout: SharedLayout) -> HonestMax {
    let checks = checks(&layout);
    HonestMax { layout, checks }
}

impl Strategy for HonestMax {
    fn name(&self) -> String {
        "honest".into()
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        if let Some(c) = self.checks.get(&at.location) {
            return Ok(DelayedMove::now(c.accept.clone()));
        }
        if let Some(m) = self.layout.module_at(&at.location) {
            if matches!(m.kind, GadgetKind::Cec | GadgetKind::Cm)
                && m.anchors["entry"] == at.location
            {
                return Ok(DelayedMove::now(m.ports["continue"].clone()));
            }
        }
        forced_move(game, &self.layout, at)
    }
}

/// Acceptance test for a CEC update.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Window {
    /// Accept iff the deviation is strictly below the bound.
    Open(Rational),
    /// Accept only exact updates.
    Exact,
}

impl Window {
    fn accepts(&self, dev: &Rational) -> bool {
        match self {
            Window::Open(w) => dev < w,
            Window::Exact => dev.is_zero_value(),
        }
    }
}

trait ZeroCheck {
    fn is_zero_value(&self) -> bool;
}

impl ZeroCheck for Rational {
    fn is_zero_value(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
}

/// Never waits; diverts wrong branch claims into the matching control and
/// stops any CEC whose update is off by at least the window.
pub struct PunisherMax {
    layout: SharedLayout,
    machine: TwoCounterMachine,
    trajectory: Vec<MachineConfig>,
    checks: HashMap<String, Check>,
    window: Window,
    control: ControlMax,
    p: usize,
}

/// Accepts CEC updates within `1/30^(5N+1)`.
pub fn punisher_max(m: &TwoCounterMachine, n: u32, layout: SharedLayout) -> PunisherMax {
    PunisherMax::new(m, Window::Open(rational::inv_pow(30, 5 * n + 1)), layout)
}

/// Accepts only exact CEC updates.
pub fn strict_punisher_max(m: &TwoCounterMachine, layout: SharedLayout) -> PunisherMax {
    PunisherMax::new(m, Window::Exact, layout)
}

impl PunisherMax {
    pub fn new(m: &TwoCounterMachine, window: Window, layout: SharedLayout) -> Self {
        PunisherMax {
            checks: checks(&layout),
            control: ControlMax::new(layout.clone()),
            layout,
            machine: m.clone(),
            trajectory: run_machine(m, DEFAULT_STEP_CAP).trajectory,
            window,
            p: 1,
        }
    }

    /// Whether the tested counter is zero at step `p`, from the machine run
    /// when play is on it and from the encoding in `x` otherwise.
    fn counter_is_zero(&self, check: &Check, at: &Configuration) -> bool {
        let counter = match self.machine.instr(&check.state) {
            Some(Instr::Test { counter, .. }) => *counter,
            _ => Counter::C,
        };
        match self.trajectory.get(self.p - 1) {
            Some(cfg) if cfg.state == check.state => cfg.get(counter) == 0,
            _ => {
                let d = decode_best(&clock(at, "x"), (self.p - 1) as u32);
                match counter {
                    Counter::C => d.c == 0,
                    Counter::D => d.d == 0,
                }
            }
        }
    }
}

impl Strategy for PunisherMax {
    fn name(&self) -> String {
        match &self.window {
            Window::Open(_) => "punisher".into(),
            Window::Exact => "strict-punisher".into(),
        }
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        if let Some(c) = self.checks.get(&at.location) {
            let right = c.zero_side == self.counter_is_zero(c, at);
            let port = if right { &c.accept } else { &c.divert };
            return Ok(DelayedMove::now(port.clone()));
        }
        if let Some(root) = self.layout.root_module_at(&at.location).cloned() {
            if matches!(root.kind, GadgetKind::Cz | GadgetKind::Cnz) {
                return self.control.decide_in(game, &root, run);
            }
        }
        if let Some(m) = self.layout.module_at(&at.location).cloned() {
            if matches!(m.kind, GadgetKind::Cec | GadgetKind::Cm)
                && m.anchors["entry"] == at.location
            {
                let b = clock(at, &m.roles.secondary);
                let a = clock(at, &m.roles.primary) - &b;
                let dev = (&b - m.params.gamma() * (int(1) - a)).abs();
                if m.kind == GadgetKind::Cm || self.window.accepts(&dev) {
                    return Ok(DelayedMove::now(m.ports["continue"].clone()));
                }
                return costliest_stop(game, &self.layout, &m, at);
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

/// Seeded random Max: sometimes waits a little, sometimes stops, sometimes
/// diverts. Reproducible for a given seed.
pub struct RandomMax {
    layout: SharedLayout,
    checks: HashMap<String, Check>,
    rng: ChaCha8Rng,
    seed: u64,
}

pub fn random_max(seed: u64, layout: SharedLayout) -> RandomMax {
    RandomMax {
        checks: checks(&layout),
        layout,
        rng: ChaCha8Rng::seed_from_u64(seed),
        seed,
    }
}

impl Strategy for RandomMax {
    fn name(&self) -> String {
        format!("random#{}", self.seed)
    }

    fn decide(&mut self, game: &Game, run: &Run) -> Result<DelayedMove, String> {
        let at = run.last();
        if let Some(c) = self.checks.get(&at.location) {
            let port = if self.rng.gen_ratio(9, 10) {
                &c.accept
            } else {
                &c.divert
            };
            return Ok(DelayedMove::now(port.clone()));
        }
        if let Some(m) = self.layout.module_at(&at.location).cloned() {
            if matches!(m.kind, GadgetKind::Cec | GadgetKind::Cm)
                && m.anchors["entry"] == at.location
            {
                let room = int(1) - clock(at, &m.roles.primary);
                let mut wait = if self.rng.gen_bool(0.5) {
                    rational::ratio(self.rng.gen_range(1..=100), 10_000)
                } else {
                    rational::zero()
                };
                if wait > room {
                    wait = room;
                }
                let port = match self.rng.gen_range(0..10) {
                    0 => "upper",
                    1 => "lower",
                    _ => "continue",
                };
                return Ok(DelayedMove::new(wait, m.ports[port].clone()));
            }
        }
        forced_move(game, &self.layout, at)
    }
}
