//! Two-counter machine to weighted timed game.
//!
//! Each machine state becomes a MIN location of weight 30 where Min waits to
//! update the counter encoding in `x`. Increments go through a CEC; tests let
//! Min claim a branch, give Max the chance to divert a wrong claim into a
//! zero or non-zero control, and then go through the branch's CEC. Every
//! state also offers Min an exit.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::gadgets::{
    build_cec_on, build_cnz, build_cz, build_exit, build_soft_exit, ClockRoles, GadgetHandle,
    GadgetKind, GadgetParams,
};
use crate::machine::{Counter, Instr, TwoCounterMachine};
use crate::model::{validate, Cmp, Game, GameDef, Location, Owner, Transition};
use crate::rational::{self, Rational};

pub const STATE_WEIGHT: i64 = 30;
pub const GOAL: &str = "goal";
pub const SINK: &str = "sink";
pub const ESCAPE_GOAL: &str = "escape";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Variant {
    Value,
    Existence,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Inc(Counter),
    Dec(Counter),
    Zero,
}

/// `(γ, β)` with `γ = 1 − β/30`: the fraction of `1−x` Min waits, and the
/// CEC parameter that audits it.
pub fn op_parameters(kind: OpKind) -> (Rational, i64) {
    let beta = match kind {
        OpKind::Inc(Counter::C) => 3,
        OpKind::Inc(Counter::D) => 2,
        OpKind::Dec(Counter::C) => 12,
        OpKind::Dec(Counter::D) => 18,
        OpKind::Zero => 6,
    };
    (rational::one() - rational::ratio(beta, 30), beta)
}

/// Where Min acts at one machine state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateEntry {
    pub location: String,
    /// `inc`, `claim_zero`, `claim_nonzero`, `accept_zero`, `divert_zero`,
    /// `accept_nonzero`, `divert_nonzero`, `zero_wait`, `nonzero_wait`,
    /// `exit`, `soft_exit`, as present.
    pub ports: BTreeMap<String, String>,
    /// `zero_check`, `nonzero_check`, `zero_wait`, `nonzero_wait`.
    pub anchors: BTreeMap<String, String>,
}

/// One embedded gadget, flattened for lookup.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleEntry {
    pub id: String,
    pub state: Option<String>,
    pub role: String,
    pub kind: GadgetKind,
    pub params: GadgetParams,
    pub roles: ClockRoles,
    pub anchors: BTreeMap<String, String>,
    pub ports: BTreeMap<String, String>,
    pub locations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent: Option<String>,
}

/// Sidecar describing the compiled game for strategies and reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchors {
    pub variant: Variant,
    pub initial_state: Option<String>,
    pub halt_state: Option<String>,
    pub state_map: BTreeMap<String, StateEntry>,
    pub modules: Vec<ModuleEntry>,
    /// Transitions added only to avoid deadlocks.
    pub escapes: Vec<String>,
}

impl Anchors {
    /// Anchors for a gadget played on its own.
    pub fn for_gadget(handle: &GadgetHandle) -> Anchors {
        let mut modules = Vec::new();
        push_modules(&mut modules, handle, handle.kind_role(), None, None);
        Anchors {
            variant: Variant::Value,
            initial_state: None,
            halt_state: None,
            state_map: BTreeMap::new(),
            modules,
            escapes: Vec::new(),
        }
    }

    /// Index from location id to the innermost module containing it.
    pub fn layout(&self) -> Layout {
        Layout::new(self.clone())
    }

    pub fn module(&self, id: &str) -> Option<&ModuleEntry> {
        self.modules.iter().find(|m| m.id == id)
    }
}

/// [`Anchors`] with lookup tables.
#[derive(Debug, Clone)]
pub struct Layout {
    pub anchors: Anchors,
    by_loc: HashMap<String, usize>,
    by_state_loc: HashMap<String, String>,
    escapes: HashSet<String>,
}

impl Layout {
    pub fn new(anchors: Anchors) -> Self {
        let mut by_loc = HashMap::new();
        // parents come before their parts, so later entries are innermost
        for (i, m) in anchors.modules.iter().enumerate() {
            for l in &m.locations {
                by_loc.insert(l.clone(), i);
            }
        }
        let by_state_loc = anchors
            .state_map
            .iter()
            .map(|(q, s)| (s.location.clone(), q.clone()))
            .collect();
        let escapes = anchors.escapes.iter().cloned().collect();
        Layout {
            anchors,
            by_loc,
            by_state_loc,
            escapes,
        }
    }

    pub fn module_at(&self, location: &str) -> Option<&ModuleEntry> {
        self.by_loc.get(location).map(|&i| &self.anchors.modules[i])
    }

    /// The outermost module containing `location`.
    pub fn root_module_at(&self, location: &str) -> Option<&ModuleEntry> {
        let mut m = self.module_at(location)?;
        while let Some(p) = m.parent.as_deref().and_then(|p| self.anchors.module(p)) {
            m = p;
        }
        Some(m)
    }

    /// The machine state whose state location is `location`.
    pub fn state_at(&self, location: &str) -> Option<&str> {
        self.by_state_loc.get(location).map(String::as_str)
    }

    pub fn state(&self, q: &str) -> Option<&StateEntry> {
        self.anchors.state_map.get(q)
    }

    pub fn is_escape(&self, transition: &str) -> bool {
        self.escapes.contains(transition)
    }
}

impl GadgetHandle {
    fn kind_role(&self) -> &'static str {
        match self.kind {
            GadgetKind::Cec => "cec",
            GadgetKind::Cm => "cm",
            GadgetKind::Cz => "cz",
            GadgetKind::Cnz => "cnz",
            GadgetKind::Exit => "exit",
            GadgetKind::SoftExit => "soft_exit",
        }
    }
}

fn push_modules(
    out: &mut Vec<ModuleEntry>,
    h: &GadgetHandle,
    role: &str,
    state: Option<&str>,
    parent: Option<&str>,
) {
    let id = match parent {
        Some(p) => format!("{p}/{role}"),
        None => match state {
            Some(q) => format!("{q}/{role}"),
            None => role.to_string(),
        },
    };
    out.push(ModuleEntry {
        id: id.clone(),
        state: state.map(str::to_string),
        role: role.to_string(),
        kind: h.kind,
        params: h.params,
        roles: h.roles.clone(),
        anchors: h.anchors.clone(),
        ports: h.ports.clone(),
        locations: h.locations.iter().map(|l| l.id.clone()).collect(),
        parent: parent.map(str::to_string),
    });
    for p in &h.parts {
        push_modules(out, p, &format!("mul{}", p.params.k), state, Some(&id));
    }
}

/// What gets written next to a compiled game file: the source machine and
/// the anchors strategies navigate by.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sidecar {
    pub machine: TwoCounterMachine,
    pub anchors: Anchors,
}

#[derive(Debug, Clone)]
pub struct CompilationResult {
    pub game: Game,
    pub anchors: Anchors,
    pub variant: Variant,
}

impl CompilationResult {
    /// Gadget records grouped by machine state.
    pub fn module_index(&self) -> BTreeMap<String, Vec<&ModuleEntry>> {
        let mut out: BTreeMap<String, Vec<&ModuleEntry>> = BTreeMap::new();
        for m in &self.anchors.modules {
            if let Some(q) = &m.state {
                out.entry(q.clone()).or_default().push(m);
            }
        }
        out
    }
}

struct Builder {
    locations: Vec<Location>,
    transitions: Vec<Transition>,
    modules: Vec<ModuleEntry>,
}

impl Builder {
    fn embed(&mut self, h: GadgetHandle, state: &str, role: &str) -> GadgetHandle {
        let goal = h.anchor("goal").to_string();
        let h = h.relink(&goal, GOAL);
        self.locations.extend(h.locations.iter().cloned());
        self.transitions.extend(h.transitions.iter().cloned());
        push_modules(&mut self.modules, &h, role, Some(state), None);
        h
    }

    fn cec(&mut self, state: &str, role: &str, beta: i64, next: &str) -> String {
        let params = GadgetParams::cec(30, beta, 31 - beta, 31);
        let prefix = format!("{state}.{role}");
        let h = build_cec_on(&params, &ClockRoles::xy())
            .expect("reference parameters are valid")
            .prefixed(&prefix);
        let exit = h.anchor("exit").to_string();
        let h = self.embed(h.relink(&exit, next), state, role);
        h.entry().to_string()
    }
}

/// Builds the game for `m`. The result always validates.
pub fn compile(m: &TwoCounterMachine, variant: Variant) -> CompilationResult {
    let mut b = Builder {
        locations: vec![
            Location::new(GOAL, Owner::Goal, 0),
            Location::new(SINK, Owner::Min, 0),
            Location::new(ESCAPE_GOAL, Owner::Goal, 0),
        ],
        transitions: vec![Transition::new("sink.loop", SINK, SINK)],
        modules: Vec::new(),
    };
    let mut state_map = BTreeMap::new();

    for q in m.states() {
        b.locations
            .push(Location::new(q.clone(), Owner::Min, STATE_WEIGHT));
        let mut entry = StateEntry {
            location: q.clone(),
            ports: BTreeMap::new(),
            anchors: BTreeMap::new(),
        };
        match m.instr(q) {
            Some(Instr::Inc { counter, next }) => {
                let (_, beta) = op_parameters(OpKind::Inc(*counter));
                let cec = b.cec(q, "inc", beta, next);
                let t = format!("{q}.inc");
                b.transitions
                    .push(Transition::new(t.clone(), q.clone(), cec).guard("x", Cmp::Le, 1));
                entry.ports.insert("inc".into(), t);
            }
            Some(Instr::Test {
                counter,
                if_zero,
                if_nonzero,
            }) => {
                let k = counter.index();
                let (_, dec_beta) = op_parameters(OpKind::Dec(*counter));
                let (_, zero_beta) = op_parameters(OpKind::Zero);
                for (side, succ, beta) in [
                    ("zero", if_zero, zero_beta),
                    ("nonzero", if_nonzero, dec_beta),
                ] {
                    let check = format!("{q}.{side}_check");
                    let wait = format!("{q}.{side}_wait");
                    let cec = b.cec(q, &format!("{side}_cec"), beta, succ);
                    let control = if side == "zero" {
                        build_cz(k, 0)
                    } else {
                        build_cnz(k, 0)
                    }
                    .expect("k is 1 or 2")
                    .prefixed(&format!("{q}.{side}_control"));
                    let control = b.embed(control, q, &format!("divert_{side}"));

                    b.locations
                        .push(Location::new(check.clone(), Owner::Max, 0));
                    b.locations
                        .push(Location::new(wait.clone(), Owner::Min, STATE_WEIGHT));
                    let claim = format!("{q}.claim_{side}");
                    let accept = format!("{q}.accept_{side}");
                    let divert = format!("{q}.divert_{side}");
                    let go = format!("{q}.{side}_wait.go");
                    b.transitions.extend([
                        Transition::new(claim.clone(), q.clone(), check.clone()).guard(
                            "y",
                            Cmp::Eq,
                            0,
                        ),
                        Transition::new(accept.clone(), check.clone(), wait.clone()).guard(
                            "y",
                            Cmp::Eq,
                            0,
                        ),
                        Transition::new(divert.clone(), check.clone(), control.entry()).guard(
                            "y",
                            Cmp::Eq,
                            0,
                        ),
                        Transition::new(go.clone(), wait.clone(), cec).guard("x", Cmp::Le, 1),
                    ]);
                    entry.ports.insert(format!("claim_{side}"), claim);
                    entry.ports.insert(format!("accept_{side}"), accept);
                    entry.ports.insert(format!("divert_{side}"), divert);
                    entry.ports.insert(format!("{side}_wait"), go);
                    entry.anchors.insert(format!("{side}_check"), check);
                    entry.anchors.insert(format!("{side}_wait"), wait);
                }
            }
            None => {}
        }

        let exit = b.embed(build_exit().prefixed(&format!("{q}.exit")), q, "exit");
        let t = format!("{q}.take_exit");
        b.transitions
            .push(Transition::new(t.clone(), q.clone(), exit.entry()));
        entry.ports.insert("exit".into(), t);
        if variant == Variant::Existence && q == m.halt() {
            let soft = b.embed(
                build_soft_exit().prefixed(&format!("{q}.soft_exit")),
                q,
                "soft_exit",
            );
            let t = format!("{q}.take_soft_exit");
            b.transitions
                .push(Transition::new(t.clone(), q.clone(), soft.entry()));
            entry.ports.insert("soft_exit".into(), t);
        }
        state_map.insert(q.clone(), entry);
    }

    let escapes = add_escapes(&mut b.locations, &mut b.transitions);
    let game = Game::new(GameDef {
        clocks: vec!["x".into(), "y".into()],
        locations: b.locations,
        transitions: b.transitions,
        initial: m.initial().to_string(),
    });
    debug_assert!(validate(&game).is_ok(), "{:?}", validate(&game).violations);
    CompilationResult {
        game,
        anchors: Anchors {
            variant,
            initial_state: Some(m.initial().to_string()),
            halt_state: Some(m.halt().to_string()),
            state_map,
            modules: b.modules,
            escapes,
        },
        variant,
    }
}

/// A location can deadlock when time may pass beyond every guard. Those get
/// a guard-free way out: Min into the sink (never ending, so infinite cost),
/// Max straight to a goal (ending the game at the current cost).
fn add_escapes(locations: &mut [Location], transitions: &mut Vec<Transition>) -> Vec<String> {
    let mut added = Vec::new();
    for l in locations.iter() {
        if l.owner == Owner::Goal || l.id == SINK {
            continue;
        }
        let capped = transitions
            .iter()
            .filter(|t| t.source == l.id)
            .all(|t| t.guard.iter().any(|c| c.op.bounds_above()));
        if capped {
            let target = if l.owner == Owner::Max {
                ESCAPE_GOAL
            } else {
                SINK
            };
            let id = format!("{}.escape", l.id);
            transitions.push(Transition::new(id.clone(), l.id.clone(), target));
            added.push(id);
        }
    }
    added
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub violations: Vec<String>,
}

impl AuditReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Structural properties the cost arguments rely on.
pub fn structural_audit(result: &CompilationResult) -> AuditReport {
    let game = &result.game;
    let layout = result.anchors.layout();
    let mut v = Vec::new();
    for viol in validate(game).violations {
        v.push(viol.to_string());
    }
    if game.clocks() != ["x", "y"] {
        v.push(format!("clocks are {:?}, expected x and y", game.clocks()));
    }
    for t in game.transitions() {
        if t.resets.iter().any(|c| c == "x") {
            let inside = layout
                .root_module_at(&t.source)
                .is_some_and(|m| matches!(m.kind, GadgetKind::Cz | GadgetKind::Cnz));
            if !inside {
                v.push(format!("x reset outside a control module by {}", t.id));
            }
        }
        if let Some(c) = t.guard.iter().find(|c| c.bound > 2) {
            v.push(format!("guard constant {} above 2 in {}", c.bound, t.id));
        }
    }
    for (q, s) in &result.anchors.state_map {
        match game.location(&s.location) {
            Ok(l) if l.owner == Owner::Min && l.weight == STATE_WEIGHT => {}
            _ => v.push(format!(
                "state {q} is not a MIN location of weight {STATE_WEIGHT}"
            )),
        }
    }
    for m in &result.anchors.modules {
        if matches!(m.kind, GadgetKind::Cec | GadgetKind::Cm) {
            let entry = &m.anchors["entry"];
            let has_continue = m
                .ports
                .get("continue")
                .is_some_and(|c| game.transition(c).is_ok_and(|t| &t.source == entry));
            if game.owner(entry).ok() != Some(Owner::Max) || !has_continue {
                v.push(format!("module {} has no CONTINUE at a MAX entry", m.id));
            }
        }
    }
    AuditReport { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::machine::parse_machine;
    use crate::model::{deserialize, serialize};

    fn machine(text: &str) -> TwoCounterMachine {
        parse_machine(text).unwrap()
    }

    #[test]
    fn op_table() {
        use crate::rational::ratio;
        assert_eq!(op_parameters(OpKind::Inc(Counter::C)), (ratio(9, 10), 3));
        assert_eq!(op_parameters(OpKind::Inc(Counter::D)), (ratio(14, 15), 2));
        assert_eq!(op_parameters(OpKind::Dec(Counter::C)), (ratio(3, 5), 12));
        assert_eq!(op_parameters(OpKind::Dec(Counter::D)), (ratio(2, 5), 18));
        assert_eq!(op_parameters(OpKind::Zero), (ratio(4, 5), 6));
    }

    #[test]
    fn inc_halt_structure() {
        let r = compile(&machine("q0: inc c q1\nq1: halt"), Variant::Value);
        let cecs: Vec<_> = r
            .anchors
            .modules
            .iter()
            .filter(|m| m.kind == GadgetKind::Cec)
            .collect();
        assert_eq!(cecs.len(), 1);
        assert_eq!(cecs[0].params, GadgetParams::cec(30, 3, 28, 31));
        let exits = r
            .anchors
            .modules
            .iter()
            .filter(|m| m.kind == GadgetKind::Exit)
            .count();
        assert_eq!(exits, 2);
        assert!(!r
            .anchors
            .modules
            .iter()
            .any(|m| m.kind == GadgetKind::SoftExit));
        assert!(structural_audit(&r).is_ok(), "{:?}", structural_audit(&r));

        let e = compile(&machine("q0: inc c q1\nq1: halt"), Variant::Existence);
        let soft: Vec<_> = e
            .anchors
            .modules
            .iter()
            .filter(|m| m.kind == GadgetKind::SoftExit)
            .collect();
        assert_eq!(soft.len(), 1);
        assert_eq!(soft[0].state.as_deref(), Some("q1"));
    }

    #[test]
    fn test_branches_embed_controls() {
        let r = compile(
            &machine("q0: inc c q1\nq1: test c q3 q2\nq2: test c q3 q3\nq3: halt"),
            Variant::Value,
        );
        assert!(structural_audit(&r).is_ok(), "{:?}", structural_audit(&r));
        let kinds: Vec<_> = r.module_index()["q1"]
            .iter()
            .map(|m| (m.role.clone(), m.kind))
            .collect();
        assert!(kinds.contains(&("divert_zero".into(), GadgetKind::Cz)));
        assert!(kinds.contains(&("divert_nonzero".into(), GadgetKind::Cnz)));
        let nz = r.module_index()["q1"]
            .iter()
            .find(|m| m.role == "nonzero_cec")
            .map(|m| m.params)
            .unwrap();
        assert_eq!(nz, GadgetParams::cec(30, 12, 19, 31));
    }

    #[test]
    fn roundtrip_and_determinism() {
        let m = machine("q0: inc c q1\nq1: test d q0 q2\nq2: halt");
        let a = compile(&m, Variant::Value);
        let b = compile(&m, Variant::Value);
        assert_eq!(serialize(&a.game), serialize(&b.game));
        assert_eq!(deserialize(&serialize(&a.game)).unwrap(), a.game);
        let sidecar = serde_json::to_string(&a.anchors).unwrap();
        assert_eq!(
            serde_json::from_str::<Anchors>(&sidecar).unwrap(),
            a.anchors
        );
    }

    #[test]
    fn audit_catches_mutations() {
        let r = compile(&machine("q0: inc c q1\nq1: halt"), Variant::Value);
        let mut def = r.game.def().clone();
        let t = def
            .transitions
            .iter_mut()
            .find(|t| t.id == "q0.inc")
            .unwrap();
        t.resets.push("x".into());
        let bad = CompilationResult {
            game: Game::new(def),
            ..r.clone()
        };
        assert!(!structural_audit(&bad).is_ok());

        let mut def = r.game.def().clone();
        def.transitions[1]
            .guard
            .push(crate::model::ClockConstraint::new("x", Cmp::Le, 7));
        let bad = CompilationResult {
            game: Game::new(def),
            ..r
        };
        assert!(structural_audit(&bad)
            .violations
            .iter()
            .any(|v| v.contains("above 2")));
    }

    #[test]
    fn escapes_only_where_time_can_run_out() {
        let r = compile(&machine("q0: inc c q1\nq1: halt"), Variant::Value);
        assert!(r
            .anchors
            .escapes
            .contains(&"q0.inc.entry.escape".to_string()));
        assert!(!r.anchors.escapes.iter().any(|e| e == "q0.escape"));
        let t = r.game.transition("q0.inc.up1.escape").unwrap();
        assert_eq!(t.target, SINK);
    }
}
