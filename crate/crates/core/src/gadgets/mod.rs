//! Control gadgets: sub-games whose stop costs are affine in the entry frame.
//!
//! Every gadget is built with unprefixed ids and its own `exit`/`goal`
//! locations so it can be played standalone. [`GadgetHandle::prefixed`] and
//! [`GadgetHandle::relink`] turn a standalone fragment into a part of a
//! larger game.

mod cec;
mod cm;
mod contract;
mod control;
mod exit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::model::{Game, GameDef, Location, Owner, Transition, Valuation};
use crate::rational::Rational;

pub use cec::{build_cec, build_cec_on};
pub use cm::{build_cm, build_cm_on};
pub use contract::{
    check_gadget_contract, cor_cec_identity, cor_cm_identity, expected_costs, extract_affine_cost,
    grid_argmin, probe_cost, standard_probes, AffineCost, ContractError, ContractReport,
    EntryFrame, Probe, Resolution,
};
pub use control::{build_cnz, build_cz, CONTROL_ALPHA, TRANSLATION_WEIGHT};
pub use exit::{build_exit, build_soft_exit};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error("parameters give a negative weight in {0}")]
    NegativeWeight(String),
    #[error("beta {beta} exceeds alpha {alpha}")]
    BetaAboveAlpha { alpha: i64, beta: i64 },
    #[error("k must be 1 or 2, got {0}")]
    BadCounter(u32),
    #[error("gadget file does not match its kind and parameters: {0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GadgetKind {
    Cec,
    Cm,
    Cz,
    Cnz,
    Exit,
    SoftExit,
}

/// `(α, β, k, M, N)`. Unused fields stay 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GadgetParams {
    pub alpha: i64,
    pub beta: i64,
    pub k: i64,
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: i64,
}

impl GadgetParams {
    pub fn cec(alpha: i64, beta: i64, m: i64, n: i64) -> Self {
        GadgetParams {
            alpha,
            beta,
            k: 0,
            m,
            n,
        }
    }

    pub fn cm(alpha: i64, beta: i64, k: i64, m: i64, n: i64) -> Self {
        GadgetParams {
            alpha,
            beta,
            k,
            m,
            n,
        }
    }

    /// `1 − β/α`, the update fraction a CEC enforces.
    pub fn gamma(&self) -> Rational {
        crate::rational::one() - crate::rational::ratio(self.beta, self.alpha)
    }

    /// `k/β`, the multiplication factor a CM enforces.
    pub fn factor(&self) -> Rational {
        crate::rational::ratio(self.k, self.beta)
    }
}

/// Which game clock plays the primary (`x`) and secondary (`y`) role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClockRoles {
    pub primary: String,
    pub secondary: String,
}

impl ClockRoles {
    pub fn xy() -> Self {
        ClockRoles {
            primary: "x".into(),
            secondary: "y".into(),
        }
    }

    pub fn swapped(&self) -> Self {
        ClockRoles {
            primary: self.secondary.clone(),
            secondary: self.primary.clone(),
        }
    }

    /// Valuation with primary `a+b` and secondary `b`.
    pub fn frame(&self, a: &Rational, b: &Rational) -> Valuation {
        Valuation::from_pairs([
            (self.primary.clone(), a + b),
            (self.secondary.clone(), b.clone()),
        ])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetHandle {
    pub kind: GadgetKind,
    pub params: GadgetParams,
    pub roles: ClockRoles,
    pub locations: Vec<Location>,
    pub transitions: Vec<Transition>,
    /// `entry`, `exit`, `goal`, `flag1`..`flag4` where they apply.
    pub anchors: BTreeMap<String, String>,
    /// Named transitions: `continue`, `upper`, `lower` on CEC/CM entries,
    /// branch transitions on control gadgets.
    pub ports: BTreeMap<String, String>,
    /// Gadgets embedded inside this one, already renamed and relinked.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<GadgetHandle>,
}

/// The game-file format plus the gadget's anchors and parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetFile {
    #[serde(flatten)]
    pub game: GameDef,
    pub kind: GadgetKind,
    pub anchors: BTreeMap<String, String>,
    pub params: GadgetParams,
}

impl GadgetHandle {
    fn new(kind: GadgetKind, params: GadgetParams, roles: ClockRoles) -> Self {
        GadgetHandle {
            kind,
            params,
            roles,
            locations: Vec::new(),
            transitions: Vec::new(),
            anchors: BTreeMap::new(),
            ports: BTreeMap::new(),
            parts: Vec::new(),
        }
    }

    fn loc(&mut self, id: &str, owner: Owner, weight: i64) {
        self.locations.push(Location::new(id, owner, weight));
    }

    fn tr(&mut self, t: Transition) {
        self.transitions.push(t);
    }

    pub fn anchor(&self, name: &str) -> &str {
        self.anchors
            .get(name)
            .unwrap_or_else(|| panic!("{:?} gadget has no anchor {name}", self.kind))
    }

    pub fn port(&self, name: &str) -> Option<&str> {
        self.ports.get(name).map(String::as_str)
    }

    pub fn entry(&self) -> &str {
        self.anchor("entry")
    }

    /// The fragment as a game starting at `entry`.
    pub fn game(&self) -> Game {
        Game::new(self.def())
    }

    pub fn def(&self) -> GameDef {
        let mut clocks = vec![self.roles.primary.clone(), self.roles.secondary.clone()];
        clocks.sort();
        GameDef {
            clocks,
            locations: self.locations.clone(),
            transitions: self.transitions.clone(),
            initial: self.entry().to_string(),
        }
    }

    pub fn to_file(&self) -> GadgetFile {
        GadgetFile {
            game: self.def(),
            kind: self.kind,
            anchors: self.anchors.clone(),
            params: self.params,
        }
    }

    /// Rebuilds the gadget a file describes, keeping the file's weights.
    /// The file must have the reference shape for its kind and parameters.
    pub fn from_file(file: &GadgetFile) -> Result<GadgetHandle, ConstructionError> {
        let p = &file.params;
        let mut g = match file.kind {
            GadgetKind::Cec => build_cec(p)?,
            GadgetKind::Cm => build_cm(p)?,
            GadgetKind::Cz => build_cz(p.k as u32, p.m)?,
            GadgetKind::Cnz => build_cnz(p.k as u32, p.m)?,
            GadgetKind::Exit => build_exit(),
            GadgetKind::SoftExit => build_soft_exit(),
        };
        let shape = |a: Vec<&String>, b: Vec<&String>| {
            let (mut a, mut b) = (a, b);
            a.sort();
            b.sort();
            a == b
        };
        let def = &file.game;
        if !shape(
            g.locations.iter().map(|l| &l.id).collect(),
            def.locations.iter().map(|l| &l.id).collect(),
        ) || !shape(
            g.transitions.iter().map(|t| &t.id).collect(),
            def.transitions.iter().map(|t| &t.id).collect(),
        ) {
            return Err(ConstructionError::Shape(
                "location or transition ids differ".into(),
            ));
        }
        for l in &mut g.locations {
            l.weight = def
                .locations
                .iter()
                .find(|s| s.id == l.id)
                .map_or(l.weight, |s| s.weight);
        }
        for t in &mut g.transitions {
            t.weight = def
                .transitions
                .iter()
                .find(|s| s.id == t.id)
                .map_or(t.weight, |s| s.weight);
        }
        g.sync_parts();
        Ok(g)
    }

    /// Every location and transition id gets `prefix.` in front.
    pub fn prefixed(&self, prefix: &str) -> GadgetHandle {
        let p = |s: &str| format!("{prefix}.{s}");
        let mut out = self.clone();
        for l in &mut out.locations {
            l.id = p(&l.id);
        }
        for t in &mut out.transitions {
            t.id = p(&t.id);
            t.source = p(&t.source);
            t.target = p(&t.target);
        }
        for v in out.anchors.values_mut().chain(out.ports.values_mut()) {
            *v = p(v);
        }
        out.parts = self.parts.iter().map(|g| g.prefixed(prefix)).collect();
        out
    }

    /// Drops location `from` and sends every transition into it to `to`.
    pub fn relink(mut self, from: &str, to: &str) -> GadgetHandle {
        self.locations.retain(|l| l.id != from);
        for t in &mut self.transitions {
            if t.target == from {
                t.target = to.to_string();
            }
        }
        for v in self.anchors.values_mut() {
            if v == from {
                *v = to.to_string();
            }
        }
        self.parts = self.parts.into_iter().map(|g| g.relink(from, to)).collect();
        self
    }

    /// Absorbs `part` into this fragment and records it.
    fn absorb(&mut self, part: GadgetHandle) {
        self.locations.extend(part.locations.iter().cloned());
        self.transitions.extend(part.transitions.iter().cloned());
        self.parts.push(part);
    }

    /// This gadget followed by all nested parts, depth first.
    pub fn flatten(&self) -> Vec<&GadgetHandle> {
        let mut out = vec![self];
        for p in &self.parts {
            out.extend(p.flatten());
        }
        out
    }

    pub fn owns_location(&self, id: &str) -> bool {
        self.locations.iter().any(|l| l.id == id)
    }

    /// Locations where no time can pass: every outgoing guard pins some clock
    /// to 0. Their weight never contributes to any run.
    pub fn urgent_locations(&self) -> Vec<&str> {
        self.locations
            .iter()
            .filter(|l| {
                let mut out = self
                    .transitions
                    .iter()
                    .filter(|t| t.source == l.id)
                    .peekable();
                out.peek().is_some()
                    && out.all(|t| {
                        t.guard
                            .iter()
                            .any(|c| c.op == crate::model::Cmp::Eq && c.bound == 0)
                    })
            })
            .map(|l| l.id.as_str())
            .collect()
    }

    /// Copies with exactly one cost-relevant weight raised by one.
    pub fn weight_mutants(&self) -> Vec<(String, GadgetHandle)> {
        let urgent = self.urgent_locations();
        let mut out = Vec::new();
        for (i, l) in self.locations.iter().enumerate() {
            if l.owner == Owner::Goal || urgent.contains(&l.id.as_str()) {
                continue;
            }
            let mut g = self.clone();
            g.locations[i].weight += 1;
            g.sync_parts();
            out.push((format!("location {}", l.id), g));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let mut g = self.clone();
            g.transitions[i].weight += 1;
            g.sync_parts();
            out.push((format!("transition {}", t.id), g));
        }
        out
    }

    /// Copies weights from the flat fragment back into nested part records.
    fn sync_parts(&mut self) {
        let locs: BTreeMap<String, i64> = self
            .locations
            .iter()
            .map(|l| (l.id.clone(), l.weight))
            .collect();
        let trs: BTreeMap<String, i64> = self
            .transitions
            .iter()
            .map(|t| (t.id.clone(), t.weight))
            .collect();
        fn go(g: &mut GadgetHandle, locs: &BTreeMap<String, i64>, trs: &BTreeMap<String, i64>) {
            for l in &mut g.locations {
                if let Some(&w) = locs.get(&l.id) {
                    l.weight = w;
                }
            }
            for t in &mut g.transitions {
                if let Some(&w) = trs.get(&t.id) {
                    t.weight = w;
                }
            }
            for p in &mut g.parts {
                go(p, locs, trs);
            }
        }
        for p in &mut self.parts {
            go(p, &locs, &trs);
        }
    }
}

fn check_weights(g: &GadgetHandle) -> Result<(), ConstructionError> {
    if let Some(l) = g.locations.iter().find(|l| l.weight < 0) {
        return Err(ConstructionError::NegativeWeight(l.id.clone()));
    }
    if let Some(t) = g.transitions.iter().find(|t| t.weight < 0) {
        return Err(ConstructionError::NegativeWeight(t.id.clone()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;

    #[test]
    fn prefix_and_relink() {
        let g = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
        let p = g.prefixed("q0.cec").relink("q0.cec.exit", "q1");
        assert_eq!(p.entry(), "q0.cec.entry");
        assert_eq!(p.anchor("exit"), "q1");
        assert!(!p.owns_location("q0.cec.exit"));
        let cont = p.port("continue").unwrap();
        let t = p.transitions.iter().find(|t| t.id == cont).unwrap();
        assert_eq!(t.target, "q1");
    }

    #[test]
    fn every_builder_validates() {
        let handles = [
            build_cec(&GadgetParams::cec(30, 6, 25, 31)).unwrap(),
            build_cm(&GadgetParams::cm(30, 5, 10, 0, 10)).unwrap(),
            build_cz(1, 0).unwrap(),
            build_cnz(2, 3).unwrap(),
            build_exit(),
            build_soft_exit(),
        ];
        for h in &handles {
            let r = validate(&h.game());
            assert!(r.is_ok(), "{:?}: {:?}", h.kind, r.violations);
        }
    }

    #[test]
    fn gadget_file_has_anchors_and_params() {
        let g = build_cz(1, 0).unwrap();
        let text = serde_json::to_string(&g.to_file()).unwrap();
        for key in [
            "\"anchors\"",
            "\"params\"",
            "\"flag1\"",
            "\"flag4\"",
            "\"clocks\"",
        ] {
            assert!(text.contains(key), "{key}");
        }
    }

    #[test]
    fn urgent_locations_are_control_heads() {
        let g = build_cz(1, 0).unwrap();
        assert_eq!(g.urgent_locations(), vec![g.anchor("flag1")]);
    }
}
