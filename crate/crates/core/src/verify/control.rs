use std::sync::Arc;

use super::gadgets::{contract_checks, label};
use super::{Basis, Check, SuiteOptions, VerificationReport};
use crate::compiler::Anchors;
use crate::gadgets::{build_cm_on, build_cnz, build_cz, GadgetHandle, GadgetKind};
use crate::machine::{mu_nonzero, mu_zero};
use crate::model::{Configuration, Valuation};
use crate::par;
use crate::rational::{int, pow, ratio, Rational};
use crate::strategy::{honest_max, play, ControlMax, ControlMin, Cost, Strategy};

/// An entry value `a` for a control, with its distance `μ` to the family.
#[derive(Debug, Clone)]
pub struct ControlEntry {
    pub kind: GadgetKind,
    pub k: u32,
    pub a: Rational,
    pub mu: Rational,
}

fn members(kind: GadgetKind, k: u32) -> [Rational; 5] {
    match (kind, k) {
        (GadgetKind::Cz, 1) => [
            ratio(1, 3),
            ratio(1, 5),
            ratio(1, 9),
            ratio(1, 15),
            ratio(1, 45),
        ],
        (GadgetKind::Cz, _) => [
            ratio(1, 2),
            ratio(1, 5),
            ratio(1, 4),
            ratio(1, 10),
            ratio(1, 25),
        ],
        (_, 1) => [
            ratio(1, 2),
            ratio(1, 6),
            ratio(1, 10),
            ratio(1, 30),
            ratio(1, 60),
        ],
        _ => [
            ratio(1, 3),
            ratio(1, 6),
            ratio(1, 15),
            ratio(1, 45),
            ratio(1, 90),
        ],
    }
}

/// Five exact members of the family (μ = 0) and five near misses offset by
/// `10^-1 .. 10^-5`, for one control.
pub fn control_entries(kind: GadgetKind, k: u32) -> Vec<ControlEntry> {
    let mu = |a: &Rational| {
        match kind {
            GadgetKind::Cnz => mu_nonzero(a, k),
            _ => mu_zero(a, k),
        }
        .expect("entries are positive")
    };
    let exact = members(kind, k);
    let near = exact
        .iter()
        .enumerate()
        .map(|(i, e)| e + pow(10, i as u32 + 1).recip());
    exact
        .iter()
        .cloned()
        .chain(near)
        .map(|a| ControlEntry {
            kind,
            k,
            mu: mu(&a),
            a,
        })
        .collect()
}

/// Plays a control entered at `x = 1−a, y = 0` with prior cost `30(1−a)`,
/// so that the exact-encoding total is 61. Returns the total and duration.
pub fn replay_control(
    h: &GadgetHandle,
    a: &Rational,
    honest: bool,
) -> Result<(Cost, Rational), String> {
    let layout = Arc::new(Anchors::for_gadget(h).layout());
    let game = h.game();
    let start = Configuration::new(
        h.entry(),
        Valuation::from_pairs([("x", int(1) - a), ("y", int(0))]),
    );
    let mut min = ControlMin::new(layout.clone());
    let mut max: Box<dyn Strategy> = if honest {
        Box::new(honest_max(layout))
    } else {
        Box::new(ControlMax::new(layout))
    };
    let out = play(&game, start, &mut min, &mut max, 1000).map_err(|e| e.to_string())?;
    let prior = int(30) * (int(1) - a);
    let total = match out.weight {
        Cost::Finite(w) => Cost::Finite(w + prior),
        Cost::Infinite => Cost::Infinite,
    };
    Ok((total, out.duration))
}

/// Entry values whose paths, together, cross every weighted location of the
/// control: the family members and near misses, a chain through every
/// factor, and the direct path of the zero control.
fn chain_entries(kind: GadgetKind, k: u32) -> Vec<Rational> {
    match (kind, k) {
        (GadgetKind::Cz, 1) => vec![ratio(1, 15)],
        (GadgetKind::Cz, _) => vec![ratio(1, 10)],
        (_, 1) => vec![ratio(1, 60)],
        _ => vec![ratio(1, 90)],
    }
}

/// Bounds checks for one control build; `durations` collects play lengths.
pub(crate) fn control_checks(
    h: &GadgetHandle,
    durations: &mut Vec<(String, Rational)>,
) -> Vec<Check> {
    let name = label(h);
    let k = h.params.k as u32;
    let base = int(61) + int(h.params.m);
    let mut out = Vec::new();
    let mut record = |id: &str, res: &Result<(Cost, Rational), String>| {
        if let Ok((_, d)) = res {
            durations.push((id.to_string(), d.clone()));
        }
    };
    let finite = |res: &Result<(Cost, Rational), String>| match res {
        Ok((Cost::Finite(c), _)) => Some(c.clone()),
        _ => None,
    };
    let failed = |id: String, claim: &str, res: &Result<(Cost, Rational), String>| {
        let observed = match res {
            Ok((c, _)) => c.to_string(),
            Err(e) => format!("fault: {e}"),
        };
        Check::new(id, claim, Basis::Replay).holds("a finite cost", observed, false)
    };

    for (i, e) in control_entries(h.kind, k).into_iter().enumerate() {
        let id = format!("{name}/entry#{i}");
        let audited = replay_control(h, &e.a, false);
        record(&id, &audited);
        let claim = "inner Min vs auditing Max lands in [61+μ, 61+5μ]";
        out.push(match finite(&audited) {
            Some(c) if e.mu == int(0) => {
                Check::new(&id, "exact encoding costs exactly 61", Basis::Replay).eq(&base, &c)
            }
            Some(c) => Check::new(&id, claim, Basis::Replay).within(
                &(&base + &e.mu),
                &(&base + int(5) * &e.mu),
                &c,
            ),
            None => failed(id.clone(), claim, &audited),
        });
        let hid = format!("{id}/honest");
        let honest = replay_control(h, &e.a, true);
        record(&hid, &honest);
        let claim = "inner Min secures at most 61+5μ against a Max that never stops";
        out.push(match finite(&honest) {
            Some(c) => Check::new(&hid, claim, Basis::Replay).le(&(&base + int(5) * &e.mu), &c),
            None => failed(hid, claim, &honest),
        });
    }
    for (i, a) in chain_entries(h.kind, k).into_iter().enumerate() {
        let id = format!("{name}/chain#{i}");
        let res = replay_control(h, &a, true);
        record(&id, &res);
        let claim = "multiplying through every factor costs exactly 61";
        out.push(match finite(&res) {
            Some(c) => Check::new(&id, claim, Basis::Replay).eq(&base, &c),
            None => failed(id, claim, &res),
        });
    }
    if h.kind == GadgetKind::Cz {
        let a = ratio(3, 4);
        let id = format!("{name}/direct");
        let res = replay_control(h, &a, false);
        record(&id, &res);
        let claim = "direct path from a large a costs 61+5(1-a)";
        out.push(match finite(&res) {
            Some(c) => {
                Check::new(&id, claim, Basis::Replay).eq(&(&base + int(5) * (int(1) - &a)), &c)
            }
            None => failed(id, claim, &res),
        });
    }
    for part in h.flatten().into_iter().skip(1) {
        match detached(part) {
            Some(g) => out.extend(contract_checks(&g, &format!("{name}/"))),
            None => out.push(
                Check::new(
                    format!("{name}/part"),
                    "embedded stage rebuilds standalone",
                    Basis::Structural,
                )
                .holds("a CM", format!("{:?}", part.kind), false),
            ),
        }
    }
    out
}

/// An embedded multiplication stage as a playable gadget: a fresh CM with
/// the same parameters, carrying the embedded copy's weights.
fn detached(part: &GadgetHandle) -> Option<GadgetHandle> {
    let prefix = part.entry().strip_suffix(".entry")?.to_string();
    let mut g = build_cm_on(&part.params, &part.roles)
        .ok()?
        .prefixed(&prefix);
    for l in &mut g.locations {
        if let Some(src) = part.locations.iter().find(|s| s.id == l.id) {
            l.weight = src.weight;
        }
    }
    for t in &mut g.transitions {
        if let Some(src) = part.transitions.iter().find(|s| s.id == t.id) {
            t.weight = src.weight;
        }
    }
    Some(g)
}

pub fn controls() -> Vec<GadgetHandle> {
    let mut out = Vec::new();
    for k in [1, 2] {
        out.push(build_cz(k, 0).expect("k is 1 or 2"));
        out.push(build_cnz(k, 0).expect("k is 1 or 2"));
    }
    out
}

pub fn suite_cz_cnz(opts: &SuiteOptions) -> VerificationReport {
    let mut report = VerificationReport::new("cz");
    let results = par::map(&controls(), opts.jobs, |h| {
        let mut d = Vec::new();
        let checks = control_checks(h, &mut d);
        (checks, d)
    });
    let mut durations = Vec::new();
    for (checks, d) in results {
        report.checks.extend(checks);
        durations.extend(d);
    }
    report.push_duration_bound(&durations);
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn near_misses_are_near_misses() {
        for h in controls() {
            let es = control_entries(h.kind, h.params.k as u32);
            assert!(es[..5].iter().all(|e| e.mu == int(0)));
            assert!(es[5..].iter().all(|e| e.mu > int(0)), "{:?}", h.kind);
        }
    }

    #[test]
    fn suite_passes() {
        let r = suite_cz_cnz(&SuiteOptions::default());
        let bad: Vec<_> = r.failures().collect();
        assert!(bad.is_empty(), "{bad:#?}");
    }
}
