//! Zero and non-zero control.
//!
//! Both gadgets are entered with `x = 1−a`, `y = 0` after an accumulated cost
//! of `30(1−a) + E`. The entry waits until `x = 1` and resets `x`, so `y = a`
//! afterwards. From the loop head `flag1` Min repeatedly picks a factor,
//! waits at the factor's branch location, and lets an inner CM (clock roles
//! swapped) audit that `y` was multiplied by that factor. Reaching `y = 1`
//! at `flag1` ends the game.
//!
//! Inner bookkeeping at the loop head is `C = 30 + 26·y + E`, so the inner
//! CMs run at rate 26 and the translation at rate 30 + 26. With
//! `CM(26, 1, k, M+4, M+6−k)` an audited stop costs exactly
//! `61 + M + E + |t − (k−1)a|`, and every weight stays non-negative.

use super::{
    build_cm_on, check_weights, ClockRoles, ConstructionError, GadgetHandle, GadgetKind,
    GadgetParams,
};
use crate::model::{Cmp, Owner, Transition};

/// Rate of the inner CMs and of the branch locations.
pub const CONTROL_ALPHA: i64 = 26;
/// Rate of the translation location: 30 for the outer frame plus the inner rate.
pub const TRANSLATION_WEIGHT: i64 = 30 + CONTROL_ALPHA;

pub fn build_cz(k: u32, m: i64) -> Result<GadgetHandle, ConstructionError> {
    build_control(GadgetKind::Cz, k, m)
}

pub fn build_cnz(k: u32, m: i64) -> Result<GadgetHandle, ConstructionError> {
    build_control(GadgetKind::Cnz, k, m)
}

fn build_control(kind: GadgetKind, k: u32, m: i64) -> Result<GadgetHandle, ConstructionError> {
    if !(1..=2).contains(&k) {
        return Err(ConstructionError::BadCounter(k));
    }
    let params = GadgetParams {
        alpha: CONTROL_ALPHA,
        beta: 1,
        k: k as i64,
        m,
        n: 0,
    };
    let mut g = GadgetHandle::new(kind, params, ClockRoles::xy());
    let other = 4 - k as i64;
    let mut factors = vec![5, other];
    if kind == GadgetKind::Cnz {
        factors.push(k as i64 + 1);
    }

    g.loc("entry", Owner::Min, TRANSLATION_WEIGHT);
    g.loc("flag1", Owner::Min, 0);
    g.loc("goal", Owner::Goal, 0);
    g.tr(Transition::new("done", "flag1", "goal")
        .guard("y", Cmp::Eq, 1)
        .guard("x", Cmp::Eq, 0)
        .weight(m + 5));
    g.anchors.insert("entry".into(), "entry".into());
    g.anchors.insert("flag1".into(), "flag1".into());
    g.anchors.insert("goal".into(), "goal".into());
    g.ports.insert("done".into(), "done".into());

    match kind {
        GadgetKind::Cz => {
            g.loc("flag4", Owner::Min, 31);
            g.tr(Transition::new("to_flag1", "entry", "flag1")
                .guard("x", Cmp::Eq, 1)
                .reset("x"));
            g.tr(Transition::new("to_flag4", "entry", "flag4")
                .guard("x", Cmp::Eq, 1)
                .reset("x"));
            g.tr(Transition::new("flag4.go", "flag4", "goal")
                .guard("y", Cmp::Eq, 1)
                .weight(m + 5));
            g.anchors.insert("flag4".into(), "flag4".into());
            g.ports.insert("to_flag1".into(), "to_flag1".into());
            g.ports.insert("to_flag4".into(), "to_flag4".into());
            g.ports.insert("flag4".into(), "flag4.go".into());
        }
        _ => {
            let first = k as i64 + 1;
            g.loc("force", Owner::Min, CONTROL_ALPHA);
            g.tr(Transition::new("translate", "entry", "force")
                .guard("x", Cmp::Eq, 1)
                .reset("x"));
            g.tr(
                Transition::new("force.go", "force", format!("mul{first}.entry")).guard(
                    "y",
                    Cmp::Le,
                    1,
                ),
            );
            g.anchors.insert("force".into(), "force".into());
            g.ports.insert("translate".into(), "translate".into());
            g.ports.insert("force".into(), "force.go".into());
        }
    }

    let swapped = ClockRoles::xy().swapped();
    for f in factors {
        let branch = match f {
            5 => "flag2".to_string(),
            f if f == other => "flag3".to_string(),
            f => format!("flag_mul{f}"),
        };
        let cm = GadgetParams::cm(CONTROL_ALPHA, 1, f, m + 4, m + 6 - f);
        let part = build_cm_on(&cm, &swapped)?
            .prefixed(&format!("mul{f}"))
            .relink(&format!("mul{f}.exit"), "flag1")
            .relink(&format!("mul{f}.goal"), "goal");
        g.loc(&branch, Owner::Min, CONTROL_ALPHA);
        g.tr(Transition::new(format!("branch{f}"), "flag1", branch.clone()).guard("x", Cmp::Eq, 0));
        g.tr(
            Transition::new(format!("{branch}.go"), branch.clone(), part.entry()).guard(
                "y",
                Cmp::Le,
                1,
            ),
        );
        g.ports.insert(format!("mul{f}"), format!("branch{f}"));
        g.ports.insert(format!("commit{f}"), format!("{branch}.go"));
        g.anchors.insert(branch.clone(), branch);
        g.absorb(part);
    }
    check_weights(&g)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cz_has_two_multipliers_and_a_direct_path() {
        let g = build_cz(1, 0).unwrap();
        let factors: Vec<i64> = g.parts.iter().map(|p| p.params.k).collect();
        assert_eq!(factors, vec![5, 3]);
        assert!(g.anchors.contains_key("flag4"));
        assert_eq!(g.anchor("flag2"), "flag2");
        assert_eq!(g.anchor("flag3"), "flag3");
    }

    #[test]
    fn cnz_forces_the_first_multiplication() {
        let g = build_cnz(2, 0).unwrap();
        let factors: Vec<i64> = g.parts.iter().map(|p| p.params.k).collect();
        assert_eq!(factors, vec![5, 2, 3]);
        assert!(!g.anchors.contains_key("flag4"));
        let force = g.transitions.iter().find(|t| t.id == "force.go").unwrap();
        assert_eq!(force.target, "mul3.entry");
    }

    #[test]
    fn inner_continue_returns_to_loop_head() {
        let g = build_cz(2, 0).unwrap();
        for p in &g.parts {
            let c = p.port("continue").unwrap();
            let t = g.transitions.iter().find(|t| t.id == c).unwrap();
            assert_eq!(t.target, "flag1");
            assert_eq!(t.resets, vec!["x".to_string()]);
        }
    }

    #[test]
    fn bad_counter_rejected() {
        assert_eq!(build_cz(3, 0), Err(ConstructionError::BadCounter(3)));
    }
}
