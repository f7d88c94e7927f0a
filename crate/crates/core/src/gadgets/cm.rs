use super::{check_weights, ClockRoles, ConstructionError, GadgetHandle, GadgetKind, GadgetParams};
use crate::model::{Cmp, Owner, Transition};

/// Multiplication control with the default clock roles.
pub fn build_cm(params: &GadgetParams) -> Result<GadgetHandle, ConstructionError> {
    build_cm_on(params, &ClockRoles::xy())
}

/// Same entry and continue port as the CEC; the stop paths are
///
/// * upper: rate α+β until primary = 1, rate k until secondary = 1, then `+M`
/// * lower: rate α−β until primary = 1 (reset), rate 0 until secondary = 1
///   (reset), rate k until primary = 1, then `+N`
pub fn build_cm_on(
    params: &GadgetParams,
    roles: &ClockRoles,
) -> Result<GadgetHandle, ConstructionError> {
    let GadgetParams {
        alpha,
        beta,
        k,
        m,
        n,
    } = *params;
    if beta > alpha {
        return Err(ConstructionError::BetaAboveAlpha { alpha, beta });
    }
    let (x, y) = (roles.primary.as_str(), roles.secondary.as_str());
    let mut g = GadgetHandle::new(GadgetKind::Cm, *params, roles.clone());

    g.loc("entry", Owner::Max, 0);
    g.loc("exit", Owner::Goal, 0);
    g.loc("goal", Owner::Goal, 0);
    g.loc("up1", Owner::Min, alpha + beta);
    g.loc("up2", Owner::Min, k);
    g.loc("lo1", Owner::Min, alpha - beta);
    g.loc("lo2", Owner::Min, 0);
    g.loc("lo3", Owner::Min, k);

    g.tr(Transition::new("continue", "entry", "exit")
        .guard(x, Cmp::Le, 1)
        .reset(y));
    g.tr(Transition::new("upper", "entry", "up1").guard(x, Cmp::Le, 1));
    g.tr(Transition::new("lower", "entry", "lo1").guard(x, Cmp::Le, 1));
    g.tr(Transition::new("up1.go", "up1", "up2").guard(x, Cmp::Eq, 1));
    g.tr(Transition::new("up2.go", "up2", "goal")
        .guard(y, Cmp::Eq, 1)
        .weight(m));
    g.tr(Transition::new("lo1.go", "lo1", "lo2")
        .guard(x, Cmp::Eq, 1)
        .reset(x));
    g.tr(Transition::new("lo2.go", "lo2", "lo3")
        .guard(y, Cmp::Eq, 1)
        .reset(y));
    g.tr(Transition::new("lo3.go", "lo3", "goal")
        .guard(x, Cmp::Eq, 1)
        .weight(n));

    for a in ["entry", "exit", "goal"] {
        g.anchors.insert(a.into(), a.into());
    }
    for p in ["continue", "upper", "lower"] {
        g.ports.insert(p.into(), p.into());
    }
    check_weights(&g)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_weights() {
        let p = GadgetParams::cm(30, 5, 10, 0, 10);
        let g = build_cm(&p).unwrap();
        assert_eq!(p.factor(), crate::rational::int(2));
        let w = |id: &str| g.locations.iter().find(|l| l.id == id).unwrap().weight;
        assert_eq!((w("up1"), w("up2"), w("lo1"), w("lo3")), (35, 10, 25, 10));
    }

    #[test]
    fn swapped_roles_reset_the_other_clock() {
        let g = build_cm_on(
            &GadgetParams::cm(26, 1, 5, 4, 1),
            &ClockRoles::xy().swapped(),
        )
        .unwrap();
        let cont = g.transitions.iter().find(|t| t.id == "continue").unwrap();
        assert_eq!(cont.resets, vec!["x".to_string()]);
        assert_eq!(cont.guard[0].clock, "y");
    }
}
