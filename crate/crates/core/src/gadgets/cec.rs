use super::{check_weights, ClockRoles, ConstructionError, GadgetHandle, GadgetKind, GadgetParams};
use crate::model::{Cmp, Owner, Transition};

/// Counter-evolution control with the default clock roles.
pub fn build_cec(params: &GadgetParams) -> Result<GadgetHandle, ConstructionError> {
    build_cec_on(params, &ClockRoles::xy())
}

/// Max waits at `entry`, then either lets play continue (resetting the
/// secondary clock) or stops it along one of two priced paths:
///
/// * upper: rate 2α until primary = 1, rate β until secondary = 1, then `+M`
/// * lower: rate 0 until secondary = 1 (reset), rate β until primary = 2, then `+N`
pub fn build_cec_on(
    params: &GadgetParams,
    roles: &ClockRoles,
) -> Result<GadgetHandle, ConstructionError> {
    let GadgetParams {
        alpha, beta, m, n, ..
    } = *params;
    if beta > alpha {
        return Err(ConstructionError::BetaAboveAlpha { alpha, beta });
    }
    let (x, y) = (roles.primary.as_str(), roles.secondary.as_str());
    let mut g = GadgetHandle::new(GadgetKind::Cec, *params, roles.clone());

    g.loc("entry", Owner::Max, 0);
    g.loc("exit", Owner::Goal, 0);
    g.loc("goal", Owner::Goal, 0);
    g.loc("up1", Owner::Min, 2 * alpha);
    g.loc("up2", Owner::Min, beta);
    g.loc("lo1", Owner::Min, 0);
    g.loc("lo2", Owner::Min, beta);

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
        .guard(y, Cmp::Eq, 1)
        .reset(y));
    g.tr(Transition::new("lo2.go", "lo2", "goal")
        .guard(x, Cmp::Eq, 2)
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
