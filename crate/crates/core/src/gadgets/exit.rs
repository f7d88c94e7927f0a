use super::{ClockRoles, GadgetHandle, GadgetKind, GadgetParams};
use crate::model::{Cmp, Owner, Transition};

/// Min's way out: wait at rate 31 until `x = 1`, then pay 31.
pub fn build_exit() -> GadgetHandle {
    exit_with(GadgetKind::Exit, 31)
}

/// Like [`build_exit`] with rate 30, so a faithful halt ends at exactly 61.
pub fn build_soft_exit() -> GadgetHandle {
    exit_with(GadgetKind::SoftExit, 30)
}

fn exit_with(kind: GadgetKind, rate: i64) -> GadgetHandle {
    let mut g = GadgetHandle::new(kind, GadgetParams::default(), ClockRoles::xy());
    g.loc("entry", Owner::Min, rate);
    g.loc("goal", Owner::Goal, 0);
    g.tr(Transition::new("leave", "entry", "goal")
        .guard("x", Cmp::Eq, 1)
        .weight(31));
    g.anchors.insert("entry".into(), "entry".into());
    g.anchors.insert("goal".into(), "goal".into());
    g.ports.insert("leave".into(), "leave".into());
    g
}
