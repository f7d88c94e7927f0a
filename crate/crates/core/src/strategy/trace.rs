//! Human and JSON views of a play, and the per-step bookkeeping derived from
//! it.

use num_traits::Signed;
use serde::Serialize;

use super::{clock, Cost, PlayOutcome, PlayStatus};
use crate::compiler::{Layout, STATE_WEIGHT};
use crate::gadgets::GadgetKind;
use crate::machine::{decode_best, encode};
use crate::model::{Configuration, Run, Valuation};
use crate::rational::{self, int, Rational};

fn show(q: &Rational, decimal: bool) -> String {
    if decimal {
        rational::to_decimal(q, 12)
    } else {
        rational::fmt(q)
    }
}

fn show_valuation(v: &Valuation, decimal: bool) -> String {
    v.iter()
        .map(|(c, q)| format!("{c}={}", show(q, decimal)))
        .collect::<Vec<_>>()
        .join(",")
}

/// One line per step: `i  from [valuation] --d, t--> to  +cost = total`.
pub fn render_trace(run: &Run, decimal: bool) -> Vec<String> {
    let mut out = vec![format!(
        "0  {} [{}]",
        run.initial.location,
        show_valuation(&run.initial.valuation, decimal)
    )];
    let mut from = &run.initial;
    let mut total = rational::zero();
    for (i, s) in run.steps.iter().enumerate() {
        total += &s.cost;
        out.push(format!(
            "{}  {} --{}, {}--> {} [{}]  +{} = {}",
            i + 1,
            from.location,
            show(&s.mv.delay, decimal),
            s.mv.transition,
            s.config.location,
            show_valuation(&s.config.valuation, decimal),
            show(&s.cost, decimal),
            show(&total, decimal),
        ));
        from = &s.config;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceLine {
    pub step: usize,
    pub from: String,
    #[serde(with = "rational::serde_str")]
    pub delay: Rational,
    pub transition: String,
    pub to: Configuration,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    #[serde(with = "rational::serde_str")]
    pub total: Rational,
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceFile {
    pub min: String,
    pub max: String,
    pub status: PlayStatus,
    pub weight: Cost,
    #[serde(with = "rational::serde_str")]
    pub duration: Rational,
    pub initial: Configuration,
    pub steps: Vec<TraceLine>,
}

pub fn trace_json(outcome: &PlayOutcome, min: &str, max: &str) -> TraceFile {
    let run = &outcome.trace;
    let mut from = &run.initial;
    let mut total = rational::zero();
    let mut steps = Vec::with_capacity(run.steps.len());
    for (i, s) in run.steps.iter().enumerate() {
        total += &s.cost;
        steps.push(TraceLine {
            step: i + 1,
            from: from.location.clone(),
            delay: s.mv.delay.clone(),
            transition: s.mv.transition.clone(),
            to: s.config.clone(),
            cost: s.cost.clone(),
            total: total.clone(),
        });
        from = &s.config;
    }
    TraceFile {
        min: min.into(),
        max: max.into(),
        status: outcome.status,
        weight: outcome.weight.clone(),
        duration: outcome.duration.clone(),
        initial: run.initial.clone(),
        steps,
    }
}

/// The play as seen at the `p`-th entry into a state location.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimRow {
    pub p: usize,
    pub state: String,
    /// Counters of the nearest valid encoding.
    pub c: u32,
    pub d: u32,
    #[serde(with = "rational::serde_str")]
    pub x: Rational,
    /// Weight accumulated before entering.
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
    /// `cost − 30·x`.
    #[serde(with = "rational::serde_str")]
    pub e: Rational,
    /// `x` is exactly the encoding of `(c, d)` after `p − 1` steps.
    pub exact: bool,
    /// `e ≤ 0` and `e` did not grow since the previous row.
    pub ok: bool,
}

/// Rows for every state visit of `run` in a compiled game.
pub fn bookkeeping(run: &Run, layout: &Layout) -> Vec<SimRow> {
    let mut rows: Vec<SimRow> = Vec::new();
    let mut cost = rational::zero();
    let configs = std::iter::once((&run.initial, rational::zero()))
        .chain(run.steps.iter().map(|s| (&s.config, s.cost.clone())));
    for (cfg, step_cost) in configs {
        cost += step_cost;
        let Some(q) = layout.state_at(&cfg.location) else {
            continue;
        };
        let p = rows.len() + 1;
        let x = clock(cfg, "x");
        let dec = decode_best(&x, (p - 1) as u32);
        let e = &cost - int(STATE_WEIGHT) * &x;
        let ok = !e.is_positive() && rows.last().is_none_or(|r| e <= r.e);
        rows.push(SimRow {
            p,
            state: q.to_string(),
            c: dec.c,
            d: dec.d,
            exact: encode(dec.c, dec.d, (p - 1) as u32) == x,
            x,
            cost: cost.clone(),
            e,
            ok,
        });
    }
    rows
}

/// One entry into a multiplication stage inside a control.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ControlRow {
    pub j: usize,
    pub module: String,
    #[serde(with = "rational::serde_str")]
    pub factor: Rational,
    /// Primary minus secondary at the stage entry.
    #[serde(with = "rational::serde_str")]
    pub a: Rational,
    #[serde(with = "rational::serde_str")]
    pub b: Rational,
    /// `|b − (factor − 1)·a|`.
    #[serde(with = "rational::serde_str")]
    pub eta: Rational,
    #[serde(with = "rational::serde_str")]
    pub cost: Rational,
}

pub fn control_bookkeeping(run: &Run, layout: &Layout) -> Vec<ControlRow> {
    let mut rows = Vec::new();
    let mut cost = rational::zero();
    let configs = std::iter::once((&run.initial, rational::zero()))
        .chain(run.steps.iter().map(|s| (&s.config, s.cost.clone())));
    for (cfg, step_cost) in configs {
        cost += step_cost;
        let Some(m) = layout.module_at(&cfg.location) else {
            continue;
        };
        if m.kind != GadgetKind::Cm || m.parent.is_none() || m.anchors["entry"] != cfg.location {
            continue;
        }
        let b = clock(cfg, &m.roles.secondary);
        let a = clock(cfg, &m.roles.primary) - &b;
        let factor = m.params.factor();
        let eta = (&b - (&factor - int(1)) * &a).abs();
        rows.push(ControlRow {
            j: rows.len() + 1,
            module: m.id.clone(),
            factor,
            a,
            b,
            eta,
            cost: cost.clone(),
        });
    }
    rows
}
