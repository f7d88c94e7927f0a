//! Cost contracts, measured by playing fragments rather than reading weights.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use super::{GadgetHandle, GadgetKind, GadgetParams};
use crate::model::{earliest_delay, Configuration, DelayedMove, Game, ModelError, Owner, Run};
use crate::rational::{self, int, ratio, Frac, Rational};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ContractError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("forced path is stuck at `{0}`")]
    Stuck(String),
    #[error("gadget has no `{0}` port")]
    NoPort(String),
    #[error("probe points are affinely dependent")]
    Singular,
    #[error(
        "{resolution} is not affine: held-out probe predicted {predicted}, measured {measured}"
    )]
    NotAffine {
        resolution: Resolution,
        predicted: String,
        measured: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING-KEBAB-CASE")]
pub enum Resolution {
    Continue,
    StopUpper,
    StopLower,
    /// The single forced path of an exit module.
    Leave,
}

impl Resolution {
    pub fn port(self) -> &'static str {
        match self {
            Resolution::Continue => "continue",
            Resolution::StopUpper => "upper",
            Resolution::StopLower => "lower",
            Resolution::Leave => "leave",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Resolution::Continue => "CONTINUE",
            Resolution::StopUpper => "STOP-UPPER",
            Resolution::StopLower => "STOP-LOWER",
            Resolution::Leave => "LEAVE",
        })
    }
}

/// Entry state of a gadget: primary `a+b`, secondary `b`, prior cost `α(a+b)+E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryFrame {
    pub a: Rational,
    pub b: Rational,
    pub e: Rational,
}

/// One measurement point; `t` is the time Max waits at the entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Probe {
    pub a: Rational,
    pub b: Rational,
    pub t: Rational,
}

impl Probe {
    pub fn new(a: Rational, b: Rational, t: Rational) -> Self {
        Probe { a, b, t }
    }
}

/// Four fitting points and one held out, all inside `a+b+t ≤ 1`.
pub fn standard_probes() -> [Probe; 5] {
    [
        Probe::new(ratio(1, 10), ratio(1, 10), int(0)),
        Probe::new(ratio(3, 10), ratio(1, 10), int(0)),
        Probe::new(ratio(1, 10), ratio(3, 10), int(0)),
        Probe::new(ratio(1, 10), ratio(1, 10), ratio(1, 5)),
        Probe::new(ratio(1, 5), ratio(1, 7), ratio(1, 9)),
    ]
}

/// `coeff_a·a + coeff_b·b + coeff_t·t + constant`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AffineCost {
    #[serde(with = "rational::serde_str")]
    pub coeff_a: Rational,
    #[serde(with = "rational::serde_str")]
    pub coeff_b: Rational,
    #[serde(with = "rational::serde_str")]
    pub coeff_t: Rational,
    #[serde(with = "rational::serde_str")]
    pub constant: Rational,
}

impl AffineCost {
    pub fn new(coeff_a: i64, coeff_b: i64, coeff_t: i64, constant: i64) -> Self {
        AffineCost {
            coeff_a: int(coeff_a),
            coeff_b: int(coeff_b),
            coeff_t: int(coeff_t),
            constant: int(constant),
        }
    }

    pub fn eval(&self, a: &Rational, b: &Rational, t: &Rational) -> Rational {
        &self.coeff_a * a + &self.coeff_b * b + &self.coeff_t * t + &self.constant
    }
}

impl fmt::Display for AffineCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            Frac(&self.coeff_a),
            Frac(&self.coeff_b),
            Frac(&self.coeff_t),
            Frac(&self.constant)
        )
    }
}

/// Plays `resolution` from the probe's entry and follows the forced path to
/// the first goal. Returns the added cost and the final configuration.
pub fn probe_cost(
    handle: &GadgetHandle,
    resolution: Resolution,
    probe: &Probe,
) -> Result<(Rational, Configuration), ContractError> {
    let game = handle.game();
    let start = Configuration::new(handle.entry(), handle.roles.frame(&probe.a, &probe.b));
    let mut run = Run::new(start);
    if resolution != Resolution::Leave {
        let port = handle
            .port(resolution.port())
            .ok_or_else(|| ContractError::NoPort(resolution.port().into()))?;
        run.extend(&game, DelayedMove::new(probe.t.clone(), port))?;
    }
    follow_forced(&game, &mut run)?;
    Ok((run.weight().clone(), run.last().clone()))
}

/// Takes the earliest enabled transition until a goal is reached.
fn follow_forced(game: &Game, run: &mut Run) -> Result<(), ContractError> {
    for _ in 0..16 {
        let at = run.last().clone();
        if game.owner(&at.location)? == Owner::Goal {
            return Ok(());
        }
        let mut next = None;
        for t in game.outgoing(&at.location)? {
            if let Some(d) = earliest_delay(&at.valuation, &t.guard)? {
                next = Some(DelayedMove::new(d, t.id.clone()));
                break;
            }
        }
        let mv = next.ok_or_else(|| ContractError::Stuck(at.location.clone()))?;
        run.extend(game, mv)?;
    }
    Err(ContractError::Stuck(run.last().location.clone()))
}

/// Fits an affine cost through four probes and certifies it on the fifth.
pub fn extract_affine_cost(
    handle: &GadgetHandle,
    resolution: Resolution,
    probes: &[Probe; 5],
) -> Result<AffineCost, ContractError> {
    let mut rows = Vec::with_capacity(4);
    for p in &probes[..4] {
        let (cost, _) = probe_cost(handle, resolution, p)?;
        rows.push([p.a.clone(), p.b.clone(), p.t.clone(), int(1), cost]);
    }
    let [ca, cb, ct, c0] = solve4(rows).ok_or(ContractError::Singular)?;
    let fit = AffineCost {
        coeff_a: ca,
        coeff_b: cb,
        coeff_t: ct,
        constant: c0,
    };
    let held = &probes[4];
    let (measured, _) = probe_cost(handle, resolution, held)?;
    let predicted = fit.eval(&held.a, &held.b, &held.t);
    if predicted != measured {
        return Err(ContractError::NotAffine {
            resolution,
            predicted: rational::fmt(&predicted),
            measured: rational::fmt(&measured),
        });
    }
    Ok(fit)
}

/// Exact Gauss-Jordan elimination on a 4×5 augmented matrix.
fn solve4(mut m: Vec<[Rational; 5]>) -> Option<[Rational; 4]> {
    for col in 0..4 {
        let pivot = (col..4).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v = &*v / &p;
        }
        for r in 0..4 {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..5 {
                    let delta = &f * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    Some([
        m[0][4].clone(),
        m[1][4].clone(),
        m[2][4].clone(),
        m[3][4].clone(),
    ])
}

/// The contract each resolution must meet, from the gadget's parameters.
pub fn expected_costs(kind: GadgetKind, p: &GadgetParams) -> Vec<(Resolution, AffineCost)> {
    let GadgetParams {
        alpha,
        beta,
        k,
        m,
        n,
    } = *p;
    match kind {
        GadgetKind::Cec => vec![
            (Resolution::Continue, AffineCost::new(0, 0, 0, 0)),
            // 2α + M − (2α−β)a − 2αb − 2αt
            (
                Resolution::StopUpper,
                AffineCost::new(beta - 2 * alpha, -2 * alpha, -2 * alpha, 2 * alpha + m),
            ),
            // β(1−a) + N
            (
                Resolution::StopLower,
                AffineCost::new(-beta, 0, 0, beta + n),
            ),
        ],
        GadgetKind::Cm => {
            let (s, d) = (alpha + beta, alpha - beta);
            vec![
                (Resolution::Continue, AffineCost::new(0, 0, 0, 0)),
                // (α+β)(1−a−b−t) + k·a + M
                (Resolution::StopUpper, AffineCost::new(k - s, -s, -s, s + m)),
                // (α−β)(1−a−b−t) + k(1−a) + N
                (
                    Resolution::StopLower,
                    AffineCost::new(-d - k, -d, -d, d + k + n),
                ),
            ]
        }
        GadgetKind::Exit => vec![(Resolution::Leave, AffineCost::new(-31, -31, 0, 62))],
        GadgetKind::SoftExit => vec![(Resolution::Leave, AffineCost::new(-30, -30, 0, 61))],
        GadgetKind::Cz | GadgetKind::Cnz => Vec::new(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractLine {
    pub resolution: Resolution,
    pub expected: AffineCost,
    pub observed: Option<AffineCost>,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContractReport {
    pub kind: GadgetKind,
    pub params: GadgetParams,
    pub lines: Vec<ContractLine>,
    /// CONTINUE leaves primary `a+b+t` and secondary 0 at every probe.
    pub continue_frame: bool,
    pub pass: bool,
}

/// Extracts every resolution's cost and compares it with [`expected_costs`].
pub fn check_gadget_contract(handle: &GadgetHandle) -> ContractReport {
    let probes = standard_probes();
    let mut lines = Vec::new();
    for (resolution, expected) in expected_costs(handle.kind, &handle.params) {
        let (observed, error) = match extract_affine_cost(handle, resolution, &probes) {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = observed.as_ref() == Some(&expected);
        lines.push(ContractLine {
            resolution,
            expected,
            observed,
            error,
            pass,
        });
    }
    let continue_frame = match handle.kind {
        GadgetKind::Cec | GadgetKind::Cm => probes.iter().all(|p| {
            probe_cost(handle, Resolution::Continue, p)
                .map(|(_, end)| {
                    let x = end.valuation.get(&handle.roles.primary).cloned();
                    let y = end.valuation.get(&handle.roles.secondary).cloned();
                    x == Ok(&p.a + &p.b + &p.t) && y == Ok(int(0))
                })
                .unwrap_or(false)
        }),
        _ => true,
    };
    let pass = !lines.is_empty() && continue_frame && lines.iter().all(|l| l.pass);
    ContractReport {
        kind: handle.kind,
        params: handle.params,
        lines,
        continue_frame,
        pass,
    }
}

/// Measured totals `α(a+b) + E + added` of both stop paths with Max waiting `t`.
pub fn stop_totals(
    handle: &GadgetHandle,
    frame: &EntryFrame,
    t: &Rational,
) -> Result<(Rational, Rational), ContractError> {
    let probe = Probe::new(frame.a.clone(), frame.b.clone(), t.clone());
    let base = int(handle.params.alpha) * (&frame.a + &frame.b) + &frame.e;
    let (up, _) = probe_cost(handle, Resolution::StopUpper, &probe)?;
    let (lo, _) = probe_cost(handle, Resolution::StopLower, &probe)?;
    Ok((&base + up, base + lo))
}

fn max_stop(handle: &GadgetHandle, frame: &EntryFrame) -> Result<Rational, ContractError> {
    let (up, lo) = stop_totals(handle, frame, &int(0))?;
    Ok(if up >= lo { up } else { lo })
}

/// `(measured, closed form)` of the best immediate stop in a CEC with
/// `N = M + β`: `α(1 + |b − (1−β/α)(1−a)|) + E + M + β`.
pub fn cor_cec_identity(
    handle: &GadgetHandle,
    frame: &EntryFrame,
) -> Result<(Rational, Rational), ContractError> {
    let p = &handle.params;
    let off = (&frame.b - p.gamma() * (int(1) - &frame.a)).abs();
    let closed = int(p.alpha) * (int(1) + off) + &frame.e + int(p.m + p.beta);
    Ok((max_stop(handle, frame)?, closed))
}

/// `(measured, closed form)` of the best immediate stop in a CM with
/// `N = M + 2β − kβ`: `α + β + M + E + β|b − (k−1)a|` where `k` is the factor.
pub fn cor_cm_identity(
    handle: &GadgetHandle,
    frame: &EntryFrame,
) -> Result<(Rational, Rational), ContractError> {
    let p = &handle.params;
    let off = (&frame.b - (p.factor() - int(1)) * &frame.a).abs();
    let closed = int(p.alpha + p.beta + p.m) + &frame.e + int(p.beta) * off;
    Ok((max_stop(handle, frame)?, closed))
}

/// The `b` on the grid `center + i·step`, `|i| ≤ radius`, minimising the
/// measured best stop cost at `t = 0`. Ties keep the smaller `b`.
pub fn grid_argmin(
    handle: &GadgetHandle,
    a: &Rational,
    center: &Rational,
    step: &Rational,
    radius: i64,
) -> Result<Rational, ContractError> {
    let mut best: Option<(Rational, Rational)> = None;
    for i in -radius..=radius {
        let b = center + step * int(i);
        if b.is_negative() || &b + a >= int(1) {
            continue;
        }
        let frame = EntryFrame {
            a: a.clone(),
            b: b.clone(),
            e: int(0),
        };
        let cost = max_stop(handle, &frame)?;
        if best.as_ref().is_none_or(|(c, _)| cost < *c) {
            best = Some((cost, b));
        }
    }
    best.map(|(_, b)| b).ok_or(ContractError::Singular)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_cec, build_cm, build_exit, build_soft_exit};

    #[test]
    fn cec_upper_matches_hand_expansion() {
        let g = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
        let up = extract_affine_cost(&g, Resolution::StopUpper, &standard_probes()).unwrap();
        assert_eq!(up, AffineCost::new(-57, -60, -60, 88));
        let lo = extract_affine_cost(&g, Resolution::StopLower, &standard_probes()).unwrap();
        assert_eq!(lo, AffineCost::new(-3, 0, 0, 34));
        let c = extract_affine_cost(&g, Resolution::Continue, &standard_probes()).unwrap();
        assert_eq!(c, AffineCost::new(0, 0, 0, 0));
    }

    #[test]
    fn cm_examples() {
        let g = build_cm(&GadgetParams::cm(30, 5, 10, 0, 10)).unwrap();
        let (up, _) = probe_cost(
            &g,
            Resolution::StopUpper,
            &Probe::new(ratio(1, 2), int(0), int(0)),
        )
        .unwrap();
        assert_eq!(up, ratio(45, 2));
        let lo = extract_affine_cost(&g, Resolution::StopLower, &standard_probes()).unwrap();
        // 25(1−a−b−t) + 10(1−a) + 10
        assert_eq!(lo, AffineCost::new(-35, -25, -25, 45));
    }

    #[test]
    fn reference_gadgets_pass() {
        for beta in [2, 3, 6, 12, 18] {
            let g = build_cec(&GadgetParams::cec(30, beta, 31 - beta, 31)).unwrap();
            let r = check_gadget_contract(&g);
            assert!(r.pass, "{r:?}");
        }
        for k in [2, 3, 5] {
            let g = build_cm(&GadgetParams::cm(30, 1, k, 4, 6 - k)).unwrap();
            assert!(check_gadget_contract(&g).pass);
        }
        assert!(check_gadget_contract(&build_exit()).pass);
        assert!(check_gadget_contract(&build_soft_exit()).pass);
    }

    #[test]
    fn mutation_is_caught() {
        let g = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
        for (what, m) in g.weight_mutants() {
            assert!(!check_gadget_contract(&m).pass, "{what} survived");
        }
    }

    #[test]
    fn exit_examples() {
        let e = build_exit();
        let (c, _) = probe_cost(
            &e,
            Resolution::Leave,
            &Probe::new(ratio(9, 10), int(0), int(0)),
        )
        .unwrap();
        assert_eq!(c + int(0), ratio(611, 10) - int(30) * ratio(9, 10));
        let (c, _) = probe_cost(
            &build_soft_exit(),
            Resolution::Leave,
            &Probe::new(ratio(9, 10), int(0), int(0)),
        )
        .unwrap();
        assert_eq!(c + int(30) * ratio(9, 10), int(61));
    }

    #[test]
    fn minimizer_example() {
        let g = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
        let a = ratio(4, 5);
        let b = grid_argmin(&g, &a, &ratio(1, 5), &ratio(1, 1000), 40).unwrap();
        assert_eq!(b, ratio(9, 50));
        let frame = EntryFrame { a, b, e: int(0) };
        let (measured, closed) = cor_cec_identity(&g, &frame).unwrap();
        assert_eq!(measured, int(61));
        assert_eq!(closed, int(61));
    }

    #[test]
    fn cm_lower_stop_constant_is_symmetric() {
        let k = 3;
        let (alpha, beta, m) = (30, 2, 5);
        let g = build_cm(&GadgetParams::cm(
            alpha,
            beta,
            k * beta,
            m,
            m + 2 * beta - k * beta,
        ))
        .unwrap();
        for (a, b) in [
            (ratio(1, 5), ratio(2, 5)),
            (ratio(1, 5), ratio(1, 10)),
            (ratio(1, 10), ratio(1, 2)),
        ] {
            let (measured, closed) = cor_cm_identity(&g, &EntryFrame { a, b, e: int(7) }).unwrap();
            assert_eq!(measured, closed);
        }
    }
}
