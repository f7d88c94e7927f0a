use num_traits::Signed;

use super::{Basis, Check, SuiteOptions, VerificationReport};
use crate::gadgets::{
    build_cec, build_cm, build_exit, build_soft_exit, check_gadget_contract, cor_cec_identity,
    cor_cm_identity, grid_argmin, EntryFrame, GadgetHandle, GadgetKind, GadgetParams,
    CONTROL_ALPHA,
};
use crate::par;
use crate::rational::{int, ratio, Rational};

/// Every standalone CEC, CM and exit parameterization the compiler uses.
pub fn compiled_gadgets() -> Vec<GadgetHandle> {
    let mut out = Vec::new();
    for beta in [2, 3, 6, 12, 18] {
        out.push(build_cec(&GadgetParams::cec(30, beta, 31 - beta, 31)).expect("valid CEC"));
    }
    for k in [2, 3, 5] {
        out.push(build_cm(&GadgetParams::cm(CONTROL_ALPHA, 1, k, 4, 6 - k)).expect("valid CM"));
    }
    out.push(build_exit());
    out.push(build_soft_exit());
    out
}

pub(crate) fn label(h: &GadgetHandle) -> String {
    let p = &h.params;
    match h.kind {
        GadgetKind::Cec => format!("cec(b={})", p.beta),
        GadgetKind::Cm => format!("cm(k={})", p.k),
        GadgetKind::Cz => format!("cz(k={})", p.k),
        GadgetKind::Cnz => format!("cnz(k={})", p.k),
        GadgetKind::Exit => "exit".into(),
        GadgetKind::SoftExit => "soft-exit".into(),
    }
}

/// 20 entry frames with `a, b > 0` and `a + b < 1`; `scale` shrinks `a`.
fn sample_frames(scale: i64) -> Vec<EntryFrame> {
    (0..20)
        .map(|i| {
            let a = ratio(i + 1, 25 * scale);
            let b = (int(1) - &a) * ratio((7 * i) % 11 + 1, 13);
            EntryFrame {
                a,
                b,
                e: ratio(-(i % 3), 7),
            }
        })
        .collect()
}

/// Affine contract of one gadget: one check per resolution.
pub(crate) fn contract_checks(h: &GadgetHandle, prefix: &str) -> Vec<Check> {
    let name = format!("{prefix}{}", label(h));
    let report = check_gadget_contract(h);
    let mut out: Vec<Check> = report
        .lines
        .iter()
        .map(|l| {
            let observed = match (&l.observed, &l.error) {
                (Some(c), _) => c.to_string(),
                (None, Some(e)) => format!("error: {e}"),
                (None, None) => "-".into(),
            };
            Check::new(
                format!("{name}/{}", l.resolution),
                "added cost is the affine form (a, b, t, 1) on all probes",
                Basis::Formula,
            )
            .holds(format!("= {}", l.expected), observed, l.pass)
        })
        .collect();
    if matches!(h.kind, GadgetKind::Cec | GadgetKind::Cm) {
        out.push(
            Check::new(
                format!("{name}/frame"),
                "continue leaves primary = a+b+t and secondary = 0",
                Basis::Replay,
            )
            .holds(
                "true",
                report.continue_frame.to_string(),
                report.continue_frame,
            ),
        );
    }
    out
}

/// Best immediate stop equals its closed form on sampled frames, and the
/// grid minimiser sits on the exact update.
fn identity_checks(h: &GadgetHandle) -> Vec<Check> {
    let name = label(h);
    let p = &h.params;
    let (frames, target): (Vec<EntryFrame>, Box<dyn Fn(&Rational) -> Rational>) = match h.kind {
        GadgetKind::Cec => (
            sample_frames(1),
            Box::new(|a: &Rational| p.gamma() * (int(1) - a)),
        ),
        GadgetKind::Cm => (
            sample_frames(p.k / p.beta.max(1)),
            Box::new(|a: &Rational| (p.factor() - int(1)) * a),
        ),
        _ => return Vec::new(),
    };
    let mut out = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let got = match h.kind {
            GadgetKind::Cec => cor_cec_identity(h, f),
            _ => cor_cm_identity(h, f),
        };
        let id = format!("{name}/stop#{i}");
        let claim = "worst immediate stop equals the closed form";
        out.push(match got {
            Ok((measured, closed)) => Check::new(id, claim, Basis::Formula).eq(&closed, &measured),
            Err(e) => {
                Check::new(id, claim, Basis::Formula).holds("a cost", format!("error: {e}"), false)
            }
        });
    }
    let step = ratio(1, 1000);
    for (i, f) in frames.iter().enumerate().step_by(5) {
        let best = target(&f.a);
        let center = (&best / &step).floor() * &step;
        let id = format!("{name}/argmin#{i}");
        let claim = "grid minimiser over b lies within one step of the exact update";
        out.push(match grid_argmin(h, &f.a, &center, &step, 5) {
            Ok(b) => Check::new(id, claim, Basis::Enumeration).le(&step, &(b - best).abs()),
            Err(e) => Check::new(id, claim, Basis::Enumeration).holds(
                "a minimiser",
                format!("error: {e}"),
                false,
            ),
        });
    }
    out
}

/// The CEC with β=3 at a=4/5: minimiser 9/50, best stop 61.
fn minimizer_example() -> Vec<Check> {
    let h = build_cec(&GadgetParams::cec(30, 3, 28, 31)).expect("valid CEC");
    let a = ratio(4, 5);
    let step = ratio(1, 1000);
    let b = grid_argmin(&h, &a, &ratio(9, 50), &step, 10).unwrap_or_else(|_| int(-1));
    let frame = EntryFrame {
        a,
        b: ratio(9, 50),
        e: int(0),
    };
    let cost = cor_cec_identity(&h, &frame)
        .map(|(m, _)| m)
        .unwrap_or_else(|_| int(-1));
    vec![
        Check::new(
            "cec(b=3)/minimiser",
            "optimal b at a=4/5",
            Basis::Enumeration,
        )
        .eq(&ratio(9, 50), &b),
        Check::new(
            "cec(b=3)/minimum",
            "best stop at the optimum is 61+E",
            Basis::Formula,
        )
        .eq(&int(61), &cost),
    ]
}

/// Checks on one gadget as used by both the suite and the mutation sweep.
pub(crate) fn gadget_checks(h: &GadgetHandle) -> Vec<Check> {
    let mut out = contract_checks(h, "");
    out.extend(identity_checks(h));
    out
}

pub fn suite_gadgets(opts: &SuiteOptions) -> VerificationReport {
    let mut report = VerificationReport::new("gadgets");
    let gadgets = compiled_gadgets();
    for checks in par::map(&gadgets, opts.jobs, gadget_checks) {
        report.checks.extend(checks);
    }
    report.checks.extend(minimizer_example());
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let r = suite_gadgets(&SuiteOptions::default());
        let bad: Vec<_> = r.failures().collect();
        assert!(bad.is_empty(), "{bad:#?}");
        // 5 CEC × (3 + 1 + 20 + 4), 3 CM × the same, 2 exits, 2 examples
        assert_eq!(r.checks.len(), 8 * 28 + 2 + 2);
    }

    #[test]
    fn frames_are_inside_the_unit_square() {
        for s in [1, 5] {
            for f in sample_frames(s) {
                assert!(f.a.is_positive() && f.b.is_positive() && &f.a + &f.b < int(1));
            }
        }
    }
}
