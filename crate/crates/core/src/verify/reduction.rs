use std::sync::Arc;

use super::{Basis, Check, Fixture, SuiteOptions, VerificationReport};
use crate::compiler::{compile, Layout, Variant};
use crate::machine::{Instr, TwoCounterMachine};
use crate::model::Game;
use crate::par;
use crate::rational::{self, int, ratio, Rational};
use crate::strategy::{play, Cheat, Cost, MaxSpec, MinSpec, PlayOutcome};

/// `61 + 11/(12·30^(5N))`.
pub fn halting_bound(n: u32) -> Rational {
    int(61) + ratio(11, 12) * rational::inv_pow(30, 5 * n)
}

/// Single-cheat variants of the faithful simulation over the first `steps`
/// state visits: over- and undershoots by `1/30^(5N)` and `1/30^(5N+2)`, a
/// wrong claim at every test, and an early exit at every step.
pub fn cheat_family(m: &TwoCounterMachine, n: u32, steps: usize) -> Vec<Cheat> {
    let trajectory = crate::machine::run_machine(m, steps).trajectory;
    let mut out = Vec::new();
    for (i, cfg) in trajectory.iter().enumerate().take(steps) {
        let step = i + 1;
        if cfg.state == m.halt() {
            break;
        }
        for e in [5 * n, 5 * n + 2] {
            let d = rational::inv_pow(30, e);
            out.push(Cheat::Delay {
                step,
                delta: d.clone(),
            });
            out.push(Cheat::Delay { step, delta: -d });
        }
        if matches!(m.instr(&cfg.state), Some(Instr::Test { .. })) {
            out.push(Cheat::WrongBranch { step });
        }
        out.push(Cheat::ExitAt { step });
    }
    out
}

struct Arena {
    machine: TwoCounterMachine,
    game: Game,
    layout: Arc<Layout>,
}

impl Arena {
    fn new(m: &TwoCounterMachine, variant: Variant) -> Arena {
        let c = compile(m, variant);
        Arena {
            machine: m.clone(),
            layout: Arc::new(c.anchors.layout()),
            game: c.game,
        }
    }

    fn duel(&self, min: &MinSpec, max: &MaxSpec, cap: usize) -> Result<PlayOutcome, String> {
        let mut a = min.build(&self.machine, self.layout.clone());
        let mut b = max.build(&self.machine, self.layout.clone());
        play(&self.game, self.game.initial_config(), &mut a, &mut b, cap).map_err(|e| e.to_string())
    }
}

type Pairing = (MinSpec, MaxSpec);

/// Plays every pairing; returns `(witness id, outcome)`.
fn run_all(
    arena: &Arena,
    name: &str,
    pairs: &[Pairing],
    opts: &SuiteOptions,
) -> Vec<(String, Result<PlayOutcome, String>)> {
    par::map(pairs, opts.jobs, |(min, max)| {
        (
            format!("{name}/{min}-vs-{max}"),
            arena.duel(min, max, opts.step_cap),
        )
    })
}

fn durations(results: &[(String, Result<PlayOutcome, String>)]) -> Vec<(String, Rational)> {
    results
        .iter()
        .filter_map(|(id, r)| r.as_ref().ok().map(|o| (id.clone(), o.duration.clone())))
        .collect()
}

fn fault(id: &str, claim: &str, e: &str) -> Check {
    Check::new(id, claim, Basis::Replay).witness(id).holds(
        "a completed play",
        format!("fault: {e}"),
        false,
    )
}

pub fn suite_reduction(f: &Fixture, opts: &SuiteOptions) -> VerificationReport {
    let mut report = VerificationReport::new(format!("reduction/{}", f.name));
    let arena = Arena::new(&f.machine, Variant::Value);
    match f.halts_in {
        Some(n) => {
            let n = n as u32;
            let bound = halting_bound(n);
            let mut pairs: Vec<Pairing> = vec![(MinSpec::Faithful(None), MaxSpec::Punisher(n))];
            pairs.extend(
                cheat_family(&f.machine, n, n as usize)
                    .into_iter()
                    .map(|c| (MinSpec::Cheat(c), MaxSpec::Punisher(n))),
            );
            let results = run_all(&arena, &f.name, &pairs, opts);
            for (id, r) in &results {
                let claim = "punisher Max holds Min at or above the halting bound";
                report.push(match r {
                    Ok(o) => {
                        match &o.weight {
                            Cost::Finite(w) => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .ge(&bound, w),
                            Cost::Infinite => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .holds(format!(">= {}", rational::Frac(&bound)), "INFINITE", true),
                        }
                    }
                    Err(e) => fault(id, claim, e),
                });
            }
            report.push_duration_bound(&durations(&results));
        }
        None => {
            let mut pairs: Vec<Pairing> = Vec::new();
            for n in 1..=3 {
                let min = MinSpec::Faithful(Some(n));
                pairs.push((min.clone(), MaxSpec::Punisher(n)));
                pairs.push((min.clone(), MaxSpec::Honest));
                for seed in 0..opts.random_samples {
                    pairs.push((min.clone(), MaxSpec::Random(seed)));
                }
            }
            let results = run_all(&arena, &f.name, &pairs, opts);
            for ((id, r), (min, _)) in results.iter().zip(&pairs) {
                let MinSpec::Faithful(Some(n)) = min else {
                    continue;
                };
                let bound = int(61) + rational::inv_pow(30, *n);
                let claim = "faithful Min with a threshold secures at most 61+1/30^N";
                report.push(match r {
                    Ok(o) => {
                        match &o.weight {
                            Cost::Finite(w) => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .le(&bound, w),
                            Cost::Infinite => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .holds(format!("<= {}", rational::Frac(&bound)), "INFINITE", false),
                        }
                    }
                    Err(e) => fault(id, claim, e),
                });
            }
            report.push_duration_bound(&durations(&results));
        }
    }
    report
}

pub fn suite_existence(f: &Fixture, opts: &SuiteOptions) -> VerificationReport {
    let mut report = VerificationReport::new(format!("existence/{}", f.name));
    let arena = Arena::new(&f.machine, Variant::Existence);
    let results;
    match f.halts_in {
        Some(n) => {
            let pairs = vec![
                (MinSpec::Faithful(None), MaxSpec::Punisher(n as u32)),
                (MinSpec::Faithful(None), MaxSpec::Honest),
            ];
            results = run_all(&arena, &f.name, &pairs, opts);
            for (id, r) in &results {
                let claim = "faithful Min reaches the soft exit at exactly 61";
                report.push(match r {
                    Ok(o) => match &o.weight {
                        Cost::Finite(w) => Check::new(id, claim, Basis::Replay)
                            .witness(id)
                            .eq(&int(61), w),
                        Cost::Infinite => Check::new(id, claim, Basis::Replay)
                            .witness(id)
                            .holds("= 61", "INFINITE", false),
                    },
                    Err(e) => fault(id, claim, e),
                });
            }
        }
        None => {
            let mut pairs = vec![(MinSpec::Faithful(None), MaxSpec::Strict)];
            pairs.extend(
                cheat_family(&f.machine, 2, 3)
                    .into_iter()
                    .map(|c| (MinSpec::Cheat(c), MaxSpec::Strict)),
            );
            results = run_all(&arena, &f.name, &pairs, opts);
            for (id, r) in &results {
                let claim = "on a non-halting machine Min never ends at 61 or below";
                report.push(match r {
                    Ok(o) => {
                        match &o.weight {
                            Cost::Finite(w) => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .gt(&int(61), w),
                            Cost::Infinite => Check::new(id, claim, Basis::Replay)
                                .witness(id)
                                .holds("> 61 or INFINITE", "INFINITE", true),
                        }
                    }
                    Err(e) => fault(id, claim, e),
                });
            }
        }
    }
    report.push_duration_bound(&durations(&results));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::fixture;

    #[test]
    fn family_covers_every_deviation_kind() {
        let f = fixture("inc-test-dec-halt").unwrap();
        let fam = cheat_family(&f.machine, 3, 3);
        assert_eq!(fam.len(), 3 * 5 + 2);
        assert!(fam.contains(&Cheat::WrongBranch { step: 2 }));
    }

    #[test]
    fn halting_fixtures_pass() {
        for name in ["inc-halt", "inc-inc-halt", "inc-test-dec-halt"] {
            let f = fixture(name).unwrap();
            let r = suite_reduction(&f, &SuiteOptions::default());
            let bad: Vec<_> = r.failures().collect();
            assert!(bad.is_empty(), "{bad:#?}");
            let r = suite_existence(&f, &SuiteOptions::default());
            let bad: Vec<_> = r.failures().collect();
            assert!(bad.is_empty(), "{bad:#?}");
        }
    }

    #[test]
    fn loop_passes() {
        let f = fixture("loop").unwrap();
        let opts = SuiteOptions {
            random_samples: 5,
            step_cap: 200,
            ..SuiteOptions::default()
        };
        for r in [suite_reduction(&f, &opts), suite_existence(&f, &opts)] {
            let bad: Vec<_> = r.failures().collect();
            assert!(bad.is_empty(), "{bad:#?}");
        }
    }
}
