use serde::Serialize;

use super::control::{control_checks, controls};
use super::gadgets::{compiled_gadgets, gadget_checks, label};
use super::SuiteOptions;
use crate::gadgets::{GadgetHandle, GadgetKind};
use crate::par;

/// Result of re-running a gadget's checks with one weight raised by 1.
#[derive(Debug, Clone, Serialize)]
pub struct MutantOutcome {
    pub gadget: String,
    pub mutant: String,
    pub checks: usize,
    pub failed: usize,
}

impl MutantOutcome {
    pub fn detected(&self) -> bool {
        self.failed > 0
    }
}

pub(crate) fn checks_for(h: &GadgetHandle) -> Vec<super::Check> {
    match h.kind {
        GadgetKind::Cz | GadgetKind::Cnz => control_checks(h, &mut Vec::new()),
        _ => gadget_checks(h),
    }
}

/// Every single-weight mutant of every gadget the suites cover. Locations
/// where no time can pass are skipped: their weight never reaches a cost.
pub fn mutation_sweep(opts: &SuiteOptions) -> Vec<MutantOutcome> {
    let mut mutants = Vec::new();
    for h in compiled_gadgets().into_iter().chain(controls()) {
        let name = label(&h);
        for (what, m) in h.weight_mutants() {
            mutants.push((name.clone(), what, m));
        }
    }
    par::map(&mutants, opts.jobs, |(gadget, what, m)| {
        let checks = checks_for(m);
        MutantOutcome {
            gadget: gadget.clone(),
            mutant: what.clone(),
            checks: checks.len(),
            failed: checks.iter().filter(|c| !c.pass).count(),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadgets::{build_cec, GadgetParams};

    #[test]
    fn every_cec_mutant_is_caught() {
        let h = build_cec(&GadgetParams::cec(30, 3, 28, 31)).unwrap();
        for (what, m) in h.weight_mutants() {
            assert!(checks_for(&m).iter().any(|c| !c.pass), "{what}");
        }
    }

    #[test]
    fn every_mutant_is_caught() {
        let out = mutation_sweep(&SuiteOptions {
            jobs: 0,
            ..SuiteOptions::default()
        });
        let missed: Vec<_> = out
            .iter()
            .filter(|m| !m.detected())
            .map(|m| format!("{} {}", m.gadget, m.mutant))
            .collect();
        assert!(
            missed.is_empty(),
            "{} of {} missed: {missed:#?}",
            missed.len(),
            out.len()
        );
    }
}
