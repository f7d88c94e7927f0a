use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wtg_core::compiler::{compile, structural_audit, Sidecar, Variant};
use wtg_core::gadgets::{GadgetFile, GadgetHandle};
use wtg_core::machine::{parse_machine, TwoCounterMachine};
use wtg_core::model::{self, Configuration, Game, Valuation};
use wtg_core::rational::{self, Frac, Rational};
use wtg_core::strategy::{
    grid_minimax, play, render_trace, trace_json, GridError, MaxSpec, MinSpec, PlayStatus,
};
use wtg_core::verify::{
    check_gadget, load_fixtures, mutation_sweep, suite_cz_cnz, suite_existence, suite_gadgets,
    suite_reduction, Basis, Check, SuiteOptions, VerificationReport,
};

#[derive(Parser)]
#[command(
    name = "wtg",
    version,
    about = "Two-counter machines as two-clock weighted timed games"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compile a machine file (or a fixture name) into a game file.
    Compile {
        machine: String,
        #[arg(long, value_enum, default_value = "value")]
        variant: Variant,
        #[arg(short, long, default_value = "game.json")]
        output: PathBuf,
    },
    /// Play two strategies on a compiled game.
    Simulate {
        game: PathBuf,
        /// Sidecar written by `compile`; defaults to `<game>.anchors.json`.
        #[arg(long)]
        anchors: Option<PathBuf>,
        /// faithful, faithful:<N>, cheat:delay:<p>:<q>, cheat:wrong:<p>, cheat:exit:<p>
        #[arg(long, default_value = "faithful")]
        min: String,
        /// honest, punisher, punisher:<N>, strict, random:<seed>
        #[arg(long, default_value = "honest")]
        max: String,
        #[arg(short = 'N', long = "n", default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 10_000)]
        cap: usize,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        decimal: bool,
    },
    /// Run verification suites.
    Verify {
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Check one gadget file instead of the suites.
        #[arg(long)]
        gadget: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// 1 is sequential, 0 uses every core.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 600)]
        cap: usize,
    },
    /// Minimax value of a small game with delays restricted to a grid.
    GridValue {
        game: PathBuf,
        /// Delays are multiples of 1/D.
        #[arg(long = "d", default_value_t = 2)]
        d: u32,
        /// Largest delay.
        #[arg(long = "h", default_value_t = 1)]
        h: u32,
        /// Moves before the play counts as never ending.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Node budget.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Start valuation, e.g. `x=1/2,y=0`; clocks left out start at 0.
        #[arg(long)]
        at: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Gadgets,
    Cz,
    Reduction,
    Existence,
    Mutation,
    All,
}

/// Exit statuses.
const FAULT: u8 = 1;
const PARSE: u8 = 2;
const FAILED: u8 = 3;
const RESOURCE: u8 = 4;

struct Failure(u8, String);

impl Failure {
    fn fault(msg: impl ToString) -> Self {
        Failure(FAULT, msg.to_string())
    }

    fn parse(msg: impl ToString) -> Self {
        Failure(PARSE, msg.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Compile {
            machine,
            variant,
            output,
        } => cmd_compile(&machine, variant, &output),
        Cmd::Simulate {
            game,
            anchors,
            min,
            max,
            n,
            cap,
            trace,
            decimal,
        } => cmd_simulate(
            &game,
            anchors.as_deref(),
            &min,
            &max,
            n,
            cap,
            trace.as_deref(),
            decimal,
        ),
        Cmd::Verify {
            suite,
            fixtures,
            gadget,
            report,
            jobs,
            cap,
        } => cmd_verify(
            suite,
            fixtures.as_deref(),
            gadget.as_deref(),
            report.as_deref(),
            jobs,
            cap,
        ),
        Cmd::GridValue {
            game,
            d,
            h,
            depth,
            cap,
            at,
        } => cmd_grid_value(&game, d, h, depth, cap, at.as_deref()),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::fault(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::fault(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

fn sidecar_path(game: &Path) -> PathBuf {
    game.with_extension("anchors.json")
}

/// A path, or else the name of a fixture.
fn load_machine(spec: &str) -> Result<TwoCounterMachine, Failure> {
    let path = Path::new(spec);
    if path.exists() {
        return parse_machine(&read(path)?).map_err(|e| Failure::parse(format!("{spec}: {e}")));
    }
    let fixtures = load_fixtures(None).map_err(Failure::fault)?;
    fixtures
        .into_iter()
        .find(|f| f.name == spec)
        .map(|f| f.machine)
        .ok_or_else(|| Failure::fault(format!("{spec}: no such file or fixture")))
}

fn cmd_compile(machine: &str, variant: Variant, output: &Path) -> Outcome {
    let m = load_machine(machine)?;
    let result = compile(&m, variant);
    let audit = structural_audit(&result);
    if !audit.is_ok() {
        return Err(Failure::fault(format!(
            "structural audit failed:\n  {}",
            audit.violations.join("\n  ")
        )));
    }
    write(output, &(model::serialize(&result.game) + "\n"))?;
    let sidecar = Sidecar {
        machine: m,
        anchors: result.anchors.clone(),
    };
    write(&sidecar_path(output), &to_json(&sidecar))?;
    println!(
        "{} locations, {} transitions, {} gadgets -> {}",
        result.game.locations().len(),
        result.game.transitions().len(),
        result.anchors.modules.len(),
        output.display()
    );
    Ok(())
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    model::deserialize(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

/// The module or state where Max ended the simulation, if it did.
fn punished_at(sidecar: &Sidecar, run: &model::Run) -> Option<String> {
    let mut found = None;
    for s in &run.steps {
        let t = &s.mv.transition;
        for m in &sidecar.anchors.modules {
            if m.ports.get("upper") == Some(t) || m.ports.get("lower") == Some(t) {
                found = Some(format!("stopped in {}", m.id));
            }
        }
        for (q, st) in &sidecar.anchors.state_map {
            if st
                .ports
                .iter()
                .any(|(k, v)| k.starts_with("divert") && v == t)
            {
                found = Some(format!("diverted at {q} into a control"));
            }
        }
    }
    found
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    game_path: &Path,
    anchors: Option<&Path>,
    min: &str,
    max: &str,
    n: u32,
    cap: usize,
    trace: Option<&Path>,
    decimal: bool,
) -> Outcome {
    let game = load_game(game_path)?;
    let side_path = anchors
        .map(Path::to_path_buf)
        .unwrap_or_else(|| sidecar_path(game_path));
    let sidecar: Sidecar = serde_json::from_str(&read(&side_path)?)
        .map_err(|e| Failure::parse(format!("{}: {e}", side_path.display())))?;
    let min_spec: MinSpec = min.parse().map_err(Failure::parse)?;
    let max_spec = MaxSpec::parse_with(max, n).map_err(Failure::parse)?;
    let layout = Arc::new(sidecar.anchors.layout());
    let mut a = min_spec.build(&sidecar.machine, layout.clone());
    let mut b = max_spec.build(&sidecar.machine, layout);
    let out = play(&game, game.initial_config(), &mut a, &mut b, cap).map_err(Failure::fault)?;
    if let Some(p) = trace {
        write(
            p,
            &to_json(&trace_json(
                &out,
                &min_spec.to_string(),
                &max_spec.to_string(),
            )),
        )?;
    } else if decimal {
        for line in render_trace(&out.trace, true) {
            println!("{line}");
        }
    }
    let status = match out.status {
        PlayStatus::Goal => "GOAL",
        PlayStatus::StepCap => "STEP_CAP",
    };
    println!("status {status}");
    println!("cost {}", out.weight);
    if decimal {
        if let Some(w) = out.weight.finite() {
            println!("cost ~ {} (approximate)", rational::to_decimal(w, 12));
        }
    }
    println!("duration {}", Frac(&out.duration));
    if let Some(p) = punished_at(&sidecar, &out.trace) {
        println!("{p}");
    }
    Ok(())
}

fn cmd_verify(
    suite: Suite,
    fixtures: Option<&Path>,
    gadget: Option<&Path>,
    report_path: Option<&Path>,
    jobs: usize,
    cap: usize,
) -> Outcome {
    let opts = SuiteOptions {
        jobs,
        step_cap: cap,
        ..SuiteOptions::default()
    };
    let mut reports: Vec<VerificationReport> = Vec::new();
    if let Some(g) = gadget {
        let file: GadgetFile = serde_json::from_str(&read(g)?)
            .map_err(|e| Failure::parse(format!("{}: {e}", g.display())))?;
        let h = GadgetHandle::from_file(&file).map_err(Failure::fault)?;
        reports.push(check_gadget(&h));
    } else {
        let want = |s: Suite| suite == s || suite == Suite::All;
        if want(Suite::Gadgets) {
            reports.push(suite_gadgets(&opts));
        }
        if want(Suite::Cz) {
            reports.push(suite_cz_cnz(&opts));
        }
        if want(Suite::Reduction) || want(Suite::Existence) {
            let fixtures = load_fixtures(fixtures).map_err(Failure::parse)?;
            for f in &fixtures {
                if want(Suite::Reduction) {
                    reports.push(suite_reduction(f, &opts));
                }
                if want(Suite::Existence) {
                    reports.push(suite_existence(f, &opts));
                }
            }
        }
        if want(Suite::Mutation) {
            let mut r = VerificationReport::new("mutation");
            for m in mutation_sweep(&opts) {
                r.push(
                    Check::new(
                        format!("{}/{}", m.gadget, m.mutant),
                        "raising this weight by 1 breaks some check",
                        Basis::Replay,
                    )
                    .holds(
                        ">= 1 failing check",
                        format!("{} of {}", m.failed, m.checks),
                        m.detected(),
                    ),
                );
            }
            reports.push(r);
        }
    }
    for r in &reports {
        print!("{}", r.render());
    }
    let pass = reports.iter().all(VerificationReport::pass);
    let total: usize = reports.iter().map(|r| r.checks.len()).sum();
    let failed: usize = reports.iter().map(|r| r.failures().count()).sum();
    println!(
        "{} checks, {failed} failed: {}",
        total,
        if pass { "PASS" } else { "FAIL" }
    );
    if let Some(p) = report_path {
        write(p, &to_json(&reports))?;
    }
    if pass {
        Ok(())
    } else {
        Err(Failure(FAILED, format!("{failed} checks failed")))
    }
}

fn parse_valuation(game: &Game, at: Option<&str>) -> Result<Valuation, Failure> {
    let mut pairs: Vec<(String, Rational)> = game
        .clocks()
        .iter()
        .map(|c| (c.clone(), rational::zero()))
        .collect();
    for item in at.unwrap_or("").split(',').filter(|s| !s.trim().is_empty()) {
        let (c, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::parse(format!("bad clock value `{item}`")))?;
        let v = rational::parse(v.trim()).map_err(Failure::parse)?;
        match pairs.iter_mut().find(|(k, _)| k == c.trim()) {
            Some(slot) => slot.1 = v,
            None => return Err(Failure::parse(format!("unknown clock `{}`", c.trim()))),
        }
    }
    Ok(Valuation::from_pairs(pairs))
}

fn cmd_grid_value(
    path: &Path,
    d: u32,
    h: u32,
    depth: usize,
    cap: usize,
    at: Option<&str>,
) -> Outcome {
    let game = load_game(path)?;
    let start = Configuration::new(game.initial(), parse_valuation(&game, at)?);
    println!("restricted game: delays in multiples of 1/{d} up to {h}, at most {depth} moves; not the true value");
    match grid_minimax(&game, &start, d, h, depth, cap) {
        Ok(v) => {
            println!("{}", v.value);
            Ok(())
        }
        Err(e @ GridError::ResourceExceeded(_)) => Err(Failure(RESOURCE, e.to_string())),
        Err(e) => Err(Failure::fault(e)),
    }
}
