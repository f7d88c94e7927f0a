use std::fs;
use std::path::{Path, PathBuf};

use crate::machine::{parse_machine, run_machine, MachineError, TwoCounterMachine};

/// Overrides the directory fixtures are read from.
pub const FIXTURES_ENV: &str = "WTG_FIXTURES";

const BUNDLED: [(&str, &str); 5] = [
    ("inc-halt", include_str!("../../fixtures/inc-halt.tcm")),
    (
        "inc-inc-halt",
        include_str!("../../fixtures/inc-inc-halt.tcm"),
    ),
    (
        "inc-test-dec-halt",
        include_str!("../../fixtures/inc-test-dec-halt.tcm"),
    ),
    ("loop", include_str!("../../fixtures/loop.tcm")),
    ("clear-c", include_str!("../../fixtures/clear-c.tcm")),
];

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("no fixture named {0}")]
    Unknown(String),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{name}: {source}")]
    Parse { name: String, source: MachineError },
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub machine: TwoCounterMachine,
    /// Steps to halt, if it halts within the cap.
    pub halts_in: Option<usize>,
}

impl Fixture {
    fn parse(name: &str, text: &str, cap: usize) -> Result<Fixture, FixtureError> {
        let machine = parse_machine(text).map_err(|source| FixtureError::Parse {
            name: name.into(),
            source,
        })?;
        let halts_in = run_machine(&machine, cap).halts();
        Ok(Fixture {
            name: name.into(),
            machine,
            halts_in,
        })
    }
}

pub fn fixture_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|(n, _)| *n).collect()
}

/// A bundled fixture by name.
pub fn fixture(name: &str) -> Result<Fixture, FixtureError> {
    let (_, text) = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| FixtureError::Unknown(name.into()))?;
    Fixture::parse(name, text, 1000)
}

/// Every `*.tcm` in `dir`, or in `$WTG_FIXTURES`, or the bundled set, in
/// name order.
pub fn load_fixtures(dir: Option<&Path>) -> Result<Vec<Fixture>, FixtureError> {
    let dir = dir
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(FIXTURES_ENV).map(PathBuf::from));
    let Some(dir) = dir else {
        return fixture_names().into_iter().map(fixture).collect();
    };
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| FixtureError::Io { path, source }
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(io(&dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "tcm"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io(p))?;
            let name = p.file_stem().unwrap_or_default().to_string_lossy();
            Fixture::parse(&name, &text, 1000)
        })
        .collect()
}
