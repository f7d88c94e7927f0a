//! Strategy choices by name, as used on the command line and in reports.

use std::fmt;
use std::str::FromStr;

use super::{
    cheating_min, faithful_min, honest_max, punisher_max, random_max, strict_punisher_max, Cheat,
    SharedLayout, Strategy,
};
use crate::machine::TwoCounterMachine;
use crate::rational::{self, Frac};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MinSpec {
    /// Faithful simulation, giving up below `1/30^N` when a threshold is set.
    Faithful(Option<u32>),
    Cheat(Cheat),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MaxSpec {
    Honest,
    /// Accepts updates within `1/30^(5N+1)`.
    Punisher(u32),
    /// Accepts exact updates only.
    Strict,
    Random(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad strategy `{0}`")]
pub struct SpecError(pub String);

impl MinSpec {
    pub fn build(&self, m: &TwoCounterMachine, layout: SharedLayout) -> Box<dyn Strategy> {
        match self {
            MinSpec::Faithful(n) => Box::new(faithful_min(m, *n, layout)),
            MinSpec::Cheat(c) => Box::new(cheating_min(m, vec![c.clone()], layout)),
        }
    }
}

impl MaxSpec {
    pub fn build(&self, m: &TwoCounterMachine, layout: SharedLayout) -> Box<dyn Strategy> {
        match self {
            MaxSpec::Honest => Box::new(honest_max(layout)),
            MaxSpec::Punisher(n) => Box::new(punisher_max(m, *n, layout)),
            MaxSpec::Strict => Box::new(strict_punisher_max(m, layout)),
            MaxSpec::Random(seed) => Box::new(random_max(*seed, layout)),
        }
    }
}

impl fmt::Display for Cheat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cheat::Delay { step, delta } => write!(f, "delay:{step}:{}", Frac(delta)),
            Cheat::WrongBranch { step } => write!(f, "wrong:{step}"),
            Cheat::ExitAt { step } => write!(f, "exit:{step}"),
        }
    }
}

impl FromStr for Cheat {
    type Err = SpecError;

    /// `delay:<step>:<p/q>`, `wrong:<step>` or `exit:<step>`.
    fn from_str(s: &str) -> Result<Self, SpecError> {
        let bad = || SpecError(s.into());
        let parts: Vec<&str> = s.split(':').collect();
        let step = |i: usize| {
            parts
                .get(i)
                .and_then(|p| p.parse::<usize>().ok())
                .filter(|&p| p >= 1)
                .ok_or_else(bad)
        };
        match parts.first().copied() {
            Some("delay") if parts.len() == 3 => Ok(Cheat::Delay {
                step: step(1)?,
                delta: rational::parse(parts[2]).map_err(|_| bad())?,
            }),
            Some("wrong") if parts.len() == 2 => Ok(Cheat::WrongBranch { step: step(1)? }),
            Some("exit") if parts.len() == 2 => Ok(Cheat::ExitAt { step: step(1)? }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MinSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MinSpec::Faithful(None) => f.write_str("faithful"),
            MinSpec::Faithful(Some(n)) => write!(f, "faithful:{n}"),
            MinSpec::Cheat(c) => write!(f, "cheat:{c}"),
        }
    }
}

impl FromStr for MinSpec {
    type Err = SpecError;

    /// `faithful`, `faithful:<N>` or `cheat:<cheat>`.
    fn from_str(s: &str) -> Result<Self, SpecError> {
        if s == "faithful" {
            return Ok(MinSpec::Faithful(None));
        }
        if let Some(n) = s.strip_prefix("faithful:") {
            return n
                .parse()
                .map(|n| MinSpec::Faithful(Some(n)))
                .map_err(|_| SpecError(s.into()));
        }
        match s.strip_prefix("cheat:") {
            Some(c) => c.parse().map(MinSpec::Cheat),
            None => Err(SpecError(s.into())),
        }
    }
}

impl fmt::Display for MaxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MaxSpec::Honest => f.write_str("honest"),
            MaxSpec::Punisher(n) => write!(f, "punisher:{n}"),
            MaxSpec::Strict => f.write_str("strict"),
            MaxSpec::Random(s) => write!(f, "random:{s}"),
        }
    }
}

impl MaxSpec {
    /// Like [`FromStr`], with a bare `punisher` taking `default_n`.
    pub fn parse_with(s: &str, default_n: u32) -> Result<Self, SpecError> {
        let bad = || SpecError(s.into());
        match s {
            "honest" => Ok(MaxSpec::Honest),
            "punisher" => Ok(MaxSpec::Punisher(default_n)),
            "strict" => Ok(MaxSpec::Strict),
            _ => {
                if let Some(n) = s.strip_prefix("punisher:") {
                    n.parse().map(MaxSpec::Punisher).map_err(|_| bad())
                } else if let Some(seed) = s.strip_prefix("random:") {
                    seed.parse().map(MaxSpec::Random).map_err(|_| bad())
                } else {
                    Err(bad())
                }
            }
        }
    }
}

impl FromStr for MaxSpec {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, SpecError> {
        MaxSpec::parse_with(s, 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in [
            "faithful",
            "faithful:3",
            "cheat:delay:2:-1/900",
            "cheat:wrong:1",
            "cheat:exit:4",
        ] {
            assert_eq!(s.parse::<MinSpec>().unwrap().to_string(), s);
        }
        for s in ["honest", "punisher:2", "strict", "random:7"] {
            assert_eq!(s.parse::<MaxSpec>().unwrap().to_string(), s);
        }
        assert_eq!(
            MaxSpec::parse_with("punisher", 5).unwrap(),
            MaxSpec::Punisher(5)
        );
    }

    #[test]
    fn bad_names_are_rejected() {
        for s in ["", "cheat:", "cheat:exit:0", "cheat:delay:1", "faithful:x"] {
            assert!(s.parse::<MinSpec>().is_err(), "{s}");
        }
        assert!("random:".parse::<MaxSpec>().is_err());
    }
}
