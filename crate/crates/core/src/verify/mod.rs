//! Expansion, generalized expansion and RIP-1 oracles, plus the sign-vector
//! and norm-gap inequalities they rest on.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

mod expansion;
mod rip;
mod sign;

pub use expansion::{expansion_check, generalized_expander_slack, row_max_sum, ExpansionReport, GeneralizedSlack};
pub use rip::{rip1_exact, rip1_interval, rip1_monte_carlo, RipReport};
pub use sign::{norm_gap_check, row_norm_bound, sign_vector};

/// How exhaustively a property is checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::MonteCarlo { samples, seed } => write!(f, "monte-carlo(samples={samples};seed={seed})"),
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        if s == "exact" {
            return Ok(Mode::Exact);
        }
        let bad = || Error::Parse(format!("bad mode {s:?}"));
        let inner = s.strip_prefix("monte-carlo(").and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let (mut samples, mut seed) = (None, None);
        for kv in inner.split(';') {
            match kv.split_once('=') {
                Some(("samples", v)) => samples = v.parse().ok(),
                Some(("seed", v)) => seed = v.parse().ok(),
                _ => return Err(bad()),
            }
        }
        Ok(Mode::MonteCarlo { samples: samples.ok_or_else(bad)?, seed: seed.ok_or_else(bad)? })
    }
}
