//! Shared verdict, flag and witness types for the machine-readable reports.

use serde::Serialize;

/// Outcome of one checked law over an exhaustive or sampled scan.
///
/// A failing verdict always carries at least one witness; the witness list is
/// capped (deterministically, in scan order) so reports stay bounded even
/// when a law fails almost everywhere.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub checked: u64,
    pub violations: u64,
    pub witnesses: Vec<Witness>,
}

impl Verdict {
    pub fn passing(checked: u64) -> Self {
        Verdict {
            pass: true,
            checked,
            violations: 0,
            witnesses: Vec::new(),
        }
    }
}

/// A replayable counterexample: sets are comma-joined sorted element labels
/// (the empty set is the empty string), `lhs`/`rhs` are the two sides of the
/// violated inequality at the point `(x, y)`.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub e: String,
    pub f: String,
    pub x: f64,
    pub y: f64,
    pub lhs: f64,
    pub rhs: f64,
}

/// A sampled yes/no flag with an optional counterexample point.
#[derive(Debug, Clone, Serialize)]
pub struct Flag {
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<PointWitness>,
}

impl Flag {
    pub fn pass() -> Self {
        Flag {
            pass: true,
            witness: None,
        }
    }

    pub fn fail(witness: PointWitness) -> Self {
        Flag {
            pass: false,
            witness: Some(witness),
        }
    }
}

/// A counterexample on the unit square (or cube, when `z` is present):
/// `got` violated `bound` at the listed point.
#[derive(Debug, Clone, Serialize)]
pub struct PointWitness {
    pub x: f64,
    pub y: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y2: Option<f64>,
    pub got: f64,
    pub bound: f64,
}

impl PointWitness {
    pub fn pair(x: f64, y: f64, got: f64, bound: f64) -> Self {
        PointWitness {
            x,
            y,
            z: None,
            x2: None,
            y2: None,
            got,
            bound,
        }
    }

    pub fn triple(x: f64, y: f64, z: f64, got: f64, bound: f64) -> Self {
        PointWitness {
            x,
            y,
            z: Some(z),
            x2: None,
            y2: None,
            got,
            bound,
        }
    }

    pub fn rectangle(x: f64, y: f64, x2: f64, y2: f64, got: f64, bound: f64) -> Self {
        PointWitness {
            x,
            y,
            z: None,
            x2: Some(x2),
            y2: Some(y2),
            got,
            bound,
        }
    }
}

/// How sampled values beyond the grid are to be read in any report: the last
/// sampled value is repeated and never certified as reaching 1.
pub const TAIL_POLICY: &str = "tail reports last sampled value; limit at infinity unverified";
