//! Three-valued check outcomes with certificates.
//!
//! Every bounded check answers `holds`, `fails` or `unknown`. The first two
//! carry a finite, independently checkable certificate; `unknown` carries the
//! exhausted budget.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Holds,
    Fails,
    Unknown,
}

/// Budget report attached to an `unknown` verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Exhausted {
    pub budget: u64,
    pub note: String,
}

impl Exhausted {
    pub fn new(budget: u64, note: impl Into<String>) -> Self {
        Exhausted { budget, note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict<H, F> {
    Holds(H),
    Fails(F),
    Unknown(Exhausted),
}

impl<H, F> Verdict<H, F> {
    pub fn status(&self) -> Status {
        match self {
            Verdict::Holds(_) => Status::Holds,
            Verdict::Fails(_) => Status::Fails,
            Verdict::Unknown(_) => Status::Unknown,
        }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_unknown(&self) -> bool {
        matches!(self, Verdict::Unknown(_))
    }

    pub fn holds(&self) -> Option<&H> {
        match self {
            Verdict::Holds(h) => Some(h),
            _ => None,
        }
    }

    pub fn fails(&self) -> Option<&F> {
        match self {
            Verdict::Fails(f) => Some(f),
            _ => None,
        }
    }
}
