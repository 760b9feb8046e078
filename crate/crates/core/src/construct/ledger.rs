use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{self, compare, Expr, Q};
use crate::observable::{parse_amplitude, Amplitude};
use crate::walk::{Tail, TailEstimate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Faithful,
    Toy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Relation {
    pub fn accepts(self, ord: Ordering) -> bool {
        match self {
            Relation::Lt => ord == Ordering::Less,
            Relation::Le => ord != Ordering::Greater,
            Relation::Gt => ord == Ordering::Greater,
            Relation::Ge => ord != Ordering::Less,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        })
    }
}

/// Decides `lhs rel rhs` exactly. `None` only if two multi-term sums cannot
/// be separated at the maximal working precision.
pub fn decide(lhs: &Expr, rel: Relation, rhs: &Expr) -> Option<bool> {
    compare(lhs, rhs).map(|o| rel.accepts(o))
}

/// One recorded inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub name: String,
    pub lhs: Expr,
    pub relation: Relation,
    pub rhs: Expr,
    /// Enforced lines must hold; diagnostic lines are recorded with their
    /// status and may fail.
    pub enforced: bool,
    pub holds: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Line {
    pub fn new(name: impl Into<String>, lhs: Expr, relation: Relation, rhs: Expr, enforced: bool) -> Result<Line> {
        let name = name.into();
        let holds = decide(&lhs, relation, &rhs)
            .ok_or_else(|| Error::PrecisionBudget(format!("cannot decide line {name}")))?;
        Ok(Line {
            name,
            lhs,
            relation,
            rhs,
            enforced,
            holds,
            note: None,
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Line {
        self.note = Some(note.into());
        self
    }

    pub fn summary(&self) -> String {
        format!(
            "{} {} {} {} ({:.6e} vs {:.6e})",
            self.name,
            if self.holds { "holds" } else { "fails" },
            self.relation,
            if self.enforced { "[enforced]" } else { "[diagnostic]" },
            self.lhs.to_f64(),
            self.rhs.to_f64()
        )
    }
}

/// Per-level raw data. Every line is a function of these records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub k: usize,
    #[serde(with = "exact::serde_bigint")]
    pub p: BigInt,
    #[serde(with = "exact::serde_bigint")]
    pub q: BigInt,
    #[serde(with = "amp_str")]
    pub amplitude: Amplitude,
    #[serde(with = "exact::serde_bigint")]
    pub n: BigInt,
    /// Closeness radius `1 / (12 q N)` (first theorem).
    #[serde(default, with = "exact::serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub delta: Option<Q>,
    /// Certified `|alpha - p/q|` bound (second and third theorems).
    #[serde(default, with = "exact::serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub gap: Option<Q>,
    /// Approximation exponent used at this level (third theorem).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<u32>,
}

impl Level {
    pub fn alpha(&self) -> Q {
        Q::new(self.p.clone(), self.q.clone())
    }
}

mod amp_str {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(a: &Amplitude, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&a.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Amplitude, D::Error> {
        let s = String::deserialize(d)?;
        parse_amplitude(&s).map_err(serde::de::Error::custom)
    }
}

/// Which part of the observable an evidence slot simulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terms {
    All,
    Level(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EvidenceStatus {
    Pending,
    Filled {
        estimate: TailEstimate,
        /// Whether the 99% interval is on the claimed side of the bound.
        supports: bool,
    },
    Infeasible {
        reason: String,
    },
}

/// A probabilistic claim attached to the ledger, to be checked by seeded
/// simulation. The builder only creates the slot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceSlot {
    pub name: String,
    pub level: usize,
    pub terms: Terms,
    #[serde(with = "exact::serde_bigint")]
    pub steps: BigInt,
    pub threshold: Expr,
    pub tail: Tail,
    /// Claimed relation of the probability to `bound`.
    pub relation: Relation,
    #[serde(with = "exact::serde_q")]
    pub bound: Q,
    pub status: EvidenceStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionLedger {
    pub theorem: u8,
    pub mode: Mode,
    #[serde(with = "exact::serde_q")]
    pub s: Q,
    #[serde(default, with = "exact::serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Q>,
    #[serde(default, with = "exact::serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub c: Option<Q>,
    /// Amplitude schedule ratio for toy first-theorem builds (`a_k = ratio^k`).
    #[serde(default, with = "exact::serde_opt_q", skip_serializing_if = "Option::is_none")]
    pub toy_ratio: Option<Q>,
    pub levels: Vec<Level>,
    /// The next approximant `alpha_{K+1}` (first theorem): the final angle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub next: Option<Level>,
    pub lines: Vec<Line>,
    pub evidence: Vec<EvidenceSlot>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConstructionLedger {
    pub fn line(&self, name: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.name == name)
    }

    pub fn enforced_ok(&self) -> bool {
        self.lines.iter().all(|l| !l.enforced || l.holds)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}
