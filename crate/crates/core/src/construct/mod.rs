//! Certified constructions of angles and observables whose normalised
//! Birkhoff sums along the walk have heavy upper tails.
//!
//! Every builder returns a [`ConstructionLedger`] of exact inequalities plus
//! empty evidence slots for the probabilistic steps; [`verify_ledger`]
//! recomputes the lines from the level data alone, and [`fill_evidence`]
//! runs the seeded simulations.

pub mod evidence;
pub mod ledger;
pub mod lemma;
pub mod theorem1;
pub mod theorem2;
pub mod verify;

use num_bigint::BigInt;

pub use evidence::{fill_evidence, EvidenceConfig};
pub use ledger::{ConstructionLedger, EvidenceSlot, EvidenceStatus, Level, Line, Mode, Relation, Terms};
pub use lemma::{lemma1_check, lemma1_delta, lemma3_params, odd_in_ball, Lemma1Certificate, Lemma3Params};
pub use theorem1::{theorem1_build, Theorem1Config};
pub use theorem2::{theorem2_build, theorem3_build, Theorem2Config, Theorem3Config};
pub use verify::{verify_ledger, Check, VerifyReport};

use crate::diophantine::Angle;
use crate::exact::{qint, Expr, Q};
use crate::observable::CosineSeries;

/// A built ledger together with the objects it certifies.
#[derive(Clone, Debug)]
pub struct Construction {
    pub ledger: ConstructionLedger,
    pub series: CosineSeries,
    pub angle: Angle,
}

/// `n^e` as an exact expression.
pub(crate) fn npow(n: &BigInt, e: &Q) -> Expr {
    Expr::pow(qint(n.clone()), e.clone())
}
