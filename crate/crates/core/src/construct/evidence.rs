//! Seeded simulations for the probabilistic steps of a ledger.

use num_traits::ToPrimitive;

use super::ledger::{ConstructionLedger, EvidenceStatus, Relation, Terms};
use crate::diophantine::Angle;
use crate::error::{Error, Result};
use crate::exact::to_f64;
use crate::observable::CosineSeries;
use crate::walk::{mc_tail_with, WalkConfig};

#[derive(Clone, Debug)]
pub struct EvidenceConfig {
    pub trials: u64,
    pub seed: u64,
    /// Slots with a longer horizon are marked infeasible.
    pub max_steps: u64,
    /// Only slots whose name starts with this prefix are filled.
    pub only: Option<String>,
}

impl Default for EvidenceConfig {
    fn default() -> Self {
        EvidenceConfig {
            trials: 4000,
            seed: 1,
            max_steps: 1 << 22,
            only: None,
        }
    }
}

/// Fills the pending slots of `ledger` by simulating `series` (or one of its
/// levels) under `angle`.
pub fn fill_evidence(ledger: &mut ConstructionLedger, series: &CosineSeries, angle: &Angle, cfg: &EvidenceConfig) -> Result<()> {
    let s = ledger.s.clone();
    for slot in &mut ledger.evidence {
        if cfg.only.as_ref().is_some_and(|p| !slot.name.starts_with(p.as_str())) {
            continue;
        }
        let steps = match slot.steps.to_u64() {
            Some(n) if n <= cfg.max_steps => n,
            _ => {
                slot.status = EvidenceStatus::Infeasible {
                    reason: format!("horizon {} exceeds the simulation budget {}", super::theorem1::short_int(&slot.steps), cfg.max_steps),
                };
                continue;
            }
        };
        let sub = match slot.terms {
            Terms::All => series.clone(),
            Terms::Level(i) => {
                let t = ledger
                    .levels
                    .iter()
                    .find(|l| l.k == i)
                    .ok_or_else(|| Error::InvalidInput(format!("slot {} names a missing level", slot.name)))?;
                CosineSeries::single(crate::diophantine::biguint(&t.q), t.amplitude.clone())
            }
        };
        let wc = WalkConfig::new(angle.clone(), steps, cfg.trials, s.clone(), cfg.seed)?;
        let est = mc_tail_with(&wc, &sub, slot.threshold.to_f64(), slot.tail)?;
        let b = to_f64(&slot.bound);
        let supports = match slot.relation {
            Relation::Gt | Relation::Ge => est.interval.lo >= b,
            Relation::Lt | Relation::Le => est.interval.hi <= b,
        };
        slot.status = EvidenceStatus::Filled { estimate: est, supports };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{theorem1_build, Theorem1Config};

    #[test]
    fn faithful_single_level_evidence() {
        let mut c = theorem1_build(&Theorem1Config::faithful(1)).unwrap();
        let cfg = EvidenceConfig {
            trials: 400,
            seed: 7,
            ..Default::default()
        };
        fill_evidence(&mut c.ledger, &c.series, &c.angle, &cfg).unwrap();
        for slot in &c.ledger.evidence {
            match &slot.status {
                EvidenceStatus::Filled { estimate, supports } => {
                    assert!(*supports, "{} {:?}", slot.name, estimate.interval);
                }
                other => panic!("{}: {other:?}", slot.name),
            }
        }
    }
}
