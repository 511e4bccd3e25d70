//! Classical participants.

use super::{Party, PartyChoice, ProtocolError, ProtocolVariant};
use crate::qsim::StateVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Everything a classical party can physically do with a qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassicalOp {
    Measure,
    Reorder,
    PrepareFresh,
    Reflect,
}

/// A classical party bound to one variant. Every operation goes through
/// [`ClassicalParty::perform`], which rejects operations the variant does
/// not allow and logs the rest.
#[derive(Clone, Debug)]
pub struct ClassicalParty {
    party: Party,
    variant: ProtocolVariant,
    log: Vec<ClassicalOp>,
}

impl ClassicalParty {
    pub fn new(party: Party, variant: ProtocolVariant) -> Self {
        ClassicalParty {
            party,
            variant,
            log: Vec::new(),
        }
    }

    pub fn party(&self) -> Party {
        self.party
    }

    pub fn perform(&mut self, op: ClassicalOp) -> Result<(), ProtocolError> {
        if !self.variant.permits(op) {
            return Err(ProtocolError::ForbiddenOperation {
                party: self.party,
                op,
                variant: self.variant,
            });
        }
        self.log.push(op);
        Ok(())
    }

    pub fn ops(&self) -> &[ClassicalOp] {
        &self.log
    }

    pub fn into_ops(self) -> Vec<ClassicalOp> {
        self.log
    }
}

/// Outcome of one party handling one incoming qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartyTurn {
    pub bit: Option<u8>,
    /// Whether the qubit goes back to Alice at all.
    pub returned: bool,
    /// Whether it waits in the party's queue for a permuted return instead
    /// of going back in its own slot.
    pub deferred: bool,
}

/// One party's handling of its qubit in `reg` under a choice fixed in
/// advance.
pub fn classical_party_turn(
    actor: &mut ClassicalParty,
    choice: PartyChoice,
    reg: &mut StateVector,
    rng: &mut impl Rng,
) -> Result<PartyTurn, ProtocolError> {
    let q = actor.party().qubit();
    match (actor.variant, choice) {
        (ProtocolVariant::RandomizationBased, PartyChoice::Share) => {
            actor.perform(ClassicalOp::Measure)?;
            let bit = reg.measure_computational(q, rng)?.outcome_index as u8;
            Ok(PartyTurn {
                bit: Some(bit),
                returned: false,
                deferred: false,
            })
        }
        (ProtocolVariant::RandomizationBased, PartyChoice::Check) => {
            actor.perform(ClassicalOp::Reflect)?;
            Ok(PartyTurn {
                bit: None,
                returned: true,
                deferred: true,
            })
        }
        (ProtocolVariant::MeasureResend, PartyChoice::Share) => {
            actor.perform(ClassicalOp::Measure)?;
            let bit = reg.measure_computational(q, rng)?.outcome_index as u8;
            actor.perform(ClassicalOp::PrepareFresh)?;
            reg.reset_qubit(q, bit, rng)?;
            Ok(PartyTurn {
                bit: Some(bit),
                returned: true,
                deferred: false,
            })
        }
        (ProtocolVariant::MeasureResend, PartyChoice::Check) => {
            actor.perform(ClassicalOp::Reflect)?;
            Ok(PartyTurn {
                bit: None,
                returned: true,
                deferred: false,
            })
        }
    }
}
