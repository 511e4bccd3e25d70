//! What an interceptor can reach on each leg of the quantum channel.
//!
//! None of these views can address qubit 0, so Alice's retained qubit is out
//! of reach by construction. Return-slot positions stay hidden until the
//! reflection order is public.

use super::{Party, PartyChoice, ProtocolError, ReflectionOrder, ALICE_QUBIT};
use crate::qsim::{Basis, Gate, MeasurementOutcome, StateVector};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// An ancilla qubit owned by the interceptor, living in the register of
/// one position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AncillaHandle {
    pub position: usize,
    qubit: usize,
}

/// A qubit an interceptor may act on while a triplet is in flight.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Traveler {
    Party(Party),
    Ancilla(AncillaHandle),
}

/// Alice→Bob and Alice→Charlie legs of a single position.
pub struct OutboundLeg<'a> {
    position: usize,
    reg: &'a mut StateVector,
}

impl<'a> OutboundLeg<'a> {
    pub(crate) fn new(position: usize, reg: &'a mut StateVector) -> Self {
        OutboundLeg { position, reg }
    }

    pub fn position(&self) -> usize {
        self.position
    }

    fn qubit(&self, t: Traveler) -> Result<usize, ProtocolError> {
        match t {
            Traveler::Party(p) => Ok(p.qubit()),
            Traveler::Ancilla(h) if h.position != self.position => {
                Err(ProtocolError::CrossRegister(self.position, h.position))
            }
            Traveler::Ancilla(h) => Ok(h.qubit),
        }
    }

    fn qubits(&self, ts: &[Traveler]) -> Result<Vec<usize>, ProtocolError> {
        ts.iter().map(|&t| self.qubit(t)).collect()
    }

    pub fn attach_ancilla(&mut self, value: u8) -> Result<AncillaHandle, ProtocolError> {
        let qubit = self.reg.extend_with_ancilla(value)?;
        Ok(AncillaHandle {
            position: self.position,
            qubit,
        })
    }

    pub fn apply_gate(&mut self, gate: &Gate, targets: &[Traveler]) -> Result<(), ProtocolError> {
        let qs = self.qubits(targets)?;
        debug_assert!(!qs.contains(&ALICE_QUBIT));
        Ok(self.reg.apply_gate(gate, &qs)?)
    }

    pub fn measure(&mut self, target: Traveler, rng: &mut impl Rng) -> Result<u8, ProtocolError> {
        let q = self.qubit(target)?;
        Ok(self.reg.measure_computational(q, rng)?.outcome_index as u8)
    }

    pub fn measure_in_basis(
        &mut self,
        basis: &Basis,
        targets: &[Traveler],
        rng: &mut impl Rng,
    ) -> Result<MeasurementOutcome, ProtocolError> {
        let qs = self.qubits(targets)?;
        Ok(self.reg.measure_in_basis(basis, &qs, rng)?)
    }
}

/// Step-4 public announcement of one party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyDisclosure {
    /// Choice per position, index 0 is position 1.
    pub choices: Vec<PartyChoice>,
    /// Return order of the reflected qubits (randomization variant only).
    pub order: Option<ReflectionOrder>,
}

/// Everything the classical parties publish in step 4.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Disclosure {
    pub bob: PartyDisclosure,
    pub charlie: PartyDisclosure,
    /// Bits announced by the measuring party on one-sided check rounds.
    pub check_bits: BTreeMap<usize, (Party, u8)>,
}

impl Disclosure {
    pub fn party(&self, party: Party) -> &PartyDisclosure {
        match party {
            Party::Bob => &self.bob,
            Party::Charlie => &self.charlie,
        }
    }

    pub fn choice(&self, party: Party, position: usize) -> PartyChoice {
        self.party(party).choices[position - 1]
    }

    pub fn both_share(&self, position: usize) -> bool {
        Party::BOTH
            .iter()
            .all(|&p| self.choice(p, position) == PartyChoice::Share)
    }

    pub fn len(&self) -> usize {
        self.bob.choices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bob.choices.is_empty()
    }
}

/// Bob→Alice and Charlie→Alice legs, whole streams at once.
pub struct ReturnLeg<'a> {
    registers: &'a mut [StateVector],
    bob: &'a [usize],
    charlie: &'a [usize],
    slots_in_position_order: bool,
    disclosure: Option<&'a Disclosure>,
}

impl<'a> ReturnLeg<'a> {
    pub(crate) fn new(
        registers: &'a mut [StateVector],
        bob: &'a [usize],
        charlie: &'a [usize],
        slots_in_position_order: bool,
        disclosure: Option<&'a Disclosure>,
    ) -> Self {
        ReturnLeg {
            registers,
            bob,
            charlie,
            slots_in_position_order,
            disclosure,
        }
    }

    fn stream(&self, party: Party) -> &[usize] {
        match party {
            Party::Bob => self.bob,
            Party::Charlie => self.charlie,
        }
    }

    /// Step-4 data, present only if it was published while the qubits are
    /// still on the channel.
    pub fn disclosure(&self) -> Option<&Disclosure> {
        self.disclosure
    }

    pub fn slot_count(&self, party: Party) -> usize {
        self.stream(party).len()
    }

    /// Position carried by a return slot, if the interceptor can know it:
    /// either slots keep transmission order, or the order was published.
    pub fn slot_position(&self, party: Party, slot: usize) -> Option<usize> {
        if self.slots_in_position_order || self.disclosure.is_some() {
            self.stream(party).get(slot).copied()
        } else {
            None
        }
    }

    fn slot_qubit(&self, party: Party, slot: usize) -> Result<(usize, usize), ProtocolError> {
        let position = *self
            .stream(party)
            .get(slot)
            .ok_or(ProtocolError::NotInTransit {
                party,
                position: slot + 1,
            })?;
        Ok((position, party.qubit()))
    }

    /// Applies a two-qubit gate to (slot qubit, ancilla).
    pub fn apply_with_ancilla(
        &mut self,
        party: Party,
        slot: usize,
        gate: &Gate,
        ancilla: AncillaHandle,
    ) -> Result<(), ProtocolError> {
        let (position, q) = self.slot_qubit(party, slot)?;
        if position != ancilla.position {
            return Err(ProtocolError::CrossRegister(position, ancilla.position));
        }
        Ok(self.registers[position - 1].apply_gate(gate, &[q, ancilla.qubit])?)
    }

    /// Measures one of the interceptor's own ancillas while the qubits are
    /// still in flight.
    pub fn measure_ancilla(
        &mut self,
        ancilla: AncillaHandle,
        rng: &mut impl Rng,
    ) -> Result<u8, ProtocolError> {
        let reg = &mut self.registers[ancilla.position - 1];
        Ok(reg.measure_computational(ancilla.qubit, rng)?.outcome_index as u8)
    }

    pub fn measure_slot(
        &mut self,
        party: Party,
        slot: usize,
        rng: &mut impl Rng,
    ) -> Result<u8, ProtocolError> {
        let (position, q) = self.slot_qubit(party, slot)?;
        Ok(self.registers[position - 1]
            .measure_computational(q, rng)?
            .outcome_index as u8)
    }
}

/// The interceptor's view after the channel has closed: only its own
/// ancillas remain reachable.
pub struct AncillaAccess<'a> {
    registers: &'a mut [StateVector],
}

impl<'a> AncillaAccess<'a> {
    pub(crate) fn new(registers: &'a mut [StateVector]) -> Self {
        AncillaAccess { registers }
    }

    pub fn measure(
        &mut self,
        ancilla: AncillaHandle,
        rng: &mut impl Rng,
    ) -> Result<u8, ProtocolError> {
        let reg = &mut self.registers[ancilla.position - 1];
        Ok(reg.measure_computational(ancilla.qubit, rng)?.outcome_index as u8)
    }
}
