//! Channel interceptors.
//!
//! Each strategy hooks into the session at the points where it physically
//! has the qubits: the outbound legs, the return legs, and afterwards with
//! only its own ancillas. Guesses of Alice's bit are recorded per position
//! and scored against the session transcript by [`score`].

use crate::protocol::{
    AncillaAccess, AncillaHandle, Disclosure, OutboundLeg, Party, PartyChoice, ProtocolError,
    ProtocolVariant, ReturnLeg, SessionConfig, SessionResult, Traveler,
};
use crate::qsim::{Gate, SimRng};
use crate::states::{bell_basis, PHI_PLUS, PSI_PLUS};
use rand::seq::index;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Whether the CNOT attacker respects the receipt announcement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingMode {
    /// Reflected qubits are released before anything is disclosed.
    Compliant,
    /// Reflected qubits are held until the reflection orders are public.
    BrokenOrdering,
}

impl fmt::Display for TimingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimingMode::Compliant => "compliant",
            TimingMode::BrokenOrdering => "broken",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttackKind {
    Honest,
    DishonestBob {
        positions: usize,
    },
    EveBell {
        positions: usize,
    },
    EveCnot {
        targets: BTreeSet<Party>,
        timing: TimingMode,
    },
    EveDelay,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("{label} may attack at most N/4 = {limit} positions, got {requested}")]
    TooManyPositions {
        label: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("{0} needs the reflection data before Alice announces receipt")]
    RequiresBrokenOrdering(&'static str),
    #[error("{label} does not apply to the {variant} variant")]
    WrongVariant {
        label: &'static str,
        variant: ProtocolVariant,
    },
    #[error("CNOT attack needs at least one target party")]
    NoTargets,
}

/// A channel interceptor together with its per-session workspace.
#[derive(Clone, Debug)]
pub struct AttackStrategy {
    kind: AttackKind,
    attacked_positions: BTreeSet<usize>,
    workspace: BTreeMap<(usize, Party), AncillaHandle>,
    reverted: BTreeSet<(usize, Party)>,
    ancilla_log: BTreeMap<(usize, Party), u8>,
    intercepted_bits: BTreeMap<(usize, Party), u8>,
    guesses: BTreeMap<usize, u8>,
}

impl AttackStrategy {
    fn with_kind(kind: AttackKind) -> Self {
        AttackStrategy {
            kind,
            attacked_positions: BTreeSet::new(),
            workspace: BTreeMap::new(),
            reverted: BTreeSet::new(),
            ancilla_log: BTreeMap::new(),
            intercepted_bits: BTreeMap::new(),
            guesses: BTreeMap::new(),
        }
    }

    /// Leaves the channel alone.
    pub fn honest() -> Self {
        Self::with_kind(AttackKind::Honest)
    }

    /// Bob always SHAREs on `positions` random positions, also measures
    /// Charlie's qubit there, and forwards it collapsed.
    pub fn dishonest_bob(positions: usize) -> Self {
        Self::with_kind(AttackKind::DishonestBob { positions })
    }

    /// Eve Bell-measures the (Bob, Charlie) pair on `positions` random
    /// positions and forwards the collapsed pair.
    pub fn eve_bell(positions: usize) -> Self {
        Self::with_kind(AttackKind::EveBell { positions })
    }

    /// Eve copies each targeted outbound qubit onto a fresh `|0⟩` ancilla
    /// with a CNOT, and undoes the copy on the way back whenever she can
    /// tell which position a returning qubit belongs to.
    pub fn eve_cnot_ancilla(targets: impl IntoIterator<Item = Party>, timing: TimingMode) -> Self {
        Self::with_kind(AttackKind::EveCnot {
            targets: targets.into_iter().collect(),
            timing,
        })
    }

    /// Eve holds all returning qubits until the parties disclose which they
    /// measured, then reads exactly those.
    pub fn eve_measure_resend_delay() -> Self {
        Self::with_kind(AttackKind::EveDelay)
    }

    pub fn kind(&self) -> &AttackKind {
        &self.kind
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            AttackKind::Honest => "honest",
            AttackKind::DishonestBob { .. } => "dishonest-bob",
            AttackKind::EveBell { .. } => "eve-bell",
            AttackKind::EveCnot { .. } => "eve-cnot",
            AttackKind::EveDelay => "eve-delay",
        }
    }

    pub fn timing_mode(&self) -> Option<TimingMode> {
        match self.kind {
            AttackKind::EveCnot { timing, .. } => Some(timing),
            _ => None,
        }
    }

    pub fn attacked_positions(&self) -> &BTreeSet<usize> {
        &self.attacked_positions
    }

    /// Guessed Alice bit per position.
    pub fn guesses(&self) -> &BTreeMap<usize, u8> {
        &self.guesses
    }

    /// Ancilla readouts per (position, party).
    pub fn ancilla_log(&self) -> &BTreeMap<(usize, Party), u8> {
        &self.ancilla_log
    }

    /// Bits read directly off channel qubits per (position, party).
    pub fn intercepted_bits(&self) -> &BTreeMap<(usize, Party), u8> {
        &self.intercepted_bits
    }

    /// Resets the workspace and picks attacked positions for a new session.
    pub(crate) fn begin(
        &mut self,
        config: &SessionConfig,
        rng: &mut SimRng,
    ) -> Result<(), AttackError> {
        let kind = std::mem::replace(&mut self.kind, AttackKind::Honest);
        *self = Self::with_kind(kind);
        let n = config.n_triplets;
        let label = self.label();
        match &self.kind {
            AttackKind::Honest => {}
            AttackKind::DishonestBob { positions } | AttackKind::EveBell { positions } => {
                let limit = n / 4;
                if *positions > limit {
                    return Err(AttackError::TooManyPositions {
                        label,
                        requested: *positions,
                        limit,
                    });
                }
                self.attacked_positions = index::sample(rng, n, *positions)
                    .into_iter()
                    .map(|i| i + 1)
                    .collect();
            }
            AttackKind::EveCnot { targets, timing } => {
                if targets.is_empty() {
                    return Err(AttackError::NoTargets);
                }
                if *timing == TimingMode::BrokenOrdering
                    && config.announce_receipt_before_disclosure
                {
                    return Err(AttackError::RequiresBrokenOrdering(label));
                }
                self.attacked_positions = (1..=n).collect();
            }
            AttackKind::EveDelay => {
                if config.variant != ProtocolVariant::MeasureResend {
                    return Err(AttackError::WrongVariant {
                        label,
                        variant: config.variant,
                    });
                }
                if config.announce_receipt_before_disclosure {
                    return Err(AttackError::RequiresBrokenOrdering(label));
                }
                self.attacked_positions = (1..=n).collect();
            }
        }
        Ok(())
    }

    /// Choice imposed on a party the attacker controls.
    pub(crate) fn forced_choice(&self, party: Party, position: usize) -> Option<PartyChoice> {
        match self.kind {
            AttackKind::DishonestBob { .. }
                if party == Party::Bob && self.attacked_positions.contains(&position) =>
            {
                Some(PartyChoice::Share)
            }
            _ => None,
        }
    }

    pub(crate) fn outbound(
        &mut self,
        leg: &mut OutboundLeg<'_>,
        rng: &mut SimRng,
    ) -> Result<(), ProtocolError> {
        let position = leg.position();
        if !self.attacked_positions.contains(&position) {
            return Ok(());
        }
        match &self.kind {
            AttackKind::DishonestBob { .. } => {
                let b = leg.measure(Traveler::Party(Party::Bob), rng)?;
                let c = leg.measure(Traveler::Party(Party::Charlie), rng)?;
                self.intercepted_bits.insert((position, Party::Bob), b);
                self.intercepted_bits.insert((position, Party::Charlie), c);
                self.guesses.insert(position, b ^ c);
            }
            AttackKind::EveBell { .. } => {
                let pair = [Traveler::Party(Party::Bob), Traveler::Party(Party::Charlie)];
                let out = leg.measure_in_basis(&bell_basis(), &pair, rng)?;
                match out.outcome_index {
                    PHI_PLUS => {
                        self.guesses.insert(position, 0);
                    }
                    PSI_PLUS => {
                        self.guesses.insert(position, 1);
                    }
                    _ => {}
                }
            }
            AttackKind::EveCnot { targets, .. } => {
                let cnot = Gate::cnot();
                for &party in targets {
                    let ancilla = leg.attach_ancilla(0)?;
                    leg.apply_gate(&cnot, &[Traveler::Party(party), Traveler::Ancilla(ancilla)])?;
                    self.workspace.insert((position, party), ancilla);
                }
            }
            AttackKind::Honest | AttackKind::EveDelay => {}
        }
        Ok(())
    }

    pub(crate) fn returning(
        &mut self,
        leg: &mut ReturnLeg<'_>,
        rng: &mut SimRng,
    ) -> Result<(), ProtocolError> {
        match &self.kind {
            AttackKind::EveCnot { .. } => {
                // Read SHARE-position ancillas before any undo so that
                // resent SHARE qubits do not erase the copy.
                if let Some(d) = leg.disclosure() {
                    let share: Vec<_> = self
                        .workspace
                        .iter()
                        .filter(|((p, party), _)| d.choice(*party, *p) == PartyChoice::Share)
                        .map(|(k, h)| (*k, *h))
                        .collect();
                    for (key, h) in share {
                        let bit = leg.measure_ancilla(h, rng)?;
                        self.ancilla_log.insert(key, bit);
                    }
                }
                let cnot = Gate::cnot();
                for party in Party::BOTH {
                    for slot in 0..leg.slot_count(party) {
                        let Some(position) = leg.slot_position(party, slot) else {
                            continue;
                        };
                        let key = (position, party);
                        if self.ancilla_log.contains_key(&key) {
                            continue;
                        }
                        if let Some(&h) = self.workspace.get(&key) {
                            leg.apply_with_ancilla(party, slot, &cnot, h)?;
                            self.reverted.insert(key);
                        }
                    }
                }
            }
            AttackKind::EveDelay => {
                let Some(d) = leg.disclosure().cloned() else {
                    return Err(ProtocolError::ChannelClosed);
                };
                for party in Party::BOTH {
                    for slot in 0..leg.slot_count(party) {
                        let position = leg
                            .slot_position(party, slot)
                            .ok_or(ProtocolError::ChannelClosed)?;
                        if d.choice(party, position) == PartyChoice::Share {
                            let bit = leg.measure_slot(party, slot, rng)?;
                            self.intercepted_bits.insert((position, party), bit);
                        }
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub(crate) fn after_disclosure(
        &mut self,
        access: &mut AncillaAccess<'_>,
        disclosure: &Disclosure,
        rng: &mut SimRng,
    ) -> Result<(), ProtocolError> {
        let bits = match &self.kind {
            AttackKind::EveCnot { .. } => {
                let pending: Vec<_> = self
                    .workspace
                    .iter()
                    .filter(|(k, _)| {
                        !self.reverted.contains(k) && !self.ancilla_log.contains_key(k)
                    })
                    .filter(|((p, party), _)| disclosure.choice(*party, *p) == PartyChoice::Share)
                    .map(|(k, h)| (*k, *h))
                    .collect();
                for (key, h) in pending {
                    let bit = access.measure(h, rng)?;
                    self.ancilla_log.insert(key, bit);
                }
                &self.ancilla_log
            }
            AttackKind::EveDelay => &self.intercepted_bits,
            _ => return Ok(()),
        };
        let guesses: Vec<(usize, u8)> = (1..=disclosure.len())
            .filter(|&p| disclosure.both_share(p))
            .filter_map(|p| {
                Some((
                    p,
                    bits.get(&(p, Party::Bob))? ^ bits.get(&(p, Party::Charlie))?,
                ))
            })
            .collect();
        self.guesses.extend(guesses);
        Ok(())
    }
}

/// How an attack fared in one session.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackScore {
    /// No round of the session was flagged.
    pub escaped: bool,
    /// Guesses that match Alice's bit.
    pub bits_learned: usize,
    /// Guesses for which a ground truth exists.
    pub scored_guesses: usize,
    pub attacked_rounds: usize,
    pub flagged_attacked_rounds: usize,
    /// Fraction of attacked rounds that were flagged.
    pub detection_rate: f64,
}

/// Ground truth for a position: Alice's bit where she measured it, else the
/// XOR of both parties' bits where both exist.
pub fn ground_truth(result: &SessionResult, position: usize) -> Option<u8> {
    let r = result.record(position)?;
    r.alice_bit.or_else(|| Some(r.bob_bit? ^ r.charlie_bit?))
}

pub fn score(strategy: &AttackStrategy, result: &SessionResult) -> AttackScore {
    let escaped = result.records.iter().all(|r| !r.error_flag);
    let mut bits_learned = 0;
    let mut scored_guesses = 0;
    for (&p, &g) in strategy.guesses() {
        if let Some(truth) = ground_truth(result, p) {
            scored_guesses += 1;
            bits_learned += usize::from(truth == g);
        }
    }
    let attacked_rounds = strategy.attacked_positions().len();
    let flagged_attacked_rounds = strategy
        .attacked_positions()
        .iter()
        .filter(|&&p| result.record(p).is_some_and(|r| r.error_flag))
        .count();
    let detection_rate = if attacked_rounds == 0 {
        0.0
    } else {
        flagged_attacked_rounds as f64 / attacked_rounds as f64
    };
    AttackScore {
        escaped,
        bits_learned,
        scored_guesses,
        attacked_rounds,
        flagged_attacked_rounds,
        detection_rate,
    }
}
