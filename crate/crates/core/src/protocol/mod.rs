//! One SQSS session: distribution, the classical parties' choices, the
//! return legs, the public announcements, Alice's checks and the final
//! secret.
//!
//! Positions are numbered from 1 in every public structure. Each position
//! owns its own register with Alice at qubit 0, Bob at qubit 1 and Charlie
//! at qubit 2; attack ancillas are appended after those.

mod alice;
mod channel;
mod party;
mod session;

pub use alice::{alice_check_action2, alice_check_action3, alice_check_action4, CheckResult};
pub use channel::{
    AncillaAccess, AncillaHandle, Disclosure, OutboundLeg, PartyDisclosure, ReturnLeg, Traveler,
};
pub use party::{classical_party_turn, ClassicalOp, ClassicalParty, PartyTurn};
pub use session::{dispatch_action, dispatch_from_orders, finalize, run_session};

use crate::qsim::{BasisLabel, QsimError};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

pub const ALICE_QUBIT: usize = 0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolVariant {
    /// Classical parties measure, reorder or reflect.
    RandomizationBased,
    /// Classical parties measure, prepare fresh qubits or reflect.
    MeasureResend,
}

impl ProtocolVariant {
    pub fn permits(self, op: ClassicalOp) -> bool {
        match self {
            ProtocolVariant::RandomizationBased => {
                matches!(
                    op,
                    ClassicalOp::Measure | ClassicalOp::Reorder | ClassicalOp::Reflect
                )
            }
            ProtocolVariant::MeasureResend => {
                matches!(
                    op,
                    ClassicalOp::Measure | ClassicalOp::PrepareFresh | ClassicalOp::Reflect
                )
            }
        }
    }
}

impl fmt::Display for ProtocolVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolVariant::RandomizationBased => "randomization",
            ProtocolVariant::MeasureResend => "measure-resend",
        })
    }
}

/// The two classical participants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Party {
    Bob,
    Charlie,
}

impl Party {
    pub const BOTH: [Party; 2] = [Party::Bob, Party::Charlie];

    /// Register index of this party's qubit.
    pub fn qubit(self) -> usize {
        match self {
            Party::Bob => 1,
            Party::Charlie => 2,
        }
    }

    pub fn other(self) -> Party {
        match self {
            Party::Bob => Party::Charlie,
            Party::Charlie => Party::Bob,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PartyChoice {
    Share,
    Check,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliceAction {
    /// Computational measurement of Alice's qubit.
    Action1,
    /// Bell measurement on Alice's qubit and Charlie's reflected qubit.
    Action2,
    /// Bell measurement on Alice's qubit and Bob's reflected qubit.
    Action3,
    /// φ-basis measurement on the reassembled triplet.
    Action4,
}

impl AliceAction {
    /// Dispatch case number, 1 through 4.
    pub fn case(self) -> usize {
        match self {
            AliceAction::Action1 => 1,
            AliceAction::Action2 => 2,
            AliceAction::Action3 => 3,
            AliceAction::Action4 => 4,
        }
    }
}

/// Order in which a party returns its reflected qubits: `positions[j]` is
/// the position whose qubit travels in return slot `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReflectionOrder {
    positions: Vec<usize>,
}

impl ReflectionOrder {
    /// Validates that `positions` is a permutation of distinct positions in
    /// `1..=n`.
    pub fn new(positions: Vec<usize>, n: usize) -> Result<Self, ProtocolError> {
        let mut seen = vec![false; n + 1];
        for &p in &positions {
            if p == 0 || p > n || seen[p] {
                return Err(ProtocolError::InvalidOrder(positions));
            }
            seen[p] = true;
        }
        Ok(ReflectionOrder { positions })
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// True when this order is a permutation of exactly `checks`.
    pub fn covers(&self, checks: &[usize]) -> bool {
        let mut a = self.positions.clone();
        let mut b = checks.to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }
}

/// Per-position transcript entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub index: usize,
    pub bob_choice: PartyChoice,
    pub charlie_choice: PartyChoice,
    pub bob_bit: Option<u8>,
    pub charlie_bit: Option<u8>,
    pub alice_action: AliceAction,
    pub alice_bit: Option<u8>,
    pub check_outcome: Option<(BasisLabel, usize)>,
    pub revealed: bool,
    pub error_flag: bool,
}

/// Events on the public channel, in the order they happened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PublicEvent {
    ReceiptAnnounced,
    Disclosed {
        party: Party,
    },
    CheckBitAnnounced {
        party: Party,
        position: usize,
        bit: u8,
    },
    ErrorRatesChecked {
        aborted: bool,
    },
    RevealRequested {
        positions: Vec<usize>,
    },
    RevealChecked {
        aborted: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub variant: ProtocolVariant,
    pub n_triplets: usize,
    pub error_threshold: f64,
    pub reveal_fraction: f64,
    pub announce_receipt_before_disclosure: bool,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            variant: ProtocolVariant::RandomizationBased,
            n_triplets: 64,
            error_threshold: 0.0,
            reveal_fraction: 0.5,
            announce_receipt_before_disclosure: true,
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(0.0..1.0).contains(&self.error_threshold) {
            return Err(ProtocolError::InvalidConfig(format!(
                "error threshold {} outside [0, 1)",
                self.error_threshold
            )));
        }
        if !(self.reveal_fraction > 0.0 && self.reveal_fraction < 1.0) {
            return Err(ProtocolError::InvalidConfig(format!(
                "reveal fraction {} outside (0, 1)",
                self.reveal_fraction
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionResult {
    pub records: Vec<RoundRecord>,
    /// Error fraction for dispatch cases 1..=4 at indices 0..=3. Case 1 is
    /// measured on the revealed subset only.
    pub error_rates: [f64; 4],
    pub case_counts: [usize; 4],
    pub aborted: bool,
    pub revealed_positions: Vec<usize>,
    pub secret_positions: Vec<usize>,
    pub alice_secret: Vec<u8>,
    pub reconstructed_secret: Vec<u8>,
    pub transcript: Vec<PublicEvent>,
    pub bob_ops: Vec<ClassicalOp>,
    pub charlie_ops: Vec<ClassicalOp>,
}

impl SessionResult {
    pub fn record(&self, position: usize) -> Option<&RoundRecord> {
        self.records.get(position.checked_sub(1)?)
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid session configuration: {0}")]
    InvalidConfig(String),
    #[error("{party:?} may not {op:?} in the {variant} variant")]
    ForbiddenOperation {
        party: Party,
        op: ClassicalOp,
        variant: ProtocolVariant,
    },
    #[error("invalid reflection order {0:?}")]
    InvalidOrder(Vec<usize>),
    #[error("qubit of {party:?} at position {position} is not on the channel")]
    NotInTransit { party: Party, position: usize },
    #[error("channel qubits are out of reach after Alice's receipt announcement")]
    ChannelClosed,
    #[error("operation spans registers of positions {0} and {1}")]
    CrossRegister(usize, usize),
    #[error("attack rejected: {0}")]
    Attack(#[from] crate::adversary::AttackError),
    #[error(transparent)]
    Quantum(#[from] QsimError),
}
