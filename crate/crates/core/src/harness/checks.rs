//! Built-in state checks, a quick statistical self-test and the lone
//! ancilla leakage estimate.

use super::{mutual_information, run_experiment, AttackSpec, ExperimentSpec, HarnessError};
use crate::adversary::{AttackStrategy, TimingMode};
use crate::protocol::{run_session, AliceAction, Party, ProtocolVariant, SessionConfig};
use crate::qsim::StateVector;
use crate::states::{bell_basis, ghz, hadamard_all, phi_basis, prepare_psi, PHI_PLUS, PSI_PLUS};
use serde::{Deserialize, Serialize};
use std::fmt;

const EXACT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckLine {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckLine {
    fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckLine {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "[{verdict}] {}: {}", self.name, self.detail)
    }
}

fn amplitude_line(psi: &StateVector) -> CheckLine {
    let mut worst: f64 = 0.0;
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let want = if [0, 3, 5, 6].contains(&i) { 0.5 } else { 0.0 };
        worst = worst.max((a.re - want).abs()).max(a.im.abs());
    }
    CheckLine::new(
        "circuit output amplitudes",
        worst < EXACT,
        format!("max deviation from 1/2 on |000>,|011>,|101>,|110> is {worst:.3e}"),
    )
}

/// Deterministic checks on the shared state and the measurement bases.
pub fn verify_state() -> Vec<CheckLine> {
    let psi = prepare_psi();
    let mut lines = vec![amplitude_line(&psi)];

    let f = hadamard_all(&psi).fidelity(&ghz());
    lines.push(CheckLine::new(
        "H on all three qubits gives GHZ",
        (f - 1.0).abs() < EXACT,
        format!("fidelity {f:.15}"),
    ));

    let odd: Vec<usize> = (0..8)
        .filter(|&i| psi.amplitude(i).norm_sqr() > EXACT && (i as u32).count_ones() % 2 == 1)
        .collect();
    lines.push(CheckLine::new(
        "Alice bit = Bob bit xor Charlie bit on the support",
        odd.is_empty(),
        format!("{} odd-parity basis states with weight", odd.len()),
    ));

    let bell = bell_basis().len() == 4;
    let phi = phi_basis();
    let f0 = phi.vector(0).fidelity(&psi);
    lines.push(CheckLine::new(
        "Bell and phi bases orthonormal and complete",
        bell && phi.len() == 8,
        format!(
            "{} Bell vectors, {} phi vectors",
            bell_basis().len(),
            phi.len()
        ),
    ));
    lines.push(CheckLine::new(
        "phi0 is the shared state",
        (f0 - 1.0).abs() < EXACT,
        format!("fidelity {f0:.15}"),
    ));

    let pair = psi
        .born_distribution(&bell_basis(), &[0, 1])
        .expect("Bell basis on two qubits");
    let ok = (pair[PHI_PLUS] - 0.5).abs() < EXACT && (pair[PSI_PLUS] - 0.5).abs() < EXACT;
    lines.push(CheckLine::new(
        "Alice-Bob pair is Phi+ or Psi+ with probability 1/2 each",
        ok,
        format!("distribution {pair:?}"),
    ));
    lines
}

fn quick(
    variant: ProtocolVariant,
    attack: AttackSpec,
    compliant: bool,
    n: usize,
    trials: usize,
) -> ExperimentSpec {
    let session = SessionConfig {
        variant,
        n_triplets: n,
        announce_receipt_before_disclosure: compliant,
        seed: 7,
        ..Default::default()
    };
    ExperimentSpec::new(session, attack, trials)
}

/// State checks plus a short run of every attack against its analytic
/// reference.
pub fn selftest() -> Result<Vec<CheckLine>, HarnessError> {
    use ProtocolVariant::{MeasureResend, RandomizationBased};
    let mut lines = verify_state();
    let specs = [
        quick(RandomizationBased, AttackSpec::Honest, true, 64, 50),
        quick(MeasureResend, AttackSpec::Honest, true, 64, 50),
        quick(
            RandomizationBased,
            AttackSpec::DishonestBob { positions: 1 },
            true,
            8,
            2000,
        ),
        quick(
            RandomizationBased,
            AttackSpec::EveBell { positions: 1 },
            true,
            8,
            2000,
        ),
        quick(
            RandomizationBased,
            AttackSpec::EveCnot {
                targets: Party::BOTH.to_vec(),
                timing: TimingMode::Compliant,
            },
            true,
            64,
            200,
        ),
        quick(
            RandomizationBased,
            AttackSpec::EveCnot {
                targets: Party::BOTH.to_vec(),
                timing: TimingMode::BrokenOrdering,
            },
            false,
            64,
            50,
        ),
        quick(MeasureResend, AttackSpec::EveDelay, false, 64, 50),
    ];
    for spec in &specs {
        let report = run_experiment(spec)?;
        for c in report.comparisons {
            let name = format!(
                "{} / {}: {}",
                spec.session.variant,
                spec.attack.label(),
                c.name
            );
            let detail = format!(
                "observed {:.4} ({}/{}), reference {}",
                c.observed, c.successes, c.samples, c.formula
            );
            lines.push(CheckLine::new(name, c.pass, detail));
        }
    }
    Ok(lines)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub samples: u64,
    pub sessions: u64,
    /// `counts[ancilla][alice]`.
    pub counts: [[u64; 2]; 2],
    pub mutual_information: f64,
}

/// Joint statistics of Eve's Bob-only ancilla and Alice's bit on share
/// rounds, collected over compliant sessions until `samples` pairs exist.
pub fn lone_ancilla_leakage(samples: u64, seed: u64) -> Result<LeakageReport, HarnessError> {
    let mut counts = [[0u64; 2]; 2];
    let mut collected = 0;
    let mut sessions = 0;
    while collected < samples {
        let config = SessionConfig {
            n_triplets: 64,
            seed: seed.wrapping_add(sessions),
            ..Default::default()
        };
        sessions += 1;
        let mut eve = AttackStrategy::eve_cnot_ancilla([Party::Bob], TimingMode::Compliant);
        let result = run_session(&config, &mut eve)?;
        for r in result
            .records
            .iter()
            .filter(|r| r.alice_action == AliceAction::Action1)
        {
            let (Some(&anc), Some(alice)) =
                (eve.ancilla_log().get(&(r.index, Party::Bob)), r.alice_bit)
            else {
                continue;
            };
            counts[usize::from(anc)][usize::from(alice)] += 1;
            collected += 1;
            if collected == samples {
                break;
            }
        }
    }
    Ok(LeakageReport {
        samples,
        sessions,
        counts,
        mutual_information: mutual_information(&counts),
    })
}
