//! Monte Carlo experiments over many seeded sessions.
//!
//! Trial `i` of an experiment runs with seed `base_seed + i`, so any
//! sub-range of trials can be reproduced on its own. Trials run in
//! parallel; rows are always folded in trial order.

mod checks;
mod config;
mod report;
mod stats;

pub use checks::{lone_ancilla_leakage, selftest, verify_state, CheckLine, LeakageReport};
pub use config::parse_config;
pub use report::{
    emit_report, report_csv, report_json, write_transcript, ReportFormat, CSV_HEADER,
};
pub use stats::{mutual_information, BinomialGate};

use crate::adversary::{score, AttackError, AttackStrategy, TimingMode};
use crate::protocol::{
    run_session, AliceAction, Party, PartyChoice, ProtocolError, ProtocolVariant, SessionConfig,
    SessionResult,
};
use crate::qsim::Gate;
use crate::states::{phi_basis, prepare_psi};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown attack strategy {0:?}")]
    UnknownStrategy(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("no analytic escape probability for {0}")]
    NoAnalyticReference(String),
    #[error("config: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Write { path: PathBuf, message: String },
    #[error(transparent)]
    Protocol(ProtocolError),
}

impl From<ProtocolError> for HarnessError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Attack(a) => HarnessError::InvalidParameter(a.to_string()),
            ProtocolError::InvalidConfig(m) => HarnessError::InvalidParameter(m),
            other => HarnessError::Protocol(other),
        }
    }
}

/// Attack selection as it appears on the command line and in reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "label", rename_all = "kebab-case")]
pub enum AttackSpec {
    Honest,
    DishonestBob {
        positions: usize,
    },
    EveBell {
        positions: usize,
    },
    EveCnot {
        targets: Vec<Party>,
        timing: TimingMode,
    },
    EveDelay,
}

impl AttackSpec {
    /// Builds a spec from a CLI label and its parameters.
    pub fn from_label(
        label: &str,
        positions: usize,
        targets: Vec<Party>,
        timing: TimingMode,
    ) -> Result<Self, HarnessError> {
        Ok(match label {
            "honest" => AttackSpec::Honest,
            "dishonest-bob" => AttackSpec::DishonestBob { positions },
            "eve-bell" => AttackSpec::EveBell { positions },
            "eve-cnot" => AttackSpec::EveCnot { targets, timing },
            "eve-delay" => AttackSpec::EveDelay,
            other => return Err(HarnessError::UnknownStrategy(other.to_string())),
        })
    }

    pub fn label(&self) -> &'static str {
        match self {
            AttackSpec::Honest => "honest",
            AttackSpec::DishonestBob { .. } => "dishonest-bob",
            AttackSpec::EveBell { .. } => "eve-bell",
            AttackSpec::EveCnot { .. } => "eve-cnot",
            AttackSpec::EveDelay => "eve-delay",
        }
    }

    pub fn build(&self) -> AttackStrategy {
        match self {
            AttackSpec::Honest => AttackStrategy::honest(),
            AttackSpec::DishonestBob { positions } => AttackStrategy::dishonest_bob(*positions),
            AttackSpec::EveBell { positions } => AttackStrategy::eve_bell(*positions),
            AttackSpec::EveCnot { targets, timing } => {
                AttackStrategy::eve_cnot_ancilla(targets.iter().copied(), *timing)
            }
            AttackSpec::EveDelay => AttackStrategy::eve_measure_resend_delay(),
        }
    }
}

impl FromStr for ProtocolVariant {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "randomization" => Ok(ProtocolVariant::RandomizationBased),
            "measure-resend" => Ok(ProtocolVariant::MeasureResend),
            other => Err(HarnessError::InvalidParameter(format!(
                "unknown variant {other:?}"
            ))),
        }
    }
}

impl FromStr for TimingMode {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "compliant" => Ok(TimingMode::Compliant),
            "broken" => Ok(TimingMode::BrokenOrdering),
            other => Err(HarnessError::InvalidParameter(format!(
                "unknown timing {other:?}"
            ))),
        }
    }
}

/// Parses `bob`, `charlie` or `both`.
pub fn parse_targets(s: &str) -> Result<Vec<Party>, HarnessError> {
    match s {
        "bob" => Ok(vec![Party::Bob]),
        "charlie" => Ok(vec![Party::Charlie]),
        "both" => Ok(Party::BOTH.to_vec()),
        other => Err(HarnessError::InvalidParameter(format!(
            "unknown target set {other:?}"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputSpec {
    pub path: PathBuf,
    pub format: ReportFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Session template; its seed is the base seed.
    pub session: SessionConfig,
    pub attack: AttackSpec,
    pub trials: usize,
    #[serde(skip)]
    pub output: Option<OutputSpec>,
    #[serde(skip)]
    pub transcript: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(session: SessionConfig, attack: AttackSpec, trials: usize) -> Self {
        ExperimentSpec {
            session,
            attack,
            trials,
            output: None,
            transcript: None,
        }
    }

    pub fn trial_config(&self, trial: usize) -> SessionConfig {
        SessionConfig {
            seed: self.session.seed.wrapping_add(trial as u64),
            ..self.session.clone()
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::InvalidParameter(
                "trials must be at least 1".into(),
            ));
        }
        self.session.validate()?;
        let limit = self.session.n_triplets / 4;
        if let AttackSpec::DishonestBob { positions } | AttackSpec::EveBell { positions } =
            self.attack
        {
            if positions > limit {
                return Err(HarnessError::InvalidParameter(format!(
                    "{} positions {positions} exceed N/4 = {limit}",
                    self.attack.label()
                )));
            }
        }
        if let AttackSpec::EveCnot { targets, .. } = &self.attack {
            if targets.is_empty() {
                return Err(HarnessError::InvalidParameter(
                    AttackError::NoTargets.to_string(),
                ));
            }
        }
        Ok(())
    }
}

/// One session's outcome, flattened.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub escaped: bool,
    pub detection_rate: f64,
    pub bits_learned: usize,
    pub scored_guesses: usize,
    pub err_case: [f64; 4],
    pub case_counts: [usize; 4],
    pub secret_len: usize,
    pub agree: bool,
    pub aborted: bool,
    pub attacked_rounds: usize,
    pub flagged_attacked_rounds: usize,
    /// Attacked rounds in the conditioning event of the attack's detection
    /// claim (see [`conditional_event`]).
    pub conditional_rounds: usize,
    pub conditional_flagged: usize,
    pub share_rounds: usize,
    pub share_recovered: usize,
}

/// Description of the round subset on which per-round detection is
/// measured for each attack.
pub fn conditional_event(attack: &AttackSpec) -> Option<&'static str> {
    match attack {
        AttackSpec::DishonestBob { .. } => Some("Charlie CHECK"),
        AttackSpec::EveBell { .. } => Some("Bob CHECK and Charlie CHECK"),
        AttackSpec::EveCnot { .. } => Some("Action 4"),
        _ => None,
    }
}

fn in_conditional_event(attack: &AttackSpec, bob: PartyChoice, charlie: PartyChoice) -> bool {
    use PartyChoice::Check;
    match attack {
        AttackSpec::DishonestBob { .. } => charlie == Check,
        AttackSpec::EveBell { .. } | AttackSpec::EveCnot { .. } => bob == Check && charlie == Check,
        _ => false,
    }
}

fn run_trial_session(spec: &ExperimentSpec, trial: usize) -> Result<SessionResult, HarnessError> {
    let mut strategy = spec.attack.build();
    Ok(run_session(&spec.trial_config(trial), &mut strategy)?)
}

pub fn run_trial(spec: &ExperimentSpec, trial: usize) -> Result<TrialRow, HarnessError> {
    let config = spec.trial_config(trial);
    let mut strategy = spec.attack.build();
    let result = run_session(&config, &mut strategy)?;
    let sc = score(&strategy, &result);
    let mut conditional_rounds = 0;
    let mut conditional_flagged = 0;
    for &p in strategy.attacked_positions() {
        let r = &result.records[p - 1];
        if in_conditional_event(&spec.attack, r.bob_choice, r.charlie_choice) {
            conditional_rounds += 1;
            conditional_flagged += usize::from(r.error_flag);
        }
    }
    let share: Vec<_> = result
        .records
        .iter()
        .filter(|r| r.alice_action == AliceAction::Action1)
        .collect();
    let share_recovered = share
        .iter()
        .filter(|r| strategy.guesses().get(&r.index).copied() == r.alice_bit)
        .count();
    Ok(TrialRow {
        trial,
        seed: config.seed,
        escaped: sc.escaped,
        detection_rate: sc.detection_rate,
        bits_learned: sc.bits_learned,
        scored_guesses: sc.scored_guesses,
        err_case: result.error_rates,
        case_counts: result.case_counts,
        secret_len: result.alice_secret.len(),
        agree: result.alice_secret == result.reconstructed_secret,
        aborted: result.aborted,
        attacked_rounds: sc.attacked_rounds,
        flagged_attacked_rounds: sc.flagged_attacked_rounds,
        conditional_rounds,
        conditional_flagged,
        share_rounds: share.len(),
        share_recovered,
    })
}

/// Escape probability over `positions` attacked positions for the attacks
/// that have one: `(3/4)^l` for the dishonest insider, `(5/8)^m` for the
/// Bell-measuring outsider.
pub fn analytic_escape(label: &str, positions: usize) -> Result<f64, HarnessError> {
    let per_position: f64 = match label {
        "dishonest-bob" => 0.75,
        "eve-bell" => 0.625,
        other => return Err(HarnessError::NoAnalyticReference(other.to_string())),
    };
    Ok(per_position.powi(positions as i32))
}

/// Probability that the φ-basis check of an untouched-by-parties triplet
/// fails after Eve copies the listed parties' qubits onto ancillas and
/// never undoes the copy.
pub fn cnot_detection_oracle(targets: &[Party]) -> f64 {
    let mut s = prepare_psi();
    for &party in targets {
        let anc = s.extend_with_ancilla(0).expect("at most two ancillas");
        s.apply_gate(&Gate::cnot(), &[party.qubit(), anc])
            .expect("valid qubits");
    }
    let d = s
        .born_distribution(&phi_basis(), &[0, 1, 2])
        .expect("phi basis on 3 qubits");
    1.0 - d[0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub name: String,
    pub formula: String,
    pub reference: f64,
    pub observed: f64,
    pub successes: u64,
    pub samples: u64,
    /// `None` for exact comparisons.
    pub gate: Option<BinomialGate>,
    pub pass: bool,
}

impl Comparison {
    fn three_sigma(
        name: &str,
        formula: &str,
        reference: f64,
        successes: u64,
        samples: u64,
    ) -> Self {
        let observed = if samples == 0 {
            f64::NAN
        } else {
            successes as f64 / samples as f64
        };
        let gate = BinomialGate::three_sigma(reference, samples);
        Comparison {
            name: name.into(),
            formula: formula.into(),
            reference,
            observed,
            successes,
            samples,
            gate: Some(gate),
            pass: gate.admits(observed),
        }
    }

    fn exact(name: &str, formula: &str, reference: f64, successes: u64, samples: u64) -> Self {
        let observed = if samples == 0 {
            reference
        } else {
            successes as f64 / samples as f64
        };
        Comparison {
            name: name.into(),
            formula: formula.into(),
            reference,
            observed,
            successes,
            samples,
            gate: None,
            pass: observed == reference,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub trials: usize,
    pub escape_rate: f64,
    pub mean_detection_rate: f64,
    pub mean_bits_learned: f64,
    pub mean_error_rate: [f64; 4],
    pub mean_secret_len: f64,
    pub agreement_rate: f64,
    pub abort_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub aggregates: Aggregates,
    pub comparisons: Vec<Comparison>,
    pub pass: bool,
    pub trials: Vec<TrialRow>,
}

fn aggregate(rows: &[TrialRow]) -> Aggregates {
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&TrialRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let mut mean_error_rate = [0.0; 4];
    for (k, m) in mean_error_rate.iter_mut().enumerate() {
        *m = mean(&|r| r.err_case[k]);
    }
    Aggregates {
        trials: rows.len(),
        escape_rate: mean(&|r| f64::from(u8::from(r.escaped))),
        mean_detection_rate: mean(&|r| r.detection_rate),
        mean_bits_learned: mean(&|r| r.bits_learned as f64),
        mean_error_rate,
        mean_secret_len: mean(&|r| r.secret_len as f64),
        agreement_rate: mean(&|r| f64::from(u8::from(r.agree))),
        abort_rate: mean(&|r| f64::from(u8::from(r.aborted))),
    }
}

/// Analytic checks for an attack, recomputed from the per-trial rows only.
pub fn compare(spec: &ExperimentSpec, rows: &[TrialRow]) -> Vec<Comparison> {
    let sum = |f: &dyn Fn(&TrialRow) -> usize| rows.iter().map(f).sum::<usize>() as u64;
    let trials = rows.len() as u64;
    let escaped = sum(&|r| usize::from(r.escaped));
    let cond = sum(&|r| r.conditional_rounds);
    let cond_flagged = sum(&|r| r.conditional_flagged);
    let flagged = sum(&|r| r.flagged_attacked_rounds);
    let attacked = sum(&|r| r.attacked_rounds);
    let share = sum(&|r| r.share_rounds);
    let recovered = sum(&|r| r.share_recovered);
    match &spec.attack {
        AttackSpec::Honest => {
            let check_rounds = sum(&|r| r.case_counts[1] + r.case_counts[2] + r.case_counts[3]);
            let check_errors = sum(&|r| {
                (1..4)
                    .map(|k| (r.err_case[k] * r.case_counts[k] as f64).round() as usize)
                    .sum()
            });
            vec![
                Comparison::exact(
                    "check errors (cases 2-4)",
                    "0",
                    0.0,
                    check_errors,
                    check_rounds,
                ),
                Comparison::exact(
                    "revealed SHARE-bit errors",
                    "0",
                    0.0,
                    sum(&|r| usize::from(r.err_case[0] > 0.0)),
                    trials,
                ),
                Comparison::exact(
                    "reconstructed secret = Alice's secret",
                    "1",
                    1.0,
                    sum(&|r| usize::from(r.agree)),
                    trials,
                ),
            ]
        }
        AttackSpec::DishonestBob { positions } => vec![
            Comparison::three_sigma(
                "escape probability",
                &format!("(3/4)^{positions}"),
                0.75f64.powi(*positions as i32),
                escaped,
                trials,
            ),
            Comparison::three_sigma(
                "detection given Charlie CHECK",
                "1/2",
                0.5,
                cond_flagged,
                cond,
            ),
        ],
        AttackSpec::EveBell { positions } => vec![
            Comparison::three_sigma(
                "escape probability",
                &format!("(5/8)^{positions}"),
                0.625f64.powi(*positions as i32),
                escaped,
                trials,
            ),
            Comparison::three_sigma(
                "detection given (CHECK, CHECK)",
                "1/2",
                0.5,
                cond_flagged,
                cond,
            ),
        ],
        AttackSpec::EveCnot {
            targets,
            timing: TimingMode::Compliant,
        } => {
            let (reference, formula) = if spec.session.variant == ProtocolVariant::MeasureResend {
                (0.0, "0 (copies undone in transmission order)".to_string())
            } else {
                let p = cnot_detection_oracle(targets);
                (
                    p,
                    format!("1 - P(phi0) with {} lingering ancilla(s)", targets.len()),
                )
            };
            vec![Comparison::three_sigma(
                "detection per Action 4 round",
                &formula,
                reference,
                cond_flagged,
                cond,
            )]
        }
        AttackSpec::EveCnot {
            timing: TimingMode::BrokenOrdering,
            ..
        }
        | AttackSpec::EveDelay => vec![
            Comparison::exact("detection rate", "0", 0.0, flagged, attacked),
            Comparison::exact("both-SHARE bits recovered", "1", 1.0, recovered, share),
        ],
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport, HarnessError> {
    spec.validate()?;
    let rows = (0..spec.trials)
        .into_par_iter()
        .map(|i| run_trial(spec, i))
        .collect::<Result<Vec<_>, _>>()?;
    let comparisons = compare(spec, &rows);
    let report = ExperimentReport {
        spec: spec.clone(),
        aggregates: aggregate(&rows),
        pass: comparisons.iter().all(|c| c.pass),
        comparisons,
        trials: rows,
    };
    if let Some(out) = &spec.output {
        emit_report(&report, out.format, &out.path)?;
    }
    if let Some(path) = &spec.transcript {
        write_transcript(spec, 0, path)?;
    }
    Ok(report)
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match &self.gate {
            Some(g) => write!(
                f,
                "[{verdict}] {}: observed {:.6} ({}/{}), reference {} = {:.6}, 3σ window [{:.6}, {:.6}]",
                self.name, self.observed, self.successes, self.samples, self.formula, self.reference, g.lower, g.upper
            ),
            None => write!(
                f,
                "[{verdict}] {}: observed {:.6} ({}/{}), required exactly {}",
                self.name, self.observed, self.successes, self.samples, self.formula
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(
        attack: AttackSpec,
        variant: ProtocolVariant,
        compliant: bool,
        trials: usize,
    ) -> ExperimentSpec {
        let session = SessionConfig {
            variant,
            n_triplets: 64,
            announce_receipt_before_disclosure: compliant,
            seed: 1000,
            ..Default::default()
        };
        ExperimentSpec::new(session, attack, trials)
    }

    #[test]
    fn analytic_values() {
        assert_eq!(analytic_escape("dishonest-bob", 1).unwrap(), 0.75);
        assert_eq!(analytic_escape("eve-bell", 1).unwrap(), 0.625);
        assert_eq!(analytic_escape("eve-bell", 0).unwrap(), 1.0);
        assert_eq!(analytic_escape("dishonest-bob", 4).unwrap(), 0.31640625);
        assert_eq!(analytic_escape("eve-bell", 4).unwrap(), 0.152587890625);
        assert_eq!(analytic_escape("eve-bell", 2).unwrap(), 0.390625);
        assert!(matches!(
            analytic_escape("eve-cnot", 1),
            Err(HarnessError::NoAnalyticReference(_))
        ));
    }

    #[test]
    fn honest_experiment_passes() {
        let report = run_experiment(&spec(
            AttackSpec::Honest,
            ProtocolVariant::RandomizationBased,
            true,
            20,
        ))
        .unwrap();
        assert!(report.pass, "{:#?}", report.comparisons);
        assert_eq!(report.aggregates.mean_error_rate, [0.0; 4]);
        assert_eq!(report.trials.len(), 20);
        assert_eq!(report.trials[3].seed, 1003);
    }

    #[test]
    fn parameter_errors_are_distinct() {
        let bad = spec(
            AttackSpec::DishonestBob { positions: 17 },
            ProtocolVariant::RandomizationBased,
            true,
            1,
        );
        assert!(matches!(
            run_experiment(&bad),
            Err(HarnessError::InvalidParameter(_))
        ));
        let zero = spec(
            AttackSpec::Honest,
            ProtocolVariant::RandomizationBased,
            true,
            0,
        );
        assert!(matches!(
            run_experiment(&zero),
            Err(HarnessError::InvalidParameter(_))
        ));
        let delay = spec(
            AttackSpec::EveDelay,
            ProtocolVariant::MeasureResend,
            true,
            1,
        );
        assert!(matches!(
            run_experiment(&delay),
            Err(HarnessError::InvalidParameter(_))
        ));
        assert!(matches!(
            AttackSpec::from_label("eve-magic", 1, vec![], TimingMode::Compliant),
            Err(HarnessError::UnknownStrategy(_))
        ));
    }

    #[test]
    fn oracle_values() {
        assert!((cnot_detection_oracle(&[Party::Bob]) - 0.5).abs() < 1e-12);
        assert!((cnot_detection_oracle(&[Party::Charlie]) - 0.5).abs() < 1e-12);
        assert!((cnot_detection_oracle(&Party::BOTH) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn report_verdict_follows_rows() {
        let s = spec(
            AttackSpec::EveBell { positions: 2 },
            ProtocolVariant::RandomizationBased,
            true,
            400,
        );
        let report = run_experiment(&s).unwrap();
        assert_eq!(compare(&s, &report.trials), report.comparisons);
    }
}
