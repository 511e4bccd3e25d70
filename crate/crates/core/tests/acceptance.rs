//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use sqss::adversary::TimingMode;
use sqss::harness::{
    cnot_detection_oracle, lone_ancilla_leakage, run_experiment, AttackSpec, Comparison,
    ExperimentReport, ExperimentSpec,
};
use sqss::protocol::{dispatch_from_orders, AliceAction, Party, ProtocolVariant, SessionConfig};
use sqss::qsim::{Gate, StateVector};
use sqss::states::{hadamard_all, phi_basis, prepare_psi};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

const ATTACK_TRIPLETS: usize = 64;

fn session(variant: ProtocolVariant, n: usize, compliant: bool, seed: u64) -> SessionConfig {
    SessionConfig {
        variant,
        n_triplets: n,
        announce_receipt_before_disclosure: compliant,
        seed,
        ..SessionConfig::default()
    }
}

fn experiment(
    variant: ProtocolVariant,
    attack: AttackSpec,
    n: usize,
    compliant: bool,
    trials: usize,
    seed: u64,
) -> Result<ExperimentReport, String> {
    let spec = ExperimentSpec::new(session(variant, n, compliant, seed), attack, trials);
    run_experiment(&spec).map_err(|e| e.to_string())
}

fn gate_summary(tag: &str, comparisons: &[Comparison]) -> Outcome {
    let text: Vec<String> = comparisons
        .iter()
        .map(|c| {
            format!(
                "{tag} {}: {:.5} vs {:.5} ({}/{})",
                c.name, c.observed, c.reference, c.successes, c.samples
            )
        })
        .collect();
    if comparisons.iter().all(|c| c.pass) {
        Ok(text.join("; "))
    } else {
        let failed: Vec<String> = comparisons
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.to_string())
            .collect();
        Err(format!("{tag}: {}", failed.join("; ")))
    }
}

fn state_fidelity() -> Outcome {
    let psi = prepare_psi();
    let support = [0b000, 0b011, 0b101, 0b110];
    for (i, a) in psi.amplitudes().iter().enumerate() {
        let want = if support.contains(&i) { 0.5 } else { 0.0 };
        if (a.re - want).abs() > 1e-12 || a.im.abs() > 1e-12 {
            return Err(format!("amplitude {i:03b} = {a}"));
        }
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let ghz =
        StateVector::from_real(&[s, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, s]).map_err(|e| e.to_string())?;
    let f = hadamard_all(&psi).fidelity(&ghz);
    if f < 1.0 - 1e-12 {
        return Err(format!("GHZ fidelity {f}"));
    }
    Ok(format!("support exact, GHZ fidelity {f:.15}"))
}

fn basis_correctness() -> Outcome {
    let basis = phi_basis();
    let vs: Vec<StateVector> = (0..basis.len()).map(|i| basis.vector(i)).collect();
    if vs.len() != 8 {
        return Err(format!("{} vectors", vs.len()));
    }
    let mut worst_gram: f64 = 0.0;
    for (i, u) in vs.iter().enumerate() {
        for (j, v) in vs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            worst_gram = worst_gram.max((u.inner(v) - want).norm());
        }
    }
    // Completeness: Σ_k |v_k⟩⟨v_k| = I entrywise.
    let mut worst_res: f64 = 0.0;
    for r in 0..8 {
        for c in 0..8 {
            let sum: num_complex::Complex64 = vs
                .iter()
                .map(|v| v.amplitude(r) * v.amplitude(c).conj())
                .sum();
            let want = if r == c { 1.0 } else { 0.0 };
            worst_res = worst_res.max((sum - want).norm());
        }
    }
    let f0 = vs[0].fidelity(&prepare_psi());
    if worst_gram > 1e-10 || worst_res > 1e-10 || (f0 - 1.0).abs() > 1e-10 {
        return Err(format!(
            "gram {worst_gram:e}, resolution {worst_res:e}, phi0 fidelity {f0}"
        ));
    }
    Ok(format!(
        "gram dev {worst_gram:.1e}, resolution dev {worst_res:.1e}, phi0 fidelity {f0:.12}"
    ))
}

fn honest_completeness() -> Outcome {
    let n = 2048;
    let trials = 100;
    // Secret length is floor(K/2) with K ~ Bin(N, 1/4) SHARE rounds.
    let sigma = (3.0 * n as f64).sqrt() / 8.0;
    let center = n as f64 / 8.0;
    let mut notes = Vec::new();
    for variant in [
        ProtocolVariant::RandomizationBased,
        ProtocolVariant::MeasureResend,
    ] {
        let report = experiment(variant, AttackSpec::Honest, n, true, trials, 3000)?;
        for row in &report.trials {
            let dev = (row.secret_len as f64 - center).abs();
            if row.err_case != [0.0; 4] || row.aborted || !row.agree || dev > 3.0 * sigma {
                return Err(format!("{variant} trial {}: {row:?}", row.trial));
            }
        }
        gate_summary(&variant.to_string(), &report.comparisons)?;
        notes.push(format!(
            "{variant}: mean secret {:.2} (N/8 = {center}, 3σ = {:.1})",
            report.aggregates.mean_secret_len,
            3.0 * sigma
        ));
    }
    Ok(notes.join("; "))
}

fn sweep(build: fn(usize) -> AttackSpec, values: &[usize], seed: u64) -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for &k in values {
        let report = experiment(
            ProtocolVariant::RandomizationBased,
            build(k),
            ATTACK_TRIPLETS,
            true,
            20_000,
            seed + k as u64,
        )?;
        match gate_summary(&format!("k={k}"), &report.comparisons) {
            Ok(s) => notes.push(s),
            Err(s) => failures.push(s),
        }
    }
    if failures.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(failures.join("; "))
    }
}

fn broken_ordering() -> Outcome {
    let cnot = experiment(
        ProtocolVariant::RandomizationBased,
        AttackSpec::EveCnot {
            targets: Party::BOTH.to_vec(),
            timing: TimingMode::BrokenOrdering,
        },
        ATTACK_TRIPLETS,
        false,
        1000,
        6000,
    )?;
    let delay = experiment(
        ProtocolVariant::MeasureResend,
        AttackSpec::EveDelay,
        ATTACK_TRIPLETS,
        false,
        1000,
        6500,
    )?;
    let a = gate_summary("cnot", &cnot.comparisons);
    let b = gate_summary("delay", &delay.comparisons);
    match (a, b) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{:?}; {:?}", a, b)),
    }
}

/// P(φ0) for ψ with Bob's qubit copied onto a fresh ancilla, by direct
/// summation over the ancilla value.
fn lone_bob_ancilla_reference() -> f64 {
    let psi: [f64; 8] = [0.5, 0.0, 0.0, 0.5, 0.0, 0.5, 0.5, 0.0];
    (0..2)
        .map(|e| {
            let overlap: f64 = (0..8)
                .filter(|i| (i >> 1) & 1 == e)
                .map(|i| psi[i] * psi[i])
                .sum();
            overlap * overlap
        })
        .sum()
}

fn compliant_ordering() -> Outcome {
    let p_phi0 = lone_bob_ancilla_reference();
    let oracle = cnot_detection_oracle(&[Party::Bob]);
    let mut s = prepare_psi();
    let anc = s.extend_with_ancilla(0).map_err(|e| e.to_string())?;
    s.apply_gate(&Gate::cnot(), &[1, anc])
        .map_err(|e| e.to_string())?;
    let born = s
        .born_distribution(&phi_basis(), &[0, 1, 2])
        .map_err(|e| e.to_string())?;
    let values = [1.0 - p_phi0, 1.0 - born[0], oracle];
    if values.iter().any(|v| (v - 0.5).abs() > 1e-12) {
        return Err(format!(
            "oracle mismatch: direct, born, harness = {values:?}"
        ));
    }
    let report = experiment(
        ProtocolVariant::RandomizationBased,
        AttackSpec::EveCnot {
            targets: vec![Party::Bob],
            timing: TimingMode::Compliant,
        },
        ATTACK_TRIPLETS,
        true,
        20_000,
        7000,
    )?;
    gate_summary("bob ancilla", &report.comparisons)
}

fn zero_leakage() -> Outcome {
    let r = lone_ancilla_leakage(100_000, 8000).map_err(|e| e.to_string())?;
    let text = format!(
        "I = {:.2e} bits over {} pairs, counts {:?}",
        r.mutual_information, r.samples, r.counts
    );
    if r.mutual_information <= 1e-3 {
        Ok(text)
    } else {
        Err(text)
    }
}

fn worked_example() -> Outcome {
    let actions =
        dispatch_from_orders(8, &[4, 7, 3, 1], &[6, 4, 2, 7]).map_err(|e| e.to_string())?;
    let at = |a: AliceAction| -> Vec<usize> { (1..=8).filter(|&p| actions[p - 1] == a).collect() };
    let got = [
        at(AliceAction::Action1),
        at(AliceAction::Action2),
        at(AliceAction::Action3),
        at(AliceAction::Action4),
    ];
    let want = [vec![5, 8], vec![2, 6], vec![1, 3], vec![4, 7]];
    if got == want {
        Ok(format!("{got:?}"))
    } else {
        Err(format!("got {got:?}, want {want:?}"))
    }
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_sqss");
    let mut outputs = Vec::new();
    for format in ["json", "csv"] {
        let mut copies = Vec::new();
        for copy in 0..2 {
            let path = dir.path().join(format!("report{copy}.{format}"));
            let status = Command::new(bin)
                .args([
                    "run",
                    "--attack",
                    "eve-bell",
                    "--positions",
                    "2",
                    "--trials",
                    "500",
                    "--seed",
                    "42",
                ])
                .args(["--format", format, "--out"])
                .arg(&path)
                .stderr(std::process::Stdio::null())
                .status()
                .map_err(|e| e.to_string())?;
            if !status.success() {
                return Err(format!("sqss run exited with {status}"));
            }
            copies.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        if copies[0] != copies[1] {
            return Err(format!("{format} reports differ"));
        }
        outputs.push(format!("{format} {} bytes identical", copies[0].len()));
    }
    Ok(outputs.join(", "))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let minutes = |m: u64| Duration::from_secs(60 * m);
    let criteria = [
        Criterion {
            id: 1,
            name: "state fidelity",
            budget: Duration::from_secs(1),
            run: state_fidelity,
        },
        Criterion {
            id: 2,
            name: "phi basis correctness",
            budget: Duration::from_secs(1),
            run: basis_correctness,
        },
        Criterion {
            id: 3,
            name: "honest completeness",
            budget: minutes(2),
            run: honest_completeness,
        },
        Criterion {
            id: 4,
            name: "dishonest Bob escape (3/4)^l",
            budget: minutes(10),
            run: || {
                sweep(
                    |l| AttackSpec::DishonestBob { positions: l },
                    &[1, 2, 4, 8],
                    4000,
                )
            },
        },
        Criterion {
            id: 5,
            name: "Bell-measuring Eve escape (5/8)^m",
            budget: minutes(10),
            run: || sweep(|m| AttackSpec::EveBell { positions: m }, &[1, 2, 4], 5000),
        },
        Criterion {
            id: 6,
            name: "broken ordering: undetected, full recovery",
            budget: minutes(2),
            run: broken_ordering,
        },
        Criterion {
            id: 7,
            name: "compliant ordering: CNOT detection oracle",
            budget: minutes(5),
            run: compliant_ordering,
        },
        Criterion {
            id: 8,
            name: "lone ancilla leakage",
            budget: minutes(2),
            run: zero_leakage,
        },
        Criterion {
            id: 9,
            name: "worked dispatch example",
            budget: Duration::from_secs(1),
            run: worked_example,
        },
        Criterion {
            id: 10,
            name: "byte-identical reports",
            budget: minutes(1),
            run: reproducibility,
        },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let (verdict, detail) = match (&outcome, in_budget) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Ok(d), false) => ("FAIL", format!("over budget {:?}: {d}", c.budget)),
            (Err(d), _) => ("FAIL", d.clone()),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "[{verdict}] criterion {}: {} ({:.2?}) {detail}",
            c.id, c.name, elapsed
        );
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
