//! Alice's check measurements for dispatch cases 2-4.

use super::{ProtocolError, ALICE_QUBIT};
use crate::qsim::{MeasurementOutcome, StateVector};
use crate::states::{bell_basis, phi_basis, PHI_PLUS, PSI_PLUS};
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckResult {
    pub error_flag: bool,
    pub outcome: MeasurementOutcome,
}

fn bell_check(
    reg: &mut StateVector,
    reflected_qubit: usize,
    announced_bit: u8,
    rng: &mut impl Rng,
) -> Result<CheckResult, ProtocolError> {
    let outcome = reg.measure_in_basis(&bell_basis(), &[ALICE_QUBIT, reflected_qubit], rng)?;
    let expected = if announced_bit == 0 {
        PHI_PLUS
    } else {
        PSI_PLUS
    };
    Ok(CheckResult {
        error_flag: outcome.outcome_index != expected,
        outcome,
    })
}

/// Case 2: Bob measured, Charlie reflected. The (Alice, Charlie) pair must
/// be Φ⁺ if Bob announced 0 and Ψ⁺ if he announced 1.
pub fn alice_check_action2(
    reg: &mut StateVector,
    bob_bit: u8,
    rng: &mut impl Rng,
) -> Result<CheckResult, ProtocolError> {
    bell_check(reg, super::Party::Charlie.qubit(), bob_bit, rng)
}

/// Case 3, the mirror of case 2 on the (Alice, Bob) pair.
pub fn alice_check_action3(
    reg: &mut StateVector,
    charlie_bit: u8,
    rng: &mut impl Rng,
) -> Result<CheckResult, ProtocolError> {
    bell_check(reg, super::Party::Bob.qubit(), charlie_bit, rng)
}

/// Case 4: φ-basis measurement of the reassembled triplet; anything other
/// than φ0 is an error.
pub fn alice_check_action4(
    reg: &mut StateVector,
    rng: &mut impl Rng,
) -> Result<CheckResult, ProtocolError> {
    let outcome = reg.measure_in_basis(&phi_basis(), &[0, 1, 2], rng)?;
    Ok(CheckResult {
        error_flag: outcome.outcome_index != 0,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{seeded_rng, Gate};
    use crate::states::prepare_psi;

    fn collapse(qubit: usize, want: usize, seed: u64) -> StateVector {
        let mut rng = seeded_rng(seed);
        loop {
            let mut s = prepare_psi();
            if s.measure_computational(qubit, &mut rng)
                .unwrap()
                .outcome_index
                == want
            {
                return s;
            }
        }
    }

    #[test]
    fn honest_one_sided_checks_pass() {
        let mut rng = seeded_rng(21);
        for bit in 0..2u8 {
            for _ in 0..200 {
                let mut s = collapse(1, bit as usize, 1 + u64::from(bit));
                let r = alice_check_action2(&mut s, bit, &mut rng).unwrap();
                assert!(!r.error_flag);
                assert_eq!(
                    r.outcome.outcome_index,
                    if bit == 0 { PHI_PLUS } else { PSI_PLUS }
                );
                let mut s = collapse(2, bit as usize, 3 + u64::from(bit));
                assert!(
                    !alice_check_action3(&mut s, bit, &mut rng)
                        .unwrap()
                        .error_flag
                );
            }
        }
    }

    #[test]
    fn honest_triplet_always_phi0() {
        let mut rng = seeded_rng(22);
        for _ in 0..200 {
            let mut s = prepare_psi();
            let r = alice_check_action4(&mut s, &mut rng).unwrap();
            assert!(!r.error_flag);
            assert!((r.outcome.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_pair_fails_half_the_time() {
        // Both B and C measured: (A, C) is a computational product state.
        let mut rng = seeded_rng(23);
        let trials = 4000;
        let mut errors = 0;
        for _ in 0..trials {
            let mut s = prepare_psi();
            let b = s.measure_computational(1, &mut rng).unwrap().outcome_index as u8;
            s.measure_computational(2, &mut rng).unwrap();
            errors += usize::from(alice_check_action2(&mut s, b, &mut rng).unwrap().error_flag);
        }
        // 3σ = 3·√(4000/4) ≈ 95
        assert!((errors as f64 - 2000.0).abs() < 95.0, "errors = {errors}");
    }

    #[test]
    fn lingering_bob_ancilla_flags_phi_check() {
        // exact: P(φ0) of the reduced triplet equals 1/2
        let mut s = prepare_psi();
        let anc = s.extend_with_ancilla(0).unwrap();
        s.apply_gate(&Gate::cnot(), &[1, anc]).unwrap();
        let d = s.born_distribution(&phi_basis(), &[0, 1, 2]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12);
    }
}
