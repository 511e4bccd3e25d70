//! The GHZ-type resource state and the measurement bases built on it.

use crate::qsim::{Basis, BasisLabel, Gate, StateVector};
use std::f64::consts::FRAC_1_SQRT_2;

/// Index of Φ⁺ in [`bell_basis`].
pub const PHI_PLUS: usize = 0;
/// Index of Φ⁻ in [`bell_basis`].
pub const PHI_MINUS: usize = 1;
/// Index of Ψ⁺ in [`bell_basis`].
pub const PSI_PLUS: usize = 2;
/// Index of Ψ⁻ in [`bell_basis`].
pub const PSI_MINUS: usize = 3;

fn real(amps: &[f64]) -> StateVector {
    StateVector::from_real(amps).expect("hard-coded state is normalized")
}

/// `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> StateVector {
    real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2])
}

/// Input of the preparation circuit, `|0⟩ ⊗ Φ⁺`.
pub fn circuit_input() -> StateVector {
    StateVector::zero(1)
        .and_then(|z| z.tensor(&phi_plus()))
        .expect("3 qubits fit")
}

/// State after the Hadamard on qubit 0, `(|0⟩Φ⁺ + |1⟩Φ⁺)/√2`.
pub fn after_hadamard() -> StateVector {
    let mut s = circuit_input();
    s.apply_gate(&Gate::hadamard(), &[0])
        .expect("qubit 0 exists");
    s
}

/// The three-qubit resource state
/// `(|0⟩(|00⟩+|11⟩)/√2 + |1⟩(|01⟩+|10⟩)/√2)/√2`, produced by the circuit
/// `CNOT(0→1) · (H ⊗ I ⊗ I) · (|0⟩ ⊗ Φ⁺)`.
pub fn prepare_psi() -> StateVector {
    let mut s = after_hadamard();
    s.apply_gate(&Gate::cnot(), &[0, 1])
        .expect("qubits 0,1 exist");
    s
}

/// `(|000⟩ + |111⟩)/√2`.
pub fn ghz() -> StateVector {
    let mut amps = [0.0; 8];
    amps[0] = FRAC_1_SQRT_2;
    amps[7] = FRAC_1_SQRT_2;
    real(&amps)
}

/// Applies `H` to every qubit.
pub fn hadamard_all(state: &StateVector) -> StateVector {
    let mut s = state.clone();
    let h = Gate::hadamard();
    for q in 0..s.num_qubits() {
        s.apply_gate(&h, &[q]).expect("qubit in range");
    }
    s
}

/// `(Φ⁺, Φ⁻, Ψ⁺, Ψ⁻)`.
pub fn bell_basis() -> Basis {
    let h = FRAC_1_SQRT_2;
    Basis::new(
        BasisLabel::Bell,
        "bell",
        vec![
            real(&[h, 0.0, 0.0, h]),
            real(&[h, 0.0, 0.0, -h]),
            real(&[0.0, h, h, 0.0]),
            real(&[0.0, h, -h, 0.0]),
        ],
    )
    .expect("Bell basis is orthonormal")
}

/// The eight-vector three-qubit check basis. Vector `k` has the form
/// `(|x⟩(|00⟩ ± |11⟩)/√2 ± |x̄⟩(|01⟩ ± |10⟩)/√2)/√2` where bit 2 of `k`
/// selects `x`, bit 1 the sign inside both pairs and bit 0 the relative sign
/// between the two halves. Vector 0 is the resource state itself.
pub fn phi_basis() -> Basis {
    let vectors = (0..8usize)
        .map(|k| {
            let x = k >> 2 & 1;
            let inner = if k >> 1 & 1 == 1 { -1.0 } else { 1.0 };
            let outer = if k & 1 == 1 { -1.0 } else { 1.0 };
            let mut amps = [0.0; 8];
            // |x⟩(|00⟩ + inner|11⟩)/2
            amps[x << 2] = 0.5;
            amps[x << 2 | 0b11] = 0.5 * inner;
            // outer |x̄⟩(|01⟩ + inner|10⟩)/2
            let xb = 1 - x;
            amps[xb << 2 | 0b01] = 0.5 * outer;
            amps[xb << 2 | 0b10] = 0.5 * outer * inner;
            real(&amps)
        })
        .collect();
    Basis::new(BasisLabel::Phi, "phi", vectors).expect("phi basis is orthonormal")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn amp_close(s: &StateVector, k: usize, re: f64) -> bool {
        (s.amplitude(k) - Complex64::new(re, 0.0)).norm() < 1e-12
    }

    #[test]
    fn psi_amplitudes() {
        let psi = prepare_psi();
        for k in 0..8 {
            let expected = if [0b000, 0b011, 0b101, 0b110].contains(&k) {
                0.5
            } else {
                0.0
            };
            assert!(amp_close(&psi, k, expected), "index {k}");
        }
    }

    #[test]
    fn intermediate_after_hadamard() {
        let s = after_hadamard();
        // (|0⟩Φ⁺ + |1⟩Φ⁺)/√2: amplitude 1/2 on 000, 011, 100, 111
        for k in 0..8 {
            let expected = if [0b000, 0b011, 0b100, 0b111].contains(&k) {
                0.5
            } else {
                0.0
            };
            assert!(amp_close(&s, k, expected), "index {k}");
        }
    }

    #[test]
    fn psi_is_local_unitary_ghz() {
        assert!(hadamard_all(&prepare_psi()).fidelity(&ghz()) >= 1.0 - 1e-12);
    }

    #[test]
    fn support_obeys_xor_law() {
        let psi = prepare_psi();
        for k in 0..8usize {
            if psi.amplitude(k).norm() > 1e-12 {
                let (a, b, c) = (k >> 2 & 1, k >> 1 & 1, k & 1);
                assert_eq!(a, b ^ c);
            }
        }
    }

    #[test]
    fn bell_basis_order_and_gram() {
        let b = bell_basis();
        assert_eq!(b.vector(PHI_PLUS), phi_plus());
        for i in 0..4 {
            for j in 0..4 {
                let ip = b.vector(i).inner(&b.vector(j));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn psi_regroups_over_bob_charlie() {
        // Projecting (B,C) onto Φ⁺ leaves Alice in |0⟩, onto Ψ⁺ leaves |1⟩.
        let psi = prepare_psi();
        let d = psi.born_distribution(&bell_basis(), &[1, 2]).unwrap();
        assert!((d[PHI_PLUS] - 0.5).abs() < 1e-12);
        assert!((d[PSI_PLUS] - 0.5).abs() < 1e-12);
        assert!(d[PHI_MINUS].abs() < 1e-12 && d[PSI_MINUS].abs() < 1e-12);
        let mut rng = crate::qsim::seeded_rng(11);
        for _ in 0..20 {
            let mut s = psi.clone();
            let out = s
                .measure_in_basis(&bell_basis(), &[1, 2], &mut rng)
                .unwrap();
            let alice_one = s.probability_one(0).unwrap();
            let expected = if out.outcome_index == PHI_PLUS {
                0.0
            } else {
                1.0
            };
            assert!((alice_one - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn phi_basis_matches_printed_vectors() {
        let phi = phi_basis();
        assert!(phi.vector(0).fidelity(&prepare_psi()) >= 1.0 - 1e-12);
        assert!(phi.vector(0).inner(&prepare_psi()).re > 1.0 - 1e-12);
        let v4 = phi.vector(4);
        for k in 0..8 {
            let expected = if [0b100, 0b111, 0b001, 0b010].contains(&k) {
                0.5
            } else {
                0.0
            };
            assert!(amp_close(&v4, k, expected), "index {k}");
        }
        // φ3 = (|0⟩(|00⟩−|11⟩) − |1⟩(|01⟩−|10⟩))/2
        let v3 = phi.vector(3);
        for (k, e) in [(0b000, 0.5), (0b011, -0.5), (0b101, -0.5), (0b110, 0.5)] {
            assert!(amp_close(&v3, k, e), "index {k}");
        }
        // φ5 = (|1⟩(|00⟩+|11⟩) − |0⟩(|01⟩+|10⟩))/2
        let v5 = phi.vector(5);
        for (k, e) in [(0b100, 0.5), (0b111, 0.5), (0b001, -0.5), (0b010, -0.5)] {
            assert!(amp_close(&v5, k, e), "index {k}");
        }
    }

    #[test]
    fn phi_basis_is_orthonormal_and_complete() {
        let phi = phi_basis();
        for i in 0..8 {
            for j in 0..8 {
                let ip = phi.vector(i).inner(&phi.vector(j));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - expected).norm() < 1e-10);
            }
        }
        // Σ |φ_i⟩⟨φ_i| = I
        for r in 0..8 {
            for c in 0..8 {
                let sum: Complex64 = (0..8)
                    .map(|i| {
                        let v = phi.vector(i);
                        v.amplitude(r) * v.amplitude(c).conj()
                    })
                    .sum();
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((sum - expected).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn phi_distribution_examples() {
        let phi = phi_basis();
        let d = prepare_psi().born_distribution(&phi, &[0, 1, 2]).unwrap();
        assert!((d[0] - 1.0).abs() < 1e-12);
        assert!(d[1..].iter().all(|p| p.abs() < 1e-12));
        // |0⟩_A ⊗ Φ⁺_BC: ⟨φ0|0,Φ⁺⟩ = 2·(1/2)(1/√2) = 1/√2
        let d = circuit_input().born_distribution(&phi, &[0, 1, 2]).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12);
    }
}
