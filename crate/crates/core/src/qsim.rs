//! Exact pure-state simulation for small registers.
//!
//! Qubit 0 is the leftmost ket symbol and maps to the most significant bit of
//! the basis index, so `|q0 q1 q2⟩` lives at index `q0·4 + q1·2 + q2`. The
//! protocol registers put Alice at qubit 0, Bob at 1, Charlie at 2 and any
//! eavesdropper ancillas after that.
//!
//! Measurements never remove qubits: a measured qubit stays in the register as
//! a product factor.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt;
use thiserror::Error;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 6;

/// Tolerance for unitarity, orthonormality and normalization checks.
pub const TOLERANCE: f64 = 1e-10;

/// Deterministic generator used by every sampling operation.
pub type SimRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QsimError {
    #[error("register of {0} qubits is outside 1..={MAX_QUBITS}")]
    QubitCount(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("matrix of dimension {dim} cannot act on {targets} qubit(s)")]
    DimensionMismatch { dim: usize, targets: usize },
    #[error("qubit {qubit} out of range for a {num_qubits}-qubit register")]
    TargetOutOfRange { qubit: usize, num_qubits: usize },
    #[error("duplicate target qubit {0}")]
    DuplicateTarget(usize),
    #[error("basis vectors are not orthonormal (deviation {0:e})")]
    NotOrthonormal(f64),
    #[error("basis has {found} vectors, expected {expected}")]
    IncompleteBasis { found: usize, expected: usize },
    #[error("basis acts on {basis} qubit(s) but {targets} target(s) were given")]
    BasisDimension { basis: usize, targets: usize },
    #[error("cannot extend a {0}-qubit register")]
    CapacityExceeded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum BasisLabel {
    Computational,
    Bell,
    Phi,
    Custom,
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BasisLabel::Computational => "computational",
            BasisLabel::Bell => "bell",
            BasisLabel::Phi => "phi",
            BasisLabel::Custom => "custom",
        };
        f.write_str(s)
    }
}

/// Result of a projective measurement. The collapsed state is the register
/// the measurement was performed on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementOutcome {
    pub basis_label: BasisLabel,
    pub outcome_index: usize,
    pub probability: f64,
}

/// A square unitary acting on one or more qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    dim: usize,
    // row-major
    entries: Vec<Complex64>,
}

impl Gate {
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self, QsimError> {
        if !dim.is_power_of_two() || dim < 2 || entries.len() != dim * dim {
            return Err(QsimError::BadLength(entries.len()));
        }
        let gate = Gate { dim, entries };
        let dev = gate.unitarity_deviation();
        if dev > TOLERANCE {
            return Err(QsimError::NotUnitary(dev));
        }
        Ok(gate)
    }

    pub fn from_real(dim: usize, entries: &[f64]) -> Result<Self, QsimError> {
        Self::new(
            dim,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_real(2, &[h, h, h, -h]).expect("hadamard is unitary")
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).expect("X is unitary")
    }

    pub fn pauli_z() -> Self {
        Self::from_real(2, &[1.0, 0.0, 0.0, -1.0]).expect("Z is unitary")
    }

    /// Controlled-NOT with the first target as control.
    pub fn cnot() -> Self {
        #[rustfmt::skip]
        let m = [
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ];
        Self::from_real(4, &m).expect("CNOT is unitary")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim + col]
    }

    fn unitarity_deviation(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += self.entry(k, i).conj() * self.entry(k, j);
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((acc - expected).norm());
            }
        }
        worst
    }
}

/// Orthonormal basis of `2^num_qubits` vectors, each stored as plain
/// amplitudes over the measured subsystem.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    label: BasisLabel,
    name: String,
    num_qubits: usize,
    vectors: Vec<Vec<Complex64>>,
}

impl Basis {
    pub fn new(
        label: BasisLabel,
        name: impl Into<String>,
        vectors: Vec<StateVector>,
    ) -> Result<Self, QsimError> {
        let first = vectors.first().ok_or(QsimError::IncompleteBasis {
            found: 0,
            expected: 2,
        })?;
        let num_qubits = first.num_qubits();
        let expected = 1usize << num_qubits;
        if vectors.len() != expected {
            return Err(QsimError::IncompleteBasis {
                found: vectors.len(),
                expected,
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.num_qubits() != num_qubits) {
            return Err(QsimError::BasisDimension {
                basis: num_qubits,
                targets: v.num_qubits(),
            });
        }
        let vectors: Vec<Vec<Complex64>> = vectors.into_iter().map(|v| v.amps).collect();
        let mut worst: f64 = 0.0;
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate().skip(i) {
                let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let expected = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((ip - expected).norm());
            }
        }
        if worst > TOLERANCE {
            return Err(QsimError::NotOrthonormal(worst));
        }
        Ok(Basis {
            label,
            name: name.into(),
            num_qubits,
            vectors,
        })
    }

    pub fn computational(num_qubits: usize) -> Result<Self, QsimError> {
        let vectors = (0..1usize << num_qubits)
            .map(|k| StateVector::basis_state(num_qubits, k))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(BasisLabel::Computational, "computational", vectors)
    }

    pub fn label(&self) -> BasisLabel {
        self.label
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Basis vector `i` as a standalone state.
    pub fn vector(&self, i: usize) -> StateVector {
        StateVector {
            num_qubits: self.num_qubits,
            amps: self.vectors[i].clone(),
        }
    }
}

/// Spread table, complement indices and per-outcome projection amplitudes.
type Projections = (Vec<usize>, Vec<usize>, Vec<Vec<Complex64>>);

/// Pure state of `num_qubits` qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(num_qubits: usize) -> Result<Self, QsimError> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self, QsimError> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(QsimError::QubitCount(num_qubits));
        }
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(QsimError::TargetOutOfRange {
                qubit: index,
                num_qubits,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { num_qubits, amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, QsimError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QsimError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_QUBITS {
            return Err(QsimError::QubitCount(num_qubits));
        }
        let state = StateVector { num_qubits, amps };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > TOLERANCE {
            return Err(QsimError::NotNormalized(n));
        }
        Ok(state)
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(amps: &[f64]) -> Result<Self, QsimError> {
        Self::from_amplitudes(amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|⟨self|other⟩|²`; equal to 1 iff the states agree up to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if self.num_qubits != other.num_qubits {
            return 0.0;
        }
        self.inner(other).norm_sqr()
    }

    /// `self ⊗ other`, with `other` taking the higher qubit indices.
    pub fn tensor(&self, other: &StateVector) -> Result<Self, QsimError> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_QUBITS {
            return Err(QsimError::CapacityExceeded(self.num_qubits));
        }
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector {
            num_qubits: n,
            amps,
        })
    }

    /// Appends a computational-basis ancilla as the new highest qubit and
    /// returns its index.
    pub fn extend_with_ancilla(&mut self, value: u8) -> Result<usize, QsimError> {
        if self.num_qubits >= MAX_QUBITS {
            return Err(QsimError::CapacityExceeded(self.num_qubits));
        }
        let bit = usize::from(value & 1);
        let zero = Complex64::new(0.0, 0.0);
        let mut amps = vec![zero; self.amps.len() * 2];
        for (i, a) in self.amps.iter().enumerate() {
            amps[2 * i + bit] = *a;
        }
        self.amps = amps;
        self.num_qubits += 1;
        Ok(self.num_qubits - 1)
    }

    fn check_targets(&self, targets: &[usize]) -> Result<(), QsimError> {
        for (i, &q) in targets.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(QsimError::TargetOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if targets[..i].contains(&q) {
                return Err(QsimError::DuplicateTarget(q));
            }
        }
        Ok(())
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    /// For each sub-index `t` over `targets` (targets[0] most significant),
    /// the full-register mask with the corresponding bits set.
    fn spread_table(&self, targets: &[usize]) -> Vec<usize> {
        let k = targets.len();
        (0..1usize << k)
            .map(|t| {
                targets.iter().enumerate().fold(0, |acc, (j, &q)| {
                    if t >> (k - 1 - j) & 1 == 1 {
                        acc | self.bit_mask(q)
                    } else {
                        acc
                    }
                })
            })
            .collect()
    }

    fn rest_indices(&self, targets: &[usize]) -> impl Iterator<Item = usize> {
        let mask: usize = targets.iter().map(|&q| self.bit_mask(q)).sum();
        (0..self.amps.len()).filter(move |i| i & mask == 0)
    }

    /// Applies `gate` to `targets` (targets[0] is the most significant qubit
    /// of the gate's own index), identity elsewhere.
    pub fn apply_gate(&mut self, gate: &Gate, targets: &[usize]) -> Result<(), QsimError> {
        self.check_targets(targets)?;
        if gate.num_qubits() != targets.len() {
            return Err(QsimError::DimensionMismatch {
                dim: gate.dim(),
                targets: targets.len(),
            });
        }
        let spread = self.spread_table(targets);
        let dim = gate.dim();
        let mut local = vec![Complex64::new(0.0, 0.0); dim];
        let rests: Vec<usize> = self.rest_indices(targets).collect();
        for rest in rests {
            for (t, slot) in local.iter_mut().enumerate() {
                *slot = self.amps[rest | spread[t]];
            }
            for (row, &s) in spread.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, a) in local.iter().enumerate() {
                    acc += gate.entry(row, col) * a;
                }
                self.amps[rest | s] = acc;
            }
        }
        Ok(())
    }

    /// Projection amplitudes `⟨b_i ⊗ I|ψ⟩` indexed by outcome, then by the
    /// position of the complement index.
    fn projections(&self, basis: &Basis, targets: &[usize]) -> Result<Projections, QsimError> {
        self.check_targets(targets)?;
        if basis.num_qubits() != targets.len() {
            return Err(QsimError::BasisDimension {
                basis: basis.num_qubits(),
                targets: targets.len(),
            });
        }
        let spread = self.spread_table(targets);
        let rests: Vec<usize> = self.rest_indices(targets).collect();
        let proj = basis
            .vectors
            .iter()
            .map(|v| {
                rests
                    .iter()
                    .map(|&rest| {
                        v.iter()
                            .zip(&spread)
                            .map(|(c, &s)| c.conj() * self.amps[rest | s])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok((spread, rests, proj))
    }

    /// Exact outcome probabilities for a measurement of `targets` in `basis`.
    pub fn born_distribution(
        &self,
        basis: &Basis,
        targets: &[usize],
    ) -> Result<Vec<f64>, QsimError> {
        let (_, _, proj) = self.projections(basis, targets)?;
        Ok(proj
            .iter()
            .map(|p| p.iter().map(|a| a.norm_sqr()).sum())
            .collect())
    }

    /// Samples an outcome with Born probabilities and collapses the register.
    pub fn measure_in_basis(
        &mut self,
        basis: &Basis,
        targets: &[usize],
        rng: &mut impl Rng,
    ) -> Result<MeasurementOutcome, QsimError> {
        let (spread, rests, proj) = self.projections(basis, targets)?;
        let probs: Vec<f64> = proj
            .iter()
            .map(|p| p.iter().map(|a| a.norm_sqr()).sum())
            .collect();
        let index = sample_index(&probs, rng);
        let p = probs[index];
        let scale = 1.0 / p.sqrt();
        let zero = Complex64::new(0.0, 0.0);
        self.amps.iter_mut().for_each(|a| *a = zero);
        let v = &basis.vectors[index];
        for (r, &rest) in rests.iter().enumerate() {
            let coeff = proj[index][r] * scale;
            for (c, &s) in v.iter().zip(&spread) {
                self.amps[rest | s] = c * coeff;
            }
        }
        Ok(MeasurementOutcome {
            basis_label: basis.label(),
            outcome_index: index,
            probability: p,
        })
    }

    /// Single-qubit measurement in `{|0⟩, |1⟩}`.
    pub fn measure_computational(
        &mut self,
        target: usize,
        rng: &mut impl Rng,
    ) -> Result<MeasurementOutcome, QsimError> {
        self.check_targets(&[target])?;
        let mask = self.bit_mask(target);
        let p1: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let p0 = (1.0 - p1).max(0.0);
        let index = sample_index(&[p0, p1], rng);
        let p = if index == 1 { p1 } else { p0 };
        let scale = 1.0 / p.sqrt();
        for (i, a) in self.amps.iter_mut().enumerate() {
            if usize::from(i & mask != 0) == index {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(MeasurementOutcome {
            basis_label: BasisLabel::Computational,
            outcome_index: index,
            probability: p,
        })
    }

    /// Discards qubit `target` and replaces it with a fresh `|value⟩`.
    /// Returns the bit the discarded qubit would have shown.
    pub fn reset_qubit(
        &mut self,
        target: usize,
        value: u8,
        rng: &mut impl Rng,
    ) -> Result<u8, QsimError> {
        let seen = self.measure_computational(target, rng)?.outcome_index as u8;
        if seen != value & 1 {
            self.apply_gate(&Gate::pauli_x(), &[target])?;
        }
        Ok(seen)
    }

    /// Probability that `target` reads 1 in the computational basis.
    pub fn probability_one(&self, target: usize) -> Result<f64, QsimError> {
        self.check_targets(&[target])?;
        let mask = self.bit_mask(target);
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }
}

/// Draws an index from `probs`, never returning a zero-probability entry.
fn sample_index(probs: &[f64], rng: &mut impl Rng) -> usize {
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        last_nonzero = i;
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_nonzero
}
