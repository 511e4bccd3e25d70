//! Semi-quantum secret sharing over GHZ-type states.
//!
//! A quantum dealer (Alice) distributes three-qubit entangled states to two
//! classical parties (Bob and Charlie), who either measure in the
//! computational basis or send their qubit back. The crate simulates both
//! protocol variants exactly, runs the channel attacks that the security
//! argument considers, and measures how often each attack is caught.
//!
//! - [`qsim`]: pure-state simulator for registers of up to six qubits.
//! - [`states`]: the resource state and the Bell and φ check bases.
//! - [`protocol`]: one complete session, step by step.
//! - [`adversary`]: channel interceptors and their scoring.
//! - [`harness`]: Monte Carlo experiments, reports and the CLI backend.

pub mod adversary;
pub mod harness;
pub mod protocol;
pub mod qsim;
pub mod states;
