//! Hadamard-test circuits and overlap estimation.
//!
//! The test circuit prepares an ancilla in |+⟩, applies `u` controlled on the
//! ancilla, and interferes the branches with a final Hadamard. Measuring the
//! ancilla gives Pr(0) = (1 + Re⟨0|u|0⟩)/2; inserting S† on the ancilla
//! before the final Hadamard swaps Re for Im. The ancilla is qubit 0 of every
//! emitted circuit.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::circuit::{controlled_naive, Circuit, Gate};
use crate::error::{Error, Result};
use crate::seed::child_seed;
use crate::sim::{apply, overlap_amplitude, sample_first_qubit, StateVector};
use crate::transpile::{control_circuit_on_lattice, control_with_ancillas};

/// Which quadrature of the overlap a single test circuit extracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapPart {
    Re,
    Im,
}

/// How the controlled version of the target circuit is realized.
///
/// `Naive` controls every gate directly. `Ancillas(s)` spreads the control
/// onto s GHZ copies so disjoint gate groups run in parallel. `Lattice(l1,
/// l2)` emits a circuit whose two-qubit gates respect l1 x l2 grid
/// connectivity (the ancilla occupies grid label 0; a path is the l2 = 1
/// case).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Construction {
    Naive,
    Ancillas { s: usize },
    Lattice { l1: usize, l2: usize },
}

impl Construction {
    /// Controlled-`u` with the control on qubit 0 and data qubits 1..=n.
    /// Extra work qubits (GHZ copies, idle grid cells) start and end in |0⟩.
    pub fn controlled(&self, u: &Circuit) -> Result<Circuit> {
        match *self {
            Construction::Naive => controlled_naive(u),
            Construction::Ancillas { s } => control_with_ancillas(u, s),
            Construction::Lattice { l1, l2 } => control_circuit_on_lattice(u, l1, l2),
        }
    }
}

impl std::fmt::Display for Construction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Construction::Naive => write!(f, "naive"),
            Construction::Ancillas { s } => write!(f, "ancillas(s={s})"),
            Construction::Lattice { l1, l2 } => write!(f, "lattice({l1}x{l2})"),
        }
    }
}

/// Result of estimating ⟨0|a† b|0⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapEstimate {
    /// Estimated overlap; exact when `shots_per_part` is 0.
    #[serde(with = "crate::io::complex_pair")]
    pub value: C64,
    /// Shots spent on each quadrature (0 means exact statevector mode).
    pub shots_per_part: u64,
    /// Root-sum-square of the per-quadrature binomial standard errors;
    /// 0 in exact mode.
    pub standard_error: f64,
    /// Master seed the per-quadrature seeds were derived from.
    pub seed: u64,
}

impl OverlapEstimate {
    /// The estimate rescaled into the unit disk. Sampling noise can push
    /// |value| past 1; display surfaces use this, solvers always consume the
    /// raw unbiased `value`.
    pub fn clamped(&self) -> C64 {
        let mag = self.value.norm();
        if mag > 1.0 {
            self.value / mag
        } else {
            self.value
        }
    }
}

/// Build the Hadamard-test circuit for `u`: H on the ancilla, controlled-u
/// via `construction`, S† on the ancilla when `part` is `Im`, H on the
/// ancilla. Measuring qubit 0 of the result on |0...0⟩ gives
/// Pr(0) = (1 + Re⟨0|u|0⟩)/2 or (1 + Im⟨0|u|0⟩)/2.
pub fn build_hadamard_test(
    u: &Circuit,
    part: OverlapPart,
    construction: &Construction,
) -> Result<Circuit> {
    let controlled = construction.controlled(u)?;
    let mut out = Circuit::empty(controlled.width());
    out.push(Gate::h(0))?;
    out.append(&controlled)?;
    if part == OverlapPart::Im {
        out.push(Gate::sdg(0))?;
    }
    out.push(Gate::h(0))?;
    Ok(out)
}

/// Estimate ⟨0|a† b|0⟩, the overlap of the states prepared by `a` and `b`.
///
/// With `shots = 0` the overlap is computed exactly from the statevector and
/// `construction` is not consulted. Otherwise each quadrature gets its own
/// test circuit and `shots` samples, drawn from seeds derived independently
/// from `seed`, and is estimated as 2·(zeros/shots) − 1.
pub fn estimate_overlap(
    a: &Circuit,
    b: &Circuit,
    shots: u64,
    seed: u64,
    construction: &Construction,
) -> Result<OverlapEstimate> {
    if a.width() != b.width() {
        return Err(Error::contract(format!(
            "overlap requires equal widths, got {} and {}",
            a.width(),
            b.width()
        )));
    }
    // ⟨0|a† b|0⟩ = ⟨0|U(a)† U(b)|0⟩: run b, then the inverse of a.
    let u = b.then(&a.inverse())?;
    if shots == 0 {
        // Identical preps overlap to exactly 1 by unitarity; return the
        // identity rather than its float-rounded simulation.
        let value = if a == b {
            C64::new(1.0, 0.0)
        } else {
            overlap_amplitude(&u)?
        };
        return Ok(OverlapEstimate {
            value,
            shots_per_part: 0,
            standard_error: 0.0,
            seed,
        });
    }
    let mut parts = [0.0f64; 2];
    let mut variance = 0.0f64;
    for (slot, (part, label)) in [(OverlapPart::Re, "re"), (OverlapPart::Im, "im")]
        .into_iter()
        .enumerate()
    {
        let test = build_hadamard_test(&u, part, construction)?;
        let state = apply(&test, &StateVector::zero_state(test.width())?)?;
        let counts = sample_first_qubit(&state, shots, child_seed(seed, label))?;
        let p_hat = counts.zeros as f64 / shots as f64;
        parts[slot] = 2.0 * p_hat - 1.0;
        // est = 2·p̂ − 1, so Var(est) = 4·p̂(1−p̂)/shots.
        variance += 4.0 * p_hat * (1.0 - p_hat) / shots as f64;
    }
    Ok(OverlapEstimate {
        value: C64::new(parts[0], parts[1]),
        shots_per_part: shots,
        standard_error: variance.sqrt(),
        seed,
    })
}
