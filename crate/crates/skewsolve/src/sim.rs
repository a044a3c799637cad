//! Exact statevector simulation with qubit 0 as the lowest bit of the
//! amplitude index, unitary extraction for small widths, and seeded
//! Bernoulli sampling of the first qubit.

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::numerics::{C64, CMat, CVec};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Binomial, Distribution};
use serde::Serialize;

/// Width guard for [`unitary_of`]; 2^12 columns is the largest extraction
/// the test oracles need.
pub const MAX_UNITARY_WIDTH: usize = 12;

/// Width guard for statevector application.
pub const MAX_STATE_WIDTH: usize = 24;

/// Normalized pure state over `width` qubits. Amplitude index bit k holds
/// qubit k, so qubit 0 is the lowest bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    width: usize,
    amplitudes: CVec,
}

impl StateVector {
    /// |0...0⟩ on `width` qubits.
    pub fn zero_state(width: usize) -> Result<StateVector> {
        StateVector::basis(width, 0)
    }

    /// Computational basis state |k⟩.
    pub fn basis(width: usize, k: usize) -> Result<StateVector> {
        if width == 0 || width > MAX_STATE_WIDTH {
            return Err(Error::resource(format!(
                "state width must be in 1..={MAX_STATE_WIDTH}, got {width}"
            )));
        }
        let dim = 1usize << width;
        if k >= dim {
            return Err(Error::contract(format!(
                "basis index {k} outside dimension {dim}"
            )));
        }
        let mut amplitudes = CVec::zeros(dim);
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(StateVector { width, amplitudes })
    }

    /// Build from raw amplitudes; the norm must be 1 within 1e-8.
    pub fn from_amplitudes(width: usize, amplitudes: CVec) -> Result<StateVector> {
        if width == 0 || width > MAX_STATE_WIDTH {
            return Err(Error::resource(format!(
                "state width must be in 1..={MAX_STATE_WIDTH}, got {width}"
            )));
        }
        if amplitudes.len() != 1usize << width {
            return Err(Error::contract(format!(
                "expected {} amplitudes, got {}",
                1usize << width,
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::contract(format!(
                "state norm {norm} is not 1 within 1e-8"
            )));
        }
        Ok(StateVector { width, amplitudes })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    /// Probability that measuring qubit 0 yields 0.
    pub fn prob_first_zero(&self) -> f64 {
        let mut p = 0.0;
        for (k, amp) in self.amplitudes.iter().enumerate() {
            if k & 1 == 0 {
                p += amp.norm_sqr();
            }
        }
        p.clamp(0.0, 1.0)
    }
}

fn apply_gate(amps: &mut CVec, width: usize, gate: &Gate) {
    let dim = amps.len();
    match gate.kind {
        GateKind::H | GateKind::S | GateKind::Sdg | GateKind::X | GateKind::R => {
            let u = gate.unitary2();
            let bit = 1usize << gate.qubits[0];
            for base in 0..dim {
                if base & bit != 0 {
                    continue;
                }
                let a0 = amps[base];
                let a1 = amps[base | bit];
                amps[base] = u[0][0] * a0 + u[0][1] * a1;
                amps[base | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        GateKind::CNOT => {
            let cbit = 1usize << gate.qubits[0];
            let tbit = 1usize << gate.qubits[1];
            for base in 0..dim {
                if base & cbit != 0 && base & tbit == 0 {
                    amps.swap_rows(base, base | tbit);
                }
            }
        }
        GateKind::SWAP => {
            let abit = 1usize << gate.qubits[0];
            let bbit = 1usize << gate.qubits[1];
            for base in 0..dim {
                if base & abit != 0 && base & bbit == 0 {
                    amps.swap_rows(base, base ^ abit ^ bbit);
                }
            }
        }
        GateKind::Toffoli => {
            let c1 = 1usize << gate.qubits[0];
            let c2 = 1usize << gate.qubits[1];
            let tbit = 1usize << gate.qubits[2];
            for base in 0..dim {
                if base & c1 != 0 && base & c2 != 0 && base & tbit == 0 {
                    amps.swap_rows(base, base | tbit);
                }
            }
        }
    }
    let _ = width;
}

/// Apply `c` to `s`, returning U(c)·s. Pure; widths must match.
pub fn apply(c: &Circuit, s: &StateVector) -> Result<StateVector> {
    if c.width() != s.width {
        return Err(Error::contract(format!(
            "circuit width {} does not match state width {}",
            c.width(),
            s.width
        )));
    }
    let mut amplitudes = s.amplitudes.clone();
    for layer in c.layers() {
        for gate in layer {
            apply_gate(&mut amplitudes, s.width, gate);
        }
    }
    Ok(StateVector {
        width: s.width,
        amplitudes,
    })
}

/// Full unitary of `c`, column k = U|k⟩. Guarded at width 12.
pub fn unitary_of(c: &Circuit) -> Result<CMat> {
    if c.width() == 0 || c.width() > MAX_UNITARY_WIDTH {
        return Err(Error::resource(format!(
            "unitary extraction limited to widths 1..={MAX_UNITARY_WIDTH}, got {}",
            c.width()
        )));
    }
    let dim = 1usize << c.width();
    let mut u = CMat::zeros(dim, dim);
    for k in 0..dim {
        let col = apply(c, &StateVector::basis(c.width(), k)?)?;
        u.column_mut(k).copy_from(col.amplitudes());
    }
    Ok(u)
}

/// ⟨0...0| U(c) |0...0⟩.
pub fn overlap_amplitude(c: &Circuit) -> Result<C64> {
    let out = apply(c, &StateVector::zero_state(c.width())?)?;
    Ok(out.amplitudes[0])
}

/// Outcome counts of repeated single-qubit measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShotResult {
    pub zeros: u64,
    pub ones: u64,
    pub seed: u64,
}

/// Measure qubit 0 of `s` `shots` times. zeros ~ Binomial(shots, p0) from a
/// generator seeded only by `seed`, so results are reproducible and calls
/// with distinct seeds are independent.
pub fn sample_first_qubit(s: &StateVector, shots: u64, seed: u64) -> Result<ShotResult> {
    if shots == 0 {
        return Err(Error::contract("sample_first_qubit requires shots >= 1"));
    }
    let p0 = s.prob_first_zero();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let binomial = Binomial::new(shots, p0)
        .map_err(|e| Error::numerical(format!("binomial setup failed: {e}")))?;
    let zeros = binomial.sample(&mut rng);
    Ok(ShotResult {
        zeros,
        ones: shots - zeros,
        seed,
    })
}
