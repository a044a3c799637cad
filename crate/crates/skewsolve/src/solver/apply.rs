//! Applications of a solved coefficient vector: inner products against
//! reference states and observable expectations, both read out through
//! further Hadamard tests instead of reconstructing y = Σ s_i|a_i⟩.
//!
//! `shots = 0` selects exact statevector expectations; any other count
//! draws that many samples per quadrature of every estimated overlap, with
//! the reference controlled construction.

use crate::error::{Error, Result};
use crate::hadamard::{estimate_overlap, Construction};
use crate::numerics::{CVec, C64};
use crate::seed::child_seed;
use crate::solver::gram::shared_width;
use crate::solver::types::{ColumnOracle, ObservableSpec};

/// ⟨v|y⟩ for y = Σ_i s_i|a_i⟩, as Σ_i s_i × (estimated ⟨v|a_i⟩).
///
/// Only the prepared state of `v` enters; its stored norm is ignored, since
/// the inner product is taken against the unit reference state.
pub fn inner_product_with_state(
    s: &CVec,
    columns: &[ColumnOracle],
    v: &ColumnOracle,
    shots: u64,
    seed: u64,
) -> Result<C64> {
    let width = shared_width("inner_product", columns)?;
    v.validate()?;
    if v.prep.width() != width {
        return Err(Error::contract(format!(
            "reference state has width {}, columns have width {width}",
            v.prep.width()
        )));
    }
    if s.len() != columns.len() {
        return Err(Error::contract(format!(
            "coefficient vector has {} entries, instance has {} columns",
            s.len(),
            columns.len()
        )));
    }
    let mut total = C64::new(0.0, 0.0);
    for (i, col) in columns.iter().enumerate() {
        let est = estimate_overlap(
            &v.prep,
            &col.prep,
            shots,
            child_seed(seed, &format!("ip:{i}")),
            &Construction::Naive,
        )?;
        total += s[i] * est.value;
    }
    Ok(total)
}

/// y†Hy for y = Σ_i s_i|a_i⟩ and H = Σ_j γ_j H_j, as the real part of
/// Σ_{ijk} s_i* γ_j s_k × (estimated ⟨a_i|H_j|a_k⟩), together with the
/// imaginary residue that was discarded (0 for exactly Hermitian data).
pub fn observable_expectation_detailed(
    s: &CVec,
    columns: &[ColumnOracle],
    obs: &ObservableSpec,
    shots: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let width = shared_width("observable", columns)?;
    obs.validate()?;
    if obs.terms[0].circuit.width() != width {
        return Err(Error::contract(format!(
            "observable terms have width {}, columns have width {width}",
            obs.terms[0].circuit.width()
        )));
    }
    if s.len() != columns.len() {
        return Err(Error::contract(format!(
            "coefficient vector has {} entries, instance has {} columns",
            s.len(),
            columns.len()
        )));
    }
    let mut total = C64::new(0.0, 0.0);
    for (i, col_i) in columns.iter().enumerate() {
        for (j, term) in obs.terms.iter().enumerate() {
            for (k, col_k) in columns.iter().enumerate() {
                // ⟨a_i|H_j|a_k⟩: prepare a_k, apply H_j, overlap with a_i.
                let applied = col_k.prep.then(&term.circuit)?;
                let est = estimate_overlap(
                    &col_i.prep,
                    &applied,
                    shots,
                    child_seed(seed, &format!("obs:{i}:{j}:{k}")),
                    &Construction::Naive,
                )?;
                total += s[i].conj() * s[k] * est.value * term.gamma;
            }
        }
    }
    Ok((total.re, total.im))
}

/// y†Hy as a real number; see `observable_expectation_detailed` for the
/// discarded imaginary residue.
pub fn observable_expectation(
    s: &CVec,
    columns: &[ColumnOracle],
    obs: &ObservableSpec,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    observable_expectation_detailed(s, columns, obs, shots, seed).map(|(re, _)| re)
}
