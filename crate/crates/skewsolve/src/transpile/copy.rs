//! Logarithmic-depth CNOT fan-out circuits.
//!
//! [`copy_circuit`] works on targets in arbitrary states (adds the source
//! bit into every target) at depth exactly 2⌈log₂ n⌉ − 1. [`ghz_copy`] is
//! the faster doubling tree, valid only when the targets start in |0⟩, at
//! depth ⌈log₂ s⌉.

use super::ceil_log2;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// The parallel row-addition schedule on 2^L rows: step list, each step a
/// set of (source row, target row) additions. Builds the matrix whose first
/// row is all ones (parity collection); the fan-out circuit is its
/// transpose.
fn addrow_schedule(l: u32) -> Vec<Vec<(usize, usize)>> {
    let n = 1usize << l;
    let mut steps = Vec::new();
    // Ascending phase, skipping every addition targeting the first row.
    for k in 1..l {
        let mut ops = Vec::new();
        for j in 0..n >> k {
            if j == 0 {
                continue;
            }
            ops.push(((1 << (k - 1)) * (2 * j + 1), (1 << k) * j));
        }
        steps.push(ops);
    }
    // Descending phase, first-row additions included.
    for k in (1..=l).rev() {
        let mut ops = Vec::new();
        for j in 0..n >> k {
            ops.push(((1 << (k - 1)) * (2 * j + 1), (1 << k) * j));
        }
        steps.push(ops);
    }
    steps
}

/// CNOT circuit computing (x₀, x₀⊕x₁, …, x₀⊕x_{n−1}) on any basis input,
/// with depth exactly 2⌈log₂ n⌉ − 1 under unit costs. Targets may hold
/// arbitrary values (the source bit is XOR-ed in, nothing is overwritten).
///
/// Built as the transpose of the parallel row-addition schedule (steps
/// reversed, each addition's control and target exchanged). For n short of
/// a power of two, labels are dropped largest-first except those on the
/// critical dependency chain {2^L − 2^i} ∪ {0}; the kept set stays closed
/// under the parent map (clear lowest set bit), which preserves both the
/// fan-out semantics and the exact depth.
pub fn copy_circuit(n: usize) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::contract("copy circuit needs at least 2 qubits"));
    }
    let l = ceil_log2(n as u64) as u32;
    let full = 1usize << l;

    let mut keep = vec![true; full];
    let mut chain = vec![false; full];
    chain[0] = true;
    for i in 0..l {
        chain[full - (1 << i)] = true;
    }
    let mut to_drop = full - n;
    for label in (0..full).rev() {
        if to_drop == 0 {
            break;
        }
        if !chain[label] {
            keep[label] = false;
            to_drop -= 1;
        }
    }
    let mut relabel = vec![usize::MAX; full];
    let mut next = 0;
    for (label, &kept) in keep.iter().enumerate() {
        if kept {
            relabel[label] = next;
            next += 1;
        }
    }

    let mut circuit = Circuit::empty(n);
    for step in addrow_schedule(l).iter().rev() {
        let gates: Vec<Gate> = step
            .iter()
            .filter(|&&(src, tgt)| keep[src] && keep[tgt])
            .map(|&(src, tgt)| Gate::cnot(relabel[tgt], relabel[src]))
            .collect();
        if !gates.is_empty() {
            circuit.push_layer(gates)?;
        }
    }
    Ok(circuit)
}

/// Doubling fan-out: copies qubit 0's bit into qubits 1..s, which must
/// start in |0⟩, at depth ⌈log₂ s⌉. Each round every qubit holding the bit
/// seeds one fresh target.
pub fn ghz_copy(s: usize) -> Result<Circuit> {
    if s == 0 {
        return Err(Error::contract("ghz copy needs at least 1 qubit"));
    }
    let mut circuit = Circuit::empty(s);
    let mut holders = 1usize;
    while holders < s {
        let seeds = holders.min(s - holders);
        let layer: Vec<Gate> = (0..seeds)
            .map(|i| Gate::cnot(i, holders + i))
            .collect();
        circuit.push_layer(layer)?;
        holders += seeds;
    }
    Ok(circuit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateCostModel;

    /// GF(2) tracking: CNOT circuits act linearly on basis states.
    fn cnot_matrix(c: &Circuit) -> Vec<Vec<bool>> {
        let n = c.width();
        let mut m: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j).collect()).collect();
        for gate in c.gates() {
            assert_eq!(gate.kind, crate::circuit::GateKind::CNOT);
            let (ctrl, tgt) = (gate.qubits[0], gate.qubits[1]);
            for col in 0..n {
                m[tgt][col] ^= m[ctrl][col];
            }
        }
        m
    }

    #[test]
    fn exact_depth_and_semantics() {
        let unit = GateCostModel::unit();
        for n in 2..=64usize {
            let c = copy_circuit(n).unwrap();
            let expected = 2 * ceil_log2(n as u64) - 1;
            assert_eq!(c.depth(&unit), expected, "depth at n={n}");
            let m = cnot_matrix(&c);
            for i in 0..n {
                for j in 0..n {
                    let want = i == j || j == 0;
                    assert_eq!(m[i][j], want, "entry ({i},{j}) at n={n}");
                }
            }
        }
    }

    #[test]
    fn two_qubits_single_gate() {
        let c = copy_circuit(2).unwrap();
        assert_eq!(c.num_gates(), 1);
        assert_eq!(c.depth(&GateCostModel::unit()), 1);
    }

    #[test]
    fn ghz_depth() {
        for s in 1..=33usize {
            let c = ghz_copy(s).unwrap();
            assert_eq!(c.depth(&GateCostModel::unit()), ceil_log2(s as u64));
        }
    }

    #[test]
    fn ghz_semantics_on_clean_targets() {
        // On input (x, 0, ..., 0) every qubit ends holding x.
        let c = ghz_copy(5).unwrap();
        let m = cnot_matrix(&c);
        for i in 0..5 {
            assert!(m[i][0], "row {i} must contain source");
        }
    }
}
