//! Depth-optimized controlled-circuit constructions: logarithmic-depth copy
//! circuits, one-layer control without ancillas, s-ancilla control, and
//! lattice-constrained routing/mapping, plus depth/lower-bound reporting.

mod control;
mod copy;
mod lattice;

pub use control::{control_one_layer, control_with_ancillas};
pub use copy::{copy_circuit, ghz_copy};
pub use lattice::{
    control_circuit_on_lattice, fanout_on_lattice, map_one_layer_cnots_to_lattice,
    route_permutation_lattice, snakelike_labeling,
};

use crate::circuit::{Circuit, Gate, GateCostModel, GateKind};
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use serde::{Deserialize, Serialize};

/// Measured constant for permutation routing: three-phase column/row/column
/// routing uses at most 2·l1 + l2 ≤ C_ROUTE·(l1+l2) SWAP layers.
pub const C_ROUTE: u64 = 3;

/// Measured constant for the comb-tree fan-out: CNOT depth stays within
/// C_FAN·(l1+l2) across the randomized test corpus.
pub const C_FAN: u64 = 8;

/// Measured constant for full lattice control: per input layer the emitted
/// depth stays within C_LAT·(l1+l2) under the default cost model.
pub const C_LAT: u64 = 60;

/// A qubit relabeling: entry i gives the destination label of qubit i.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationSpec {
    pub n: usize,
    pub targets: Vec<usize>,
}

impl PermutationSpec {
    pub fn new(targets: Vec<usize>) -> Result<PermutationSpec> {
        let n = targets.len();
        let mut seen = vec![false; n];
        for &t in &targets {
            if t >= n {
                return Err(Error::contract(format!(
                    "permutation target {t} outside 0..{n}"
                )));
            }
            if seen[t] {
                return Err(Error::contract(format!(
                    "permutation target {t} repeated"
                )));
            }
            seen[t] = true;
        }
        Ok(PermutationSpec { n, targets })
    }

    pub fn identity(n: usize) -> PermutationSpec {
        PermutationSpec {
            n,
            targets: (0..n).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.targets.iter().enumerate().all(|(i, &t)| i == t)
    }

    /// Inverse permutation: where each label came from.
    pub fn inverse(&self) -> PermutationSpec {
        let mut targets = vec![0; self.n];
        for (i, &t) in self.targets.iter().enumerate() {
            targets[t] = i;
        }
        PermutationSpec {
            n: self.n,
            targets,
        }
    }
}

/// Depth accounting for one emitted circuit: what was measured, which
/// closed-form bound applies, and the reported lower bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepthReport {
    pub measured_depth: u64,
    pub bound_formula: String,
    pub bound_value: u64,
    pub lower_bound: u64,
    pub cost_model: GateCostModel,
    pub connectivity: ConnectivityGraph,
}

impl DepthReport {
    pub fn validate(&self) -> Result<()> {
        if self.measured_depth > self.bound_value {
            return Err(Error::numerical(format!(
                "measured depth {} exceeds bound {} ({})",
                self.measured_depth, self.bound_value, self.bound_formula
            )));
        }
        if self.lower_bound > self.measured_depth {
            return Err(Error::numerical(format!(
                "lower bound {} exceeds measured depth {}",
                self.lower_bound, self.measured_depth
            )));
        }
        Ok(())
    }
}

/// ⌈log₂ x⌉ with ⌈log₂ 0⌉ = ⌈log₂ 1⌉ = 0.
pub fn ceil_log2(x: u64) -> u64 {
    if x <= 1 {
        0
    } else {
        64 - (x - 1).leading_zeros() as u64
    }
}

/// Reported floor for Hadamard-test depth over `n` data qubits on graph
/// `g`: max(⌈log₂ n⌉, diameter).
pub fn depth_lower_bound(n: usize, g: &ConnectivityGraph) -> Result<u64> {
    Ok(ceil_log2(n as u64).max(g.diameter()?))
}

/// Cost model for lattice-targeted outputs: SWAP counted as its 3-CNOT
/// realization, Toffoli never emitted there but kept at its native cost.
pub fn lattice_cost_model() -> GateCostModel {
    GateCostModel {
        single: 1,
        cnot: 1,
        swap: 3,
        toffoli: 8,
    }
}

/// Closed-form bound for `control_one_layer` on `n` data qubits:
/// 12·⌈log₂ n⌉ + 9 under the default cost model.
pub fn depth_bound_one_layer(n: usize) -> u64 {
    12 * ceil_log2(n as u64) + 9
}

/// Closed-form bound for `control_with_ancillas` with `s` control copies
/// over `n` data qubits and `d` normalized layers:
/// 2·⌈log₂ s⌉ + d·(12·⌈log₂(n/s)⌉ + 9).
pub fn depth_bound_with_ancillas(n: usize, s: usize, d: u64) -> u64 {
    2 * ceil_log2(s as u64) + d * (12 * ceil_log2(n.div_ceil(s) as u64) + 9)
}

/// Rewrite a circuit into layers containing only disjoint CNOTs and
/// single-qubit gates: SWAP becomes 3 CNOT layers, Toffoli its 6-CNOT
/// realization; the result is relayered. Constructions whose accounting is
/// per CNOT-and-rotation layer run on this form.
pub fn normalize_to_cnot_single(c: &Circuit) -> Circuit {
    let mut out = Circuit::empty(c.width());
    for layer in c.layers() {
        for gate in layer {
            match gate.kind {
                GateKind::SWAP => {
                    let (a, b) = (gate.qubits[0], gate.qubits[1]);
                    out.push(Gate::cnot(a, b)).expect("validated");
                    out.push(Gate::cnot(b, a)).expect("validated");
                    out.push(Gate::cnot(a, b)).expect("validated");
                }
                GateKind::Toffoli => {
                    for sub in crate::circuit::toffoli_decomposition(
                        gate.qubits[0],
                        gate.qubits[1],
                        gate.qubits[2],
                    ) {
                        out.push_layer(sub).expect("validated");
                    }
                }
                _ => out.push(gate.clone()).expect("validated"),
            }
        }
    }
    out.relayer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(0), 0);
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(64), 6);
        assert_eq!(ceil_log2(65), 7);
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(
            depth_lower_bound(8, &ConnectivityGraph::complete(9)).unwrap(),
            3
        );
        assert_eq!(
            depth_lower_bound(16, &ConnectivityGraph::lattice(4, 4)).unwrap(),
            6
        );
        assert_eq!(
            depth_lower_bound(4, &ConnectivityGraph::path(4)).unwrap(),
            3
        );
    }

    #[test]
    fn permutation_validation() {
        assert!(PermutationSpec::new(vec![1, 0, 2]).is_ok());
        assert!(PermutationSpec::new(vec![1, 1, 2]).is_err());
        assert!(PermutationSpec::new(vec![0, 3]).is_err());
        assert_eq!(
            PermutationSpec::new(vec![2, 0, 1]).unwrap().inverse().targets,
            vec![1, 2, 0]
        );
    }
}
