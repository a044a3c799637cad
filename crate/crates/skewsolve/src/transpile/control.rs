//! Shallow controlled versions of depth-1 circuits.
//!
//! `control_one_layer` takes a single layer of CNOTs and single-qubit gates
//! and produces an equivalent circuit controlled on one fresh qubit whose
//! weighted depth stays within `12*ceil(log2 n) + 9`. `control_with_ancillas`
//! extends this to arbitrary circuits using `s - 1` clean ancillas, trading
//! ancilla count against depth.

use num_complex::Complex64 as C64;

use crate::circuit::{abc_decomposition, Circuit, Gate, GateCostModel, GateKind, RParams};
use crate::error::{Error, Result};
use crate::transpile::copy::{copy_circuit, ghz_copy};
use crate::transpile::{ceil_log2, normalize_to_cnot_single};

/// One CNOT to be controlled, in output coordinates.
pub(crate) type Pair = (usize, usize);
/// One single-qubit gate to be controlled: target qubit plus its 2x2 unitary.
pub(crate) type Rotation = (usize, [[C64; 2]; 2]);

/// Gates of one layer, split by arity.
pub(crate) struct LayerGates {
    pub(crate) cnots: Vec<Pair>,
    pub(crate) rotations: Vec<Rotation>,
}

/// Splits a single layer into CNOTs and single-qubit unitaries.
/// SWAP and Toffoli are rejected; callers normalize them away first.
pub(crate) fn classify_layer(layer: &[Gate]) -> Result<LayerGates> {
    let mut cnots = Vec::new();
    let mut rotations = Vec::new();
    for gate in layer {
        match gate.kind {
            GateKind::CNOT => cnots.push((gate.qubits[0], gate.qubits[1])),
            GateKind::SWAP | GateKind::Toffoli => {
                return Err(Error::contract(format!(
                    "{} gates are not allowed in a one-layer control input; \
                     decompose to CNOT and single-qubit gates first",
                    gate.kind.name()
                )));
            }
            _ => rotations.push((gate.qubits[0], gate.unitary2())),
        }
    }
    Ok(LayerGates { cnots, rotations })
}

/// Appends the controlled-rotation block for `rotations`, all driven by
/// `control`. Layout per gate j with U_j = e^{i a_j} A_j X B_j X C_j:
/// a C layer, a fan-out of the control onto every rotation target, a B
/// layer, the same fan-out again, then an A layer plus one phase gate on
/// the control collecting every e^{i a_j}.
///
/// When `skip_first_fanout` is set the caller has already fanned the
/// control out onto the rotation targets (merged with a previous block),
/// so only the C layer belongs before that merge point; this helper then
/// starts at the B layer.
fn append_rotation_half(
    out: &mut Circuit,
    control: usize,
    rotations: &[Rotation],
    skip_first_fanout: bool,
) -> Result<()> {
    if rotations.is_empty() {
        return Ok(());
    }
    let targets: Vec<usize> = rotations.iter().map(|&(q, _)| q).collect();
    let fanout = fanout_onto(control, &targets, out.width())?;
    append_rotation_parts(out, control, rotations, &fanout, !skip_first_fanout)
}

/// The rotation block with a caller-supplied fan-out circuit (log-depth
/// copy on complete graphs, comb-tree fan-out on lattices). When
/// `include_head` is false the caller has already emitted the C layer and
/// the first fan-out (merged into a preceding block).
pub(crate) fn append_rotation_parts(
    out: &mut Circuit,
    control: usize,
    rotations: &[Rotation],
    fanout: &Circuit,
    include_head: bool,
) -> Result<()> {
    if rotations.is_empty() {
        return Ok(());
    }
    let mut a_parts: Vec<(usize, RParams)> = Vec::new();
    let mut b_parts: Vec<(usize, RParams)> = Vec::new();
    let mut c_parts: Vec<(usize, RParams)> = Vec::new();
    let mut phase_sum = 0.0;
    for &(q, u) in rotations {
        let (a, b, c, alpha) = abc_decomposition(&u)?;
        phase_sum += alpha;
        if !a.is_identity() {
            a_parts.push((q, a));
        }
        if !b.is_identity() {
            b_parts.push((q, b));
        }
        if !c.is_identity() {
            c_parts.push((q, c));
        }
    }

    if include_head {
        push_r_layer(out, &c_parts)?;
        out.append(fanout)?;
    }
    push_r_layer(out, &b_parts)?;
    out.append(fanout)?;
    let mut last: Vec<Gate> = Vec::new();
    for (q, p) in &a_parts {
        last.push(Gate::new(GateKind::R, vec![*q], Some(*p))?);
    }
    if phase_sum.abs() > 1e-14 {
        last.push(Gate::phase(control, phase_sum));
    }
    if !last.is_empty() {
        out.push_layer(last)?;
    }
    Ok(())
}

fn push_r_layer(out: &mut Circuit, parts: &[(usize, RParams)]) -> Result<()> {
    if parts.is_empty() {
        return Ok(());
    }
    let layer = parts
        .iter()
        .map(|(q, p)| Gate::new(GateKind::R, vec![*q], Some(*p)))
        .collect::<Result<Vec<_>>>()?;
    out.push_layer(layer)
}

/// Log-depth fan-out of `root` onto `targets`, as a full-width circuit.
fn fanout_onto(root: usize, targets: &[usize], width: usize) -> Result<Circuit> {
    let mut map = Vec::with_capacity(targets.len() + 1);
    map.push(root);
    map.extend_from_slice(targets);
    copy_circuit(targets.len() + 1)?.mapped(&map, width)
}

/// Appends one batch of the ancilla-borrowing CNOT construction: with
/// ancilla a_i borrowed for pair (c_i, t_i), the sequence
/// Toffoli(c_i, a_i, t_i) / fan-out control onto all a_i /
/// Toffoli(c_i, a_i, t_i) / fan-out again implements
/// controlled-CNOT(c_i, t_i) for every pair and restores the ancillas.
/// The trailing fan-out is left out when `close` is false so the caller
/// can merge it with the next block's opening fan-out.
fn append_batch(
    out: &mut Circuit,
    control: usize,
    pairs: &[Pair],
    ancillas: &[usize],
    close: bool,
) -> Result<()> {
    debug_assert_eq!(pairs.len(), ancillas.len());
    let toffolis: Vec<Gate> = pairs
        .iter()
        .zip(ancillas)
        .map(|(&(c, t), &a)| Gate::toffoli(c, a, t))
        .collect();
    let fanout = fanout_onto(control, ancillas, out.width())?;
    out.push_layer(toffolis.clone())?;
    out.append(&fanout)?;
    out.push_layer(toffolis)?;
    if close {
        out.append(&fanout)?;
    }
    Ok(())
}

/// Direct candidate: one Toffoli per CNOT, sequential, then the rotation
/// block. Cheapest for small pair counts.
fn candidate_direct(
    width: usize,
    control: usize,
    cnots: &[Pair],
    rotations: &[Rotation],
) -> Result<Circuit> {
    let mut out = Circuit::empty(width);
    for &(c, t) in cnots {
        out.push(Gate::toffoli(control, c, t))?;
    }
    append_rotation_half(&mut out, control, rotations, false)?;
    Ok(out)
}

/// Batched candidate: pairs are sorted by control index and split at the
/// median into S1 and S2; each half's Toffolis run in parallel against
/// ancillas borrowed from the other half's qubits. When rotations follow,
/// S2's closing fan-out and the rotation block's opening fan-out merge
/// into a single copy onto ancillas and rotation targets together.
/// Median split for the batched construction: pairs sorted by control
/// index, first ceil(s/2) in one batch, the rest in the other. Each half
/// borrows its ancillas from the other half's qubits.
pub(crate) fn split_batches(pairs: &[Pair]) -> (Vec<Pair>, Vec<Pair>) {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let s1 = sorted.len().div_ceil(2);
    let second = sorted.split_off(s1);
    (sorted, second)
}

fn candidate_batched(
    width: usize,
    control: usize,
    cnots: &[Pair],
    rotations: &[Rotation],
) -> Result<Circuit> {
    debug_assert!(cnots.len() >= 2);
    let (first, second) = split_batches(cnots);
    let (first, second) = (first.as_slice(), second.as_slice());

    let qubits_of = |pairs: &[Pair]| -> Vec<usize> {
        let mut q: Vec<usize> = pairs.iter().flat_map(|&(c, t)| [c, t]).collect();
        q.sort_unstable();
        q
    };
    let pool1 = qubits_of(second);
    let pool2 = qubits_of(first);
    if pool1.len() < first.len() || pool2.len() < second.len() {
        return Err(Error::contract("batch split cannot borrow enough ancillas"));
    }

    let mut out = Circuit::empty(width);
    append_batch(&mut out, control, first, &pool1[..first.len()], true)?;

    if rotations.is_empty() {
        append_batch(&mut out, control, second, &pool2[..second.len()], true)?;
        return Ok(out);
    }

    // C layer first: it commutes with the batches (disjoint qubits) and
    // must precede the merged fan-out below.
    let mut c_parts: Vec<(usize, RParams)> = Vec::new();
    for &(q, u) in rotations {
        let (_, _, c, _) = abc_decomposition(&u)?;
        if !c.is_identity() {
            c_parts.push((q, c));
        }
    }
    push_r_layer(&mut out, &c_parts)?;

    append_batch(&mut out, control, second, &pool2[..second.len()], false)?;

    // Merged fan-out: restores S2's ancillas and copies the control onto
    // the rotation targets in one log-depth pass.
    let mut merged: Vec<usize> = pool2[..second.len()].to_vec();
    merged.extend(rotations.iter().map(|&(q, _)| q));
    out.append(&fanout_onto(control, &merged, width)?)?;

    append_rotation_half(&mut out, control, rotations, true)?;
    Ok(out)
}

/// Appends the controlled version of one layer (given as CNOT pairs and
/// single-qubit unitaries, all in output coordinates) driven by `control`.
/// Builds the direct and batched candidates and keeps whichever measures
/// shallower under the unit/Toffoli-8 cost model.
fn append_controlled_layer(
    out: &mut Circuit,
    control: usize,
    cnots: &[Pair],
    rotations: &[Rotation],
) -> Result<()> {
    let cost = GateCostModel::default();
    let mut best: Option<Circuit> = None;
    let mut consider = |c: Circuit| {
        let better = match &best {
            Some(b) => c.depth(&cost) < b.depth(&cost),
            None => true,
        };
        if better {
            best = Some(c);
        }
    };
    consider(candidate_direct(out.width(), control, cnots, rotations)?);
    if cnots.len() >= 2 {
        consider(candidate_batched(out.width(), control, cnots, rotations)?);
    }
    out.append(&best.expect("at least one candidate"))
}

/// Builds a controlled version of a depth-1 circuit using one extra qubit.
///
/// The input must consist of a single layer of CNOTs and single-qubit
/// gates on `n` qubits (SWAP and Toffoli are rejected). The output has
/// width `n + 1` with the fresh control at qubit 0 and data qubit `q`
/// relabeled to `q + 1`, and applies the layer exactly when the control
/// is set. Its weighted depth is at most `12*ceil(log2 n) + 9` under the
/// default cost model.
pub fn control_one_layer(layer: &Circuit) -> Result<Circuit> {
    let packed = layer.relayer();
    if packed.num_layers() > 1 {
        return Err(Error::contract(
            "control_one_layer requires a depth-1 input circuit",
        ));
    }
    let n = layer.width();
    let mut out = Circuit::empty(n + 1);
    if let Some(gates) = packed.layers().first() {
        let LayerGates { cnots, rotations } = classify_layer(gates)?;
        let cnots: Vec<Pair> = cnots.iter().map(|&(c, t)| (c + 1, t + 1)).collect();
        let rotations: Vec<Rotation> = rotations.iter().map(|&(q, u)| (q + 1, u)).collect();
        append_controlled_layer(&mut out, 0, &cnots, &rotations)?;
    }
    Ok(out.relayer())
}

/// Per-layer gate groups for the ancilla construction: each group runs
/// against its own copy of the control, so groups execute in parallel.
struct Group {
    cnots: Vec<Pair>,
    rotations: Vec<Rotation>,
    slots_left: usize,
}

/// Packs one layer's gates into at most `bins` groups of qubit capacity
/// `cap` (first-fit, pairs before singles). With `cap == 1` each CNOT
/// still gets a bin of its own and is controlled by a single Toffoli.
fn pack_groups(gates: &LayerGates, cap: usize, bins: usize) -> Result<Vec<Group>> {
    fn place(groups: &mut Vec<Group>, need: usize, cap: usize, bins: usize) -> Result<usize> {
        if let Some(i) = groups.iter().position(|g| g.slots_left >= need) {
            groups[i].slots_left -= need;
            return Ok(i);
        }
        if groups.len() == bins {
            return Err(Error::numerical("layer grouping exceeded ancilla budget"));
        }
        // cap == 1 still admits one CNOT per group (a lone Toffoli, cost 8).
        groups.push(Group {
            cnots: Vec::new(),
            rotations: Vec::new(),
            slots_left: cap.saturating_sub(need),
        });
        Ok(groups.len() - 1)
    }

    let mut groups: Vec<Group> = Vec::new();
    for &pair in &gates.cnots {
        let i = place(&mut groups, 2, cap, bins)?;
        groups[i].cnots.push(pair);
    }
    for &rot in &gates.rotations {
        let i = place(&mut groups, 1, cap, bins)?;
        groups[i].rotations.push(rot);
    }
    Ok(groups)
}

/// Builds a controlled version of an arbitrary circuit using `s` control
/// copies (one fresh control qubit plus `s - 1` clean ancillas).
///
/// The input is first normalized to CNOT and single-qubit gates. The
/// output has width `n + s`: control at qubit 0, ancillas at `1..s`,
/// data qubit `q` at `s + q`. Ancillas start and end in |0>. The control
/// is copied onto the ancillas in depth `ceil(log2 s)`, each of the `d`
/// normalized layers is split into at most `s` groups of at most
/// `2^ceil(log2(n/s))` qubits driven by distinct copies in parallel, and
/// the copies are uncomputed. Weighted depth is at most
/// `2*ceil(log2 s) + d*(12*ceil(log2(n/s)) + 9)`.
pub fn control_with_ancillas(circuit: &Circuit, s: usize) -> Result<Circuit> {
    let n = circuit.width();
    if n == 0 {
        return Err(Error::contract("cannot control an empty-width circuit"));
    }
    if s < 1 || s > n {
        return Err(Error::contract(format!(
            "ancilla parameter s = {s} out of range 1..={n}"
        )));
    }
    let normalized = normalize_to_cnot_single(circuit);

    // Smallest power of two P with P*s >= n; log2(P) = ceil(log2(n/s)).
    let cap = 1usize << ceil_log2(n.div_ceil(s) as u64);

    let width = n + s;
    let mut out = Circuit::empty(width);
    let copies: Vec<usize> = (0..s).collect();
    let copy = if s > 1 {
        let c = ghz_copy(s)?.mapped(&copies, width)?;
        out.append(&c)?;
        Some(c)
    } else {
        None
    };

    for layer in normalized.layers() {
        let gates = classify_layer(layer)?;
        let shift = |q: usize| q + s;
        let shifted = LayerGates {
            cnots: gates.cnots.iter().map(|&(c, t)| (shift(c), shift(t))).collect(),
            rotations: gates.rotations.iter().map(|&(q, u)| (shift(q), u)).collect(),
        };
        for (i, group) in pack_groups(&shifted, cap, s)?.iter().enumerate() {
            append_controlled_layer(&mut out, copies[i], &group.cnots, &group.rotations)?;
        }
    }

    if let Some(c) = copy {
        out.append(&c.inverse())?;
    }
    Ok(out.relayer())
}
