//! Constructions targeting the l1 x l2 lattice graph, with qubits addressed
//! by their snakelike label.
//!
//! Pipeline: `route_permutation_lattice` realizes any relabeling in at most
//! 2*l1 + l2 SWAP layers (three-phase column/row/column routing), on top of
//! which `map_one_layer_cnots_to_lattice` conjugates a CNOT layer so every
//! pair acts on an edge, `fanout_on_lattice` spreads one qubit's bit through
//! a comb spanning tree, and `control_circuit_on_lattice` assembles the full
//! controlled circuit.

use crate::circuit::{toffoli_decomposition, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::graph::{cell_to_snake, snake_to_cell};
use crate::transpile::control::{append_rotation_parts, classify_layer, split_batches, LayerGates};
use crate::transpile::{normalize_to_cnot_single, PermutationSpec};

fn check_dims(l1: usize, l2: usize) -> Result<()> {
    if l1 == 0 || l2 == 0 {
        return Err(Error::contract("lattice dimensions must be at least 1x1"));
    }
    Ok(())
}

/// Fills the usize::MAX slots of a partial assignment with the unused
/// destination labels in ascending order.
fn complete_bijection(targets: &mut [usize]) {
    let n = targets.len();
    let mut taken = vec![false; n];
    for &t in targets.iter() {
        if t != usize::MAX {
            taken[t] = true;
        }
    }
    let mut free = (0..n).filter(|&l| !taken[l]);
    for slot in targets.iter_mut() {
        if *slot == usize::MAX {
            *slot = free.next().expect("bijection completion");
        }
    }
}

/// The row-major-position to snakelike-label bijection for an l1 x l2
/// lattice: even rows read left to right, odd rows right to left.
pub fn snakelike_labeling(l1: usize, l2: usize) -> Result<PermutationSpec> {
    check_dims(l1, l2)?;
    let mut targets = Vec::with_capacity(l1 * l2);
    for row in 0..l1 {
        for col in 0..l2 {
            targets.push(cell_to_snake(l1, l2, row, col));
        }
    }
    PermutationSpec::new(targets)
}

/// Kuhn augmenting-path matching on the column multigraph. `counts[a][b]`
/// is the number of unrouted items starting in column a bound for column b;
/// while the graph stays regular a perfect matching always exists.
fn perfect_column_matching(counts: &[Vec<usize>]) -> Result<Vec<usize>> {
    let m = counts.len();
    let mut match_right: Vec<Option<usize>> = vec![None; m];

    fn try_augment(
        a: usize,
        counts: &[Vec<usize>],
        match_right: &mut Vec<Option<usize>>,
        visited: &mut Vec<bool>,
    ) -> bool {
        for b in 0..counts.len() {
            if counts[a][b] == 0 || visited[b] {
                continue;
            }
            visited[b] = true;
            let free = match match_right[b] {
                None => true,
                Some(a2) => try_augment(a2, counts, match_right, visited),
            };
            if free {
                match_right[b] = Some(a);
                return true;
            }
        }
        false
    }

    for a in 0..m {
        let mut visited = vec![false; m];
        if !try_augment(a, counts, &mut match_right, &mut visited) {
            return Err(Error::numerical("column multigraph had no perfect matching"));
        }
    }
    let mut match_left = vec![0usize; m];
    for (b, a) in match_right.iter().enumerate() {
        match_left[a.expect("perfect")] = b;
    }
    Ok(match_left)
}

/// One item being routed: where it must end up, and which intermediate row
/// the matching assigned it for the row-routing phase.
#[derive(Clone, Copy)]
struct RouteItem {
    dest_row: usize,
    dest_col: usize,
    mid_row: usize,
}

/// Odd-even transposition sort along every column (`vertical`) or row of
/// the grid at once, ordering items by `key`; emits one SWAP layer per
/// round that actually swaps something.
fn oe_sort(
    grid: &mut [Vec<RouteItem>],
    l1: usize,
    l2: usize,
    vertical: bool,
    key: impl Fn(&RouteItem) -> usize,
    out: &mut Circuit,
) -> Result<()> {
    let line_len = if vertical { l1 } else { l2 };
    for round in 0..line_len {
        let mut layer: Vec<Gate> = Vec::new();
        let mut i = round % 2;
        while i + 1 < line_len {
            let lines = if vertical { l2 } else { l1 };
            for line in 0..lines {
                let (ra, ca, rb, cb) = if vertical {
                    (i, line, i + 1, line)
                } else {
                    (line, i, line, i + 1)
                };
                if key(&grid[ra][ca]) > key(&grid[rb][cb]) {
                    let tmp = grid[ra][ca];
                    grid[ra][ca] = grid[rb][cb];
                    grid[rb][cb] = tmp;
                    layer.push(Gate::swap(
                        cell_to_snake(l1, l2, ra, ca),
                        cell_to_snake(l1, l2, rb, cb),
                    ));
                }
            }
            i += 2;
        }
        if !layer.is_empty() {
            out.push_layer(layer)?;
        }
    }
    Ok(())
}

/// SWAP-only circuit on lattice edges realizing `p` on basis states: the
/// bit starting on label i ends on label `p.targets[i]`.
///
/// Three phases: a column-matching assigns every item an intermediate row
/// (the column demand multigraph is l1-regular, so it splits into l1
/// perfect matchings, one per row); items are then sorted into those rows
/// within their columns, across rows into their destination columns, and
/// finally within columns to their destination rows. Odd-even
/// transposition gives at most l1 + l2 + l1 SWAP layers, within the
/// documented C_ROUTE*(l1+l2).
pub fn route_permutation_lattice(p: &PermutationSpec, l1: usize, l2: usize) -> Result<Circuit> {
    check_dims(l1, l2)?;
    let n = l1 * l2;
    if p.n != n {
        return Err(Error::contract(format!(
            "permutation size {} does not match lattice {}x{}",
            p.n, l1, l2
        )));
    }
    let mut out = Circuit::empty(n);
    if p.is_identity() {
        return Ok(out);
    }

    // Column demand multigraph: one edge per item from its start column to
    // its destination column.
    let mut counts = vec![vec![0usize; l2]; l2];
    let mut grid: Vec<Vec<RouteItem>> = (0..l1)
        .map(|row| {
            (0..l2)
                .map(|col| {
                    let dest = p.targets[cell_to_snake(l1, l2, row, col)];
                    let (dest_row, dest_col) = snake_to_cell(l1, l2, dest);
                    counts[col][dest_col] += 1;
                    RouteItem {
                        dest_row,
                        dest_col,
                        mid_row: usize::MAX,
                    }
                })
                .collect()
        })
        .collect();

    // Peel off one perfect matching per row; the items it covers go to that
    // intermediate row. Each round leaves the multigraph regular of one
    // lower degree, so every round matches perfectly.
    for mid_row in 0..l1 {
        let match_left = perfect_column_matching(&counts)?;
        for (col, &dest_col) in match_left.iter().enumerate() {
            counts[col][dest_col] -= 1;
            let row = (0..l1)
                .find(|&r| {
                    grid[r][col].dest_col == dest_col && grid[r][col].mid_row == usize::MAX
                })
                .ok_or_else(|| Error::numerical("matching lost a routed item"))?;
            grid[row][col].mid_row = mid_row;
        }
    }

    oe_sort(&mut grid, l1, l2, true, |it| it.mid_row, &mut out)?;
    oe_sort(&mut grid, l1, l2, false, |it| it.dest_col, &mut out)?;
    oe_sort(&mut grid, l1, l2, true, |it| it.dest_row, &mut out)?;

    debug_assert!((0..l1).all(|r| (0..l2).all(|c| {
        grid[r][c].dest_row == r && grid[r][c].dest_col == c
    })));
    Ok(out)
}

/// Conjugates a single layer of disjoint CNOTs so every pair acts on a
/// lattice edge: if some pair is not already adjacent, a permutation sends
/// pair k to the consecutive snake labels (2k, 2k+1), one CNOT layer runs,
/// and the permutation is undone. The unitary equals the input layer's.
pub fn map_one_layer_cnots_to_lattice(layer: &Circuit, l1: usize, l2: usize) -> Result<Circuit> {
    check_dims(l1, l2)?;
    let n = l1 * l2;
    if layer.width() != n {
        return Err(Error::contract(format!(
            "layer width {} does not fill the {}x{} lattice",
            layer.width(),
            l1,
            l2
        )));
    }
    let packed = layer.relayer();
    if packed.num_layers() > 1 {
        return Err(Error::contract("expected a single-layer CNOT circuit"));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    if let Some(gates) = packed.layers().first() {
        for gate in gates {
            if gate.kind != GateKind::CNOT {
                return Err(Error::contract(format!(
                    "expected only CNOT gates, found {}",
                    gate.kind.name()
                )));
            }
            pairs.push((gate.qubits[0], gate.qubits[1]));
        }
    }
    let mut out = Circuit::empty(n);
    if pairs.is_empty() {
        return Ok(out);
    }

    let graph = crate::graph::ConnectivityGraph::lattice(l1, l2);
    if pairs.iter().all(|&(a, b)| graph.has_edge(a, b)) {
        out.push_layer(pairs.iter().map(|&(a, b)| Gate::cnot(a, b)).collect())?;
        return Ok(out);
    }

    // Pair k occupies labels 2k (control) and 2k+1 (target); consecutive
    // snake labels are always adjacent. Unused labels fill the remainder.
    let mut targets = vec![usize::MAX; n];
    for (k, &(c, t)) in pairs.iter().enumerate() {
        targets[c] = 2 * k;
        targets[t] = 2 * k + 1;
    }
    complete_bijection(&mut targets);
    let perm = PermutationSpec::new(targets)?;
    let route = route_permutation_lattice(&perm, l1, l2)?;
    out.append(&route)?;
    out.push_layer(
        (0..pairs.len())
            .map(|k| Gate::cnot(2 * k, 2 * k + 1))
            .collect(),
    )?;
    out.append(&route.inverse())?;
    Ok(out)
}

/// The comb spanning tree rooted at `root`: vertical edges along the
/// root's column, horizontal edges along every row. `parent[v]` is the
/// snake label of v's parent (usize::MAX at the root).
struct CombTree {
    l1: usize,
    l2: usize,
    root: usize,
    parent: Vec<usize>,
}

impl CombTree {
    fn new(l1: usize, l2: usize, root: usize) -> CombTree {
        let (r0, c0) = snake_to_cell(l1, l2, root);
        let mut parent = vec![usize::MAX; l1 * l2];
        for label in 0..l1 * l2 {
            if label == root {
                continue;
            }
            let (r, c) = snake_to_cell(l1, l2, label);
            let (pr, pc) = if c == c0 {
                (if r > r0 { r - 1 } else { r + 1 }, c)
            } else {
                (r, if c > c0 { c - 1 } else { c + 1 })
            };
            parent[label] = cell_to_snake(l1, l2, pr, pc);
        }
        CombTree { l1, l2, root, parent }
    }

    /// Distance from the root along tree edges.
    fn depth(&self, label: usize) -> usize {
        let (r0, c0) = snake_to_cell(self.l1, self.l2, self.root);
        let (r, c) = snake_to_cell(self.l1, self.l2, label);
        r.abs_diff(r0) + c.abs_diff(c0)
    }
}

/// One maximal subtree whose root and leaves carry the fan-out set S and
/// whose interior does not: `layers[j]` lists the vertices at distance j
/// from the subtree root, and `kids[v]` its children within the subtree.
struct Subtree {
    root_depth: usize,
    layers: Vec<Vec<usize>>,
    kids: Vec<Vec<usize>>,
    is_leaf: Vec<bool>,
    holds_root: bool,
}

impl Subtree {
    /// CNOT(v -> child) for every vertex with controls at subtree layers
    /// `from..=to` (1-based, root = layer 1), walked in the given order;
    /// multiple children of one vertex go in consecutive sublayers. Gates
    /// targeting subtree leaves are dropped when `skip_leaves` is set.
    fn emit_pass(
        &self,
        out: &mut Circuit,
        layers_desc: bool,
        skip_leaves: bool,
    ) -> Result<()> {
        let d = self.layers.len();
        if d < 2 {
            return Ok(());
        }
        // Controls at layers 1..=d-1 in 1-based terms; 0-based 0..=d-2.
        let range: Vec<usize> = if layers_desc {
            // Pass (a): layers d-1 down to 2 (0-based d-2 down to 1).
            (1..d - 1).rev().collect()
        } else {
            // Pass (b): layers 1 up to d-1 (0-based 0 up to d-2).
            (0..d - 1).collect()
        };
        for li in range {
            let max_kids = self.layers[li]
                .iter()
                .map(|&v| self.kids[v].len())
                .max()
                .unwrap_or(0);
            for k in 0..max_kids {
                let mut gates = Vec::new();
                for &v in &self.layers[li] {
                    if let Some(&child) = self.kids[v].get(k) {
                        if skip_leaves && self.is_leaf[child] {
                            continue;
                        }
                        gates.push(Gate::cnot(v, child));
                    }
                }
                if !gates.is_empty() {
                    out.push_layer(gates)?;
                }
            }
        }
        Ok(())
    }

    /// The full (a)(b)(c) schedule: after it, every leaf has the subtree
    /// root's starting value XORed in and every interior vertex is back to
    /// its starting value.
    fn emit_schedule(&self, out: &mut Circuit) -> Result<()> {
        self.emit_pass(out, true, false)?;
        self.emit_pass(out, false, false)?;
        self.emit_pass(out, true, true)?;
        self.emit_pass(out, false, true)
    }
}

/// CNOT-only lattice circuit XORing `control`'s bit into every target and
/// leaving everything else unchanged. Qubit ids are snake labels.
///
/// A comb spanning tree (vertical spine on the control's column plus
/// horizontal teeth) is rooted at the control, pruned to the vertices on
/// paths toward S = {control} union targets, and cut at S-vertices into
/// subtrees whose roots and leaves are in S. Each subtree's two-sweep
/// CNOT schedule adds its root into its leaves and restores the interior;
/// running subtrees bottom-up and then (excluding the control's own
/// subtree) top-down telescopes those additions into the control's bit
/// reaching every target.
pub fn fanout_on_lattice(
    control: usize,
    targets: &[usize],
    l1: usize,
    l2: usize,
) -> Result<Circuit> {
    check_dims(l1, l2)?;
    let n = l1 * l2;
    if control >= n {
        return Err(Error::contract(format!("control label {control} outside lattice")));
    }
    let mut in_s = vec![false; n];
    in_s[control] = true;
    for &t in targets {
        if t >= n {
            return Err(Error::contract(format!("target label {t} outside lattice")));
        }
        if t == control {
            return Err(Error::contract("control cannot be one of the fan-out targets"));
        }
        in_s[t] = true;
    }
    let mut out = Circuit::empty(n);
    if targets.is_empty() {
        return Ok(out);
    }

    let tree = CombTree::new(l1, l2, control);

    // Prune: keep exactly the vertices on a path from some S vertex up to
    // the root.
    let mut keep = vec![false; n];
    for v in 0..n {
        if !in_s[v] {
            continue;
        }
        let mut cur = v;
        while cur != usize::MAX && !keep[cur] {
            keep[cur] = true;
            cur = tree.parent[cur];
        }
    }

    let mut kept_kids: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in 0..n {
        if keep[v] && v != control {
            kept_kids[tree.parent[v]].push(v);
        }
    }

    // Cut at S vertices into the maximal S-rooted subtrees.
    let mut subtrees: Vec<Subtree> = Vec::new();
    for root in 0..n {
        if !keep[root] || !in_s[root] || kept_kids[root].is_empty() {
            continue;
        }
        let mut layers: Vec<Vec<usize>> = vec![vec![root]];
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut is_leaf = vec![false; n];
        let mut frontier = vec![root];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &v in &frontier {
                if v != root && in_s[v] {
                    is_leaf[v] = true;
                    continue;
                }
                for &child in &kept_kids[v] {
                    kids[v].push(child);
                    next.push(child);
                }
            }
            if next.is_empty() {
                break;
            }
            layers.push(next.clone());
            frontier = next;
        }
        // Interior vertices with no children cannot survive pruning; every
        // layer-boundary leaf is an S vertex.
        subtrees.push(Subtree {
            root_depth: tree.depth(root),
            layers,
            kids,
            is_leaf,
            holds_root: root == control,
        });
    }

    // Step (1): bottom-up (deepest roots first).
    subtrees.sort_by(|a, b| b.root_depth.cmp(&a.root_depth));
    for st in &subtrees {
        st.emit_schedule(&mut out)?;
    }
    // Step (2): top-down, skipping the subtree rooted at the control.
    for st in subtrees.iter().rev() {
        if !st.holds_root {
            st.emit_schedule(&mut out)?;
        }
    }
    Ok(out.relayer())
}

/// Emits one Toffoli(c1, c2, t) as adjacent CNOTs plus single-qubit gates,
/// assuming labels c1 and c2 are both adjacent to t (snake-consecutive).
/// The two CNOTs between c1 and c2 bridge through t as a 4-CNOT block
/// exactly equal to CNOT(c1, c2).
fn push_bridged_toffoli(out: &mut Circuit, c1: usize, c2: usize, t: usize) -> Result<()> {
    for sub in toffoli_decomposition(c1, c2, t) {
        for gate in sub {
            if gate.kind == GateKind::CNOT && gate.qubits[0].abs_diff(gate.qubits[1]) != 1 {
                let (a, b) = (gate.qubits[0], gate.qubits[1]);
                for g in [
                    Gate::cnot(t, b),
                    Gate::cnot(a, t),
                    Gate::cnot(t, b),
                    Gate::cnot(a, t),
                ] {
                    out.push(g)?;
                }
            } else {
                out.push(gate)?;
            }
        }
    }
    Ok(())
}

/// Borrowed-ancilla Toffoli block for pairs routed to consecutive labels:
/// pair k sits at (3k+1, 3k+2, 3k+3) = (control-of-pair, target, ancilla),
/// so both Toffoli controls are adjacent to the target and bridge through
/// it when they must interact.
fn lattice_toffoli_layer(out: &mut Circuit, k_pairs: usize) -> Result<()> {
    for k in 0..k_pairs {
        let (c1, t, c2) = (3 * k + 1, 3 * k + 2, 3 * k + 3);
        push_bridged_toffoli(out, c1, c2, t)?;
    }
    Ok(())
}

/// Controlled version of `c` mapped onto an l1 x l2 lattice.
///
/// The control lives at snake label 0 and data qubit q at label q + 1;
/// any remaining cells idle. Per normalized layer, CNOT pairs are handled
/// in two borrowed-ancilla batches (each batch routed so pair k occupies
/// labels 3k+1..3k+3, Toffolis expanded into adjacent CNOTs, the control
/// fanned onto the ancillas between the two Toffoli sublayers), and
/// single-qubit gates by the ABC decomposition with the control fanned
/// onto the rotation targets. Path graphs are the l2 = 1 case.
pub fn control_circuit_on_lattice(c: &Circuit, l1: usize, l2: usize) -> Result<Circuit> {
    check_dims(l1, l2)?;
    let cells = l1 * l2;
    let n = c.width();
    if n + 1 > cells {
        return Err(Error::contract(format!(
            "circuit width {n} plus control exceeds the {l1}x{l2} lattice"
        )));
    }
    let normalized = normalize_to_cnot_single(c);
    let mut out = Circuit::empty(cells);

    for layer in normalized.layers() {
        let gates = classify_layer(layer)?;
        let shifted = LayerGates {
            cnots: gates.cnots.iter().map(|&(a, b)| (a + 1, b + 1)).collect(),
            rotations: gates.rotations.iter().map(|&(q, u)| (q + 1, u)).collect(),
        };
        append_controlled_layer_lattice(&mut out, &shifted, l1, l2)?;
    }
    Ok(out.relayer())
}

/// Emits one controlled layer onto the lattice (control at label 0).
fn append_controlled_layer_lattice(
    out: &mut Circuit,
    gates: &LayerGates,
    l1: usize,
    l2: usize,
) -> Result<()> {
    let cells = l1 * l2;

    if gates.cnots.len() == 1 {
        // No second batch to borrow an ancilla from: route the pair next
        // to the control and run one bridged Toffoli directly, with the
        // pair's target between the two controls.
        let (c1, t) = gates.cnots[0];
        let mut assign = vec![usize::MAX; cells];
        assign[t] = 1;
        assign[c1] = 2;
        complete_bijection(&mut assign);
        debug_assert_eq!(assign[0], 0);
        let perm = PermutationSpec::new(assign)?;
        let route = route_permutation_lattice(&perm, l1, l2)?;
        out.append(&route)?;
        push_bridged_toffoli(out, 0, 2, 1)?;
        out.append(&route.inverse())?;
    } else if !gates.cnots.is_empty() {
        let (first, second) = split_batches(&gates.cnots);
        let max_pairs = (cells - 1) / 3;
        run_lattice_batch(out, &first, &second, max_pairs, l1, l2)?;
        run_lattice_batch(out, &second, &first, max_pairs, l1, l2)?;
    }

    if !gates.rotations.is_empty() {
        let rot_targets: Vec<usize> = gates.rotations.iter().map(|&(q, _)| q).collect();
        let fanout = fanout_on_lattice(0, &rot_targets, l1, l2)?;
        append_rotation_parts(out, 0, &gates.rotations, &fanout, true)?;
    }
    Ok(())
}

/// Runs one borrowed-ancilla batch on the lattice, chunked so each chunk's
/// triples fit: pair k of a chunk is routed to labels (3k+1, 3k+2, 3k+3)
/// with its borrowed ancilla, Toffolis run expanded, and the control fans
/// onto the routed ancilla labels between and after them.
fn run_lattice_batch(
    out: &mut Circuit,
    batch: &[(usize, usize)],
    donors: &[(usize, usize)],
    max_pairs: usize,
    l1: usize,
    l2: usize,
) -> Result<()> {
    let cells = l1 * l2;
    if batch.is_empty() {
        return Ok(());
    }
    let mut pool: Vec<usize> = donors.iter().flat_map(|&(a, b)| [a, b]).collect();
    pool.sort_unstable();
    if max_pairs == 0 {
        return Err(Error::contract("lattice too small to host a Toffoli triple"));
    }
    for chunk in batch.chunks(max_pairs) {
        if pool.len() < chunk.len() {
            return Err(Error::contract("batch split cannot borrow enough ancillas"));
        }
        let anc = &pool[..chunk.len()];
        // Assignment: label occupied by pair k's members -> triple slots.
        let mut assign: Vec<usize> = vec![usize::MAX; cells];
        for (k, (&(c1, t), &a)) in chunk.iter().zip(anc).enumerate() {
            assign[c1] = 3 * k + 1;
            assign[t] = 3 * k + 2;
            assign[a] = 3 * k + 3;
        }
        complete_bijection(&mut assign);
        // Label 0 (the control) stays put: every routed label is >= 1.
        debug_assert_eq!(assign[0], 0);
        let perm = PermutationSpec::new(assign)?;
        let route = route_permutation_lattice(&perm, l1, l2)?;
        out.append(&route)?;
        let anc_labels: Vec<usize> = (0..chunk.len()).map(|k| 3 * k + 3).collect();
        let fan = fanout_on_lattice(0, &anc_labels, l1, l2)?;
        lattice_toffoli_layer(out, chunk.len())?;
        out.append(&fan)?;
        lattice_toffoli_layer(out, chunk.len())?;
        out.append(&fan)?;
        out.append(&route.inverse())?;
    }
    Ok(())
}
