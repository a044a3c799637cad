//! Gate-level circuit representation: layered gate lists, depth accounting
//! under a configurable cost model, adjoints, qubit relabeling, naive
//! controlled construction, and single-qubit unitary conversions.
//!
//! Gate set: {H, S, S†, X, R(axis-angle-phase), CNOT, SWAP, Toffoli}. SWAP
//! is primitive (expanded to 3 CNOTs only where routing needs it). The `R`
//! parameterization is U = e^{iφ}(cos(θ/2)·I − i·sin(θ/2)·n·σ) with a real
//! unit axis n, carried as params [nx, ny, nz, θ, φ].

use crate::error::{Error, Result};
use crate::numerics::C64;
use serde::{Deserialize, Serialize};

/// Axis-angle-phase parameters of an `R` gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RParams {
    pub axis: [f64; 3],
    pub theta: f64,
    pub phi: f64,
}

impl RParams {
    /// 2×2 unitary of these parameters.
    pub fn unitary(&self) -> [[C64; 2]; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        let phase = C64::new(0.0, self.phi).exp();
        let [nx, ny, nz] = self.axis;
        let i = C64::new(0.0, 1.0);
        let u00 = phase * (C64::new(c, 0.0) - i * C64::new(s * nz, 0.0));
        let u01 = phase * (C64::new(-s * ny, 0.0) - i * C64::new(s * nx, 0.0));
        let u10 = phase * (C64::new(s * ny, 0.0) - i * C64::new(s * nx, 0.0));
        let u11 = phase * (C64::new(c, 0.0) + i * C64::new(s * nz, 0.0));
        [[u00, u01], [u10, u11]]
    }

    pub fn adjoint(&self) -> RParams {
        RParams {
            axis: self.axis,
            theta: -self.theta,
            phi: -self.phi,
        }
    }

    /// True when the parameters encode the identity up to 1e-14.
    pub fn is_identity(&self) -> bool {
        let u = self.unitary();
        (u[0][0] - C64::new(1.0, 0.0)).norm() < 1e-14
            && u[0][1].norm() < 1e-14
            && u[1][0].norm() < 1e-14
            && (u[1][1] - C64::new(1.0, 0.0)).norm() < 1e-14
    }
}

/// Convert an arbitrary 2×2 unitary to axis-angle-phase parameters.
///
/// The global phase is φ = arg(det U)/2; the SU(2) remainder is decomposed
/// as cos(θ/2)·I − i·sin(θ/2)·n·σ. Round-trips within 1e-12.
pub fn unitary_to_r(u: &[[C64; 2]; 2]) -> Result<RParams> {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    if (det.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::contract("matrix is not unitary (|det| != 1)"));
    }
    let phi = det.arg() / 2.0;
    let inv_phase = C64::new(0.0, -phi).exp();
    let v = [
        [u[0][0] * inv_phase, u[0][1] * inv_phase],
        [u[1][0] * inv_phase, u[1][1] * inv_phase],
    ];
    let c = (v[0][0] + v[1][1]).re / 2.0;
    let sx = -(v[0][1] + v[1][0]).im / 2.0;
    let sy = (v[1][0].re - v[0][1].re) / 2.0;
    let sz = -(v[0][0] - v[1][1]).im / 2.0;
    let s = (sx * sx + sy * sy + sz * sz).sqrt();
    let axis = if s > 1e-12 {
        [sx / s, sy / s, sz / s]
    } else {
        [0.0, 0.0, 1.0]
    };
    let theta = 2.0 * s.atan2(c);
    Ok(RParams { axis, theta, phi })
}

/// Gate kinds of the fixed set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    R,
    CNOT,
    SWAP,
    Toffoli,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "Sdg",
            GateKind::X => "X",
            GateKind::R => "R",
            GateKind::CNOT => "CNOT",
            GateKind::SWAP => "SWAP",
            GateKind::Toffoli => "Toffoli",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::H | GateKind::S | GateKind::Sdg | GateKind::X | GateKind::R => 1,
            GateKind::CNOT | GateKind::SWAP => 2,
            GateKind::Toffoli => 3,
        }
    }

    fn from_name(name: &str) -> Result<GateKind> {
        Ok(match name {
            "H" => GateKind::H,
            "S" => GateKind::S,
            "Sdg" => GateKind::Sdg,
            "X" => GateKind::X,
            "R" => GateKind::R,
            "CNOT" => GateKind::CNOT,
            "SWAP" => GateKind::SWAP,
            "Toffoli" => GateKind::Toffoli,
            other => return Err(Error::contract(format!("unknown gate kind '{other}'"))),
        })
    }
}

/// A single gate instance. Qubit order is significant: CNOT is
/// (control, target), Toffoli is (control, control, target).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub params: Option<RParams>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>, params: Option<RParams>) -> Result<Gate> {
        if qubits.len() != kind.arity() {
            return Err(Error::contract(format!(
                "{} expects {} qubits, got {}",
                kind.name(),
                kind.arity(),
                qubits.len()
            )));
        }
        for (i, a) in qubits.iter().enumerate() {
            for b in qubits.iter().skip(i + 1) {
                if a == b {
                    return Err(Error::contract(format!(
                        "{} has repeated qubit {a}",
                        kind.name()
                    )));
                }
            }
        }
        match kind {
            GateKind::R => {
                let p = params.ok_or_else(|| Error::contract("R gate requires parameters"))?;
                let norm =
                    (p.axis[0] * p.axis[0] + p.axis[1] * p.axis[1] + p.axis[2] * p.axis[2]).sqrt();
                if (norm - 1.0).abs() > 1e-8 {
                    return Err(Error::contract("R axis must be a unit vector"));
                }
                if !p.theta.is_finite() || !p.phi.is_finite() {
                    return Err(Error::contract("R parameters must be finite"));
                }
                // Renormalize exactly so the stored unitary is within 1e-12.
                let p = RParams {
                    axis: [p.axis[0] / norm, p.axis[1] / norm, p.axis[2] / norm],
                    theta: p.theta,
                    phi: p.phi,
                };
                Ok(Gate {
                    kind,
                    qubits,
                    params: Some(p),
                })
            }
            _ => {
                if params.is_some() {
                    return Err(Error::contract(format!(
                        "{} takes no parameters",
                        kind.name()
                    )));
                }
                Ok(Gate {
                    kind,
                    qubits,
                    params: None,
                })
            }
        }
    }

    pub fn h(q: usize) -> Gate {
        Gate::new(GateKind::H, vec![q], None).expect("valid")
    }
    pub fn s(q: usize) -> Gate {
        Gate::new(GateKind::S, vec![q], None).expect("valid")
    }
    pub fn sdg(q: usize) -> Gate {
        Gate::new(GateKind::Sdg, vec![q], None).expect("valid")
    }
    pub fn x(q: usize) -> Gate {
        Gate::new(GateKind::X, vec![q], None).expect("valid")
    }
    pub fn r(q: usize, axis: [f64; 3], theta: f64, phi: f64) -> Result<Gate> {
        Gate::new(GateKind::R, vec![q], Some(RParams { axis, theta, phi }))
    }
    pub fn cnot(control: usize, target: usize) -> Gate {
        Gate::new(GateKind::CNOT, vec![control, target], None).expect("valid")
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate::new(GateKind::SWAP, vec![a, b], None).expect("valid")
    }
    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Gate {
        Gate::new(GateKind::Toffoli, vec![c1, c2, target], None).expect("valid")
    }

    /// Phase gate diag(1, e^{iα}) expressed as an R gate about z.
    pub fn phase(q: usize, alpha: f64) -> Gate {
        Gate::r(q, [0.0, 0.0, 1.0], alpha, alpha / 2.0).expect("valid")
    }

    /// T gate diag(1, e^{iπ/4}).
    pub fn t(q: usize) -> Gate {
        Gate::phase(q, std::f64::consts::FRAC_PI_4)
    }

    /// T† gate.
    pub fn tdg(q: usize) -> Gate {
        Gate::phase(q, -std::f64::consts::FRAC_PI_4)
    }

    pub fn adjoint(&self) -> Gate {
        match self.kind {
            GateKind::S => Gate::sdg(self.qubits[0]),
            GateKind::Sdg => Gate::s(self.qubits[0]),
            GateKind::R => Gate {
                kind: GateKind::R,
                qubits: self.qubits.clone(),
                params: Some(self.params.expect("R has params").adjoint()),
            },
            // H, X, CNOT, SWAP, Toffoli are involutions.
            _ => self.clone(),
        }
    }

    /// 2×2 unitary for single-qubit kinds.
    pub fn unitary2(&self) -> [[C64; 2]; 2] {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        match self.kind {
            GateKind::H => [[h, h], [h, -h]],
            GateKind::S => [[one, z], [z, i]],
            GateKind::Sdg => [[one, z], [z, -i]],
            GateKind::X => [[z, one], [one, z]],
            GateKind::R => self.params.expect("R has params").unitary(),
            _ => panic!("unitary2 called on multi-qubit gate"),
        }
    }

    /// Same gate with every qubit index mapped.
    pub fn mapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        Gate {
            kind: self.kind,
            qubits: self.qubits.iter().map(|&q| map(q)).collect(),
            params: self.params,
        }
    }
}

/// Per-kind depth costs. Defaults: every 1- and 2-qubit gate costs 1,
/// Toffoli costs 8 (its known depth-8 realization is counted, not emitted).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCostModel {
    pub single: u32,
    pub cnot: u32,
    pub swap: u32,
    pub toffoli: u32,
}

impl Default for GateCostModel {
    fn default() -> Self {
        GateCostModel {
            single: 1,
            cnot: 1,
            swap: 1,
            toffoli: 8,
        }
    }
}

impl GateCostModel {
    /// All gates cost 1; used for structural (layer-count) depth.
    pub fn unit() -> Self {
        GateCostModel {
            single: 1,
            cnot: 1,
            swap: 1,
            toffoli: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.single == 0 || self.cnot == 0 || self.swap == 0 || self.toffoli == 0 {
            return Err(Error::contract("gate costs must be >= 1"));
        }
        Ok(())
    }

    pub fn cost(&self, kind: GateKind) -> u64 {
        match kind {
            GateKind::CNOT => self.cnot as u64,
            GateKind::SWAP => self.swap as u64,
            GateKind::Toffoli => self.toffoli as u64,
            _ => self.single as u64,
        }
    }
}

/// Layered circuit over `width` qubits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Circuit {
    width: usize,
    layers: Vec<Vec<Gate>>,
}

impl Circuit {
    pub fn empty(width: usize) -> Circuit {
        Circuit {
            width,
            layers: Vec::new(),
        }
    }

    pub fn from_layers(width: usize, layers: Vec<Vec<Gate>>) -> Result<Circuit> {
        let mut c = Circuit::empty(width);
        for layer in layers {
            c.push_layer(layer)?;
        }
        Ok(c)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn num_gates(&self) -> usize {
        self.layers.iter().map(|l| l.len()).sum()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.layers.iter().flatten()
    }

    fn validate_gate(&self, gate: &Gate) -> Result<()> {
        for &q in &gate.qubits {
            if q >= self.width {
                return Err(Error::contract(format!(
                    "gate {} uses qubit {q} outside width {}",
                    gate.kind.name(),
                    self.width
                )));
            }
        }
        Ok(())
    }

    /// Append one parallel layer; every qubit may appear in at most one gate.
    pub fn push_layer(&mut self, gates: Vec<Gate>) -> Result<()> {
        let mut used = vec![false; self.width];
        for gate in &gates {
            self.validate_gate(gate)?;
            for &q in &gate.qubits {
                if used[q] {
                    return Err(Error::contract(format!(
                        "qubit {q} appears twice in one layer"
                    )));
                }
                used[q] = true;
            }
        }
        self.layers.push(gates);
        Ok(())
    }

    /// Append a gate as its own layer.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.push_layer(vec![gate])
    }

    /// Append all layers of `other` (same width) after this circuit's.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if self.width != other.width {
            return Err(Error::contract("append width mismatch"));
        }
        self.layers.extend(other.layers.iter().cloned());
        Ok(())
    }

    /// Sequential composition: `self` runs first, then `other`.
    /// U(result) = U(other) · U(self).
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        if self.width != other.width {
            return Err(Error::contract("composition width mismatch"));
        }
        let mut layers = self.layers.clone();
        layers.extend(other.layers.iter().cloned());
        Ok(Circuit {
            width: self.width,
            layers,
        })
    }

    /// Adjoint circuit: layers reversed, every gate adjointed.
    /// U(inverse) · U(self) = I.
    pub fn inverse(&self) -> Circuit {
        let layers = self
            .layers
            .iter()
            .rev()
            .map(|layer| layer.iter().map(Gate::adjoint).collect())
            .collect();
        Circuit {
            width: self.width,
            layers,
        }
    }

    /// Relabel qubits through `map` (index → new index) into a circuit of
    /// `new_width`. `map` must be injective on the used qubits.
    pub fn mapped(&self, map: &[usize], new_width: usize) -> Result<Circuit> {
        if map.len() != self.width {
            return Err(Error::contract("qubit map length mismatch"));
        }
        let mut c = Circuit::empty(new_width);
        for layer in &self.layers {
            let mapped = layer.iter().map(|g| g.mapped(|q| map[q])).collect();
            c.push_layer(mapped)?;
        }
        Ok(c)
    }

    /// Weighted longest-chain depth after as-soon-as-possible scheduling.
    /// List scheduling over qubit-sharing dependencies is exact here: a
    /// gate starts when its last qubit frees up, so the maximum finish time
    /// equals the longest weighted dependency chain.
    pub fn depth(&self, cost: &GateCostModel) -> u64 {
        let mut avail = vec![0u64; self.width];
        let mut depth = 0u64;
        for layer in &self.layers {
            for gate in layer {
                let start = gate.qubits.iter().map(|&q| avail[q]).max().unwrap_or(0);
                let finish = start + cost.cost(gate.kind);
                for &q in &gate.qubits {
                    avail[q] = finish;
                }
                depth = depth.max(finish);
            }
        }
        depth
    }

    /// Re-group gates into unit-cost ASAP layers. The unitary is unchanged;
    /// the layer count equals `depth(unit costs)`.
    pub fn relayer(&self) -> Circuit {
        let mut avail = vec![0usize; self.width];
        let mut layers: Vec<Vec<Gate>> = Vec::new();
        for layer in &self.layers {
            for gate in layer {
                let start = gate.qubits.iter().map(|&q| avail[q]).max().unwrap_or(0);
                if start == layers.len() {
                    layers.push(Vec::new());
                }
                layers[start].push(gate.clone());
                for &q in &gate.qubits {
                    avail[q] = start + 1;
                }
            }
        }
        Circuit {
            width: self.width,
            layers,
        }
    }

    /// Expand SWAP gates into 3 CNOTs (sequential layers); other gates pass
    /// through. Used where a construction's accounting is in CNOT layers.
    pub fn expand_swaps(&self) -> Circuit {
        let mut c = Circuit::empty(self.width);
        for layer in &self.layers {
            let mut plain: Vec<Gate> = Vec::new();
            let mut swaps: Vec<(usize, usize)> = Vec::new();
            for gate in layer {
                if gate.kind == GateKind::SWAP {
                    swaps.push((gate.qubits[0], gate.qubits[1]));
                } else {
                    plain.push(gate.clone());
                }
            }
            if !plain.is_empty() {
                c.push_layer(plain).expect("validated");
            }
            if !swaps.is_empty() {
                for round in 0..3 {
                    let gates: Vec<Gate> = swaps
                        .iter()
                        .map(|&(a, b)| {
                            if round == 1 {
                                Gate::cnot(b, a)
                            } else {
                                Gate::cnot(a, b)
                            }
                        })
                        .collect();
                    c.push_layer(gates).expect("validated");
                }
            }
        }
        c
    }
}

/// A connectivity violation: a multi-qubit gate spanning a non-edge.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub layer: usize,
    pub gate: String,
    pub qubits: Vec<usize>,
}

/// Every multi-qubit gate whose qubit pair (any pair, for Toffoli) is not an
/// edge of `g`. Empty result means the circuit conforms to the graph.
pub fn validate_connectivity(
    c: &Circuit,
    g: &crate::graph::ConnectivityGraph,
) -> Result<Vec<Violation>> {
    if c.width() != g.vertex_count() {
        return Err(Error::contract(format!(
            "circuit width {} does not match graph vertex count {}",
            c.width(),
            g.vertex_count()
        )));
    }
    let mut out = Vec::new();
    for (li, layer) in c.layers().iter().enumerate() {
        for gate in layer {
            if gate.qubits.len() < 2 {
                continue;
            }
            let mut ok = true;
            for (i, &a) in gate.qubits.iter().enumerate() {
                for &b in gate.qubits.iter().skip(i + 1) {
                    if !g.has_edge(a, b) {
                        ok = false;
                    }
                }
            }
            if !ok {
                out.push(Violation {
                    layer: li,
                    gate: gate.kind.name().to_string(),
                    qubits: gate.qubits.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// ZYZ-based pieces for a controlled single-qubit unitary:
/// U = e^{iα}·A·X·B·X·C with A·B·C = I. Returns (a, b, c, alpha) as R
/// parameters; the controlled gate is then
/// [C; CNOT; B; CNOT; A] on the target plus diag(1, e^{iα}) on the control.
pub fn abc_decomposition(u: &[[C64; 2]; 2]) -> Result<(RParams, RParams, RParams, f64)> {
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    if (det.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::contract("abc_decomposition input is not unitary"));
    }
    let alpha = det.arg() / 2.0;
    let inv_phase = C64::new(0.0, -alpha).exp();
    let v = [
        [u[0][0] * inv_phase, u[0][1] * inv_phase],
        [u[1][0] * inv_phase, u[1][1] * inv_phase],
    ];
    // V = Rz(beta) Ry(gamma) Rz(delta).
    let m00 = v[0][0].norm();
    let m10 = v[1][0].norm();
    let gamma = 2.0 * m10.atan2(m00);
    let (beta, delta) = if m10 < 1e-12 {
        (-2.0 * v[0][0].arg(), 0.0)
    } else if m00 < 1e-12 {
        (2.0 * v[1][0].arg(), 0.0)
    } else {
        let a0 = v[0][0].arg();
        let a1 = v[1][0].arg();
        (a1 - a0, -a1 - a0)
    };

    let rz = |t: f64| -> [[C64; 2]; 2] {
        [
            [C64::new(0.0, -t / 2.0).exp(), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.0, t / 2.0).exp()],
        ]
    };
    let ry = |t: f64| -> [[C64; 2]; 2] {
        let (s, c) = (t / 2.0).sin_cos();
        [
            [C64::new(c, 0.0), C64::new(-s, 0.0)],
            [C64::new(s, 0.0), C64::new(c, 0.0)],
        ]
    };
    let mul = |a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]| -> [[C64; 2]; 2] {
        let mut out = [[C64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    };

    let a_mat = mul(&rz(beta), &ry(gamma / 2.0));
    let b_mat = mul(&ry(-gamma / 2.0), &rz(-(delta + beta) / 2.0));
    let c_mat = rz((delta - beta) / 2.0);
    Ok((
        unitary_to_r(&a_mat)?,
        unitary_to_r(&b_mat)?,
        unitary_to_r(&c_mat)?,
        alpha,
    ))
}

/// Singly-controlled version of a single-qubit gate, expanded into the
/// two-CNOT ABC pattern. `control` and `target` are output-circuit indices.
/// Returns the time-ordered gate sequence (each entry one layer).
pub fn controlled_single(gate: &Gate, control: usize, target: usize) -> Result<Vec<Vec<Gate>>> {
    let u = gate.unitary2();
    let (a, b, c, alpha) = abc_decomposition(&u)?;
    let mut seq: Vec<Vec<Gate>> = Vec::new();
    if !c.is_identity() {
        seq.push(vec![Gate::new(GateKind::R, vec![target], Some(c))?]);
    }
    seq.push(vec![Gate::cnot(control, target)]);
    if !b.is_identity() {
        seq.push(vec![Gate::new(GateKind::R, vec![target], Some(b))?]);
    }
    seq.push(vec![Gate::cnot(control, target)]);
    let mut last: Vec<Gate> = Vec::new();
    if !a.is_identity() {
        last.push(Gate::new(GateKind::R, vec![target], Some(a))?);
    }
    if alpha.abs() > 1e-15 {
        last.push(Gate::phase(control, alpha));
    }
    if !last.is_empty() {
        seq.push(last);
    }
    Ok(seq)
}

/// Standard Toffoli realization over {H, T, T†, CNOT}: 6 CNOTs plus
/// single-qubit gates. Used where a controlled-Toffoli must stay inside the
/// gate set, and by the lattice mapper.
pub fn toffoli_decomposition(c1: usize, c2: usize, t: usize) -> Vec<Vec<Gate>> {
    vec![
        vec![Gate::h(t)],
        vec![Gate::cnot(c2, t)],
        vec![Gate::tdg(t)],
        vec![Gate::cnot(c1, t)],
        vec![Gate::t(t)],
        vec![Gate::cnot(c2, t)],
        vec![Gate::tdg(t)],
        vec![Gate::cnot(c1, t)],
        vec![Gate::t(c2), Gate::t(t)],
        vec![Gate::cnot(c1, c2), Gate::h(t)],
        vec![Gate::t(c1), Gate::tdg(c2)],
        vec![Gate::cnot(c1, c2)],
    ]
}

/// Naive controlled construction: width n+1, qubit 0 is the new control,
/// data qubits shifted up by one. Every gate is replaced by its
/// singly-controlled version; no parallelism is attempted (this is the
/// O(d·n) baseline the optimized constructions are measured against).
pub fn controlled_naive(c: &Circuit) -> Result<Circuit> {
    let mut out = Circuit::empty(c.width() + 1);
    for layer in c.layers() {
        for gate in layer {
            let q = |i: usize| gate.qubits[i] + 1;
            match gate.kind {
                GateKind::X => out.push(Gate::cnot(0, q(0)))?,
                GateKind::CNOT => out.push(Gate::toffoli(0, q(0), q(1)))?,
                GateKind::SWAP => {
                    // Controlled-SWAP via the 3-CNOT expansion of SWAP.
                    out.push(Gate::toffoli(0, q(0), q(1)))?;
                    out.push(Gate::toffoli(0, q(1), q(0)))?;
                    out.push(Gate::toffoli(0, q(0), q(1)))?;
                }
                GateKind::Toffoli => {
                    // Stay in the gate set: expand the Toffoli into
                    // {H, T, CNOT} and control each piece.
                    for sub in toffoli_decomposition(q(0), q(1), q(2)) {
                        for g in sub {
                            match g.kind {
                                GateKind::CNOT => {
                                    out.push(Gate::toffoli(0, g.qubits[0], g.qubits[1]))?
                                }
                                _ => {
                                    for l in controlled_single(&g, 0, g.qubits[0])? {
                                        out.push_layer(l)?;
                                    }
                                }
                            }
                        }
                    }
                }
                GateKind::H | GateKind::S | GateKind::Sdg | GateKind::R => {
                    for l in controlled_single(gate, 0, q(0))? {
                        out.push_layer(l)?;
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---- JSON encoding ------------------------------------------------------
//
// Schema: { "width": n, "layers": [ [ {"kind": "...", "qubits": [...],
// "params": [...]}, ... ], ... ] }. `params` is [nx, ny, nz, theta, phi]
// for R and [] otherwise. Field order is fixed for byte-exact round-trips.

#[derive(Serialize, Deserialize)]
struct GateJson {
    kind: String,
    qubits: Vec<usize>,
    params: Vec<f64>,
}

impl Serialize for Gate {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let params = match self.params {
            Some(p) => vec![p.axis[0], p.axis[1], p.axis[2], p.theta, p.phi],
            None => Vec::new(),
        };
        GateJson {
            kind: self.kind.name().to_string(),
            qubits: self.qubits.clone(),
            params,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Gate {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Gate, D::Error> {
        let raw = GateJson::deserialize(de)?;
        let kind = GateKind::from_name(&raw.kind).map_err(serde::de::Error::custom)?;
        let params = if kind == GateKind::R {
            if raw.params.len() != 5 {
                return Err(serde::de::Error::custom(
                    "R gate expects params [nx, ny, nz, theta, phi]",
                ));
            }
            Some(RParams {
                axis: [raw.params[0], raw.params[1], raw.params[2]],
                theta: raw.params[3],
                phi: raw.params[4],
            })
        } else {
            if !raw.params.is_empty() {
                return Err(serde::de::Error::custom(format!(
                    "{} takes no params",
                    raw.kind
                )));
            }
            None
        };
        Gate::new(kind, raw.qubits, params).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Circuit {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Shadow<'a> {
            width: usize,
            layers: &'a Vec<Vec<Gate>>,
        }
        Shadow {
            width: self.width,
            layers: &self.layers,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Circuit {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Circuit, D::Error> {
        #[derive(Deserialize)]
        struct Shadow {
            width: usize,
            layers: Vec<Vec<Gate>>,
        }
        let raw = Shadow::deserialize(de)?;
        Circuit::from_layers(raw.width, raw.layers).map_err(serde::de::Error::custom)
    }
}
