//! Gram-matrix and right-hand-side estimation shared by the solvers.
//!
//! Entry (j, k) of the Gram matrix is ‖a_j‖‖a_k‖⟨a_j|a_k⟩, with the overlap
//! read off a Hadamard test. Only j ≤ k is estimated; (k, j) is filled by
//! conjugation, so the result is exactly Hermitian. Each entry draws from
//! its own derived seed, so entries are order-independent and could run
//! concurrently without changing any output.

use std::collections::BTreeSet;

use crate::circuit::{Circuit, GateCostModel};
use crate::error::{Error, Result};
use crate::graph::ConnectivityGraph;
use crate::hadamard::{build_hadamard_test, estimate_overlap, Construction, OverlapPart};
use crate::numerics::{CMat, CVec, C64};
use crate::seed::child_seed;
use crate::solver::types::{ColumnOracle, GramEstimate, Mode};
use crate::transpile::{
    ceil_log2, depth_bound_with_ancillas, lattice_cost_model, normalize_to_cnot_single,
    DepthReport, C_LAT,
};

/// Shared width of a nonempty oracle slice.
pub(crate) fn shared_width(label: &str, oracles: &[ColumnOracle]) -> Result<usize> {
    let first = oracles
        .first()
        .ok_or_else(|| Error::contract(format!("{label}: empty oracle list")))?;
    let width = first.prep.width();
    for (j, oracle) in oracles.iter().enumerate() {
        oracle.validate()?;
        if oracle.prep.width() != width {
            return Err(Error::contract(format!(
                "{label}: oracle {j} has width {}, expected {width}",
                oracle.prep.width()
            )));
        }
    }
    Ok(width)
}

/// Shots per estimated entry for the given mode: exact mode executes no
/// shots, sampled mode requires at least one.
fn entry_shots(mode: Mode, shots_per_entry: u64) -> Result<u64> {
    match mode {
        Mode::ExactExpectation => Ok(0),
        Mode::Sampled if shots_per_entry == 0 => Err(Error::contract(
            "sampled mode requires shots_per_entry >= 1",
        )),
        Mode::Sampled => Ok(shots_per_entry),
    }
}

/// The circuit whose ⟨0|·|0⟩ element is ⟨0|a† b|0⟩: run b, then the
/// inverse of a. Matches the composition inside `estimate_overlap`.
fn overlap_circuit(a: &Circuit, b: &Circuit) -> Result<Circuit> {
    b.then(&a.inverse())
}

/// Depth report for one executed Hadamard-test circuit over the bare
/// circuit `u`.
///
/// The bound is the construction's closed form plus the test wrapper (two
/// ancilla layers for Re, three for Im); the naive construction has no
/// optimized closed form, so its bound is the measured depth itself. The
/// lower bound is the lightcone floor ⌈log₂(t+1)⌉ over the t data qubits
/// `u` touches plus the ancilla: all our constructions couple the ancilla
/// to every touched qubit, and no gate of unit weighted cost widens a
/// lightcone by more than a factor of two (Toffoli triples it at cost 8).
pub(crate) fn depth_report_for_test(
    u: &Circuit,
    part: OverlapPart,
    construction: &Construction,
) -> Result<DepthReport> {
    depth_report_for_test_with(u, part, construction, None)
}

/// `depth_report_for_test` under a caller-supplied cost model. The closed
/// forms hold only for the costs they were derived under, so an override
/// reports the measured depth as its own bound.
pub(crate) fn depth_report_for_test_with(
    u: &Circuit,
    part: OverlapPart,
    construction: &Construction,
    cost_override: Option<&GateCostModel>,
) -> Result<DepthReport> {
    let test = build_hadamard_test(u, part, construction)?;
    let wrapper: u64 = match part {
        OverlapPart::Re => 2,
        OverlapPart::Im => 3,
    };
    let (default_cost, connectivity) = match *construction {
        Construction::Lattice { l1, l2 } => {
            (lattice_cost_model(), ConnectivityGraph::lattice(l1, l2))
        }
        _ => (
            GateCostModel::default(),
            ConnectivityGraph::complete(test.width()),
        ),
    };
    let cost_model = match cost_override {
        Some(c) => {
            c.validate()?;
            *c
        }
        None => default_cost,
    };
    let measured_depth = test.depth(&cost_model);
    let n = u.width();
    let d = normalize_to_cnot_single(u).num_layers() as u64;
    let (bound_formula, bound_value) = match (*construction, cost_override) {
        (_, Some(_)) => (
            "custom cost model (bound = measured)".to_string(),
            measured_depth,
        ),
        (Construction::Naive, None) => (
            "reference construction (bound = measured)".to_string(),
            measured_depth,
        ),
        (Construction::Ancillas { s }, None) => (
            format!("2*ceil_log2({s}) + {d}*(12*ceil_log2(ceil({n}/{s})) + 9) + {wrapper}"),
            depth_bound_with_ancillas(n, s, d) + wrapper,
        ),
        (Construction::Lattice { l1, l2 }, None) => (
            format!("C_LAT*{d}*({l1}+{l2}) + {wrapper}, C_LAT = {C_LAT}"),
            C_LAT * d * (l1 + l2) as u64 + wrapper,
        ),
    };
    let touched: BTreeSet<usize> = u
        .gates()
        .flat_map(|g| g.qubits.iter().copied())
        .collect();
    let report = DepthReport {
        measured_depth,
        bound_formula,
        bound_value,
        lower_bound: ceil_log2(touched.len() as u64 + 1),
        cost_model,
        connectivity,
    };
    report.validate()?;
    Ok(report)
}

/// `estimate_gram` with full control over the construction and the
/// diagonal, recording one DepthReport per executed test circuit.
pub fn estimate_gram_with(
    columns: &[ColumnOracle],
    shots_per_entry: u64,
    seed: u64,
    mode: Mode,
    construction: &Construction,
    exact_diagonal: bool,
    depth_out: &mut Vec<DepthReport>,
) -> Result<GramEstimate> {
    shared_width("estimate_gram", columns)?;
    let shots = entry_shots(mode, shots_per_entry)?;
    let m = columns.len();
    let mut matrix = CMat::zeros(m, m);
    for j in 0..m {
        for k in j..m {
            let scale = columns[j].norm * columns[k].norm;
            if j == k && exact_diagonal {
                matrix[(j, j)] = C64::new(scale, 0.0);
                continue;
            }
            let entry_seed = child_seed(seed, &format!("gram:{j}:{k}"));
            let est = estimate_overlap(
                &columns[j].prep,
                &columns[k].prep,
                shots,
                entry_seed,
                construction,
            )?;
            if shots > 0 {
                let u = overlap_circuit(&columns[j].prep, &columns[k].prep)?;
                depth_out.push(depth_report_for_test(&u, OverlapPart::Re, construction)?);
                depth_out.push(depth_report_for_test(&u, OverlapPart::Im, construction)?);
            }
            if j == k {
                // Gram diagonals are real; the Re quadrature carries all of
                // the signal (⟨a_j|a_j⟩ = 1 exactly for unit preps).
                matrix[(j, j)] = C64::new(scale * est.value.re, 0.0);
            } else {
                let v = est.value * scale;
                matrix[(j, k)] = v;
                matrix[(k, j)] = v.conj();
            }
        }
    }
    let max_norm = columns.iter().map(|c| c.norm).fold(0.0_f64, f64::max);
    Ok(GramEstimate {
        matrix,
        shots_per_entry: shots,
        gamma: max_norm * max_norm,
    })
}

/// Estimate the Gram matrix V with V_jk = ‖a_j‖‖a_k‖⟨a_j|a_k⟩ through
/// Hadamard tests with the reference controlled construction. Exact mode
/// reads overlaps from the statevector and reproduces A†A.
pub fn estimate_gram(
    columns: &[ColumnOracle],
    shots_per_entry: u64,
    seed: u64,
    mode: Mode,
) -> Result<GramEstimate> {
    let mut sink = Vec::new();
    estimate_gram_with(
        columns,
        shots_per_entry,
        seed,
        mode,
        &Construction::Naive,
        false,
        &mut sink,
    )
}

/// `estimate_rhs` with full control over the construction, recording one
/// DepthReport per executed test circuit.
pub fn estimate_rhs_with(
    columns: &[ColumnOracle],
    b: &ColumnOracle,
    shots_per_entry: u64,
    seed: u64,
    mode: Mode,
    construction: &Construction,
    depth_out: &mut Vec<DepthReport>,
) -> Result<CVec> {
    let width = shared_width("estimate_rhs", columns)?;
    b.validate()?;
    if b.prep.width() != width {
        return Err(Error::contract(format!(
            "estimate_rhs: rhs oracle has width {}, expected {width}",
            b.prep.width()
        )));
    }
    let shots = entry_shots(mode, shots_per_entry)?;
    let mut q = CVec::zeros(columns.len());
    for (j, col) in columns.iter().enumerate() {
        let entry_seed = child_seed(seed, &format!("rhs:{j}"));
        let est = estimate_overlap(&col.prep, &b.prep, shots, entry_seed, construction)?;
        if shots > 0 {
            let u = overlap_circuit(&col.prep, &b.prep)?;
            depth_out.push(depth_report_for_test(&u, OverlapPart::Re, construction)?);
            depth_out.push(depth_report_for_test(&u, OverlapPart::Im, construction)?);
        }
        q[j] = est.value * (col.norm * b.norm);
    }
    Ok(q)
}

/// Estimate q with q_j = ‖a_j‖‖b‖⟨a_j|b⟩ through Hadamard tests with the
/// reference controlled construction. `shots_per_entry = 0` selects exact
/// mode, which reproduces A†b.
pub fn estimate_rhs(
    columns: &[ColumnOracle],
    b: &ColumnOracle,
    shots_per_entry: u64,
    seed: u64,
) -> Result<CVec> {
    let mode = if shots_per_entry == 0 {
        Mode::ExactExpectation
    } else {
        Mode::Sampled
    };
    let mut sink = Vec::new();
    estimate_rhs_with(
        columns,
        b,
        shots_per_entry,
        seed,
        mode,
        &Construction::Naive,
        &mut sink,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::hermitian_deviation;
    use crate::sim::{apply, StateVector};
    use crate::solver::testutil::{oracle_from_vector, random_columns as random_instance, random_unit};
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn orthonormal_columns_give_scaled_identity() {
        // Basis columns e_0, e_1 with norms 1 and 3: V = diag(1, 9).
        let width = 2;
        let n = 4;
        let e0 = CVec::from_fn(n, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let e1 = CVec::from_fn(n, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        let columns = vec![
            oracle_from_vector(&e0, width, 1.0),
            oracle_from_vector(&e1, width, 3.0),
        ];
        let gram = estimate_gram(&columns, 0, 0, Mode::ExactExpectation).unwrap();
        assert!((gram.matrix[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-10);
        assert!((gram.matrix[(1, 1)] - C64::new(9.0, 0.0)).norm() < 1e-10);
        assert!(gram.matrix[(0, 1)].norm() < 1e-10);
        assert!(gram.matrix[(1, 0)].norm() < 1e-10);
        assert!((gram.gamma - 9.0).abs() < 1e-12);
    }

    #[test]
    fn single_column_of_norm_two_gives_four() {
        let mut rng = StdRng::seed_from_u64(11);
        let v = random_unit(&mut rng, 8);
        let columns = vec![oracle_from_vector(&v, 3, 2.0)];
        let gram = estimate_gram(&columns, 0, 0, Mode::ExactExpectation).unwrap();
        assert_eq!(gram.matrix.nrows(), 1);
        assert!((gram.matrix[(0, 0)] - C64::new(4.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn exact_gram_matches_dense_product() {
        // Oracle: V = A^dagger A from the dense reconstruction.
        let mut rng = StdRng::seed_from_u64(23);
        let (columns, a) = random_instance(&mut rng, 4, 4);
        let gram = estimate_gram(&columns, 0, 0, Mode::ExactExpectation).unwrap();
        let want = a.adjoint() * &a;
        assert!(
            (&gram.matrix - &want).norm() < 1e-9,
            "deviation {}",
            (&gram.matrix - &want).norm()
        );
    }

    #[test]
    fn exact_rhs_matches_dense_product() {
        let mut rng = StdRng::seed_from_u64(31);
        let (columns, a) = random_instance(&mut rng, 4, 3);
        let bv = random_unit(&mut rng, 16);
        let b = oracle_from_vector(&bv, 4, 1.3);
        let q = estimate_rhs(&columns, &b, 0, 0).unwrap();
        let want = a.adjoint() * (&bv * C64::new(1.3, 0.0));
        assert!((&q - &want).norm() < 1e-9, "deviation {}", (&q - &want).norm());
    }

    #[test]
    fn rhs_equal_to_first_column_picks_out_its_norm() {
        let width = 2;
        let n = 4;
        let e0 = CVec::from_fn(n, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let e1 = CVec::from_fn(n, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        let columns = vec![
            oracle_from_vector(&e0, width, 2.0),
            oracle_from_vector(&e1, width, 1.0),
        ];
        let b = oracle_from_vector(&e0, width, 1.5);
        let q = estimate_rhs(&columns, &b, 0, 0).unwrap();
        assert!((q[0] - C64::new(3.0, 0.0)).norm() < 1e-10);
        assert!(q[1].norm() < 1e-10);
    }

    #[test]
    fn rhs_orthogonal_to_all_columns_is_zero() {
        let width = 2;
        let n = 4;
        let e0 = CVec::from_fn(n, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let e1 = CVec::from_fn(n, |i, _| C64::new(if i == 1 { 1.0 } else { 0.0 }, 0.0));
        let e3 = CVec::from_fn(n, |i, _| C64::new(if i == 3 { 1.0 } else { 0.0 }, 0.0));
        let columns = vec![
            oracle_from_vector(&e0, width, 1.0),
            oracle_from_vector(&e1, width, 1.0),
        ];
        let b = oracle_from_vector(&e3, width, 2.0);
        let q = estimate_rhs(&columns, &b, 0, 0).unwrap();
        assert!(q.norm() < 1e-10);
    }

    #[test]
    fn sampled_gram_is_exactly_hermitian_and_near_psd() {
        let mut rng = StdRng::seed_from_u64(47);
        let (columns, a) = random_instance(&mut rng, 3, 4);
        let shots = 4096;
        let gram = estimate_gram(&columns, shots, 99, Mode::Sampled).unwrap();
        assert_eq!(gram.shots_per_entry, shots);
        assert_eq!(hermitian_deviation(&gram.matrix), 0.0);
        // Diagonals are real and exact for unit preps: the Re quadrature of
        // <a_j|a_j> always measures zero.
        for j in 0..4 {
            let want = columns[j].norm * columns[j].norm;
            assert!((gram.matrix[(j, j)].re - want).abs() < 1e-12);
            assert_eq!(gram.matrix[(j, j)].im, 0.0);
        }
        // Smallest eigenvalue may dip negative by sampling slack only; the
        // scale of the slack is gamma*sqrt(M/shots). Reported, not a hard
        // bound (the acceptance claim lives in the scaling-law test).
        let (eigenvalues, _) = crate::numerics::hermitian_eigen(&gram.matrix).unwrap();
        let min_eig = eigenvalues.iter().copied().fold(f64::MAX, f64::min);
        let slack = gram.gamma * (4.0_f64 / shots as f64).sqrt();
        eprintln!("min eigenvalue {min_eig:.3e}, sampling slack scale {slack:.3e}");
        let want = a.adjoint() * &a;
        let dev = (&gram.matrix - &want).norm();
        assert!(dev < 20.0 * slack, "sampled deviation {dev} too large");
    }

    #[test]
    fn sampled_gram_is_reproducible_and_seed_sensitive() {
        let mut rng = StdRng::seed_from_u64(53);
        let (columns, _) = random_instance(&mut rng, 2, 3);
        let g1 = estimate_gram(&columns, 256, 7, Mode::Sampled).unwrap();
        let g2 = estimate_gram(&columns, 256, 7, Mode::Sampled).unwrap();
        let g3 = estimate_gram(&columns, 256, 8, Mode::Sampled).unwrap();
        assert_eq!(g1.matrix, g2.matrix);
        assert_ne!(g1.matrix, g3.matrix);
    }

    #[test]
    fn exact_diagonal_toggle_pins_diagonal() {
        let mut rng = StdRng::seed_from_u64(61);
        let (columns, _) = random_instance(&mut rng, 2, 2);
        let mut sink = Vec::new();
        let gram = estimate_gram_with(
            &columns,
            64,
            5,
            Mode::Sampled,
            &Construction::Naive,
            true,
            &mut sink,
        )
        .unwrap();
        for j in 0..2 {
            let want = columns[j].norm * columns[j].norm;
            assert_eq!(gram.matrix[(j, j)], C64::new(want, 0.0));
        }
        // 1 off-diagonal entry, 2 quadratures: diagonal entries skipped.
        assert_eq!(sink.len(), 2);
        for report in &sink {
            report.validate().unwrap();
        }
    }

    #[test]
    fn depth_reports_cover_every_executed_test() {
        let mut rng = StdRng::seed_from_u64(67);
        let (columns, _) = random_instance(&mut rng, 2, 3);
        for construction in [
            Construction::Naive,
            Construction::Ancillas { s: 2 },
            Construction::Lattice { l1: 2, l2: 2 },
        ] {
            let mut sink = Vec::new();
            estimate_gram_with(&columns, 32, 3, Mode::Sampled, &construction, false, &mut sink)
                .unwrap();
            // M(M+1)/2 = 6 entries, 2 quadratures each.
            assert_eq!(sink.len(), 12, "{construction}");
            for report in &sink {
                report.validate().unwrap();
                assert!(report.lower_bound <= report.measured_depth);
            }
        }
    }

    #[test]
    fn constructions_agree_on_sampled_statistics() {
        // Same seeds and same Pr(0) per test circuit mean bit-identical
        // estimates across constructions.
        let mut rng = StdRng::seed_from_u64(71);
        let (columns, _) = random_instance(&mut rng, 2, 2);
        let mut sink = Vec::new();
        let naive = estimate_gram_with(
            &columns, 512, 13, Mode::Sampled, &Construction::Naive, false, &mut sink,
        )
        .unwrap();
        let lattice = estimate_gram_with(
            &columns,
            512,
            13,
            Mode::Sampled,
            &Construction::Lattice { l1: 2, l2: 2 },
            false,
            &mut sink,
        )
        .unwrap();
        assert_eq!(naive.matrix, lattice.matrix);
    }

    #[test]
    fn width_mismatch_is_rejected() {
        let e0 = CVec::from_fn(4, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let e0w3 = CVec::from_fn(8, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let columns = vec![
            oracle_from_vector(&e0, 2, 1.0),
            oracle_from_vector(&e0w3, 3, 1.0),
        ];
        assert!(estimate_gram(&columns, 0, 0, Mode::ExactExpectation).is_err());
        let b = oracle_from_vector(&e0w3, 3, 1.0);
        assert!(estimate_rhs(&columns[..1], &b, 0, 0).is_err());
    }

    #[test]
    fn sampled_mode_with_zero_shots_is_rejected() {
        let e0 = CVec::from_fn(4, |i, _| C64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0));
        let columns = vec![oracle_from_vector(&e0, 2, 1.0)];
        assert!(estimate_gram(&columns, 0, 0, Mode::Sampled).is_err());
    }

    #[test]
    fn prepared_states_match_reconstruction() {
        // ColumnOracle::column is the oracle the dense tests lean on; check
        // it against a hand-built amplitude vector.
        let mut rng = StdRng::seed_from_u64(73);
        let v = random_unit(&mut rng, 8);
        let oracle = oracle_from_vector(&v, 3, 1.7);
        let col = oracle.column().unwrap();
        let direct = apply(
            &oracle.prep,
            &StateVector::zero_state(3).unwrap(),
        )
        .unwrap();
        for i in 0..8 {
            assert!((col[i] - direct.amplitudes()[i] * C64::new(1.7, 0.0)).norm() < 1e-12);
            assert!((col[i] - v[i] * C64::new(1.7, 0.0)).norm() < 1e-9);
        }
    }
}
