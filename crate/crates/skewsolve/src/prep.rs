//! State preparation: synthesize a {R, CNOT} circuit sending |0...0⟩ to a
//! given unit vector via a binary rotation tree (uniformly-controlled
//! rotations expanded through Gray-code CNOT sequences).

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::numerics::{C64, CVec};

const Y_AXIS: [f64; 3] = [0.0, 1.0, 0.0];
const Z_AXIS: [f64; 3] = [0.0, 0.0, 1.0];

/// Append a uniformly-controlled rotation about `axis` on `target`,
/// multiplexed over `controls` (control state i gets `angles[i]`, bit m of
/// i addressing controls[m]). Expanded as the standard alternating
/// rotation/CNOT Gray-code walk; a multiplex whose angles are all zero is
/// the identity and emits nothing.
fn push_multiplexed_rotation(
    c: &mut Circuit,
    target: usize,
    controls: &[usize],
    axis: [f64; 3],
    angles: &[f64],
) -> Result<()> {
    let k = controls.len();
    assert_eq!(angles.len(), 1 << k);
    if angles.iter().all(|a| a.abs() < 1e-14) {
        return Ok(());
    }
    if k == 0 {
        c.push(Gate::r(target, axis, angles[0], 0.0)?)?;
        return Ok(());
    }
    let m = 1usize << k;
    for j in 0..m {
        let gray = j ^ (j >> 1);
        let mut theta = 0.0;
        for (i, &angle) in angles.iter().enumerate() {
            let sign = if (i & gray).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            theta += sign * angle;
        }
        theta /= m as f64;
        if theta.abs() > 1e-14 {
            c.push(Gate::r(target, axis, theta, 0.0)?)?;
        }
        let flip = if j + 1 < m {
            (j + 1).trailing_zeros() as usize
        } else {
            k - 1
        };
        c.push(Gate::cnot(controls[flip], target))?;
    }
    Ok(())
}

/// Circuit with U(c)|0...0⟩ = v within 1e-8. `v` must be unit norm with
/// dimension 2^width.
///
/// Construction: walk qubits from the top down, rotating each amplitude
/// pair (a, b) over the current qubit into (e^{i·arg a}·√(|a|²+|b|²), 0)
/// with a multiplexed Rz·Ry·Rz triple; the resulting circuit maps v to
/// |0...0⟩ and is emitted inverted. Real nonnegative inputs reduce to a
/// pure Ry rotation tree.
pub fn synthesize_state_prep(v: &CVec, width: usize) -> Result<Circuit> {
    if width == 0 || width > crate::sim::MAX_STATE_WIDTH {
        return Err(Error::resource(format!(
            "state prep width must be in 1..={}, got {width}",
            crate::sim::MAX_STATE_WIDTH
        )));
    }
    if v.len() != 1usize << width {
        return Err(Error::contract(format!(
            "vector dimension {} is not 2^{width}",
            v.len()
        )));
    }
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::contract(format!(
            "state prep input has norm {}, expected 1 within 1e-10",
            v.norm()
        )));
    }

    let mut work: Vec<C64> = v.iter().copied().collect();
    let mut to_zero = Circuit::empty(width);
    for q in (0..width).rev() {
        let half = 1usize << q;
        let controls: Vec<usize> = (0..q).collect();
        let mut gammas = vec![0.0; half];
        let mut betas = vec![0.0; half];
        let mut deltas = vec![0.0; half];
        let mut next = vec![C64::new(0.0, 0.0); half];
        for i in 0..half {
            let a = work[i];
            let b = work[i + half];
            let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
            if r < 1e-14 {
                continue;
            }
            let phase_a = if a.norm() > 1e-14 { a.arg() } else { 0.0 };
            let rel = if b.norm() > 1e-14 {
                b.arg() - phase_a
            } else {
                0.0
            };
            // W = Rz(rel)·Ry(γ)·Rz(−rel) sends (a,b) to (e^{i·arg a}·r, 0).
            gammas[i] = -2.0 * b.norm().atan2(a.norm());
            betas[i] = rel;
            deltas[i] = -rel;
            next[i] = C64::new(0.0, phase_a).exp() * r;
        }
        push_multiplexed_rotation(&mut to_zero, q, &controls, Z_AXIS, &deltas)?;
        push_multiplexed_rotation(&mut to_zero, q, &controls, Y_AXIS, &gammas)?;
        push_multiplexed_rotation(&mut to_zero, q, &controls, Z_AXIS, &betas)?;
        work = next;
    }
    let residual_phase = work[0].arg();
    if residual_phase.abs() > 1e-14 {
        // Global phase so the inverse reproduces v exactly.
        to_zero.push(Gate::r(0, Z_AXIS, 0.0, -residual_phase)?)?;
    }
    Ok(to_zero.inverse().relayer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim;

    fn prepared(v: &CVec, width: usize) -> CVec {
        let c = synthesize_state_prep(v, width).unwrap();
        let out = sim::apply(&c, &sim::StateVector::zero_state(width).unwrap()).unwrap();
        out.amplitudes().clone()
    }

    #[test]
    fn zero_vector_gives_empty_circuit() {
        let mut v = CVec::zeros(8);
        v[0] = C64::new(1.0, 0.0);
        let c = synthesize_state_prep(&v, 3).unwrap();
        assert_eq!(c.num_gates(), 0);
    }

    #[test]
    fn uniform_pair_is_single_rotation() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVec::from_vec(vec![C64::new(r, 0.0), C64::new(r, 0.0)]);
        let c = synthesize_state_prep(&v, 1).unwrap();
        assert_eq!(c.num_gates(), 1);
        let got = prepared(&v, 1);
        for i in 0..2 {
            assert!((got[i] - v[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn random_states_prepared_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(11);
        for width in 1..=4usize {
            for _ in 0..5 {
                let dim = 1usize << width;
                let mut v = CVec::from_fn(dim, |_, _| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                });
                v /= C64::new(v.norm(), 0.0);
                let got = prepared(&v, width);
                for i in 0..dim {
                    assert!(
                        (got[i] - v[i]).norm() < 1e-8,
                        "width {width} entry {i}: {} vs {}",
                        got[i],
                        v[i]
                    );
                }
            }
        }
    }

    #[test]
    fn non_unit_rejected() {
        let v = CVec::from_vec(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(synthesize_state_prep(&v, 1).is_err());
    }
}
