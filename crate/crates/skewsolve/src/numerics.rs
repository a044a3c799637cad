//! Dense complex linear algebra for the classical side of the solvers:
//! SVD with a fixed sign convention, Moore-Penrose pseudo-inverse, spectral
//! metrics, a Hermitian eigensolver, and the shifted-regularized solve.
//!
//! Storage and arithmetic come from `nalgebra`; the factorization kernels
//! are first-party cyclic Jacobi (one-sided for the SVD, two-sided for the
//! Hermitian eigensolve), which keep full accuracy on the rank-deficient
//! and complex inputs the solvers produce.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Default relative rank cutoff: singular values below this multiple of the
/// largest are treated as zero.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 64;

/// Singular value decomposition `a = left · diag(singular_values) · right†`.
///
/// `left` is rows×k, `right` is cols×k with k = min(rows, cols); columns
/// paired with a nonzero singular value are orthonormal (a zero singular
/// value leaves one side's column zero). Singular values are sorted
/// nonincreasing. The phase of each column pair is fixed so the first entry
/// of each right singular vector with magnitude above 1e-12 is real
/// nonnegative, which makes the factorization reproducible across runs.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    pub left: CMat,
    pub singular_values: Vec<f64>,
    pub right: CMat,
}

impl SvdFactorization {
    /// Reconstruct the original matrix (test oracle).
    pub fn reconstruct(&self) -> CMat {
        let k = self.singular_values.len();
        let mut scaled = self.left.clone();
        for j in 0..k {
            let s = C64::new(self.singular_values[j], 0.0);
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= s;
            }
        }
        &scaled * self.right.adjoint()
    }
}

fn check_finite(a: &CMat) -> Result<()> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::contract("matrix contains non-finite entries"));
    }
    Ok(())
}

/// Cyclic one-sided Jacobi: returns `(w, v)` with `a = w·v†`, `v` unitary
/// and the columns of `w` mutually orthogonal, so the column norms of `w`
/// are the singular values. The pair threshold `√rows·ε` sits at the noise
/// floor of the column dot products; pairs below it cannot be resolved and
/// rotating them would only churn.
fn orthogonalize_columns(a: &CMat) -> Result<(CMat, CMat)> {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    let tol = (a.nrows() as f64).sqrt() * f64::EPSILON;
    // Columns crushed below ε times the largest column norm sit beneath the
    // factorization's resolution; rotating those crumbs against each other
    // would never settle (their mutual angles are garbage), so deflate them.
    let scale2 = (0..n)
        .map(|j| w.column(j).norm_squared())
        .fold(0.0_f64, f64::max);
    let floor2 = f64::EPSILON * f64::EPSILON * scale2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for j in 0..n {
            for k in (j + 1)..n {
                // 2x2 Gram of the pair: [[alpha, gamma], [conj(gamma), beta]].
                let alpha = w.column(j).norm_squared();
                let beta = w.column(k).norm_squared();
                if alpha <= floor2 || beta <= floor2 {
                    continue;
                }
                let gamma = w.column(j).dotc(&w.column(k));
                let g = gamma.norm();
                if g <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                // Pull the phase of gamma into column k, then rotate by the
                // real Jacobi angle that zeroes the off-diagonal. Dividing
                // the components by the real modulus sidesteps the squared
                // denominator a complex division would underflow.
                let phase = C64::new(gamma.re / g, gamma.im / g);
                let tau = (alpha - beta) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let cc = C64::new(c, 0.0);
                let ss = C64::new(s, 0.0);
                let cp = cc * phase.conj();
                let sp = ss * phase.conj();
                for i in 0..w.nrows() {
                    let wj = w[(i, j)];
                    let wk = w[(i, k)];
                    w[(i, j)] = wj * cc + wk * sp;
                    w[(i, k)] = wk * cp - wj * ss;
                }
                for i in 0..n {
                    let vj = v[(i, j)];
                    let vk = v[(i, k)];
                    v[(i, j)] = vj * cc + vk * sp;
                    v[(i, k)] = vk * cp - vj * ss;
                }
            }
        }
        if !rotated {
            return Ok((w, v));
        }
    }
    // Sweep cap reached: accept if the columns are orthogonal well past the
    // rank cutoffs downstream; only genuine stagnation is an error.
    let mut worst = 0.0_f64;
    for j in 0..n {
        for k in (j + 1)..n {
            let alpha = w.column(j).norm_squared();
            let beta = w.column(k).norm_squared();
            if alpha <= floor2 || beta <= floor2 {
                continue;
            }
            let g = w.column(j).dotc(&w.column(k)).norm();
            worst = worst.max(g / (alpha.sqrt() * beta.sqrt()).max(f64::MIN_POSITIVE));
        }
    }
    if worst <= 1e-12 {
        return Ok((w, v));
    }
    Err(Error::numerical("SVD sweeps did not converge"))
}

/// SVD with sorted singular values and the fixed phase convention. Wide
/// inputs are factored through their adjoint.
pub fn svd(a: &CMat) -> Result<SvdFactorization> {
    check_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(Error::contract("svd of empty matrix"));
    }
    let tall = a.nrows() >= a.ncols();
    let work = if tall { a.clone() } else { a.adjoint() };
    let (w, v) = orthogonalize_columns(&work)?;
    let k = w.ncols();
    let mut sv = vec![0.0_f64; k];
    let mut u = CMat::zeros(w.nrows(), k);
    let largest = (0..k).map(|j| w.column(j).norm()).fold(0.0_f64, f64::max);
    for j in 0..k {
        let s = w.column(j).norm();
        // Columns the sweep deflated carry no resolvable direction; report
        // them as exact zeros rather than noise-scale values.
        if s <= f64::EPSILON * largest {
            continue;
        }
        sv[j] = s;
        let inv = C64::new(1.0 / s, 0.0);
        for i in 0..w.nrows() {
            u[(i, j)] = w[(i, j)] * inv;
        }
    }
    // a = uΣv† when tall; otherwise a = (uΣv†)† = vΣu†.
    let (unsorted_left, unsorted_right) = if tall { (u, v) } else { (v, u) };

    // Sort nonincreasing.
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).expect("finite singular values"));

    let mut left = CMat::zeros(a.nrows(), k);
    let mut right = CMat::zeros(a.ncols(), k);
    let mut singular_values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        singular_values.push(sv[src]);
        left.set_column(dst, &unsorted_left.column(src));
        right.set_column(dst, &unsorted_right.column(src));
    }

    // Phase convention: first entry of each right singular vector with
    // magnitude > 1e-12 becomes real nonnegative; the matching left column
    // absorbs the conjugate phase so the product is unchanged.
    for j in 0..k {
        let mut phase = C64::new(1.0, 0.0);
        for i in 0..a.ncols() {
            let z = right[(i, j)];
            if z.norm() > 1e-12 {
                phase = z / z.norm();
                break;
            }
        }
        let correction = phase.conj();
        for i in 0..a.ncols() {
            right[(i, j)] *= correction;
        }
        for i in 0..a.nrows() {
            left[(i, j)] *= correction;
        }
    }

    Ok(SvdFactorization {
        left,
        singular_values,
        right,
    })
}

/// Moore-Penrose pseudo-inverse with relative rank cutoff.
pub fn pseudo_inverse(a: &CMat, rank_tolerance: f64) -> Result<CMat> {
    if rank_tolerance < 0.0 {
        return Err(Error::contract("rank_tolerance must be >= 0"));
    }
    let f = svd(a)?;
    let smax = f.singular_values.first().copied().unwrap_or(0.0);
    let cutoff = rank_tolerance * smax;
    let k = f.singular_values.len();
    // A+ = V Σ+ U†, nonzero singular values reciprocated.
    let mut scaled = f.right.clone();
    for j in 0..k {
        let s = f.singular_values[j];
        let inv = if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 };
        let w = C64::new(inv, 0.0);
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= w;
        }
    }
    Ok(&scaled * f.left.adjoint())
}

/// Spectral norm, pseudo-inverse norm, condition number and Frobenius norm,
/// all read off one SVD. The condition number is the ratio of the largest to
/// the smallest nonzero (above cutoff) singular value.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralMetrics {
    pub spectral_norm: f64,
    pub pinv_norm: f64,
    pub condition_number: f64,
    pub frobenius_norm: f64,
}

pub fn spectral_metrics(a: &CMat, rank_tolerance: f64) -> Result<SpectralMetrics> {
    let f = svd(a)?;
    let smax = f.singular_values.first().copied().unwrap_or(0.0);
    if smax <= 0.0 {
        return Err(Error::contract("spectral_metrics of an all-zero matrix"));
    }
    let cutoff = rank_tolerance * smax;
    let smin = f
        .singular_values
        .iter()
        .copied()
        .filter(|&s| s > cutoff)
        .fold(smax, f64::min);
    let frobenius_norm = f.singular_values.iter().map(|s| s * s).sum::<f64>().sqrt();
    Ok(SpectralMetrics {
        spectral_norm: smax,
        pinv_norm: 1.0 / smin,
        condition_number: smax / smin,
        frobenius_norm,
    })
}

/// How far a matrix is from Hermitian, as max entrywise deviation.
pub fn hermitian_deviation(v: &CMat) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            dev = dev.max((v[(i, j)] - v[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Hermitian eigendecomposition `h = vectors · diag(values) · vectors†` by
/// cyclic two-sided Jacobi rotations. `h` must be Hermitian (symmetrize
/// first if it is only approximately so); handles indefinite matrices.
/// Eigenvalues come back unsorted.
pub fn hermitian_eigen(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    check_finite(h)?;
    if !h.is_square() || h.nrows() == 0 {
        return Err(Error::contract(
            "hermitian_eigen needs a nonempty square matrix",
        ));
    }
    let n = h.nrows();
    let mut m = h.clone();
    let mut q = CMat::identity(n, n);
    // Off-diagonal mass only decreases, so pivots below ε times the initial
    // scale can never grow back into relevance.
    let tol = f64::EPSILON * m.norm().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for r in (p + 1)..n {
                let gamma = m[(p, r)];
                let g = gamma.norm();
                if g <= tol {
                    continue;
                }
                rotated = true;
                let phase = C64::new(gamma.re / g, gamma.im / g);
                let tau = (m[(p, p)].re - m[(r, r)].re) / (2.0 * g);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let cc = C64::new(c, 0.0);
                let ss = C64::new(s, 0.0);
                let cp = cc * phase.conj();
                let sp = ss * phase.conj();
                // m ← m·R on columns p,r ...
                for i in 0..n {
                    let mp = m[(i, p)];
                    let mr = m[(i, r)];
                    m[(i, p)] = mp * cc + mr * sp;
                    m[(i, r)] = mr * cp - mp * ss;
                }
                // ... then m ← R†·m on rows p,r.
                let cpp = cc * phase;
                let spp = ss * phase;
                for i in 0..n {
                    let mp = m[(p, i)];
                    let mr = m[(r, i)];
                    m[(p, i)] = mp * cc + mr * spp;
                    m[(r, i)] = mr * cpp - mp * ss;
                }
                // Eigenvectors accumulate the same column rotations.
                for i in 0..n {
                    let qp = q[(i, p)];
                    let qr = q[(i, r)];
                    q[(i, p)] = qp * cc + qr * sp;
                    q[(i, r)] = qr * cp - qp * ss;
                }
                // The rotation zeroes the pivot exactly; write the zeros so
                // rounding crumbs cannot accumulate.
                m[(p, r)] = C64::new(0.0, 0.0);
                m[(r, p)] = C64::new(0.0, 0.0);
            }
        }
        if !rotated {
            let values = (0..n).map(|i| m[(i, i)].re).collect();
            return Ok((values, q));
        }
    }
    // Same escape hatch as the SVD sweeps: accept near-converged states.
    let mut worst = 0.0_f64;
    for p in 0..n {
        for r in (p + 1)..n {
            worst = worst.max(m[(p, r)].norm());
        }
    }
    if worst <= 1e3 * tol {
        let values = (0..n).map(|i| m[(i, i)].re).collect();
        return Ok((values, q));
    }
    Err(Error::numerical("eigenvalue sweeps did not converge"))
}

/// Solve `(V + λI)⁺ q` for Hermitian `V` via eigendecomposition.
///
/// `V` must be Hermitian within 1e-10 (relative to its largest entry); it is
/// symmetrized to `(V+V†)/2` first. Eigenvalues of the shifted matrix with
/// magnitude at or below `rank_tolerance` times the largest are treated as
/// zero (pseudo-inverse semantics); for λ > 0 and PSD `V` the solve is exact.
pub fn solve_shifted(v: &CMat, q: &CVec, lambda: f64, rank_tolerance: f64) -> Result<CVec> {
    if !v.is_square() {
        return Err(Error::contract("solve_shifted requires a square matrix"));
    }
    if v.nrows() != q.len() {
        return Err(Error::contract("matrix/vector dimension mismatch"));
    }
    if lambda < 0.0 {
        return Err(Error::contract("lambda must be >= 0"));
    }
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    if hermitian_deviation(v) > 1e-10 * scale {
        return Err(Error::contract("matrix is not Hermitian within tolerance"));
    }
    let sym = (v + v.adjoint()) * C64::new(0.5, 0.0);
    let (eigenvalues, vectors) = hermitian_eigen(&sym)?;
    let n = q.len();
    let shifted: Vec<f64> = eigenvalues.iter().map(|&m| m + lambda).collect();
    let largest = shifted.iter().map(|m| m.abs()).fold(0.0, f64::max);
    let cutoff = rank_tolerance * largest;
    let mut x = CVec::zeros(n);
    for k in 0..n {
        let mu = shifted[k];
        if mu.abs() <= cutoff || mu == 0.0 {
            continue;
        }
        let phi = vectors.column(k);
        let coef = phi.dotc(q) / C64::new(mu, 0.0);
        for i in 0..n {
            x[i] += phi[i] * coef;
        }
    }
    Ok(x)
}

/// Perturbation bound `λ‖V⁻¹‖²‖q‖` on `‖V⁺q − (V+λI)⁻¹q‖` for PSD Hermitian
/// `V` and `q` in the range of `V`.
pub fn perturbation_bound(v: &CMat, q: &CVec, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::contract("lambda must be >= 0"));
    }
    let pinv = pseudo_inverse(v, DEFAULT_RANK_TOL)?;
    let projected = v * (&pinv * q);
    let qnorm = q.norm();
    if (&projected - q).norm() > 1e-8 * qnorm.max(f64::MIN_POSITIVE) {
        return Err(Error::contract(
            "q is not in the range of v; the bound requires a consistent system",
        ));
    }
    if qnorm == 0.0 {
        return Ok(0.0);
    }
    let metrics = spectral_metrics(v, DEFAULT_RANK_TOL)?;
    Ok(lambda * metrics.pinv_norm * metrics.pinv_norm * qnorm)
}

/// l2 distance between two vectors (test helper used across modules).
pub fn vec_distance(a: &CVec, b: &CVec) -> f64 {
    (a - b).norm()
}

/// Least-squares line fit returning `(slope, intercept)`. Needs at least
/// two distinct x values.
pub fn fit_line(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::contract("line fit needs at least two points"));
    }
    if points.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::contract("line fit needs finite points"));
    }
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::contract("line fit needs at least two distinct x values"));
    }
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x))
}
