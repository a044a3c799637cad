//! Shot budgets and regularization weights from the convergence theorems.
//!
//! Each budget pairs a ridge weight λ with a per-entry shot count ⌈Γ²T⌉,
//! where T is the theorem's total-sample bound and Γ bounds the magnitude
//! of the quantities being estimated. `budget_scale` multiplies T, standing
//! in for the constant hidden in the O(·) of the theorem statements.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::SpectralMetrics;

/// A sizing decision: ridge weight, total-sample bound, and entry-size
/// bound. The per-entry shot count is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub lambda: f64,
    /// Theorem sample bound T (after budget_scale).
    pub t: f64,
    /// Entry-size bound Γ.
    pub gamma: f64,
}

impl SampleBudget {
    /// Per-entry shot count ⌈Γ²T⌉, at least 1. Materialized only when a
    /// sampled run needs it: exact runs read λ off the same budget without
    /// tripping over a T too large to execute.
    pub fn shots_per_entry(&self) -> Result<u64> {
        let raw = self.gamma * self.gamma * self.t;
        if !raw.is_finite() {
            return Err(Error::resource(format!(
                "shot budget overflow: gamma^2*T = {raw}"
            )));
        }
        let ceil = raw.ceil();
        if ceil >= u64::MAX as f64 {
            return Err(Error::resource(format!(
                "shot budget {ceil} exceeds the representable shot count"
            )));
        }
        Ok((ceil as u64).max(1))
    }
}

fn check_metrics(metrics: &SpectralMetrics) -> Result<()> {
    if !metrics.spectral_norm.is_finite()
        || !metrics.pinv_norm.is_finite()
        || metrics.spectral_norm <= 0.0
        || metrics.pinv_norm <= 0.0
    {
        return Err(Error::contract(format!(
            "spectral metrics must be finite and positive: norm {}, pinv norm {}",
            metrics.spectral_norm, metrics.pinv_norm
        )));
    }
    Ok(())
}

/// Budget for the column-oracle solver of `A x = b` (M columns).
///
/// λ = ε / (2‖A‖²‖A⁺‖⁴‖b‖) and
/// T = M‖A⁺‖⁴κ⁴‖b‖²(‖A‖(‖x*‖+1)+ε)² / ε⁴, with Γ = max_j
/// max(‖a_j‖‖b‖, ‖a_j‖²). `norm_bound_x` bounds ‖x*‖; pass
/// ‖A⁺‖²‖A†b‖ when nothing sharper is known.
pub fn sample_budget_overdetermined(
    metrics: &SpectralMetrics,
    column_norms: &[f64],
    b_norm: f64,
    epsilon: f64,
    norm_bound_x: f64,
    budget_scale: f64,
) -> Result<SampleBudget> {
    check_metrics(metrics)?;
    if column_norms.is_empty() {
        return Err(Error::contract("budget needs at least one column norm"));
    }
    if !(epsilon > 0.0) || !(b_norm > 0.0) || !(norm_bound_x >= 0.0) {
        return Err(Error::contract(format!(
            "budget inputs out of range: epsilon {epsilon}, |b| {b_norm}, |x*| bound {norm_bound_x}"
        )));
    }
    let norm = metrics.spectral_norm;
    let pinv = metrics.pinv_norm;
    let kappa = metrics.condition_number;
    let m = column_norms.len() as f64;

    let lambda = epsilon / (2.0 * norm.powi(2) * pinv.powi(4) * b_norm);
    let t = budget_scale
        * m
        * pinv.powi(4)
        * kappa.powi(4)
        * b_norm.powi(2)
        * (norm * (norm_bound_x + 1.0) + epsilon).powi(2)
        / epsilon.powi(4);
    let max_col = column_norms.iter().copied().fold(0.0_f64, f64::max);
    let gamma = (max_col * b_norm).max(max_col * max_col);

    Ok(SampleBudget { lambda, t, gamma })
}

/// Budget for the row-oracle solver of `A† y = c` (M rows).
///
/// λ = ε / (2‖A⁺‖⁸‖A‖⁴‖c‖) and
/// T = M κ¹²‖A⁺‖⁴‖c‖²(‖A‖²‖α*‖+ε+‖c‖)² / ε⁴ + M/‖A‖⁴, with
/// Γ = max_j ‖a_j‖². `norm_bound_alpha` bounds the coefficient vector
/// α* = (AA†)⁺c; pass ‖A⁺‖²‖c‖ when nothing sharper is known.
pub fn sample_budget_underdetermined(
    metrics: &SpectralMetrics,
    row_norms: &[f64],
    c_norm: f64,
    epsilon: f64,
    norm_bound_alpha: f64,
    budget_scale: f64,
) -> Result<SampleBudget> {
    check_metrics(metrics)?;
    if row_norms.is_empty() {
        return Err(Error::contract("budget needs at least one row norm"));
    }
    if !(epsilon > 0.0) || !(c_norm > 0.0) || !(norm_bound_alpha >= 0.0) {
        return Err(Error::contract(format!(
            "budget inputs out of range: epsilon {epsilon}, |c| {c_norm}, |alpha*| bound {norm_bound_alpha}"
        )));
    }
    let norm = metrics.spectral_norm;
    let pinv = metrics.pinv_norm;
    let kappa = metrics.condition_number;
    let m = row_norms.len() as f64;

    let lambda = epsilon / (2.0 * pinv.powi(8) * norm.powi(4) * c_norm);
    let t = budget_scale
        * m
        * kappa.powi(12)
        * pinv.powi(4)
        * c_norm.powi(2)
        * (norm.powi(2) * norm_bound_alpha + epsilon + c_norm).powi(2)
        / epsilon.powi(4)
        + m / norm.powi(4);
    let gamma = row_norms
        .iter()
        .map(|n| n * n)
        .fold(0.0_f64, f64::max);

    Ok(SampleBudget { lambda, t, gamma })
}

/// Two-stage budget for the factorized solver of `A₁A₂ x = b` with both
/// factors full rank R.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorizedBudget {
    /// Stage solving V₁ y = q with V₁ = A₁†A₁, q = A₁†b.
    pub stage1: SampleBudget,
    /// Stage solving Q α = ŷ with Q = A₂A₂†.
    pub stage2: SampleBudget,
    /// Stage-1 target error ε₁ = √(R / T₂).
    pub epsilon1: f64,
}

/// Budget for the exact-factor path (both factors rank R, so the shifted
/// solves run with λ = 0).
///
/// T₂ = R‖A‖²‖Q⁻¹‖²(1+‖α*‖²) / ε², ε₁ = √(R/T₂),
/// T₁ = R‖V⁻¹‖²(1+‖y*‖²) / ε₁², Γ₁ = max_j max(‖u_j‖², ‖u_j‖‖b‖),
/// Γ₂ = max_j ‖v_j‖².
#[allow(clippy::too_many_arguments)]
pub fn sample_budget_factorized(
    a_norm: f64,
    v1_pinv_norm: f64,
    q2_pinv_norm: f64,
    u_norms: &[f64],
    v_norms: &[f64],
    b_norm: f64,
    epsilon: f64,
    norm_bound_y: f64,
    norm_bound_alpha: f64,
    budget_scale: f64,
) -> Result<FactorizedBudget> {
    if u_norms.is_empty() || v_norms.is_empty() {
        return Err(Error::contract("budget needs factor norms"));
    }
    if !(epsilon > 0.0)
        || !(a_norm > 0.0)
        || !(v1_pinv_norm > 0.0)
        || !(q2_pinv_norm > 0.0)
        || !(b_norm >= 0.0)
    {
        return Err(Error::contract(format!(
            "budget inputs out of range: epsilon {epsilon}, |A| {a_norm}, |V1^+| {v1_pinv_norm}, |Q2^+| {q2_pinv_norm}, |b| {b_norm}"
        )));
    }
    let r = v_norms.len() as f64;

    let t2 = budget_scale * r * a_norm.powi(2) * q2_pinv_norm.powi(2)
        * (1.0 + norm_bound_alpha.powi(2))
        / epsilon.powi(2);
    let epsilon1 = (r / t2).sqrt();
    let t1 = budget_scale * r * v1_pinv_norm.powi(2) * (1.0 + norm_bound_y.powi(2))
        / epsilon1.powi(2);

    let max_u = u_norms.iter().copied().fold(0.0_f64, f64::max);
    let gamma1 = (max_u * max_u).max(max_u * b_norm);
    let gamma2 = v_norms.iter().map(|n| n * n).fold(0.0_f64, f64::max);

    Ok(FactorizedBudget {
        stage1: SampleBudget {
            lambda: 0.0,
            t: t1,
            gamma: gamma1,
        },
        stage2: SampleBudget {
            lambda: 0.0,
            t: t2,
            gamma: gamma2,
        },
        epsilon1,
    })
}

/// Budget for the relaxed-factor path: A₂ keeps full row rank R but A₁ may
/// be singular, so stage 1 runs a ridge solve.
///
/// T₂ = R‖A₁‖²‖A₂‖²‖A₂⁺‖⁴(1+‖α*‖)² / ε², ε₁ = √(R/T₂),
/// λ = ε₁ / (2‖A₁⁺‖⁴‖A₁‖²‖b‖),
/// T₁ = R‖A₁⁺‖⁸‖A₁‖²‖b‖²(‖A₁‖(‖y*‖+1)+ε₁)² / ε₁⁴.
#[allow(clippy::too_many_arguments)]
pub fn sample_budget_factorized_relaxed(
    a1_metrics: &SpectralMetrics,
    a2_metrics: &SpectralMetrics,
    u_norms: &[f64],
    v_norms: &[f64],
    b_norm: f64,
    epsilon: f64,
    norm_bound_y: f64,
    norm_bound_alpha: f64,
    budget_scale: f64,
) -> Result<FactorizedBudget> {
    check_metrics(a1_metrics)?;
    check_metrics(a2_metrics)?;
    if u_norms.is_empty() || v_norms.is_empty() {
        return Err(Error::contract("budget needs factor norms"));
    }
    if !(epsilon > 0.0) || !(b_norm > 0.0) {
        return Err(Error::contract(format!(
            "budget inputs out of range: epsilon {epsilon}, |b| {b_norm}"
        )));
    }
    let r = v_norms.len() as f64;
    let n1 = a1_metrics.spectral_norm;
    let p1 = a1_metrics.pinv_norm;
    let n2 = a2_metrics.spectral_norm;
    let p2 = a2_metrics.pinv_norm;

    let t2 = budget_scale * r * n1.powi(2) * n2.powi(2) * p2.powi(4)
        * (1.0 + norm_bound_alpha).powi(2)
        / epsilon.powi(2);
    let epsilon1 = (r / t2).sqrt();
    let lambda = epsilon1 / (2.0 * p1.powi(4) * n1.powi(2) * b_norm);
    let t1 = budget_scale * r * p1.powi(8) * n1.powi(2) * b_norm.powi(2)
        * (n1 * (norm_bound_y + 1.0) + epsilon1).powi(2)
        / epsilon1.powi(4);

    let max_u = u_norms.iter().copied().fold(0.0_f64, f64::max);
    let gamma1 = (max_u * max_u).max(max_u * b_norm);
    let gamma2 = v_norms.iter().map(|n| n * n).fold(0.0_f64, f64::max);

    Ok(FactorizedBudget {
        stage1: SampleBudget {
            lambda,
            t: t1,
            gamma: gamma1,
        },
        stage2: SampleBudget {
            lambda: 0.0,
            t: t2,
            gamma: gamma2,
        },
        epsilon1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics(norm: f64, pinv: f64) -> SpectralMetrics {
        SpectralMetrics {
            spectral_norm: norm,
            pinv_norm: pinv,
            condition_number: norm * pinv,
            frobenius_norm: norm,
        }
    }

    #[test]
    fn overdetermined_lambda_matches_formula() {
        // |A| = 2, |A^+| = 1, |b| = 1, eps = 0.4:
        // lambda = 0.4 / (2 * 4 * 1 * 1) = 0.05.
        let m = metrics(2.0, 1.0);
        let budget =
            sample_budget_overdetermined(&m, &[1.0, 1.0], 1.0, 0.4, 1.0, 1.0).unwrap();
        assert!((budget.lambda - 0.05).abs() < 1e-15);
    }

    #[test]
    fn overdetermined_matches_independent_evaluation() {
        let m = metrics(3.0, 0.8);
        let (b_norm, eps, x_bound, scale) = (1.7, 0.12, 2.5, 2.0);
        let cols = [0.9, 1.4, 0.6];
        let budget =
            sample_budget_overdetermined(&m, &cols, b_norm, eps, x_bound, scale).unwrap();

        let kappa: f64 = 3.0 * 0.8;
        let want_lambda = eps / (2.0 * 3.0_f64.powi(2) * 0.8_f64.powi(4) * b_norm);
        let want_t = scale * 3.0 * 0.8_f64.powi(4) * kappa.powi(4) * b_norm.powi(2)
            * (3.0 * (x_bound + 1.0) + eps).powi(2)
            / eps.powi(4);
        let want_gamma = (1.4 * b_norm).max(1.4 * 1.4);
        assert!((budget.lambda - want_lambda).abs() < 1e-12 * want_lambda);
        assert!((budget.t - want_t).abs() < 1e-9 * want_t);
        assert!((budget.gamma - want_gamma).abs() < 1e-12);
        assert_eq!(
            budget.shots_per_entry().unwrap(),
            (want_gamma * want_gamma * want_t).ceil() as u64
        );
    }

    #[test]
    fn doubling_epsilon_shrinks_budget_superlinearly() {
        // T scales near eps^-4 (the parenthesized term also moves), so
        // halving eps must grow T by more than 2x, and doubling shrink it.
        let m = metrics(2.0, 1.5);
        let base =
            sample_budget_overdetermined(&m, &[1.0], 1.0, 0.1, 1.0, 1.0).unwrap();
        let doubled =
            sample_budget_overdetermined(&m, &[1.0], 1.0, 0.2, 1.0, 1.0).unwrap();
        assert!(doubled.t < base.t / 8.0);
        assert!(doubled.lambda > base.lambda * 1.9);
    }

    #[test]
    fn underdetermined_matches_independent_evaluation() {
        let m = metrics(2.2, 1.1);
        let (c_norm, eps, a_bound, scale) = (0.9, 0.25, 1.8, 1.5);
        let rows = [1.2, 0.7];
        let budget =
            sample_budget_underdetermined(&m, &rows, c_norm, eps, a_bound, scale).unwrap();

        let kappa: f64 = 2.2 * 1.1;
        let want_lambda = eps / (2.0 * 1.1_f64.powi(8) * 2.2_f64.powi(4) * c_norm);
        let want_t = scale * 2.0 * kappa.powi(12) * 1.1_f64.powi(4) * c_norm.powi(2)
            * (2.2_f64.powi(2) * a_bound + eps + c_norm).powi(2)
            / eps.powi(4)
            + 2.0 / 2.2_f64.powi(4);
        assert!((budget.lambda - want_lambda).abs() < 1e-12 * want_lambda);
        assert!((budget.t - want_t).abs() < 1e-9 * want_t);
        assert!((budget.gamma - 1.44).abs() < 1e-12);
    }

    #[test]
    fn budget_scale_multiplies_only_the_theorem_term() {
        // The +M/|A|^4 additive term is exact, not part of the O(.) bound.
        let m = metrics(2.0, 1.0);
        let base =
            sample_budget_underdetermined(&m, &[1.0], 1.0, 0.5, 1.0, 1.0).unwrap();
        let scaled =
            sample_budget_underdetermined(&m, &[1.0], 1.0, 0.5, 1.0, 3.0).unwrap();
        let additive = 1.0 / 16.0;
        let theorem = base.t - additive;
        assert!((scaled.t - (3.0 * theorem + additive)).abs() < 1e-9 * scaled.t);
    }

    #[test]
    fn factorized_stage_coupling_follows_epsilon1() {
        let (a_norm, v1p, q2p) = (2.0, 1.0, 0.5);
        let budget = sample_budget_factorized(
            a_norm, v1p, q2p, &[1.0, 1.5], &[1.0, 2.0], 1.0, 0.1, 1.0, 1.0, 1.0,
        )
        .unwrap();
        let r: f64 = 2.0;
        let want_t2 = r * 4.0 * 0.25 * 2.0 / 0.01;
        let want_eps1 = (r / want_t2).sqrt();
        let want_t1 = r * 1.0 * 2.0 / want_eps1.powi(2);
        assert!((budget.stage2.t - want_t2).abs() < 1e-9 * want_t2);
        assert!((budget.epsilon1 - want_eps1).abs() < 1e-12);
        assert!((budget.stage1.t - want_t1).abs() < 1e-9 * want_t1);
        assert_eq!(budget.stage1.lambda, 0.0);
        assert_eq!(budget.stage2.lambda, 0.0);
        // Gamma1 mixes |u_j| with |b|; gamma2 is the largest |v_j|^2.
        assert!((budget.stage1.gamma - 2.25).abs() < 1e-12);
        assert!((budget.stage2.gamma - 4.0).abs() < 1e-12);
    }

    #[test]
    fn relaxed_budget_ridge_follows_stage1_error() {
        let a1 = metrics(2.0, 1.25);
        let a2 = metrics(1.5, 0.9);
        let budget = sample_budget_factorized_relaxed(
            &a1, &a2, &[1.0], &[1.0, 1.0], 2.0, 0.2, 1.0, 1.0, 1.0,
        )
        .unwrap();
        let r: f64 = 2.0;
        let want_t2 =
            r * 4.0 * 2.25 * 0.9_f64.powi(4) * 4.0 / 0.04;
        let want_eps1 = (r / want_t2).sqrt();
        let want_lambda = want_eps1 / (2.0 * 1.25_f64.powi(4) * 4.0 * 2.0);
        assert!((budget.stage2.t - want_t2).abs() < 1e-9 * want_t2);
        assert!((budget.epsilon1 - want_eps1).abs() < 1e-12);
        assert!((budget.stage1.lambda - want_lambda).abs() < 1e-12 * want_lambda);
    }

    #[test]
    fn nonpositive_epsilon_is_rejected() {
        let m = metrics(1.0, 1.0);
        assert!(sample_budget_overdetermined(&m, &[1.0], 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(sample_budget_underdetermined(&m, &[1.0], 1.0, -0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn absurd_budget_is_a_resource_error() {
        // Sizing the budget always works; asking to execute it does not.
        let m = metrics(1e6, 1e6);
        let budget =
            sample_budget_overdetermined(&m, &[1e6], 1.0, 1e-9, 1.0, 1.0).unwrap();
        let err = budget.shots_per_entry().unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
