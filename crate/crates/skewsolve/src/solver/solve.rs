//! The four hybrid solvers and the residual diagnostic.
//!
//! Each solver estimates small Gram systems through Hadamard tests, then
//! runs a regularized classical solve on the assembled matrix. The residual
//! gap of every output is evaluated against the dense pseudo-inverse
//! optimum reconstructed from the oracles.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::{
    pseudo_inverse, solve_shifted, spectral_metrics, CMat, CVec, DEFAULT_RANK_TOL,
};
use crate::seed::child_seed;
use crate::solver::budget::{
    sample_budget_factorized, sample_budget_factorized_relaxed, sample_budget_overdetermined,
    sample_budget_underdetermined, SampleBudget,
};
use crate::solver::gram::{estimate_gram_with, estimate_rhs_with, shared_width};
use crate::solver::types::{
    columns_to_matrix, rows_to_matrix, ColumnOracle, LinearSystemInstance, Mode, Rhs,
    SolveConfig, SolveReport,
};
use crate::transpile::DepthReport;

/// ‖A·sol − rhs‖ − min over solutions, both sides dense.
fn gap_value(a: &CMat, rhs: &CVec, sol: &CVec) -> Result<f64> {
    if sol.len() != a.ncols() {
        return Err(Error::contract(format!(
            "solution has {} entries, system has {} unknowns",
            sol.len(),
            a.ncols()
        )));
    }
    let pinv = pseudo_inverse(a, DEFAULT_RANK_TOL)?;
    let optimum = (a * (&pinv * rhs) - rhs).norm();
    Ok((a * sol - rhs).norm() - optimum)
}

/// ‖A·sol − rhs‖ − min_x ‖A·x − rhs‖ for a column instance (sol = x̂), or
/// ‖A†ŷ − c‖ − min_y ‖A†y − c‖ for a row instance (sol = s, ŷ = Σ s_j|a_j⟩).
/// Everything is reconstructed densely from the oracles.
pub fn residual_gap(instance: &LinearSystemInstance, coefficients: &CVec) -> Result<f64> {
    instance.validate()?;
    let a = instance.reconstruct_matrix()?;
    match &instance.rhs {
        Rhs::Oracle(b) => gap_value(&a, &b.column()?, coefficients),
        Rhs::Vector(c) => {
            if coefficients.len() != instance.columns.len() {
                return Err(Error::contract(format!(
                    "coefficient vector has {} entries, instance has {} columns",
                    coefficients.len(),
                    instance.columns.len()
                )));
            }
            // ŷ = Σ s_j |a_j⟩ over the unit column states.
            let mut y = CVec::zeros(a.nrows());
            for (j, col) in instance.columns.iter().enumerate() {
                y += col.state()? * coefficients[j];
            }
            gap_value(&a.adjoint(), c, &y)
        }
    }
}

fn reject_zero_norm_columns(columns: &[ColumnOracle]) -> Result<()> {
    for (j, col) in columns.iter().enumerate() {
        if col.norm == 0.0 {
            return Err(Error::contract(format!(
                "column {j} has zero norm; drop it from the instance"
            )));
        }
    }
    Ok(())
}

/// Shots actually spent per entry: none in exact mode, the override or the
/// theorem budget otherwise. The budget's shot count is materialized only
/// when sampling will actually happen, so exact runs can carry budgets whose
/// T is far past what any backend could execute.
fn effective_shots(config: &SolveConfig, budget: &SampleBudget) -> Result<u64> {
    match config.mode {
        Mode::ExactExpectation => Ok(0),
        Mode::Sampled => match config.shot_override {
            Some(n) => Ok(n),
            None => budget.shots_per_entry(),
        },
    }
}

fn assemble_report(
    coefficients: CVec,
    residual: f64,
    lambda: f64,
    shots: &[(&str, u64)],
    seeds: &[(&str, u64)],
    depth_stats: Vec<DepthReport>,
) -> Result<SolveReport> {
    let report = SolveReport {
        coefficients,
        residual_gap: residual,
        lambda_used: lambda,
        shots_used: shots
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<_, _>>(),
        seeds: seeds
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<_, _>>(),
        depth_stats,
    };
    report.validate()?;
    Ok(report)
}

/// Solve `A x = b` (columns and b given as oracles): estimate V̂ ≈ A†A and
/// q̂ ≈ A†b, then return x̂ = (V̂ + λI)⁺ q̂ with λ sized so the ridge bias
/// stays under the ε budget.
pub fn solve_overdetermined(
    instance: &LinearSystemInstance,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    instance.validate()?;
    reject_zero_norm_columns(&instance.columns)?;
    let b = match &instance.rhs {
        Rhs::Oracle(b) => b,
        Rhs::Vector(_) => {
            return Err(Error::contract(
                "the column solver needs an oracle right-hand side; use the row solver for classical vectors",
            ))
        }
    };
    let m = instance.columns.len();

    // b = 0 makes x = 0 exactly optimal; nothing to estimate.
    if b.norm == 0.0 {
        let gap = residual_gap(instance, &CVec::zeros(m))?;
        return assemble_report(
            CVec::zeros(m),
            gap,
            0.0,
            &[("gram", 0), ("rhs", 0)],
            &[("master", config.seed)],
            Vec::new(),
        );
    }

    let metrics = instance.effective_metrics()?;
    let column_norms: Vec<f64> = instance.columns.iter().map(|c| c.norm).collect();
    let norm_bound_x = match config.norm_bound_x {
        Some(v) => v,
        None => {
            // ‖x*‖ ≤ ‖V⁻¹‖‖q‖ from the dense reconstruction.
            let a = instance.reconstruct_matrix()?;
            let v = a.adjoint() * &a;
            let q = a.adjoint() * b.column()?;
            spectral_metrics(&v, DEFAULT_RANK_TOL)?.pinv_norm * q.norm()
        }
    };
    let budget = sample_budget_overdetermined(
        &metrics,
        &column_norms,
        b.norm,
        config.epsilon,
        norm_bound_x,
        config.budget_scale,
    )?;
    let shots = effective_shots(config, &budget)?;

    let gram_seed = child_seed(config.seed, "gram");
    let rhs_seed = child_seed(config.seed, "rhs");
    let mut depth_stats = Vec::new();
    let gram = estimate_gram_with(
        &instance.columns,
        shots,
        gram_seed,
        config.mode,
        &config.construction,
        config.exact_diagonal,
        &mut depth_stats,
    )?;
    let q = estimate_rhs_with(
        &instance.columns,
        b,
        shots,
        rhs_seed,
        config.mode,
        &config.construction,
        &mut depth_stats,
    )?;

    let x = solve_shifted(&gram.matrix, &q, budget.lambda, DEFAULT_RANK_TOL)?;
    let gap = residual_gap(instance, &x)?;
    assemble_report(
        x,
        gap,
        budget.lambda,
        &[("gram", shots), ("rhs", shots)],
        &[
            ("master", config.seed),
            ("gram", gram_seed),
            ("rhs", rhs_seed),
        ],
        depth_stats,
    )
}

/// Solve `A† y = c` in the span of the columns: estimate V̂ ≈ A†A, form
/// Q̂ = V̂² + λI, take α̂ = Q̂⁺ V̂ c, and return s with s_j = α̂_j‖a_j‖ so
/// that ŷ = Σ s_j|a_j⟩.
pub fn solve_underdetermined(
    instance: &LinearSystemInstance,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    instance.validate()?;
    reject_zero_norm_columns(&instance.columns)?;
    let c = match &instance.rhs {
        Rhs::Vector(c) => c,
        Rhs::Oracle(_) => {
            return Err(Error::contract(
                "the row solver needs a classical right-hand side vector; use the column solver for oracles",
            ))
        }
    };
    let m = instance.columns.len();
    if c.len() != m {
        return Err(Error::contract(format!(
            "right-hand side has {} entries, instance has {m} columns",
            c.len()
        )));
    }

    // c = 0 makes y = 0 exactly optimal; nothing to estimate.
    if c.norm() == 0.0 {
        let gap = residual_gap(instance, &CVec::zeros(m))?;
        return assemble_report(
            CVec::zeros(m),
            gap,
            0.0,
            &[("gram", 0)],
            &[("master", config.seed)],
            Vec::new(),
        );
    }

    let metrics = instance.effective_metrics()?;
    let row_norms: Vec<f64> = instance.columns.iter().map(|c| c.norm).collect();
    // ‖α*‖ ≤ ‖(AA†)⁺‖‖c‖ = ‖A⁺‖²‖c‖ unless the caller knows better.
    let norm_bound_alpha = config
        .norm_bound_x
        .unwrap_or(metrics.pinv_norm * metrics.pinv_norm * c.norm());
    let budget = sample_budget_underdetermined(
        &metrics,
        &row_norms,
        c.norm(),
        config.epsilon,
        norm_bound_alpha,
        config.budget_scale,
    )?;
    let shots = effective_shots(config, &budget)?;

    let gram_seed = child_seed(config.seed, "gram");
    let mut depth_stats = Vec::new();
    let gram = estimate_gram_with(
        &instance.columns,
        shots,
        gram_seed,
        config.mode,
        &config.construction,
        config.exact_diagonal,
        &mut depth_stats,
    )?;

    let q_matrix = &gram.matrix * &gram.matrix;
    let rhs = &gram.matrix * c;
    let alpha = solve_shifted(&q_matrix, &rhs, budget.lambda, DEFAULT_RANK_TOL)?;
    let s = CVec::from_iterator(
        m,
        alpha
            .iter()
            .zip(&instance.columns)
            .map(|(a, col)| a * col.norm),
    );
    let gap = residual_gap(instance, &s)?;
    assemble_report(
        s,
        gap,
        budget.lambda,
        &[("gram", shots)],
        &[("master", config.seed), ("gram", gram_seed)],
        depth_stats,
    )
}

/// Shared two-stage pipeline for the factorized solvers. `stage1_lambda`
/// and the per-stage shot counts come from the caller's budget.
#[allow(clippy::too_many_arguments)]
fn factorized_pipeline(
    a1_columns: &[ColumnOracle],
    a2_rows: &[ColumnOracle],
    b: &ColumnOracle,
    config: &SolveConfig,
    stage1_lambda: f64,
    shots1: u64,
    shots2: u64,
) -> Result<SolveReport> {
    let gram1_seed = child_seed(config.seed, "gram1");
    let rhs1_seed = child_seed(config.seed, "rhs1");
    let gram2_seed = child_seed(config.seed, "gram2");
    let mut depth_stats = Vec::new();

    // Stage (a): ŷ from V̂₁ = A₁†A₁ and q̂ = A₁†b.
    let gram1 = estimate_gram_with(
        a1_columns,
        shots1,
        gram1_seed,
        config.mode,
        &config.construction,
        config.exact_diagonal,
        &mut depth_stats,
    )?;
    let q1 = estimate_rhs_with(
        a1_columns,
        b,
        shots1,
        rhs1_seed,
        config.mode,
        &config.construction,
        &mut depth_stats,
    )?;
    let y = solve_shifted(&gram1.matrix, &q1, stage1_lambda, DEFAULT_RANK_TOL)?;

    // Stage (b): α̂ from Q̂ = A₂A₂†, whose (j,k) entry is the row-oracle
    // Gram ‖v_j‖‖v_k‖⟨v_j|v_k⟩.
    let gram2 = estimate_gram_with(
        a2_rows,
        shots2,
        gram2_seed,
        config.mode,
        &config.construction,
        config.exact_diagonal,
        &mut depth_stats,
    )?;
    let alpha = solve_shifted(&gram2.matrix, &y, 0.0, DEFAULT_RANK_TOL)?;
    let s = CVec::from_iterator(
        a2_rows.len(),
        alpha.iter().zip(a2_rows).map(|(a, row)| a * row.norm),
    );

    // x̂ = Σ s_j|v_j⟩ = A₂†α̂; gap against the dense A = A₁A₂.
    let a1 = columns_to_matrix(a1_columns)?;
    let a2 = rows_to_matrix(a2_rows)?;
    let x = a2.adjoint() * &alpha;
    let gap = gap_value(&(&a1 * &a2), &b.column()?, &x)?;
    assemble_report(
        s,
        gap,
        stage1_lambda,
        &[("gram1", shots1), ("rhs1", shots1), ("gram2", shots2)],
        &[
            ("master", config.seed),
            ("gram1", gram1_seed),
            ("rhs1", rhs1_seed),
            ("gram2", gram2_seed),
        ],
        depth_stats,
    )
}

fn check_factors(
    a1_columns: &[ColumnOracle],
    a2_rows: &[ColumnOracle],
    b: &ColumnOracle,
) -> Result<()> {
    let w1 = shared_width("factor A1", a1_columns)?;
    shared_width("factor A2", a2_rows)?;
    b.validate()?;
    if b.prep.width() != w1 {
        return Err(Error::contract(format!(
            "rhs oracle has width {}, factor A1 has width {w1}",
            b.prep.width()
        )));
    }
    if a1_columns.len() != a2_rows.len() {
        return Err(Error::contract(format!(
            "A1 has {} columns but A2 has {} rows; the shared rank R must match",
            a1_columns.len(),
            a2_rows.len()
        )));
    }
    Ok(())
}

fn zero_factorized_report(
    a2_rows: &[ColumnOracle],
    a1: &CMat,
    a2: &CMat,
    b_full: &CVec,
    seed: u64,
) -> Result<SolveReport> {
    let r = a2_rows.len();
    let gap = gap_value(&(a1 * a2), b_full, &CVec::zeros(a2.ncols()))?;
    assemble_report(
        CVec::zeros(r),
        gap,
        0.0,
        &[("gram1", 0), ("rhs1", 0), ("gram2", 0)],
        &[("master", seed)],
        Vec::new(),
    )
}

/// Solve `A₁A₂ x = b` where both factors have full rank R: stage (a)
/// recovers ŷ ≈ A₁⁺b, stage (b) expands it over the rows of A₂, returning
/// s with x̂ = Σ s_j|v_j⟩. Both stages run unshifted solves.
pub fn solve_factorized(
    a1_columns: &[ColumnOracle],
    a2_rows: &[ColumnOracle],
    b: &ColumnOracle,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    check_factors(a1_columns, a2_rows, b)?;
    let a1 = columns_to_matrix(a1_columns)?;
    let a2 = rows_to_matrix(a2_rows)?;
    if b.norm == 0.0 {
        return zero_factorized_report(a2_rows, &a1, &a2, &b.column()?, config.seed);
    }

    let (shots1, shots2) = match config.mode {
        Mode::ExactExpectation => (0, 0),
        Mode::Sampled => {
            if let Some(n) = config.shot_override {
                (n, n)
            } else {
                let a = &a1 * &a2;
                let a_norm = spectral_metrics(&a, DEFAULT_RANK_TOL)?.spectral_norm;
                let v1 = a1.adjoint() * &a1;
                let q2 = &a2 * a2.adjoint();
                let v1_pinv = spectral_metrics(&v1, DEFAULT_RANK_TOL)?.pinv_norm;
                let q2_pinv = spectral_metrics(&q2, DEFAULT_RANK_TOL)?.pinv_norm;
                let u_norms: Vec<f64> = a1_columns.iter().map(|c| c.norm).collect();
                let v_norms: Vec<f64> = a2_rows.iter().map(|c| c.norm).collect();
                let a1_pinv = spectral_metrics(&a1, DEFAULT_RANK_TOL)?.pinv_norm;
                let a2_pinv = spectral_metrics(&a2, DEFAULT_RANK_TOL)?.pinv_norm;
                let y_bound = a1_pinv * b.norm;
                let alpha_bound = config
                    .norm_bound_x
                    .unwrap_or(a2_pinv * a2_pinv * y_bound);
                let budget = sample_budget_factorized(
                    a_norm,
                    v1_pinv,
                    q2_pinv,
                    &u_norms,
                    &v_norms,
                    b.norm,
                    config.epsilon,
                    y_bound,
                    alpha_bound,
                    config.budget_scale,
                )?;
                (
                    budget.stage1.shots_per_entry()?,
                    budget.stage2.shots_per_entry()?,
                )
            }
        }
    };
    factorized_pipeline(a1_columns, a2_rows, b, config, 0.0, shots1, shots2)
}

/// Solve `A₁A₂ x = b` where A₂ keeps full row rank R but A₁ may be rank
/// deficient: stage (a) runs the ridge solve with λ = ε₁/(2‖A₁⁺‖⁴‖A₁‖²‖b‖),
/// stage (b) as in `solve_factorized`.
pub fn solve_factorized_relaxed(
    a1_columns: &[ColumnOracle],
    a2_rows: &[ColumnOracle],
    b: &ColumnOracle,
    config: &SolveConfig,
) -> Result<SolveReport> {
    config.validate()?;
    check_factors(a1_columns, a2_rows, b)?;
    let a1 = columns_to_matrix(a1_columns)?;
    let a2 = rows_to_matrix(a2_rows)?;
    if b.norm == 0.0 {
        return zero_factorized_report(a2_rows, &a1, &a2, &b.column()?, config.seed);
    }

    let a1_metrics = spectral_metrics(&a1, DEFAULT_RANK_TOL)?;
    let a2_metrics = spectral_metrics(&a2, DEFAULT_RANK_TOL)?;
    let u_norms: Vec<f64> = a1_columns.iter().map(|c| c.norm).collect();
    let v_norms: Vec<f64> = a2_rows.iter().map(|c| c.norm).collect();
    let y_bound = a1_metrics.pinv_norm * b.norm;
    let alpha_bound = config
        .norm_bound_x
        .unwrap_or(a2_metrics.pinv_norm * a2_metrics.pinv_norm * y_bound);
    // The ridge weight comes from the same budget in every mode; exact mode
    // only skips the sampling, not the regularization.
    let budget = sample_budget_factorized_relaxed(
        &a1_metrics,
        &a2_metrics,
        &u_norms,
        &v_norms,
        b.norm,
        config.epsilon,
        y_bound,
        alpha_bound,
        config.budget_scale,
    )?;
    let shots1 = effective_shots(config, &budget.stage1)?;
    let shots2 = effective_shots(config, &budget.stage2)?;
    factorized_pipeline(
        a1_columns,
        a2_rows,
        b,
        config,
        budget.stage1.lambda,
        shots1,
        shots2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{perturbation_bound, vec_distance, C64};
    use crate::solver::testutil::{oracle_from_vector, random_columns, random_unit};
    use crate::solver::types::Rhs;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn basis_vec(n: usize, i: usize) -> CVec {
        CVec::from_fn(n, |r, _| C64::new(if r == i { 1.0 } else { 0.0 }, 0.0))
    }

    fn oracle_for(v: &CVec, width: usize) -> ColumnOracle {
        let norm = v.norm();
        oracle_from_vector(&(v / C64::new(norm, 0.0)), width, norm)
    }

    fn consistent_instance(
        rng: &mut StdRng,
        width: usize,
        m: usize,
    ) -> (LinearSystemInstance, CMat, CVec) {
        let (columns, a) = random_columns(rng, width, m);
        let x_true = CVec::from_iterator(
            m,
            (0..m).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let b_full = &a * &x_true;
        let b = oracle_for(&b_full, width);
        (
            LinearSystemInstance {
                columns,
                rhs: Rhs::Oracle(b),
                metrics: None,
            },
            a,
            b_full,
        )
    }

    #[test]
    fn single_unit_column_recovers_unit_coefficient() {
        let mut rng = StdRng::seed_from_u64(3);
        let v = random_unit(&mut rng, 8);
        let col = oracle_from_vector(&v, 3, 1.0);
        let instance = LinearSystemInstance {
            columns: vec![col.clone()],
            rhs: Rhs::Oracle(col),
            metrics: None,
        };
        let report =
            solve_overdetermined(&instance, &SolveConfig::exact(1e-3)).unwrap();
        assert!((report.coefficients[0] - C64::new(1.0, 0.0)).norm() < 1e-3);
        assert!(report.residual_gap <= 1e-3);
        assert!(report.depth_stats.is_empty());
        assert_eq!(report.shots_used["gram"], 0);
    }

    #[test]
    fn exact_mode_meets_epsilon_on_consistent_instances() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..4 {
            let (instance, _, _) = consistent_instance(&mut rng, 4, 3);
            let eps = 1e-3;
            let report = solve_overdetermined(&instance, &SolveConfig::exact(eps)).unwrap();
            assert!(
                report.residual_gap <= eps,
                "gap {} > {eps}",
                report.residual_gap
            );
        }
    }

    #[test]
    fn exact_mode_meets_epsilon_on_inconsistent_instances() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..4 {
            let (columns, _) = random_columns(&mut rng, 4, 3);
            let b_full = random_unit(&mut rng, 16) * C64::new(1.4, 0.0);
            let instance = LinearSystemInstance {
                columns,
                rhs: Rhs::Oracle(oracle_for(&b_full, 4)),
                metrics: None,
            };
            let eps = 1e-3;
            let report = solve_overdetermined(&instance, &SolveConfig::exact(eps)).unwrap();
            assert!(
                report.residual_gap <= eps,
                "gap {} > {eps}",
                report.residual_gap
            );
        }
    }

    #[test]
    fn exact_solution_error_stays_under_ridge_perturbation() {
        // Only the λ shift separates x̂ from x* = A⁺b in exact mode:
        // ‖x̂ − x*‖ ≤ λ‖V⁻¹‖²‖q‖ ≤ ε/‖A‖ for Algorithm 1's λ.
        let mut rng = StdRng::seed_from_u64(17);
        let (instance, a, b_full) = consistent_instance(&mut rng, 4, 3);
        let eps = 1e-2;
        let report = solve_overdetermined(&instance, &SolveConfig::exact(eps)).unwrap();
        let v = a.adjoint() * &a;
        let q = a.adjoint() * &b_full;
        let x_star = pseudo_inverse(&a, DEFAULT_RANK_TOL).unwrap() * &b_full;
        let err = vec_distance(&report.coefficients, &x_star);
        let bound = perturbation_bound(&v, &q, report.lambda_used).unwrap();
        assert!(err <= bound * (1.0 + 1e-6) + 1e-8, "{err} > {bound}");
        let a_norm = spectral_metrics(&a, DEFAULT_RANK_TOL).unwrap().spectral_norm;
        assert!(err <= eps / a_norm + 1e-8);
    }

    #[test]
    fn zero_rhs_short_circuits_to_zero_solution() {
        let mut rng = StdRng::seed_from_u64(19);
        let (columns, _) = random_columns(&mut rng, 3, 2);
        let b = ColumnOracle {
            prep: oracle_from_vector(&basis_vec(8, 0), 3, 1.0).prep,
            norm: 0.0,
        };
        let instance = LinearSystemInstance {
            columns,
            rhs: Rhs::Oracle(b),
            metrics: None,
        };
        let report = solve_overdetermined(&instance, &SolveConfig::exact(1e-4)).unwrap();
        assert_eq!(report.coefficients.norm(), 0.0);
        assert!(report.residual_gap.abs() < 1e-10);
    }

    #[test]
    fn row_solver_single_column_recovers_unit_coefficient() {
        let mut rng = StdRng::seed_from_u64(23);
        let v = random_unit(&mut rng, 16);
        let instance = LinearSystemInstance {
            columns: vec![oracle_from_vector(&v, 4, 1.0)],
            rhs: Rhs::Vector(CVec::from_element(1, C64::new(1.0, 0.0))),
            metrics: None,
        };
        let eps = 1e-3;
        let report = solve_underdetermined(&instance, &SolveConfig::exact(eps)).unwrap();
        assert!((report.coefficients[0] - C64::new(1.0, 0.0)).norm() < 2e-3);
        assert!(report.residual_gap <= eps);
    }

    #[test]
    fn row_solver_meets_epsilon_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..4 {
            let (columns, _) = random_columns(&mut rng, 4, 3);
            let c = CVec::from_iterator(
                3,
                (0..3).map(|_| {
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                }),
            );
            let instance = LinearSystemInstance {
                columns,
                rhs: Rhs::Vector(c),
                metrics: None,
            };
            let eps = 1e-3;
            let report = solve_underdetermined(&instance, &SolveConfig::exact(eps)).unwrap();
            assert!(
                report.residual_gap <= eps,
                "gap {} > {eps}",
                report.residual_gap
            );
        }
    }

    #[test]
    fn row_solver_zero_c_gives_zero_s() {
        let mut rng = StdRng::seed_from_u64(31);
        let (columns, _) = random_columns(&mut rng, 3, 2);
        let instance = LinearSystemInstance {
            columns,
            rhs: Rhs::Vector(CVec::zeros(2)),
            metrics: None,
        };
        let report = solve_underdetermined(&instance, &SolveConfig::exact(1e-3)).unwrap();
        assert_eq!(report.coefficients.norm(), 0.0);
        assert!(report.residual_gap.abs() < 1e-12);
    }

    #[test]
    fn rhs_variant_mismatches_are_rejected() {
        let mut rng = StdRng::seed_from_u64(37);
        let (columns, _) = random_columns(&mut rng, 3, 2);
        let vector_instance = LinearSystemInstance {
            columns: columns.clone(),
            rhs: Rhs::Vector(CVec::zeros(2)),
            metrics: None,
        };
        assert!(solve_overdetermined(&vector_instance, &SolveConfig::exact(1e-3)).is_err());
        let oracle_instance = LinearSystemInstance {
            columns: columns.clone(),
            rhs: Rhs::Oracle(columns[0].clone()),
            metrics: None,
        };
        assert!(solve_underdetermined(&oracle_instance, &SolveConfig::exact(1e-3)).is_err());
        let short_c = LinearSystemInstance {
            columns,
            rhs: Rhs::Vector(CVec::zeros(5)),
            metrics: None,
        };
        assert!(solve_underdetermined(&short_c, &SolveConfig::exact(1e-3)).is_err());
    }

    #[test]
    fn zero_norm_column_is_rejected() {
        let mut rng = StdRng::seed_from_u64(41);
        let (mut columns, _) = random_columns(&mut rng, 3, 2);
        columns[1].norm = 0.0;
        let b = columns[0].clone();
        let instance = LinearSystemInstance {
            columns,
            rhs: Rhs::Oracle(b),
            metrics: None,
        };
        assert!(solve_overdetermined(&instance, &SolveConfig::exact(1e-3)).is_err());
    }

    #[test]
    fn factorized_identity_factors_pick_first_column() {
        // A1 = [e0 e1] (4×2), A2 = [e0ᵀ; e1ᵀ] (2×4), b = A's first column.
        let a1_columns = vec![
            oracle_from_vector(&basis_vec(4, 0), 2, 1.0),
            oracle_from_vector(&basis_vec(4, 1), 2, 1.0),
        ];
        let a2_rows = vec![
            oracle_from_vector(&basis_vec(4, 0), 2, 1.0),
            oracle_from_vector(&basis_vec(4, 1), 2, 1.0),
        ];
        let b = oracle_from_vector(&basis_vec(4, 0), 2, 1.0);
        let report =
            solve_factorized(&a1_columns, &a2_rows, &b, &SolveConfig::exact(1e-6)).unwrap();
        assert!((report.coefficients[0] - C64::new(1.0, 0.0)).norm() < 1e-9);
        assert!(report.coefficients[1].norm() < 1e-9);
        assert!(report.residual_gap.abs() < 1e-9);
        assert_eq!(report.lambda_used, 0.0);
    }

    #[test]
    fn factorized_meets_epsilon_on_random_instances() {
        let mut rng = StdRng::seed_from_u64(43);
        for _ in 0..3 {
            let (a1_columns, a1) = random_columns(&mut rng, 4, 2);
            let (a2_rows_cols, _) = random_columns(&mut rng, 3, 2);
            let a2 = rows_to_matrix(&a2_rows_cols).unwrap();
            let a = &a1 * &a2;
            // Mix of consistent and generic b.
            let b_full = if rng.random_bool(0.5) {
                &a * random_unit(&mut rng, 8)
            } else {
                random_unit(&mut rng, 16) * C64::new(1.2, 0.0)
            };
            let b = oracle_for(&b_full, 4);
            let eps = 1e-3;
            let report =
                solve_factorized(&a1_columns, &a2_rows_cols, &b, &SolveConfig::exact(eps))
                    .unwrap();
            assert!(
                report.residual_gap <= eps,
                "gap {} > {eps}",
                report.residual_gap
            );
        }
    }

    #[test]
    fn factorized_b_off_range_gives_zero_solution() {
        // Columns of A1 span {e0, e1}; b = e2 is orthogonal to the range,
        // so x* = 0 and the optimum residual is ‖b‖.
        let a1_columns = vec![
            oracle_from_vector(&basis_vec(8, 0), 3, 1.0),
            oracle_from_vector(&basis_vec(8, 1), 3, 1.5),
        ];
        let (a2_rows, _) = random_columns(&mut StdRng::seed_from_u64(47), 2, 2);
        let b = oracle_from_vector(&basis_vec(8, 2), 3, 2.0);
        let eps = 1e-4;
        let report =
            solve_factorized(&a1_columns, &a2_rows, &b, &SolveConfig::exact(eps)).unwrap();
        assert!(report.coefficients.norm() < 1e-8);
        assert!(report.residual_gap.abs() <= eps);
    }

    #[test]
    fn relaxed_agrees_with_plain_on_full_rank_factors() {
        let mut rng = StdRng::seed_from_u64(53);
        let (a1_columns, _) = random_columns(&mut rng, 4, 2);
        let (a2_rows, _) = random_columns(&mut rng, 3, 2);
        let b_full = random_unit(&mut rng, 16);
        let b = oracle_for(&b_full, 4);
        let eps = 1e-4;
        let plain =
            solve_factorized(&a1_columns, &a2_rows, &b, &SolveConfig::exact(eps)).unwrap();
        let relaxed =
            solve_factorized_relaxed(&a1_columns, &a2_rows, &b, &SolveConfig::exact(eps))
                .unwrap();
        assert!(
            vec_distance(&plain.coefficients, &relaxed.coefficients) < 1e-3,
            "distance {}",
            vec_distance(&plain.coefficients, &relaxed.coefficients)
        );
        assert!(plain.residual_gap <= eps && relaxed.residual_gap <= eps);
        assert!(relaxed.lambda_used > 0.0);
    }

    #[test]
    fn relaxed_handles_rank_deficient_a1() {
        // Two parallel columns make A1 rank 1 while A2 keeps row rank 2.
        let mut rng = StdRng::seed_from_u64(59);
        let u = random_unit(&mut rng, 16);
        let a1_columns = vec![
            oracle_from_vector(&u, 4, 1.0),
            oracle_from_vector(&u, 4, 2.0),
        ];
        let (a2_rows, _) = random_columns(&mut rng, 3, 2);
        let b_full = &u * C64::new(0.7, 0.0);
        let b = oracle_for(&b_full, 4);
        let eps = 1e-3;
        let report =
            solve_factorized_relaxed(&a1_columns, &a2_rows, &b, &SolveConfig::exact(eps))
                .unwrap();
        assert!(
            report.residual_gap <= eps,
            "gap {} > {eps}",
            report.residual_gap
        );
    }

    #[test]
    fn relaxed_lambda_is_linear_in_epsilon() {
        let mut rng = StdRng::seed_from_u64(61);
        let (a1_columns, _) = random_columns(&mut rng, 3, 2);
        let (a2_rows, _) = random_columns(&mut rng, 2, 2);
        let b = oracle_for(&random_unit(&mut rng, 8), 3);
        let full =
            solve_factorized_relaxed(&a1_columns, &a2_rows, &b, &SolveConfig::exact(2e-3))
                .unwrap();
        let half =
            solve_factorized_relaxed(&a1_columns, &a2_rows, &b, &SolveConfig::exact(1e-3))
                .unwrap();
        assert!(
            (half.lambda_used - full.lambda_used / 2.0).abs() < 1e-12 * full.lambda_used
        );
    }

    #[test]
    fn factor_shape_mismatches_are_rejected() {
        let mut rng = StdRng::seed_from_u64(67);
        let (a1_columns, _) = random_columns(&mut rng, 3, 2);
        let (a2_rows, _) = random_columns(&mut rng, 2, 3);
        let b = oracle_for(&random_unit(&mut rng, 8), 3);
        assert!(
            solve_factorized(&a1_columns, &a2_rows, &b, &SolveConfig::exact(1e-3)).is_err()
        );
        let b_wrong = oracle_for(&random_unit(&mut rng, 4), 2);
        assert!(solve_factorized(
            &a1_columns,
            &a2_rows[..2],
            &b_wrong,
            &SolveConfig::exact(1e-3)
        )
        .is_err());
    }

    #[test]
    fn residual_gap_matches_direct_evaluation() {
        let mut rng = StdRng::seed_from_u64(71);
        let (instance, a, b_full) = consistent_instance(&mut rng, 4, 3);
        let x_star = pseudo_inverse(&a, DEFAULT_RANK_TOL).unwrap() * &b_full;
        // Exact solution: gap vanishes.
        assert!(residual_gap(&instance, &x_star).unwrap().abs() < 1e-8);
        // Zero solution on a consistent system: gap is ‖b‖.
        let zero_gap = residual_gap(&instance, &CVec::zeros(3)).unwrap();
        assert!((zero_gap - b_full.norm()).abs() < 1e-8);
        // Perturbed solution: gap equals the hand-computed difference.
        let mut x = x_star.clone();
        x[0] += C64::new(0.05, -0.02);
        let want = (&a * &x - &b_full).norm() - (&a * &x_star - &b_full).norm();
        let got = residual_gap(&instance, &x).unwrap();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn orthogonal_components_do_not_change_the_row_system() {
        // A†y only sees the projection of y onto the column span: adding a
        // vector orthogonal to every column leaves A†y unchanged.
        let mut rng = StdRng::seed_from_u64(73);
        let (_, a) = random_columns(&mut rng, 4, 3);
        let y = random_unit(&mut rng, 16);
        // Project a random vector off the column space.
        let pinv = pseudo_inverse(&a, DEFAULT_RANK_TOL).unwrap();
        let w_raw = random_unit(&mut rng, 16);
        let w = &w_raw - &a * (&pinv * &w_raw);
        let lhs = a.adjoint() * &y;
        let rhs = a.adjoint() * (&y + &w);
        assert!(
            (&lhs - &rhs).norm() < 1e-9,
            "deviation {}",
            (&lhs - &rhs).norm()
        );
    }

    #[test]
    fn sampled_solve_is_reproducible_and_reports_depths() {
        let mut rng = StdRng::seed_from_u64(79);
        let (instance, _, _) = consistent_instance(&mut rng, 2, 2);
        let config = SolveConfig {
            mode: Mode::Sampled,
            shot_override: Some(2048),
            seed: 11,
            ..SolveConfig::exact(0.25)
        };
        let r1 = solve_overdetermined(&instance, &config).unwrap();
        let r2 = solve_overdetermined(&instance, &config).unwrap();
        assert_eq!(r1.coefficients, r2.coefficients);
        assert_eq!(r1.shots_used["gram"], 2048);
        assert_eq!(r1.shots_used["rhs"], 2048);
        // 3 gram entries + 2 rhs entries, 2 quadratures each.
        assert_eq!(r1.depth_stats.len(), 10);
        for report in &r1.depth_stats {
            report.validate().unwrap();
        }
        assert!(r1.seeds.contains_key("master"));
        assert!(r1.seeds.contains_key("gram"));
        assert!(r1.seeds.contains_key("rhs"));
        let other_seed = SolveConfig { seed: 12, ..config };
        let r3 = solve_overdetermined(&instance, &other_seed).unwrap();
        assert_ne!(r1.coefficients, r3.coefficients);
    }

    #[test]
    fn theorem_budget_drives_sampled_shots_when_no_override() {
        let mut rng = StdRng::seed_from_u64(83);
        let (instance, _, _) = consistent_instance(&mut rng, 2, 2);
        // Large epsilon and a tiny budget_scale keep the shot count small
        // enough to execute while still exercising the budget path.
        let config = SolveConfig {
            mode: Mode::Sampled,
            budget_scale: 1e-9,
            seed: 5,
            ..SolveConfig::exact(0.5)
        };
        let report = solve_overdetermined(&instance, &config).unwrap();
        let shots = report.shots_used["gram"];
        assert!(shots >= 1);
        assert_eq!(report.shots_used["rhs"], shots);
        assert!(!report.depth_stats.is_empty());
    }
}
