//! Hybrid solvers for linear systems given through state-preparation
//! oracles: Gram and right-hand-side estimation via Hadamard tests,
//! theorem-derived shot budgets, regularized classical solves over the
//! assembled small systems, and readout applications for the results.

mod apply;
mod budget;
mod gram;
mod solve;
mod types;

pub use apply::{
    inner_product_with_state, observable_expectation, observable_expectation_detailed,
};
pub use budget::{
    sample_budget_factorized, sample_budget_factorized_relaxed, sample_budget_overdetermined,
    sample_budget_underdetermined, FactorizedBudget, SampleBudget,
};
pub use gram::{estimate_gram, estimate_gram_with, estimate_rhs, estimate_rhs_with};
pub use solve::{
    residual_gap, solve_factorized, solve_factorized_relaxed, solve_overdetermined,
    solve_underdetermined,
};
pub use types::{
    columns_to_matrix, rows_to_matrix, ColumnOracle, GramEstimate, LinearSystemInstance, Mode,
    ObservableSpec, ObservableTerm, Rhs, SolveConfig, SolveReport,
};

#[cfg(test)]
pub(crate) mod testutil {
    use super::types::ColumnOracle;
    use crate::numerics::{CMat, CVec, C64};
    use crate::prep::synthesize_state_prep;
    use rand::rngs::StdRng;
    use rand::Rng;

    pub fn oracle_from_vector(v: &CVec, width: usize, norm: f64) -> ColumnOracle {
        ColumnOracle {
            prep: synthesize_state_prep(v, width).unwrap(),
            norm,
        }
    }

    pub fn random_unit(rng: &mut StdRng, n: usize) -> CVec {
        let v = CVec::from_iterator(
            n,
            (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        );
        let norm = v.norm();
        v / C64::new(norm, 0.0)
    }

    /// Random oracle columns with norms in [0.5, 2), plus the dense matrix
    /// they reconstruct to.
    pub fn random_columns(rng: &mut StdRng, width: usize, m: usize) -> (Vec<ColumnOracle>, CMat) {
        let n = 1 << width;
        let mut a = CMat::zeros(n, m);
        let mut columns = Vec::with_capacity(m);
        for j in 0..m {
            let v = random_unit(rng, n);
            let norm = rng.random_range(0.5..2.0);
            for i in 0..n {
                a[(i, j)] = v[i] * norm;
            }
            columns.push(oracle_from_vector(&v, width, norm));
        }
        (columns, a)
    }
}
