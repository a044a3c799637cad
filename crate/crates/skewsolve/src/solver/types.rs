//! Domain types shared by the solvers: column oracles, instances,
//! configuration, Gram estimates, reports, and observable specifications.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::hadamard::Construction;
use crate::numerics::{spectral_metrics, CMat, CVec, SpectralMetrics, C64, DEFAULT_RANK_TOL};
use crate::sim::{apply, StateVector};
use crate::transpile::DepthReport;

/// One matrix column (or row, for row-oracle inputs): a state-preparation
/// circuit together with the column's l2 norm. The full column is
/// `norm × (prep applied to |0...0⟩)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnOracle {
    pub prep: Circuit,
    pub norm: f64,
}

impl ColumnOracle {
    pub fn new(prep: Circuit, norm: f64) -> Result<ColumnOracle> {
        let oracle = ColumnOracle { prep, norm };
        oracle.validate()?;
        Ok(oracle)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.norm.is_finite() || self.norm < 0.0 {
            return Err(Error::contract(format!(
                "column norm must be finite and >= 0, got {}",
                self.norm
            )));
        }
        Ok(())
    }

    /// The normalized state this oracle prepares, as a dense vector.
    pub fn state(&self) -> Result<CVec> {
        let out = apply(&self.prep, &StateVector::zero_state(self.prep.width())?)?;
        Ok(out.amplitudes().clone())
    }

    /// The full column: norm × prepared state.
    pub fn column(&self) -> Result<CVec> {
        Ok(self.state()? * C64::new(self.norm, 0.0))
    }
}

/// Right-hand side of an instance: a state oracle (for systems `A x = b`
/// with quantum access to b) or a classical vector (for `A† y = c`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rhs {
    Oracle(ColumnOracle),
    Vector(#[serde(with = "crate::io::complex_vector")] CVec),
}

/// A linear system given through column oracles.
///
/// The columns define `A` column by column. `metrics` may be supplied when
/// the caller knows the spectral data; otherwise it is computed from the
/// reconstructed matrix (the desk-scale default).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystemInstance {
    pub columns: Vec<ColumnOracle>,
    pub rhs: Rhs,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<SpectralMetrics>,
}

impl LinearSystemInstance {
    /// Shared width of the column preps (and the rhs oracle, when present).
    pub fn width(&self) -> Result<usize> {
        let first = self
            .columns
            .first()
            .ok_or_else(|| Error::contract("instance has no columns"))?;
        let width = first.prep.width();
        for (j, col) in self.columns.iter().enumerate() {
            col.validate()?;
            if col.prep.width() != width {
                return Err(Error::contract(format!(
                    "column {j} has width {}, expected {width}",
                    col.prep.width()
                )));
            }
        }
        if let Rhs::Oracle(b) = &self.rhs {
            b.validate()?;
            if b.prep.width() != width {
                return Err(Error::contract(format!(
                    "rhs oracle has width {}, expected {width}",
                    b.prep.width()
                )));
            }
        }
        Ok(width)
    }

    pub fn validate(&self) -> Result<()> {
        self.width().map(|_| ())
    }

    /// Dense `A` (2^width × M), columns reconstructed from the oracles.
    pub fn reconstruct_matrix(&self) -> Result<CMat> {
        self.width()?;
        columns_to_matrix(&self.columns)
    }

    /// Supplied metrics, or metrics of the reconstructed matrix.
    pub fn effective_metrics(&self) -> Result<SpectralMetrics> {
        match self.metrics {
            Some(m) => Ok(m),
            None => spectral_metrics(&self.reconstruct_matrix()?, DEFAULT_RANK_TOL),
        }
    }
}

/// Dense matrix whose column j is `oracles[j].column()`: a 2^width × M
/// reconstruction of the operator the oracles describe column by column.
pub fn columns_to_matrix(oracles: &[ColumnOracle]) -> Result<CMat> {
    let first = oracles
        .first()
        .ok_or_else(|| Error::contract("cannot reconstruct a matrix from no oracles"))?;
    let n = 1usize << first.prep.width();
    let m = oracles.len();
    let mut a = CMat::zeros(n, m);
    for (j, oracle) in oracles.iter().enumerate() {
        let v = oracle.column()?;
        if v.len() != n {
            return Err(Error::contract(format!(
                "oracle {j} has width {}, expected {}",
                oracle.prep.width(),
                first.prep.width()
            )));
        }
        for i in 0..n {
            a[(i, j)] = v[i];
        }
    }
    Ok(a)
}

/// Dense matrix whose row j is `norm_j ⟨v_j|`: an R × 2^width reconstruction
/// of the operator the oracles describe row by row.
pub fn rows_to_matrix(oracles: &[ColumnOracle]) -> Result<CMat> {
    Ok(columns_to_matrix(oracles)?.adjoint())
}

/// Whether estimators read exact expectations from the statevector or draw
/// binomial shot samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[serde(alias = "exact")]
    ExactExpectation,
    Sampled,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "exact" | "exact_expectation" => Ok(Mode::ExactExpectation),
            "sampled" => Ok(Mode::Sampled),
            other => Err(Error::contract(format!(
                "mode must be exact_expectation or sampled, got {other:?}"
            ))),
        }
    }
}

/// Solver configuration. `epsilon` is the target additive error of the
/// residual criterion; everything else has workable defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub epsilon: f64,
    pub mode: Mode,
    /// Replaces the theorem shot budget when set (sampled mode only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shot_override: Option<u64>,
    /// Multiplier standing in for the unspecified O(·) constant in the
    /// theorem budgets.
    #[serde(default = "default_budget_scale")]
    pub budget_scale: f64,
    #[serde(default)]
    pub seed: u64,
    /// Per-entry failure probability carried into reports; not used to size
    /// budgets.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Override for the solution-norm bound entering the shot budget;
    /// defaults to the bound computable from the instance itself.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_bound_x: Option<f64>,
    /// Controlled-circuit construction used by sampled-mode Hadamard tests.
    #[serde(default = "default_construction")]
    pub construction: Construction,
    /// Sets Gram diagonal entries to ‖a_j‖² exactly instead of estimating
    /// ⟨a_j|a_j⟩ from shots.
    #[serde(default)]
    pub exact_diagonal: bool,
}

fn default_budget_scale() -> f64 {
    1.0
}

fn default_delta() -> f64 {
    0.01
}

fn default_construction() -> Construction {
    Construction::Naive
}

impl SolveConfig {
    /// Exact-expectation config with the given target error and defaults
    /// everywhere else.
    pub fn exact(epsilon: f64) -> SolveConfig {
        SolveConfig {
            epsilon,
            mode: Mode::ExactExpectation,
            shot_override: None,
            budget_scale: 1.0,
            seed: 0,
            delta: 0.01,
            norm_bound_x: None,
            construction: Construction::Naive,
            exact_diagonal: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::contract(format!(
                "epsilon must be finite and > 0, got {}",
                self.epsilon
            )));
        }
        if !(self.budget_scale > 0.0) || !self.budget_scale.is_finite() {
            return Err(Error::contract(format!(
                "budget_scale must be finite and > 0, got {}",
                self.budget_scale
            )));
        }
        if !(0.0..1.0).contains(&self.delta) {
            return Err(Error::contract(format!(
                "delta must be in [0, 1), got {}",
                self.delta
            )));
        }
        Ok(())
    }
}

/// An estimated Gram matrix, Hermitian-symmetrized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramEstimate {
    #[serde(with = "crate::io::complex_matrix")]
    pub matrix: CMat,
    /// Shots spent per estimated entry (0 in exact mode).
    pub shots_per_entry: u64,
    /// Size bound Γ on the entries: max_j ‖a_j‖ · max_k ‖a_k‖.
    pub gamma: f64,
}

/// Output of a solve: coefficient vector, residual diagnostics, and the
/// sampling bookkeeping needed to reproduce the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    /// x̂ for column systems; s (with ŷ = Σ s_j|a_j⟩) for row systems and
    /// the factorized solvers.
    #[serde(with = "crate::io::complex_vector")]
    pub coefficients: CVec,
    /// ‖A·sol − rhs‖ − min over solutions, from dense reconstruction.
    pub residual_gap: f64,
    pub lambda_used: f64,
    /// Shots per estimated entry, keyed by estimator ("gram", "rhs", ...).
    pub shots_used: BTreeMap<String, u64>,
    /// Derived seeds, keyed the same way, plus "master".
    pub seeds: BTreeMap<String, u64>,
    /// One report per Hadamard-test circuit executed (empty in exact mode,
    /// which reads expectations without building test circuits).
    pub depth_stats: Vec<DepthReport>,
}

impl SolveReport {
    pub fn validate(&self) -> Result<()> {
        if self.residual_gap < -1e-8 {
            return Err(Error::numerical(format!(
                "residual gap {} below the numerical floor",
                self.residual_gap
            )));
        }
        Ok(())
    }
}

/// A Hermitian observable given as a positive combination of unitary term
/// circuits: H = Σ γ_k H_k with 0 < γ_k ≤ Δ_H.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub terms: Vec<ObservableTerm>,
    pub delta_h: f64,
    pub k_h: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservableTerm {
    pub gamma: f64,
    pub circuit: Circuit,
}

impl ObservableSpec {
    pub fn new(terms: Vec<ObservableTerm>, delta_h: f64) -> Result<ObservableSpec> {
        let spec = ObservableSpec {
            k_h: terms.len(),
            terms,
            delta_h,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::contract("observable has no terms"));
        }
        if self.k_h != self.terms.len() {
            return Err(Error::contract(format!(
                "k_h {} does not match {} terms",
                self.k_h,
                self.terms.len()
            )));
        }
        let width = self.terms[0].circuit.width();
        for (k, term) in self.terms.iter().enumerate() {
            if !(term.gamma > 0.0) || term.gamma > self.delta_h {
                return Err(Error::contract(format!(
                    "term {k} coefficient {} outside (0, {}]",
                    term.gamma, self.delta_h
                )));
            }
            if term.circuit.width() != width {
                return Err(Error::contract(format!(
                    "term {k} has width {}, expected {width}",
                    term.circuit.width()
                )));
            }
        }
        Ok(())
    }
}
