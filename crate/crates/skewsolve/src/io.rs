//! JSON input/output: shared serialization helpers plus the file formats
//! the CLI reads and writes.
//!
//! Instances come in two shapes. The oracle schema spells out each column
//! as a state-preparation circuit plus a norm:
//! `{"columns": [{"prep": <circuit>, "norm": r}, ...],
//!   "rhs": {"oracle": <circuit+norm>} | {"vector": [[re, im], ...]}}`.
//! The raw schema holds a dense matrix and is converted on load, column by
//! column, into synthesized prep circuits and norms:
//! `{"matrix": [[[re, im], ...], ...], "rhs": [[re, im], ...]}`.
//! Factorized systems use `a1_columns`/`a2_rows` (oracle form) or
//! `a1`/`a2` (raw form) in place of `columns`/`matrix`.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::error::{Error, Result};
use crate::numerics::{CMat, CVec};
use crate::prep::synthesize_state_prep;
use crate::solver::{ColumnOracle, LinearSystemInstance, Rhs};

/// Serde adapter storing a complex number as the two-element array
/// [re, im], the convention used by every JSON schema in this crate.
pub mod complex_pair {
    use super::C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
        [v.re, v.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// Same adapter for complex vectors: [[re, im], ...].
pub mod complex_vector {
    use super::C64;
    use crate::numerics::CVec;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &CVec, s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CVec, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(CVec::from_iterator(
            pairs.len(),
            pairs.into_iter().map(|[re, im]| C64::new(re, im)),
        ))
    }
}

/// Complex matrices as row-major nested arrays: [[[re, im], ...], ...].
pub mod complex_matrix {
    use super::C64;
    use crate::numerics::CMat;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
            .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
            .collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(serde::de::Error::custom("ragged matrix rows"));
        }
        let mut m = CMat::zeros(nrows, ncols);
        for (r, row) in rows.iter().enumerate() {
            for (c, &[re, im]) in row.iter().enumerate() {
                m[(r, c)] = C64::new(re, im);
            }
        }
        Ok(m)
    }
}

// ---- files ----------------------------------------------------------------

/// Parse `text` as `T`, prefixing errors with the path so the diagnostic
/// carries file, line, and column.
fn parse_json<T: DeserializeOwned>(text: &str, path: &Path) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::contract(format!("{}: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::contract(format!("cannot read {}: {e}", path.display())))
}

/// Read and parse a JSON file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    parse_json(&read_text(path)?, path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)
        .map_err(|e| Error::contract(format!("cannot write {}: {e}", path.display())))
}

/// Write `value` as pretty-printed JSON with a trailing newline.
pub fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

/// Write a CSV table. Cells are written verbatim; every row must match the
/// header width. Numeric-only tables need no quoting.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::contract(format!(
                "csv row {i} has {} cells, header has {}",
                row.len(),
                header.len()
            )));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

// ---- dense-to-oracle conversion -------------------------------------------

fn width_for_dim(len: usize) -> Result<usize> {
    if len >= 2 && len.is_power_of_two() {
        Ok(len.trailing_zeros() as usize)
    } else {
        Err(Error::contract(format!(
            "dense dimension {len} is not a power of two >= 2; state preps need 2^width amplitudes"
        )))
    }
}

/// Column oracle for a dense vector: the norm plus a synthesized prep for
/// the normalized state. A zero vector gets an empty prep and norm 0.
pub fn oracle_from_dense(v: &CVec) -> Result<ColumnOracle> {
    let width = width_for_dim(v.len())?;
    let norm = v.norm();
    if !norm.is_finite() {
        return Err(Error::contract("dense vector has non-finite entries"));
    }
    if norm == 0.0 {
        return Ok(ColumnOracle {
            prep: Circuit::empty(width),
            norm: 0.0,
        });
    }
    let unit = v / C64::new(norm, 0.0);
    Ok(ColumnOracle {
        prep: synthesize_state_prep(&unit, width)?,
        norm,
    })
}

/// Row oracle for a dense row `r = norm·⟨v|`: the stored ket is the
/// conjugate, |v⟩ = conj(r)/‖r‖.
pub fn row_oracle_from_dense(row: &CVec) -> Result<ColumnOracle> {
    let conj = CVec::from_iterator(row.len(), row.iter().map(|z| z.conj()));
    oracle_from_dense(&conj)
}

/// One oracle per column of `a`.
pub fn columns_from_dense(a: &CMat) -> Result<Vec<ColumnOracle>> {
    (0..a.ncols())
        .map(|j| oracle_from_dense(&CVec::from_iterator(a.nrows(), (0..a.nrows()).map(|i| a[(i, j)]))))
        .collect()
}

/// One row oracle per row of `a`.
pub fn rows_from_dense(a: &CMat) -> Result<Vec<ColumnOracle>> {
    (0..a.nrows())
        .map(|i| {
            row_oracle_from_dense(&CVec::from_iterator(
                a.ncols(),
                (0..a.ncols()).map(|j| a[(i, j)]),
            ))
        })
        .collect()
}

// ---- instance loading -------------------------------------------------------

/// How the rhs vector of a raw-matrix file is interpreted: a state the
/// loader oracle-ifies (column systems `Ax = b`) or classical coefficients
/// kept as a vector (row systems `A†y = c`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RawRhs {
    StateOracle,
    Coefficients,
}

#[derive(Deserialize)]
struct RawInstanceFile {
    #[serde(with = "complex_matrix")]
    matrix: CMat,
    #[serde(with = "complex_vector")]
    rhs: CVec,
}

/// Convert a dense system into the oracle representation.
pub fn instance_from_dense(
    a: &CMat,
    rhs: &CVec,
    raw_rhs: RawRhs,
) -> Result<LinearSystemInstance> {
    let columns = columns_from_dense(a)?;
    let rhs = match raw_rhs {
        RawRhs::StateOracle => {
            if rhs.len() != a.nrows() {
                return Err(Error::contract(format!(
                    "rhs has dimension {}, matrix has {} rows",
                    rhs.len(),
                    a.nrows()
                )));
            }
            Rhs::Oracle(oracle_from_dense(rhs)?)
        }
        RawRhs::Coefficients => {
            if rhs.len() != a.ncols() {
                return Err(Error::contract(format!(
                    "rhs has dimension {}, matrix has {} columns",
                    rhs.len(),
                    a.ncols()
                )));
            }
            Rhs::Vector(rhs.clone())
        }
    };
    let instance = LinearSystemInstance {
        columns,
        rhs,
        metrics: None,
    };
    instance.validate()?;
    Ok(instance)
}

/// Load an instance file in either schema. The key `matrix` selects the raw
/// schema; `raw_rhs` says how its rhs vector is interpreted.
pub fn load_instance(path: &Path, raw_rhs: RawRhs) -> Result<LinearSystemInstance> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(&text, path)?;
    if value
        .as_object()
        .is_some_and(|o| o.contains_key("matrix"))
    {
        let raw: RawInstanceFile = parse_json(&text, path)?;
        instance_from_dense(&raw.matrix, &raw.rhs, raw_rhs)
    } else {
        let instance: LinearSystemInstance = parse_json(&text, path)?;
        instance.validate()?;
        Ok(instance)
    }
}

/// A factorized system `A₁A₂ x = b`: columns of A₁, rows of A₂, and an
/// oracle right-hand side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedInstance {
    pub a1_columns: Vec<ColumnOracle>,
    pub a2_rows: Vec<ColumnOracle>,
    pub rhs: Rhs,
}

impl FactorizedInstance {
    /// The right-hand side, which must be an oracle for factorized solves.
    pub fn rhs_oracle(&self) -> Result<&ColumnOracle> {
        match &self.rhs {
            Rhs::Oracle(b) => Ok(b),
            Rhs::Vector(_) => Err(Error::contract(
                "factorized systems need an oracle right-hand side",
            )),
        }
    }
}

#[derive(Deserialize)]
struct RawFactorizedFile {
    #[serde(with = "complex_matrix")]
    a1: CMat,
    #[serde(with = "complex_matrix")]
    a2: CMat,
    #[serde(with = "complex_vector")]
    rhs: CVec,
}

/// Load a factorized instance in either schema (`a1` selects raw).
pub fn load_factorized(path: &Path) -> Result<FactorizedInstance> {
    let text = read_text(path)?;
    let value: serde_json::Value = parse_json(&text, path)?;
    if value.as_object().is_some_and(|o| o.contains_key("a1")) {
        let raw: RawFactorizedFile = parse_json(&text, path)?;
        if raw.a1.ncols() != raw.a2.nrows() {
            return Err(Error::contract(format!(
                "a1 has {} columns but a2 has {} rows",
                raw.a1.ncols(),
                raw.a2.nrows()
            )));
        }
        if raw.rhs.len() != raw.a1.nrows() {
            return Err(Error::contract(format!(
                "rhs has dimension {}, a1 has {} rows",
                raw.rhs.len(),
                raw.a1.nrows()
            )));
        }
        Ok(FactorizedInstance {
            a1_columns: columns_from_dense(&raw.a1)?,
            a2_rows: rows_from_dense(&raw.a2)?,
            rhs: Rhs::Oracle(oracle_from_dense(&raw.rhs)?),
        })
    } else {
        parse_json(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{columns_to_matrix, rows_to_matrix};
    use rand::prelude::*;
    use rand_chacha::ChaCha12Rng;

    fn random_cvec(rng: &mut ChaCha12Rng, n: usize) -> CVec {
        CVec::from_iterator(
            n,
            (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))),
        )
    }

    fn random_cmat(rng: &mut ChaCha12Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn dense_columns_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let a = random_cmat(&mut rng, 8, 3);
        let oracles = columns_from_dense(&a).unwrap();
        let back = columns_to_matrix(&oracles).unwrap();
        assert!((&back - &a).norm() < 1e-8);
    }

    #[test]
    fn dense_rows_round_trip() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let a = random_cmat(&mut rng, 3, 8);
        let oracles = rows_from_dense(&a).unwrap();
        let back = rows_to_matrix(&oracles).unwrap();
        assert!((&back - &a).norm() < 1e-8);
    }

    #[test]
    fn zero_column_gets_zero_norm_and_empty_prep() {
        let v = CVec::zeros(4);
        let oracle = oracle_from_dense(&v).unwrap();
        assert_eq!(oracle.norm, 0.0);
        assert_eq!(oracle.prep.num_gates(), 0);
        assert_eq!(oracle.prep.width(), 2);
    }

    #[test]
    fn non_power_of_two_dimension_rejected() {
        let v = CVec::zeros(3);
        let err = oracle_from_dense(&v).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn raw_instance_loads_for_both_rhs_roles() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let a = random_cmat(&mut rng, 4, 3);

        let b = random_cvec(&mut rng, 4);
        let path = dir.path().join("over.json");
        let text = format!(
            "{{\"matrix\": {}, \"rhs\": {}}}",
            serde_json::to_string(&MatrixWrap(&a)).unwrap(),
            serde_json::to_string(&VectorWrap(&b)).unwrap()
        );
        write_text(&path, &text).unwrap();
        let inst = load_instance(&path, RawRhs::StateOracle).unwrap();
        assert!((inst.reconstruct_matrix().unwrap() - &a).norm() < 1e-8);
        match &inst.rhs {
            Rhs::Oracle(oracle) => assert!((oracle.column().unwrap() - &b).norm() < 1e-8),
            Rhs::Vector(_) => panic!("expected an oracle rhs"),
        }

        let c = random_cvec(&mut rng, 3);
        let path = dir.path().join("under.json");
        let text = format!(
            "{{\"matrix\": {}, \"rhs\": {}}}",
            serde_json::to_string(&MatrixWrap(&a)).unwrap(),
            serde_json::to_string(&VectorWrap(&c)).unwrap()
        );
        write_text(&path, &text).unwrap();
        let inst = load_instance(&path, RawRhs::Coefficients).unwrap();
        match &inst.rhs {
            Rhs::Vector(v) => assert_eq!(v, &c),
            Rhs::Oracle(_) => panic!("expected a vector rhs"),
        }

        // Wrong rhs length for the role is a contract error.
        let err = load_instance(&path, RawRhs::StateOracle).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    struct MatrixWrap<'a>(&'a CMat);
    impl serde::Serialize for MatrixWrap<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            complex_matrix::serialize(self.0, s)
        }
    }
    struct VectorWrap<'a>(&'a CVec);
    impl serde::Serialize for VectorWrap<'_> {
        fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
            complex_vector::serialize(self.0, s)
        }
    }

    #[test]
    fn oracle_instance_round_trips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let a = random_cmat(&mut rng, 4, 2);
        let b = random_cvec(&mut rng, 4);
        let instance = instance_from_dense(&a, &b, RawRhs::StateOracle).unwrap();
        let path = dir.path().join("instance.json");
        write_json_pretty(&path, &instance).unwrap();
        let loaded = load_instance(&path, RawRhs::StateOracle).unwrap();
        assert_eq!(loaded, instance);
    }

    #[test]
    fn malformed_json_diagnostic_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        write_text(&path, "{\n  \"columns\": [,]\n}\n").unwrap();
        let err = load_instance(&path, RawRhs::StateOracle).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "diagnostic lacks position: {msg}");
        assert!(msg.contains("bad.json"), "diagnostic lacks path: {msg}");
    }

    #[test]
    fn missing_field_diagnostic_names_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("misses.json");
        write_text(&path, "{\"columns\": [{\"prep\": {\"width\": 1, \"layers\": []}}], \"rhs\": {\"vector\": []}}").unwrap();
        let err = load_instance(&path, RawRhs::Coefficients).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("norm"), "diagnostic lacks the field name: {msg}");
    }

    #[test]
    fn factorized_raw_loads_and_validates() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let a1 = random_cmat(&mut rng, 8, 2);
        let a2 = random_cmat(&mut rng, 2, 4);
        let b = random_cvec(&mut rng, 8);
        let path = dir.path().join("factorized.json");
        let text = format!(
            "{{\"a1\": {}, \"a2\": {}, \"rhs\": {}}}",
            serde_json::to_string(&MatrixWrap(&a1)).unwrap(),
            serde_json::to_string(&MatrixWrap(&a2)).unwrap(),
            serde_json::to_string(&VectorWrap(&b)).unwrap()
        );
        write_text(&path, &text).unwrap();
        let loaded = load_factorized(&path).unwrap();
        assert!((columns_to_matrix(&loaded.a1_columns).unwrap() - &a1).norm() < 1e-8);
        assert!((rows_to_matrix(&loaded.a2_rows).unwrap() - &a2).norm() < 1e-8);
        let oracle = loaded.rhs_oracle().unwrap();
        assert!((oracle.column().unwrap() - &b).norm() < 1e-8);

        // Factor shape mismatch is rejected at load.
        let text = format!(
            "{{\"a1\": {}, \"a2\": {}, \"rhs\": {}}}",
            serde_json::to_string(&MatrixWrap(&a1)).unwrap(),
            serde_json::to_string(&MatrixWrap(&random_cmat(&mut rng, 3, 4))).unwrap(),
            serde_json::to_string(&VectorWrap(&b)).unwrap()
        );
        write_text(&path, &text).unwrap();
        assert!(load_factorized(&path).is_err());
    }

    #[test]
    fn csv_rows_must_match_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(
            &path,
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]],
        )
        .unwrap();
        assert_eq!(read_text(&path).unwrap(), "a,b\n1,2\n3,4\n");
        assert!(write_csv(&path, &["a", "b"], &[vec!["1".into()]]).is_err());
    }
}
