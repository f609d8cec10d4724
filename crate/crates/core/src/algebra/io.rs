//! The algebra-spec interchange document (JSON).
//!
//! Floating-point values are written in scientific notation with 17
//! significant digits, so a save/load cycle is bit-exact.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraSpec, SpecParts};
use crate::error::{Error, Result};

/// An `f64` serialized with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sci(pub f64);

impl Serialize for Sci {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite number in algebra spec"));
        }
        let raw = serde_json::value::RawValue::from_string(format!("{:.16e}", self.0))
            .map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sci {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Sci)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDocument {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    pub dim: usize,
    pub rank: usize,
    /// Row-major matrices.
    pub basis: Vec<Vec<Vec<Sci>>>,
    pub degrees: Vec<i32>,
    pub exponents: Vec<u32>,
    /// Row-major Cartan matrix.
    pub cartan: Vec<Vec<i64>>,
    pub e_coords: Vec<Sci>,
    pub h_coords: Vec<Sci>,
    pub associative: bool,
}

impl AlgebraDocument {
    pub fn from_spec(spec: &AlgebraSpec) -> Self {
        let p = spec.parts();
        let sci = |v: &[f64]| v.iter().map(|&x| Sci(x)).collect::<Vec<_>>();
        AlgebraDocument {
            name: p.name.clone(),
            n: p.n,
            dim: p.basis.len(),
            rank: p.rank,
            basis: p
                .basis
                .iter()
                .map(|m| (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| Sci(x)).collect()).collect())
                .collect(),
            degrees: p.degrees.clone(),
            exponents: p.exponents.clone(),
            cartan: p.cartan.clone(),
            e_coords: sci(&p.e_coords),
            h_coords: sci(&p.h_coords),
            associative: p.associative,
        }
    }

    /// Converts to a validated spec.
    pub fn into_spec(self) -> Result<AlgebraSpec> {
        if self.basis.len() != self.dim {
            return Err(Error::Parse(format!(
                "dim = {} but {} basis matrices given",
                self.dim,
                self.basis.len()
            )));
        }
        let mut basis = Vec::with_capacity(self.dim);
        for (k, rows) in self.basis.iter().enumerate() {
            let n = rows.len();
            if rows.iter().any(|r| r.len() != n) {
                return Err(Error::Parse(format!("basis matrix {k} is not square")));
            }
            basis.push(DMatrix::from_fn(n, n, |i, j| rows[i][j].0));
        }
        let plain = |v: Vec<Sci>| v.into_iter().map(|s| s.0).collect::<Vec<_>>();
        AlgebraSpec::from_parts(SpecParts {
            name: self.name,
            n: self.n,
            rank: self.rank,
            basis,
            degrees: self.degrees,
            exponents: self.exponents,
            cartan: self.cartan,
            e_coords: plain(self.e_coords),
            h_coords: plain(self.h_coords),
            associative: self.associative,
        })
    }
}

/// Serializes a spec to the interchange document.
pub fn spec_to_string(spec: &AlgebraSpec) -> String {
    serde_json::to_string_pretty(&AlgebraDocument::from_spec(spec))
        .expect("validated specs contain only finite numbers")
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<AlgebraSpec> {
    let doc: AlgebraDocument = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    doc.into_spec()
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<AlgebraSpec> {
    parse_spec(&fs::read_to_string(path)?)
}

pub fn save_spec(spec: &AlgebraSpec, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, spec_to_string(spec) + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_gl, build_sl};

    #[test]
    fn sl3_round_trip_is_bit_identical() {
        let sl3 = build_sl(3).unwrap();
        let text = spec_to_string(&sl3);
        let back = parse_spec(&text).unwrap();
        assert_eq!(back, sl3);
        assert_eq!(spec_to_string(&back), text);
    }

    #[test]
    fn numbers_carry_seventeen_digits() {
        let text = spec_to_string(&build_gl(2).unwrap());
        assert!(text.contains("1.0000000000000000e0"));
    }

    #[test]
    fn non_closed_bracket_is_named() {
        let sl3 = build_sl(3).unwrap();
        let mut doc = AlgebraDocument::from_spec(&sl3);
        // Perturb one entry of E_12 so [E_12, E_23] leaves the span.
        doc.basis[0][0][0] = Sci(0.5);
        let err = doc.into_spec().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bracket-closure"), "{msg}");
        match err {
            Error::Invariant(v) => {
                assert!(v.iter().any(|v| v.invariant == "bracket-closure" && v.indices.len() == 2))
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_failures_are_reported() {
        assert!(matches!(parse_spec("{not json"), Err(Error::Parse(_))));
        let sl2 = build_sl(2).unwrap();
        let mut doc = AlgebraDocument::from_spec(&sl2);
        doc.dim = 4;
        assert!(matches!(doc.into_spec(), Err(Error::Parse(_))));
    }

    #[test]
    fn wrong_principal_pair_is_rejected() {
        let sl2 = build_sl(2).unwrap();
        let mut doc = AlgebraDocument::from_spec(&sl2);
        doc.h_coords[1] = Sci(3.0);
        let msg = doc.into_spec().unwrap_err().to_string();
        assert!(msg.contains("principal-pair"), "{msg}");
    }
}
