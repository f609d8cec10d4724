#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::DMatrix;
use twotoda::algebra::{build_gl, build_sl, SpecParts};
use twotoda::AlgebraSpec;

pub fn sl(n: usize) -> Arc<AlgebraSpec> {
    Arc::new(build_sl(n).unwrap())
}

pub fn gl(n: usize) -> Arc<AlgebraSpec> {
    Arc::new(build_gl(n).unwrap())
}

/// The desk-scale algebras of the suite.
pub fn suite() -> Vec<Arc<AlgebraSpec>> {
    vec![sl(2), sl(3), sl(4), gl(2), gl(3)]
}

fn unit(i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(5, 5);
    m[(i, j)] = 1.0;
    m
}

/// Parts of so(5) = {X : XᵀJ + JX = 0} with J the antidiagonal identity.
/// Basis `E_ij − E_{4−j,4−i}` (0-based, `i + j < 4`) of degree `j − i`.
pub fn so5_parts() -> SpecParts {
    let mut pairs: Vec<(usize, usize)> = vec![];
    for i in 0..5 {
        for j in 0..5 {
            if i + j < 4 {
                pairs.push((i, j));
            }
        }
    }
    pairs.sort_by_key(|&(i, j)| {
        let d = j as i32 - i as i32;
        // positive degrees first, then zero, then negative
        (if d > 0 { 0 } else if d == 0 { 1 } else { 2 }, d.abs(), i)
    });
    let basis: Vec<DMatrix<f64>> = pairs.iter().map(|&(i, j)| unit(i, j) - unit(4 - j, 4 - i)).collect();
    let degrees: Vec<i32> = pairs.iter().map(|&(i, j)| j as i32 - i as i32).collect();
    let coord = |target: (usize, usize)| -> f64 { if pairs.contains(&target) { 1.0 } else { 0.0 } };
    // e = (E12 − E45) + (E23 − E34), h = diag(4, 2, 0, −2, −4).
    let e_coords = pairs.iter().map(|&p| coord(p) * if p == (0, 1) || p == (1, 2) { 1.0 } else { 0.0 }).collect();
    let h_coords = pairs
        .iter()
        .map(|&p| match p {
            (0, 0) => 4.0,
            (1, 1) => 2.0,
            _ => 0.0,
        })
        .collect();
    SpecParts {
        name: "so5".into(),
        n: None,
        rank: 2,
        basis,
        degrees,
        exponents: vec![1, 3],
        cartan: vec![vec![2, -2], vec![-1, 2]],
        e_coords,
        h_coords,
        associative: false,
    }
}

pub fn so5() -> Arc<AlgebraSpec> {
    Arc::new(AlgebraSpec::from_parts(so5_parts()).unwrap())
}
