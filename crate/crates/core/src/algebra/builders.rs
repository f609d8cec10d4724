use nalgebra::DMatrix;

use super::{AlgebraSpec, SpecParts};
use crate::error::{Error, Result};

fn unit(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

/// Type-A Cartan matrix of size `l`.
fn cartan_a(l: usize) -> Vec<Vec<i64>> {
    (0..l)
        .map(|i| {
            (0..l)
                .map(|j| match i.abs_diff(j) {
                    0 => 2,
                    1 => -1,
                    _ => 0,
                })
                .collect()
        })
        .collect()
}

/// Off-diagonal elementary matrices ordered by degree `j - i`: positive
/// degrees first (1, 2, ...), then negative (-1, -2, ...).
fn off_diagonal(n: usize) -> (Vec<DMatrix<f64>>, Vec<i32>, Vec<DMatrix<f64>>, Vec<i32>) {
    let (mut up, mut up_deg, mut low, mut low_deg) = (vec![], vec![], vec![], vec![]);
    for d in 1..n {
        for i in 0..n - d {
            up.push(unit(n, i, i + d));
            up_deg.push(d as i32);
            low.push(unit(n, i + d, i));
            low_deg.push(-(d as i32));
        }
    }
    (up, up_deg, low, low_deg)
}

fn principal_pair(n: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut e = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        e[(i, i + 1)] = 1.0;
    }
    let h = DMatrix::from_fn(n, n, |i, j| if i == j { (n - 1) as f64 - 2.0 * i as f64 } else { 0.0 });
    (e, h)
}

fn assemble(name: String, n: usize, cartan_block: Vec<DMatrix<f64>>, associative: bool) -> Result<AlgebraSpec> {
    let (up, up_deg, low, low_deg) = off_diagonal(n);
    let rank = cartan_block.len();
    let mut basis = up;
    basis.extend(cartan_block);
    basis.extend(low);
    let mut degrees = up_deg;
    degrees.extend(std::iter::repeat_n(0, rank));
    degrees.extend(low_deg);

    let exponents: Vec<u32> = if associative {
        (0..n as u32).collect()
    } else {
        (1..n as u32).collect()
    };
    let (e, h) = principal_pair(n);
    // The builders' bases are exact, so coordinates can be read back through
    // a provisional spec with zero principal pair.
    let provisional = SpecParts {
        name: name.clone(),
        n: Some(n),
        rank,
        basis: basis.clone(),
        degrees: degrees.clone(),
        exponents: exponents.clone(),
        cartan: cartan_a(n - 1),
        e_coords: vec![0.0; basis.len()],
        h_coords: vec![0.0; basis.len()],
        associative,
    };
    let tmp = AlgebraSpec::assemble(provisional, 1.0)?;
    let e_coords = tmp.from_matrix(&e).coords().as_slice().to_vec();
    let h_coords = tmp.from_matrix(&h).coords().as_slice().to_vec();
    AlgebraSpec::from_parts(SpecParts { e_coords, h_coords, ..tmp.parts })
}

/// `sl(n)` with the diagonal grading: basis `E_ij` (`i != j`, degree
/// `j - i`) and coroots `H_i = E_ii - E_{i+1,i+1}`; `e` is the sum of the
/// superdiagonal units and `h = diag(n-1, n-3, ..., 1-n)`.
pub fn build_sl(n: usize) -> Result<AlgebraSpec> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    let coroots = (0..n - 1).map(|i| unit(n, i, i) - unit(n, i + 1, i + 1)).collect();
    assemble(format!("sl{n}"), n, coroots, false)
}

/// `gl(n)` with the diagonal grading and the elementary basis `E_ij`.
///
/// The rank is `n` (the diagonal), the exponents are `0, 1, ..., n-1` (the
/// trace being the degree-1 generator) and the Cartan matrix is that of the
/// semisimple part `sl(n)`.
pub fn build_gl(n: usize) -> Result<AlgebraSpec> {
    if n < 2 {
        return Err(Error::InvalidOrder(n));
    }
    let diag = (0..n).map(|i| unit(n, i, i)).collect();
    assemble(format!("gl{n}"), n, diag, true)
}
