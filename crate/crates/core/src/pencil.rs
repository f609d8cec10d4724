//! Matrix polynomials in one variable λ with exact coefficient arithmetic.

use std::ops::Mul;

use nalgebra::DMatrix;

/// `Σ_k λ^k · coeffs[k]`, all coefficients square and of equal size.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    coeffs: Vec<DMatrix<f64>>,
}

impl PolyMatrix {
    pub fn new(coeffs: Vec<DMatrix<f64>>) -> Self {
        assert!(!coeffs.is_empty(), "a matrix polynomial needs at least one coefficient");
        let n = coeffs[0].nrows();
        assert!(coeffs.iter().all(|c| c.nrows() == n && c.ncols() == n));
        PolyMatrix { coeffs }
    }

    pub fn constant(m: DMatrix<f64>) -> Self {
        PolyMatrix::new(vec![m])
    }

    pub fn identity(n: usize) -> Self {
        PolyMatrix::constant(DMatrix::identity(n, n))
    }

    /// `λ·a + b`.
    pub fn linear(a: DMatrix<f64>, b: DMatrix<f64>) -> Self {
        PolyMatrix::new(vec![b, a])
    }

    /// `λ·x − y`.
    pub fn pencil(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Self {
        PolyMatrix::linear(x.clone(), -y)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn size(&self) -> usize {
        self.coeffs[0].nrows()
    }

    pub fn coeffs(&self) -> &[DMatrix<f64>] {
        &self.coeffs
    }

    /// Coefficient of `λ^k` (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> DMatrix<f64> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| DMatrix::zeros(self.size(), self.size()))
    }

    pub fn pow(&self, e: u32) -> PolyMatrix {
        let mut acc = PolyMatrix::identity(self.size());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Traces of the coefficients.
    pub fn trace_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.trace()).collect()
    }

    /// Horner evaluation at a scalar.
    pub fn eval(&self, lambda: f64) -> DMatrix<f64> {
        let mut acc = DMatrix::zeros(self.size(), self.size());
        for c in self.coeffs.iter().rev() {
            acc = acc * lambda + c;
        }
        acc
    }
}

impl Mul for &PolyMatrix {
    type Output = PolyMatrix;
    fn mul(self, rhs: &PolyMatrix) -> PolyMatrix {
        let n = self.size();
        let mut out = vec![DMatrix::zeros(n, n); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        PolyMatrix::new(out)
    }
}
