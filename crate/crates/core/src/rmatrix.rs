//! The product algebra `g × g`, the splitting R-matrix on `g`, the induced
//! R-matrix `ℛ(x, y) = (R(x−y) + c·y, R(x−y) + c·x)` on `g × g` and the
//! modified classical Yang–Baxter checks.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::algebra::{AlgebraSpec, Element, Region};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::sampling::rng_for;

/// A point `(x, y)` of `g × g`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint {
    pub x: Element,
    pub y: Element,
}

impl PairPoint {
    pub fn new(x: Element, y: Element) -> Self {
        PairPoint { x, y }
    }

    pub fn zeros(dim: usize) -> Self {
        PairPoint::new(Element::zeros(dim), Element::zeros(dim))
    }

    /// `(x, x)`.
    pub fn diagonal(x: Element) -> Self {
        PairPoint::new(x.clone(), x)
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// `[x; y]` as one coordinate vector of length `2·dim`.
    pub fn flat(&self) -> DVector<f64> {
        let d = self.x.dim();
        let mut v = DVector::zeros(2 * d);
        v.rows_mut(0, d).copy_from(self.x.coords());
        v.rows_mut(d, d).copy_from(self.y.coords());
        v
    }

    pub fn from_flat(v: &DVector<f64>) -> Self {
        let d = v.len() / 2;
        PairPoint::new(
            Element::new(v.rows(0, d).into_owned()),
            Element::new(v.rows(d, d).into_owned()),
        )
    }

    pub fn max_abs(&self) -> f64 {
        self.x.max_abs().max(self.y.max_abs())
    }

    pub fn norm(&self) -> f64 {
        self.x.norm().hypot(self.y.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add<&PairPoint> for &PairPoint {
    type Output = PairPoint;
    fn add(self, rhs: &PairPoint) -> PairPoint {
        PairPoint::new(&self.x + &rhs.x, &self.y + &rhs.y)
    }
}

impl Add for PairPoint {
    type Output = PairPoint;
    fn add(self, rhs: PairPoint) -> PairPoint {
        PairPoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub<&PairPoint> for &PairPoint {
    type Output = PairPoint;
    fn sub(self, rhs: &PairPoint) -> PairPoint {
        PairPoint::new(&self.x - &rhs.x, &self.y - &rhs.y)
    }
}

impl Sub for PairPoint {
    type Output = PairPoint;
    fn sub(self, rhs: PairPoint) -> PairPoint {
        PairPoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for PairPoint {
    type Output = PairPoint;
    fn neg(self) -> PairPoint {
        PairPoint::new(-self.x, -self.y)
    }
}

impl Mul<f64> for &PairPoint {
    type Output = PairPoint;
    fn mul(self, rhs: f64) -> PairPoint {
        PairPoint::new(&self.x * rhs, &self.y * rhs)
    }
}

impl Mul<f64> for PairPoint {
    type Output = PairPoint;
    fn mul(self, rhs: f64) -> PairPoint {
        PairPoint::new(self.x * rhs, self.y * rhs)
    }
}

/// Operations on the product algebra `g × g`.
impl AlgebraSpec {
    /// `[(x,y),(z,s)] = ([x,z],[y,s])`.
    pub fn pair_bracket(&self, p: &PairPoint, q: &PairPoint) -> PairPoint {
        PairPoint::new(self.bracket(&p.x, &q.x), self.bracket(&p.y, &q.y))
    }

    /// `⟨(x₁,y₁),(x₂,y₂)⟩₂ = ⟨x₁,x₂⟩ − ⟨y₁,y₂⟩`.
    pub fn pair_form(&self, p: &PairPoint, q: &PairPoint) -> f64 {
        self.form(&p.x, &q.x) - self.form(&p.y, &q.y)
    }

    /// Componentwise associative product.
    pub fn pair_product(&self, p: &PairPoint, q: &PairPoint) -> Result<PairPoint> {
        Ok(PairPoint::new(self.product(&p.x, &q.x)?, self.product(&p.y, &q.y)?))
    }

    pub fn pair_project(&self, p: &PairPoint, x_region: Region, y_region: Region) -> PairPoint {
        PairPoint::new(self.project(&p.x, x_region), self.project(&p.y, y_region))
    }

    pub fn random_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> PairPoint {
        let x = self.random_element(rng);
        PairPoint::new(x, self.random_element(rng))
    }
}

/// The splitting `g = g₊ ⊕ g₋` and the constant `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RMatrixConfig {
    pub c: f64,
    pub plus: Region,
    pub minus: Region,
}

impl Default for RMatrixConfig {
    fn default() -> Self {
        RMatrixConfig { c: 1.0, plus: Region::PLUS, minus: Region::MINUS }
    }
}

impl RMatrixConfig {
    /// Both regions must partition the degrees that occur in `spec`.
    pub fn validate(&self, spec: &AlgebraSpec) -> Result<()> {
        for &d in spec.degrees() {
            let (p, m) = (self.plus.contains(d), self.minus.contains(d));
            if p == m {
                return Err(Error::BadSplitting(format!(
                    "degree {d} lies in {} of `{}` and `{}`",
                    if p { "both" } else { "neither" },
                    self.plus,
                    self.minus
                )));
            }
        }
        Ok(())
    }
}

/// An endomorphism `R` of `g` in basis coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct RMatrix {
    matrix: DMatrix<f64>,
}

impl RMatrix {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        assert!(matrix.is_square(), "R-matrix must be square");
        RMatrix { matrix }
    }

    /// `R = P₊ − P₋` for the configured splitting.
    pub fn splitting(spec: &AlgebraSpec, cfg: &RMatrixConfig) -> Result<Self> {
        cfg.validate(spec)?;
        let diag = DVector::from_iterator(
            spec.dim(),
            spec.degrees().iter().map(|&d| if cfg.plus.contains(d) { 1.0 } else { -1.0 }),
        );
        Ok(RMatrix::from_matrix(DMatrix::from_diagonal(&diag)))
    }

    /// `P_{>=0} − P_{<0}`.
    pub fn standard(spec: &AlgebraSpec) -> Self {
        Self::splitting(spec, &RMatrixConfig::default()).expect("standard splitting is a partition")
    }

    pub fn identity(dim: usize) -> Self {
        RMatrix::from_matrix(DMatrix::identity(dim, dim))
    }

    pub fn zero(dim: usize) -> Self {
        RMatrix::from_matrix(DMatrix::zeros(dim, dim))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, x: &Element) -> Element {
        Element::new(&self.matrix * x.coords())
    }
}

/// `ℛ(x, y) = (R(x−y) + c·y, R(x−y) + c·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRMatrix {
    r: RMatrix,
    c: f64,
}

impl PairRMatrix {
    pub fn new(r: RMatrix, c: f64) -> Self {
        PairRMatrix { r, c }
    }

    pub fn from_config(spec: &AlgebraSpec, cfg: &RMatrixConfig) -> Result<Self> {
        Ok(PairRMatrix::new(RMatrix::splitting(spec, cfg)?, cfg.c))
    }

    /// Splitting `R` with `c = 1`.
    pub fn standard(spec: &AlgebraSpec) -> Self {
        PairRMatrix::new(RMatrix::standard(spec), 1.0)
    }

    pub fn r(&self) -> &RMatrix {
        &self.r
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn apply(&self, p: &PairPoint) -> PairPoint {
        let rd = self.r.apply(&(&p.x - &p.y));
        PairPoint::new(&rd + &(&p.y * self.c), rd + &(&p.x * self.c))
    }

    /// `ℛ` as a `2·dim × 2·dim` matrix acting on `[x; y]`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let r = self.r.matrix();
        let d = r.nrows();
        let ci = DMatrix::<f64>::identity(d, d) * self.c;
        let mut m = DMatrix::zeros(2 * d, 2 * d);
        m.view_mut((0, 0), (d, d)).copy_from(r);
        m.view_mut((0, d), (d, d)).copy_from(&(&ci - r));
        m.view_mut((d, 0), (d, d)).copy_from(&(r + &ci));
        m.view_mut((d, d), (d, d)).copy_from(&(-r));
        m
    }
}

/// `R(x) = x₊ − x₋` for the standard splitting.
pub fn r_apply(spec: &AlgebraSpec, x: &Element) -> Element {
    spec.project(x, Region::PLUS) - spec.project(x, Region::MINUS)
}

/// `ℛ(p)` for the configured splitting and constant.
pub fn rr_apply(spec: &AlgebraSpec, p: &PairPoint, cfg: &RMatrixConfig) -> Result<PairPoint> {
    Ok(PairRMatrix::from_config(spec, cfg)?.apply(p))
}

/// `(x,y) = (x₊+y₋, x₊+y₋) + (x₋−y₋, y₊−x₊)`: the parts along the diagonal
/// subalgebra and along `g₋ × g₊`.
pub fn decompose_pair(spec: &AlgebraSpec, p: &PairPoint) -> (PairPoint, PairPoint) {
    let (xp, xm) = (spec.project(&p.x, Region::PLUS), spec.project(&p.x, Region::MINUS));
    let (yp, ym) = (spec.project(&p.y, Region::PLUS), spec.project(&p.y, Region::MINUS));
    let plus = PairPoint::diagonal(&xp + &ym);
    let minus = PairPoint::new(xm - &ym, yp - xp);
    (plus, minus)
}

/// `B_R(x,y) = [Rx,Ry] − R([Rx,y] + [x,Ry])`.
pub fn b_tensor(spec: &AlgebraSpec, r: &RMatrix, x: &Element, y: &Element) -> Element {
    let (rx, ry) = (r.apply(x), r.apply(y));
    spec.bracket(&rx, &ry) - r.apply(&(spec.bracket(&rx, y) + spec.bracket(x, &ry)))
}

/// `B_ℛ(p,q)` on `g × g`.
pub fn b_tensor_pair(spec: &AlgebraSpec, rr: &PairRMatrix, p: &PairPoint, q: &PairPoint) -> PairPoint {
    let (rp, rq) = (rr.apply(p), rr.apply(q));
    spec.pair_bracket(&rp, &rq) - rr.apply(&(spec.pair_bracket(&rp, q) + spec.pair_bracket(p, &rq)))
}

/// `[x,y]_R = ½([Rx,y] + [x,Ry])`.
pub fn r_bracket(spec: &AlgebraSpec, r: &RMatrix, x: &Element, y: &Element) -> Element {
    (spec.bracket(&r.apply(x), y) + spec.bracket(x, &r.apply(y))) * 0.5
}

/// `[p,q]_ℛ = ½([ℛp,q] + [p,ℛq])`.
pub fn rr_bracket(spec: &AlgebraSpec, rr: &PairRMatrix, p: &PairPoint, q: &PairPoint) -> PairPoint {
    (spec.pair_bracket(&rr.apply(p), q) + spec.pair_bracket(p, &rr.apply(q))) * 0.5
}

/// Default tolerance for the mCYBE residual.
pub const MCYBE_TOL: f64 = 1e-11;

/// Which endomorphism an mCYBE check runs on.
#[derive(Debug, Clone, Copy)]
pub enum McybeTarget<'a> {
    Algebra(&'a RMatrix),
    Pair(&'a PairRMatrix),
}

#[derive(Debug, Clone, PartialEq)]
pub struct McybeReport {
    pub samples: usize,
    pub seed: u64,
    pub c: f64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Samples random `x, y` and measures `B(x,y) + c²[x,y]` modulo the center.
pub fn check_mcybe(
    spec: &AlgebraSpec,
    target: McybeTarget<'_>,
    c: f64,
    samples: usize,
    seed: u64,
    tolerance: f64,
    exec: Exec,
) -> McybeReport {
    let residual = |i: usize| -> f64 {
        let mut rng = rng_for(seed, i as u64);
        match target {
            McybeTarget::Algebra(r) => {
                let x = spec.random_element(&mut rng);
                let y = spec.random_element(&mut rng);
                let v = b_tensor(spec, r, &x, &y) + spec.bracket(&x, &y) * (c * c);
                spec.remove_center(v.coords()).amax()
            }
            McybeTarget::Pair(rr) => {
                let p = spec.random_pair(&mut rng);
                let q = spec.random_pair(&mut rng);
                let v = b_tensor_pair(spec, rr, &p, &q) + spec.pair_bracket(&p, &q) * (c * c);
                spec.remove_center(v.x.coords()).amax().max(spec.remove_center(v.y.coords()).amax())
            }
        }
    };
    let max_residual = exec.max(samples, residual);
    McybeReport {
        samples,
        seed,
        c,
        max_residual,
        tolerance,
        pass: samples > 0 && max_residual < tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_gl, build_sl};

    #[test]
    fn r_is_an_involution_with_expected_signs() {
        let sl3 = build_sl(3).unwrap();
        let mut rng = rng_for(11, 0);
        let x = sl3.random_element(&mut rng);
        let xp = sl3.project(&x, Region::PLUS);
        let xm = sl3.project(&x, Region::MINUS);
        assert_eq!(r_apply(&sl3, &xp), xp);
        assert_eq!(r_apply(&sl3, &xm), -xm);
        assert!((r_apply(&sl3, &r_apply(&sl3, &x)) - &x).max_abs() < 1e-13);
        let r = RMatrix::standard(&sl3);
        assert_eq!(r.apply(&x), r_apply(&sl3, &x));
    }

    #[test]
    fn rr_on_diagonal_and_sl2_values() {
        let sl2 = build_sl(2).unwrap();
        let cfg = RMatrixConfig::default();
        let mut rng = rng_for(2, 0);
        let x = sl2.random_element(&mut rng);
        let d = PairPoint::diagonal(x.clone());
        assert_eq!(rr_apply(&sl2, &d, &cfg).unwrap(), d);
        // (x₊−x₋+2y₋, y₋−y₊+2x₊) with x = e, y = f gives (e + 2f, f + 2e)
        let (e, f) = (sl2.basis_element(0), sl2.basis_element(2));
        let got = rr_apply(&sl2, &PairPoint::new(e.clone(), f.clone()), &cfg).unwrap();
        assert!((got.x - (&e + &(&f * 2.0))).max_abs() < 1e-15);
        assert!((got.y - (&(&e * 2.0) + &f)).max_abs() < 1e-15);
    }

    #[test]
    fn rr_matrix_agrees_with_apply() {
        let gl3 = build_gl(3).unwrap();
        let rr = PairRMatrix::new(RMatrix::standard(&gl3), 0.7);
        let mut rng = rng_for(4, 0);
        let p = gl3.random_pair(&mut rng);
        let via_matrix = PairPoint::from_flat(&(rr.matrix() * p.flat()));
        assert!((via_matrix - rr.apply(&p)).max_abs() < 1e-14);
    }

    #[test]
    fn splitting_identity_and_decomposition() {
        let gl3 = build_gl(3).unwrap();
        let rr = PairRMatrix::standard(&gl3);
        for s in 0..10 {
            let mut rng = rng_for(9, s);
            let p = gl3.random_pair(&mut rng);
            let (plus, minus) = decompose_pair(&gl3, &p);
            assert!((&(&plus + &minus) - &p).max_abs() < 1e-13);
            assert_eq!(plus.x, plus.y);
            assert_eq!(gl3.project(&minus.x, Region::MINUS), minus.x);
            assert_eq!(gl3.project(&minus.y, Region::PLUS), minus.y);
            assert!((rr.apply(&p) - (plus - minus)).max_abs() < 1e-13);
        }
    }

    #[test]
    fn decomposition_special_cases() {
        let sl3 = build_sl(3).unwrap();
        let mut rng = rng_for(10, 0);
        let x = sl3.random_in(&mut rng, Region::PLUS);
        let (plus, minus) = decompose_pair(&sl3, &PairPoint::diagonal(x.clone()));
        assert_eq!(plus, PairPoint::diagonal(x));
        assert_eq!(minus.max_abs(), 0.0);
        let y = sl3.random_element(&mut rng);
        let (plus, minus) = decompose_pair(&sl3, &PairPoint::new(sl3.zero(), y.clone()));
        let ym = sl3.project(&y, Region::MINUS);
        assert_eq!(plus, PairPoint::diagonal(ym.clone()));
        assert_eq!(minus, PairPoint::new(-ym, sl3.project(&y, Region::PLUS)));
    }

    #[test]
    fn b_tensor_is_antisymmetric_and_solves_mcybe() {
        let sl3 = build_sl(3).unwrap();
        let r = RMatrix::standard(&sl3);
        let rr = PairRMatrix::standard(&sl3);
        let mut rng = rng_for(3, 0);
        let (x, y) = (sl3.random_element(&mut rng), sl3.random_element(&mut rng));
        assert!(b_tensor(&sl3, &r, &x, &x).max_abs() < 1e-14);
        let sum = b_tensor(&sl3, &r, &x, &y) + b_tensor(&sl3, &r, &y, &x);
        assert!(sum.max_abs() < 1e-13);
        let mcybe = b_tensor(&sl3, &r, &x, &y) + sl3.bracket(&x, &y);
        assert!(mcybe.max_abs() < 1e-11);
        let (p, q) = (sl3.random_pair(&mut rng), sl3.random_pair(&mut rng));
        let pair = b_tensor_pair(&sl3, &rr, &p, &q) + sl3.pair_bracket(&p, &q);
        assert!(pair.max_abs() < 1e-11);
    }

    #[test]
    fn mcybe_checker_verdicts() {
        let sl3 = build_sl(3).unwrap();
        let ex = Exec::default();
        let r = RMatrix::standard(&sl3);
        let rep = check_mcybe(&sl3, McybeTarget::Algebra(&r), 1.0, 100, 42, MCYBE_TOL, ex);
        assert!(rep.pass, "{rep:?}");
        let id = RMatrix::identity(sl3.dim());
        let rep = check_mcybe(&sl3, McybeTarget::Algebra(&id), 1.0, 20, 42, MCYBE_TOL, ex);
        assert!(rep.pass && rep.max_residual < 1e-13);
        let zero = RMatrix::zero(sl3.dim());
        let rep = check_mcybe(&sl3, McybeTarget::Algebra(&zero), 1.0, 20, 42, MCYBE_TOL, ex);
        assert!(!rep.pass);
        let rr = PairRMatrix::standard(&sl3);
        assert!(check_mcybe(&sl3, McybeTarget::Pair(&rr), 1.0, 50, 1, MCYBE_TOL, ex).pass);
    }

    #[test]
    fn mcybe_on_gl_modulo_center() {
        let gl3 = build_gl(3).unwrap();
        let r = RMatrix::standard(&gl3);
        let rep = check_mcybe(&gl3, McybeTarget::Algebra(&r), 1.0, 50, 5, MCYBE_TOL, Exec::Sequential);
        assert!(rep.pass);
    }

    #[test]
    fn r_bracket_values_and_jacobi() {
        let sl2 = build_sl(2).unwrap();
        let r = RMatrix::standard(&sl2);
        let (e, f) = (sl2.basis_element(0), sl2.basis_element(2));
        assert!(r_bracket(&sl2, &r, &e, &f).max_abs() < 1e-15);
        let gl3 = build_gl(3).unwrap();
        let rr = PairRMatrix::standard(&gl3);
        let mut rng = rng_for(8, 0);
        let p = gl3.random_pair(&mut rng);
        assert!(rr_bracket(&gl3, &rr, &p, &p).max_abs() < 1e-15);
        let (q, s) = (gl3.random_pair(&mut rng), gl3.random_pair(&mut rng));
        let b = |a: &PairPoint, c: &PairPoint| rr_bracket(&gl3, &rr, a, c);
        let jac = b(&b(&p, &q), &s) + b(&b(&q, &s), &p) + b(&b(&s, &p), &q);
        assert!(jac.max_abs() < 1e-11);
    }

    #[test]
    fn subalgebra_closure_of_the_pair_splitting() {
        let sl3 = build_sl(3).unwrap();
        let rr = PairRMatrix::standard(&sl3);
        let mut rng = rng_for(12, 0);
        let d1 = PairPoint::diagonal(sl3.random_element(&mut rng));
        let d2 = PairPoint::diagonal(sl3.random_element(&mut rng));
        let b = rr_bracket(&sl3, &rr, &d1, &d2);
        assert!((b.x - b.y).max_abs() < 1e-13);
        let a1 = PairPoint::new(sl3.random_in(&mut rng, Region::MINUS), sl3.random_in(&mut rng, Region::PLUS));
        let a2 = PairPoint::new(sl3.random_in(&mut rng, Region::MINUS), sl3.random_in(&mut rng, Region::PLUS));
        let b = rr_bracket(&sl3, &rr, &a1, &a2);
        assert!(sl3.project(&b.x, Region::PLUS).max_abs() < 1e-13);
        assert!(sl3.project(&b.y, Region::MINUS).max_abs() < 1e-13);
    }

    #[test]
    fn bad_splitting_is_rejected() {
        let sl3 = build_sl(3).unwrap();
        let cfg = RMatrixConfig { c: 1.0, plus: Region::AtLeast(0), minus: Region::Below(-1) };
        assert!(matches!(RMatrix::splitting(&sl3, &cfg), Err(Error::BadSplitting(_))));
    }
}
