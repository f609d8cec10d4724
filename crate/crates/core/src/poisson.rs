//! Linear and quadratic Poisson ℛ-brackets on `g × g`.
//!
//! Gradients are taken with respect to `⟨(x₁,y₁),(x₂,y₂)⟩₂ = ⟨x₁,x₂⟩ − ⟨y₁,y₂⟩`,
//! whose Gram matrix is `Γ₂ = diag(G, −G)`. Hamiltonian fields follow the
//! convention `X_F[K] = {K, F}`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraSpec, Element, Region};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::linalg;
use crate::rmatrix::{PairPoint, PairRMatrix};
use crate::sampling::rng_for;

/// Central finite-difference step on unit-scaled coordinates.
pub const FD_STEP: f64 = 1e-5;

/// Residual allowed when checking that a point lies on a phase space.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Number of seeded points in a rank sweep.
pub const RANK_POINTS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BracketKind {
    Linear,
    Quadratic,
}

impl fmt::Display for BracketKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BracketKind::Linear => "linear",
            BracketKind::Quadratic => "quadratic",
        })
    }
}

impl FromStr for BracketKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(BracketKind::Linear),
            "quadratic" => Ok(BracketKind::Quadratic),
            other => Err(Error::Precondition(format!("unknown bracket kind `{other}`"))),
        }
    }
}

pub type EvalFn = Arc<dyn Fn(&PairPoint) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&PairPoint) -> PairPoint + Send + Sync>;

/// A scalar function on `g × g` with an optional analytic `⟨·,·⟩₂`-gradient.
#[derive(Clone)]
pub struct ScalarFunction {
    name: String,
    eval: EvalFn,
    grad: Option<GradFn>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("name", &self.name)
            .field("analytic_gradient", &self.grad.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(name: impl Into<String>, eval: impl Fn(&PairPoint) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunction { name: name.into(), eval: Arc::new(eval), grad: None }
    }

    pub fn with_gradient(
        name: impl Into<String>,
        eval: impl Fn(&PairPoint) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&PairPoint) -> PairPoint + Send + Sync + 'static,
    ) -> Self {
        ScalarFunction { name: name.into(), eval: Arc::new(eval), grad: Some(Arc::new(grad)) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, m: &PairPoint) -> f64 {
        (self.eval)(m)
    }

    pub fn has_gradient(&self) -> bool {
        self.grad.is_some()
    }

    pub fn analytic_gradient(&self, m: &PairPoint) -> Option<PairPoint> {
        self.grad.as_ref().map(|g| g(m))
    }

    /// The same function with its analytic gradient dropped.
    pub fn without_gradient(&self) -> Self {
        ScalarFunction { name: self.name.clone(), eval: self.eval.clone(), grad: None }
    }

    pub fn constant(name: impl Into<String>, value: f64, dim: usize) -> Self {
        Self::with_gradient(name, move |_| value, move |_| PairPoint::zeros(dim))
    }

    /// `m ↦ ⟨a, m⟩₂`, whose gradient is `a`.
    pub fn linear(spec: Arc<AlgebraSpec>, name: impl Into<String>, a: PairPoint) -> Self {
        let g = a.clone();
        Self::with_gradient(name, move |m| spec.pair_form(&a, m), move |_| g.clone())
    }

    /// `m ↦ c · [x; y]` for a coordinate covector `c` of length `2·dim`.
    pub fn covector(spec: &AlgebraSpec, name: impl Into<String>, c: DVector<f64>) -> Self {
        let grad = lift_pair_covector(spec, &c);
        Self::with_gradient(name, move |m| c.dot(&m.flat()), move |_| grad.clone())
    }

    /// Pointwise product; the gradient follows the Leibniz rule.
    pub fn product(&self, other: &ScalarFunction) -> Self {
        let (f, g) = (self.clone(), other.clone());
        let name = format!("({})*({})", self.name, other.name);
        let eval = {
            let (f, g) = (f.clone(), g.clone());
            move |m: &PairPoint| f.eval(m) * g.eval(m)
        };
        if self.has_gradient() && other.has_gradient() {
            Self::with_gradient(name, eval, move |m| {
                let (fv, gv) = (f.eval(m), g.eval(m));
                f.analytic_gradient(m).unwrap() * gv + g.analytic_gradient(m).unwrap() * fv
            })
        } else {
            Self::new(name, eval)
        }
    }

    /// `a·F + b·G`.
    pub fn combine(a: f64, f: &ScalarFunction, b: f64, g: &ScalarFunction) -> Self {
        let name = format!("{a}*({})+{b}*({})", f.name, g.name);
        let (f1, g1) = (f.clone(), g.clone());
        let eval = move |m: &PairPoint| a * f1.eval(m) + b * g1.eval(m);
        if f.has_gradient() && g.has_gradient() {
            let (f, g) = (f.clone(), g.clone());
            Self::with_gradient(name, eval, move |m| {
                f.analytic_gradient(m).unwrap() * a + g.analytic_gradient(m).unwrap() * b
            })
        } else {
            Self::new(name, eval)
        }
    }
}

/// `Γ₂⁻¹ c`: the pair gradient of the linear function with covector `c`.
pub fn lift_pair_covector(spec: &AlgebraSpec, c: &DVector<f64>) -> PairPoint {
    let d = spec.dim();
    let gx = spec.lift_covector(&c.rows(0, d).into_owned());
    let gy = spec.lift_covector(&c.rows(d, d).into_owned());
    PairPoint::new(gx, -gy)
}

/// `Γ₂ v`: the coordinate covector of the linear function `⟨v, ·⟩₂`.
pub fn lower_pair(spec: &AlgebraSpec, v: &PairPoint) -> DVector<f64> {
    let mut c = DVector::zeros(2 * spec.dim());
    c.rows_mut(0, spec.dim()).copy_from(&(spec.gram() * v.x.coords()));
    c.rows_mut(spec.dim(), spec.dim()).copy_from(&(-(spec.gram() * v.y.coords())));
    c
}

/// Central-difference gradient of `f` at `m`.
pub fn fd_gradient(spec: &AlgebraSpec, f: &ScalarFunction, m: &PairPoint) -> PairPoint {
    let base = m.flat();
    let c = DVector::from_fn(base.len(), |a, _| {
        let (mut up, mut down) = (base.clone(), base.clone());
        up[a] += FD_STEP;
        down[a] -= FD_STEP;
        (f.eval(&PairPoint::from_flat(&up)) - f.eval(&PairPoint::from_flat(&down))) / (2.0 * FD_STEP)
    });
    lift_pair_covector(spec, &c)
}

/// An affine subspace `base + span(tangent)` of `g × g`, with coordinates
/// dual to the tangent basis.
#[derive(Debug, Clone)]
pub struct PhaseSpace {
    name: String,
    base: PairPoint,
    tangent: Vec<PairPoint>,
    t: DMatrix<f64>,
    t_pinv: DMatrix<f64>,
}

impl PhaseSpace {
    pub fn new(name: impl Into<String>, base: PairPoint, tangent: Vec<PairPoint>) -> Result<Self> {
        let name = name.into();
        let len = base.flat().len();
        let cols: Vec<DVector<f64>> = tangent.iter().map(|t| t.flat()).collect();
        if cols.iter().any(|c| c.len() != len) {
            return Err(Error::Precondition(format!("tangent vectors of `{name}` have the wrong size")));
        }
        let t = if cols.is_empty() { DMatrix::zeros(len, 0) } else { DMatrix::from_columns(&cols) };
        if linalg::numerical_rank(&t) != tangent.len() {
            return Err(Error::Precondition(format!("tangent vectors of `{name}` are linearly dependent")));
        }
        let t_pinv = if tangent.is_empty() {
            DMatrix::zeros(0, len)
        } else {
            linalg::left_pinv(&t)
                .ok_or_else(|| Error::Precondition(format!("tangent vectors of `{name}` are dependent")))?
        };
        Ok(PhaseSpace { name, base, tangent, t, t_pinv })
    }

    /// `g_{<=0} × g_{>=-1} + (e, 0)`.
    pub fn two_toda(spec: &AlgebraSpec) -> Self {
        let d = spec.dim();
        let mut tangent = vec![];
        for a in spec.indices_in(Region::AtMost(0)) {
            tangent.push(PairPoint::new(spec.basis_element(a), Element::zeros(d)));
        }
        for a in spec.indices_in(Region::AtLeast(-1)) {
            tangent.push(PairPoint::new(Element::zeros(d), spec.basis_element(a)));
        }
        let base = PairPoint::new(spec.e().clone(), Element::zeros(d));
        PhaseSpace::new("T_P", base, tangent).expect("coordinate tangent vectors are independent")
    }

    /// `Δ(g_{-1} ⊕ g_0) + (e, e)`.
    pub fn toda_diagonal(spec: &AlgebraSpec) -> Self {
        let tangent = (0..spec.dim())
            .filter(|&a| matches!(spec.degrees()[a], -1 | 0))
            .map(|a| PairPoint::diagonal(spec.basis_element(a)))
            .collect();
        PhaseSpace::new("T_T'", PairPoint::diagonal(spec.e().clone()), tangent)
            .expect("diagonal tangent vectors are independent")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    pub fn base(&self) -> &PairPoint {
        &self.base
    }

    pub fn tangent(&self) -> &[PairPoint] {
        &self.tangent
    }

    /// Tangent vectors as the columns of a `2·dim × k` matrix.
    pub fn tangent_matrix(&self) -> &DMatrix<f64> {
        &self.t
    }

    pub fn point(&self, coords: &DVector<f64>) -> PairPoint {
        assert_eq!(coords.len(), self.dim(), "wrong number of phase-space coordinates");
        PairPoint::from_flat(&(self.base.flat() + &self.t * coords))
    }

    pub fn coordinates(&self, m: &PairPoint) -> DVector<f64> {
        &self.t_pinv * (m.flat() - self.base.flat())
    }

    /// Largest coordinate of the component of `v` normal to the tangent space.
    pub fn normal_component(&self, v: &PairPoint) -> f64 {
        let f = v.flat();
        (&f - &self.t * (&self.t_pinv * &f)).amax()
    }

    /// Distance of `m` from the subspace, as the largest normal coordinate.
    pub fn residual(&self, m: &PairPoint) -> f64 {
        self.normal_component(&(m - &self.base))
    }

    pub fn contains(&self, m: &PairPoint, tol: f64) -> bool {
        self.residual(m) < tol
    }

    pub fn require(&self, m: &PairPoint) -> Result<()> {
        let residual = self.residual(m);
        if residual < MEMBERSHIP_TOL {
            Ok(())
        } else {
            Err(Error::OffSpace { space: self.name.clone(), residual })
        }
    }

    /// Point with coordinates uniform in `[-1, 1]`.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PairPoint {
        let c = DVector::from_fn(self.dim(), |_, _| rng.random_range(-1.0..=1.0));
        self.point(&c)
    }

    /// Gradient of the `a`-th coordinate, extended to `g × g` through the
    /// pseudo-inverse.
    pub fn coordinate_gradient(&self, spec: &AlgebraSpec, a: usize) -> PairPoint {
        lift_pair_covector(spec, &self.t_pinv.row(a).transpose())
    }

    pub fn coordinate_function(&self, spec: &AlgebraSpec, a: usize) -> ScalarFunction {
        let row = self.t_pinv.row(a).transpose();
        let offset = row.dot(&self.base.flat());
        let grad = lift_pair_covector(spec, &row);
        ScalarFunction::with_gradient(
            format!("z_{}", a + 1),
            move |m| row.dot(&m.flat()) - offset,
            move |_| grad.clone(),
        )
    }
}

/// Coordinate brackets on a phase space at one point.
#[derive(Debug, Clone)]
pub struct PoissonMatrixAt {
    pub point: PairPoint,
    pub matrix: DMatrix<f64>,
    pub kind: BracketKind,
}

impl PoissonMatrixAt {
    pub fn antisymmetry_defect(&self) -> f64 {
        linalg::max_abs(&(&self.matrix + self.matrix.transpose()))
    }

    pub fn rank(&self) -> usize {
        linalg::numerical_rank(&self.matrix)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankSweep {
    pub ranks: Vec<usize>,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MorphismReport {
    pub samples: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Test functions used by the ψ₁ morphism check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MorphismFunctions {
    /// `⟨a, ·⟩` with random `a`; analytic gradients.
    Linear,
    /// `Trace(a w²)` with random `a`; finite-difference gradients on both sides.
    TraceMonomial,
}

/// Poisson ℛ-brackets on `g × g` for a fixed algebra and ℛ.
#[derive(Debug, Clone)]
pub struct PoissonEngine {
    spec: Arc<AlgebraSpec>,
    rr: PairRMatrix,
    rr_matrix: DMatrix<f64>,
    rr_adjoint: DMatrix<f64>,
}

impl PoissonEngine {
    /// Splitting ℛ with `c = 1`.
    pub fn new(spec: Arc<AlgebraSpec>) -> Self {
        let rr = PairRMatrix::standard(&spec);
        Self::with_rmatrix(spec, rr)
    }

    pub fn with_rmatrix(spec: Arc<AlgebraSpec>, rr: PairRMatrix) -> Self {
        let d = spec.dim();
        let mut g2 = DMatrix::zeros(2 * d, 2 * d);
        g2.view_mut((0, 0), (d, d)).copy_from(spec.gram());
        g2.view_mut((d, d), (d, d)).copy_from(&(-spec.gram()));
        let mut g2_inv = DMatrix::zeros(2 * d, 2 * d);
        g2_inv.view_mut((0, 0), (d, d)).copy_from(spec.gram_inv());
        g2_inv.view_mut((d, d), (d, d)).copy_from(&(-spec.gram_inv()));
        let rr_matrix = rr.matrix();
        let rr_adjoint = g2_inv * rr_matrix.transpose() * g2;
        PoissonEngine { spec, rr, rr_matrix, rr_adjoint }
    }

    pub fn spec(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn rr(&self) -> &PairRMatrix {
        &self.rr
    }

    fn apply_rr(&self, p: &PairPoint) -> PairPoint {
        PairPoint::from_flat(&(&self.rr_matrix * p.flat()))
    }

    /// The `⟨·,·⟩₂`-adjoint `ℛ*`.
    pub fn apply_rr_adjoint(&self, p: &PairPoint) -> PairPoint {
        PairPoint::from_flat(&(&self.rr_adjoint * p.flat()))
    }

    /// Analytic gradient when available, central differences otherwise.
    pub fn gradient2(&self, f: &ScalarFunction, m: &PairPoint) -> PairPoint {
        f.analytic_gradient(m).unwrap_or_else(|| fd_gradient(&self.spec, f, m))
    }

    fn require_associative(&self) -> Result<()> {
        if self.spec.is_associative() {
            Ok(())
        } else {
            Err(Error::NotAssociative(self.spec.name().to_string()))
        }
    }

    /// `½⟨m, [ℛa, b] + [a, ℛb]⟩₂`.
    pub fn linear_from_grads(&self, m: &PairPoint, a: &PairPoint, b: &PairPoint) -> f64 {
        let s = &self.spec;
        let v = s.pair_bracket(&self.apply_rr(a), b) + s.pair_bracket(a, &self.apply_rr(b));
        0.5 * s.pair_form(m, &v)
    }

    /// `½⟨[m,a], ℛ(mb + bm)⟩₂ − ½⟨[m,b], ℛ(ma + am)⟩₂`.
    pub fn quadratic_from_grads(&self, m: &PairPoint, a: &PairPoint, b: &PairPoint) -> Result<f64> {
        self.require_associative()?;
        let s = &self.spec;
        let sym = |g: &PairPoint| -> Result<PairPoint> { Ok(s.pair_product(m, g)? + s.pair_product(g, m)?) };
        let first = s.pair_form(&s.pair_bracket(m, a), &self.apply_rr(&sym(b)?));
        let second = s.pair_form(&s.pair_bracket(m, b), &self.apply_rr(&sym(a)?));
        Ok(0.5 * (first - second))
    }

    pub fn bracket_from_grads(&self, kind: BracketKind, m: &PairPoint, a: &PairPoint, b: &PairPoint) -> Result<f64> {
        match kind {
            BracketKind::Linear => Ok(self.linear_from_grads(m, a, b)),
            BracketKind::Quadratic => self.quadratic_from_grads(m, a, b),
        }
    }

    pub fn linear_bracket(&self, f: &ScalarFunction, g: &ScalarFunction, m: &PairPoint) -> f64 {
        self.linear_from_grads(m, &self.gradient2(f, m), &self.gradient2(g, m))
    }

    pub fn quadratic_bracket(&self, f: &ScalarFunction, g: &ScalarFunction, m: &PairPoint) -> Result<f64> {
        self.require_associative()?;
        self.quadratic_from_grads(m, &self.gradient2(f, m), &self.gradient2(g, m))
    }

    pub fn bracket(&self, kind: BracketKind, f: &ScalarFunction, g: &ScalarFunction, m: &PairPoint) -> Result<f64> {
        match kind {
            BracketKind::Linear => Ok(self.linear_bracket(f, g, m)),
            BracketKind::Quadratic => self.quadratic_bracket(f, g, m),
        }
    }

    /// Matrix of `{z_a, z_b}(m)` over all `2·dim` coordinates of `g × g`.
    pub fn full_poisson_matrix(&self, m: &PairPoint, kind: BracketKind) -> Result<DMatrix<f64>> {
        let n = 2 * self.spec.dim();
        let grads: Vec<PairPoint> = (0..n)
            .map(|a| lift_pair_covector(&self.spec, &DVector::from_fn(n, |i, _| if i == a { 1.0 } else { 0.0 })))
            .collect();
        self.gram_of(&grads, m, kind)
    }

    fn gram_of(&self, grads: &[PairPoint], m: &PairPoint, kind: BracketKind) -> Result<DMatrix<f64>> {
        let k = grads.len();
        let mut p = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a + 1..k {
                let v = self.bracket_from_grads(kind, m, &grads[a], &grads[b])?;
                p[(a, b)] = v;
                p[(b, a)] = -v;
            }
        }
        Ok(p)
    }

    /// `X_F` through the coordinate Poisson matrix: `X = Π · Γ₂∇F`.
    pub fn hamiltonian_field(&self, f: &ScalarFunction, m: &PairPoint, kind: BracketKind) -> Result<PairPoint> {
        let grad = self.gradient2(f, m);
        self.field_via_matrix(&grad, m, kind)
    }

    pub fn field_via_matrix(&self, grad: &PairPoint, m: &PairPoint, kind: BracketKind) -> Result<PairPoint> {
        let p = self.full_poisson_matrix(m, kind)?;
        Ok(PairPoint::from_flat(&(p * lower_pair(&self.spec, grad))))
    }

    /// Closed-form field of a function with gradient `grad` at `m`:
    /// linear `½(ℛ*[∇F,m] + [ℛ∇F,m])`, quadratic
    /// `−½[m, ℛ(m∇F+∇Fm)] − ½(Vm + mV)` with `V = ℛ*[m,∇F]`.
    pub fn field_closed_form(&self, grad: &PairPoint, m: &PairPoint, kind: BracketKind) -> Result<PairPoint> {
        let s = &self.spec;
        match kind {
            BracketKind::Linear => {
                let v = self.apply_rr_adjoint(&s.pair_bracket(grad, m)) + s.pair_bracket(&self.apply_rr(grad), m);
                Ok(v * 0.5)
            }
            BracketKind::Quadratic => {
                self.require_associative()?;
                let w = self.apply_rr(&(s.pair_product(m, grad)? + s.pair_product(grad, m)?));
                let v = self.apply_rr_adjoint(&s.pair_bracket(m, grad));
                let sym = s.pair_product(&v, m)? + s.pair_product(m, &v)?;
                Ok((s.pair_bracket(m, &w) + sym) * -0.5)
            }
        }
    }

    /// Coordinate Poisson matrix on `ps` at `m`.
    pub fn poisson_matrix(&self, ps: &PhaseSpace, m: &PairPoint, kind: BracketKind) -> Result<PoissonMatrixAt> {
        ps.require(m)?;
        let grads: Vec<PairPoint> = (0..ps.dim()).map(|a| ps.coordinate_gradient(&self.spec, a)).collect();
        Ok(PoissonMatrixAt { point: m.clone(), matrix: self.gram_of(&grads, m, kind)?, kind })
    }

    pub fn rank_at(&self, ps: &PhaseSpace, m: &PairPoint, kind: BracketKind) -> Result<usize> {
        Ok(self.poisson_matrix(ps, m, kind)?.rank())
    }

    /// Ranks at `points` seeded random points of `ps`, and their maximum.
    pub fn rank_sweep(&self, ps: &PhaseSpace, kind: BracketKind, points: usize, seed: u64, exec: Exec) -> Result<RankSweep> {
        let ranks = exec
            .map(points, |i| {
                let m = ps.random_point(&mut rng_for(seed, i as u64));
                self.rank_at(ps, &m, kind)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let max = ranks.iter().copied().max().unwrap_or(0);
        Ok(RankSweep { ranks, max })
    }

    /// Largest normal component over the Hamiltonian fields of all
    /// coordinate functions of `g × g` at `m`. Zero when `ps` is a Poisson
    /// submanifold.
    pub fn submanifold_defect(&self, ps: &PhaseSpace, m: &PairPoint, kind: BracketKind) -> Result<f64> {
        let p = self.full_poisson_matrix(m, kind)?;
        Ok((0..p.ncols())
            .map(|b| ps.normal_component(&PairPoint::from_flat(&p.column(b).into_owned())))
            .fold(0.0, f64::max))
    }

    /// Compares `{F∘ψ₁, G∘ψ₁}_ℛ(x, y)` with the Lie–Poisson bracket
    /// `⟨w, [∇F, ∇G]⟩` at `w = x − y`.
    pub fn check_morphism_psi1(
        &self,
        functions: MorphismFunctions,
        samples: usize,
        seed: u64,
        tolerance: f64,
        exec: Exec,
    ) -> Result<MorphismReport> {
        if self.rr.c() != 1.0 {
            return Err(Error::Precondition(format!("ψ₁ is a Poisson morphism only for c = 1, got c = {}", self.rr.c())));
        }
        let s = &self.spec;
        let residual = |i: usize| -> f64 {
            let mut rng = rng_for(seed, i as u64);
            let (a, b) = (s.random_element(&mut rng), s.random_element(&mut rng));
            let m = s.random_pair(&mut rng);
            let w = &m.x - &m.y;
            match functions {
                MorphismFunctions::Linear => {
                    let lhs = self.linear_from_grads(&m, &PairPoint::diagonal(a.clone()), &PairPoint::diagonal(b.clone()));
                    (lhs - s.form(&w, &s.bracket(&a, &b))).abs()
                }
                MorphismFunctions::TraceMonomial => {
                    let fa = trace_monomial(s, &a);
                    let fb = trace_monomial(s, &b);
                    let pa = compose_psi1(fa.clone());
                    let pb = compose_psi1(fb.clone());
                    let lhs = self.linear_bracket(&pa, &pb, &m);
                    let (ga, gb) = (fd_gradient_g(s, &*fa, &w), fd_gradient_g(s, &*fb, &w));
                    (lhs - s.form(&w, &s.bracket(&ga, &gb))).abs()
                }
            }
        };
        let max_residual = exec.max(samples, residual);
        Ok(MorphismReport { samples, seed, max_residual, tolerance, pass: samples > 0 && max_residual < tolerance })
    }
}

type GFn = Arc<dyn Fn(&Element) -> f64 + Send + Sync>;

fn trace_monomial(spec: &AlgebraSpec, a: &Element) -> GFn {
    let am = spec.to_matrix(a);
    let spec = spec.clone();
    Arc::new(move |w: &Element| {
        let wm = spec.to_matrix(w);
        (&am * &wm * &wm).trace()
    })
}

fn compose_psi1(f: GFn) -> ScalarFunction {
    ScalarFunction::new("F∘ψ₁", move |m: &PairPoint| f(&(&m.x - &m.y)))
}

/// Central-difference form gradient of a function on `g`.
pub fn fd_gradient_g(spec: &AlgebraSpec, f: &dyn Fn(&Element) -> f64, x: &Element) -> Element {
    let c = DVector::from_fn(spec.dim(), |a, _| {
        let mut up = x.coords().clone();
        let mut down = up.clone();
        up[a] += FD_STEP;
        down[a] -= FD_STEP;
        (f(&Element::new(up)) - f(&Element::new(down))) / (2.0 * FD_STEP)
    });
    spec.lift_covector(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_gl, build_sl};

    fn engine(spec: AlgebraSpec) -> PoissonEngine {
        PoissonEngine::new(Arc::new(spec))
    }

    #[test]
    fn linear_function_gradients() {
        let gl3 = Arc::new(build_gl(3).unwrap());
        let eng = PoissonEngine::new(gl3.clone());
        let mut rng = rng_for(1, 0);
        let (a, b) = (gl3.random_element(&mut rng), gl3.random_element(&mut rng));
        let m = gl3.random_pair(&mut rng);
        let a2 = a.clone();
        let fx = ScalarFunction::new("<a,x>", {
            let s = gl3.clone();
            move |m: &PairPoint| s.form(&a2, &m.x)
        });
        let g = eng.gradient2(&fx, &m);
        assert!((g.x - &a).max_abs() < 1e-8 && g.y.max_abs() < 1e-8);
        let b2 = b.clone();
        let fy = ScalarFunction::new("<b,y>", {
            let s = gl3.clone();
            move |m: &PairPoint| s.form(&b2, &m.y)
        });
        let g = eng.gradient2(&fy, &m);
        assert!(g.x.max_abs() < 1e-8 && (g.y + &b).max_abs() < 1e-8);
    }

    #[test]
    fn energy_gradient_matches_finite_differences() {
        let gl3 = Arc::new(build_gl(3).unwrap());
        let s = gl3.clone();
        let h = ScalarFunction::with_gradient(
            "H",
            move |m: &PairPoint| 0.5 * s.form(&m.x, &m.x),
            |m: &PairPoint| PairPoint::new(m.x.clone(), Element::zeros(m.dim())),
        );
        let m = gl3.random_pair(&mut rng_for(2, 0));
        let fd = fd_gradient(&gl3, &h, &m);
        assert!((fd - h.analytic_gradient(&m).unwrap()).max_abs() < 1e-7);
    }

    #[test]
    fn covector_functions_have_dual_gradients() {
        let sl3 = build_sl(3).unwrap();
        let mut rng = rng_for(3, 0);
        let c = crate::sampling::uniform_vector(&mut rng, 16);
        let f = ScalarFunction::covector(&sl3, "c", c.clone());
        let m = sl3.random_pair(&mut rng);
        let v = sl3.random_pair(&mut rng);
        let g = f.analytic_gradient(&m).unwrap();
        assert!((sl3.pair_form(&g, &v) - c.dot(&v.flat())).abs() < 1e-12);
        assert!((lower_pair(&sl3, &g) - c).amax() < 1e-12);
    }

    #[test]
    fn brackets_are_antisymmetric() {
        let gl2 = Arc::new(build_gl(2).unwrap());
        let eng = PoissonEngine::new(gl2.clone());
        let mut rng = rng_for(4, 0);
        let m = gl2.random_pair(&mut rng);
        let (a, b) = (gl2.random_pair(&mut rng), gl2.random_pair(&mut rng));
        let l = eng.linear_from_grads(&m, &a, &b) + eng.linear_from_grads(&m, &b, &a);
        let q = eng.quadratic_from_grads(&m, &a, &b).unwrap() + eng.quadratic_from_grads(&m, &b, &a).unwrap();
        assert!(l.abs() < 1e-14 && q.abs() < 1e-14);
        assert_eq!(eng.linear_from_grads(&m, &a, &a), 0.0);
    }

    #[test]
    fn quadratic_bracket_needs_associativity() {
        let eng = engine(build_sl(2).unwrap());
        let f = ScalarFunction::constant("1", 1.0, 3);
        let m = PairPoint::zeros(3);
        assert!(matches!(eng.quadratic_bracket(&f, &f, &m), Err(Error::NotAssociative(_))));
        assert!(matches!(
            eng.hamiltonian_field(&f, &m, BracketKind::Quadratic),
            Err(Error::NotAssociative(_))
        ));
    }

    #[test]
    fn generic_and_closed_form_fields_agree() {
        for spec in [build_sl(3).unwrap(), build_gl(3).unwrap()] {
            let eng = engine(spec.clone());
            let mut rng = rng_for(5, 0);
            let m = spec.random_pair(&mut rng);
            let grad = spec.random_pair(&mut rng);
            let kinds: &[BracketKind] = if spec.is_associative() {
                &[BracketKind::Linear, BracketKind::Quadratic]
            } else {
                &[BracketKind::Linear]
            };
            for &kind in kinds {
                let a = eng.field_via_matrix(&grad, &m, kind).unwrap();
                let b = eng.field_closed_form(&grad, &m, kind).unwrap();
                assert!((a - b).max_abs() < 1e-11, "{kind}");
            }
        }
    }

    #[test]
    fn field_convention_is_bracket_with_k_first() {
        let gl2 = Arc::new(build_gl(2).unwrap());
        let eng = PoissonEngine::new(gl2.clone());
        let mut rng = rng_for(6, 0);
        let m = gl2.random_pair(&mut rng);
        let (a, b) = (gl2.random_pair(&mut rng), gl2.random_pair(&mut rng));
        let f = ScalarFunction::linear(gl2.clone(), "F", a.clone());
        let k = ScalarFunction::linear(gl2.clone(), "K", b.clone());
        for kind in [BracketKind::Linear, BracketKind::Quadratic] {
            let x = eng.hamiltonian_field(&f, &m, kind).unwrap();
            let lhs = gl2.pair_form(&b, &x);
            let rhs = eng.bracket(kind, &k, &f, &m).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn two_toda_space_shape() {
        let sl3 = build_sl(3).unwrap();
        let tp = PhaseSpace::two_toda(&sl3);
        assert_eq!(tp.dim(), sl3.dim() + 2 * sl3.rank());
        let gl3 = build_gl(3).unwrap();
        assert_eq!(PhaseSpace::two_toda(&gl3).dim(), 9 + 6 - 1);
        let mut rng = rng_for(7, 0);
        let m = tp.random_point(&mut rng);
        assert!(tp.contains(&m, 1e-12));
        assert!((tp.point(&tp.coordinates(&m)) - m.clone()).max_abs() < 1e-13);
        let off = &m + &PairPoint::new(sl3.zero(), sl3.basis_element(sl3.dim() - 1));
        assert!(matches!(tp.require(&off), Err(Error::OffSpace { .. })));
    }

    #[test]
    fn dependent_tangent_is_rejected() {
        let sl2 = build_sl(2).unwrap();
        let t = PairPoint::diagonal(sl2.e().clone());
        assert!(PhaseSpace::new("bad", PairPoint::zeros(3), vec![t.clone(), t * 2.0]).is_err());
    }

    #[test]
    fn sl2_rank_on_two_toda_space() {
        let sl2 = build_sl(2).unwrap();
        let eng = engine(sl2.clone());
        let tp = PhaseSpace::two_toda(&sl2);
        let sweep = eng.rank_sweep(&tp, BracketKind::Linear, 5, 1, Exec::Sequential).unwrap();
        assert_eq!(sweep.max, 4);
        let pm = eng.poisson_matrix(&tp, &tp.random_point(&mut rng_for(1, 9)), BracketKind::Linear).unwrap();
        assert!(pm.antisymmetry_defect() < 1e-12);
    }

    #[test]
    fn morphism_requires_c_one() {
        let sl2 = Arc::new(build_sl(2).unwrap());
        let rr = PairRMatrix::new(crate::rmatrix::RMatrix::standard(&sl2), 2.0);
        let eng = PoissonEngine::with_rmatrix(sl2, rr);
        assert!(matches!(
            eng.check_morphism_psi1(MorphismFunctions::Linear, 5, 1, 1e-9, Exec::Sequential),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn morphism_on_sl3() {
        let eng = engine(build_sl(3).unwrap());
        for f in [MorphismFunctions::Linear, MorphismFunctions::TraceMonomial] {
            let rep = eng.check_morphism_psi1(f, 20, 42, 1e-9, Exec::default()).unwrap();
            assert!(rep.pass, "{f:?}: {rep:?}");
        }
    }
}
