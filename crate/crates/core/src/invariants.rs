//! Trace invariants `P_i`, the pencil expansion giving the family `F_{j,i}`,
//! Raïs vectors and independence ranks.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{AlgebraSpec, Element, Region};
use crate::exec::Exec;
use crate::linalg;
use crate::pencil::PolyMatrix;
use crate::poisson::{lower_pair, PhaseSpace, PoissonEngine, ScalarFunction, BracketKind};
use crate::error::Result;
use crate::rmatrix::PairPoint;

/// One generator `P_i(x) = Trace(x^{m+1}) / (m+1)` of the invariant ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Generator {
    /// Index used in names such as `F_{j}_{i}`.
    pub label: usize,
    pub exponent: u32,
}

impl Generator {
    pub fn degree(&self) -> u32 {
        self.exponent + 1
    }
}

/// Generators from the exponents of `spec`. Labels start at 1, or at 0 when
/// the first exponent is 0 (the trace on `gl(n)`).
pub fn generators(spec: &AlgebraSpec) -> Vec<Generator> {
    let offset = usize::from(spec.exponents().first() != Some(&0));
    spec.exponents()
        .iter()
        .enumerate()
        .map(|(k, &m)| Generator { label: k + offset, exponent: m })
        .collect()
}

/// `P(x) = Trace(x^d) / d` on `g`, with form gradient `x^{d-1}` projected
/// onto `g`.
#[derive(Debug, Clone)]
pub struct TraceInvariant {
    spec: Arc<AlgebraSpec>,
    degree: u32,
}

impl TraceInvariant {
    /// `P_i` with degree `i + 1`.
    pub fn new(spec: Arc<AlgebraSpec>, i: u32) -> Self {
        TraceInvariant { spec, degree: i + 1 }
    }

    pub fn of_degree(spec: Arc<AlgebraSpec>, degree: u32) -> Self {
        assert!(degree >= 1, "trace invariants have degree >= 1");
        TraceInvariant { spec, degree }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    fn power(&self, x: &Element, e: u32) -> DMatrix<f64> {
        let xm = self.spec.to_matrix(x);
        let mut acc = DMatrix::identity(xm.nrows(), xm.nrows());
        for _ in 0..e {
            acc = &acc * &xm;
        }
        acc
    }

    pub fn value(&self, x: &Element) -> f64 {
        self.power(x, self.degree).trace() / self.degree as f64
    }

    pub fn gradient(&self, x: &Element) -> Element {
        self.spec.trace_dual(&self.power(x, self.degree - 1))
    }

    /// `(x, y) ↦ P(λx − y)` with gradient `(λd, d)`, `d = ∇P(λx − y)`.
    pub fn compose_pencil(&self, lambda: f64) -> ScalarFunction {
        let (p, q) = (self.clone(), self.clone());
        ScalarFunction::with_gradient(
            format!("P{}∘φ({lambda})", self.degree - 1),
            move |m| p.value(&(&m.x * lambda - &m.y)),
            move |m| {
                let d = q.gradient(&(&m.x * lambda - &m.y));
                PairPoint::new(&d * lambda, d)
            },
        )
    }
}

/// λ-coefficients of `P(λx − y)` and of its gradient at one point.
///
/// `raw[j]` is the coefficient of `λ^j`; the family members are the signed
/// values `F_j = (−1)^{d−j} raw[j]`, so that `F_0 = P(y)` and `F_d = P(x)`.
#[derive(Debug, Clone)]
pub struct PencilExpansion {
    pub label: usize,
    pub degree: u32,
    pub coeffs: Vec<f64>,
    pub grad_coeffs: Vec<PairPoint>,
    pub raw: Vec<f64>,
    pub raw_grads: Vec<PairPoint>,
}

impl PencilExpansion {
    pub fn sign(&self, j: usize) -> f64 {
        if (self.degree as usize - j).is_multiple_of(2) { 1.0 } else { -1.0 }
    }

    /// `Σ_j λ^j raw[j]`.
    pub fn value_at(&self, lambda: f64) -> f64 {
        self.raw.iter().rev().fold(0.0, |acc, c| acc * lambda + c)
    }
}

/// Expands `P(λx − y)` with `deg P = degree` by polynomial-matrix arithmetic.
pub fn expand_pencil(spec: &AlgebraSpec, label: usize, degree: u32, m: &PairPoint) -> PencilExpansion {
    let pencil = PolyMatrix::pencil(&spec.to_matrix(&m.x), &spec.to_matrix(&m.y));
    let lower = pencil.pow(degree - 1);
    let full = &lower * &pencil;
    let d = degree as usize;
    let raw: Vec<f64> = full.trace_coeffs().iter().map(|t| t / degree as f64).collect();
    let duals: Vec<Element> = lower.coeffs().iter().map(|s| spec.trace_dual(s)).collect();
    let raw_grads: Vec<PairPoint> = (0..=d)
        .map(|j| {
            let gx = if j > 0 { duals[j - 1].clone() } else { spec.zero() };
            let gy = duals.get(j).cloned().unwrap_or_else(|| spec.zero());
            PairPoint::new(gx, gy)
        })
        .collect();
    let mut out = PencilExpansion { label, degree, coeffs: vec![], grad_coeffs: vec![], raw, raw_grads };
    out.coeffs = (0..=d).map(|j| out.sign(j) * out.raw[j]).collect();
    out.grad_coeffs = (0..=d).map(|j| &out.raw_grads[j] * out.sign(j)).collect();
    out
}

/// One member `F_{j,i}` of the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyIndex {
    pub generator: Generator,
    pub j: usize,
}

impl FamilyIndex {
    pub fn name(&self) -> String {
        format!("F_{}_{}", self.j, self.generator.label)
    }
}

/// The family `F_{j,i}`, `0 <= j <= m_i + 1`, over all generators.
#[derive(Debug, Clone)]
pub struct Family {
    spec: Arc<AlgebraSpec>,
    members: Vec<FamilyIndex>,
}

/// Values and gradients of every family member at one point.
#[derive(Debug, Clone)]
pub struct FamilyAt {
    pub values: Vec<f64>,
    pub grads: Vec<PairPoint>,
}

impl Family {
    pub fn new(spec: Arc<AlgebraSpec>) -> Self {
        let members = generators(&spec)
            .into_iter()
            .flat_map(|g| (0..=g.degree() as usize).map(move |j| FamilyIndex { generator: g, j }))
            .collect();
        Family { spec, members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[FamilyIndex] {
        &self.members
    }

    pub fn names(&self) -> Vec<String> {
        self.members.iter().map(FamilyIndex::name).collect()
    }

    pub fn at(&self, m: &PairPoint) -> FamilyAt {
        let (mut values, mut grads) = (vec![], vec![]);
        for g in generators(&self.spec) {
            let e = expand_pencil(&self.spec, g.label, g.degree(), m);
            values.extend(e.coeffs);
            grads.extend(e.grad_coeffs);
        }
        FamilyAt { values, grads }
    }

    pub fn functions(&self) -> Vec<ScalarFunction> {
        self.members
            .iter()
            .map(|&idx| {
                let (s1, s2) = (self.spec.clone(), self.spec.clone());
                let g = idx.generator;
                ScalarFunction::with_gradient(
                    idx.name(),
                    move |m| expand_pencil(&s1, g.label, g.degree(), m).coeffs[idx.j],
                    move |m| expand_pencil(&s2, g.label, g.degree(), m).grad_coeffs[idx.j].clone(),
                )
            })
            .collect()
    }
}

/// The family as a list of functions with analytic gradients.
pub fn family(spec: Arc<AlgebraSpec>) -> Vec<ScalarFunction> {
    Family::new(spec).functions()
}

/// `Σ_i (m_i + 2)`.
pub fn family_cardinality(spec: &AlgebraSpec) -> usize {
    spec.exponents().iter().map(|&m| m as usize + 2).sum()
}

#[derive(Debug, Clone)]
pub struct RaisVector {
    pub label: usize,
    pub k: usize,
    pub vector: Element,
    /// The common degree when the vector is homogeneous.
    pub degree: Option<i32>,
}

#[derive(Debug, Clone)]
pub struct RaisData {
    pub vectors: Vec<RaisVector>,
    pub rank: usize,
    /// Largest `g_{<0}` coordinate over all vectors.
    pub negative_part: f64,
    /// Number of vectors of each degree, ascending by degree.
    pub degree_profile: Vec<(i32, usize)>,
}

impl RaisData {
    pub fn expected_count(spec: &AlgebraSpec) -> usize {
        (spec.dim() + spec.rank()) / 2
    }
}

/// `V_{k,i} = k! · ∂_x F_{k+1,i}(e, h)` for `0 <= k <= m_i`.
pub fn rais_vectors(spec: &AlgebraSpec) -> RaisData {
    let m = PairPoint::new(spec.e().clone(), spec.h().clone());
    let mut vectors = vec![];
    for g in generators(spec) {
        let e = expand_pencil(spec, g.label, g.degree(), &m);
        let mut fact = 1.0;
        for k in 0..=g.exponent as usize {
            if k > 0 {
                fact *= k as f64;
            }
            let v = &e.grad_coeffs[k + 1].x * fact;
            vectors.push(RaisVector { label: g.label, k, degree: homogeneous_degree(spec, &v), vector: v });
        }
    }
    let cols: Vec<_> = vectors.iter().map(|v| v.vector.coords().clone()).collect();
    let rank = if cols.is_empty() { 0 } else { linalg::numerical_rank(&DMatrix::from_columns(&cols)) };
    let negative_part = vectors
        .iter()
        .map(|v| spec.project(&v.vector, Region::MINUS).max_abs())
        .fold(0.0, f64::max);
    let mut degree_profile: Vec<(i32, usize)> = vec![];
    let mut degs: Vec<i32> = vectors.iter().filter_map(|v| v.degree).collect();
    degs.sort_unstable();
    for d in degs {
        match degree_profile.last_mut() {
            Some((last, n)) if *last == d => *n += 1,
            _ => degree_profile.push((d, 1)),
        }
    }
    RaisData { vectors, rank, negative_part, degree_profile }
}

fn homogeneous_degree(spec: &AlgebraSpec, v: &Element) -> Option<i32> {
    let scale = v.max_abs();
    if scale == 0.0 {
        return None;
    }
    let mut found = None;
    for (k, &d) in spec.degrees().iter().enumerate() {
        if v.coords()[k].abs() > 1e-10 * scale {
            match found {
                None => found = Some(d),
                Some(prev) if prev != d => return None,
                _ => {}
            }
        }
    }
    found
}

/// Jacobian rank of `grads` restricted to the tangent space of `ps`.
pub fn jacobian_rank(spec: &AlgebraSpec, grads: &[PairPoint], ps: &PhaseSpace) -> usize {
    if grads.is_empty() || ps.dim() == 0 {
        return 0;
    }
    let rows: Vec<_> = grads.iter().map(|g| lower_pair(spec, g).transpose() * ps.tangent_matrix()).collect();
    linalg::numerical_rank(&DMatrix::from_rows(&rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndependenceReport {
    pub ranks: Vec<usize>,
    pub max: usize,
    pub cardinality: usize,
}

impl IndependenceReport {
    pub fn independent(&self) -> bool {
        self.max == self.cardinality
    }
}

/// Maximum Jacobian rank of `functions` on `ps` over `points`.
pub fn independence_rank(
    spec: &AlgebraSpec,
    functions: &[ScalarFunction],
    ps: &PhaseSpace,
    points: &[PairPoint],
    engine: &PoissonEngine,
    exec: Exec,
) -> IndependenceReport {
    let ranks = exec.map(points.len(), |p| {
        let grads: Vec<PairPoint> = functions.iter().map(|f| engine.gradient2(f, &points[p])).collect();
        jacobian_rank(spec, &grads, ps)
    });
    let max = ranks.iter().copied().max().unwrap_or(0);
    IndependenceReport { ranks, max, cardinality: functions.len() }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvolutivityReport {
    pub points: usize,
    pub pairs: usize,
    /// Largest `|{F_a, F_b}|`.
    pub max_abs: f64,
    /// Largest `|{F_a, F_b}| / (1 + |F_a||F_b|)`.
    pub max_scaled: f64,
}

/// All pairwise brackets of the family at `points`.
pub fn involutivity(
    engine: &PoissonEngine,
    family: &Family,
    kind: BracketKind,
    points: &[PairPoint],
    exec: Exec,
) -> Result<InvolutivityReport> {
    let per_point = exec
        .map(points.len(), |p| -> Result<(f64, f64)> {
            let m = &points[p];
            let at = family.at(m);
            let (mut worst, mut scaled) = (0.0f64, 0.0f64);
            for a in 0..at.grads.len() {
                for b in a + 1..at.grads.len() {
                    let v = engine.bracket_from_grads(kind, m, &at.grads[a], &at.grads[b])?.abs();
                    worst = crate::exec::nan_max(worst, v);
                    scaled = crate::exec::nan_max(scaled, v / (1.0 + (at.values[a] * at.values[b]).abs()));
                }
            }
            Ok((worst, scaled))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let n = family.len();
    Ok(InvolutivityReport {
        points: points.len(),
        pairs: n * n.saturating_sub(1) / 2,
        max_abs: per_point.iter().map(|r| r.0).fold(0.0, crate::exec::nan_max),
        max_scaled: per_point.iter().map(|r| r.1).fold(0.0, crate::exec::nan_max),
    })
}
