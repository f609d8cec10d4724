//! The verification suite: one function per claim family, each returning
//! report records with deterministic content for a given configuration.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::algebra::AlgebraSpec;
use crate::error::{Error, Result};
use crate::exec::{nan_max, Exec};
use crate::flows::{self, field_linear, field_quadratic, field_t, field_toda, FieldKind, FlowConfig};
use crate::invariants::{
    expand_pencil, generators, independence_rank, involutivity as family_involutivity, rais_vectors, Family, RaisData,
    TraceInvariant,
};
use crate::poisson::{
    lift_pair_covector, lower_pair, BracketKind, MorphismFunctions, PhaseSpace, PoissonEngine, RANK_POINTS,
};
use crate::report::{CheckReport, ReportContext};
use crate::rmatrix::{check_mcybe, McybeTarget, PairPoint, PairRMatrix, RMatrix, MCYBE_TOL};
use crate::sampling::{rng_for, DEFAULT_SEED};
use crate::toda;

pub const DEFAULT_SAMPLES: usize = 20;
pub const JACOBI_TOL: f64 = 1e-9;
pub const INVOLUTIVITY_TOL: f64 = 1e-8;
pub const CASIMIR_TOL: f64 = 1e-9;
pub const MORPHISM_TOL: f64 = 1e-9;
pub const FIELD_TOL: f64 = 1e-9;
pub const RAIS_TOL: f64 = 1e-12;
pub const DRIFT_TOL: f64 = 1e-6;
pub const TANGENCY_TOL: f64 = 1e-7;
pub const TODA_CONSISTENCY_TOL: f64 = 1e-10;
/// Trajectories per flow check.
pub const FLOW_POINTS: usize = 10;
/// Points for the `T_T' = T_P ∩ Δ` membership comparison.
pub const MEMBERSHIP_POINTS: usize = 200;
/// Pencil parameters for the field identities.
pub const FIELD_LAMBDAS: [f64; 3] = [0.0, 2.0, -1.0];
/// Pencil parameters for the spectral drift.
pub const SPECTRAL_LAMBDAS: [f64; 3] = [0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub seed: u64,
    pub samples: usize,
    /// Replaces the default tolerance of every residual check.
    pub tol: Option<f64>,
    pub exec: Exec,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: DEFAULT_SEED, samples: DEFAULT_SAMPLES, tol: None, exec: Exec::default() }
    }
}

impl CheckConfig {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn ctx(&self, spec: &AlgebraSpec) -> ReportContext {
        ReportContext { algebra: spec.name().to_string(), samples: self.samples, seed: self.seed }
    }

    fn ctx_with(&self, spec: &AlgebraSpec, samples: usize) -> ReportContext {
        ReportContext { samples, ..self.ctx(spec) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckId {
    Mcybe,
    Jacobi,
    Involutivity,
    Casimir,
    Morphism,
    Independence,
    Rank,
    Rais,
    QuadraticRelations,
    Toda,
    Flows,
    All,
}

impl CheckId {
    pub const EACH: [CheckId; 11] = [
        CheckId::Mcybe,
        CheckId::Jacobi,
        CheckId::Involutivity,
        CheckId::Casimir,
        CheckId::Morphism,
        CheckId::Independence,
        CheckId::Rank,
        CheckId::Rais,
        CheckId::QuadraticRelations,
        CheckId::Toda,
        CheckId::Flows,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Mcybe => "mcybe",
            CheckId::Jacobi => "jacobi",
            CheckId::Involutivity => "involutivity",
            CheckId::Casimir => "casimir",
            CheckId::Morphism => "morphism",
            CheckId::Independence => "independence",
            CheckId::Rank => "rank",
            CheckId::Rais => "rais",
            CheckId::QuadraticRelations => "quadratic-relations",
            CheckId::Toda => "toda",
            CheckId::Flows => "flows",
            CheckId::All => "all",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckId::EACH
            .iter()
            .chain(&[CheckId::All])
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| Error::Parse(format!("unknown check `{s}`")))
    }
}

/// Runs one check family (or all of them, in a fixed order).
pub fn run(id: CheckId, spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    match id {
        CheckId::Mcybe => mcybe(spec, cfg),
        CheckId::Jacobi => jacobi(spec, cfg),
        CheckId::Involutivity => involutivity(spec, cfg),
        CheckId::Casimir => casimir(spec, cfg),
        CheckId::Morphism => morphism(spec, cfg),
        CheckId::Independence => independence(spec, cfg),
        CheckId::Rank => rank(spec, cfg),
        CheckId::Rais => rais(spec, cfg),
        CheckId::QuadraticRelations => quadratic_relations(spec, cfg),
        CheckId::Toda => toda_checks(spec, cfg),
        CheckId::Flows => flow_checks(spec, cfg),
        CheckId::All => {
            let mut out = vec![];
            for id in CheckId::EACH {
                out.extend(run(id, spec, cfg)?);
            }
            Ok(out)
        }
    }
}

fn kinds(spec: &AlgebraSpec) -> Vec<BracketKind> {
    if spec.is_associative() {
        vec![BracketKind::Linear, BracketKind::Quadratic]
    } else {
        vec![BracketKind::Linear]
    }
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, nan_max)
}

fn collect_max(v: Vec<Result<f64>>) -> Result<f64> {
    Ok(max_of(v.into_iter().collect::<Result<Vec<_>>>()?))
}

pub fn mcybe(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(MCYBE_TOL);
    let ctx = cfg.ctx(spec);
    let r = RMatrix::standard(spec);
    let rr = PairRMatrix::standard(spec);
    let a = check_mcybe(spec, McybeTarget::Algebra(&r), 1.0, cfg.samples, cfg.seed, tol, cfg.exec);
    let p = check_mcybe(spec, McybeTarget::Pair(&rr), 1.0, cfg.samples, cfg.seed, tol, cfg.exec);
    Ok(vec![
        ctx.residual(
            "mcybe.splitting",
            "R = P+ - P- solves the modified Yang-Baxter equation with c = 1",
            None,
            a.max_residual,
            tol,
            "residual modulo the center",
        ),
        ctx.residual(
            "mcybe.pair",
            "the induced R-matrix on g x g solves the modified Yang-Baxter equation with c = 1",
            None,
            p.max_residual,
            tol,
            "residual modulo the center",
        ),
    ])
}

/// Cyclic sum of brackets of random linear functions. The linear bracket of
/// two linear functions is linear with an explicit gradient; the quadratic
/// one is a homogeneous quadratic, differentiated exactly by polarization.
pub fn jacobi(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(JACOBI_TOL);
    let ctx = cfg.ctx(spec);
    let engine = Arc::new(PoissonEngine::new(spec.clone()));
    let mut out = vec![];
    for kind in kinds(spec) {
        let worst = collect_max(cfg.exec.map(cfg.samples, |i| -> Result<f64> {
            let mut rng = rng_for(cfg.seed, i as u64);
            let g: Vec<PairPoint> = (0..3).map(|_| spec.random_pair(&mut rng)).collect();
            let m = spec.random_pair(&mut rng);
            let mut sum = 0.0;
            for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
                sum += match kind {
                    BracketKind::Linear => {
                        let v = (spec.pair_bracket(&engine.rr().apply(&g[a]), &g[b])
                            + spec.pair_bracket(&g[a], &engine.rr().apply(&g[b])))
                            * 0.5;
                        engine.linear_from_grads(&m, &v, &g[c])
                    }
                    BracketKind::Quadratic => {
                        // The inner bracket is a homogeneous quadratic in m, so a
                        // unit-step central difference is its exact derivative.
                        let flat = m.flat();
                        let mut cov = DVector::zeros(flat.len());
                        for k in 0..flat.len() {
                            let (mut up, mut down) = (flat.clone(), flat.clone());
                            up[k] += 1.0;
                            down[k] -= 1.0;
                            cov[k] = 0.5
                                * (engine.quadratic_from_grads(&PairPoint::from_flat(&up), &g[a], &g[b])?
                                    - engine.quadratic_from_grads(&PairPoint::from_flat(&down), &g[a], &g[b])?);
                        }
                        let grad = lift_pair_covector(spec, &cov);
                        engine.quadratic_from_grads(&m, &grad, &g[c])?
                    }
                };
            }
            Ok(sum.abs())
        }))?;
        out.push(ctx.residual(
            "jacobi",
            "the R-bracket on g x g satisfies the Jacobi identity",
            Some(kind),
            worst,
            tol,
            "random linear functions",
        ));
    }
    Ok(out)
}

pub fn involutivity(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(INVOLUTIVITY_TOL);
    let ctx = cfg.ctx(spec);
    let engine = PoissonEngine::new(spec.clone());
    let family = Family::new(spec.clone());
    let tp = PhaseSpace::two_toda(spec);
    let points: Vec<PairPoint> = (0..cfg.samples).map(|i| tp.random_point(&mut rng_for(cfg.seed, i as u64))).collect();
    let mut out = vec![];
    for kind in kinds(spec) {
        let r = family_involutivity(&engine, &family, kind, &points, cfg.exec)?;
        out.push(ctx.residual(
            "involutivity",
            "the family F_{j,i} is involutive on the 2-Toda phase space",
            Some(kind),
            r.max_abs,
            tol,
            format!("{} functions, {} pairs", family.len(), r.pairs),
        ));
    }
    Ok(out)
}

pub fn casimir(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(CASIMIR_TOL);
    let ctx = cfg.ctx(spec);
    let engine = PoissonEngine::new(spec.clone());
    let mut out = vec![];
    for g in generators(spec) {
        let f = TraceInvariant::of_degree(spec.clone(), g.degree()).compose_pencil(1.0);
        let worst = collect_max(cfg.exec.map(cfg.samples, |i| -> Result<f64> {
            let m = spec.random_pair(&mut rng_for(cfg.seed, i as u64));
            Ok(engine.hamiltonian_field(&f, &m, BracketKind::Linear)?.max_abs())
        }))?;
        out.push(ctx.residual(
            "casimir",
            "P_i(x - y) is a Casimir of the linear R-bracket",
            Some(BracketKind::Linear),
            worst,
            tol,
            format!("generator {} (degree {}), sup norm of the field", g.label, g.degree()),
        ));
    }
    Ok(out)
}

pub fn morphism(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(MORPHISM_TOL);
    let ctx = cfg.ctx(spec);
    let engine = PoissonEngine::new(spec.clone());
    let mut out = vec![];
    for (functions, what) in [
        (MorphismFunctions::Linear, "linear functions"),
        (MorphismFunctions::TraceMonomial, "trace monomials, finite-difference gradients"),
    ] {
        let r = engine.check_morphism_psi1(functions, cfg.samples, cfg.seed, tol, cfg.exec)?;
        out.push(ctx.residual(
            "morphism",
            "(x, y) -> x - y is a Poisson map onto the Lie-Poisson structure",
            Some(BracketKind::Linear),
            r.max_residual,
            tol,
            what,
        ));
    }
    Ok(out)
}

/// `(dim g + 3·rank) / 2`: the size of the family.
pub fn expected_cardinality(spec: &AlgebraSpec) -> usize {
    (spec.dim() + 3 * spec.rank()) / 2
}

/// `dim g − rank + 2·(simple roots)`: `dim g + ℓ` for semisimple `g`,
/// `n² + n − 2` for `gl(n)`.
pub fn expected_rank(spec: &AlgebraSpec) -> usize {
    spec.dim() - spec.rank() + 2 * spec.simple_root_count()
}

pub fn independence(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let ctx = cfg.ctx(spec);
    let engine = PoissonEngine::new(spec.clone());
    let family = Family::new(spec.clone());
    let functions = family.functions();
    let tp = PhaseSpace::two_toda(spec);
    let card = expected_cardinality(spec);
    let eh = PairPoint::new(spec.e().clone(), spec.h().clone());
    let at_eh = independence_rank(spec, &functions, &tp, std::slice::from_ref(&eh), &engine, cfg.exec);
    let points: Vec<PairPoint> = (0..cfg.samples).map(|i| tp.random_point(&mut rng_for(cfg.seed, i as u64))).collect();
    let sweep = independence_rank(spec, &functions, &tp, &points, &engine, cfg.exec);
    let min = sweep.ranks.iter().copied().min().unwrap_or(0);
    Ok(vec![
        ctx.exact(
            "count",
            "the family has (dim g + 3 rank) / 2 members",
            None,
            family.len(),
            card,
            format!("sum over generators of (m_i + 2); exponents {:?}", spec.exponents()),
        ),
        cfg.ctx_with(spec, 1).exact(
            "independence.eh",
            "the family is independent at (e, h)",
            None,
            at_eh.max,
            card,
            format!("(e, h) lies on the phase space: residual {:.1e}", tp.residual(&eh)),
        ),
        ctx.exact(
            "independence",
            "the family is independent on the 2-Toda phase space",
            None,
            min,
            card,
            format!("minimum Jacobian rank over the points, maximum {}", sweep.max),
        ),
    ])
}

pub fn rank(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let ctx = cfg.ctx_with(spec, RANK_POINTS);
    let engine = PoissonEngine::new(spec.clone());
    let tp = PhaseSpace::two_toda(spec);
    let card = Family::new(spec.clone()).len();
    let mut out = vec![];
    for kind in kinds(spec) {
        let sweep = engine.rank_sweep(&tp, kind, RANK_POINTS, cfg.seed, cfg.exec)?;
        let odd = sweep.ranks.iter().filter(|r| *r % 2 == 1).count();
        let defect = max_of(
            (0..4)
                .map(|i| engine.submanifold_defect(&tp, &tp.random_point(&mut rng_for(cfg.seed, i)), kind))
                .collect::<Result<Vec<_>>>()?,
        );
        out.push(ctx.exact(
            "rank",
            "rank of the bracket restricted to the 2-Toda phase space is dim g - rank + 2 (simple roots)",
            Some(kind),
            sweep.max,
            expected_rank(spec),
            format!("max over points; {odd} odd ranks; tangency defect of the bracket {defect:.1e}"),
        ));
        out.push(ctx.exact(
            "rank.identity",
            "card F = dim T_P - rank / 2",
            Some(kind),
            tp.dim() - sweep.max / 2,
            card,
            format!("dim T_P = {}", tp.dim()),
        ));
    }
    Ok(out)
}

pub fn rais(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let ctx = cfg.ctx_with(spec, 1);
    let data = rais_vectors(spec);
    let count = RaisData::expected_count(spec);
    Ok(vec![
        ctx.exact(
            "rais.count",
            "there are (dim g + rank) / 2 Rais vectors",
            None,
            data.vectors.len(),
            count,
            "",
        ),
        ctx.exact(
            "rais.rank",
            "the Rais vectors are linearly independent",
            None,
            data.rank,
            count,
            format!("degree profile {:?}", data.degree_profile),
        ),
        ctx.residual(
            "rais.span",
            "the Rais vectors span a subspace of g_{>=0}",
            None,
            data.negative_part,
            cfg.tol(RAIS_TOL),
            "largest coordinate of degree < 0",
        ),
    ])
}

/// Coordinate Poisson matrix at `m` applied to gradients.
struct FieldMap {
    spec: Arc<AlgebraSpec>,
    matrix: DMatrix<f64>,
}

impl FieldMap {
    fn new(engine: &PoissonEngine, m: &PairPoint, kind: BracketKind) -> Result<Self> {
        Ok(FieldMap { spec: engine.spec().clone(), matrix: engine.full_poisson_matrix(m, kind)? })
    }

    fn field(&self, grad: &PairPoint) -> PairPoint {
        let v: DVector<f64> = &self.matrix * lower_pair(&self.spec, grad);
        PairPoint::from_flat(&v)
    }
}

/// Closed-form fields against the generic construction, and the relations
/// between quadratic and linear fields of the pencil invariants.
pub fn quadratic_relations(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let tol = cfg.tol(FIELD_TOL);
    let ctx = cfg.ctx(spec);
    let engine = PoissonEngine::new(spec.clone());
    let tp = PhaseSpace::two_toda(spec);
    let family = Family::new(spec.clone());
    let assoc = spec.is_associative();
    let gens = generators(spec);

    // Per point: [t-field, s-field, closed linear, closed quadratic,
    // pencil linear, pencil quadratic, relquad, relquad opposite sign,
    // lines 1..3, lines 2..3 with the opposite sign].
    let rows = cfg.exec.map(cfg.samples, |s| -> Result<[f64; 13]> {
        let m = tp.random_point(&mut rng_for(cfg.seed, s as u64));
        let lin = FieldMap::new(&engine, &m, BracketKind::Linear)?;
        let quad = if assoc { Some(FieldMap::new(&engine, &m, BracketKind::Quadratic)?) } else { None };
        let mut r = [0.0f64; 13];
        // H = ½⟨x,x⟩ has ⟨·,·⟩₂-gradient (x, 0); ½⟨y,y⟩ has (0, −y).
        r[0] = (lin.field(&PairPoint::new(m.x.clone(), spec.zero())) - field_t(spec, &m)).max_abs();
        let s_field = flows::field_s(spec, &m);
        r[1] = (lin.field(&PairPoint::new(spec.zero(), m.y.clone())) - s_field).max_abs();
        let at = family.at(&m);
        for g in &at.grads {
            r[2] = nan_max(r[2], (lin.field(g) - engine.field_closed_form(g, &m, BracketKind::Linear)?).max_abs());
            if let Some(q) = &quad {
                r[3] = nan_max(r[3], (q.field(g) - engine.field_closed_form(g, &m, BracketKind::Quadratic)?).max_abs());
            }
        }
        for g in &gens {
            let i = g.exponent;
            for lambda in FIELD_LAMBDAS {
                let p = TraceInvariant::of_degree(spec.clone(), g.degree()).compose_pencil(lambda);
                let grad = engine.gradient2(&p, &m);
                r[4] = nan_max(r[4], (lin.field(&grad) - field_linear(spec, i, lambda, &m)).max_abs());
                if let Some(q) = &quad {
                    let xq = q.field(&grad);
                    r[5] = nan_max(r[5], (xq.clone() - field_quadratic(spec, i, lambda, &m)?).max_abs());
                    let next = TraceInvariant::of_degree(spec.clone(), g.degree() + 1).compose_pencil(lambda);
                    let xl = lin.field(&engine.gradient2(&next, &m));
                    let k = 2.0 / (1.0 - lambda);
                    r[6] = nan_max(r[6], (xq.clone() - xl.clone() * k).max_abs());
                    r[7] = nan_max(r[7], (xq + xl * k).max_abs());
                }
            }
            if let Some(q) = &quad {
                let d = g.degree();
                let cur = expand_pencil(spec, g.label, d, &m);
                let nxt = expand_pencil(spec, g.label + 1, d + 1, &m);
                let xq = |j: usize| q.field(&cur.grad_coeffs[j]);
                let xl = |j: usize| lin.field(&nxt.grad_coeffs[j]);
                let last = d as usize;
                r[8] = nan_max(r[8], (xq(0) - xl(0) * 2.0).max_abs());
                for j in 1..=last {
                    r[9] = nan_max(r[9], (xq(j) - xq(j - 1) - xl(j) * 2.0).max_abs());
                    r[11] = nan_max(r[11], (xq(j) + xq(j - 1) - xl(j) * 2.0).max_abs());
                }
                r[10] = nan_max(r[10], (xq(last) + xl(last + 1) * 2.0).max_abs());
                r[12] = nan_max(r[12], (xq(last) - xl(last + 1) * 2.0).max_abs());
            }
        }
        Ok(r)
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |k: usize| max_of(rows.iter().map(|r| r[k]));
    let lin = Some(BracketKind::Linear);
    let q = Some(BracketKind::Quadratic);
    let mut out = vec![
        ctx.residual(
            "field.t",
            "the Hamiltonian field of (1/2)<x, x> is the t-Lax equation [(L+, L+), (L, M)]",
            lin,
            col(0),
            tol,
            "",
        ),
        ctx.residual(
            "field.s",
            "the s-Lax equation [(M-, M-), (L, M)] is the Hamiltonian field of -(1/2)<y, y>",
            lin,
            col(1),
            tol,
            "the pair-form gradient of (1/2)<y, y> is (0, -y)",
        ),
        ctx.residual(
            "field.closed-form",
            "closed-form Hamiltonian fields agree with the coordinate Poisson matrix",
            lin,
            col(2),
            tol,
            "all family members",
        ),
        ctx.residual(
            "field.pencil",
            "Hamiltonian field of P_i(lambda x - y): (1-lambda)/2 [(x, y), ((R-I)d, (R+I)d)]",
            lin,
            col(4),
            tol,
            "lambda in {0, 2, -1}",
        ),
    ];
    if assoc {
        out.extend([
            ctx.residual(
                "field.closed-form",
                "closed-form Hamiltonian fields agree with the coordinate Poisson matrix",
                q,
                col(3),
                tol,
                "all family members",
            ),
            ctx.residual(
                "field.pencil",
                "quadratic field of P_i(lambda x - y): -[(x, y), ((R-I)D^(i+1), (R+I)D^(i+1))]",
                q,
                col(5),
                tol,
                "lambda in {0, 2, -1}",
            ),
            ctx.residual(
                "relquad",
                "X^Q of P_i(lambda x - y) = 2/(1-lambda) X of P_(i+1)(lambda x - y)",
                q,
                col(6),
                tol,
                format!("with the factor 2/(lambda-1) instead: {:.1e}", col(7)),
            ),
            ctx.residual(
                "relquadline.1",
                "X^Q_{F_{0,i}} = 2 X_{F_{0,i+1}}",
                q,
                col(8),
                tol,
                "signed coefficients F_{j,i}",
            ),
            ctx.residual(
                "relquadline.2",
                "X^Q_{F_{j,i}} - X^Q_{F_{j-1,i}} = 2 X_{F_{j,i+1}}",
                q,
                col(9),
                tol,
                format!("with X^Q_{{F_{{j,i}}}} + X^Q_{{F_{{j-1,i}}}} instead: {:.1e}", col(11)),
            ),
            ctx.residual(
                "relquadline.3",
                "X^Q_{F_{i+1,i}} = -2 X_{F_{i+2,i+1}}",
                q,
                col(10),
                tol,
                format!("with the factor +2 instead: {:.1e}", col(12)),
            ),
        ]);
    }
    Ok(out)
}

pub fn toda_checks(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let ctx = cfg.ctx(spec);
    let iso = toda::check_poisson_iso(spec, cfg.samples, cfg.seed, cfg.exec)?;
    let bin = toda::check_binomial_identity(spec, cfg.samples, cfg.seed, cfg.exec)?;
    let suite = toda::toda_suite(spec, cfg.samples, cfg.seed, cfg.exec)?;
    let disagreements = toda::diagonal_membership_disagreements(spec, MEMBERSHIP_POINTS, cfg.seed);

    // Diagonal consistency: the t-field on (x, x) is (X, X) with X the Toda
    // field, and the t-flow stays on the diagonal.
    let space = toda::TodaSpace::new(spec);
    let diag = PhaseSpace::toda_diagonal(spec);
    let consistency = max_of(cfg.exec.map(cfg.samples, |i| {
        let x = space.random_point(&mut rng_for(cfg.seed, i as u64));
        (field_t(spec, &PairPoint::diagonal(x.clone())) - PairPoint::diagonal(field_toda(spec, &x))).max_abs()
    }));
    let x0 = space.random_point(&mut rng_for(cfg.seed, 0));
    let traj = flows::integrate(spec.clone(), &FlowConfig::new(FieldKind::T), &PairPoint::diagonal(x0))?;
    let off_diagonal = traj.tangency_drift(&diag);

    let tol = |d: f64| cfg.tol(d);
    let mut out = vec![
        ctx.residual(
            "toda.iso",
            "x -> (x, x) is a Poisson isomorphism from the Toda phase space onto the diagonal",
            Some(BracketKind::Linear),
            iso.max_residual,
            tol(toda::ISO_TOL),
            "dual coordinates of matched tangent bases",
        ),
        ctx.residual(
            "toda.binomial",
            "F_{k,i}(x, x) = C(m_i + 1, k) P_i(x)",
            None,
            bin.max_residual,
            tol(toda::BINOMIAL_TOL),
            "",
        ),
        ctx.residual(
            "toda.submanifold",
            "e + g_-1 + g_0 is a Poisson submanifold of (g, R-bracket)",
            Some(BracketKind::Linear),
            suite.submanifold_defect,
            tol(toda::TODA_SUITE_TOL),
            "",
        ),
        ctx.residual(
            "toda.hamiltonian",
            "the Hamiltonian field of (1/2)<x, x> is the Toda equation [A+, A]",
            Some(BracketKind::Linear),
            suite.hamiltonian_residual,
            tol(toda::TODA_SUITE_TOL),
            "",
        ),
        ctx.residual(
            "toda.involutivity",
            "the invariants P_i are in involution for the R-bracket",
            Some(BracketKind::Linear),
            suite.involutivity,
            tol(toda::TODA_SUITE_TOL),
            "",
        ),
        ctx.exact(
            "toda.independence",
            "the invariants P_i are independent on the Toda phase space",
            None,
            suite.differential_rank,
            suite.generators,
            "",
        ),
        ctx.residual(
            "toda.conservation",
            "the P_i are conserved along the Toda flow",
            None,
            suite.conservation_drift,
            tol(toda::TODA_DRIFT_TOL),
            "RK4 dt 1e-3 to T = 1, relative drift",
        ),
        cfg.ctx_with(spec, MEMBERSHIP_POINTS).exact(
            "toda.diagonal",
            "the diagonal Toda space is the intersection of the 2-Toda phase space with the diagonal",
            None,
            disagreements,
            0,
            "membership disagreements",
        ),
        ctx.residual(
            "toda.consistency",
            "the t-field on the diagonal is the doubled Toda field",
            None,
            consistency,
            tol(TODA_CONSISTENCY_TOL),
            "",
        ),
        cfg.ctx_with(spec, 1).residual(
            "toda.diagonal-flow",
            "the t-flow preserves the diagonal Toda space",
            None,
            off_diagonal,
            tol(TANGENCY_TOL),
            "RK4 dt 1e-3 to T = 1",
        ),
    ];
    if spec.simple_root_count() > 0 {
        let s = spec.simple_root_count();
        let block = toda::cartan_factor_matrix(spec, &vec![1.0; 2 * s])?;
        let c = toda::numeric_cartan(spec)?;
        let mut worst = 0.0f64;
        for i in 0..s {
            for j in 0..s {
                worst = nan_max(worst, (block[(i + s, j)] + c[(j, i)]).abs());
                worst = nan_max(worst, block[(i, j)].abs().max(block[(i + s, j + s)].abs()));
            }
        }
        out.push(cfg.ctx_with(spec, 1).exact(
            "toda.cartan-block",
            "on g_0 + g_-1 the coordinate R-brackets form a block of rank 2 (simple roots)",
            Some(BracketKind::Linear),
            crate::linalg::numerical_rank(&block),
            2 * s,
            format!("block entries {{z_(i+s), z_j}} = -C_ji z_(i+s): residual {worst:.1e}"),
        ));
    }
    Ok(out)
}

/// Step-halving ratio `drift(dt) / drift(dt/2)` of the t-flow at
/// `dt = 0.1` and `0.05` from the first seeded point. RK4 gives about 16.
pub fn step_halving_ratio(spec: &Arc<AlgebraSpec>, seed: u64) -> Result<(f64, f64, f64)> {
    let tp = PhaseSpace::two_toda(spec);
    let m0 = tp.random_point(&mut rng_for(seed, 0));
    let drift = |dt: f64| -> Result<f64> {
        Ok(flows::integrate(spec.clone(), &FlowConfig { field: FieldKind::T, dt, horizon: 1.0 }, &m0)?
            .max_relative_drift())
    };
    let (a, b) = (drift(0.1)?, drift(0.05)?);
    Ok((a, b, a / b))
}

pub fn flow_checks(spec: &Arc<AlgebraSpec>, cfg: &CheckConfig) -> Result<Vec<CheckReport>> {
    let points = cfg.samples.min(FLOW_POINTS);
    let ctx = cfg.ctx_with(spec, points);
    let tp = PhaseSpace::two_toda(spec);
    let per_point = cfg.exec.map(points, |i| -> Result<[f64; 5]> {
        let m0 = tp.random_point(&mut rng_for(cfg.seed, i as u64));
        let mut r = [0.0f64; 5];
        for field in [FieldKind::T, FieldKind::S] {
            let traj = flows::integrate(spec.clone(), &FlowConfig::new(field), &m0)?;
            if traj.blowup.is_some() {
                return Ok([f64::NAN; 5]);
            }
            r[0] = nan_max(r[0], traj.max_relative_drift());
            r[1] = nan_max(r[1], traj.spectral_drift(spec, &SPECTRAL_LAMBDAS));
            r[2] = nan_max(r[2], traj.tangency_drift(&tp));
            r[4] = nan_max(r[4], traj.states.iter().map(|m| m.max_abs()).fold(0.0, f64::max));
        }
        r[3] = flows::flow_commutation(spec, FieldKind::T, FieldKind::S, &m0, flows::DEFAULT_DT, 100)?;
        Ok(r)
    });
    let rows = per_point.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |k: usize| max_of(rows.iter().map(|r| r[k]));
    let worst_point = (0..rows.len()).max_by(|&a, &b| rows[a][0].total_cmp(&rows[b][0])).unwrap_or(0);
    let (h1, h2, ratio) = step_halving_ratio(spec, cfg.seed)?;
    let mut out = vec![
        ctx.residual(
            "flow.conservation",
            "every F_{j,i} is conserved along the t- and s-flows",
            None,
            col(0),
            cfg.tol(DRIFT_TOL),
            format!(
                "RK4 dt 1e-3 to T = 1, relative drift; worst at point {worst_point}; largest state entry {:.1e}",
                col(4)
            ),
        ),
        ctx.residual(
            "flow.spectrum",
            "the spectrum of lambda L - M is preserved for lambda in {0, 1, 2}",
            None,
            col(1),
            cfg.tol(DRIFT_TOL),
            "Hausdorff distance of spectra",
        ),
        ctx.residual(
            "flow.tangency",
            "the flows stay on the 2-Toda phase space",
            None,
            col(2),
            cfg.tol(TANGENCY_TOL),
            "largest normal coordinate",
        ),
        ctx.residual(
            "flow.commutation",
            "the t- and s-flows commute",
            None,
            col(3),
            cfg.tol(DRIFT_TOL),
            "100 steps of dt 1e-3 each way",
        ),
        cfg.ctx_with(spec, 1).residual(
            "flow.order",
            "RK4 conservation error shrinks at least eightfold when dt halves",
            None,
            8.0 / ratio,
            1.0 + f64::EPSILON,
            format!("drift {h1:.2e} at dt 0.1, {h2:.2e} at dt 0.05, ratio {ratio:.1}"),
        ),
    ];
    if spec.is_associative() {
        let defect = max_of(
            cfg.exec
                .map(points, |i| {
                    let m0 = tp.random_point(&mut rng_for(cfg.seed, i as u64));
                    flows::flow_commutation(
                        spec,
                        FieldKind::Quadratic { i: 0, lambda: 0.0 },
                        FieldKind::Quadratic { i: 1, lambda: 0.5 },
                        &m0,
                        flows::DEFAULT_DT,
                        100,
                    )
                })
                .into_iter()
                .collect::<Result<Vec<_>>>()?,
        );
        out.push(ctx.residual(
            "flow.commutation",
            "quadratic-bracket flows of commuting Hamiltonians commute",
            Some(BracketKind::Quadratic),
            defect,
            cfg.tol(DRIFT_TOL),
            "P_0 at lambda 0 against P_1 at lambda 1/2",
        ));
    }
    Ok(out)
}

