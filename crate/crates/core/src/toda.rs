//! The classical Toda lattice on `e + g_{-1} ⊕ g_0` and its embedding as
//! the diagonal of the 2-Toda phase space.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::Serialize;

use crate::algebra::{AlgebraSpec, Element, Region};
use crate::error::{Error, Result};
use crate::exec::{nan_max, Exec};
use crate::flows::{field_toda, FieldKind, FlowConfig};
use crate::invariants::{expand_pencil, generators, TraceInvariant};
use crate::linalg;
use crate::poisson::{BracketKind, PhaseSpace, PoissonEngine, MEMBERSHIP_TOL};
use crate::rmatrix::{r_apply, PairPoint};
use crate::sampling::rng_for;

/// `e + g_{-1} ⊕ g_0`, with coordinates dual to the basis vectors of
/// degree −1 and 0 (in basis order).
#[derive(Debug, Clone)]
pub struct TodaSpace {
    base: Element,
    indices: Vec<usize>,
    t: DMatrix<f64>,
    t_pinv: DMatrix<f64>,
}

impl TodaSpace {
    pub fn new(spec: &AlgebraSpec) -> Self {
        let indices: Vec<usize> = (0..spec.dim()).filter(|&a| matches!(spec.degrees()[a], -1 | 0)).collect();
        let cols: Vec<DVector<f64>> = indices.iter().map(|&a| spec.basis_element(a).into_coords()).collect();
        let t = DMatrix::from_columns(&cols);
        let t_pinv = linalg::left_pinv(&t).expect("basis vectors are independent");
        TodaSpace { base: spec.e().clone(), indices, t, t_pinv }
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn base(&self) -> &Element {
        &self.base
    }

    /// Basis indices spanning the tangent space.
    pub fn basis_indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn point(&self, coords: &DVector<f64>) -> Element {
        Element::new(self.base.coords() + &self.t * coords)
    }

    pub fn coordinates(&self, x: &Element) -> DVector<f64> {
        &self.t_pinv * (x.coords() - self.base.coords())
    }

    pub fn residual(&self, x: &Element) -> f64 {
        let v = x.coords() - self.base.coords();
        (&v - &self.t * (&self.t_pinv * &v)).amax()
    }

    pub fn contains(&self, x: &Element, tol: f64) -> bool {
        self.residual(x) < tol
    }

    pub fn require(&self, x: &Element) -> Result<()> {
        let residual = self.residual(x);
        if residual < MEMBERSHIP_TOL {
            Ok(())
        } else {
            Err(Error::OffSpace { space: "T_T".into(), residual })
        }
    }

    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        let c = DVector::from_fn(self.dim(), |_, _| rng.random_range(-1.0..=1.0));
        self.point(&c)
    }

    /// Gradient of the `a`-th coordinate, extended to `g` through the
    /// pseudo-inverse.
    pub fn coordinate_gradient(&self, spec: &AlgebraSpec, a: usize) -> Element {
        spec.lift_covector(&self.t_pinv.row(a).transpose())
    }
}

/// `x ↦ (x, x)`, defined on the Toda phase space.
pub fn embed_phi(space: &TodaSpace, x: &Element) -> Result<PairPoint> {
    space.require(x)?;
    Ok(PairPoint::diagonal(x.clone()))
}

/// `½⟨x, [Ra, b] + [a, Rb]⟩` for gradients `a`, `b`.
pub fn r_bracket_from_grads(spec: &AlgebraSpec, x: &Element, a: &Element, b: &Element) -> f64 {
    let v = spec.bracket(&r_apply(spec, a), b) + spec.bracket(a, &r_apply(spec, b));
    0.5 * spec.form(x, &v)
}

/// Matrix of `{z_a, z_b}_R(x)` over the basis coordinates of `g`.
pub fn r_poisson_matrix(spec: &AlgebraSpec, x: &Element) -> DMatrix<f64> {
    let n = spec.dim();
    let grads: Vec<Element> = (0..n).map(|a| spec.lift_covector(&unit(n, a))).collect();
    gram(spec, x, &grads)
}

fn unit(n: usize, a: usize) -> DVector<f64> {
    DVector::from_fn(n, |i, _| if i == a { 1.0 } else { 0.0 })
}

fn gram(spec: &AlgebraSpec, x: &Element, grads: &[Element]) -> DMatrix<f64> {
    let k = grads.len();
    let mut p = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a + 1..k {
            let v = r_bracket_from_grads(spec, x, &grads[a], &grads[b]);
            p[(a, b)] = v;
            p[(b, a)] = -v;
        }
    }
    p
}

/// Hamiltonian field of a function with gradient `grad`, through the
/// coordinate matrix (`X_F[K] = {K, F}`).
pub fn r_hamiltonian_field(spec: &AlgebraSpec, grad: &Element, x: &Element) -> Element {
    let covector = spec.gram() * grad.coords();
    Element::new(r_poisson_matrix(spec, x) * covector)
}

/// Simple root vectors `e_i` (degree 1), dual vectors `f_i` of degree −1
/// and coroots `h_i = [e_i, f_i]` normalised by `[h_i, e_i] = 2e_i`.
#[derive(Debug, Clone)]
pub struct SimpleTriples {
    pub e: Vec<Element>,
    pub f: Vec<Element>,
    pub h: Vec<Element>,
}

pub fn simple_triples(spec: &AlgebraSpec) -> Result<SimpleTriples> {
    let plus = spec.indices_in(Region::Exactly(1));
    let minus = spec.indices_in(Region::Exactly(-1));
    if plus.len() != minus.len() || plus.len() != spec.simple_root_count() {
        return Err(Error::Precondition(format!(
            "`{}` has {} vectors of degree 1 but {} simple roots",
            spec.name(),
            plus.len(),
            spec.simple_root_count()
        )));
    }
    let e: Vec<Element> = plus.iter().map(|&a| spec.basis_element(a)).collect();
    let fs: Vec<Element> = minus.iter().map(|&a| spec.basis_element(a)).collect();
    // Pairing block ⟨e_i, f_j⟩; its inverse gives the dual family.
    let k = e.len();
    let pairing = DMatrix::from_fn(k, k, |i, j| spec.form(&e[i], &fs[j]));
    let inv = pairing.try_inverse().ok_or(Error::SingularGram)?;
    let f: Vec<Element> = (0..k)
        .map(|i| (0..k).fold(spec.zero(), |acc, j| acc + &fs[j] * inv[(j, i)]))
        .collect();
    let mut h = vec![];
    for i in 0..k {
        let hi = spec.bracket(&e[i], &f[i]);
        let scale = spec.form(&spec.bracket(&hi, &e[i]), &f[i]);
        if scale.abs() < 1e-12 {
            return Err(Error::Precondition(format!("simple root {i} of `{}` is degenerate", spec.name())));
        }
        h.push(hi * (2.0 / scale));
    }
    Ok(SimpleTriples { e, f, h })
}

/// `C_ij` with `[h_i, e_j] = C_ij e_j`.
pub fn numeric_cartan(spec: &AlgebraSpec) -> Result<DMatrix<f64>> {
    let t = simple_triples(spec)?;
    let k = t.e.len();
    Ok(DMatrix::from_fn(k, k, |i, j| spec.form(&spec.bracket(&t.h[i], &t.e[j]), &t.f[j])))
}

/// R-bracket matrix of the coordinates `z_i = ⟨h_i, ·⟩`,
/// `z_{i+s} = ⟨e_i, ·⟩` on `g_0 ⊕ g_{-1}`, at the point with coordinates `z`.
/// Off-diagonal block: `{z_{i+s}, z_j} = −C_ji z_{i+s}`.
pub fn cartan_factor_matrix(spec: &AlgebraSpec, z: &[f64]) -> Result<DMatrix<f64>> {
    let t = simple_triples(spec)?;
    let s = t.e.len();
    if z.len() != 2 * s {
        return Err(Error::DimensionMismatch { expected: 2 * s, got: z.len() });
    }
    let grads: Vec<Element> = t.h.iter().chain(&t.e).cloned().collect();
    // Least-squares point of g_0 ⊕ g_{-1} with the requested coordinates.
    let idx: Vec<usize> = (0..spec.dim()).filter(|&a| matches!(spec.degrees()[a], -1 | 0)).collect();
    let a = DMatrix::from_fn(2 * s, idx.len(), |r, c| spec.form(&grads[r], &spec.basis_element(idx[c])));
    let pinv = a.clone().pseudo_inverse(1e-12).map_err(|_| Error::SingularGram)?;
    let w = pinv * DVector::from_column_slice(z);
    if (&a * &w - DVector::from_column_slice(z)).amax() > 1e-9 {
        return Err(Error::Precondition("coordinates are not attainable on g_0 ⊕ g_-1".into()));
    }
    let x = idx.iter().enumerate().fold(spec.zero(), |acc, (c, &i)| acc + spec.basis_element(i) * w[c]);
    Ok(gram(spec, &x, &grads))
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub samples: usize,
    pub seed: u64,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    fn new(samples: usize, seed: u64, max_residual: f64, tolerance: f64) -> Self {
        ResidualReport { samples, seed, max_residual, tolerance, pass: max_residual < tolerance }
    }
}

pub const ISO_TOL: f64 = 1e-9;
pub const BINOMIAL_TOL: f64 = 1e-10;

/// Compares `{w_a, w_b}_R(x)` with `{z_a, z_b}_ℛ(φ(x))`, where `w` and `z`
/// are the dual coordinates of the matched tangent bases of `T_T` and
/// `T_T'`.
pub fn check_poisson_iso(spec: &Arc<AlgebraSpec>, samples: usize, seed: u64, exec: Exec) -> Result<ResidualReport> {
    let space = TodaSpace::new(spec);
    let diag = PhaseSpace::toda_diagonal(spec);
    let engine = PoissonEngine::new(spec.clone());
    let w_grads: Vec<Element> = (0..space.dim()).map(|a| space.coordinate_gradient(spec, a)).collect();
    let worst = exec
        .map(samples, |i| -> Result<f64> {
            let x = space.random_point(&mut rng_for(seed, i as u64));
            let toda = gram(spec, &x, &w_grads);
            let pair = engine.poisson_matrix(&diag, &embed_phi(&space, &x)?, BracketKind::Linear)?.matrix;
            Ok((toda - pair).amax())
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, nan_max);
    Ok(ResidualReport::new(samples, seed, worst, ISO_TOL))
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * f64::from(n - j) / f64::from(j + 1))
}

/// `F_{k,i}(φ(x)) = C(m_i+1, k) · P_i(x)` on seeded points of `T_T`.
pub fn check_binomial_identity(spec: &Arc<AlgebraSpec>, samples: usize, seed: u64, exec: Exec) -> Result<ResidualReport> {
    let space = TodaSpace::new(spec);
    let gens = generators(spec);
    let worst = exec
        .map(samples, |s| -> Result<f64> {
            let x = space.random_point(&mut rng_for(seed, s as u64));
            let m = embed_phi(&space, &x)?;
            let mut worst = 0.0f64;
            for g in &gens {
                let d = g.degree();
                let p = TraceInvariant::of_degree(spec.clone(), d).value(&x);
                let exp = expand_pencil(spec, g.label, d, &m);
                for (k, c) in exp.coeffs.iter().enumerate() {
                    worst = nan_max(worst, (c - binomial(d, k as u32) * p).abs());
                }
            }
            Ok(worst)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, nan_max);
    Ok(ResidualReport::new(samples, seed, worst, BINOMIAL_TOL))
}

pub const TODA_SUITE_TOL: f64 = 1e-9;
pub const TODA_DRIFT_TOL: f64 = 1e-6;

/// Toda-side sub-checks on seeded points of `T_T`.
#[derive(Debug, Clone, Serialize)]
pub struct TodaSuite {
    pub points: usize,
    pub seed: u64,
    /// Largest normal component of the coordinate Hamiltonian fields.
    pub submanifold_defect: f64,
    /// `X_H − [A₊, A]` for `H = ½⟨x, x⟩`.
    pub hamiltonian_residual: f64,
    /// Largest `|{P_i, P_j}_R|`.
    pub involutivity: f64,
    /// Jacobian rank of the `P_i` along `T_T`, and the number of generators.
    pub differential_rank: usize,
    pub generators: usize,
    /// Relative drift of the `P_i` along the RK4 Toda flow (dt 1e−3, T 1).
    pub conservation_drift: f64,
    pub tolerance: f64,
    pub drift_tolerance: f64,
    pub pass: bool,
}

pub fn toda_suite(spec: &Arc<AlgebraSpec>, points: usize, seed: u64, exec: Exec) -> Result<TodaSuite> {
    let space = TodaSpace::new(spec);
    let invs: Vec<TraceInvariant> = generators(spec)
        .iter()
        .map(|g| TraceInvariant::of_degree(spec.clone(), g.degree()))
        .collect();
    let xs: Vec<Element> = (0..points).map(|i| space.random_point(&mut rng_for(seed, i as u64))).collect();

    let per_point = exec.map(points, |i| {
        let x = &xs[i];
        let p = r_poisson_matrix(spec, x);
        let defect = (0..p.ncols())
            .map(|b| {
                let v = p.column(b).into_owned();
                (&v - &space.t * (&space.t_pinv * &v)).amax()
            })
            .fold(0.0, nan_max);
        let xh = r_hamiltonian_field(spec, x, x);
        let ham = (xh - field_toda(spec, x)).max_abs();
        let grads: Vec<Element> = invs.iter().map(|f| f.gradient(x)).collect();
        let mut inv = 0.0f64;
        for a in 0..grads.len() {
            for b in a + 1..grads.len() {
                inv = nan_max(inv, r_bracket_from_grads(spec, x, &grads[a], &grads[b]).abs());
            }
        }
        // Derivatives along the tangent basis: ⟨∇P, t⟩.
        let jac = DMatrix::from_fn(grads.len(), space.dim(), |r, c| {
            spec.form(&grads[r], &spec.basis_element(space.indices[c]))
        });
        (defect, ham, inv, linalg::numerical_rank(&jac))
    });
    let fold = |sel: fn(&(f64, f64, f64, usize)) -> f64| per_point.iter().map(sel).fold(0.0, nan_max);
    let submanifold_defect = fold(|r| r.0);
    let hamiltonian_residual = fold(|r| r.1);
    let involutivity = fold(|r| r.2);
    let differential_rank = per_point.iter().map(|r| r.3).max().unwrap_or(0);

    let cfg = FlowConfig::new(FieldKind::Toda);
    let drift = exec
        .map(points.min(5), |i| -> Result<f64> {
            let x0 = &xs[i];
            let mut m = embed_phi(&space, x0)?;
            let start: Vec<f64> = invs.iter().map(|f| f.value(x0)).collect();
            let mut worst = 0.0f64;
            for _ in 0..cfg.steps() {
                m = crate::flows::rk4_step(|p| cfg.field.eval(spec, p), &m, cfg.dt)?;
                for (f, v0) in invs.iter().zip(&start) {
                    worst = nan_max(worst, (f.value(&m.x) - v0).abs() / v0.abs().max(1.0));
                }
            }
            Ok(worst)
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, nan_max);

    let generators = invs.len();
    let pass = submanifold_defect < TODA_SUITE_TOL
        && hamiltonian_residual < TODA_SUITE_TOL
        && involutivity < TODA_SUITE_TOL
        && differential_rank == generators
        && drift < TODA_DRIFT_TOL;
    Ok(TodaSuite {
        points,
        seed,
        submanifold_defect,
        hamiltonian_residual,
        involutivity,
        differential_rank,
        generators,
        conservation_drift: drift,
        tolerance: TODA_SUITE_TOL,
        drift_tolerance: TODA_DRIFT_TOL,
        pass,
    })
}

/// Number of points where membership in `T_T'` disagrees with membership
/// in `T_P ∩ Δ`. Half the points are built diagonal, half perturbed.
pub fn diagonal_membership_disagreements(spec: &AlgebraSpec, points: usize, seed: u64) -> usize {
    let space = TodaSpace::new(spec);
    let diag = PhaseSpace::toda_diagonal(spec);
    let tp = PhaseSpace::two_toda(spec);
    let tol = MEMBERSHIP_TOL;
    (0..points)
        .filter(|&i| {
            let mut rng = rng_for(seed, i as u64);
            let m = match i % 4 {
                0 => PairPoint::diagonal(space.random_point(&mut rng)),
                1 => tp.random_point(&mut rng),
                2 => {
                    let x = space.random_point(&mut rng);
                    let bump = spec.random_in(&mut rng, Region::AtLeast(0));
                    PairPoint::new(x.clone(), &x + &bump)
                }
                _ => PairPoint::diagonal(spec.random_element(&mut rng)),
            };
            let on_diagonal = (&m.x - &m.y).max_abs() < tol;
            diag.contains(&m, tol) != (tp.contains(&m, tol) && on_diagonal)
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_gl, build_sl};

    #[test]
    fn embedding_basics() {
        let sl3 = build_sl(3).unwrap();
        let space = TodaSpace::new(&sl3);
        assert_eq!(space.dim(), 4);
        assert_eq!(embed_phi(&space, sl3.e()).unwrap(), PairPoint::diagonal(sl3.e().clone()));
        assert!(matches!(embed_phi(&space, sl3.h()), Err(Error::OffSpace { .. })));
        let mut rng = rng_for(5, 0);
        let x = space.random_point(&mut rng);
        let v = sl3.random_in(&mut rng, Region::Exactly(-1));
        let shifted = embed_phi(&space, &(&x + &v)).unwrap() - embed_phi(&space, &x).unwrap();
        assert!((shifted - PairPoint::diagonal(v)).max_abs() < 1e-15);
    }

    #[test]
    fn sl2_cartan_factor() {
        let sl2 = build_sl(2).unwrap();
        let m = cartan_factor_matrix(&sl2, &[1.0, 1.0]).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.0, 2.0, -2.0, 0.0]);
        assert!((m - want).amax() < 1e-12);
    }

    #[test]
    fn cartan_factor_block_oracle() {
        for spec in [build_sl(3).unwrap(), build_sl(4).unwrap(), build_gl(3).unwrap()] {
            let c = numeric_cartan(&spec).unwrap();
            let s = c.nrows();
            let want_c: Vec<Vec<i64>> = spec.cartan().to_vec();
            for i in 0..s {
                for j in 0..s {
                    assert_eq!(c[(i, j)].round() as i64, want_c[i][j]);
                }
            }
            let z: Vec<f64> = (0..2 * s).map(|k| 0.3 + 0.1 * k as f64).collect();
            let m = cartan_factor_matrix(&spec, &z).unwrap();
            for i in 0..s {
                for j in 0..s {
                    assert!(m[(i, j)].abs() < 1e-12);
                    assert!(m[(i + s, j + s)].abs() < 1e-12);
                    assert!((m[(i + s, j)] + c[(j, i)] * z[i + s]).abs() < 1e-12);
                }
            }
            assert_eq!(linalg::numerical_rank(&m), 2 * s);
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(4, 2), 6.0);
    }
}
