//! Lax flows on `g × g` and their fixed-step RK4 integration.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebra::{AlgebraSpec, Element, Region};
use crate::error::{Error, Result};
use crate::invariants::Family;
use crate::poisson::PhaseSpace;
use crate::rmatrix::PairPoint;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_HORIZON: f64 = 1.0;

/// States with a coordinate above this are treated as blown up.
pub const BLOWUP_BOUND: f64 = 1e12;

const SCHUR_MAX_ITER: usize = 10_000;

/// `([L₊, L], [L₊, M])` at `m = (L, M)`.
pub fn field_t(spec: &AlgebraSpec, m: &PairPoint) -> PairPoint {
    let lp = spec.project(&m.x, Region::PLUS);
    PairPoint::new(spec.bracket(&lp, &m.x), spec.bracket(&lp, &m.y))
}

/// `([M₋, L], [M₋, M])` at `m = (L, M)`.
pub fn field_s(spec: &AlgebraSpec, m: &PairPoint) -> PairPoint {
    let mm = spec.project(&m.y, Region::MINUS);
    PairPoint::new(spec.bracket(&mm, &m.x), spec.bracket(&mm, &m.y))
}

/// `[A₊, A]`.
pub fn field_toda(spec: &AlgebraSpec, a: &Element) -> Element {
    spec.bracket(&spec.project(a, Region::PLUS), a)
}

/// `∇P(λx − y)` for the trace invariant of degree `e + 1`.
fn pencil_power(spec: &AlgebraSpec, m: &PairPoint, lambda: f64, e: u32) -> Element {
    let d = spec.to_matrix(&(&m.x * lambda - &m.y));
    let mut acc = DMatrix::identity(d.nrows(), d.nrows());
    for _ in 0..e {
        acc = &acc * &d;
    }
    spec.trace_dual(&acc)
}

/// `((R−I)d, (R+I)d) = (−2d₋, 2d₊)`.
fn split_pair(spec: &AlgebraSpec, d: &Element) -> PairPoint {
    PairPoint::new(spec.project(d, Region::MINUS) * -2.0, spec.project(d, Region::PLUS) * 2.0)
}

/// Quadratic-bracket field of `P_i∘φ_λ`:
/// `−[(x,y), ((R−I)D^{i+1}, (R+I)D^{i+1})]` with `D = λx − y`.
pub fn field_quadratic(spec: &AlgebraSpec, i: u32, lambda: f64, m: &PairPoint) -> Result<PairPoint> {
    if !spec.is_associative() {
        return Err(Error::NotAssociative(spec.name().to_string()));
    }
    let d = pencil_power(spec, m, lambda, i + 1);
    Ok(spec.pair_bracket(m, &split_pair(spec, &d)) * -1.0)
}

/// Linear-bracket field of `P_i∘φ_λ`:
/// `½(1−λ)[(x,y), ((R−I)d, (R+I)d)]` with `d = ∇P_i(λx − y)`.
pub fn field_linear(spec: &AlgebraSpec, i: u32, lambda: f64, m: &PairPoint) -> PairPoint {
    let d = pencil_power(spec, m, lambda, i);
    spec.pair_bracket(m, &split_pair(spec, &d)) * (0.5 * (1.0 - lambda))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldKind {
    T,
    S,
    /// Toda field `[A₊, A]` acting on both components.
    Toda,
    Quadratic { i: u32, lambda: f64 },
    Linear { i: u32, lambda: f64 },
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::T => f.write_str("t"),
            FieldKind::S => f.write_str("s"),
            FieldKind::Toda => f.write_str("toda"),
            FieldKind::Quadratic { i, lambda } => write!(f, "quadratic({i},{lambda})"),
            FieldKind::Linear { i, lambda } => write!(f, "linear({i},{lambda})"),
        }
    }
}

impl FromStr for FieldKind {
    type Err = Error;
    /// Accepts `t`, `s`, `toda`, `quadratic(i,λ)` and `linear(i,λ)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("unknown field `{s}`"));
        match s {
            "t" => return Ok(FieldKind::T),
            "s" => return Ok(FieldKind::S),
            "toda" => return Ok(FieldKind::Toda),
            _ => {}
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args = rest.strip_suffix(')').ok_or_else(bad)?;
        let (i, lambda) = args.split_once(',').ok_or_else(bad)?;
        let i: u32 = i.trim().parse().map_err(|_| bad())?;
        let lambda: f64 = lambda.trim().parse().map_err(|_| bad())?;
        match head {
            "quadratic" => Ok(FieldKind::Quadratic { i, lambda }),
            "linear" => Ok(FieldKind::Linear { i, lambda }),
            _ => Err(bad()),
        }
    }
}

impl FieldKind {
    pub fn eval(&self, spec: &AlgebraSpec, m: &PairPoint) -> Result<PairPoint> {
        match *self {
            FieldKind::T => Ok(field_t(spec, m)),
            FieldKind::S => Ok(field_s(spec, m)),
            FieldKind::Toda => Ok(PairPoint::diagonal(field_toda(spec, &m.x))),
            FieldKind::Quadratic { i, lambda } => field_quadratic(spec, i, lambda, m),
            FieldKind::Linear { i, lambda } => Ok(field_linear(spec, i, lambda, m)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowConfig {
    pub field: FieldKind,
    pub dt: f64,
    pub horizon: f64,
}

impl FlowConfig {
    pub fn new(field: FieldKind) -> Self {
        FlowConfig { field, dt: DEFAULT_DT, horizon: DEFAULT_HORIZON }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::Precondition(format!("T = {} must be at least dt = {}", self.horizon, self.dt)));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }
}

/// One classical RK4 step.
pub fn rk4_step<F>(f: F, m: &PairPoint, dt: f64) -> Result<PairPoint>
where
    F: Fn(&PairPoint) -> Result<PairPoint>,
{
    let k1 = f(m)?;
    let k2 = f(&(m + &(&k1 * (0.5 * dt))))?;
    let k3 = f(&(m + &(&k2 * (0.5 * dt))))?;
    let k4 = f(&(m + &(&k3 * dt)))?;
    let incr = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    Ok(m + &incr)
}

/// Applies `steps` RK4 steps of `field`.
pub fn flow(spec: &AlgebraSpec, field: FieldKind, m0: &PairPoint, dt: f64, steps: usize) -> Result<PairPoint> {
    let mut m = m0.clone();
    for _ in 0..steps {
        m = rk4_step(|p| field.eval(spec, p), &m, dt)?;
    }
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<PairPoint>,
    /// Family values, one row per stored state.
    pub conserved: Vec<Vec<f64>>,
    /// Set when integration stopped early on a non-finite or huge state.
    pub blowup: Option<String>,
}

impl Trajectory {
    pub fn final_state(&self) -> &PairPoint {
        self.states.last().expect("trajectories hold the initial state")
    }

    /// Per-function `max_t |F(t) − F(0)| / max(1, |F(0)|)`.
    pub fn relative_drifts(&self) -> Vec<f64> {
        let first = &self.conserved[0];
        (0..first.len())
            .map(|k| {
                let scale = first[k].abs().max(1.0);
                self.conserved
                    .iter()
                    .map(|row| (row[k] - first[k]).abs() / scale)
                    .fold(0.0, crate::exec::nan_max)
            })
            .collect()
    }

    pub fn max_relative_drift(&self) -> f64 {
        self.relative_drifts().into_iter().fold(0.0, crate::exec::nan_max)
    }

    /// Largest normal component of any state with respect to `ps`.
    pub fn tangency_drift(&self, ps: &PhaseSpace) -> f64 {
        self.states.iter().map(|m| ps.residual(m)).fold(0.0, crate::exec::nan_max)
    }

    /// Largest Hausdorff distance between the spectra of `λ₀L − M` at the
    /// initial and any later state.
    pub fn spectral_drift(&self, spec: &AlgebraSpec, lambdas: &[f64]) -> f64 {
        let first = &self.states[0];
        let mut worst = 0.0f64;
        for &l in lambdas {
            let e0 = pencil_spectrum(spec, first, l);
            for m in &self.states[1..] {
                worst = crate::exec::nan_max(worst, hausdorff(&e0, &pencil_spectrum(spec, m, l)));
            }
        }
        worst
    }

    /// CSV with header `t,x_1..,y_1..,F_j_i..` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let dim = self.states[0].dim();
        let mut header = vec!["t".to_string()];
        header.extend((1..=dim).map(|k| format!("x_{k}")));
        header.extend((1..=dim).map(|k| format!("y_{k}")));
        header.extend(self.names.iter().cloned());
        writeln!(w, "{}", header.join(","))?;
        for ((t, m), f) in self.times.iter().zip(&self.states).zip(&self.conserved) {
            let row: Vec<String> = std::iter::once(*t)
                .chain(m.flat().iter().copied())
                .chain(f.iter().copied())
                .map(|v| format!("{v:.16e}"))
                .collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Eigenvalues `(re, im)` of `λ₀X − Y`.
pub fn pencil_spectrum(spec: &AlgebraSpec, m: &PairPoint, lambda: f64) -> Vec<(f64, f64)> {
    let a: DMatrix<f64> = spec.to_matrix(&m.x) * lambda - spec.to_matrix(&m.y);
    let n = a.nrows();
    // The QR iteration occasionally stalls on the structured pencils of
    // so(n); a fixed orthogonal similarity breaks the symmetry. If even that
    // fails the spectrum is reported as NaN.
    let schur = a.clone().try_schur(f64::EPSILON, SCHUR_MAX_ITER).or_else(|| {
        let q = DMatrix::from_fn(n, n, |r, c| ((r * 7 + c * 13 + 1) as f64).sin()).qr().q();
        (q.transpose() * a * q).try_schur(f64::EPSILON, SCHUR_MAX_ITER)
    });
    match schur {
        Some(schur) => schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect(),
        None => vec![(f64::NAN, f64::NAN); n],
    }
}

/// Hausdorff distance between two finite subsets of the complex plane.
pub fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let d = |p: &(f64, f64), q: &(f64, f64)| (p.0 - q.0).hypot(p.1 - q.1);
    let one_way = |u: &[(f64, f64)], v: &[(f64, f64)]| {
        u.iter()
            .map(|p| v.iter().map(|q| d(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Integrates `cfg` from `m0`, recording every state and the family values.
pub fn integrate(spec: Arc<AlgebraSpec>, cfg: &FlowConfig, m0: &PairPoint) -> Result<Trajectory> {
    cfg.validate()?;
    let family = Family::new(spec.clone());
    let mut traj = Trajectory {
        names: family.names(),
        times: vec![0.0],
        states: vec![m0.clone()],
        conserved: vec![family.at(m0).values],
        blowup: None,
    };
    let mut m = m0.clone();
    for step in 1..=cfg.steps() {
        m = rk4_step(|p| cfg.field.eval(&spec, p), &m, cfg.dt)?;
        if !m.is_finite() || m.max_abs() > BLOWUP_BOUND {
            traj.blowup = Some(format!("state left the finite range at step {step} (t = {})", step as f64 * cfg.dt));
            break;
        }
        traj.times.push(step as f64 * cfg.dt);
        traj.conserved.push(family.at(&m).values);
        traj.states.push(m.clone());
    }
    Ok(traj)
}

/// `‖Φ_a^n ∘ Φ_b^n (m0) − Φ_b^n ∘ Φ_a^n (m0)‖_∞` for RK4 flows with `n` steps.
pub fn flow_commutation(
    spec: &AlgebraSpec,
    a: FieldKind,
    b: FieldKind,
    m0: &PairPoint,
    dt: f64,
    steps: usize,
) -> Result<f64> {
    let ab = flow(spec, a, &flow(spec, b, m0, dt, steps)?, dt, steps)?;
    let ba = flow(spec, b, &flow(spec, a, m0, dt, steps)?, dt, steps)?;
    Ok((ab - ba).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_gl, build_sl};
    use crate::sampling::rng_for;

    #[test]
    fn sl2_t_field_value() {
        let sl2 = build_sl(2).unwrap();
        let (e, f) = (sl2.basis_element(0), sl2.basis_element(2));
        let m = PairPoint::new(&e + &f, sl2.h().clone());
        let v = field_t(&sl2, &m);
        assert!((v.x - sl2.h().clone()).max_abs() < 1e-14);
        assert!((v.y + &e * 2.0).max_abs() < 1e-14);
    }

    #[test]
    fn stationary_points() {
        let sl3 = build_sl(3).unwrap();
        let mut rng = rng_for(1, 0);
        let h0 = sl3.random_in(&mut rng, Region::Exactly(0));
        assert!(field_t(&sl3, &PairPoint::new(h0, sl3.zero())).max_abs() < 1e-15);
        let l = sl3.random_element(&mut rng);
        assert!(field_s(&sl3, &PairPoint::new(l, sl3.zero())).max_abs() < 1e-15);
        let gl2 = build_gl(2).unwrap();
        assert_eq!(field_quadratic(&gl2, 1, 0.5, &PairPoint::zeros(4)).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn quadratic_field_substitution_gl2() {
        let gl2 = build_gl(2).unwrap();
        let m = gl2.random_pair(&mut rng_for(2, 0));
        let got = field_quadratic(&gl2, 0, 0.0, &m).unwrap();
        // (R−I)(−y) = 2y₋ and (R+I)(−y) = −2y₊.
        let want = gl2.pair_bracket(
            &m,
            &PairPoint::new(gl2.project(&m.y, Region::MINUS) * 2.0, gl2.project(&m.y, Region::PLUS) * -2.0),
        ) * -1.0;
        assert!((got - want).max_abs() < 1e-14);
    }

    #[test]
    fn field_parsing() {
        assert_eq!("t".parse::<FieldKind>().unwrap(), FieldKind::T);
        assert_eq!("quadratic(1,0.5)".parse::<FieldKind>().unwrap(), FieldKind::Quadratic { i: 1, lambda: 0.5 });
        assert_eq!("linear(2, -1)".parse::<FieldKind>().unwrap(), FieldKind::Linear { i: 2, lambda: -1.0 });
        for s in ["x", "quadratic(1)", "linear(a,1)", "cubic(1,2)"] {
            assert!(s.parse::<FieldKind>().is_err(), "{s}");
        }
        let k = FieldKind::Linear { i: 2, lambda: -1.5 };
        assert_eq!(k.to_string().parse::<FieldKind>().unwrap(), k);
    }

    #[test]
    fn config_validation() {
        let mut cfg = FlowConfig::new(FieldKind::T);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.steps(), 1000);
        cfg.dt = 0.0;
        assert!(cfg.validate().is_err());
        cfg.dt = 0.5;
        cfg.horizon = 0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn stationary_trajectory_is_constant() {
        let sl2 = Arc::new(build_sl(2).unwrap());
        let m0 = PairPoint::new(sl2.h().clone(), sl2.zero());
        let cfg = FlowConfig { field: FieldKind::T, dt: 0.1, horizon: 1.0 };
        let traj = integrate(sl2.clone(), &cfg, &m0).unwrap();
        assert_eq!(traj.states.len(), 11);
        assert!(traj.states.iter().all(|m| *m == m0));
        assert_eq!(traj.max_relative_drift(), 0.0);
    }

    #[test]
    fn csv_layout() {
        let sl2 = Arc::new(build_sl(2).unwrap());
        let m0 = PhaseSpace::two_toda(&sl2).random_point(&mut rng_for(3, 0));
        let cfg = FlowConfig { field: FieldKind::T, dt: 0.25, horizon: 0.5 };
        let traj = integrate(sl2, &cfg, &m0).unwrap();
        let mut buf = vec![];
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x_1,x_2,x_3,y_1,y_2,y_3,F_0_1,F_1_1,F_2_1");
        assert_eq!(lines.clone().count(), 3);
        assert!(lines.next().unwrap().starts_with("0.0000000000000000e0,"));
    }

    #[test]
    fn hausdorff_distance() {
        let a = [(0.0, 0.0), (1.0, 0.0)];
        let b = [(0.0, 0.5), (1.0, 0.0), (1.0, 0.1)];
        assert!((hausdorff(&a, &b) - 0.5).abs() < 1e-15);
        assert_eq!(hausdorff(&a, &a), 0.0);
    }
}
