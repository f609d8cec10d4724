//! Finite-dimensional graded matrix Lie algebras.
//!
//! An [`AlgebraSpec`] stores a homogeneous basis of a faithful matrix
//! representation, one integer degree per basis vector, the principal pair
//! `(e, h)` and the invariant form `⟨x, y⟩ = s · Trace(xy)` (with `s = 1`
//! unless [`AlgebraSpec::with_form_scale`] was used). Elements are plain
//! coordinate vectors over that basis.

mod builders;
pub mod io;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result, Violation};
use crate::linalg;

pub use builders::{build_gl, build_sl};

/// Absolute/relative tolerance for structural invariants of a spec.
pub const STRUCTURE_TOL: f64 = 1e-12;

/// A degree predicate selecting graded pieces `g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// `k >= d`
    AtLeast(i32),
    /// `k > d`
    Above(i32),
    /// `k <= d`
    AtMost(i32),
    /// `k < d`
    Below(i32),
    /// `k == d`
    Exactly(i32),
}

impl Region {
    /// `g_+ = g_{>=0}`
    pub const PLUS: Region = Region::AtLeast(0);
    /// `g_- = g_{<0}`
    pub const MINUS: Region = Region::Below(0);

    pub fn contains(self, degree: i32) -> bool {
        match self {
            Region::AtLeast(d) => degree >= d,
            Region::Above(d) => degree > d,
            Region::AtMost(d) => degree <= d,
            Region::Below(d) => degree < d,
            Region::Exactly(d) => degree == d,
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::AtLeast(d) => write!(f, ">={d}"),
            Region::Above(d) => write!(f, ">{d}"),
            Region::AtMost(d) => write!(f, "<={d}"),
            Region::Below(d) => write!(f, "<{d}"),
            Region::Exactly(d) => write!(f, "={d}"),
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (ctor, rest): (fn(i32) -> Region, &str) = if let Some(r) = s.strip_prefix(">=") {
            (Region::AtLeast, r)
        } else if let Some(r) = s.strip_prefix("<=") {
            (Region::AtMost, r)
        } else if let Some(r) = s.strip_prefix('>') {
            (Region::Above, r)
        } else if let Some(r) = s.strip_prefix('<') {
            (Region::Below, r)
        } else if let Some(r) = s.strip_prefix('=') {
            (Region::Exactly, r)
        } else {
            return Err(Error::Parse(format!("bad degree region `{s}`")));
        };
        rest.trim()
            .parse::<i32>()
            .map(ctor)
            .map_err(|_| Error::Parse(format!("bad degree region `{s}`")))
    }
}

/// An element of an algebra, as coordinates over the spec's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    coords: DVector<f64>,
}

impl Element {
    pub fn new(coords: DVector<f64>) -> Self {
        Element { coords }
    }

    pub fn from_slice(coords: &[f64]) -> Self {
        Element::new(DVector::from_column_slice(coords))
    }

    pub fn zeros(dim: usize) -> Self {
        Element::new(DVector::zeros(dim))
    }

    /// The `index`-th basis vector.
    pub fn basis_vector(dim: usize, index: usize) -> Self {
        let mut c = DVector::zeros(dim);
        c[index] = 1.0;
        Element::new(c)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        self.coords.norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.amax()
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|v| v.is_finite())
    }
}

macro_rules! element_binop {
    ($tr:ident, $f:ident, $op:tt) => {
        impl $tr<Element> for Element {
            type Output = Element;
            fn $f(self, rhs: Element) -> Element {
                Element::new(self.coords $op rhs.coords)
            }
        }
        impl $tr<&Element> for &Element {
            type Output = Element;
            fn $f(self, rhs: &Element) -> Element {
                Element::new(&self.coords $op &rhs.coords)
            }
        }
        impl $tr<&Element> for Element {
            type Output = Element;
            fn $f(self, rhs: &Element) -> Element {
                Element::new(self.coords $op &rhs.coords)
            }
        }
    };
}

element_binop!(Add, add, +);
element_binop!(Sub, sub, -);

impl AddAssign<&Element> for Element {
    fn add_assign(&mut self, rhs: &Element) {
        self.coords += &rhs.coords;
    }
}

impl SubAssign<&Element> for Element {
    fn sub_assign(&mut self, rhs: &Element) {
        self.coords -= &rhs.coords;
    }
}

impl Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element::new(-self.coords)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element::new(-&self.coords)
    }
}

impl Mul<f64> for Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        Element::new(self.coords * rhs)
    }
}

impl Mul<f64> for &Element {
    type Output = Element;
    fn mul(self, rhs: f64) -> Element {
        Element::new(&self.coords * rhs)
    }
}

impl Mul<&Element> for f64 {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        rhs * self
    }
}

/// The defining data of an algebra spec, exactly as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecParts {
    pub name: String,
    pub n: Option<usize>,
    pub rank: usize,
    pub basis: Vec<DMatrix<f64>>,
    pub degrees: Vec<i32>,
    pub exponents: Vec<u32>,
    pub cartan: Vec<Vec<i64>>,
    pub e_coords: Vec<f64>,
    pub h_coords: Vec<f64>,
    pub associative: bool,
}

/// A validated graded Lie algebra. Immutable once built.
#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    parts: SpecParts,
    form_scale: f64,
    rep: usize,
    e: Element,
    h: Element,
    /// Column `a` is `b_a` flattened column-major.
    basis_flat: DMatrix<f64>,
    /// Least-squares coordinate extraction: `coords = coord_map · vec(M)`.
    coord_map: DMatrix<f64>,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    /// Orthonormal (Euclidean, coordinate space) basis of the center.
    center: DMatrix<f64>,
}

impl PartialEq for AlgebraSpec {
    fn eq(&self, other: &Self) -> bool {
        self.parts == other.parts && self.form_scale == other.form_scale
    }
}

impl AlgebraSpec {
    /// Builds and validates a spec. All violated invariants are reported.
    pub fn from_parts(parts: SpecParts) -> Result<Self> {
        let spec = Self::assemble(parts, 1.0)?;
        let violations = spec.validate();
        if violations.is_empty() {
            Ok(spec)
        } else {
            Err(Error::Invariant(violations))
        }
    }

    fn assemble(parts: SpecParts, form_scale: f64) -> Result<Self> {
        let dim = parts.basis.len();
        let shape = |detail: String| {
            Error::Invariant(vec![Violation {
                invariant: "shape",
                indices: vec![],
                detail,
            }])
        };
        if dim == 0 {
            return Err(shape("empty basis".into()));
        }
        let rep = parts.basis[0].nrows();
        let bad: Vec<usize> = parts
            .basis
            .iter()
            .enumerate()
            .filter(|(_, b)| b.nrows() != rep || b.ncols() != rep)
            .map(|(i, _)| i)
            .collect();
        if rep == 0 || !bad.is_empty() {
            return Err(Error::Invariant(vec![Violation {
                invariant: "shape",
                indices: bad,
                detail: format!("basis matrices must all be square of size {rep}"),
            }]));
        }
        for (what, len) in [
            ("degrees", parts.degrees.len()),
            ("e_coords", parts.e_coords.len()),
            ("h_coords", parts.h_coords.len()),
        ] {
            if len != dim {
                return Err(shape(format!("{what} has length {len}, expected dim = {dim}")));
            }
        }
        let nonfinite: Vec<usize> = parts
            .basis
            .iter()
            .enumerate()
            .filter(|(_, b)| b.iter().any(|v| !v.is_finite()))
            .map(|(i, _)| i)
            .collect();
        if !nonfinite.is_empty() {
            return Err(Error::Invariant(vec![Violation {
                invariant: "shape",
                indices: nonfinite,
                detail: "non-finite basis entries".into(),
            }]));
        }

        let cols: Vec<DVector<f64>> = parts
            .basis
            .iter()
            .map(|b| DVector::from_column_slice(b.as_slice()))
            .collect();
        let basis_flat = DMatrix::from_columns(&cols);
        let coord_map = linalg::left_pinv(&basis_flat).ok_or_else(|| {
            Error::Invariant(vec![Violation {
                invariant: "basis-independence",
                indices: vec![],
                detail: "basis matrices are linearly dependent".into(),
            }])
        })?;
        let gram = DMatrix::from_fn(dim, dim, |a, b| {
            form_scale * (&parts.basis[a] * &parts.basis[b]).trace()
        });
        let gram_inv = gram.clone().try_inverse().ok_or(Error::SingularGram)?;
        let e = Element::from_slice(&parts.e_coords);
        let h = Element::from_slice(&parts.h_coords);
        let mut spec = AlgebraSpec {
            parts,
            form_scale,
            rep,
            e,
            h,
            basis_flat,
            coord_map,
            gram,
            gram_inv,
            center: DMatrix::zeros(dim, 0),
        };
        spec.center = spec.compute_center();
        Ok(spec)
    }

    /// Same algebra with the invariant form multiplied by `scale > 0`.
    pub fn with_form_scale(&self, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Precondition(format!("form scale must be positive, got {scale}")));
        }
        Self::assemble(self.parts.clone(), scale * self.form_scale)
    }

    fn compute_center(&self) -> DMatrix<f64> {
        let dim = self.dim();
        // Row block a: coordinates of [z, b_a] as a linear function of z.
        let mut k = DMatrix::zeros(dim * dim, dim);
        for z in 0..dim {
            let bz = &self.parts.basis[z];
            for a in 0..dim {
                let ba = &self.parts.basis[a];
                let c = self.matrix_coords(&(bz * ba - ba * bz));
                k.view_mut((a * dim, z), (dim, 1)).copy_from(&c);
            }
        }
        linalg::null_space(&k, 1e-10)
    }

    /// Checks every structural invariant, returning all violations.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let dim = self.dim();
        let basis = &self.parts.basis;
        let degrees = &self.parts.degrees;

        let sv = linalg::singular_values(&self.basis_flat);
        let smax = sv.max();
        let smin = sv.min();
        if smin <= 1e-10 * smax {
            out.push(Violation {
                invariant: "basis-independence",
                indices: vec![],
                detail: format!("smallest singular value {smin:e} vs largest {smax:e}"),
            });
        }

        let gram_sv = linalg::singular_values(&self.gram);
        if gram_sv.min() <= 1e-10 * gram_sv.max() {
            out.push(Violation {
                invariant: "gram-nondegenerate",
                indices: vec![],
                detail: format!(
                    "smallest singular value {:e} vs largest {:e}",
                    gram_sv.min(),
                    gram_sv.max()
                ),
            });
        }
        let asym = linalg::max_abs(&(&self.gram - self.gram.transpose()));
        if asym > STRUCTURE_TOL {
            out.push(Violation {
                invariant: "gram-symmetric",
                indices: vec![],
                detail: format!("max asymmetry {asym:e}"),
            });
        }

        for a in 0..dim {
            for b in (a + 1)..dim {
                if degrees[a] + degrees[b] != 0 && self.gram[(a, b)].abs() > STRUCTURE_TOL {
                    out.push(Violation {
                        invariant: "graded-orthogonality",
                        indices: vec![a, b],
                        detail: format!(
                            "<b_{a}, b_{b}> = {:e} with degrees {} + {} != 0",
                            self.gram[(a, b)],
                            degrees[a],
                            degrees[b]
                        ),
                    });
                }
            }
        }

        // Commutator coordinates, table[a][b] = coords of [b_a, b_b].
        let mut table = vec![vec![DVector::zeros(dim); dim]; dim];
        for a in 0..dim {
            for b in (a + 1)..dim {
                let m = &basis[a] * &basis[b] - &basis[b] * &basis[a];
                let c = self.matrix_coords(&m);
                let scale = linalg::max_abs(&m).max(1.0);
                let resid = linalg::max_abs(&(&m - self.coords_matrix(&c)));
                if resid > STRUCTURE_TOL * scale {
                    out.push(Violation {
                        invariant: "bracket-closure",
                        indices: vec![a, b],
                        detail: format!("[b_{a}, b_{b}] leaves the span (residual {resid:e})"),
                    });
                }
                let target = degrees[a] + degrees[b];
                let stray: f64 = c
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| degrees[*k] != target)
                    .fold(0.0, |m, (_, v)| m.max(v.abs()));
                if stray > STRUCTURE_TOL * scale {
                    out.push(Violation {
                        invariant: "grading",
                        indices: vec![a, b],
                        detail: format!(
                            "[b_{a}, b_{b}] has a component {stray:e} outside degree {target}"
                        ),
                    });
                }
                table[b][a] = -&c;
                table[a][b] = c;
            }
        }

        let mut worst = (0.0, [0usize; 3]);
        for a in 0..dim {
            let g_ab: Vec<DVector<f64>> = (0..dim).map(|b| &self.gram * &table[a][b]).collect();
            for b in 0..dim {
                for c in 0..dim {
                    // <[b_a, b_b], b_c> + <b_b, [b_a, b_c]>
                    let r = (g_ab[b][c] + g_ab[c][b]).abs();
                    if r > worst.0 {
                        worst = (r, [a, b, c]);
                    }
                }
            }
        }
        if worst.0 > STRUCTURE_TOL * self.form_scale.max(1.0) {
            out.push(Violation {
                invariant: "form-invariance",
                indices: worst.1.to_vec(),
                detail: format!("invariance residual {:e}", worst.0),
            });
        }

        let he = self.bracket(&self.h, &self.e);
        let resid = (&he - &(&self.e * 2.0)).max_abs();
        if resid > STRUCTURE_TOL * self.e.max_abs().max(1.0) {
            out.push(Violation {
                invariant: "principal-pair",
                indices: vec![],
                detail: format!("[h, e] - 2e has residual {resid:e}"),
            });
        }
        let off_degree = |x: &Element, d: i32| -> Vec<usize> {
            (0..dim)
                .filter(|&k| degrees[k] != d && x.coords[k].abs() > STRUCTURE_TOL)
                .collect()
        };
        let e_bad = off_degree(&self.e, 1);
        if !e_bad.is_empty() {
            out.push(Violation {
                invariant: "principal-pair",
                indices: e_bad,
                detail: "e must be homogeneous of degree 1".into(),
            });
        }
        let h_bad = off_degree(&self.h, 0);
        if !h_bad.is_empty() {
            out.push(Violation {
                invariant: "principal-pair",
                indices: h_bad,
                detail: "h must be homogeneous of degree 0".into(),
            });
        }

        let cartan_size = self.indices_in(Region::Exactly(1)).len();
        let cartan = &self.parts.cartan;
        if cartan.len() != cartan_size || cartan.iter().any(|row| row.len() != cartan_size) {
            out.push(Violation {
                invariant: "cartan-shape",
                indices: vec![],
                detail: format!(
                    "Cartan matrix must be {cartan_size}x{cartan_size} (one row per degree-1 basis vector)"
                ),
            });
        } else if cartan.iter().enumerate().any(|(i, row)| row[i] != 2) {
            out.push(Violation {
                invariant: "cartan-shape",
                indices: vec![],
                detail: "Cartan matrix diagonal must be 2".into(),
            });
        }

        let g0 = self.indices_in(Region::Exactly(0)).len();
        if g0 != self.parts.rank {
            out.push(Violation {
                invariant: "rank",
                indices: vec![],
                detail: format!("rank {} but g_0 has dimension {g0}", self.parts.rank),
            });
        }
        let ex = &self.parts.exponents;
        let sum: u64 = ex.iter().map(|&m| m as u64).sum();
        if ex.len() != self.parts.rank
            || ex.windows(2).any(|w| w[0] > w[1])
            || 2 * sum + self.parts.rank as u64 != dim as u64
        {
            out.push(Violation {
                invariant: "exponents",
                indices: vec![],
                detail: format!(
                    "need rank = {} nondecreasing exponents with 2·Σm = dim - rank, got {ex:?}",
                    self.parts.rank
                ),
            });
        }

        if self.parts.associative {
            for a in 0..dim {
                for b in 0..dim {
                    let m = &basis[a] * &basis[b];
                    let resid = self.matrix_residual(&m);
                    if resid > STRUCTURE_TOL * linalg::max_abs(&m).max(1.0) {
                        out.push(Violation {
                            invariant: "associativity",
                            indices: vec![a, b],
                            detail: format!("b_{a}·b_{b} leaves the span (residual {resid:e})"),
                        });
                    }
                }
            }
        }
        out
    }

    pub fn parts(&self) -> &SpecParts {
        &self.parts
    }

    pub fn name(&self) -> &str {
        &self.parts.name
    }

    pub fn n(&self) -> Option<usize> {
        self.parts.n
    }

    pub fn dim(&self) -> usize {
        self.parts.basis.len()
    }

    /// Rank ℓ, the dimension of `g_0`.
    pub fn rank(&self) -> usize {
        self.parts.rank
    }

    /// Number of simple roots (degree-1 basis vectors).
    pub fn simple_root_count(&self) -> usize {
        self.parts.cartan.len()
    }

    /// Size of the representation matrices.
    pub fn rep_dim(&self) -> usize {
        self.rep
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.parts.basis
    }

    pub fn degrees(&self) -> &[i32] {
        &self.parts.degrees
    }

    pub fn exponents(&self) -> &[u32] {
        &self.parts.exponents
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.parts.cartan
    }

    pub fn e(&self) -> &Element {
        &self.e
    }

    pub fn h(&self) -> &Element {
        &self.h
    }

    pub fn is_associative(&self) -> bool {
        self.parts.associative
    }

    pub fn form_scale(&self) -> f64 {
        self.form_scale
    }

    /// `⟨b_a, b_b⟩`.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Orthonormal coordinate basis of the center, as columns.
    pub fn center_basis(&self) -> &DMatrix<f64> {
        &self.center
    }

    pub fn check_dim(&self, x: &Element) -> Result<()> {
        if x.dim() == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim(), got: x.dim() })
        }
    }

    fn matrix_coords(&self, m: &DMatrix<f64>) -> DVector<f64> {
        &self.coord_map * DVector::from_column_slice(m.as_slice())
    }

    fn coords_matrix(&self, c: &DVector<f64>) -> DMatrix<f64> {
        let flat = &self.basis_flat * c;
        DMatrix::from_column_slice(self.rep, self.rep, flat.as_slice())
    }

    pub fn to_matrix(&self, x: &Element) -> DMatrix<f64> {
        self.coords_matrix(&x.coords)
    }

    /// Coordinates of the orthogonal (Frobenius) projection of `m` onto
    /// the span of the basis.
    pub fn from_matrix(&self, m: &DMatrix<f64>) -> Element {
        Element::new(self.matrix_coords(m))
    }

    /// Frobenius distance from `m` to the span of the basis.
    pub fn matrix_residual(&self, m: &DMatrix<f64>) -> f64 {
        let c = self.matrix_coords(m);
        (m - self.coords_matrix(&c)).norm()
    }

    pub fn zero(&self) -> Element {
        Element::zeros(self.dim())
    }

    pub fn basis_element(&self, index: usize) -> Element {
        Element::basis_vector(self.dim(), index)
    }

    /// Lie bracket `[x, y]`. Panics on dimension mismatch.
    pub fn bracket(&self, x: &Element, y: &Element) -> Element {
        self.checked_bracket(x, y).expect("bracket: dimension mismatch")
    }

    pub fn checked_bracket(&self, x: &Element, y: &Element) -> Result<Element> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        let (mx, my) = (self.to_matrix(x), self.to_matrix(y));
        Ok(self.from_matrix(&(&mx * &my - &my * &mx)))
    }

    /// Associative product `xy`; requires an associative algebra.
    pub fn product(&self, x: &Element, y: &Element) -> Result<Element> {
        if !self.is_associative() {
            return Err(Error::NotAssociative(self.name().to_string()));
        }
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(self.from_matrix(&(self.to_matrix(x) * self.to_matrix(y))))
    }

    /// The invariant form `⟨x, y⟩`. Panics on dimension mismatch.
    pub fn form(&self, x: &Element, y: &Element) -> f64 {
        self.checked_form(x, y).expect("form: dimension mismatch")
    }

    pub fn checked_form(&self, x: &Element, y: &Element) -> Result<f64> {
        self.check_dim(x)?;
        self.check_dim(y)?;
        Ok(x.coords.dot(&(&self.gram * &y.coords)))
    }

    /// The element `g` with `⟨g, z⟩ = c · coords(z)` for all `z`: the form
    /// gradient of the linear function with coordinate covector `c`.
    pub fn lift_covector(&self, c: &DVector<f64>) -> Element {
        Element::new(&self.gram_inv * c)
    }

    /// The element `g` with `⟨g, z⟩ = Trace(m z)` for all `z` in the algebra.
    pub fn trace_dual(&self, m: &DMatrix<f64>) -> Element {
        let rhs = DVector::from_fn(self.dim(), |a, _| (m * &self.parts.basis[a]).trace());
        self.lift_covector(&rhs)
    }

    pub fn degree_mask(&self, region: Region) -> Vec<bool> {
        self.parts.degrees.iter().map(|&d| region.contains(d)).collect()
    }

    pub fn indices_in(&self, region: Region) -> Vec<usize> {
        (0..self.dim()).filter(|&k| region.contains(self.parts.degrees[k])).collect()
    }

    /// Coordinate projection onto `⊕_{k ∈ region} g_k`.
    pub fn project(&self, x: &Element, region: Region) -> Element {
        let mut c = x.coords.clone();
        for (k, &d) in self.parts.degrees.iter().enumerate() {
            if !region.contains(d) {
                c[k] = 0.0;
            }
        }
        Element::new(c)
    }

    /// Matrix of `ad_x` in coordinates: column `b` holds `[x, b_b]`.
    pub fn ad_matrix(&self, x: &Element) -> DMatrix<f64> {
        let dim = self.dim();
        let mut m = DMatrix::zeros(dim, dim);
        for b in 0..dim {
            let col = self.bracket(x, &self.basis_element(b));
            m.set_column(b, &col.coords);
        }
        m
    }

    /// Component of a coordinate vector orthogonal to the center.
    pub fn remove_center(&self, c: &DVector<f64>) -> DVector<f64> {
        if self.center.ncols() == 0 {
            return c.clone();
        }
        c - &self.center * (self.center.transpose() * c)
    }

    /// Element with coordinates drawn uniformly from `[-1, 1]`.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Element {
        Element::new(DVector::from_fn(self.dim(), |_, _| rng.random_range(-1.0..=1.0)))
    }

    /// Random element of `⊕_{k ∈ region} g_k`.
    pub fn random_in<R: Rng + ?Sized>(&self, rng: &mut R, region: Region) -> Element {
        let x = self.random_element(rng);
        self.project(&x, region)
    }
}
