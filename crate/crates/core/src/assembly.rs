//! Matrices of the fractional operators, of the elliptic operator
//! `L u = -div(a ∇u) + ρ 𝔇^α u`, its formal adjoint `L⁺`, the real part
//! `H`, and the associated sesquilinear forms, on an interval or a box.
//!
//! The divergence term uses second-order centered differences with
//! coefficients evaluated at cell faces. Fractional terms act along rays
//! from the mesh's base point: on the interval the ray is the mesh itself;
//! on the box each interior node gets its own ray, sampled at roughly the
//! mesh spacing and read off the tensor grid by bilinear interpolation
//! (boundary nodes carry zero, which is the zero extension).

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::fracops::{ray_matrix, ray_row, FractionalOrder, HolderWeight, RayKind, Side};
use crate::geometry::{ConvexDomain, GridFunction, Point, RayGeometry};
use crate::sparse::CsrMatrix;

/// Tensor-product mesh with a base point for the directional operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mesh {
    /// `[0, length]` with `cells` uniform cells; the base point is `0`.
    Interval { length: f64, cells: usize },
    /// `[0, width] × [0, height]` with `nx × ny` cells.
    Box {
        width: f64,
        height: f64,
        nx: usize,
        ny: usize,
        base: Point,
    },
}

impl Mesh {
    pub fn interval(length: f64, cells: usize) -> Result<Self> {
        let m = Mesh::Interval { length, cells };
        m.validate()?;
        Ok(m)
    }

    pub fn unit_box(cells: usize, base: Point) -> Result<Self> {
        let m = Mesh::Box {
            width: 1.0,
            height: 1.0,
            nx: cells,
            ny: cells,
            base,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let dom = self.domain()?;
        match *self {
            Mesh::Interval { cells, .. } => {
                if cells < 2 {
                    return Err(invalid("cells", "need at least 2 cells"));
                }
            }
            Mesh::Box { nx, ny, base, .. } => {
                if nx < 2 || ny < 2 {
                    return Err(invalid("cells", "need at least 2 cells per direction"));
                }
                if !dom.is_on_boundary(base) {
                    return Err(Error::NotOnBoundary { x: base.x, y: base.y });
                }
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<ConvexDomain> {
        match *self {
            Mesh::Interval { length, .. } => ConvexDomain::interval(length),
            Mesh::Box { width, height, .. } => ConvexDomain::rect(width, height),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Mesh::Interval { .. } => 1,
            Mesh::Box { .. } => 2,
        }
    }

    pub fn base(&self) -> Point {
        match *self {
            Mesh::Interval { .. } => Point::default(),
            Mesh::Box { base, .. } => base,
        }
    }

    pub fn spacing(&self) -> (f64, f64) {
        match *self {
            Mesh::Interval { length, cells } => (length / cells as f64, 1.0),
            Mesh::Box {
                width,
                height,
                nx,
                ny,
                ..
            } => (width / nx as f64, height / ny as f64),
        }
    }

    pub(crate) fn cells(&self) -> (usize, usize) {
        match *self {
            Mesh::Interval { cells, .. } => (cells, 0),
            Mesh::Box { nx, ny, .. } => (nx, ny),
        }
    }

    /// Interior nodes (boundary nodes carry the Dirichlet condition).
    pub fn interior_points(&self) -> Vec<Point> {
        let (hx, hy) = self.spacing();
        match *self {
            Mesh::Interval { cells, .. } => (1..cells).map(|i| Point::new(i as f64 * hx, 0.0)).collect(),
            Mesh::Box { nx, ny, .. } => (1..ny)
                .flat_map(|j| (1..nx).map(move |i| Point::new(i as f64 * hx, j as f64 * hy)))
                .collect(),
        }
    }

    pub fn interior_count(&self) -> usize {
        match *self {
            Mesh::Interval { cells, .. } => cells - 1,
            Mesh::Box { nx, ny, .. } => (nx - 1) * (ny - 1),
        }
    }

    /// Interior index of tensor node `(i, j)`, or `None` on the boundary.
    fn interior_index(&self, i: usize, j: usize) -> Option<usize> {
        let (nx, ny) = self.cells();
        if i == 0 || j == 0 || i >= nx || j >= ny {
            None
        } else {
            Some((j - 1) * (nx - 1) + (i - 1))
        }
    }

    /// Bilinear interpolation weights of a point onto interior nodes.
    fn bilinear(&self, p: Point, out: &mut Vec<(usize, f64)>) {
        let (hx, hy) = self.spacing();
        let (nx, ny) = self.cells();
        let fx = (p.x / hx).clamp(0.0, nx as f64);
        let fy = (p.y / hy).clamp(0.0, ny as f64);
        let i = (fx.floor() as usize).min(nx - 1);
        let j = (fy.floor() as usize).min(ny - 1);
        let s = fx - i as f64;
        let t = fy - j as f64;
        for (di, dj, w) in [
            (0, 0, (1.0 - s) * (1.0 - t)),
            (1, 0, s * (1.0 - t)),
            (0, 1, (1.0 - s) * t),
            (1, 1, s * t),
        ] {
            if w != 0.0 {
                if let Some(k) = self.interior_index(i + di, j + dj) {
                    out.push((k, w));
                }
            }
        }
    }
}

/// Scalar field on the plane.
pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

pub fn constant_field(c: f64) -> Field {
    Arc::new(move |_| c)
}

/// Coefficients before validation: a diagonal `a^{ij}` and an optional
/// weight `ρ` of the fractional term.
#[derive(Clone)]
pub struct CoefficientSpec {
    pub a11: Field,
    /// Ignored on the interval.
    pub a22: Field,
    /// `None` drops the fractional term.
    pub rho: Option<Field>,
    /// Hölder exponent of `ρ`.
    pub lambda: f64,
    /// Analytic Hölder constant; if absent a sample-based estimate is used.
    pub holder_constant: Option<f64>,
}

impl CoefficientSpec {
    pub fn constant(a: f64, rho: Option<f64>) -> Self {
        Self {
            a11: constant_field(a),
            a22: constant_field(a),
            rho: rho.map(constant_field),
            lambda: 1.0,
            holder_constant: None,
        }
    }
}

impl fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSpec")
            .field("rho", &self.rho.is_some())
            .field("lambda", &self.lambda)
            .field("holder_constant", &self.holder_constant)
            .finish_non_exhaustive()
    }
}

/// Validated coefficients on a mesh, with the constants the estimates use.
#[derive(Clone)]
pub struct EllipticCoefficients {
    pub spec: CoefficientSpec,
    pub mesh: Mesh,
    pub alpha: FractionalOrder,
    /// Smallest sampled eigenvalue of `a^{ij}`.
    pub a0: f64,
    /// Largest sampled Frobenius norm `(Σ a_ij²)^{1/2}`.
    pub a1: f64,
    /// Largest sampled eigenvalue of `a^{ij}`.
    pub a_upper: f64,
    /// Hölder data of `ρ`, sampled on a ray fan from the base point.
    pub weight: Option<HolderWeight>,
}

impl fmt::Debug for EllipticCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticCoefficients")
            .field("mesh", &self.mesh)
            .field("alpha", &self.alpha)
            .field("a0", &self.a0)
            .field("a1", &self.a1)
            .field("a_upper", &self.a_upper)
            .finish_non_exhaustive()
    }
}

/// Directions of the fan used to sample `ρ` on two-dimensional meshes.
const HOLDER_DIRECTIONS: usize = 32;

impl EllipticCoefficients {
    pub fn new(spec: CoefficientSpec, mesh: Mesh, alpha: FractionalOrder) -> Result<Self> {
        mesh.validate()?;
        let (hx, hy) = mesh.spacing();
        let (nx, ny) = mesh.cells();
        // nodes and face midpoints
        let samples: Vec<Point> = match mesh {
            Mesh::Interval { .. } => (0..=2 * nx).map(|i| Point::new(0.5 * i as f64 * hx, 0.0)).collect(),
            Mesh::Box { .. } => (0..=2 * ny)
                .flat_map(|j| (0..=2 * nx).map(move |i| Point::new(0.5 * i as f64 * hx, 0.5 * j as f64 * hy)))
                .collect(),
        };
        let dim = mesh.dim();
        let mut a0 = f64::INFINITY;
        let mut at = Point::default();
        let mut a1: f64 = 0.0;
        let mut a_upper: f64 = 0.0;
        for &p in &samples {
            let a11 = (spec.a11)(p);
            let (lo, hi, fro) = if dim == 1 {
                (a11, a11, a11.abs())
            } else {
                let a22 = (spec.a22)(p);
                (a11.min(a22), a11.max(a22), a11.hypot(a22))
            };
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(invalid("coefficients", format!("a is not finite at ({}, {})", p.x, p.y)));
            }
            if lo < a0 {
                a0 = lo;
                at = p;
            }
            a1 = a1.max(fro);
            a_upper = a_upper.max(hi);
        }
        if !(a0 > 0.0) {
            return Err(Error::Ellipticity { a0, x: at.x, y: at.y });
        }

        let weight = match &spec.rho {
            None => None,
            Some(rho) => {
                if !(spec.lambda > alpha.value() && spec.lambda <= 1.0) {
                    return Err(Error::HolderExponent {
                        lambda: spec.lambda,
                        alpha: alpha.value(),
                    });
                }
                let directions = if dim == 1 { 1 } else { HOLDER_DIRECTIONS };
                let geom = Arc::new(RayGeometry::new(mesh.domain()?, mesh.base(), directions, nx.max(ny))?);
                let rho = rho.clone();
                let g = GridFunction::from_real_fn(geom, move |s| rho(s.point))?;
                let mut w = HolderWeight::new(g, spec.lambda, alpha, spec.holder_constant)?;
                // the fan misses most mesh nodes; fold them into inf ρ
                for &p in &samples {
                    let v = (spec.rho.as_ref().expect("present"))(p);
                    if !(v > 0.0) {
                        return Err(Error::NonPositiveWeight { value: v, ray: 0, node: 0 });
                    }
                    w.inf_rho = w.inf_rho.min(v);
                }
                Some(w)
            }
        };
        Ok(Self {
            spec,
            mesh,
            alpha,
            a0,
            a1,
            a_upper,
            weight,
        })
    }

    pub fn inf_rho(&self) -> f64 {
        self.weight.as_ref().map_or(0.0, |w| w.inf_rho)
    }

    fn rho_at(&self, p: Point) -> f64 {
        self.spec.rho.as_ref().map_or(0.0, |r| r(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    IntegralLeft,
    IntegralRight,
    DerivativeLeft,
    DerivativeRight,
    Kipriyanov,
    L,
    LPlus,
    H,
    /// `-a Δ + c` with constant `a`, `c` (comparison operators).
    ConstantCoefficient,
}

impl OperatorKind {
    fn ray_kind(self) -> Option<RayKind> {
        match self {
            Self::IntegralLeft => Some(RayKind::Integral(Side::Left)),
            Self::IntegralRight => Some(RayKind::Integral(Side::Right)),
            Self::DerivativeLeft => Some(RayKind::Derivative(Side::Left)),
            Self::DerivativeRight => Some(RayKind::Derivative(Side::Right)),
            Self::Kipriyanov => Some(RayKind::Kipriyanov),
            _ => None,
        }
    }
}

/// A square matrix with the diagonal mass of its weighted inner product
/// `(u, v) = Σ m_i u_i conj(v_i)`.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub matrix: CsrMatrix,
    pub mass: Vec<f64>,
    pub points: Vec<Point>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(u)
    }

    pub fn apply_complex(&self, u: &[Complex64]) -> Vec<Complex64> {
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let ar = self.matrix.mul_vec(&re);
        let ai = self.matrix.mul_vec(&im);
        ar.into_iter().zip(ai).map(|(a, b)| Complex64::new(a, b)).collect()
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| m * a * b).sum()
    }

    pub fn inner_complex(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        self.mass.iter().zip(u).zip(v).map(|((m, a), b)| a * b.conj() * *m).sum()
    }

    /// `(A u, u) / (u, u)`.
    pub fn rayleigh(&self, u: &[Complex64]) -> Option<Complex64> {
        let nn = self.inner_complex(u, u).re;
        if nn <= 0.0 {
            return None;
        }
        Some(self.inner_complex(&self.apply_complex(u), u) / nn)
    }

    /// `max |A_ij m_i - A_ji m_j| / max |A_ij m_i|`: zero iff `A` is
    /// self-adjoint in the weighted inner product.
    pub fn mass_asymmetry(&self) -> f64 {
        self.matrix.scale_rows_cols(&self.mass, &vec![1.0; self.dim()]).relative_asymmetry()
    }

    /// The adjoint in the weighted inner product, `M⁻¹ Aᵀ M`.
    pub fn weighted_adjoint(&self) -> CsrMatrix {
        let inv: Vec<f64> = self.mass.iter().map(|m| 1.0 / m).collect();
        self.matrix.transpose().scale_rows_cols(&inv, &self.mass)
    }
}

/// Fractional operator of `kind` on the mesh. On the interval every node
/// `0 … N` is a degree of freedom; on the box only interior nodes are.
pub fn fractional_matrix(kind: RayKind, mesh: &Mesh, alpha: FractionalOrder) -> Result<OperatorMatrix> {
    let op_kind = match kind {
        RayKind::Integral(Side::Left) => OperatorKind::IntegralLeft,
        RayKind::Integral(Side::Right) => OperatorKind::IntegralRight,
        RayKind::Derivative(Side::Left) => OperatorKind::DerivativeLeft,
        RayKind::Derivative(Side::Right) => OperatorKind::DerivativeRight,
        RayKind::Kipriyanov => OperatorKind::Kipriyanov,
        RayKind::Truncated(..) => {
            return Err(Error::Unsupported("truncated derivatives are not assembled".into()))
        }
    };
    mesh.validate()?;
    match *mesh {
        Mesh::Interval { length, cells } => {
            let h = length / cells as f64;
            let nodes: Vec<f64> = (0..=cells).map(|i| i as f64 * h).collect();
            let m = ray_matrix(kind, &nodes, alpha, 1);
            let mut mass = vec![h; cells + 1];
            mass[0] = 0.5 * h;
            mass[cells] = 0.5 * h;
            Ok(OperatorMatrix {
                kind: op_kind,
                matrix: CsrMatrix::from_dense(&m),
                mass,
                points: nodes.iter().map(|&x| Point::new(x, 0.0)).collect(),
            })
        }
        Mesh::Box { .. } => Ok(OperatorMatrix {
            kind: op_kind,
            matrix: box_fractional(kind, mesh, alpha)?,
            mass: vec![mesh_cell_area(mesh); mesh.interior_count()],
            points: mesh.interior_points(),
        }),
    }
}

pub(crate) fn mesh_cell_area(mesh: &Mesh) -> f64 {
    let (hx, hy) = mesh.spacing();
    match mesh {
        Mesh::Interval { .. } => hx,
        Mesh::Box { .. } => hx * hy,
    }
}

/// Interior-node fractional matrix on the box: one ray per target node.
fn box_fractional(kind: RayKind, mesh: &Mesh, alpha: FractionalOrder) -> Result<CsrMatrix> {
    let dom = mesh.domain()?;
    let base = mesh.base();
    let (hx, hy) = mesh.spacing();
    let step = hx.min(hy);
    let points = mesh.interior_points();
    let left = !matches!(kind, RayKind::Integral(Side::Right) | RayKind::Derivative(Side::Right));
    let rows = exec::map_range(points.len(), |q| {
        let target = points[q];
        let r = target.dist(base);
        let e = Point::new((target.x - base.x) / r, (target.y - base.y) / r);
        let d = dom.chord_length(base, e).max(r);
        let (nodes, k) = if left {
            let m = ((r / step).ceil() as usize).max(1);
            ((0..=m).map(|j| r * j as f64 / m as f64).collect::<Vec<_>>(), m)
        } else {
            let m = (((d - r) / step).ceil() as usize).max(1);
            ((0..=m).map(|j| r + (d - r) * j as f64 / m as f64).collect::<Vec<_>>(), 0)
        };
        let coeffs = ray_row(kind, &nodes, k, alpha.value(), 2);
        let mut entries = Vec::with_capacity(4 * nodes.len());
        for (j, (&c, &t)) in coeffs.iter().zip(&nodes).enumerate() {
            if c == 0.0 {
                continue;
            }
            if j == k {
                entries.push((q, c));
                continue;
            }
            let start = entries.len();
            mesh.bilinear(base.along(e, t), &mut entries);
            for en in &mut entries[start..] {
                en.1 *= c;
            }
        }
        entries
    });
    Ok(CsrMatrix::from_rows(points.len(), rows))
}

/// `-div(a ∇u)` on interior nodes with face-evaluated coefficients.
fn divergence_matrix(mesh: Mesh, a11: &Field, a22: &Field) -> CsrMatrix {
    let (hx, hy) = mesh.spacing();
    match mesh {
        Mesh::Interval { cells, .. } => {
            let rows = (1..cells)
                .map(|i| {
                    let x = i as f64 * hx;
                    let aw = a11(Point::new(x - 0.5 * hx, 0.0)) / (hx * hx);
                    let ae = a11(Point::new(x + 0.5 * hx, 0.0)) / (hx * hx);
                    let mut row = vec![(i - 1, aw + ae)];
                    if i > 1 {
                        row.push((i - 2, -aw));
                    }
                    if i + 1 < cells {
                        row.push((i, -ae));
                    }
                    row
                })
                .collect();
            CsrMatrix::from_rows(cells - 1, rows)
        }
        Mesh::Box { nx, ny, .. } => {
            let rows = (1..ny)
                .flat_map(|j| (1..nx).map(move |i| (i, j)))
                .map(|(i, j)| {
                    let p = Point::new(i as f64 * hx, j as f64 * hy);
                    let aw = a11(Point::new(p.x - 0.5 * hx, p.y)) / (hx * hx);
                    let ae = a11(Point::new(p.x + 0.5 * hx, p.y)) / (hx * hx);
                    let as_ = a22(Point::new(p.x, p.y - 0.5 * hy)) / (hy * hy);
                    let an = a22(Point::new(p.x, p.y + 0.5 * hy)) / (hy * hy);
                    let me = mesh.interior_index(i, j).expect("interior");
                    let mut row = vec![(me, aw + ae + as_ + an)];
                    for (ii, jj, c) in [(i - 1, j, aw), (i + 1, j, ae), (i, j - 1, as_), (i, j + 1, an)] {
                        if let Some(k) = mesh.interior_index(ii, jj) {
                            row.push((k, -c));
                        }
                    }
                    row
                })
                .collect();
            CsrMatrix::from_rows(mesh.interior_count(), rows)
        }
    }
}

/// Fractional matrix restricted to the interior degrees of freedom.
fn interior_fractional(kind: RayKind, coeffs: &EllipticCoefficients) -> Result<CsrMatrix> {
    let full = fractional_matrix(kind, &coeffs.mesh, coeffs.alpha)?;
    Ok(match coeffs.mesh {
        Mesh::Interval { cells, .. } => {
            let rows = (1..cells)
                .map(|i| {
                    full.matrix
                        .row(i)
                        .filter(|&(j, _)| j >= 1 && j < cells)
                        .map(|(j, v)| (j - 1, v))
                        .collect()
                })
                .collect();
            CsrMatrix::from_rows(cells - 1, rows)
        }
        Mesh::Box { .. } => full.matrix,
    })
}

/// Assembles `kind` on the coefficients' mesh. `L`, `L⁺` and `H` act on
/// interior nodes with Dirichlet conditions eliminated.
pub fn assemble_operator(kind: OperatorKind, coeffs: &EllipticCoefficients) -> Result<OperatorMatrix> {
    if let Some(rk) = kind.ray_kind() {
        return fractional_matrix(rk, &coeffs.mesh, coeffs.alpha);
    }
    let mesh = coeffs.mesh;
    let points = mesh.interior_points();
    let mass = vec![mesh_cell_area(&mesh); points.len()];
    let rho: Vec<f64> = points.iter().map(|&p| coeffs.rho_at(p)).collect();
    let div = divergence_matrix(mesh, &coeffs.spec.a11, &coeffs.spec.a22);
    let matrix = match kind {
        OperatorKind::L => {
            if coeffs.spec.rho.is_some() {
                let k = interior_fractional(RayKind::Kipriyanov, coeffs)?;
                div.lincomb(1.0, &k.scale_rows_cols(&rho, &vec![1.0; rho.len()]), 1.0)?
            } else {
                div
            }
        }
        OperatorKind::LPlus => {
            if coeffs.spec.rho.is_some() {
                let k = interior_fractional(RayKind::Derivative(Side::Right), coeffs)?;
                div.lincomb(1.0, &k.scale_rows_cols(&vec![1.0; rho.len()], &rho), 1.0)?
            } else {
                div
            }
        }
        OperatorKind::H => {
            let l = assemble_operator(OperatorKind::L, coeffs)?;
            l.matrix.lincomb(0.5, &l.weighted_adjoint(), 0.5)?
        }
        OperatorKind::ConstantCoefficient => {
            return Err(invalid("kind", "use constant_coefficient_operator for comparators"))
        }
        _ => unreachable!("fractional kinds handled above"),
    };
    Ok(OperatorMatrix {
        kind,
        matrix,
        mass,
        points,
    })
}

/// `-a Δ_h + c` on the interior nodes of `mesh`.
pub fn constant_coefficient_operator(mesh: &Mesh, a: f64, c: f64) -> Result<OperatorMatrix> {
    mesh.validate()?;
    let div = divergence_matrix(*mesh, &constant_field(a), &constant_field(a));
    let n = div.nrows();
    let matrix = div.lincomb(1.0, &CsrMatrix::identity(n), c)?;
    Ok(OperatorMatrix {
        kind: OperatorKind::ConstantCoefficient,
        matrix,
        mass: vec![mesh_cell_area(mesh); n],
        points: mesh.interior_points(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    /// `t[u, v] = (a ∇u, ∇v) + (ρ 𝔇^α u, v)`
    T,
    /// `h = (t + t*)/2`
    H,
}

/// Matrix `F` of a form in the nodal basis: `form[u, v] = vᵀ F u`.
#[derive(Debug, Clone)]
pub struct FormMatrix {
    pub which: FormKind,
    pub matrix: CsrMatrix,
    pub mass: Vec<f64>,
}

impl FormMatrix {
    pub fn eval(&self, u: &[f64], v: &[f64]) -> f64 {
        self.matrix.mul_vec(u).iter().zip(v).map(|(a, b)| a * b).sum()
    }

    pub fn eval_complex(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        let re: Vec<f64> = u.iter().map(|z| z.re).collect();
        let im: Vec<f64> = u.iter().map(|z| z.im).collect();
        let ar = self.matrix.mul_vec(&re);
        let ai = self.matrix.mul_vec(&im);
        ar.iter()
            .zip(&ai)
            .zip(v)
            .map(|((a, b), w)| Complex64::new(*a, *b) * w.conj())
            .sum()
    }
}

/// Face-sum gradient form plus the mass-weighted fractional term.
pub fn form_matrix(coeffs: &EllipticCoefficients, which: FormKind) -> Result<FormMatrix> {
    let l = assemble_operator(OperatorKind::L, coeffs)?;
    // (a∇u, ∇v) summed over faces equals vᵀ M (-div a∇) u exactly
    let ones = vec![1.0; l.dim()];
    let t = l.matrix.scale_rows_cols(&l.mass, &ones);
    let matrix = match which {
        FormKind::T => t,
        FormKind::H => t.lincomb(0.5, &t.transpose(), 0.5)?,
    };
    Ok(FormMatrix {
        which,
        matrix,
        mass: l.mass,
    })
}

/// `‖u‖²_{H¹₀}` as the face-sum of squared difference quotients.
pub fn h1_seminorm_sq(mesh: &Mesh, u: &[f64]) -> Result<f64> {
    if u.len() != mesh.interior_count() {
        return Err(Error::LengthMismatch(format!("expected {} interior values", mesh.interior_count())));
    }
    mesh.validate()?;
    let one = constant_field(1.0);
    let lap = divergence_matrix(*mesh, &one, &one);
    let area = mesh_cell_area(mesh);
    Ok(area * lap.mul_vec(u).iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
}

/// `|(-div(a∇u), v) - (a∇u, ∇v)|`: the left side uses the difference
/// operator on interior nodes, the right side nodal centered gradients
/// (second-order one-sided at the boundary) with trapezoid weights.
/// `u` and `v` are interior values; boundary values are zero.
pub fn green_residual(u: &[f64], v: &[f64], coeffs: &EllipticCoefficients) -> Result<f64> {
    let mesh = coeffs.mesh;
    let n = mesh.interior_count();
    if u.len() != n || v.len() != n {
        return Err(Error::LengthMismatch(format!("expected {n} interior values")));
    }
    let div = divergence_matrix(mesh, &coeffs.spec.a11, &coeffs.spec.a22);
    let area = mesh_cell_area(&mesh);
    let lhs: f64 = area * div.mul_vec(u).iter().zip(v).map(|(a, b)| a * b).sum::<f64>();

    let (hx, hy) = mesh.spacing();
    let rhs = match mesh {
        Mesh::Interval { cells, .. } => {
            let full = |w: &[f64]| {
                let mut f = vec![0.0; cells + 1];
                f[1..cells].copy_from_slice(w);
                f
            };
            let (fu, fv) = (full(u), full(v));
            let (gu, gv) = (gradient_1d(&fu, hx), gradient_1d(&fv, hx));
            (0..=cells)
                .map(|i| {
                    let q = if i == 0 || i == cells { 0.5 * hx } else { hx };
                    q * (coeffs.spec.a11)(Point::new(i as f64 * hx, 0.0)) * gu[i] * gv[i]
                })
                .sum()
        }
        Mesh::Box { nx, ny, .. } => {
            let full = |w: &[f64]| {
                let mut f = vec![vec![0.0; nx + 1]; ny + 1];
                for j in 1..ny {
                    for i in 1..nx {
                        f[j][i] = w[mesh.interior_index(i, j).expect("interior")];
                    }
                }
                f
            };
            let (fu, fv) = (full(u), full(v));
            let column = |f: &[Vec<f64>], i: usize| -> Vec<f64> { f.iter().map(|row| row[i]).collect() };
            let gxu: Vec<Vec<f64>> = fu.iter().map(|row| gradient_1d(row, hx)).collect();
            let gxv: Vec<Vec<f64>> = fv.iter().map(|row| gradient_1d(row, hx)).collect();
            let gyu: Vec<Vec<f64>> = (0..=nx).map(|i| gradient_1d(&column(&fu, i), hy)).collect();
            let gyv: Vec<Vec<f64>> = (0..=nx).map(|i| gradient_1d(&column(&fv, i), hy)).collect();
            let mut s = 0.0;
            for j in 0..=ny {
                for i in 0..=nx {
                    let wx = if i == 0 || i == nx { 0.5 } else { 1.0 };
                    let wy = if j == 0 || j == ny { 0.5 } else { 1.0 };
                    let p = Point::new(i as f64 * hx, j as f64 * hy);
                    s += wx * wy * hx * hy
                        * ((coeffs.spec.a11)(p) * gxu[j][i] * gxv[j][i]
                            + (coeffs.spec.a22)(p) * gyu[i][j] * gyv[i][j]);
                }
            }
            s
        }
    };
    Ok((lhs - rhs).abs())
}

fn gradient_1d(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            if i == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
            } else {
                (f[i + 1] - f[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

#[cfg(test)]
mod tests;
