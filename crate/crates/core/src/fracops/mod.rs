//! Directional fractional integrals and derivatives along rays, the
//! Kipriyanov derivative, and numerical checks of the identities that tie
//! them together (inversion, adjointness, representability).

mod kernel;
pub mod rows;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::geometry::{holder_estimate, weighted_inner_product, GridFunction, RayGeometry};

pub use kernel::{cn_alpha, cn_alpha_expanded, kernel_k, kernel_mass};

/// Fractional order `α ∈ (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha > 0.0 && alpha < 1.0 {
            Ok(Self(alpha))
        } else {
            Err(invalid("alpha", format!("fractional order must lie in (0, 1), got {alpha}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(a: FractionalOrder) -> f64 {
        a.0
    }
}

/// Truncation parameter `ε > 0` of the truncated derivatives.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct TruncationParam(f64);

impl TruncationParam {
    pub fn new(eps: f64) -> Result<Self> {
        if eps > 0.0 && eps.is_finite() {
            Ok(Self(eps))
        } else {
            Err(invalid("epsilon", format!("truncation must be positive, got {eps}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// A positive Hölder-continuous weight `ρ ∈ Lip λ` with its constants.
#[derive(Debug, Clone)]
pub struct HolderWeight {
    pub rho: GridFunction,
    pub lambda: f64,
    /// Hölder constant used in estimates: the analytic value when supplied,
    /// otherwise the sample-based lower bound.
    pub m: f64,
    pub m_is_analytic: bool,
    pub inf_rho: f64,
    pub monotone: bool,
}

impl HolderWeight {
    pub fn new(
        rho: GridFunction,
        lambda: f64,
        alpha: FractionalOrder,
        analytic_m: Option<f64>,
    ) -> Result<Self> {
        let est = holder_estimate(&rho, lambda, alpha.value())?;
        let (m, m_is_analytic) = match analytic_m {
            Some(m) if m >= 0.0 && m.is_finite() => (m, true),
            Some(m) => return Err(invalid("holder_constant", format!("must be ≥ 0, got {m}"))),
            None => (est.sampled_constant, false),
        };
        Ok(Self {
            rho,
            lambda,
            m,
            m_is_analytic,
            inf_rho: est.inf_rho,
            monotone: est.monotone,
        })
    }
}

/// Which discrete operator a ray matrix represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RayKind {
    Integral(Side),
    /// Exact derivative of the piecewise-linear interpolant (the ε → 0 limit).
    Derivative(Side),
    Truncated(Side, f64),
    Kipriyanov,
}

/// Writes one row of `kind` for target node `k` of a ray.
pub fn ray_row(kind: RayKind, nodes: &[f64], k: usize, alpha: f64, dim: usize) -> Vec<f64> {
    let mut row = vec![0.0; nodes.len()];
    match kind {
        RayKind::Integral(Side::Left) => rows::integral_left(nodes, k, alpha, dim, &mut row),
        RayKind::Integral(Side::Right) => rows::integral_right(nodes, k, alpha, &mut row),
        RayKind::Derivative(Side::Left) => rows::derivative_left(nodes, k, alpha, dim, &mut row),
        RayKind::Derivative(Side::Right) => rows::derivative_right(nodes, k, alpha, &mut row),
        RayKind::Truncated(Side::Left, eps) => {
            rows::truncated_left(nodes, k, alpha, dim, eps, &mut row)
        }
        RayKind::Truncated(Side::Right, eps) => {
            rows::truncated_right(nodes, k, alpha, eps, &mut row)
        }
        RayKind::Kipriyanov => rows::kipriyanov(nodes, k, alpha, dim, &mut row),
    }
    row
}

/// Dense matrix of `kind` on a single ray.
pub fn ray_matrix(kind: RayKind, nodes: &[f64], alpha: FractionalOrder, dim: usize) -> DMatrix<f64> {
    let n = nodes.len();
    let rows = exec::map_range(n, |k| ray_row(kind, nodes, k, alpha.value(), dim));
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

/// One dense matrix per ray of a [`RayGeometry`]; rays do not interact.
#[derive(Debug, Clone)]
pub struct RayOperator {
    pub kind: RayKind,
    pub alpha: FractionalOrder,
    geometry: Arc<RayGeometry>,
    matrices: Vec<DMatrix<f64>>,
}

impl RayOperator {
    pub fn build(geometry: Arc<RayGeometry>, kind: RayKind, alpha: FractionalOrder) -> Self {
        let dim = geometry.dim();
        let matrices = exec::map_slice(geometry.grids(), |g| ray_matrix(kind, g.nodes(), alpha, dim));
        Self {
            kind,
            alpha,
            geometry,
            matrices,
        }
    }

    pub fn geometry(&self) -> &Arc<RayGeometry> {
        &self.geometry
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.matrices
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !Arc::ptr_eq(f.geometry(), &self.geometry) && **f.geometry() != *self.geometry {
            return Err(Error::GeometryMismatch);
        }
        let values = exec::map_range(self.matrices.len(), |k| {
            apply_real(&self.matrices[k], f.ray(k))
        });
        Ok(GridFunction::from_parts_unchecked(self.geometry.clone(), values))
    }
}

fn apply_real(m: &DMatrix<f64>, x: &[Complex64]) -> Vec<Complex64> {
    let re = DVector::from_iterator(x.len(), x.iter().map(|z| z.re));
    let im = DVector::from_iterator(x.len(), x.iter().map(|z| z.im));
    let (ar, ai) = (m * re, m * im);
    ar.iter().zip(ai.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

fn apply_kind(f: &GridFunction, kind: RayKind, alpha: FractionalOrder) -> GridFunction {
    let geom = f.geometry().clone();
    let dim = geom.dim();
    let values = exec::map_range(geom.ray_count(), |k| {
        let nodes = geom.grids()[k].nodes();
        let vals = f.ray(k);
        (0..nodes.len())
            .map(|i| {
                let row = ray_row(kind, nodes, i, alpha.value(), dim);
                row.iter()
                    .zip(vals)
                    .filter(|(c, _)| **c != 0.0)
                    .map(|(c, v)| v * *c)
                    .sum()
            })
            .collect()
    });
    GridFunction::from_parts_unchecked(geom, values)
}

/// Left `r^{1-n} (1/Γ(α)) ∫_0^r t^{n-1} g (r-t)^{α-1} dt` or right
/// `(1/Γ(α)) ∫_r^d g (t-r)^{α-1} dt` directional fractional integral.
pub fn frac_integral(g: &GridFunction, alpha: FractionalOrder, side: Side) -> GridFunction {
    apply_kind(g, RayKind::Integral(side), alpha)
}

/// Derivative of the piecewise-linear interpolant with the difference
/// integral taken over the whole ray: the ε → 0 limit on a fixed grid.
pub fn frac_derivative(f: &GridFunction, alpha: FractionalOrder, side: Side) -> GridFunction {
    apply_kind(f, RayKind::Derivative(side), alpha)
}

/// ε-truncated derivative. The flag is set when `ε ≥ 𝔡`, in which case
/// every node falls in the closed-form branch.
pub fn truncated_frac_derivative(
    f: &GridFunction,
    alpha: FractionalOrder,
    eps: TruncationParam,
    side: Side,
) -> (GridFunction, bool) {
    let degenerate = eps.value() >= f.geometry().domain().diameter();
    if degenerate {
        log::warn!(
            "truncation ε = {} is not below the diameter; only the closed-form branch is used",
            eps.value()
        );
    }
    if eps.value() < f.geometry().max_spacing() {
        log::warn!("truncation ε = {} is below the grid spacing", eps.value());
    }
    (apply_kind(f, RayKind::Truncated(side, eps.value()), alpha), degenerate)
}

pub fn kipriyanov_derivative(f: &GridFunction, alpha: FractionalOrder) -> GridFunction {
    apply_kind(f, RayKind::Kipriyanov, alpha)
}

/// `ε_k = 𝔡 2^{-k}`, `k = 0 … levels-1`.
pub fn geometric_schedule(diameter: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| diameter * 0.5f64.powi(k as i32)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitDiagnostic {
    /// Successive differences shrink and the last one is within ten times
    /// the estimated discretization error.
    Converged,
    /// Successive differences shrink, but are still above the
    /// discretization error at the finest admissible ε.
    Cauchy,
    /// Successive differences do not shrink: no evidence of a limit.
    Divergent,
}

#[derive(Debug, Clone)]
pub struct LimitResult {
    /// Truncated derivative at the smallest admissible ε.
    pub last_iterate: GridFunction,
    /// Exact derivative of the interpolant (the grid's own ε → 0 limit).
    pub grid_limit: GridFunction,
    /// ε values actually used.
    pub schedule: Vec<f64>,
    /// Values dropped for lying below twice the largest grid spacing.
    pub dropped: usize,
    /// `‖D_{ε_k} f - D_{ε_{k-1}} f‖₂`, `k ≥ 1`.
    pub differences: Vec<f64>,
    /// Relative size of the last difference, `differences.last / ‖last_iterate‖`.
    pub last_relative_difference: f64,
    /// Relative discretization-error estimate from a twice coarser grid.
    pub discretization_estimate: f64,
    /// Geometric-mean ratio of successive differences over the trailing half.
    pub contraction: f64,
    pub diagnostic: LimitDiagnostic,
}

/// Runs the truncated derivative down an ε schedule and diagnoses whether
/// the iterates form a Cauchy sequence in `L₂`.
pub fn frac_derivative_limit(
    f: &GridFunction,
    alpha: FractionalOrder,
    side: Side,
    schedule: &[f64],
) -> Result<LimitResult> {
    if schedule.is_empty() {
        return Err(Error::Empty("ε schedule"));
    }
    if schedule.iter().any(|e| !(*e > 0.0)) || schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("schedule", "ε values must be positive and strictly decreasing"));
    }
    let floor = 2.0 * f.geometry().max_spacing();
    let used: Vec<f64> = schedule.iter().copied().filter(|&e| e >= floor * (1.0 - 1e-12)).collect();
    let dropped = schedule.len() - used.len();
    if dropped > 0 {
        log::warn!("dropped {dropped} ε values below twice the grid spacing {floor:e}");
    }
    if used.is_empty() {
        return Err(invalid("schedule", format!("every ε lies below twice the grid spacing {floor:e}")));
    }
    let iterates: Vec<GridFunction> = used
        .iter()
        .map(|&e| apply_kind(f, RayKind::Truncated(side, e), alpha))
        .collect();
    let differences: Vec<f64> = iterates
        .windows(2)
        .map(|w| w[1].sub(&w[0]).map(|d| d.norm_interior()))
        .collect::<Result<_>>()?;
    let last_iterate = iterates.last().cloned().expect("nonempty");
    let grid_limit = frac_derivative(f, alpha, side);

    let scale = last_iterate.norm_interior();
    let last_relative_difference = match differences.last() {
        Some(&d) if scale > 0.0 => d / scale,
        _ => 0.0,
    };
    let discretization_estimate = richardson_estimate(f, alpha, side, &grid_limit);

    let tail = &differences[differences.len() / 2..];
    let contraction = if tail.len() >= 2 && tail.iter().all(|&d| d > 0.0) {
        let ratio = tail[tail.len() - 1] / tail[0];
        ratio.powf(1.0 / (tail.len() - 1) as f64)
    } else {
        0.0
    };
    let all_zero = differences.iter().all(|&d| d == 0.0);
    let diagnostic = if all_zero || last_relative_difference <= 10.0 * discretization_estimate {
        if contraction >= 1.0 {
            LimitDiagnostic::Divergent
        } else {
            LimitDiagnostic::Converged
        }
    } else if contraction < 1.0 {
        LimitDiagnostic::Cauchy
    } else {
        LimitDiagnostic::Divergent
    };
    Ok(LimitResult {
        last_iterate,
        grid_limit,
        schedule: used,
        dropped,
        differences,
        last_relative_difference,
        discretization_estimate,
        contraction,
        diagnostic,
    })
}

/// Relative difference between the grid-limit derivative on this grid and
/// on the grid with every other node, compared at the shared nodes.
fn richardson_estimate(f: &GridFunction, alpha: FractionalOrder, side: Side, fine: &GridFunction) -> f64 {
    let Some(coarse_geom) = f.geometry().coarsened() else {
        return 0.0;
    };
    let coarse_geom = Arc::new(coarse_geom);
    let restrict = |g: &GridFunction| {
        let vals = g
            .values()
            .iter()
            .map(|row| row.iter().copied().step_by(2).collect())
            .collect();
        GridFunction::from_parts_unchecked(coarse_geom.clone(), vals)
    };
    let coarse = frac_derivative(&restrict(f), alpha, side);
    let fine_r = restrict(fine);
    let scale = fine_r.norm_interior();
    if scale == 0.0 {
        return 0.0;
    }
    coarse.sub(&fine_r).map(|d| d.norm_interior() / scale).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointReport {
    /// `|(D_{0+} f, g) - (f, D_{d-} g)|`.
    pub residual: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub lhs: Complex64Repr,
    pub rhs: Complex64Repr,
}

/// Serializable complex number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Complex64Repr {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for Complex64Repr {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Builds `f = 𝕴_{0+} φ` and `g = 𝕴_{d-} ψ` and compares
/// `(𝔇_{0+} f, g)` with `(f, 𝔇_{d-} g)`.
pub fn adjoint_residual(
    phi: &GridFunction,
    psi: &GridFunction,
    alpha: FractionalOrder,
) -> Result<AdjointReport> {
    if !phi.same_geometry(psi) {
        return Err(Error::GeometryMismatch);
    }
    let f = frac_integral(phi, alpha, Side::Left);
    let g = frac_integral(psi, alpha, Side::Right);
    let df = frac_derivative(&f, alpha, Side::Left);
    let dg = frac_derivative(&g, alpha, Side::Right);
    let lhs = weighted_inner_product(&df, &g)?;
    let rhs = weighted_inner_product(&f, &dg)?;
    Ok(AdjointReport {
        residual: (lhs - rhs).norm(),
        norm_f: f.norm(),
        norm_g: g.norm(),
        lhs: lhs.into(),
        rhs: rhs.into(),
    })
}

/// `φ = 𝔇_{0+}(ρ f)` and `‖𝕴_{0+} φ - ρ f‖ / ‖ρ f‖` (zero when `ρ f = 0`).
pub fn representability_solve(
    weight: &HolderWeight,
    f: &GridFunction,
    alpha: FractionalOrder,
) -> Result<(GridFunction, f64)> {
    let rf = weight.rho.mul(f)?;
    let phi = frac_derivative(&rf, alpha, Side::Left);
    let back = frac_integral(&phi, alpha, Side::Left);
    let denom = rf.norm_interior();
    let residual = if denom == 0.0 {
        0.0
    } else {
        back.sub(&rf)?.norm_interior() / denom
    };
    Ok((phi, residual))
}
