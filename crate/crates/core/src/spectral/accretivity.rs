//! Strict accretivity of `ρ 𝔇^α`: the analytic lower constant and an
//! empirical minimum of the real part of Rayleigh quotients.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::assembly::OperatorMatrix;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::fracops::{cn_alpha, FractionalOrder, HolderWeight, RayKind, RayOperator};
use crate::geometry::{ConvexDomain, Point, RayGeometry};
use crate::quadrature::gamma;
use crate::trial::TrialField;

/// The constants of a Hölder weight that enter the accretivity bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightConstants {
    pub lambda: f64,
    pub m: f64,
    pub inf_rho: f64,
    pub monotone: bool,
}

impl From<&HolderWeight> for WeightConstants {
    fn from(w: &HolderWeight) -> Self {
        Self {
            lambda: w.lambda,
            m: w.m,
            inf_rho: w.inf_rho,
            monotone: w.monotone,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccretivityReport {
    pub alpha: f64,
    pub dim: usize,
    pub diameter: f64,
    /// `Re(f, 𝔇^α f)_ρ ≥ μ ‖f‖²_ρ`.
    pub mu: f64,
    /// Whether the Hölder correction was dropped because `ρ` is non-increasing along rays.
    pub monotone_branch: bool,
    /// `a₀ + μ inf ρ`.
    pub mu1: f64,
    pub a0: f64,
    pub inf_rho: f64,
    pub empirical_min: Option<f64>,
    pub trials: usize,
    /// Whether the sector vertex is positive, when a sector was fitted.
    pub gamma_positive: Option<bool>,
}

/// `μ = ½ 𝔡^{-α} (1/Γ(1-α) + C_n) - α M 𝔡^{λ-α} / (2 Γ(1-α) (λ-α) inf ρ)`,
/// without the second term when `ρ` is monotone; `μ₁ = a₀ + μ inf ρ`.
pub fn accretivity_constants(
    alpha: FractionalOrder,
    dim: usize,
    diameter: f64,
    weight: WeightConstants,
    a0: f64,
) -> Result<AccretivityReport> {
    let a = alpha.value();
    if !(weight.lambda > a && weight.lambda <= 1.0) {
        return Err(Error::HolderExponent {
            lambda: weight.lambda,
            alpha: a,
        });
    }
    if !(diameter > 0.0) {
        return Err(invalid("diameter", "must be positive"));
    }
    if !(weight.inf_rho > 0.0) {
        return Err(invalid("inf_rho", format!("weight infimum must be positive, got {}", weight.inf_rho)));
    }
    if !(weight.m >= 0.0) {
        return Err(invalid("holder_constant", "must be nonnegative"));
    }
    let g1 = gamma(1.0 - a);
    let head = 0.5 * diameter.powf(-a) * (1.0 / g1 + cn_alpha(dim, alpha)?);
    let mu = if weight.monotone {
        head
    } else {
        head - a * weight.m * diameter.powf(weight.lambda - a)
            / (2.0 * g1 * (weight.lambda - a) * weight.inf_rho)
    };
    Ok(AccretivityReport {
        alpha: a,
        dim,
        diameter,
        mu,
        monotone_branch: weight.monotone,
        mu1: a0 + mu * weight.inf_rho,
        a0,
        inf_rho: weight.inf_rho,
        empirical_min: None,
        trials: 0,
        gamma_positive: None,
    })
}

/// A real operator with a diagonal weighted inner product and node positions.
pub trait WeightedOperator: Sync {
    fn dim(&self) -> usize;
    fn mass(&self) -> &[f64];
    fn points(&self) -> &[Point];
    fn apply(&self, u: &[f64]) -> Vec<f64>;
}

impl WeightedOperator for OperatorMatrix {
    fn dim(&self) -> usize {
        self.mass.len()
    }
    fn mass(&self) -> &[f64] {
        &self.mass
    }
    fn points(&self) -> &[Point] {
        &self.points
    }
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.matrix.mul_vec(u)
    }
}

/// Independent ray matrices stacked into one block-diagonal operator,
/// with the quadrature of `r^{n-1} dr dχ` as mass.
pub struct RayBlockOperator {
    blocks: Vec<DMatrix<f64>>,
    offsets: Vec<usize>,
    mass: Vec<f64>,
    points: Vec<Point>,
}

impl RayBlockOperator {
    pub fn new(geometry: Arc<RayGeometry>, kind: RayKind, alpha: FractionalOrder) -> Self {
        let op = RayOperator::build(geometry.clone(), kind, alpha);
        let mut offsets = vec![0];
        let mut mass = Vec::new();
        let mut points = Vec::new();
        for (k, w) in geometry.measure().iter().enumerate() {
            mass.extend_from_slice(w);
            points.extend((0..w.len()).map(|j| geometry.position(k, j)));
            offsets.push(mass.len());
        }
        Self {
            blocks: op.matrices().to_vec(),
            offsets,
            mass,
            points,
        }
    }
}

impl WeightedOperator for RayBlockOperator {
    fn dim(&self) -> usize {
        self.mass.len()
    }
    fn mass(&self) -> &[f64] {
        &self.mass
    }
    fn points(&self) -> &[Point] {
        &self.points
    }
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let parts = exec::map_range(self.blocks.len(), |k| {
            let x = nalgebra::DVector::from_column_slice(&u[self.offsets[k]..self.offsets[k + 1]]);
            (&self.blocks[k] * x).as_slice().to_vec()
        });
        parts.concat()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RayleighReport {
    /// `min Re(ρ A f, f) / (ρ f, f)` over the trials.
    pub min_quotient: f64,
    pub argmin: usize,
    pub quotients: Vec<f64>,
    pub trials_used: usize,
    pub skipped: usize,
    /// Largest violation of `Re(ρAf, f) = (ρAu, u) + (ρAv, v)`, `u = Re f`,
    /// `v = Im f`, relative to `(ρ f, f)`.
    pub split_error: f64,
}

/// Real parts of the `ρ`-weighted Rayleigh quotients of `op` over trial
/// fields sampled at the operator's nodes. Zero-norm trials are skipped.
pub fn empirical_rayleigh(
    op: &dyn WeightedOperator,
    rho: &(dyn Fn(Point) -> f64 + Sync),
    domain: &ConvexDomain,
    trials: &[TrialField],
) -> Result<RayleighReport> {
    let w: Vec<f64> = op.mass().iter().zip(op.points()).map(|(m, &p)| m * rho(p)).collect();
    let results = exec::map_slice(trials, |t| {
        let f = t.sample(domain, op.points());
        let u: Vec<f64> = f.iter().map(|z| z.re).collect();
        let v: Vec<f64> = f.iter().map(|z| z.im).collect();
        let nn: f64 = f.iter().zip(&w).map(|(z, m)| m * z.norm_sqr()).sum();
        if !(nn > 0.0) {
            return None;
        }
        let au = op.apply(&u);
        let qu: f64 = au.iter().zip(&u).zip(&w).map(|((a, b), m)| m * a * b).sum();
        let qv: f64 = if v.iter().any(|&x| x != 0.0) {
            let av = op.apply(&v);
            av.iter().zip(&v).zip(&w).map(|((a, b), m)| m * a * b).sum()
        } else {
            0.0
        };
        // Re(A f, f) computed on the complex vector directly
        let af: Vec<Complex64> = if v.iter().any(|&x| x != 0.0) {
            let av = op.apply(&v);
            au.iter().zip(&av).map(|(a, b)| Complex64::new(*a, *b)).collect()
        } else {
            au.iter().map(|&a| Complex64::new(a, 0.0)).collect()
        };
        let full: f64 = af.iter().zip(&f).zip(&w).map(|((a, z), m)| (a * z.conj()).re * m).sum();
        Some((full / nn, (full - qu - qv).abs() / nn))
    });
    let mut quotients = Vec::with_capacity(trials.len());
    let mut skipped = 0;
    let mut split_error: f64 = 0.0;
    for r in results {
        match r {
            Some((q, e)) => {
                quotients.push(q);
                split_error = split_error.max(e);
            }
            None => skipped += 1,
        }
    }
    if quotients.is_empty() {
        return Err(Error::Empty("trial fields with nonzero norm"));
    }
    let (argmin, &min_quotient) = quotients
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    Ok(RayleighReport {
        min_quotient,
        argmin,
        trials_used: quotients.len(),
        quotients,
        skipped,
        split_error,
    })
}
