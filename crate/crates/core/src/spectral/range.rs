//! Numerical range sampling in the weighted inner product, minimal sector
//! fits, and the analytic sector parameters.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::assembly::OperatorMatrix;
use crate::error::{invalid, Error, Result};
use crate::exec;
use crate::geometry::ConvexDomain;
use crate::trial::trial_ensemble;

/// Lanczos steps per support direction.
const LANCZOS_STEPS: usize = 120;

/// Support directions used for boundary points of the numerical range.
const SUPPORT_ANGLES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeStrategy {
    /// Gaussian complex vectors.
    Random,
    /// Smooth boundary-vanishing complex trial fields.
    Smooth,
    /// Coordinate vectors: the weighted diagonal entries.
    Coordinate,
    /// Boundary points: extreme eigenvectors of `Re(e^{-iφ} A)`.
    Extremal,
    /// A blend of all of the above.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangeSample {
    pub z: Complex64,
    pub strategy: RangeStrategy,
}

fn quotient(op: &OperatorMatrix, u: &[Complex64]) -> Option<Complex64> {
    op.rayleigh(u).filter(|z| z.re.is_finite() && z.im.is_finite())
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(StandardNormal.sample(&mut *rng), StandardNormal.sample(&mut *rng)))
        .collect()
}

/// Ritz vectors for the smallest and largest eigenvalues of a Hermitian
/// operator, by Lanczos with full reorthogonalization.
fn hermitian_extremes(
    n: usize,
    apply: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> [Vec<Complex64>; 2] {
    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let norm = |a: &[Complex64]| a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut v = random_vector(n, rng);
    let nv = norm(&v);
    v.iter_mut().for_each(|z| *z /= nv);
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    for j in 0..steps.clamp(1, n) {
        let mut w = apply(&v);
        alpha.push(dot(&v, &w).re);
        basis.push(v.clone());
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bn = norm(&w);
        if bn <= 1e-14 * alpha[j].abs().max(1.0) || j + 1 == steps.min(n) {
            break;
        }
        beta.push(bn);
        v = w.into_iter().map(|z| z / bn).collect();
    }
    let k = alpha.len();
    let t = DMatrix::from_fn(k, k, |i, j| match i.abs_diff(j) {
        0 => alpha[i],
        1 => beta[i.min(j)],
        _ => 0.0,
    });
    let eig = SymmetricEigen::new(t);
    let (mut lo, mut hi) = (0, 0);
    for i in 0..k {
        if eig.eigenvalues[i] < eig.eigenvalues[lo] {
            lo = i;
        }
        if eig.eigenvalues[i] > eig.eigenvalues[hi] {
            hi = i;
        }
    }
    [lo, hi].map(|c| {
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (q, b) in basis.iter().enumerate() {
            let y = eig.eigenvectors[(q, c)];
            x.iter_mut().zip(b).for_each(|(s, z)| *s += z * y);
        }
        x
    })
}

/// Boundary points `(Au, u)/(u, u)` for extreme eigenvectors of the
/// Hermitian operators `Re(e^{-iφ} B)`, `B = M^{1/2} A M^{-1/2}`.
fn extremal_points(op: &OperatorMatrix, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    let n = op.dim();
    let d: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let dinv: Vec<f64> = d.iter().map(|v| 1.0 / v).collect();
    let b = op.matrix.scale_rows_cols(&d, &dinv);
    let bt = b.transpose();
    let cmul = |m: &crate::sparse::CsrMatrix, x: &[Complex64]| -> Vec<Complex64> {
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        m.mul_vec(&re).into_iter().zip(m.mul_vec(&im)).map(|(a, b)| Complex64::new(a, b)).collect()
    };
    let seeds: Vec<u64> = (0..SUPPORT_ANGLES).map(|_| rand::Rng::random(rng)).collect();
    let per_angle = exec::map_range(SUPPORT_ANGLES, |k| {
        let phi = PI * k as f64 / SUPPORT_ANGLES as f64;
        let e = Complex64::from_polar(1.0, -phi);
        // Re(e^{-iφ}B) x = (e^{-iφ} B x + e^{iφ} Bᵀ x)/2 for real B
        let apply = |x: &[Complex64]| -> Vec<Complex64> {
            cmul(&b, x)
                .into_iter()
                .zip(cmul(&bt, x))
                .map(|(p, q)| 0.5 * (e * p + e.conj() * q))
                .collect()
        };
        let mut local = ChaCha8Rng::seed_from_u64(seeds[k]);
        hermitian_extremes(n, &apply, LANCZOS_STEPS, &mut local)
            .iter()
            .filter_map(|y| {
                let u: Vec<Complex64> = y.iter().zip(&dinv).map(|(z, s)| z * s).collect();
                quotient(op, &u)
            })
            .collect::<Vec<_>>()
    });
    per_angle.concat()
}

/// `count` points of the weighted numerical range of `op`. Deterministic
/// in `seed`. Smooth trials are drawn on `domain`, at the operator's nodes.
pub fn numerical_range_sample(
    op: &OperatorMatrix,
    domain: &ConvexDomain,
    strategy: RangeStrategy,
    count: usize,
    seed: u64,
) -> Result<Vec<RangeSample>> {
    if count == 0 {
        return Err(invalid("count", "need at least one sample"));
    }
    let n = op.dim();
    if n == 0 {
        return Err(Error::Empty("operator of dimension zero"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random = |k: usize, rng: &mut ChaCha8Rng| -> Vec<RangeSample> {
        let vs: Vec<Vec<Complex64>> = (0..k).map(|_| random_vector(n, rng)).collect();
        exec::map_slice(&vs, |u| quotient(op, u))
            .into_iter()
            .flatten()
            .map(|z| RangeSample {
                z,
                strategy: RangeStrategy::Random,
            })
            .collect()
    };
    let smooth = |k: usize, seed: u64| -> Vec<RangeSample> {
        let trials = trial_ensemble(domain, seed, k, true);
        exec::map_slice(&trials, |t| quotient(op, &t.sample(domain, &op.points)))
            .into_iter()
            .flatten()
            .map(|z| RangeSample {
                z,
                strategy: RangeStrategy::Smooth,
            })
            .collect()
    };
    let coordinate = |k: usize, rng: &mut ChaCha8Rng| -> Vec<RangeSample> {
        use rand::Rng;
        (0..k)
            .map(|i| if k >= n { i % n } else { rng.random_range(0..n) })
            .map(|i| RangeSample {
                // (A e_i, e_i)_M / (e_i, e_i)_M = A_ii
                z: Complex64::new(op.matrix.get(i, i), 0.0),
                strategy: RangeStrategy::Coordinate,
            })
            .collect()
    };
    let extremal = |rng: &mut ChaCha8Rng| -> Vec<RangeSample> {
        extremal_points(op, rng)
            .into_iter()
            .map(|z| RangeSample {
                z,
                strategy: RangeStrategy::Extremal,
            })
            .collect()
    };
    let mut out = match strategy {
        RangeStrategy::Random => random(count, &mut rng),
        RangeStrategy::Smooth => smooth(count, seed),
        RangeStrategy::Coordinate => coordinate(count, &mut rng),
        RangeStrategy::Extremal => {
            let e = extremal(&mut rng);
            if e.is_empty() {
                return Err(Error::Empty("extremal range points"));
            }
            (0..count).map(|i| e[i % e.len()]).collect()
        }
        RangeStrategy::Mixed => {
            let mut v = extremal(&mut rng);
            let rest = count.saturating_sub(v.len());
            let n_coord = rest / 10;
            let n_smooth = (rest - n_coord) / 2;
            v.extend(coordinate(n_coord, &mut rng));
            v.extend(smooth(n_smooth, seed ^ 0x9e37_79b9));
            v.extend(random(rest - n_coord - n_smooth, &mut rng));
            v
        }
    };
    out.truncate(count);
    if out.is_empty() {
        return Err(Error::Empty("range samples with nonzero norm"));
    }
    Ok(out)
}

/// `{ζ : |arg(ζ - γ)| ≤ θ}` with `θ = arctan(1/k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectorEstimate {
    pub gamma: f64,
    pub theta: f64,
    /// `None` when `θ = 0` (all points on the real axis).
    pub k: Option<f64>,
    /// Set when a point lies on or left of the requested vertex, forcing
    /// `γ = min Re z` and `θ = π/2`.
    pub boundary: bool,
}

impl SectorEstimate {
    /// `|Im z| ≤ (Re z - γ)/k + slack`, or `|Im z| ≤ slack` when `θ = 0`.
    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        if self.boundary {
            return z.re >= self.gamma - slack;
        }
        match self.k {
            None => z.im.abs() <= slack && z.re >= self.gamma - slack,
            Some(k) => z.im.abs() <= (z.re - self.gamma) / k + slack,
        }
    }
}

fn real_axis_tol(points: &[Complex64]) -> f64 {
    1e-14 * points.iter().fold(0.0f64, |a, z| a.max(z.norm()))
}

/// Minimal sector with its vertex at `gamma`.
pub fn sector_fit_with_vertex(points: &[Complex64], gamma: f64) -> Result<SectorEstimate> {
    if points.is_empty() {
        return Err(Error::Empty("sector fit points"));
    }
    if points.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) || !gamma.is_finite() {
        return Err(invalid("points", "must be finite"));
    }
    let min_re = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let tol = real_axis_tol(points);
    let all_real = points.iter().all(|z| z.im.abs() <= tol);
    if points.iter().any(|z| z.re <= gamma && !(all_real && z.re == gamma)) {
        return Ok(SectorEstimate {
            gamma: min_re.min(gamma),
            theta: FRAC_PI_2,
            k: Some(0.0),
            boundary: true,
        });
    }
    if all_real {
        return Ok(SectorEstimate {
            gamma,
            theta: 0.0,
            k: None,
            boundary: false,
        });
    }
    let theta = points
        .iter()
        .map(|z| z.im.abs().atan2(z.re - gamma))
        .fold(0.0f64, f64::max);
    Ok(SectorEstimate {
        gamma,
        theta,
        k: Some(1.0 / theta.tan()),
        boundary: false,
    })
}

/// Sector fit with the vertex placed at `m - |m|/2`, `m = min Re z`; for
/// real point sets the vertex is `m` itself and `θ = 0`.
pub fn sector_fit(points: &[Complex64]) -> Result<SectorEstimate> {
    if points.is_empty() {
        return Err(Error::Empty("sector fit points"));
    }
    let min_re = points.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let tol = real_axis_tol(points);
    if points.iter().all(|z| z.im.abs() <= tol) {
        return sector_fit_with_vertex(points, min_re);
    }
    let gamma = if min_re == 0.0 { -1.0 } else { min_re - 0.5 * min_re.abs() };
    sector_fit_with_vertex(points, gamma)
}

/// Exponents of the embedding behind the sector estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuParams {
    pub l: f64,
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub n: usize,
    pub alpha: f64,
}

impl NuParams {
    pub fn new(n: usize, alpha: f64, l: f64, p: f64, q: f64, beta: f64) -> Result<Self> {
        let s = Self { l, p, q, beta, n, alpha };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if !(self.l > 0.0 && self.p >= 1.0) {
            return Err(invalid("l, p", "need l > 0 and p ≥ 1"));
        }
        if self.l * self.p > nf {
            return Err(invalid("l, p", format!("need l·p ≤ n, got {} > {}", self.l * self.p, nf)));
        }
        if !(self.q > self.p) {
            return Err(invalid("q", format!("need q > p, got q = {}, p = {}", self.q, self.p)));
        }
        let upper = self.l - nf / self.p + nf / self.q;
        if !(self.alpha > 0.0 && self.alpha < upper) {
            return Err(invalid(
                "alpha",
                format!("need 0 < α < l - n/p + n/q = {upper}, got {}", self.alpha),
            ));
        }
        if !(self.beta > 0.0) {
            return Err(invalid("beta", "must be positive"));
        }
        Ok(())
    }

    /// `ν = (n/l)(1/p - 1/q) + (α + β)/l`.
    pub fn nu(&self) -> f64 {
        self.n as f64 / self.l * (1.0 / self.p - 1.0 / self.q) + (self.alpha + self.beta) / self.l
    }
}

/// User constants for the analytic sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorConstants {
    pub c2: f64,
    pub c3: f64,
    pub eps: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticSector {
    pub k: f64,
    pub gamma: f64,
    pub theta: f64,
    pub nu: f64,
    pub gamma_positive: bool,
}

/// `k = a₀(εδ^{2-2ν}C₃ + a₁)⁻¹`, `γ = μ inf ρ - k[εδ^{-2ν}C₂ + 1/ε]`,
/// `θ = arctan(1/k)`.
pub fn sector_params_analytic(
    a0: f64,
    a1: f64,
    consts: SectorConstants,
    nu: &NuParams,
    mu: f64,
    inf_rho: f64,
) -> Result<AnalyticSector> {
    nu.validate()?;
    let SectorConstants { c2, c3, eps, delta } = consts;
    if !(eps > 0.0 && delta > 0.0) {
        return Err(invalid("eps, delta", "must be positive"));
    }
    if !(a0 > 0.0 && a1 > 0.0) {
        return Err(invalid("a0, a1", "must be positive"));
    }
    if !(c2 >= 0.0 && c3 >= 0.0) {
        return Err(invalid("c2, c3", "must be nonnegative"));
    }
    let v = nu.nu();
    let k = a0 / (eps * delta.powf(2.0 - 2.0 * v) * c3 + a1);
    let gamma = mu * inf_rho - k * (eps * delta.powf(-2.0 * v) * c2 + 1.0 / eps);
    Ok(AnalyticSector {
        k,
        gamma,
        theta: (1.0 / k).atan(),
        nu: v,
        gamma_positive: gamma > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::OperatorKind;
    use crate::geometry::Point;
    use crate::sparse::CsrMatrix;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn identity_range_is_one() {
        let n = 5;
        let op = OperatorMatrix {
            kind: OperatorKind::ConstantCoefficient,
            matrix: CsrMatrix::identity(n),
            mass: vec![0.2; n],
            points: (0..n).map(|i| Point::new(0.1 + 0.2 * i as f64, 0.0)).collect(),
        };
        let dom = ConvexDomain::interval(1.0).unwrap();
        for s in [RangeStrategy::Random, RangeStrategy::Mixed, RangeStrategy::Extremal] {
            for z in numerical_range_sample(&op, &dom, s, 20, 3).unwrap() {
                assert!((z.z - 1.0).norm() < 1e-14);
            }
        }
        assert!(numerical_range_sample(&op, &dom, RangeStrategy::Random, 0, 3).is_err());
    }

    #[test]
    fn sector_examples() {
        let s = sector_fit(&[Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)]).unwrap();
        assert_eq!((s.gamma, s.theta, s.boundary), (2.0, 0.0, false));
        let pts = [Complex64::new(1.0, 1.0), Complex64::new(1.0, -1.0)];
        let s = sector_fit_with_vertex(&pts, 0.0).unwrap();
        assert!((s.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((s.k.unwrap() - 1.0).abs() < 1e-15);
        assert!(sector_fit(&[]).is_err());
        let b = sector_fit_with_vertex(&pts, 1.5).unwrap();
        assert!(b.boundary && b.gamma == 1.0 && b.theta == FRAC_PI_2);
    }

    #[test]
    fn nu_and_analytic_sector() {
        let p = NuParams::new(2, 0.4, 1.0, 2.0, 4.0, 0.01).unwrap();
        assert!((p.nu() - 0.91).abs() < 1e-14);
        assert!(NuParams::new(2, 0.6, 1.0, 2.0, 4.0, 0.01).is_err());
        assert!(NuParams::new(2, 0.4, 1.0, 2.0, 2.0, 0.01).is_err());
        assert!(NuParams::new(1, 0.4, 1.0, 2.0, 4.0, 0.01).is_err());
        let c = SectorConstants {
            c2: 0.0,
            c3: 0.0,
            eps: 1.0,
            delta: 0.5,
        };
        let s = sector_params_analytic(1.0, 1.0, c, &p, 0.846284, 1.0).unwrap();
        assert!((s.k - 1.0).abs() < 1e-15 && (s.theta - FRAC_PI_4).abs() < 1e-15);
        assert!((s.gamma - (0.846284 - 1.0)).abs() < 1e-15);
        assert!(!s.gamma_positive);
        let s = sector_params_analytic(1.0, 1.0, SectorConstants { eps: 4.0, ..c }, &p, 0.846284, 1.0).unwrap();
        assert!(s.gamma_positive);
    }
}
