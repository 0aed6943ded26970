//! Seeded ensembles of boundary-vanishing trial fields: smooth bumps,
//! low-frequency modes and random band-limited fields, all multiplied by
//! (or supported inside) the domain so they vanish on the boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::geometry::{ConvexDomain, Point};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrialShape {
    /// `exp(1 - 1/(1 - s²))` with `s = |p - center|/radius`, zero outside.
    Bump { center: Point, radius: f64 },
    /// Envelope times `cos(π (kx x + ky y)/𝔡 + phase)`.
    Mode { kx: f64, ky: f64, phase: f64 },
    /// Envelope times `Σ c exp(iπ (kx x + ky y)/𝔡)`.
    BandLimited { terms: Vec<(f64, f64, Complex64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialField {
    pub shape: TrialShape,
    /// Keep the imaginary part; real fields drop it.
    pub complex: bool,
}

impl TrialField {
    pub fn eval(&self, domain: &ConvexDomain, p: Point) -> Complex64 {
        let z = match &self.shape {
            TrialShape::Bump { center, radius } => {
                let s2 = (p.dist(*center) / radius).powi(2);
                if s2 >= 1.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new((1.0 - 1.0 / (1.0 - s2)).exp(), 0.0)
                }
            }
            TrialShape::Mode { kx, ky, phase } => {
                let w = PI * (kx * p.x + ky * p.y) / domain.diameter() + phase;
                Complex64::new(domain.boundary_envelope(p) * w.cos(), 0.0)
            }
            TrialShape::BandLimited { terms } => {
                let d = domain.diameter();
                let s: Complex64 = terms
                    .iter()
                    .map(|&(kx, ky, c)| c * Complex64::from_polar(1.0, PI * (kx * p.x + ky * p.y) / d))
                    .sum();
                s * domain.boundary_envelope(p)
            }
        };
        if self.complex {
            z
        } else {
            Complex64::new(z.re, 0.0)
        }
    }

    pub fn sample(&self, domain: &ConvexDomain, points: &[Point]) -> Vec<Complex64> {
        points.iter().map(|&p| self.eval(domain, p)).collect()
    }
}

/// Builds `count` trial fields: a tenth bumps, a tenth low modes, the rest
/// random band-limited fields. Identical seeds give identical ensembles.
pub fn trial_ensemble(domain: &ConvexDomain, seed: u64, count: usize, complex: bool) -> Vec<TrialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_d = domain.dim() == 2;
    let bumps = count / 10;
    let modes = count / 10;
    let (lo, hi) = domain.bounding_box();
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let shape = if i < bumps {
            let (center, dist) = loop {
                let c = Point::new(
                    rng.random_range(lo.x..=hi.x),
                    if two_d { rng.random_range(lo.y..=hi.y) } else { 0.0 },
                );
                let d = domain.distance_to_boundary(c);
                if d > 0.05 * domain.diameter() {
                    break (c, d);
                }
            };
            TrialShape::Bump {
                center,
                radius: dist * rng.random_range(0.3..=1.0),
            }
        } else if i < bumps + modes {
            let k = (i - bumps) as f64;
            TrialShape::Mode {
                kx: k % 4.0,
                ky: if two_d { (k / 4.0).floor() } else { 0.0 },
                phase: rng.random_range(0.0..2.0 * PI),
            }
        } else {
            let n_terms = rng.random_range(2..=6);
            let terms = (0..n_terms)
                .map(|_| {
                    let kx = rng.random_range(-4..=4) as f64;
                    let ky = if two_d { rng.random_range(-4..=4) as f64 } else { 0.0 };
                    let c = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
                    (kx, ky, c)
                })
                .collect();
            TrialShape::BandLimited { terms }
        };
        out.push(TrialField { shape, complex });
    }
    out
}

/// Random real vectors that vanish on the boundary: band-limited fields
/// sampled at `points`.
pub fn random_fields(domain: &ConvexDomain, points: &[Point], seed: u64, count: usize) -> Vec<Vec<f64>> {
    trial_ensemble(domain, seed, count + count / 5 + 2, false)
        .into_iter()
        .filter(|t| matches!(t.shape, TrialShape::BandLimited { .. }))
        .take(count)
        .map(|t| t.sample(domain, points).iter().map(|z| z.re).collect())
        .collect()
}
