//! Gamma function and product-integration weights for weakly singular
//! kernels `(r - t)^{s-1}` on a radial grid.
//!
//! Densities are replaced by their piecewise-linear interpolant on the grid
//! and integrated exactly against the kernel; the per-cell moments are the
//! only transcendental work, so one weight table serves every grid function.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::geometry::RadialGrid;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x > 0.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid("x", format!("gamma_fn needs a positive finite argument, got {x}")));
    }
    Ok(gamma(x))
}

/// Γ(x) without argument checks. Reflection below 1/2, Lanczos above.
pub(crate) fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return pi / ((pi * x).sin() * gamma(1.0 - x));
    }
    if x == x.floor() && x <= 30.0 {
        // exact factorials keep integer arguments bit-exact
        return (1..x as u64).map(|k| k as f64).product();
    }
    let z = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    // t^{z+1/2} e^{-t} split in two halves so that large x does not overflow
    let half = t.powf(0.5 * (z + 0.5));
    (2.0 * std::f64::consts::PI).sqrt() * half * (half * (-t).exp()) * a
}

/// Generalized binomial coefficient `binom(p, m)`.
pub fn binomial(p: f64, m: usize) -> f64 {
    let mut b = 1.0;
    for i in 0..m {
        b *= (p - i as f64) / (i as f64 + 1.0);
    }
    b
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `∫_{u0}^{u1} u^p du` for `0 ≤ u0 < u1` (with `u0 > 0` when `p ≤ -1`).
pub fn power_moment(u0: f64, u1: f64, p: f64) -> f64 {
    let (a, b) = linear_moments(u0, u1, p);
    (a + b) / (u1 - u0)
}

/// `(∫ (u - u0) u^p du, ∫ (u1 - u) u^p du)` over `[u0, u1]`.
///
/// Both moments are needed to integrate a linear density exactly against
/// `u^p`. Thin cells far from the origin use a binomial series in
/// `x = (u1 - u0)/u1`, which avoids the cancellation of the closed form.
pub fn linear_moments(u0: f64, u1: f64, p: f64) -> (f64, f64) {
    debug_assert!(u1 > u0 && u0 >= 0.0);
    let x = (u1 - u0) / u1;
    if u0 == 0.0 || x > 0.5 {
        let i0 = (u1.powf(p + 1.0) - pow_or_zero(u0, p + 1.0)) / (p + 1.0);
        let i1 = (u1.powf(p + 2.0) - pow_or_zero(u0, p + 2.0)) / (p + 2.0);
        return (i1 - u0 * i0, u1 * i0 - i1);
    }
    let mut sa = 0.0;
    let mut sb = 0.0;
    let mut bm = 1.0; // binom(p, m) (-1)^m
    let mut xm = x * x; // x^{m+2}
    for m in 0..200 {
        let mf = m as f64;
        let tb = bm * xm / (mf + 2.0);
        sa += tb / (mf + 1.0);
        sb += tb;
        if tb.abs() <= 1e-17 * sb.abs() {
            break;
        }
        bm *= -(p - mf) / (mf + 1.0);
        xm *= x;
    }
    let scale = u1.powf(p + 2.0);
    (scale * sa, scale * sb)
}

fn pow_or_zero(u: f64, e: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        u.powf(e)
    }
}

/// Which endpoint the kernel is anchored at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Endpoint {
    /// `∫_0^r g(t) (r - t)^{s-1} dt`
    Left,
    /// `∫_r^d g(t) (t - r)^{s-1} dt`
    Right,
}

/// Weights `w[i][j]` with `Σ_j w[i][j] g(t_j) = ∫ g_h(t) |r_i - t|^{s-1} dt`
/// exactly for the piecewise-linear interpolant `g_h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularRule {
    pub s: f64,
    pub endpoint: Endpoint,
    pub nodes: Vec<f64>,
    pub weights: Vec<Vec<f64>>,
}

impl SingularRule {
    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| row.iter().zip(values).map(|(w, v)| w * v).sum())
            .collect()
    }
}

/// Adds the weights of cell `[a, b]` of a left-anchored kernel `(r - t)^p` to `row`.
pub(crate) fn left_cell(row: &mut [f64], j: usize, a: f64, b: f64, r: f64, p: f64, scale: f64) {
    let h = b - a;
    let (ma, mb) = linear_moments(r - b, r - a, p);
    row[j] += scale * ma / h;
    row[j + 1] += scale * mb / h;
}

/// Adds the weights of cell `[a, b]` of a right-anchored kernel `(t - r)^p` to `row`.
pub(crate) fn right_cell(row: &mut [f64], j: usize, a: f64, b: f64, r: f64, p: f64, scale: f64) {
    let h = b - a;
    let (ma, mb) = linear_moments(a - r, b - r, p);
    row[j] += scale * mb / h;
    row[j + 1] += scale * ma / h;
}

/// Product-integration weights for the kernel `(r - t)^{s-1}` (left) or
/// `(t - r)^{s-1}` (right), `s ∈ (0, 1]`.
pub fn product_weights(grid: &RadialGrid, s: f64, endpoint: Endpoint) -> Result<SingularRule> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(invalid("s", format!("kernel exponent must lie in (0, 1], got {s}")));
    }
    let t = grid.nodes();
    let n = t.len();
    let p = s - 1.0;
    let weights = crate::exec::map_range(n, |i| {
        let mut row = vec![0.0; n];
        match endpoint {
            Endpoint::Left => {
                for j in 0..i {
                    left_cell(&mut row, j, t[j], t[j + 1], t[i], p, 1.0);
                }
            }
            Endpoint::Right => {
                for j in i..n - 1 {
                    right_cell(&mut row, j, t[j], t[j + 1], t[i], p, 1.0);
                }
            }
        }
        row
    });
    Ok(SingularRule {
        s,
        endpoint,
        nodes: t.to_vec(),
        weights,
    })
}
