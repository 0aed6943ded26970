//! Row builders for the discrete fractional operators on one ray.
//!
//! Every builder takes the radial nodes of a ray and a target index `k` and
//! writes the coefficients `c_j` such that `Σ_j c_j f_j` approximates the
//! operator at `r = nodes[k]`. Densities are the piecewise-linear
//! interpolants of the nodal values (of `t^{n-1} f` on the left side, where
//! the geometric factor lives); outside the ray the function is zero.

use crate::quadrature::{gamma, left_cell, linear_moments, power_moment, right_cell};

/// `(1/Γ(α)) r^{1-n} ∫_0^r t^{n-1} g(t) (r - t)^{α-1} dt`.
pub fn integral_left(nodes: &[f64], k: usize, alpha: f64, dim: usize, row: &mut [f64]) {
    if k == 0 {
        return;
    }
    let r = nodes[k];
    let scale = 1.0 / gamma(alpha);
    for j in 0..k {
        left_cell(row, j, nodes[j], nodes[j + 1], r, alpha - 1.0, scale);
    }
    geometric_factor(nodes, k, dim, row);
}

/// `(1/Γ(α)) ∫_r^d g(t) (t - r)^{α-1} dt`.
pub fn integral_right(nodes: &[f64], k: usize, alpha: f64, row: &mut [f64]) {
    let scale = 1.0 / gamma(alpha);
    let r = nodes[k];
    for j in k..nodes.len() - 1 {
        right_cell(row, j, nodes[j], nodes[j + 1], r, alpha - 1.0, scale);
    }
}

/// Multiplies the coefficient of `F_j = t_j^{n-1} f_j` by `(t_j/r)^{n-1}`.
fn geometric_factor(nodes: &[f64], k: usize, dim: usize, row: &mut [f64]) {
    if dim == 1 {
        return;
    }
    let r = nodes[k];
    let e = dim as i32 - 1;
    for j in 0..=k {
        row[j] *= (nodes[j] / r).powi(e);
    }
}

/// Left Marchaud-type derivative `r^{1-n} D[t^{n-1} f]` of the linear
/// interpolant, evaluated exactly (the ε → 0 limit on a fixed grid).
pub fn derivative_left(nodes: &[f64], k: usize, alpha: f64, dim: usize, row: &mut [f64]) {
    if k == 0 {
        return;
    }
    let r = nodes[k];
    let p = -alpha - 1.0;
    let mut diag = r.powf(-alpha) / alpha;
    for j in 0..k - 1 {
        let (a, b) = linear_moments(r - nodes[j + 1], r - nodes[j], p);
        let h = nodes[j + 1] - nodes[j];
        diag += (a + b) / h;
        row[j] -= a / h;
        row[j + 1] -= b / h;
    }
    let h = r - nodes[k - 1];
    let sliver = h.powf(-alpha) / (1.0 - alpha);
    diag += sliver;
    row[k - 1] -= sliver;
    row[k] += diag;
    let scale = alpha / gamma(1.0 - alpha);
    for c in row[..=k].iter_mut() {
        *c *= scale;
    }
    geometric_factor(nodes, k, dim, row);
}

/// Right Marchaud derivative of the linear interpolant, with zero
/// extension beyond `d`. The last node (on the boundary) gets a zero row.
pub fn derivative_right(nodes: &[f64], k: usize, alpha: f64, row: &mut [f64]) {
    let n = nodes.len() - 1;
    if k == n {
        return;
    }
    let r = nodes[k];
    let d = nodes[n];
    let p = -alpha - 1.0;
    let mut diag = (d - r).powf(-alpha) / alpha;
    let h = nodes[k + 1] - r;
    let sliver = h.powf(-alpha) / (1.0 - alpha);
    diag += sliver;
    row[k + 1] -= sliver;
    for j in (k + 1)..n {
        let (a, b) = linear_moments(nodes[j] - r, nodes[j + 1] - r, p);
        let h = nodes[j + 1] - nodes[j];
        diag += (a + b) / h;
        row[j] -= b / h;
        row[j + 1] -= a / h;
    }
    row[k] += diag;
    let scale = alpha / gamma(1.0 - alpha);
    for c in row[k..].iter_mut() {
        *c *= scale;
    }
}

/// ε-truncated left derivative: the difference integral is cut off at
/// `t = r - ε`; nodes with `r < ε` use the closed form `f ε^{-α}/Γ(1-α)`.
pub fn truncated_left(nodes: &[f64], k: usize, alpha: f64, dim: usize, eps: f64, row: &mut [f64]) {
    let r = nodes[k];
    let g1 = gamma(1.0 - alpha);
    if r < eps {
        row[k] += eps.powf(-alpha) / g1;
        return;
    }
    let p = -alpha - 1.0;
    let mut diag = r.powf(-alpha) / alpha;
    for j in 0..k {
        let (u0, u1) = (r - nodes[j + 1], r - nodes[j]);
        if u1 <= eps {
            break;
        }
        let h = nodes[j + 1] - nodes[j];
        let (a, b, m0) = if u0 >= eps {
            let (a, b) = linear_moments(u0, u1, p);
            (a, b, (a + b) / h)
        } else {
            let (a, b) = linear_moments(eps, u1, p);
            let m0 = power_moment(eps, u1, p);
            (a + (eps - u0) * m0, b, m0)
        };
        diag += m0;
        row[j] -= a / h;
        row[j + 1] -= b / h;
    }
    row[k] += diag;
    let scale = alpha / g1;
    for c in row[..=k].iter_mut() {
        *c *= scale;
    }
    geometric_factor(nodes, k, dim, row);
}

/// Mirror image of [`truncated_left`] with `d - r` in place of `r`.
pub fn truncated_right(nodes: &[f64], k: usize, alpha: f64, eps: f64, row: &mut [f64]) {
    let n = nodes.len() - 1;
    let r = nodes[k];
    let d = nodes[n];
    let g1 = gamma(1.0 - alpha);
    if d - r < eps {
        row[k] += eps.powf(-alpha) / g1;
        return;
    }
    let p = -alpha - 1.0;
    let mut diag = (d - r).powf(-alpha) / alpha;
    for j in (k..n).rev() {
        let (u0, u1) = (nodes[j] - r, nodes[j + 1] - r);
        if u1 <= eps {
            break;
        }
        let h = nodes[j + 1] - nodes[j];
        let (a, b, m0) = if u0 >= eps {
            let (a, b) = linear_moments(u0, u1, p);
            (a, b, (a + b) / h)
        } else {
            let (a, b) = linear_moments(eps, u1, p);
            let m0 = power_moment(eps, u1, p);
            (a + (eps - u0) * m0, b, m0)
        };
        diag += m0;
        row[j] -= b / h;
        row[j + 1] -= a / h;
    }
    row[k] += diag;
    let scale = alpha / g1;
    for c in row[k..].iter_mut() {
        *c *= scale;
    }
}

/// Kipriyanov derivative
/// `(α/Γ(1-α)) ∫_0^r [f(r) - f(t)] (r-t)^{-α-1} (t/r)^{n-1} dt + C_n f(r) r^{-α}`
/// of the linear interpolant of `f`, with the last cell integrated in
/// closed form. Constant densities give exactly `C_n c r^{-α}`.
pub fn kipriyanov(nodes: &[f64], k: usize, alpha: f64, dim: usize, row: &mut [f64]) {
    if k == 0 {
        return;
    }
    let r = nodes[k];
    let p = -alpha - 1.0;
    // (t/r)^{n-1} = Σ_m binom(n-1, m) (-u/r)^m with u = r - t
    let expansion: Vec<f64> = (0..dim)
        .map(|m| binomial_usize(dim - 1, m) * (-1.0f64).powi(m as i32) * r.powi(-(m as i32)))
        .collect();
    for j in 0..k - 1 {
        let (u0, u1) = (r - nodes[j + 1], r - nodes[j]);
        let h = nodes[j + 1] - nodes[j];
        for (m, &c) in expansion.iter().enumerate() {
            let (a, b) = linear_moments(u0, u1, p + m as f64);
            row[j] -= c * a / h;
            row[j + 1] -= c * b / h;
        }
    }
    let h = r - nodes[k - 1];
    let sliver: f64 = expansion
        .iter()
        .enumerate()
        .map(|(m, &c)| c * h.powf(m as f64 - alpha) / (m as f64 + 1.0 - alpha))
        .sum();
    row[k - 1] -= sliver;
    let diag: f64 = -row[..k].iter().sum::<f64>();
    let scale = alpha / gamma(1.0 - alpha);
    for c in row[..k].iter_mut() {
        *c *= scale;
    }
    row[k] = scale * diag + cn_alpha_unchecked(dim, alpha) * r.powf(-alpha);
}

fn binomial_usize(n: usize, m: usize) -> f64 {
    crate::quadrature::binomial(n as f64, m)
}

pub(crate) fn cn_alpha_unchecked(n: usize, alpha: f64) -> f64 {
    let fact: f64 = (1..n).map(|i| i as f64).product();
    fact / gamma(n as f64 - alpha)
}
