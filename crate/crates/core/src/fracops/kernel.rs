//! The kernel `𝒦(t) = (sin απ / π) (t₊^α - (t-1)₊^α) / t` and the constants
//! `C_n^{(α)}` of the Kipriyanov derivative.

use std::f64::consts::PI;

use super::FractionalOrder;
use crate::error::{invalid, Result};
use crate::quadrature::{binomial, gamma, gauss_legendre};

pub fn kernel_k(t: f64, alpha: FractionalOrder) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let a = alpha.value();
    let head = t.powf(a);
    let tail = if t > 1.0 { (t - 1.0).powf(a) } else { 0.0 };
    // for large t the difference cancels; use t^a (1 - (1 - 1/t)^a)
    let diff = if t > 8.0 {
        -head * (a * (-1.0 / t).ln_1p()).exp_m1()
    } else {
        head - tail
    };
    (a * PI).sin() / PI * diff / t
}

/// Upper end of the numerically integrated part of the kernel mass.
const SPLIT: f64 = 16.0;

/// `∫_0^∞ 𝒦(t) dt`, split as `[0, 1]` (closed form), `[1, T]` (graded
/// Gauss–Legendre panels toward the cusp at `t = 1`) and `[T, ∞)` (term-wise
/// integrated binomial series). Equals 1 analytically.
pub fn kernel_mass(alpha: FractionalOrder) -> f64 {
    let a = alpha.value();
    let c = (a * PI).sin() / PI;
    let head = c / a;

    let (x, w) = gauss_legendre(24);
    let mut mid = 0.0;
    let mut hi = SPLIT - 1.0;
    for _ in 0..60 {
        let lo = 0.5 * hi;
        let (m, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (xi, wi) in x.iter().zip(&w) {
            mid += wi * half * kernel_k(1.0 + m + half * xi, alpha);
        }
        hi = lo;
    }
    // the remaining [1, 1 + hi] panel has length ~1e-17 and bounded integrand

    let mut tail = 0.0;
    for m in 1..200 {
        let b = -binomial(a, m) * (-1.0f64).powi(m as i32);
        let term = b * SPLIT.powf(a - m as f64) / (m as f64 - a);
        tail += term;
        if term.abs() < 1e-18 {
            break;
        }
    }
    head + mid + c * tail
}

/// `C_n^{(α)} = (n-1)!/Γ(n-α)`.
pub fn cn_alpha(n: usize, alpha: FractionalOrder) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    Ok(super::rows::cn_alpha_unchecked(n, alpha.value()))
}

/// The same constant assembled from the power-function integrals that
/// produce it: `1/Γ(1-α) + α Σ_{i=0}^{n-2} i!/Γ(2-α+i)`. For `n ≥ 2` this is
/// `1/Γ(2-α) + α Σ_{i=1}^{n-2} i!/Γ(2-α+i)`.
pub fn cn_alpha_expanded(n: usize, alpha: FractionalOrder) -> Result<f64> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    let a = alpha.value();
    let mut s = 1.0 / gamma(1.0 - a);
    let mut fact = 1.0;
    for i in 0..n.saturating_sub(1) {
        if i > 0 {
            fact *= i as f64;
        }
        s += a * fact / gamma(2.0 - a + i as f64);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn order(a: f64) -> FractionalOrder {
        FractionalOrder::new(a).unwrap()
    }

    #[test]
    fn kernel_at_one_is_inverse_pi() {
        assert_relative_eq!(kernel_k(1.0, order(0.5)), 1.0 / PI, epsilon = 1e-15);
        assert_eq!(kernel_k(-0.3, order(0.5)), 0.0);
        assert_eq!(kernel_k(0.0, order(0.5)), 0.0);
    }

    #[test]
    fn large_argument_branch_is_continuous() {
        for &a in &[0.1, 0.5, 0.9] {
            let al = order(a);
            let t: f64 = 8.0;
            let direct = (a * PI).sin() / PI * (t.powf(a) - (t - 1.0).powf(a)) / t;
            let below = kernel_k(t, al);
            let above = kernel_k(t * (1.0 + 1e-15), al);
            assert_relative_eq!(below, direct, max_relative = 1e-14);
            assert_relative_eq!(above, direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn unit_mass() {
        for &a in &[0.1, 0.25, 0.5, 0.75, 0.9] {
            let m = kernel_mass(order(a));
            assert!((m - 1.0).abs() < 1e-10, "α = {a}: mass {m}");
        }
    }

    #[test]
    fn cn_values() {
        assert_relative_eq!(cn_alpha(1, order(0.5)).unwrap(), 0.564_189_583_547_756, epsilon = 1e-14);
        assert_relative_eq!(cn_alpha(2, order(0.5)).unwrap(), 1.128_379_167_095_51, epsilon = 1e-13);
        assert_relative_eq!(cn_alpha(3, order(0.5)).unwrap(), 1.504_505_556_127_35, epsilon = 1e-13);
        assert_relative_eq!(
            cn_alpha_expanded(3, order(0.5)).unwrap(),
            1.504_505_556_127_35,
            epsilon = 1e-13
        );
        assert!(cn_alpha(0, order(0.5)).is_err());
    }
}
