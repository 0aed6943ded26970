//! The analyses behind each subcommand. Each returns a serializable result
//! plus named checks; nothing here touches the filesystem.

use std::f64::consts::PI;
use std::fmt::Write as _;

use fracspec::assembly::{assemble_operator, Mesh, OperatorKind};
use fracspec::fracops::{
    adjoint_residual, cn_alpha, cn_alpha_expanded, frac_derivative, frac_derivative_limit, frac_integral,
    geometric_schedule, kernel_k, kernel_mass, LimitDiagnostic, RayKind, RayOperator, Side,
};
use fracspec::geometry::GridFunction;
use fracspec::spectral::{
    accretivity_constants, accretivity_for, eigen_solve, empirical_rayleigh, numerical_range_sample,
    sandwich_pipeline, sector_fit, sector_params_analytic, AccretivityReport, AnalyticSector, Comparator,
    ComparisonOperators, RangeStrategy, RayBlockOperator, SandwichReport, SectorEstimate, WeightConstants,
};
use fracspec::trial::trial_ensemble;
use fracspec::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::config::Setup;

/// One named pass/fail check: `value` compared against `threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: &'static str,
    pub description: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(id: &'static str, description: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            id,
            description,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(id: &'static str, description: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            id,
            description,
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// A failure that is not a check outcome.
#[derive(Debug)]
pub enum Failure {
    /// The configuration cannot be analysed this way (exit 2).
    Unsupported(String),
    /// A numerical routine failed; the message names the invariant (exit 1).
    Numerical(String),
}

fn numerical(what: &str) -> impl Fn(fracspec::Error) -> Failure + '_ {
    move |e| match e {
        fracspec::Error::InvalidParameter { .. }
        | fracspec::Error::Unsupported(_)
        | fracspec::Error::HolderExponent { .. }
        | fracspec::Error::Ellipticity { .. }
        | fracspec::Error::NotOnBoundary { .. } => Failure::Unsupported(format!("{what}: {e}")),
        e => Failure::Numerical(format!("{what}: {e}")),
    }
}

pub type Outcome<T> = Result<(T, Vec<Check>), Failure>;

#[derive(Debug, Clone, Serialize)]
pub struct Identities {
    pub dim: usize,
    pub diameter: f64,
    pub rays: usize,
    pub cells: usize,
    pub boundedness_ratio_left: f64,
    pub boundedness_ratio_right: f64,
    pub limit_diagnostic: String,
    pub limit_contraction: f64,
}

/// Operator identities on the configured ray geometry.
pub fn identities(s: &Setup) -> Outcome<Identities> {
    let a = s.alpha;
    let tol = s.config.tolerances;
    let geom = &s.geometry;
    let dim = s.domain.dim();
    let diameter = s.domain.diameter();
    let mut checks = Vec::new();

    let mut worst: f64 = 0.0;
    for n in 1..=6 {
        let c = cn_alpha(n, a).map_err(numerical("C_n"))?;
        worst = worst.max((c - cn_alpha_expanded(n, a).map_err(numerical("C_n"))?).abs());
    }
    checks.push(Check::at_most(
        "cn-gamma-identity",
        "C_n(α) against its Γ-sum for n = 1..6",
        worst,
        tol.identity,
    ));

    checks.push(Check::at_most(
        "kernel-mass",
        "|∫ K(t; α) dt - 1|",
        (kernel_mass(a) - 1.0).abs(),
        tol.kernel_mass,
    ));
    let min_k = (0..10_000)
        .map(|i| kernel_k(10f64.powf(-6.0 + 12.0 * i as f64 / 9_999.0), a))
        .fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least(
        "kernel-positivity",
        "min K(t; α) over 10⁴ log-spaced t in [1e-6, 1e6]",
        min_k,
        f64::MIN_POSITIVE,
    ));

    let bound = diameter.powf(a.value()) / fracspec::quadrature::gamma_fn(a.value() + 1.0).map_err(numerical("Γ"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let ops = [Side::Left, Side::Right].map(|side| RayOperator::build(geom.clone(), RayKind::Integral(side), a));
    let mut ratios = [0.0f64; 2];
    for _ in 0..s.config.analysis.boundedness_trials {
        let vals = geom
            .grids()
            .iter()
            .map(|g| {
                g.nodes()
                    .iter()
                    .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
                    .collect()
            })
            .collect();
        let g = GridFunction::new(geom.clone(), vals).map_err(numerical("trial function"))?;
        for (r, op) in ratios.iter_mut().zip(&ops) {
            let out = op.apply(&g).map_err(numerical("fractional integral"))?;
            *r = r.max(out.norm() / g.norm() / bound);
        }
    }
    checks.push(Check::at_most(
        "integral-boundedness",
        "max ‖I^α g‖/‖g‖ over random g, relative to 𝔡^α/Γ(α+1)",
        ratios[0].max(ratios[1]),
        1.0 + tol.boundedness,
    ));

    let smooth = GridFunction::from_real_fn(geom.clone(), |p| (1.0 + p.r * p.r) * (3.0 * p.r).cos())
        .map_err(numerical("test function"))?;
    for (side, id) in [(Side::Left, "inversion-left"), (Side::Right, "inversion-right")] {
        let back = frac_derivative(&frac_integral(&smooth, a, side), a, side);
        let err = back.sub(&smooth).map_err(numerical("inversion"))?.norm_interior() / smooth.norm_interior();
        checks.push(Check::at_most(
            id,
            "‖D^α I^α g - g‖/‖g‖ for g = (1 + r²) cos 3r, interior nodes",
            err,
            tol.inversion,
        ));
    }

    let phi = GridFunction::from_real_fn(geom.clone(), |p| 1.0 + p.r - 2.0 * p.r * p.r).map_err(numerical("density"))?;
    let psi = GridFunction::from_real_fn(geom.clone(), |p| 2.0 - p.r.powi(3) + 0.5 * p.r).map_err(numerical("density"))?;
    let adj = adjoint_residual(&phi, &psi, a).map_err(numerical("adjointness"))?;
    checks.push(Check::at_most(
        "derivative-adjointness",
        "|(D₀₊f, g) - (f, D_𝔡₋g)| / (‖f‖‖g‖) for polynomial densities",
        adj.residual / (adj.norm_f * adj.norm_g),
        tol.adjoint,
    ));

    let f = frac_integral(&smooth, a, Side::Left);
    let lim = frac_derivative_limit(&f, a, Side::Left, &geometric_schedule(diameter, 12))
        .map_err(numerical("truncated derivative limit"))?;
    let converges = lim.diagnostic != LimitDiagnostic::Divergent;
    checks.push(Check {
        id: "truncated-limit",
        description: "truncated derivatives of an integral are Cauchy as ε → 0",
        value: lim.contraction,
        threshold: 1.0,
        pass: converges,
    });

    Ok((
        Identities {
            dim,
            diameter,
            rays: geom.ray_count(),
            cells: geom.grids().iter().map(|g| g.cells()).max().unwrap_or(0),
            boundedness_ratio_left: ratios[0],
            boundedness_ratio_right: ratios[1],
            limit_diagnostic: format!("{:?}", lim.diagnostic).to_lowercase(),
            limit_contraction: lim.contraction,
        },
        checks,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct Accretivity {
    #[serde(flatten)]
    pub constants: AccretivityReport,
    /// Hölder constant entering `μ`.
    pub holder_constant: f64,
    /// Whether it was supplied in the config (otherwise sampled).
    pub holder_constant_analytic: bool,
    pub weight_given: bool,
    pub seed: u64,
    /// `λ_min` of the real part, when operators are assembled.
    pub lambda_min_h: Option<f64>,
}

/// `μ`, `μ₁`, the empirical accretivity minimum and, on assembled
/// meshes, the smallest eigenvalue of the real part.
pub fn accretivity(s: &Setup) -> Outcome<Accretivity> {
    let tol = s.config.tolerances;
    // without ρ the estimate is for 𝔇^α itself (ρ ≡ 1)
    let (weight, holder_constant, analytic) = match &s.weight {
        Some(w) => (WeightConstants::from(w), w.m, w.m_is_analytic),
        None => (
            WeightConstants {
                lambda: 1.0,
                m: 0.0,
                inf_rho: 1.0,
                monotone: true,
            },
            0.0,
            true,
        ),
    };
    let mut report = match &s.coeffs {
        Some(c) if c.weight.is_some() => accretivity_for(c).map_err(numerical("accretivity constants"))?.expect("weight"),
        _ => accretivity_constants(s.alpha, s.domain.dim(), s.domain.diameter(), weight, s.a0)
            .map_err(numerical("accretivity constants"))?,
    };

    let op = RayBlockOperator::new(s.geometry.clone(), RayKind::Kipriyanov, s.alpha);
    let trials = trial_ensemble(&s.domain, s.seed, s.config.analysis.trials, true);
    let unit = |_| 1.0;
    let rho: &(dyn Fn(fracspec::geometry::Point) -> f64 + Sync) = match &s.rho {
        Some(r) => r.as_ref(),
        None => &unit,
    };
    let emp = empirical_rayleigh(&op, rho, &s.domain, &trials).map_err(numerical("empirical accretivity"))?;
    report.empirical_min = Some(emp.min_quotient);
    report.trials = emp.trials_used;
    let mut checks = vec![Check::at_least(
        "strict-accretivity",
        "min Re(ρ𝔇^α f, f)/(ρf, f) over seeded trials, against μ minus tolerance",
        emp.min_quotient,
        report.mu - tol.accretivity,
    )];

    let mut lambda_min_h = None;
    if let Some(c) = &s.coeffs {
        let h = assemble_operator(OperatorKind::H, c).map_err(numerical("real part"))?;
        let l = eigen_solve(&h, 1).map_err(numerical("smallest eigenvalue of the real part"))?.values[0];
        lambda_min_h = Some(l);
        checks.push(Check::at_least(
            "real-part-positivity",
            "λ_min(H) against μ₁ with relative slack",
            l,
            report.mu1 - tol.positivity * report.mu1.abs(),
        ));
    }

    Ok((
        Accretivity {
            constants: report,
            holder_constant,
            holder_constant_analytic: analytic,
            weight_given: s.weight.is_some(),
            seed: s.seed,
            lambda_min_h,
        },
        checks,
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct Sector {
    pub samples: usize,
    pub strategy: RangeStrategy,
    pub fitted: SectorEstimate,
    pub gamma_positive: bool,
    /// Largest violation of the sector inequality over the samples.
    pub max_violation: f64,
    pub analytic: Option<AnalyticSector>,
}

/// Numerical-range samples of `L` (as `(re, im)`) and the fitted sector.
pub fn range(s: &Setup) -> Outcome<(Vec<Complex64>, Sector)> {
    let c = assembled(s, "range")?;
    let tol = s.config.tolerances;
    let an = &s.config.analysis;
    let l = assemble_operator(OperatorKind::L, c).map_err(numerical("operator"))?;
    let pts: Vec<Complex64> = numerical_range_sample(&l, &s.domain, an.strategy, an.samples, s.seed)
        .map_err(numerical("numerical range"))?
        .into_iter()
        .map(|r| r.z)
        .collect();
    let fitted = sector_fit(&pts).map_err(numerical("sector fit"))?;
    let max_violation = pts
        .iter()
        .map(|z| match (fitted.boundary, fitted.k) {
            (true, _) => fitted.gamma - z.re,
            (false, None) => z.im.abs().max(fitted.gamma - z.re),
            (false, Some(k)) => z.im.abs() - (z.re - fitted.gamma) / k,
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let inside = pts.iter().all(|&z| fitted.contains(z, tol.sector));
    let checks = vec![Check {
        id: "sector-containment",
        description: "numerical-range samples of L lie in the fitted sector",
        value: max_violation,
        threshold: tol.sector,
        pass: inside,
    }];
    let analytic = match s.sector {
        None => None,
        Some((consts, nu)) => {
            let acc = accretivity_for(c).map_err(numerical("accretivity constants"))?;
            let mu = acc.as_ref().map_or(0.0, |r| r.mu);
            Some(
                sector_params_analytic(c.a0, c.a1, consts, &nu, mu, c.inf_rho())
                    .map_err(numerical("analytic sector"))?,
            )
        }
    };
    let sector = Sector {
        samples: pts.len(),
        strategy: an.strategy,
        gamma_positive: fitted.gamma > 0.0,
        fitted,
        max_violation,
        analytic,
    };
    Ok(((pts, sector), checks))
}

#[derive(Debug, Clone, Serialize)]
pub struct Sandwich {
    pub report: SandwichReport,
    pub comparators: ComparisonOperators,
    pub accretivity: Option<AccretivityReport>,
    pub residuals: Vec<f64>,
    pub norm_bound: f64,
    pub method: String,
    pub coarse_exempt: bool,
}

/// Eigenvalues of `H` between those of the two comparison operators.
pub fn sandwich(s: &Setup) -> Outcome<Sandwich> {
    let c = assembled(s, "sandwich")?;
    let tol = s.config.tolerances;
    let m = s.config.analysis.eigenvalues;
    let run = sandwich_pipeline(c, m, s.seed, tol.sandwich).map_err(numerical("eigenvalue sandwich"))?;
    let worst = (0..run.report.lower.len())
        .map(|i| {
            let (l0, lh, l1) = (run.report.lower[i], run.report.middle[i], run.report.upper[i]);
            let scale = l0.abs().max(lh.abs()).max(l1.abs());
            ((l0 - lh).max(lh - l1)) / scale
        })
        .fold(f64::NEG_INFINITY, f64::max);
    let mut checks = vec![Check {
        id: "eigenvalue-sandwich",
        description: "λ_n(L₀) ≤ λ_n(H) ≤ λ_n(L₁) with relative slack",
        value: worst,
        threshold: tol.sandwich,
        pass: run.report.all_pass || run.coarse_exempt,
    }];
    if let Mesh::Interval { length, .. } = c.mesh {
        let mut err: f64 = 0.0;
        for cmp in [run.comparators.lower, run.comparators.upper] {
            err = err.max(comparator_error(&cmp, &c.mesh, length));
        }
        checks.push(Check::at_most(
            "comparator-spectrum",
            "relative error of comparator eigenvalues against aπ²n²/ℓ² + ρ, n ≤ 5",
            err,
            tol.comparator,
        ));
    }
    Ok((
        Sandwich {
            report: run.report,
            comparators: run.comparators,
            accretivity: run.accretivity,
            residuals: run.eigen.residuals,
            norm_bound: run.eigen.norm_bound,
            method: format!("{:?}", run.eigen.method).to_lowercase(),
            coarse_exempt: run.coarse_exempt,
        },
        checks,
    ))
}

fn comparator_error(cmp: &Comparator, mesh: &Mesh, length: f64) -> f64 {
    cmp.eigenvalues(mesh, 5)
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let k = (i + 1) as f64 * PI / length;
            let exact = cmp.a * k * k + cmp.rho;
            (l - exact).abs() / exact.abs()
        })
        .fold(0.0, f64::max)
}

fn assembled<'a>(s: &'a Setup, what: &str) -> Result<&'a fracspec::assembly::EllipticCoefficients, Failure> {
    s.coeffs.as_ref().ok_or_else(|| {
        Failure::Unsupported(format!("`{what}` needs an assembled operator: use an interval or box domain"))
    })
}

/// `re,im` rows with 17 significant digits.
pub fn range_csv(points: &[Complex64]) -> String {
    let mut out = String::from("re,im\n");
    for z in points {
        let _ = writeln!(out, "{:.16e},{:.16e}", z.re, z.im);
    }
    out
}

pub fn eigenvalues_csv(r: &SandwichReport) -> String {
    let mut out = String::from("n,lambda_L0,lambda_H,lambda_L1,pass\n");
    for i in 0..r.lower.len() {
        let _ = writeln!(
            out,
            "{},{:.16e},{:.16e},{:.16e},{}",
            i + 1,
            r.lower[i],
            r.middle[i],
            r.upper[i],
            r.pass[i]
        );
    }
    out
}
