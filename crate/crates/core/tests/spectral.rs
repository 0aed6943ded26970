use std::f64::consts::PI;

use approx::assert_relative_eq;
use fracspec::assembly::{
    assemble_operator, constant_coefficient_operator, CoefficientSpec, EllipticCoefficients, Mesh, OperatorKind,
};
use fracspec::fracops::FractionalOrder;
use fracspec::geometry::{ConvexDomain, Point};
use fracspec::quadrature::gamma_fn;
use fracspec::spectral::*;
use fracspec::trial::trial_ensemble;
use fracspec::{Complex64, Error};

fn half() -> FractionalOrder {
    FractionalOrder::new(0.5).unwrap()
}

fn monotone(inf_rho: f64) -> WeightConstants {
    WeightConstants {
        lambda: 1.0,
        m: 0.0,
        inf_rho,
        monotone: true,
    }
}

#[test]
fn accretivity_constant_in_the_plane() {
    // ½(1/Γ(½) + 1/Γ(3/2)) = ½(0.5641896 + 1.1283792)
    let r = accretivity_constants(half(), 2, 1.0, monotone(1.0), 1.0).unwrap();
    assert_relative_eq!(r.mu, 0.846284375321634, max_relative = 1e-13);
    assert_relative_eq!(r.mu1, 1.846284375321634, max_relative = 1e-13);
    assert!(r.monotone_branch);
    let one = accretivity_constants(half(), 1, 1.0, monotone(1.0), 0.0).unwrap();
    assert_relative_eq!(one.mu, 1.0 / PI.sqrt(), max_relative = 1e-13);
}

#[test]
fn zero_holder_constant_makes_branches_agree() {
    let mono = accretivity_constants(half(), 2, 1.3, monotone(0.7), 2.0).unwrap();
    let general = accretivity_constants(
        half(),
        2,
        1.3,
        WeightConstants {
            monotone: false,
            ..monotone(0.7)
        },
        2.0,
    )
    .unwrap();
    assert_eq!(mono.mu, general.mu);
    assert!(mono.mu1 >= mono.mu * 0.7);
}

#[test]
fn holder_correction_lowers_mu() {
    let w = WeightConstants {
        lambda: 0.9,
        m: 0.3,
        inf_rho: 1.0,
        monotone: false,
    };
    let r = accretivity_constants(half(), 2, 1.0, w, 1.0).unwrap();
    let correction = 0.5 * 0.3 / (2.0 * gamma_fn(0.5).unwrap() * 0.4);
    assert_relative_eq!(r.mu, 0.846284375321634 - correction, max_relative = 1e-13);
}

#[test]
fn holder_exponent_must_exceed_order() {
    let w = WeightConstants {
        lambda: 0.5,
        ..monotone(1.0)
    };
    assert!(matches!(
        accretivity_constants(half(), 2, 1.0, w, 1.0),
        Err(Error::HolderExponent { .. })
    ));
}

fn default_coefficients(cells: usize, rho: Option<f64>) -> EllipticCoefficients {
    EllipticCoefficients::new(CoefficientSpec::constant(1.0, rho), Mesh::interval(1.0, cells).unwrap(), half())
        .unwrap()
}

#[test]
fn real_trials_have_real_part_form_only() {
    let c = default_coefficients(128, Some(1.0));
    let k = assemble_operator(OperatorKind::Kipriyanov, &c).unwrap();
    let dom = ConvexDomain::interval(1.0).unwrap();
    let trials = trial_ensemble(&dom, 4, 30, false);
    let rep = empirical_rayleigh(&k, &|_| 1.0, &dom, &trials).unwrap();
    assert!(rep.split_error < 1e-13);
    let complex = trial_ensemble(&dom, 4, 30, true);
    let rep = empirical_rayleigh(&k, &|p: Point| 1.0 + p.x, &dom, &complex).unwrap();
    assert!(rep.split_error < 1e-10);
    assert_eq!(rep.trials_used, 30);
}

#[test]
fn dirichlet_laplacian_spectrum() {
    let mesh = Mesh::interval(1.0, 512).unwrap();
    let op = constant_coefficient_operator(&mesh, 1.0, 0.0).unwrap();
    let r = eigen_solve(&op, 5).unwrap();
    for (i, l) in r.values.iter().enumerate() {
        let k = (i + 1) as f64;
        assert_relative_eq!(*l, k * k * PI * PI, max_relative = 1e-2);
        assert!(r.residuals[i] <= 1e-8 * r.norm_bound);
    }
}

#[test]
fn real_part_dominates_mu1() {
    let c = default_coefficients(256, Some(1.0));
    let acc = accretivity_for(&c).unwrap().unwrap();
    let h = assemble_operator(OperatorKind::H, &c).unwrap();
    let r = eigen_solve(&h, 3).unwrap();
    assert!(r.values[0] >= acc.mu1);
    assert!(r.values.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn samples_of_hermitian_part_lie_in_its_spectrum() {
    let c = default_coefficients(96, Some(1.0));
    let h = assemble_operator(OperatorKind::H, &c).unwrap();
    let all = eigen_solve(&h, h.dim()).unwrap();
    let (lo, hi) = (all.values[0], *all.values.last().unwrap());
    let dom = ConvexDomain::interval(1.0).unwrap();
    for s in numerical_range_sample(&h, &dom, RangeStrategy::Mixed, 300, 5).unwrap() {
        assert!(s.z.im.abs() <= 1e-12 * s.z.norm().max(1.0));
        assert!(s.z.re >= lo * (1.0 - 1e-12) && s.z.re <= hi * (1.0 + 1e-12));
    }
}

#[test]
fn sector_inequality_holds_for_operator_samples() {
    for cells in [64, 200] {
        let c = default_coefficients(cells, Some(1.0));
        let l = assemble_operator(OperatorKind::L, &c).unwrap();
        let dom = ConvexDomain::interval(1.0).unwrap();
        let pts: Vec<Complex64> = numerical_range_sample(&l, &dom, RangeStrategy::Mixed, 400, 1)
            .unwrap()
            .into_iter()
            .map(|s| s.z)
            .collect();
        let s = sector_fit(&pts).unwrap();
        assert!(s.gamma > 0.0);
        let k = s.k.unwrap();
        // |Im⟨(L-γ)f, f⟩| ≤ (1/k) Re⟨(L-γ)f, f⟩ on fresh samples of unit norm
        let fresh = numerical_range_sample(&l, &dom, RangeStrategy::Smooth, 100, 77).unwrap();
        for z in fresh.iter().map(|s| s.z) {
            assert!(z.im.abs() <= (z.re - s.gamma) / k + 1e-10);
        }
        // tightness of the fitted sector
        let narrower = SectorEstimate {
            k: Some(1.0 / (s.theta - 1e-6).tan()),
            ..s
        };
        assert!(pts.iter().any(|&z| !narrower.contains(z, 0.0)));
        let raised = SectorEstimate {
            gamma: s.gamma + 1e-6,
            ..s
        };
        assert!(pts.iter().any(|&z| !raised.contains(z, 0.0)));
    }
}

#[test]
fn hermitian_operator_has_a_flat_sector() {
    let c = default_coefficients(128, None);
    let l = assemble_operator(OperatorKind::L, &c).unwrap();
    let dom = ConvexDomain::interval(1.0).unwrap();
    let pts: Vec<Complex64> = numerical_range_sample(&l, &dom, RangeStrategy::Mixed, 200, 2)
        .unwrap()
        .into_iter()
        .map(|s| s.z)
        .collect();
    let s = sector_fit(&pts).unwrap();
    assert!(s.theta <= 1e-6);
    assert!(s.k.is_none());
}

#[test]
fn comparator_eigenvalues_follow_the_continuous_oracle() {
    let mesh = Mesh::interval(1.0, 512).unwrap();
    for cmp in [Comparator { a: 1.0, rho: 0.5 }, Comparator { a: 2.5, rho: 17.0 }] {
        for (i, l) in cmp.eigenvalues(&mesh, 5).iter().enumerate() {
            let k = (i + 1) as f64;
            assert_relative_eq!(*l, cmp.a * PI * PI * k * k + cmp.rho, max_relative = 1e-2);
        }
    }
}

#[test]
fn one_dimensional_lower_comparator_uses_mu() {
    let c = default_coefficients(128, Some(1.0));
    let acc = accretivity_for(&c).unwrap().unwrap();
    let cmp = comparison_operators(&c, acc.mu, 3).unwrap();
    assert_relative_eq!(cmp.lower.rho, 0.564189583547756, max_relative = 1e-12);
    assert_eq!(cmp.lower.a, 1.0);
    assert_eq!(cmp.validation_fields, 50);
}

#[test]
fn overstated_mu_is_caught_by_validation() {
    let c = default_coefficients(128, Some(1.0));
    match comparison_operators(&c, 1e4, 3) {
        Err(Error::OrderingViolated { index, .. }) => assert_eq!(index, 0),
        other => panic!("expected an ordering violation, got {other:?}"),
    }
}

#[test]
fn sandwich_passes_and_survives_refinement() {
    let mut passes = Vec::new();
    for cells in [128, 256] {
        let c = default_coefficients(cells, Some(1.0));
        let run = sandwich_pipeline(&c, 10, 7, 1e-8).unwrap();
        assert!(run.eigen.residuals.iter().all(|&r| r <= 1e-8 * run.eigen.norm_bound));
        passes.push(run.report.all_pass);
    }
    // pass at N implies pass at 2N
    assert!(!passes[0] || passes[1]);
    assert!(passes[1]);
}

#[test]
fn sandwich_on_a_box_with_variable_weight() {
    let mesh = Mesh::unit_box(24, Point::new(0.0, 0.5)).unwrap();
    let spec = CoefficientSpec {
        rho: Some(std::sync::Arc::new(|p: Point| 1.0 + 0.25 * p.x)),
        lambda: 1.0,
        holder_constant: Some(0.25),
        ..CoefficientSpec::constant(1.5, None)
    };
    let c = EllipticCoefficients::new(spec, mesh, half()).unwrap();
    let run = sandwich_pipeline(&c, 8, 1, 1e-8).unwrap();
    assert!(run.report.all_pass, "{:?}", run.report);
    let acc = run.accretivity.unwrap();
    assert!(!acc.monotone_branch || acc.mu > 0.0);
}

#[test]
fn nu_example() {
    let p = NuParams::new(2, 0.4, 1.0, 2.0, 4.0, 0.01).unwrap();
    assert_relative_eq!(p.nu(), 0.91, max_relative = 1e-14);
}
