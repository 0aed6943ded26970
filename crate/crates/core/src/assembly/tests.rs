use std::f64::consts::PI;

use approx::assert_relative_eq;
use nalgebra::DMatrix;

use super::*;
use crate::fracops::frac_integral;

fn half() -> FractionalOrder {
    FractionalOrder::new(0.5).unwrap()
}

fn coeffs(mesh: Mesh, rho: Option<f64>) -> EllipticCoefficients {
    EllipticCoefficients::new(CoefficientSpec::constant(1.0, rho), mesh, half()).unwrap()
}

fn sym_eigenvalues(op: &OperatorMatrix) -> Vec<f64> {
    // mass is uniform here, so symmetric part of the matrix suffices
    let d = op.matrix.to_dense();
    let s: DMatrix<f64> = (&d + d.transpose()) * 0.5;
    let mut ev: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[test]
fn integral_matrix_matches_pointwise_operator() {
    let mesh = Mesh::interval(1.0, 64).unwrap();
    let op = fractional_matrix(RayKind::Integral(Side::Left), &mesh, half()).unwrap();
    let ones = vec![1.0; 65];
    let geom = Arc::new(RayGeometry::new(mesh.domain().unwrap(), Point::default(), 1, 64).unwrap());
    let g = GridFunction::from_real_fn(geom, |_| 1.0).unwrap();
    let pointwise = frac_integral(&g, half(), Side::Left);
    for (a, b) in op.apply(&ones).iter().zip(pointwise.ray(0)) {
        assert_eq!(*a, b.re);
    }
}

#[test]
fn real_part_is_self_adjoint() {
    let mesh = Mesh::interval(1.0, 64).unwrap();
    let c = coeffs(mesh, Some(1.0));
    let h = assemble_operator(OperatorKind::H, &c).unwrap();
    assert!(h.mass_asymmetry() <= 1e-12);
    let l = assemble_operator(OperatorKind::L, &c).unwrap();
    assert!(l.mass_asymmetry() > 1e-6);

    let mesh = Mesh::unit_box(12, Point::new(0.5, 0.0)).unwrap();
    let h = assemble_operator(OperatorKind::H, &coeffs(mesh, Some(1.0))).unwrap();
    assert!(h.mass_asymmetry() <= 1e-12);
}

#[test]
fn dirichlet_laplacian_ground_state() {
    let mesh = Mesh::interval(1.0, 512).unwrap();
    let l = assemble_operator(OperatorKind::L, &coeffs(mesh, None)).unwrap();
    let ev = sym_eigenvalues(&l);
    assert!((ev[0] - PI * PI).abs() <= 0.01 * PI * PI, "{}", ev[0]);
}

#[test]
fn comparator_spectrum_is_shifted_laplacian() {
    let mesh = Mesh::interval(1.0, 128).unwrap();
    let op = constant_coefficient_operator(&mesh, 2.0, 0.25).unwrap();
    let ev = sym_eigenvalues(&op);
    for n in 1..=5 {
        let expect = 2.0 * PI * PI * (n * n) as f64 + 0.25;
        assert!((ev[n - 1] - expect).abs() <= 0.01 * expect);
    }
}

#[test]
fn energy_of_first_sine_mode() {
    let mesh = Mesh::interval(1.0, 512).unwrap();
    let c = coeffs(mesh, None);
    let t = form_matrix(&c, FormKind::T).unwrap();
    let u: Vec<f64> = mesh.interior_points().iter().map(|p| (PI * p.x).sin()).collect();
    assert_relative_eq!(t.eval(&u, &u), PI * PI / 2.0, max_relative = 1e-2);
    assert_relative_eq!(h1_seminorm_sq(&mesh, &u).unwrap(), PI * PI / 2.0, max_relative = 1e-2);
}

#[test]
fn operator_and_form_agree() {
    let mesh = Mesh::interval(1.0, 200).unwrap();
    let c = coeffs(mesh, Some(1.0));
    let l = assemble_operator(OperatorKind::L, &c).unwrap();
    let t = form_matrix(&c, FormKind::T).unwrap();
    let pts = mesh.interior_points();
    let u: Vec<f64> = pts.iter().map(|p| p.x * (1.0 - p.x) * (2.0 * p.x).exp()).collect();
    let v: Vec<f64> = pts.iter().map(|p| (3.0 * PI * p.x).sin()).collect();
    let lhs = l.inner(&l.apply(&u), &v);
    assert_relative_eq!(lhs, t.eval(&u, &v), max_relative = 1e-12);
    let h = form_matrix(&c, FormKind::H).unwrap();
    assert_relative_eq!(h.eval(&u, &v), h.eval(&v, &u), max_relative = 1e-12);
}

#[test]
fn green_residual_vanishes_and_converges() {
    let run = |n: usize| {
        let mesh = Mesh::interval(1.0, n).unwrap();
        let c = coeffs(mesh, None);
        let pts = mesh.interior_points();
        let u: Vec<f64> = pts.iter().map(|p| (PI * p.x).sin()).collect();
        let v: Vec<f64> = pts.iter().map(|p| (2.0 * PI * p.x).sin()).collect();
        let w: Vec<f64> = pts.iter().map(|p| p.x * p.x * (1.0 - p.x)).collect();
        (green_residual(&u, &v, &c).unwrap(), green_residual(&u, &w, &c).unwrap())
    };
    let (a, b) = run(64);
    let (c, d) = run(128);
    assert!(a < 1e-10 && c < 1e-10, "{a} {c}");
    assert!((b / d).log2() >= 1.0, "{b} {d}");

    let mesh = Mesh::unit_box(16, Point::default()).unwrap();
    let c = coeffs(mesh, None);
    let zero = vec![0.0; mesh.interior_count()];
    let u: Vec<f64> = mesh.interior_points().iter().map(|p| p.x * p.y).collect();
    assert_eq!(green_residual(&zero, &u, &c).unwrap(), 0.0);
}

#[test]
fn box_rays_match_fine_ray_quadrature() {
    // left integral of f = sin πx sin πy along the ray through each node
    let mesh = Mesh::unit_box(32, Point::new(0.5, 0.0)).unwrap();
    let op = fractional_matrix(RayKind::Integral(Side::Left), &mesh, half()).unwrap();
    let f = |p: Point| (PI * p.x).sin() * (PI * p.y).sin();
    let vals: Vec<f64> = op.points.iter().map(|&p| f(p)).collect();
    let out = op.apply(&vals);
    let base = mesh.base();
    let mut worst: f64 = 0.0;
    for (q, p) in op.points.iter().enumerate().step_by(37) {
        let r = p.dist(base);
        let e = Point::new((p.x - base.x) / r, (p.y - base.y) / r);
        let m = 2000;
        let nodes: Vec<f64> = (0..=m).map(|j| r * j as f64 / m as f64).collect();
        let row = ray_row(RayKind::Integral(Side::Left), &nodes, m, 0.5, 2);
        let exact: f64 = row.iter().zip(&nodes).map(|(c, t)| c * f(base.along(e, *t))).sum();
        worst = worst.max((out[q] - exact).abs());
    }
    assert!(worst < 2e-3, "{worst}");
}

#[test]
fn validation_errors() {
    let mesh = Mesh::interval(1.0, 16).unwrap();
    let bad = CoefficientSpec::constant(-1.0, Some(1.0));
    assert!(matches!(
        EllipticCoefficients::new(bad, mesh, half()),
        Err(Error::Ellipticity { .. })
    ));
    let mut spec = CoefficientSpec::constant(1.0, Some(1.0));
    spec.lambda = 0.5;
    assert!(matches!(
        EllipticCoefficients::new(spec, mesh, half()),
        Err(Error::HolderExponent { .. })
    ));
    assert!(Mesh::unit_box(8, Point::new(0.5, 0.5)).is_err());
    assert!(Mesh::interval(1.0, 1).is_err());
    let neg = CoefficientSpec {
        rho: Some(Arc::new(|p: Point| p.x - 0.5)),
        ..CoefficientSpec::constant(1.0, None)
    };
    assert!(EllipticCoefficients::new(neg, mesh, half()).is_err());
}

#[test]
fn constant_coefficients_report_their_bounds() {
    let mesh = Mesh::unit_box(8, Point::default()).unwrap();
    let c = EllipticCoefficients::new(CoefficientSpec::constant(2.0, None), mesh, half()).unwrap();
    assert_eq!(c.a0, 2.0);
    assert_eq!(c.a_upper, 2.0);
    assert_relative_eq!(c.a1, 2.0 * 2f64.sqrt());
    assert_eq!(c.inf_rho(), 0.0);
}
