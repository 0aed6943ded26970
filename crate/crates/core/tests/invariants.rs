use std::f64::consts::PI;
use std::sync::Arc;

use fracspec::assembly::{assemble_operator, CoefficientSpec, EllipticCoefficients, Mesh, OperatorKind};
use fracspec::fracops::*;
use fracspec::geometry::{weighted_inner_product, ConvexDomain, GridFunction, Point, RayGeometry};
use fracspec::quadrature::gamma_fn;
use fracspec::spectral::{sandwich_check, sector_fit, SectorEstimate};
use fracspec::Complex64;
use proptest::prelude::*;

fn order(a: f64) -> FractionalOrder {
    FractionalOrder::new(a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_is_positive(t in 1e-6f64..1e6, a in 0.05f64..0.95) {
        prop_assert!(kernel_k(t, order(a)) > 0.0);
        prop_assert_eq!(kernel_k(-t, order(a)), 0.0);
    }

    #[test]
    fn cn_identity_holds(n in 1usize..9, a in 0.02f64..0.98) {
        let c = cn_alpha(n, order(a)).unwrap();
        let e = cn_alpha_expanded(n, order(a)).unwrap();
        prop_assert!((c - e).abs() < 1e-12 * c.max(1.0));
    }

    #[test]
    fn gamma_recurrence(x in 0.1f64..25.0) {
        let lhs = gamma_fn(x + 1.0).unwrap();
        let rhs = x * gamma_fn(x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs);
    }

    #[test]
    fn linear_densities_are_integrated_exactly(
        a in 0.05f64..0.95,
        c0 in -2.0f64..2.0,
        c1 in -2.0f64..2.0,
        cells in 4usize..60,
        grade in 1.0f64..2.5,
    ) {
        let dom = ConvexDomain::interval(1.0).unwrap();
        let g = Arc::new(RayGeometry::graded(dom, Point::default(), 1, cells, grade).unwrap());
        let f = GridFunction::from_real_fn(g.clone(), |s| c0 + c1 * s.r).unwrap();
        let out = frac_integral(&f, order(a), Side::Left);
        let g1 = gamma_fn(a + 1.0).unwrap();
        let g2 = gamma_fn(a + 2.0).unwrap();
        for (z, &r) in out.ray(0).iter().zip(g.grids()[0].nodes()) {
            let exact = c0 * r.powf(a) / g1 + c1 * r.powf(a + 1.0) / g2;
            prop_assert!((z.re - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn operators_are_linear(
        a in 0.05f64..0.95,
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
        k in 1.0f64..6.0,
    ) {
        let g = Arc::new(RayGeometry::new(ConvexDomain::disk(0.5).unwrap(), Point::new(0.5, 0.0), 3, 40).unwrap());
        let f = GridFunction::from_real_fn(g.clone(), |p| (k * p.r).sin()).unwrap();
        let h = GridFunction::from_real_fn(g.clone(), |p| p.r * p.r - p.point.y).unwrap();
        let comb = f.scale(Complex64::new(s, 0.0)).add(&h.scale(Complex64::new(t, 0.0))).unwrap();
        for kind in [
            RayKind::Integral(Side::Left),
            RayKind::Derivative(Side::Right),
            RayKind::Kipriyanov,
            RayKind::Truncated(Side::Left, 0.1),
        ] {
            let op = RayOperator::build(g.clone(), kind, order(a));
            let lhs = op.apply(&comb).unwrap();
            let rhs = op.apply(&f).unwrap().scale(Complex64::new(s, 0.0))
                .add(&op.apply(&h).unwrap().scale(Complex64::new(t, 0.0))).unwrap();
            let scale = 1.0 + lhs.max_abs(false);
            prop_assert!(lhs.sub(&rhs).unwrap().max_abs(false) <= 1e-12 * scale);
        }
    }

    #[test]
    fn inner_product_is_a_norm(re in prop::collection::vec(-1.0f64..1.0, 41), im in prop::collection::vec(-1.0f64..1.0, 41)) {
        let g = Arc::new(RayGeometry::new(ConvexDomain::interval(2.0).unwrap(), Point::default(), 1, 40).unwrap());
        let vals = vec![re.iter().zip(&im).map(|(a, b)| Complex64::new(*a, *b)).collect()];
        let f = GridFunction::new(g, vals).unwrap();
        let ip = weighted_inner_product(&f, &f).unwrap();
        prop_assert_eq!(ip.im, 0.0);
        prop_assert!(ip.re >= 0.0);
        prop_assert_eq!(ip.re == 0.0, f.max_abs(false) == 0.0);
    }

    #[test]
    fn chords_never_exceed_diameter(phi in 0.0f64..(2.0 * PI), psi in -1.5f64..1.5, side in 0usize..4) {
        let disk = ConvexDomain::disk(0.7).unwrap();
        let p = Point::new(0.7 * phi.cos(), 0.7 * phi.sin());
        let inward = Point::new(-phi.cos(), -phi.sin());
        let e = Point::new(inward.x * psi.cos() - inward.y * psi.sin(), inward.x * psi.sin() + inward.y * psi.cos());
        prop_assert!(disk.chord_length(p, e) <= disk.diameter() * (1.0 + 1e-12));
        let rect = ConvexDomain::rect(2.0, 1.0).unwrap();
        let base = [Point::new(0.0, 0.4), Point::new(2.0, 0.7), Point::new(1.3, 0.0), Point::new(0.5, 1.0)][side];
        let e = Point::new(phi.cos(), phi.sin());
        prop_assert!(rect.chord_length(base, e) <= rect.diameter() * (1.0 + 1e-12));
    }

    #[test]
    fn fitted_sector_contains_and_is_tight(
        pts in prop::collection::vec((0.5f64..10.0, -5.0f64..5.0), 2..40),
    ) {
        let z: Vec<Complex64> = pts.iter().map(|&(a, b)| Complex64::new(a, b)).collect();
        let s = sector_fit(&z).unwrap();
        prop_assert!(z.iter().all(|&w| s.contains(w, 1e-12)));
        prop_assert!(s.theta < PI / 2.0);
        if s.theta > 1e-5 {
            let narrow = SectorEstimate { k: Some(1.0 / (s.theta - 1e-6).tan()), ..s };
            prop_assert!(z.iter().any(|&w| !narrow.contains(w, 0.0)));
            let raised = SectorEstimate { gamma: s.gamma + 1e-6, ..s };
            prop_assert!(z.iter().any(|&w| !raised.contains(w, 0.0)));
        }
    }

    #[test]
    fn sandwich_flags_match_ordering(
        base in prop::collection::vec(0.1f64..1.0, 1..12),
        lo in prop::collection::vec(0.0f64..0.5, 12),
        hi in prop::collection::vec(0.0f64..0.5, 12),
        bad in 0usize..12,
    ) {
        let mut mid: Vec<f64> = base.iter().scan(0.0, |acc, d| { *acc += d; Some(*acc) }).collect();
        let n = mid.len();
        let lower: Vec<f64> = (0..n).map(|i| mid[i] - lo[i] * 0.1).collect();
        let upper: Vec<f64> = (0..n).map(|i| mid[i] + hi[i] * 0.1).collect();
        let ok = sandwich_check(&lower, &mid, &upper, 1e-8).unwrap();
        prop_assert!(ok.all_pass);
        let b = bad % n;
        mid[b] = upper[b] + 1.0;
        if mid.windows(2).all(|w| w[0] <= w[1]) {
            let r = sandwich_check(&lower, &mid, &upper, 1e-8).unwrap();
            prop_assert_eq!(r.first_failure, Some(b + 1));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn hermitian_quotients_are_real(seed in 0u64..1000, a in 0.1f64..0.9, rho in 0.1f64..3.0) {
        let c = EllipticCoefficients::new(
            CoefficientSpec::constant(1.0, Some(rho)),
            Mesh::interval(1.0, 40).unwrap(),
            order(a),
        ).unwrap();
        let h = assemble_operator(OperatorKind::H, &c).unwrap();
        let u: Vec<Complex64> = (0..h.dim())
            .map(|i| {
                let x = ((i as u64 + 1) * (seed + 7)) as f64;
                Complex64::new(x.sin(), (1.3 * x).cos())
            })
            .collect();
        let q = h.rayleigh(&u).unwrap();
        prop_assert!(q.im.abs() <= 1e-12 * q.norm());
    }
}
