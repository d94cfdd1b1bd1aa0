mod common;

use common::c;
use hypspeeds_core::conformal::build_koenigs;
use hypspeeds_core::domains::{chain_height, chain_t, rectangle_chain, slit_plane, DomainDescriptor, Side, Slit};
use hypspeeds_core::qh::{quasihyperbolic_axis, rho_bounds_checked};
use hypspeeds_core::Error;
use proptest::prelude::*;

fn domains() -> Vec<DomainDescriptor> {
    vec![
        DomainDescriptor::half_plane_above(-1.0).unwrap(),
        DomainDescriptor::HalfPlaneDom { boundary_height: 2.0, side: Side::Below },
        DomainDescriptor::strip(-1.0, 1.0).unwrap(),
        DomainDescriptor::strip(-0.5, 3.0).unwrap(),
        rectangle_chain(3).unwrap(),
        slit_plane(vec![Slit { a: 20.0, b: 1.0 }]).unwrap(),
        slit_plane(vec![Slit { a: 5.0, b: 1.0 }, Slit { a: 10.0, b: 2.0 }]).unwrap(),
    ]
}

fn any_domain() -> impl Strategy<Value = DomainDescriptor> {
    (0..domains().len()).prop_map(|i| domains()[i].clone())
}

/// Adaptive Simpson quadrature.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            return left + right + diff / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn convex_in_positive_direction(d in any_domain(), x in -50.0..50.0f64, y in -5.0..5.0f64, t in 0.0..100.0f64) {
        let z = c(x, y);
        if d.contains(z) {
            prop_assert!(d.contains(z + t), "{} contains {z} but not {z} + {t}", d.name());
        }
    }

    #[test]
    fn boundary_distance_is_one_lipschitz(d in any_domain(), x in -50.0..50.0f64, y in -0.9..0.9f64, dx in -1.0..1.0f64, dy in -0.5..0.5f64) {
        let (z, w) = (c(x, y), c(x + dx, y + dy));
        if let (Ok(a), Ok(b)) = (d.dist_to_boundary(z), d.dist_to_boundary(w)) {
            prop_assert!((a - b).abs() <= (z - w).norm() * (1.0 + 1e-12) + 1e-12);
            prop_assert!(a > 0.0);
        }
    }

    #[test]
    fn symmetric_domains_are_mirror_invariant(x in -50.0..50.0f64, y in -0.9..0.9f64, i in 0..domains().len()) {
        let d = &domains()[i];
        let z = c(x, y);
        if d.is_conjugation_symmetric() {
            prop_assert_eq!(d.contains(z), d.contains(z.conj()));
            if let Ok(a) = d.dist_to_boundary(z) {
                prop_assert_eq!(a, d.dist_to_boundary(z.conj()).unwrap());
            }
        }
    }

    #[test]
    fn axis_length_matches_quadrature(i in 0..domains().len(), x1 in -10.0..30.0f64, len in 0.1..30.0f64) {
        let d = &domains()[i];
        let x2 = x1 + len;
        if let Ok(q) = quasihyperbolic_axis(d, x1, x2) {
            let f = |x: f64| 1.0 / d.dist_to_boundary(c(x, 0.0)).unwrap();
            let expect = simpson(&f, x1, x2, 1e-12);
            prop_assert!((q.value - expect).abs() <= 1e-9 * expect.max(1.0), "{} {} {}", d.name(), q.value, expect);
        }
    }

    #[test]
    fn rho_respects_bounds(i in 0..3usize, x2 in 0.1..40.0f64) {
        let d = &[DomainDescriptor::strip(-1.0, 1.0).unwrap(), rectangle_chain(2).unwrap(), DomainDescriptor::strip(-2.0, 1.5).unwrap()][i];
        let k = build_koenigs(d);
        if let Ok(k) = k {
            let (b, rho) = rho_bounds_checked(&k, 0.0, x2.min(d.query_limit())).unwrap();
            prop_assert!(rho <= b.upper * (1.0 + 1e-12));
        }
    }
}

#[test]
fn chain_segment_matches_quadrature() {
    let d = rectangle_chain(2).unwrap();
    let q = quasihyperbolic_axis(&d, 4.0, 16.0).unwrap();
    let f = |x: f64| 1.0 / d.dist_to_boundary(c(x, 0.0)).unwrap();
    let expect = simpson(&f, 4.0, 16.0, 1e-13);
    assert!((q.value - expect).abs() < 1e-9, "{} {}", q.value, expect);
    assert!(q.minimizing);
}

#[test]
fn chain_geometry() {
    assert_eq!(chain_t(0), 2.0);
    assert_eq!(chain_t(1), 4.0);
    assert_eq!(chain_t(6), 2f64.powi(64));
    assert_eq!(chain_height(0), 1.0);
    assert!((chain_height(1) - 2.0).abs() < 1e-15);
    assert!((chain_height(2) - 16f64.cbrt()).abs() < 1e-14);
    let d = rectangle_chain(2).unwrap();
    assert!(d.contains(c(3.0, 1.9)) && !d.contains(c(1.0, 1.5)));
    // beyond the last rectangle the chain continues as a strip
    assert!(d.contains(c(100.0, 2.0)));
    assert!(matches!(d.dist_to_boundary(c(100.0, 0.0)), Err(Error::BeyondTruncation { .. })));
}

#[test]
fn invalid_domains() {
    assert!(DomainDescriptor::strip(0.5, 1.0).is_err());
    assert!(DomainDescriptor::half_plane_above(0.0).is_err());
    assert!(rectangle_chain(0).is_err() && rectangle_chain(7).is_err());
    assert!(slit_plane(vec![Slit { a: 1.0, b: 0.0 }]).is_err());
    assert!(slit_plane(vec![]).is_err());
}

#[test]
fn toml_round_trip() {
    #[derive(serde::Serialize, serde::Deserialize)]
    struct W {
        domain: DomainDescriptor,
    }
    for d in domains() {
        let text = toml::to_string(&W { domain: d.clone() }).unwrap();
        let back: W = toml::from_str(&text).unwrap();
        assert_eq!(back.domain, d);
    }
    let bad = "[domain]\nkind = \"strip\"\ny_low = 1.0\ny_high = 2.0\n";
    assert!(toml::from_str::<W>(bad).is_err());
}
