mod common;

use std::f64::consts::{PI, TAU};

use common::c;
use hypspeeds_core::domains::DomainDescriptor;
use hypspeeds_core::harmonic::{
    arc_polyline, disk_arc_measure, geodesic_cut_measure, mc_arc_exit, mc_first_hit_with, ArcOnCircle, HmEstimate,
    Obstacle, WOS_EPS,
};
use hypspeeds_core::semigroup::SemigroupModel;
use hypspeeds_core::{ComplexPoint, Exec};
use num_complex::Complex64;
use proptest::prelude::*;

/// Poisson integral of the arc by composite Simpson.
fn poisson(z: ComplexPoint, arc: &ArcOnCircle) -> f64 {
    let n = 20_000;
    let h = arc.length() / n as f64;
    let k = |t: f64| (1.0 - z.norm_sqr()) / (Complex64::from_polar(1.0, t) - z).norm_sqr() / TAU;
    let mut s = k(arc.theta1) + k(arc.theta2);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * k(arc.theta1 + i as f64 * h);
    }
    s * h / 3.0
}

fn disk_point(rmax: f64) -> impl Strategy<Value = ComplexPoint> {
    (0.0..1.0f64, -PI..PI).prop_map(move |(r, t)| Complex64::from_polar(rmax * r.sqrt(), t))
}

fn joint(a: &HmEstimate, b: &HmEstimate) -> f64 {
    (a.std_error.powi(2) + b.std_error.powi(2)).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn arc_measure_matches_poisson_integral(z in disk_point(0.9), t1 in -PI..PI, len in 0.01..6.2f64) {
        let arc = ArcOnCircle::new(t1, t1 + len).unwrap();
        let a = disk_arc_measure(z, &arc).unwrap();
        prop_assert!((a - poisson(z, &arc)).abs() < 1e-9);
    }

    #[test]
    fn arc_measure_is_additive(z in disk_point(0.99), t1 in -PI..PI, len in 0.01..6.2f64, f in 0.01..0.99f64) {
        let whole = disk_arc_measure(z, &ArcOnCircle::new(t1, t1 + len).unwrap()).unwrap();
        let a = disk_arc_measure(z, &ArcOnCircle::new(t1, t1 + f * len).unwrap()).unwrap();
        let b = disk_arc_measure(z, &ArcOnCircle::new(t1 + f * len, t1 + len).unwrap()).unwrap();
        prop_assert!((whole - a - b).abs() < 1e-12);
        let rest = disk_arc_measure(z, &ArcOnCircle::new(t1 + len, t1 + TAU).unwrap()).unwrap();
        prop_assert!((whole + rest - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cut_measure_closed_form(p in 0.001..0.999f64) {
        let m = geodesic_cut_measure(p).unwrap();
        prop_assert!((m.value - m.closed_form).abs() < 1e-10);
        prop_assert!(m.arc.contains_angle(0.0));
    }
}

#[test]
fn full_circle_has_mass_one() {
    for z in [c(0.0, 0.0), c(0.5, -0.3), c(-0.99, 0.0)] {
        assert_eq!(disk_arc_measure(z, &ArcOnCircle::full()).unwrap(), 1.0);
    }
}

#[test]
fn arc_exit_off_centre() {
    let z = c(0.4, 0.3);
    let arc = ArcOnCircle::new(-0.5, 1.0).unwrap();
    let e = mc_arc_exit(z, &arc, 40_000, WOS_EPS, 11, Exec::default()).unwrap();
    let exact = disk_arc_measure(z, &arc).unwrap();
    assert!((e.value - exact).abs() <= 3.0 * e.std_error, "{} {exact}", e.value);
}

#[test]
fn sub_obstacle_is_hit_less_often() {
    // a sub-segment of a radial slit, and the slit plus a second segment
    let sub = Obstacle::segment(c(0.6, 0.0), c(0.8, 0.0)).unwrap();
    let sup = Obstacle::from_polylines(&[vec![c(0.5, 0.0), c(0.9, 0.0)], vec![c(-0.2, 0.5), c(-0.2, 0.9)]]).unwrap();
    let n = 40_000;
    let a = mc_first_hit_with(&sub, c(0.0, 0.0), n, WOS_EPS, 3, Exec::default()).unwrap();
    let b = mc_first_hit_with(&sup, c(0.0, 0.0), n, WOS_EPS, 4, Exec::default()).unwrap();
    assert!(a.value <= b.value + 3.0 * joint(&a, &b), "{} {}", a.value, b.value);
    assert!(b.value - a.value > 3.0 * joint(&a, &b), "the two obstacles are not told apart");
}

#[test]
fn sampling_is_deterministic() {
    let slit = Obstacle::segment(c(0.5, 0.0), c(1.0, 0.0)).unwrap();
    let a = mc_first_hit_with(&slit, c(0.1, 0.1), 5_000, WOS_EPS, 42, Exec::Sequential).unwrap();
    let b = mc_first_hit_with(&slit, c(0.1, 0.1), 5_000, WOS_EPS, 42, Exec::Parallel).unwrap();
    let p = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let d = p.install(|| mc_first_hit_with(&slit, c(0.1, 0.1), 5_000, WOS_EPS, 42, Exec::Parallel).unwrap());
    assert_eq!(a, b);
    assert_eq!(a, d);
    let e = mc_first_hit_with(&slit, c(0.1, 0.1), 5_000, WOS_EPS, 43, Exec::Sequential).unwrap();
    assert_ne!(a.value, e.value);
    assert_eq!((a.n_samples, a.seed), (5_000, 42));
}

#[test]
fn orbit_curve_is_resolved() {
    for d in [DomainDescriptor::strip(-1.0, 1.0).unwrap(), DomainDescriptor::half_plane_above(-1.0).unwrap()] {
        let m = SemigroupModel::new(&d).unwrap();
        let pts = arc_polyline(&m, 1.0).unwrap();
        assert!(pts.windows(2).all(|w| (w[1] - w[0]).norm() < 1e-3));
        assert_eq!(*pts.last().unwrap(), c(1.0, 0.0));
        let start = m.orbit(c(0.0, 0.0), 1.0).unwrap();
        assert!((pts[0] - start).norm() < 1e-12);
    }
}
