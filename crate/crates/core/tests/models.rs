use exactsac::models::{fit_ellipse, fit_line, EllipseModel, GeometricModel, Point2};
use exactsac::seeding::{stream, Purpose};
use proptest::prelude::*;
use rand::Rng;

fn random_point<R: Rng>(rng: &mut R) -> Point2<f64> {
    Point2::new(
        rng.random_range(-100.0..100.0),
        rng.random_range(-100.0..100.0),
    )
}

/// Nearest boundary point by dense parameter sampling plus ternary refinement.
fn oracle_distance(e: &EllipseModel<f64>, p: Point2<f64>) -> f64 {
    const SAMPLES: usize = 50_000;
    let f = |t: f64| (e.point_at(t) - p).norm();
    let step = std::f64::consts::TAU / SAMPLES as f64;
    let best = (0..SAMPLES)
        .map(|j| (j, f(j as f64 * step)))
        .fold(
            (0, f64::INFINITY),
            |acc, x| if x.1 < acc.1 { x } else { acc },
        )
        .0;
    let (mut lo, mut hi) = ((best as f64 - 1.0) * step, (best as f64 + 1.0) * step);
    for _ in 0..200 {
        let (m1, m2) = (lo + (hi - lo) / 3.0, hi - (hi - lo) / 3.0);
        if f(m1) < f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    f(0.5 * (lo + hi))
}

#[test]
fn fitted_ellipses_classify_like_their_distance() {
    // Ellipses through random box points are the elongated hypotheses RANSAC sees.
    let mut rng = stream(11, Purpose::Synthesis);
    let mut fitted = 0;
    while fitted < 300 {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|_| random_point(&mut rng));
        let Ok(e) = fit_ellipse(&pts) else { continue };
        fitted += 1;
        for _ in 0..10 {
            let p = random_point(&mut rng);
            let d = e.distance(p);
            for r in [1.0, 3.0, 5.0] {
                assert_eq!(e.within(p, r), d <= r, "radius {r}, distance {d}");
            }
        }
        let p = random_point(&mut rng);
        let d = e.distance(p);
        assert!((d - oracle_distance(&e, p)).abs() < 1e-6, "{d} vs oracle");
    }
}

#[test]
fn fit_ignores_sample_order() {
    let mut rng = stream(5, Purpose::Synthesis);
    let mut checked = 0;
    while checked < 200 {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|_| random_point(&mut rng));
        let Ok(e) = fit_ellipse(&pts) else { continue };
        checked += 1;
        let mut rev = pts;
        rev.reverse();
        let e2 = fit_ellipse(&rev).unwrap();
        for (a, b) in e.conic().iter().zip(e2.conic()) {
            assert!((a - b).abs() < 1e-9);
        }
        let l1 = fit_line(pts[0], pts[1]).unwrap();
        let l2 = fit_line(pts[1], pts[0]).unwrap();
        assert!(
            (l1.normal() - l2.normal()).norm() < 1e-12 && (l1.offset() - l2.offset()).abs() < 1e-9
        );
    }
}

#[test]
fn refit_on_own_boundary_is_stable() {
    let mut rng = stream(9, Purpose::Synthesis);
    let mut checked = 0;
    while checked < 200 {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|_| random_point(&mut rng));
        let Ok(e) = fit_ellipse(&pts) else { continue };
        if e.semi_major() / e.semi_minor() > 20.0 {
            continue;
        }
        checked += 1;
        let again: [Point2<f64>; 5] = std::array::from_fn(|i| e.point_at(0.4 + 1.2 * i as f64));
        let e2 = fit_ellipse(&again).unwrap();
        for (a, b) in e.conic().iter().zip(e2.conic()) {
            assert!((a - b).abs() < 1e-8);
        }
        for p in pts {
            assert!(e.distance(p) < 1e-6);
        }
    }
}

proptest! {
    #[test]
    fn line_canonical_form(x1 in -100.0f64..100.0, y1 in -100.0f64..100.0, dx in -50.0f64..50.0, dy in -50.0f64..50.0) {
        prop_assume!(dx.hypot(dy) > 1e-3);
        let (a, b) = (Point2::new(x1, y1), Point2::new(x1 + dx, y1 + dy));
        let l = fit_line(a, b).unwrap();
        let n = l.normal();
        prop_assert!((n.norm() - 1.0).abs() < 1e-9);
        prop_assert!(n.y > 0.0 || (n.y == 0.0 && n.x > 0.0));
        prop_assert!(l.distance(a) < 1e-9 && l.distance(b) < 1e-9);
    }

    #[test]
    fn geometry_round_trip(cx in -50.0f64..50.0, cy in -50.0f64..50.0, a in 1.0f64..60.0, ratio in 0.05f64..1.0, angle in 0.0f64..std::f64::consts::PI) {
        let e = EllipseModel::from_geometry(Point2::new(cx, cy), a, a * ratio, angle).unwrap();
        prop_assert!((e.semi_major() - a).abs() < 1e-6 * a);
        prop_assert!((e.semi_minor() - a * ratio).abs() < 1e-6 * a);
        let norm: f64 = e.conic().iter().map(|c| c * c).sum::<f64>().sqrt();
        prop_assert!((norm - 1.0).abs() < 1e-12);
        prop_assert!(e.conic()[0] >= 0.0);
    }
}
