use serde::{Deserialize, Serialize};

use super::{GeometricModel, Point2};
use crate::{Error, Real, Result};

/// Ellipse stored as the conic `a x^2 + b xy + c y^2 + d x + e y + f = 0`.
///
/// The coefficient vector has unit norm and `a > 0`. Center, semi-axes and
/// orientation are derived once at construction and used by the distance
/// routines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ConicRepr<T>", try_from = "ConicRepr<T>")]
pub struct EllipseModel<T: Real> {
    conic: [T; 6],
    center: Point2<T>,
    semi_major: T,
    semi_minor: T,
    /// Direction of the major axis.
    axis: Point2<T>,
}

#[derive(Serialize, Deserialize)]
struct ConicRepr<T> {
    conic: [T; 6],
}

impl<T: Real> From<EllipseModel<T>> for ConicRepr<T> {
    fn from(m: EllipseModel<T>) -> Self {
        ConicRepr { conic: m.conic }
    }
}

impl<T: Real> TryFrom<ConicRepr<T>> for EllipseModel<T> {
    type Error = Error;

    fn try_from(r: ConicRepr<T>) -> Result<Self> {
        EllipseModel::from_conic(r.conic)
    }
}

impl<T: Real> EllipseModel<T> {
    /// Normalizes the coefficients and rejects anything that is not a real,
    /// non-degenerate ellipse.
    pub fn from_conic(coeffs: [T; 6]) -> Result<Self> {
        let norm = coeffs.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
        if !(norm > T::zero()) || !norm.is_finite() {
            return Err(Error::DegenerateSample("conic coefficients vanish"));
        }
        let sign = if coeffs[0] < T::zero() {
            -T::one()
        } else {
            T::one()
        };
        let conic = coeffs.map(|v| sign * v / norm);
        let [a, b, c, d, e, f] = conic;

        let two = T::lit(2.0);
        let det = T::lit(4.0) * a * c - b * b;
        if !(det > T::zero()) {
            return Err(Error::DegenerateSample(
                "conic is not an ellipse (b^2 - 4ac >= 0)",
            ));
        }
        let center = Point2::new((b * e - two * c * d) / det, (b * d - two * a * e) / det);
        let value_at_center = f + (d * center.x + e * center.y) / two;

        let half_sum = (a + c) / two;
        let radius = ((a - c) / two).hypot(b / two);
        let (low, high) = (half_sum - radius, half_sum + radius);
        if !(value_at_center < T::zero()) || !(low > T::zero()) {
            return Err(Error::DegenerateSample("conic has no real points"));
        }
        let semi_major = (-value_at_center / low).sqrt();
        let semi_minor = (-value_at_center / high).sqrt();
        if !semi_major.is_finite() || !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::DegenerateSample("ellipse parameters overflow"));
        }
        let theta = b.atan2(a - c) / two + T::FRAC_PI_2();
        Ok(Self {
            conic,
            center,
            semi_major,
            semi_minor,
            axis: Point2::new(theta.cos(), theta.sin()),
        })
    }

    /// Ellipse with the given center, semi-axes and major-axis angle.
    pub fn from_geometry(center: Point2<T>, semi_a: T, semi_b: T, angle: T) -> Result<Self> {
        if !(semi_a > T::zero() && semi_b > T::zero()) {
            return Err(Error::InvalidParameter("semi-axes must be positive".into()));
        }
        let (s, c) = angle.sin_cos();
        let (ia, ib) = ((semi_a * semi_a).recip(), (semi_b * semi_b).recip());
        let two = T::lit(2.0);
        let qa = c * c * ia + s * s * ib;
        let qb = two * c * s * (ia - ib);
        let qc = s * s * ia + c * c * ib;
        let (x0, y0) = (center.x, center.y);
        Self::from_conic([
            qa,
            qb,
            qc,
            -two * qa * x0 - qb * y0,
            -qb * x0 - two * qc * y0,
            qa * x0 * x0 + qb * x0 * y0 + qc * y0 * y0 - T::one(),
        ])
    }

    pub fn conic(&self) -> [T; 6] {
        self.conic
    }

    pub fn center(&self) -> Point2<T> {
        self.center
    }

    pub fn semi_major(&self) -> T {
        self.semi_major
    }

    pub fn semi_minor(&self) -> T {
        self.semi_minor
    }

    /// Angle of the major axis in `(-pi, pi]`.
    pub fn angle(&self) -> T {
        self.axis.y.atan2(self.axis.x)
    }

    /// Conic polynomial evaluated at `p`.
    pub fn algebraic(&self, p: Point2<T>) -> T {
        let [a, b, c, d, e, f] = self.conic;
        a * p.x * p.x + b * p.x * p.y + c * p.y * p.y + d * p.x + e * p.y + f
    }

    /// Boundary point at parametric angle `t`.
    pub fn point_at(&self, t: T) -> Point2<T> {
        let (s, c) = t.sin_cos();
        let (u, v) = (self.semi_major * c, self.semi_minor * s);
        let ax = self.axis;
        Point2::new(
            self.center.x + ax.x * u - ax.y * v,
            self.center.y + ax.y * u + ax.x * v,
        )
    }

    /// Coordinates of `p` in the frame where the major axis is `u`.
    fn to_frame(&self, p: Point2<T>) -> (T, T) {
        let d = p - self.center;
        (
            self.axis.x * d.x + self.axis.y * d.y,
            self.axis.x * d.y - self.axis.y * d.x,
        )
    }
}

/// Closest-point distance from `(y0, y1)` with `y0, y1 >= 0` to the
/// axis-aligned ellipse with semi-axes `e0 >= e1 > 0`.
fn quadrant_distance<T: Real>(e0: T, e1: T, y0: T, y1: T) -> T {
    let zero = T::zero();
    if y1 > zero {
        if y0 > zero {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - T::one();
            if g == zero {
                return zero;
            }
            let r0 = (e0 / e1) * (e0 / e1);
            let s = secular_root(r0, z0, z1, g);
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + T::one());
            (x0 - y0).hypot(x1 - y1)
        } else {
            (y1 - e1).abs()
        }
    } else {
        let numer = e0 * y0;
        let denom = e0 * e0 - e1 * e1;
        if numer < denom {
            let xd = numer / denom;
            let x0 = e0 * xd;
            let x1 = e1 * (T::one() - xd * xd).max(zero).sqrt();
            (x0 - y0).hypot(x1)
        } else {
            (y0 - e0).abs()
        }
    }
}

/// Root of `G(s) = (r0 z0 / (s + r0))^2 + (z1 / (s + 1))^2 - 1` by bisection.
///
/// `G` is strictly decreasing for `s > -1`. Both terms are at most 1 at the
/// root, so it lies in `[max(z1 - 1, r0 z0 - r0), max(0, |(r0 z0, z1)| - 1)]`.
/// Iteration stops when the midpoint can no longer be distinguished from an
/// endpoint.
fn secular_root<T: Real>(r0: T, z0: T, z1: T, g: T) -> T {
    let one = T::one();
    let n0 = r0 * z0;
    let mut lo = (z1 - one).max(n0 - r0);
    let mut hi = if g < T::zero() {
        T::zero()
    } else {
        n0.hypot(z1) - one
    };
    if hi < lo {
        hi = lo;
    }
    let mut s = lo;
    for _ in 0..4096 {
        s = (lo + hi) / T::lit(2.0);
        if s == lo || s == hi {
            break;
        }
        let a = n0 / (s + r0);
        let b = z1 / (s + one);
        let val = a * a + b * b - one;
        if val > T::zero() {
            lo = s;
        } else if val < T::zero() {
            hi = s;
        } else {
            break;
        }
    }
    s
}

impl<T: Real> GeometricModel<T> for EllipseModel<T> {
    const SAMPLE_SIZE: usize = 5;

    fn fit(sample: &[Point2<T>]) -> Result<Self> {
        let pts: &[Point2<T>; 5] = sample.try_into().map_err(|_| {
            Error::InvalidParameter(format!("an ellipse needs 5 points, got {}", sample.len()))
        })?;
        fit_ellipse(pts)
    }

    fn distance(&self, p: Point2<T>) -> T {
        let (u, v) = self.to_frame(p);
        quadrant_distance(self.semi_major, self.semi_minor, u.abs(), v.abs())
    }

    /// Decides most points from nested axis-aligned ellipses and only falls
    /// back to the exact distance inside a thin band around the boundary:
    ///
    /// * outside `(1 + r/b) E`: the dilation of `E` by a disc of radius `r`
    ///   lies inside this ellipse, so the point is farther than `r`;
    /// * inside `(1 - r/b) E`: same argument for the erosion;
    /// * inside `E(a + r, b + r)` and outside `E(a - r, b - r)`: both lie
    ///   between the erosion and the dilation, so the point is within `r`.
    fn within(&self, p: Point2<T>, radius: T) -> bool {
        let (u, v) = self.to_frame(p);
        let (a, b) = (self.semi_major, self.semi_minor);
        let one = T::one();
        let q = |sa: T, sb: T| (u / sa) * (u / sa) + (v / sb) * (v / sb);

        let grow = one + radius / b;
        if q(a * grow, b * grow) > one {
            return false;
        }
        let deep_inside_empty = radius >= b;
        if !deep_inside_empty {
            let shrink = one - radius / b;
            if q(a * shrink, b * shrink) < one {
                return false;
            }
        }
        if q(a + radius, b + radius) <= one
            && (deep_inside_empty || q(a - radius, b - radius) >= one)
        {
            return true;
        }
        quadrant_distance(a, b, u.abs(), v.abs()) <= radius
    }
}

/// The unique conic through five points, rejected unless it is an ellipse.
///
/// Points are centered and scaled before building the 5x6 design matrix; the
/// null vector comes from Gaussian elimination with full pivoting and is then
/// mapped back to the original coordinates.
pub fn fit_ellipse<T: Real>(pts: &[Point2<T>; 5]) -> Result<EllipseModel<T>> {
    let five = T::lit(5.0);
    let mean = pts.iter().fold(Point2::default(), |acc, &p| acc + p) * five.recip();
    let spread = pts.iter().map(|&p| (p - mean).norm()).sum::<T>() / five;
    if !(spread > T::zero()) || !spread.is_finite() {
        return Err(Error::DegenerateSample("coincident points"));
    }
    let scale = T::SQRT_2() / spread;

    let mut m = [[T::zero(); 6]; 5];
    for (row, &p) in m.iter_mut().zip(pts) {
        let q = (p - mean) * scale;
        *row = [q.x * q.x, q.x * q.y, q.y * q.y, q.x, q.y, T::one()];
    }
    let v = null_vector(&mut m)?;

    // Undo x' = s (x - mx), y' = s (y - my).
    let [a, b, c, d, e, f] = v;
    let (mx, my) = (mean.x, mean.y);
    let s = scale;
    let s2 = s * s;
    let two = T::lit(2.0);
    let conic = [
        a * s2,
        b * s2,
        c * s2,
        -two * a * s2 * mx - b * s2 * my + d * s,
        -b * s2 * mx - two * c * s2 * my + e * s,
        a * s2 * mx * mx + b * s2 * mx * my + c * s2 * my * my - d * s * mx - e * s * my + f,
    ];
    EllipseModel::from_conic(conic)
}

/// Null vector of a full-rank 5x6 matrix; fails when the rank is below 5.
fn null_vector<T: Real>(m: &mut [[T; 6]; 5]) -> Result<[T; 6]> {
    let mut cols = [0usize, 1, 2, 3, 4, 5];
    let mut first_pivot = T::zero();
    let tol = T::epsilon() * T::lit(1024.0);
    for r in 0..5 {
        let (mut pr, mut pc, mut best) = (r, r, T::zero());
        for (i, row) in m.iter().enumerate().skip(r) {
            for (j, &col) in cols.iter().enumerate().skip(r) {
                let mag = row[col].abs();
                if mag > best {
                    (pr, pc, best) = (i, j, mag);
                }
            }
        }
        if r == 0 {
            first_pivot = best;
        }
        if !(best > tol * first_pivot) || !best.is_finite() {
            return Err(Error::DegenerateSample("design matrix is rank deficient"));
        }
        m.swap(r, pr);
        cols.swap(r, pc);
        let pivot = m[r][cols[r]];
        for i in r + 1..5 {
            let factor = m[i][cols[r]] / pivot;
            if factor == T::zero() {
                continue;
            }
            for &col in &cols[r..] {
                let sub = factor * m[r][col];
                m[i][col] = m[i][col] - sub;
            }
        }
    }
    let mut x = [T::zero(); 6];
    x[cols[5]] = T::one();
    for r in (0..5).rev() {
        let acc = cols[r + 1..]
            .iter()
            .fold(T::zero(), |acc, &col| acc + m[r][col] * x[col]);
        x[cols[r]] = -acc / m[r][cols[r]];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    fn unit_circle() -> EllipseModel<f64> {
        EllipseModel::from_conic([1.0, 0.0, 1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    fn assert_proportional(got: [f64; 6], want: [f64; 6], tol: f64) {
        let n = want.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (g, w) in got.iter().zip(want) {
            assert!((g - w / n).abs() < tol, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn circle_through_five_points() {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|i| {
            let t = (72.0 * i as f64).to_radians();
            pt(t.cos(), t.sin())
        });
        let m = fit_ellipse(&pts).unwrap();
        assert_proportional(m.conic(), [1.0, 0.0, 1.0, 0.0, 0.0, -1.0], 1e-12);
        for p in pts {
            assert!(m.algebraic(p).abs() < 1e-6);
        }
    }

    #[test]
    fn collinear_points_rejected() {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|i| pt(i as f64, 2.0 * i as f64 - 1.0));
        assert!(matches!(fit_ellipse(&pts), Err(Error::DegenerateSample(_))));
    }

    #[test]
    fn hyperbola_rejected() {
        // x y = 1
        let pts = [
            pt(1.0, 1.0),
            pt(2.0, 0.5),
            pt(0.5, 2.0),
            pt(-1.0, -1.0),
            pt(4.0, 0.25),
        ];
        assert!(fit_ellipse(&pts).is_err());
    }

    #[test]
    fn axis_aligned_ellipse_recovered() {
        let pts: [Point2<f64>; 5] = std::array::from_fn(|i| {
            let t = 0.3 + 1.1 * i as f64;
            pt(5.0 * t.cos(), 3.0 * t.sin())
        });
        let m = fit_ellipse(&pts).unwrap();
        assert_proportional(
            m.conic(),
            [1.0 / 25.0, 0.0, 1.0 / 9.0, 0.0, 0.0, -1.0],
            1e-9,
        );
        for p in pts {
            assert!(m.algebraic(p).abs() < 1e-6);
        }
        assert!((m.semi_major() - 5.0).abs() < 1e-9);
        assert!((m.semi_minor() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn geometry_round_trip() {
        let m = EllipseModel::from_geometry(pt(10.0, -20.0), 40.0, 15.0, 0.7).unwrap();
        assert!((m.center() - pt(10.0, -20.0)).norm() < 1e-9);
        assert!((m.semi_major() - 40.0).abs() < 1e-9);
        assert!((m.semi_minor() - 15.0).abs() < 1e-9);
        assert!((m.angle() - 0.7).abs() < 1e-9);
        for i in 0..16 {
            let q = m.point_at(i as f64 * PI / 8.0);
            assert!(m.distance(q) < 1e-9);
        }
    }

    #[test]
    fn distance_examples() {
        let c = unit_circle();
        assert!((c.distance(pt(2.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((c.distance(pt(0.0, 0.0)) - 1.0).abs() < 1e-12);
        let e = EllipseModel::from_conic([0.25, 0.0, 1.0, 0.0, 0.0, -1.0]).unwrap();
        assert!((e.distance(pt(3.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((e.distance(pt(0.0, 0.0)) - 1.0).abs() < 1e-12);
        assert!((e.distance(pt(0.0, -3.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interior_point_off_axis() {
        // Near the center of a flat ellipse the closest boundary point is on the minor axis side.
        let e = EllipseModel::from_geometry(pt(0.0, 0.0), 10.0, 2.0, 0.0).unwrap();
        for p in [pt(0.5, 0.1), pt(9.0, 0.05), pt(-7.0, 1.2)] {
            let dense = (0..200_000)
                .map(|i| (e.point_at(i as f64 * 2.0 * PI / 200_000.0) - p).norm())
                .fold(f64::INFINITY, f64::min);
            assert!((e.distance(p) - dense).abs() < 1e-6, "{p:?}");
        }
    }

    #[test]
    fn within_matches_distance() {
        let e = EllipseModel::from_geometry(pt(3.0, 4.0), 30.0, 6.0, 1.1).unwrap();
        for i in 0..200 {
            for j in 0..200 {
                let p = pt(
                    -40.0 + 0.4 * i as f64 + 0.013,
                    -40.0 + 0.4 * j as f64 + 0.007,
                );
                for r in [0.5, 3.0, 8.0] {
                    assert_eq!(e.within(p, r), e.distance(p) <= r, "{p:?} r={r}");
                }
            }
        }
    }

    #[test]
    fn serde_keeps_conic() {
        let e = EllipseModel::from_geometry(pt(1.0, 2.0), 3.0, 2.0, 0.2).unwrap();
        let json = serde_json::to_string(&e).unwrap();
        let back: EllipseModel<f64> = serde_json::from_str(&json).unwrap();
        for (b, c) in back.conic().iter().zip(e.conic()) {
            assert!((b - c).abs() < 1e-15);
        }
    }

    #[test]
    fn single_precision_fit() {
        let pts: [Point2<f32>; 5] = std::array::from_fn(|i| {
            let t = 0.3 + 1.1 * i as f32;
            Point2::new(50.0 + 5.0 * t.cos(), -20.0 + 3.0 * t.sin())
        });
        let m = fit_ellipse(&pts).unwrap();
        assert!((m.semi_major() - 5.0).abs() < 1e-2);
        assert!(m.distance(Point2::new(58.0, -20.0)) - 3.0 < 1e-2);
    }
}
