use serde::{Deserialize, Serialize};

use super::{GeometricModel, Point2};
use crate::{Error, Real, Result};

/// The line `{x : normal . x = offset}` with a unit normal.
///
/// The normal is canonicalized to point into the upper half plane
/// (`normal.y > 0`, or `normal.y == 0` and `normal.x > 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineModel<T> {
    normal: Point2<T>,
    offset: T,
}

impl<T: Real> LineModel<T> {
    /// Normalizes `normal` and rescales `offset` accordingly.
    pub fn new(normal: Point2<T>, offset: T) -> Result<Self> {
        let len = normal.norm();
        if !(len > T::zero()) || !len.is_finite() || !offset.is_finite() {
            return Err(Error::DegenerateInput(
                "line normal must be finite and non-zero",
            ));
        }
        let (mut normal, mut offset) = (normal * len.recip(), offset / len);
        if normal.y < T::zero() || (normal.y == T::zero() && normal.x < T::zero()) {
            normal = normal * -T::one();
            offset = -offset;
        }
        Ok(Self { normal, offset })
    }

    pub fn normal(&self) -> Point2<T> {
        self.normal
    }

    pub fn offset(&self) -> T {
        self.offset
    }
}

/// Line through two points.
pub fn fit_line<T: Real>(p1: Point2<T>, p2: Point2<T>) -> Result<LineModel<T>> {
    let d = p2 - p1;
    if d.norm() < T::lit(1e-9) {
        return Err(Error::DegenerateSample("coincident points"));
    }
    let normal = Point2::new(-d.y, d.x) * d.norm().recip();
    LineModel::new(normal, normal.dot(p1))
}

impl<T: Real> GeometricModel<T> for LineModel<T> {
    const SAMPLE_SIZE: usize = 2;

    fn fit(sample: &[Point2<T>]) -> Result<Self> {
        match sample {
            [a, b] => fit_line(*a, *b),
            _ => Err(Error::InvalidParameter(format!(
                "a line needs 2 points, got {}",
                sample.len()
            ))),
        }
    }

    fn distance(&self, p: Point2<T>) -> T {
        (self.normal.dot(p) - self.offset).abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> Point2<f64> {
        Point2::new(x, y)
    }

    #[test]
    fn x_axis() {
        let l = fit_line(pt(0.0, 0.0), pt(1.0, 0.0)).unwrap();
        assert_eq!(l.normal(), pt(0.0, 1.0));
        assert_eq!(l.offset(), 0.0);
        assert_eq!(l.distance(pt(3.0, 2.0)), 2.0);
    }

    #[test]
    fn coincident_points_rejected() {
        assert!(matches!(
            fit_line(pt(0.0, 0.0), pt(0.0, 0.0)),
            Err(Error::DegenerateSample(_))
        ));
    }

    #[test]
    fn diagonal() {
        let l = fit_line(pt(1.0, 1.0), pt(2.0, 2.0)).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((l.normal().x + h).abs() < 1e-15 && (l.normal().y - h).abs() < 1e-15);
        assert!(l.offset().abs() < 1e-15);
        assert!((l.distance(pt(1.0, 0.0)) - h).abs() < 1e-15);
        assert!(l.distance(pt(-7.5, -7.5)) < 1e-14);
    }

    #[test]
    fn order_invariant() {
        let (a, b) = (pt(-31.2, 4.4), pt(17.9, -60.1));
        let l1 = fit_line(a, b).unwrap();
        let l2 = fit_line(b, a).unwrap();
        assert!((l1.normal() - l2.normal()).norm() < 1e-12);
        assert!((l1.offset() - l2.offset()).abs() < 1e-9);
        assert!(l1.distance(a) < 1e-9 && l1.distance(b) < 1e-9);
    }
}
