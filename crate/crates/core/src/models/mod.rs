//! Minimal solvers and point-to-model distances for 2D lines and ellipses.

mod ellipse;
mod line;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::{Real, Result};

pub use ellipse::{fit_ellipse, EllipseModel};
pub use line::{fit_line, LineModel};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Point2<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn cast<U: Real>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.as_f64()), U::lit(self.y.as_f64()))
    }
}

impl<T: Real> Add for Point2<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Real> Sub for Point2<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Real> Mul<T> for Point2<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        Self::new(self.x * rhs, self.y * rhs)
    }
}

/// Problem family; fixes the minimal sample size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Line,
    Ellipse,
}

impl Family {
    pub fn sample_size(self) -> usize {
        match self {
            Family::Line => 2,
            Family::Ellipse => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Line => "line",
            Family::Ellipse => "ellipse",
        }
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(Family::Line),
            "ellipse" => Ok(Family::Ellipse),
            other => Err(crate::Error::InvalidParameter(format!(
                "unknown family `{other}`"
            ))),
        }
    }
}

/// A model that can be hypothesized from a minimal sample and scored by
/// orthogonal distance.
pub trait GeometricModel<T: Real>: Sized + Clone + Into<ModelHypothesis<T>> {
    const SAMPLE_SIZE: usize;

    fn fit(sample: &[Point2<T>]) -> Result<Self>;

    /// Shortest Euclidean distance from `p` to the model.
    fn distance(&self, p: Point2<T>) -> T;

    /// `distance(p) <= radius`; implementations may decide without computing
    /// the distance.
    fn within(&self, p: Point2<T>, radius: T) -> bool {
        self.distance(p) <= radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum ModelHypothesis<T: Real> {
    Line(LineModel<T>),
    Ellipse(EllipseModel<T>),
}

impl<T: Real> ModelHypothesis<T> {
    pub fn family(&self) -> Family {
        match self {
            ModelHypothesis::Line(_) => Family::Line,
            ModelHypothesis::Ellipse(_) => Family::Ellipse,
        }
    }

    pub fn distance(&self, p: Point2<T>) -> T {
        match self {
            ModelHypothesis::Line(m) => m.distance(p),
            ModelHypothesis::Ellipse(m) => m.distance(p),
        }
    }

    pub fn within(&self, p: Point2<T>, radius: T) -> bool {
        match self {
            ModelHypothesis::Line(m) => m.within(p, radius),
            ModelHypothesis::Ellipse(m) => m.within(p, radius),
        }
    }
}

impl<T: Real> From<LineModel<T>> for ModelHypothesis<T> {
    fn from(m: LineModel<T>) -> Self {
        ModelHypothesis::Line(m)
    }
}

impl<T: Real> From<EllipseModel<T>> for ModelHypothesis<T> {
    fn from(m: EllipseModel<T>) -> Self {
        ModelHypothesis::Ellipse(m)
    }
}
