//! Directed points, rigid transforms, and the per-pair transform recovery
//! that every other stage builds on.
//!
//! All angles are stored wrapped to `[0, 2π)`. Angle comparisons go through
//! [`angular_distance`] so that orientations on either side of zero compare
//! as close.

use std::f64::consts::{PI, TAU};
use std::ops::Index;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let w = theta.rem_euclid(TAU);
    // rem_euclid rounds tiny negative inputs up to exactly 2π.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Shortest unsigned angle between two orientations, in `[0, π]`.
pub fn angular_distance(a: f64, b: f64) -> f64 {
    // |a - b| is order-independent, so the result is exactly symmetric.
    let d = wrap_angle((a - b).abs());
    d.min(TAU - d).clamp(0.0, PI)
}

/// A planar location carrying an orientation, e.g. a minutia with its
/// ridge direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedPoint {
    x: f64,
    y: f64,
    theta: f64,
}

impl DirectedPoint {
    /// Builds a point, wrapping `theta` into `[0, 2π)`.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite(), "non-finite coordinate");
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Orientation in `[0, 2π)`.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Euclidean distance between locations; orientation is ignored.
    pub fn distance(&self, other: &DirectedPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn distance_squared(&self, other: &DirectedPoint) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Same orientation, location shifted by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.x + dx, self.y + dy, self.theta)
    }
}

/// An ordered set of directed points. Index `i` always refers to the same
/// point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointSet {
    points: Vec<DirectedPoint>,
}

impl PointSet {
    pub fn new(points: Vec<DirectedPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[DirectedPoint] {
        &self.points
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DirectedPoint> {
        self.points.iter()
    }

    /// Applies `t` to every point.
    pub fn transformed(&self, t: &RigidTransform) -> Self {
        Self::new(self.points.iter().map(|p| t.apply(p)).collect())
    }

    /// Shifts every location by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.points.iter().map(|p| p.translated(dx, dy)).collect())
    }
}

impl Index<usize> for PointSet {
    type Output = DirectedPoint;

    fn index(&self, i: usize) -> &DirectedPoint {
        &self.points[i]
    }
}

impl FromIterator<DirectedPoint> for PointSet {
    fn from_iter<I: IntoIterator<Item = DirectedPoint>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a DirectedPoint;
    type IntoIter = std::slice::Iter<'a, DirectedPoint>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

/// Rotation about the origin by `theta` followed by translation `(tx, ty)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform {
    theta: f64,
    tx: f64,
    ty: f64,
}

impl Default for RigidTransform {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl RigidTransform {
    pub const IDENTITY: RigidTransform = RigidTransform {
        theta: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// Builds a transform, wrapping `theta` into `[0, 2π)`.
    pub fn new(theta: f64, tx: f64, ty: f64) -> Self {
        Self {
            theta: wrap_angle(theta),
            tx,
            ty,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tx(&self) -> f64 {
        self.tx
    }

    pub fn ty(&self) -> f64 {
        self.ty
    }

    /// Maps a point: location `t + R(θ)·p`, orientation `p.θ + θ`.
    pub fn apply(&self, p: &DirectedPoint) -> DirectedPoint {
        let (s, c) = self.theta.sin_cos();
        DirectedPoint::new(
            self.tx + (p.x * c - p.y * s),
            self.ty + (p.x * s + p.y * c),
            p.theta + self.theta,
        )
    }

    /// The unique transform taking `p` onto `q`, both location and
    /// orientation.
    pub fn between(p: &DirectedPoint, q: &DirectedPoint) -> Self {
        let theta = wrap_angle(q.theta - p.theta);
        let (s, c) = theta.sin_cos();
        Self {
            theta,
            tx: q.x - (p.x * c - p.y * s),
            ty: q.y - (p.x * s + p.y * c),
        }
    }

    /// Same rotation, translation shifted by `(dx, dy)`.
    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self::new(self.theta, self.tx + dx, self.ty + dy)
    }

    /// Largest per-component difference, with rotation compared
    /// wrap-aware.
    pub fn max_abs_diff(&self, other: &RigidTransform) -> f64 {
        angular_distance(self.theta, other.theta)
            .max((self.tx - other.tx).abs())
            .max((self.ty - other.ty).abs())
    }
}

/// Free-function form of [`RigidTransform::apply`].
pub fn apply_transform(t: &RigidTransform, p: &DirectedPoint) -> DirectedPoint {
    t.apply(p)
}

/// Free-function form of [`RigidTransform::between`].
pub fn compute_transform(p: &DirectedPoint, q: &DirectedPoint) -> RigidTransform {
    RigidTransform::between(p, q)
}
