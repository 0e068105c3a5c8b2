//! Pinhole camera with Brown-Conrady lens distortion.

use nalgebra::{Matrix3, Point2, Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lens distortion coefficients in `(k1, k2, p1, p2, k3)` order.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Distortion {
    pub k1: f64,
    pub k2: f64,
    pub p1: f64,
    pub p2: f64,
    pub k3: f64,
}

impl Distortion {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn radial(k1: f64, k2: f64) -> Self {
        Self {
            k1,
            k2,
            ..Self::default()
        }
    }

    /// Accepts 4 (`k1 k2 p1 p2`) or 5 (`... k3`) coefficients.
    pub fn from_slice(c: &[f64]) -> Result<Self> {
        match c {
            [k1, k2, p1, p2] => Ok(Self {
                k1: *k1,
                k2: *k2,
                p1: *p1,
                p2: *p2,
                k3: 0.0,
            }),
            [k1, k2, p1, p2, k3] => Ok(Self {
                k1: *k1,
                k2: *k2,
                p1: *p1,
                p2: *p2,
                k3: *k3,
            }),
            _ => Err(Error::invalid(format!(
                "expected 4 or 5 distortion coefficients, got {}",
                c.len()
            ))),
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.k1, self.k2, self.p1, self.p2, self.k3]
    }

    pub fn is_zero(&self) -> bool {
        self.to_array().iter().all(|c| *c == 0.0)
    }

    /// Applies the forward model to normalized image coordinates.
    pub fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
        let dx = 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x);
        let dy = self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y;
        (x * radial + dx, y * radial + dy)
    }
}

/// Pixel -> normalized camera coordinates.
pub fn normalize(k: &Matrix3<f64>, p: &Point2<f64>) -> Result<Point2<f64>> {
    let k_inv = k
        .try_inverse()
        .ok_or_else(|| Error::numerical("singular intrinsic matrix"))?;
    let v = k_inv * Vector3::new(p.x, p.y, 1.0);
    Ok(Point2::new(v.x / v.z, v.y / v.z))
}

/// Normalized camera coordinates -> pixel.
pub fn denormalize(k: &Matrix3<f64>, x: f64, y: f64) -> Point2<f64> {
    let v = k * Vector3::new(x, y, 1.0);
    Point2::new(v.x / v.z, v.y / v.z)
}

/// Distorts an ideal pixel position (forward lens model).
pub fn distort_point(p: &Point2<f64>, k: &Matrix3<f64>, dist: &Distortion) -> Result<Point2<f64>> {
    if dist.is_zero() {
        return Ok(*p);
    }
    let n = normalize(k, p)?;
    let (xd, yd) = dist.apply(n.x, n.y);
    Ok(denormalize(k, xd, yd))
}

/// Projects a point given in the camera's own frame to distorted pixels.
pub fn project(k: &Matrix3<f64>, dist: &Distortion, p: &Point3<f64>) -> Result<Point2<f64>> {
    if p.z <= 0.0 {
        return Err(Error::numerical("point behind camera"));
    }
    let (xd, yd) = dist.apply(p.x / p.z, p.y / p.z);
    Ok(denormalize(k, xd, yd))
}
