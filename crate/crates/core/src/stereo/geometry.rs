use nalgebra::{Matrix3, Point2, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::{denormalize, normalize, Distortion};
use crate::error::{Error, Result};
use crate::mot_io::StereoRig;

/// Iteration budget of [`undistort_point`].
pub const UNDISTORT_MAX_ITERATIONS: usize = 50;

/// Rank-2 matrix with `x2^T F x1 = 0` for corresponding pixels, scaled to
/// unit Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FundamentalMatrix(Matrix3<f64>);

impl FundamentalMatrix {
    /// Normalizes `m` and checks its rank.
    ///
    /// The sign is fixed so that the largest-magnitude entry is positive.
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let norm = m.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::numerical("fundamental matrix is zero or non-finite"));
        }
        let mut f = m / norm;
        let pivot = f.iter().copied().fold(0.0f64, |acc, v| if v.abs() > acc.abs() { v } else { acc });
        if pivot < 0.0 {
            f = -f;
        }
        let sv = f.singular_values();
        let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if smallest >= 1e-9 {
            return Err(Error::numerical(format!(
                "fundamental matrix is not rank 2 (smallest singular value {smallest:e})"
            )));
        }
        Ok(Self(f))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// `x2^T F x1` for pixel points.
    pub fn residual(&self, x1: &Point2<f64>, x2: &Point2<f64>) -> f64 {
        Vector3::new(x2.x, x2.y, 1.0).dot(&(self.0 * Vector3::new(x1.x, x1.y, 1.0)))
    }

    /// Epipoles `(e, e')` as unit null vectors of `F` and `F^T`.
    pub fn epipoles(&self) -> (Vector3<f64>, Vector3<f64>) {
        (null_vector(&self.0), null_vector(&self.0.transpose()))
    }
}

fn null_vector(m: &Matrix3<f64>) -> Vector3<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, s)| if *s < best.1 { (i, *s) } else { best });
    v_t.row(idx).transpose()
}

fn skew(t: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -t.z, t.y, t.z, 0.0, -t.x, -t.y, t.x, 0.0)
}

/// `F = K2^-T [t]x R K1^-1`, normalized.
pub fn fundamental_from_rig(rig: &StereoRig) -> Result<FundamentalMatrix> {
    let k1_inv = rig
        .k1
        .try_inverse()
        .ok_or_else(|| Error::numerical("intrinsicMatrix1 is singular"))?;
    let k2_inv = rig
        .k2
        .try_inverse()
        .ok_or_else(|| Error::numerical("intrinsicMatrix2 is singular"))?;
    let essential = skew(&rig.translation) * rig.rotation;
    FundamentalMatrix::new(k2_inv.transpose() * essential * k1_inv)
}

/// Removes lens distortion from a pixel position.
///
/// Inverts the Brown-Conrady model by fixed-point iteration in normalized
/// coordinates and maps the result back through `k`. Fails if the iteration
/// has not converged after [`UNDISTORT_MAX_ITERATIONS`] steps.
pub fn undistort_point(p: &Point2<f64>, k: &Matrix3<f64>, dist: &Distortion) -> Result<Point2<f64>> {
    if dist.is_zero() {
        return Ok(*p);
    }
    let d = normalize(k, p)?;
    let (mut x, mut y) = (d.x, d.y);
    for _ in 0..UNDISTORT_MAX_ITERATIONS {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (dist.k1 + r2 * (dist.k2 + r2 * dist.k3));
        let dx = 2.0 * dist.p1 * x * y + dist.p2 * (r2 + 2.0 * x * x);
        let dy = dist.p1 * (r2 + 2.0 * y * y) + 2.0 * dist.p2 * x * y;
        let nx = (d.x - dx) / radial;
        let ny = (d.y - dy) / radial;
        if !(nx.is_finite() && ny.is_finite()) {
            break;
        }
        let step = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if step <= 1e-15 * (1.0 + x.abs().max(y.abs())) {
            return Ok(denormalize(k, x, y));
        }
    }
    // Accept a limit cycle at rounding level.
    let (fx, fy) = dist.apply(x, y);
    if (fx - d.x).abs().max((fy - d.y).abs()) <= 1e-13 {
        return Ok(denormalize(k, x, y));
    }
    Err(Error::numerical(format!(
        "undistortion of ({}, {}) did not converge in {UNDISTORT_MAX_ITERATIONS} iterations",
        p.x, p.y
    )))
}

/// Line `a x + b y + c = 0` with `a^2 + b^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpipolarLine {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EpipolarLine {
    /// Normalizes raw line coefficients. Fails when `a = b = 0`.
    pub fn from_coefficients(a: f64, b: f64, c: f64) -> Result<Self> {
        let n = a.hypot(b);
        if !n.is_finite() || n <= f64::EPSILON * c.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::numerical("degenerate epipolar line (point at the epipole)"));
        }
        Ok(Self {
            a: a / n,
            b: b / n,
            c: c / n,
        })
    }
}

/// Epipolar line in the right image of an undistorted left pixel.
pub fn epipolar_line(f: &FundamentalMatrix, p_left: &Point2<f64>) -> Result<EpipolarLine> {
    let l = f.matrix() * Vector3::new(p_left.x, p_left.y, 1.0);
    EpipolarLine::from_coefficients(l.x, l.y, l.z)
}

/// Pixel distance from `p` to the line.
pub fn point_line_distance(l: &EpipolarLine, p: &Point2<f64>) -> f64 {
    (l.a * p.x + l.b * p.y + l.c).abs()
}
