use std::collections::BTreeMap;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::camera::Distortion;
use crate::error::{Error, Result};

const KEYS: [&str; 6] = [
    "distortionCoefficients1",
    "distortionCoefficients2",
    "intrinsicMatrix1",
    "intrinsicMatrix2",
    "rotationOfCamera2",
    "translationOfCamera2",
];

/// Orthonormality tolerance on `R^T R - I` (max-abs entry).
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Two calibrated cameras. Camera 1 defines the world frame; camera 2 maps
/// world points by `x2 = R * x1 + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StereoRig {
    pub k1: Matrix3<f64>,
    pub k2: Matrix3<f64>,
    pub dist1: Distortion,
    pub dist2: Distortion,
    pub rotation: Matrix3<f64>,
    /// Calibration length units (assumed millimetres).
    pub translation: Vector3<f64>,
}

impl StereoRig {
    /// Validates and builds a rig.
    pub fn new(
        k1: Matrix3<f64>,
        k2: Matrix3<f64>,
        dist1: Distortion,
        dist2: Distortion,
        rotation: Matrix3<f64>,
        translation: Vector3<f64>,
    ) -> Result<Self> {
        let rig = Self {
            k1,
            k2,
            dist1,
            dist2,
            rotation,
            translation,
        };
        rig.validate()?;
        Ok(rig)
    }

    pub fn validate(&self) -> Result<()> {
        check_intrinsics(&self.k1, "intrinsicMatrix1")?;
        check_intrinsics(&self.k2, "intrinsicMatrix2")?;
        let r = &self.rotation;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("rotationOfCamera2 has non-finite entries"));
        }
        let err = (r.transpose() * r - Matrix3::identity()).abs().max();
        if err > ROTATION_TOLERANCE {
            return Err(Error::invalid(format!(
                "rotationOfCamera2 is not orthonormal (|R^T R - I| = {err:e})"
            )));
        }
        if r.determinant() <= 0.0 {
            return Err(Error::invalid("rotationOfCamera2 has det -1 (reflection)"));
        }
        let t = &self.translation;
        if t.iter().any(|v| !v.is_finite()) || t.norm() == 0.0 {
            return Err(Error::invalid("translationOfCamera2 must be finite and nonzero"));
        }
        for (d, name) in [(&self.dist1, "distortionCoefficients1"), (&self.dist2, "distortionCoefficients2")] {
            if d.to_array().iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("{name} has non-finite entries")));
            }
        }
        Ok(())
    }

    /// Baseline length in calibration units.
    pub fn baseline(&self) -> f64 {
        (self.rotation.transpose() * self.translation).norm()
    }
}

fn check_intrinsics(k: &Matrix3<f64>, name: &str) -> Result<()> {
    if k.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} has non-finite entries")));
    }
    if k[(1, 0)] != 0.0 || k[(2, 0)] != 0.0 || k[(2, 1)] != 0.0 {
        return Err(Error::invalid(format!("{name} is not upper-triangular")));
    }
    if k[(0, 0)] <= 0.0 || k[(1, 1)] <= 0.0 || k[(2, 2)] <= 0.0 {
        return Err(Error::invalid(format!("{name} is singular or has a non-positive diagonal")));
    }
    Ok(())
}

/// Parses the plain-text calibration schema.
///
/// One entry per line, `key = values` or `key: values`, `#` starts a comment.
/// Values are separated by whitespace, commas or semicolons; brackets are
/// ignored. Matrices are row-major. Unknown keys are skipped.
///
/// ```text
/// intrinsicMatrix1 = 1800 0 960; 0 1800 540; 0 0 1
/// intrinsicMatrix2 = 1800 0 960; 0 1800 540; 0 0 1
/// distortionCoefficients1 = -0.05 0.01 0 0 0
/// distortionCoefficients2 = -0.05 0.01 0 0 0
/// rotationOfCamera2 = 1 0 0; 0 1 0; 0 0 1
/// translationOfCamera2 = -100 0 0
/// ```
pub fn load_calibration(text: &str) -> Result<StereoRig> {
    let mut entries: BTreeMap<&str, (usize, Vec<f64>)> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let split = line
            .find(['=', ':'])
            .ok_or_else(|| Error::parse(line_no, "expected 'key = values'"))?;
        let key = line[..split].trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            log::debug!("calibration line {line_no}: ignoring key '{key}'");
            continue;
        };
        let values = line[split + 1..]
            .split(|c: char| c.is_whitespace() || matches!(c, ',' | ';' | '[' | ']'))
            .filter(|t| !t.is_empty())
            .map(|t| super::parse_number(t, line_no, known))
            .collect::<Result<Vec<f64>>>()?;
        if entries.insert(known, (line_no, values)).is_some() {
            return Err(Error::parse(line_no, format!("duplicate key '{known}'")));
        }
    }
    let get = |key: &str, len: Option<usize>| -> Result<&[f64]> {
        let (line, v) = entries
            .get(key)
            .ok_or_else(|| Error::invalid(format!("calibration key '{key}' missing")))?;
        if let Some(n) = len {
            if v.len() != n {
                return Err(Error::parse(*line, format!("'{key}' needs {n} values, found {}", v.len())));
            }
        }
        Ok(v)
    };
    let k1 = Matrix3::from_row_slice(get("intrinsicMatrix1", Some(9))?);
    let k2 = Matrix3::from_row_slice(get("intrinsicMatrix2", Some(9))?);
    let rotation = Matrix3::from_row_slice(get("rotationOfCamera2", Some(9))?);
    let translation = Vector3::from_row_slice(get("translationOfCamera2", Some(3))?);
    let dist1 = Distortion::from_slice(get("distortionCoefficients1", None)?)?;
    let dist2 = Distortion::from_slice(get("distortionCoefficients2", None)?)?;
    StereoRig::new(k1, k2, dist1, dist2, rotation, translation)
}

/// Writes a rig in the format read by [`load_calibration`]. Values use the
/// shortest exact float text, so loading the output reproduces the rig.
pub fn serialize_calibration(rig: &StereoRig) -> String {
    fn join(values: impl IntoIterator<Item = f64>) -> String {
        values.into_iter().map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
    }
    fn matrix(m: &Matrix3<f64>) -> String {
        (0..3)
            .map(|r| join((0..3).map(|c| m[(r, c)])))
            .collect::<Vec<_>>()
            .join("; ")
    }
    let mut out = String::from("# stereo calibration; matrices row-major, x2 = R * x1 + t\n");
    out.push_str(&format!("intrinsicMatrix1 = {}\n", matrix(&rig.k1)));
    out.push_str(&format!("intrinsicMatrix2 = {}\n", matrix(&rig.k2)));
    out.push_str(&format!("distortionCoefficients1 = {}\n", join(rig.dist1.to_array())));
    out.push_str(&format!("distortionCoefficients2 = {}\n", join(rig.dist2.to_array())));
    out.push_str(&format!("rotationOfCamera2 = {}\n", matrix(&rig.rotation)));
    out.push_str(&format!("translationOfCamera2 = {}\n", join(rig.translation.iter().copied())));
    out
}
