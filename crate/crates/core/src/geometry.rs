//! Uniform planar arrays, steering vectors and square sub-array selection.
//!
//! Antennas are ordered row-major: the x index is the outer loop and the y
//! index the inner one, so antenna `(a, b)` sits at `a * m_y + b`. Angles are
//! carried as sines; values outside `[-1, 1]` are allowed for synthetic use.

use std::f64::consts::PI;
use std::ops::Index;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    m_x: usize,
    m_y: usize,
    d_x: f64,
    d_y: f64,
}

impl ArrayGeometry {
    pub fn new(m_x: usize, m_y: usize, d_x: f64, d_y: f64) -> Result<Self> {
        if m_x == 0 || m_y == 0 {
            return Err(Error::invalid(format!(
                "array must have at least one antenna per axis, got {m_x}x{m_y}"
            )));
        }
        if !(d_x.is_finite() && d_x > 0.0 && d_y.is_finite() && d_y > 0.0) {
            return Err(Error::invalid(format!(
                "antenna spacings must be positive, got d_x={d_x}, d_y={d_y}"
            )));
        }
        Ok(Self { m_x, m_y, d_x, d_y })
    }

    /// Linear array along x. The y spacing is unused but kept valid.
    pub fn ula(m: usize, d: f64) -> Result<Self> {
        Self::new(m, 1, d, d)
    }

    /// Square `side x side` array with equal spacing.
    pub fn square(side: usize, d: f64) -> Result<Self> {
        Self::new(side, side, d, d)
    }

    pub fn m_x(&self) -> usize {
        self.m_x
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    pub fn d_x(&self) -> f64 {
        self.d_x
    }

    pub fn d_y(&self) -> f64 {
        self.d_y
    }

    /// Total antenna count.
    pub fn antennas(&self) -> usize {
        self.m_x * self.m_y
    }

    pub fn is_ula(&self) -> bool {
        self.m_y == 1
    }

    pub fn index(&self, a: usize, b: usize) -> usize {
        a * self.m_y + b
    }

    /// Same spacings, different antenna counts.
    pub fn with_counts(&self, m_x: usize, m_y: usize) -> Result<Self> {
        Self::new(m_x, m_y, self.d_x, self.d_y)
    }
}

/// Direction as `(sin θx, sin θy)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SteeringAngles {
    pub s_x: f64,
    pub s_y: f64,
}

impl SteeringAngles {
    pub fn new(s_x: f64, s_y: f64) -> Self {
        Self { s_x, s_y }
    }

    /// From angles in degrees measured against each array axis normal.
    pub fn from_degrees(theta_x: f64, theta_y: f64) -> Self {
        Self::new(theta_x.to_radians().sin(), theta_y.to_radians().sin())
    }

    pub fn is_physical(&self) -> bool {
        self.s_x.abs() <= 1.0 && self.s_y.abs() <= 1.0
    }

    /// Opt-in check for measured-data contexts.
    pub fn ensure_physical(&self) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "non-physical sines ({}, {})",
                self.s_x, self.s_y
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(Vec<Complex64>);

impl ChannelVector {
    pub fn new(entries: Vec<Complex64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("empty channel vector"));
        }
        if let Some(i) = entries.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::invalid(format!("non-finite channel entry at antenna {i}")));
        }
        Ok(Self(entries))
    }

    /// Skips the finiteness scan; callers guarantee finite entries.
    pub(crate) fn from_vec_unchecked(entries: Vec<Complex64>) -> Self {
        debug_assert!(!entries.is_empty());
        Self(entries)
    }

    pub fn ones(m: usize) -> Self {
        Self(vec![Complex64::new(1.0, 0.0); m])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex64> {
        self.0.iter()
    }

    /// `self^H other`.
    pub fn dot(&self, other: &ChannelVector) -> Complex64 {
        debug_assert_eq!(self.len(), other.len());
        self.0.iter().zip(&other.0).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> ChannelVector {
        Self(self.0.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> ChannelVector {
        Self(self.0.iter().map(|z| z.conj()).collect())
    }
}

impl Index<usize> for ChannelVector {
    type Output = Complex64;

    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl AsRef<[Complex64]> for ChannelVector {
    fn as_ref(&self) -> &[Complex64] {
        &self.0
    }
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if wavelength.is_finite() && wavelength > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")))
    }
}

/// Per-axis phase ramp `exp(j 2π/λ · d · m · s)` for `m = 0..count`.
pub(crate) fn axis_response(count: usize, spacing: f64, sine: f64, wavelength: f64) -> Vec<Complex64> {
    let k = 2.0 * PI / wavelength * spacing * sine;
    (0..count).map(|m| Complex64::from_polar(1.0, k * m as f64)).collect()
}

/// Array response of a plane wave arriving from `angles`.
pub fn steering_vector(geom: &ArrayGeometry, angles: SteeringAngles, wavelength: f64) -> Result<ChannelVector> {
    check_wavelength(wavelength)?;
    Ok(steering_unchecked(geom, angles, wavelength))
}

pub(crate) fn steering_unchecked(geom: &ArrayGeometry, angles: SteeringAngles, wavelength: f64) -> ChannelVector {
    let ax = axis_response(geom.m_x, geom.d_x, angles.s_x, wavelength);
    let ay = axis_response(geom.m_y, geom.d_y, angles.s_y, wavelength);
    let mut out = Vec::with_capacity(geom.antennas());
    for x in &ax {
        for y in &ay {
            out.push(x * y);
        }
    }
    ChannelVector::from_vec_unchecked(out)
}

/// Adds `gain · a(angles)` into `acc` without allocating the steering vector.
pub(crate) fn accumulate_path(
    acc: &mut [Complex64],
    geom: &ArrayGeometry,
    angles: SteeringAngles,
    wavelength: f64,
    gain: Complex64,
) {
    let ax = axis_response(geom.m_x, geom.d_x, angles.s_x, wavelength);
    let ay = axis_response(geom.m_y, geom.d_y, angles.s_y, wavelength);
    let mut i = 0;
    for x in &ax {
        let gx = gain * x;
        for y in &ay {
            acc[i] += gx * y;
            i += 1;
        }
    }
}

/// Square integer root of `m`, if any.
pub fn perfect_square_root(m: usize) -> Option<usize> {
    let r = (m as f64).sqrt().round() as usize;
    (r * r == m).then_some(r)
}

/// Row-major antenna indices of the leading `side x side` block.
pub fn square_subarray_indices(geom: &ArrayGeometry, m: usize) -> Result<Vec<usize>> {
    let side = perfect_square_root(m)
        .filter(|&s| s > 0)
        .ok_or_else(|| Error::invalid(format!("sub-array size {m} is not a positive perfect square")))?;
    if side > geom.m_x.min(geom.m_y) {
        return Err(Error::invalid(format!(
            "{side}x{side} sub-array does not fit in a {}x{} array",
            geom.m_x, geom.m_y
        )));
    }
    let mut idx = Vec::with_capacity(m);
    for a in 0..side {
        for b in 0..side {
            idx.push(geom.index(a, b));
        }
    }
    Ok(idx)
}

/// Keeps the first `√m` rows and columns, preserving row-major order.
pub fn subsample_square(
    channel: &ChannelVector,
    geom: &ArrayGeometry,
    m: usize,
) -> Result<(ChannelVector, ArrayGeometry)> {
    if channel.len() != geom.antennas() {
        return Err(Error::DimensionMismatch {
            expected: geom.antennas(),
            actual: channel.len(),
            context: "channel length vs geometry",
        });
    }
    let idx = square_subarray_indices(geom, m)?;
    let side = perfect_square_root(m).expect("validated above");
    let sub = idx.iter().map(|&i| channel[i]).collect();
    Ok((ChannelVector::from_vec_unchecked(sub), geom.with_counts(side, side)?))
}
