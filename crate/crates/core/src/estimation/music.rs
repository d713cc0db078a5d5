//! MUSIC pseudo-spectrum over a planar array.
//!
//! Snapshots (subcarriers and frames of one location) form a sample
//! covariance. Forward-backward averaging and 2-D spatial smoothing
//! decorrelate coherent paths before the eigendecomposition. The spectrum
//! is `1 / ‖E_nᴴ a(s)‖²`, evaluated as `‖a‖² − ‖E_sᴴ a‖²` with the signal
//! subspace `E_s`, which is the same quantity for orthonormal eigenvectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{axis_response, ArrayGeometry, ChannelVector};

/// Sine-domain evaluation grid, strictly increasing per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    s_x: Vec<f64>,
    s_y: Vec<f64>,
}

impl AngleGrid {
    pub fn new(s_x: Vec<f64>, s_y: Vec<f64>) -> Result<Self> {
        for (name, axis) in [("s_x", &s_x), ("s_y", &s_y)] {
            if axis.len() < 2 {
                return Err(Error::invalid(format!("{name} needs at least two grid points")));
            }
            if axis.iter().any(|s| !(-1.0..=1.0).contains(s)) {
                return Err(Error::invalid(format!("{name} values must lie in [-1, 1]")));
            }
            if axis.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid(format!("{name} must be strictly increasing")));
            }
        }
        Ok(Self { s_x, s_y })
    }

    /// `sin θ` for `θ` from −90° to 90° in `step_deg` steps on both axes.
    pub fn degrees(step_deg: f64) -> Result<Self> {
        if !(step_deg > 0.0 && step_deg <= 90.0) {
            return Err(Error::invalid(format!("grid step {step_deg}° out of range")));
        }
        let n = (180.0 / step_deg).floor() as usize;
        let axis: Vec<f64> = (0..=n)
            .map(|i| (-90.0 + step_deg * i as f64).to_radians().sin())
            .collect();
        Self::new(axis.clone(), axis)
    }

    pub fn s_x(&self) -> &[f64] {
        &self.s_x
    }

    pub fn s_y(&self) -> &[f64] {
        &self.s_y
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.s_x.len(), self.s_y.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMap {
    pub grid: AngleGrid,
    /// Linear pseudo-power, row-major over `(s_x index, s_y index)`.
    pub power: Vec<f64>,
}

impl SpectrumMap {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.power[ix * self.grid.s_y.len() + iy]
    }

    /// `10 log10` of the power, normalized to a 0 dB peak.
    pub fn log_power_db(&self) -> Vec<f64> {
        let peak = self.power.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        self.power.iter().map(|p| 10.0 * (p / peak).log10()).collect()
    }

    /// Grid indices of the global maximum.
    pub fn peak(&self) -> (usize, usize) {
        let ny = self.grid.s_y.len();
        let i = self
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .expect("non-empty grid");
        (i / ny, i % ny)
    }

    /// Up to `count` strict local maxima (8-neighbourhood), strongest first.
    pub fn local_maxima(&self, count: usize) -> Vec<(usize, usize)> {
        let (nx, ny) = self.grid.shape();
        let mut found = Vec::new();
        for ix in 0..nx {
            for iy in 0..ny {
                let v = self.at(ix, iy);
                let mut is_max = true;
                'nb: for dx in -1i64..=1 {
                    for dy in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= nx as i64 || jy >= ny as i64 {
                            continue;
                        }
                        let w = self.at(jx as usize, jy as usize);
                        // ties broken by index so plateaus yield one maximum
                        if w > v || (w == v && (jx, jy) < (ix as i64, iy as i64)) {
                            is_max = false;
                            break 'nb;
                        }
                    }
                }
                if is_max {
                    found.push((v, ix, iy));
                }
            }
        }
        found.sort_by(|a, b| b.0.total_cmp(&a.0));
        found.into_iter().take(count).map(|(_, x, y)| (x, y)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MusicConfig {
    /// Signal subspace dimension; `None` picks the largest eigen-gap.
    pub n_sources: Option<usize>,
    pub forward_backward: bool,
    /// Sub-array shrink per axis for spatial smoothing; `(0, 0)` disables it.
    pub smoothing: (usize, usize),
}

impl Default for MusicConfig {
    fn default() -> Self {
        Self {
            n_sources: None,
            forward_backward: true,
            smoothing: (1, 1),
        }
    }
}

impl MusicConfig {
    pub fn with_sources(n: usize) -> Self {
        Self {
            n_sources: Some(n),
            ..Self::default()
        }
    }
}

/// Smoothed covariance and the sub-array geometry it refers to.
pub fn spatial_covariance(
    snapshots: &[ChannelVector],
    geom: &ArrayGeometry,
    config: &MusicConfig,
) -> Result<(DMatrix<Complex64>, ArrayGeometry)> {
    let m = geom.antennas();
    if snapshots.is_empty() {
        return Err(Error::invalid("MUSIC needs at least one snapshot"));
    }
    if let Some(s) = snapshots.iter().find(|s| s.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: s.len(),
            context: "snapshot length vs geometry",
        });
    }
    if snapshots.len() == 1 && config.smoothing == (0, 0) {
        return Err(Error::invalid(
            "a single snapshot gives a rank-one covariance; enable spatial smoothing",
        ));
    }
    let (sx, sy) = config.smoothing;
    if sx >= geom.m_x() || sy >= geom.m_y() {
        return Err(Error::invalid(format!(
            "smoothing shrink ({sx}, {sy}) leaves no sub-array in a {}x{} array",
            geom.m_x(),
            geom.m_y()
        )));
    }

    let mut r = DMatrix::<Complex64>::zeros(m, m);
    for s in snapshots {
        let x = s.as_slice();
        for i in 0..m {
            let xi = x[i];
            for j in 0..m {
                r[(i, j)] += xi * x[j].conj();
            }
        }
    }
    r /= Complex64::new(snapshots.len() as f64, 0.0);

    if config.forward_backward {
        // exchange matrix reverses both axes of the row-major index
        let mut fb = r.clone();
        for i in 0..m {
            for j in 0..m {
                fb[(i, j)] = 0.5 * (r[(i, j)] + r[(m - 1 - i, m - 1 - j)].conj());
            }
        }
        r = fb;
    }

    let sub = geom.with_counts(geom.m_x() - sx, geom.m_y() - sy)?;
    if (sx, sy) == (0, 0) {
        return Ok((r, sub));
    }
    let ms = sub.antennas();
    let mut acc = DMatrix::<Complex64>::zeros(ms, ms);
    let idx = |a: usize, b: usize| geom.index(a, b);
    for ox in 0..=sx {
        for oy in 0..=sy {
            let rows: Vec<usize> = (0..sub.m_x())
                .flat_map(|a| (0..sub.m_y()).map(move |b| idx(a + ox, b + oy)))
                .collect();
            for (p, &i) in rows.iter().enumerate() {
                for (q, &j) in rows.iter().enumerate() {
                    acc[(p, q)] += r[(i, j)];
                }
            }
        }
    }
    acc /= Complex64::new(((sx + 1) * (sy + 1)) as f64, 0.0);
    Ok((acc, sub))
}

/// Model order at the largest ratio between consecutive eigenvalues.
/// `eigenvalues` must be sorted in descending order.
pub fn estimate_model_order(eigenvalues: &[f64]) -> usize {
    let n = eigenvalues.len();
    if n < 2 {
        return 0;
    }
    let floor = eigenvalues[0].abs().max(f64::MIN_POSITIVE) * 1e-15;
    let mut best = (1, f64::MIN);
    for i in 0..n - 1 {
        let ratio = eigenvalues[i].max(floor) / eigenvalues[i + 1].max(floor);
        if ratio > best.1 {
            best = (i + 1, ratio);
        }
    }
    best.0
}

pub fn music_spectrum(
    snapshots: &[ChannelVector],
    geom: &ArrayGeometry,
    wavelength: f64,
    config: &MusicConfig,
    grid: &AngleGrid,
) -> Result<SpectrumMap> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")));
    }
    let (r, sub) = spatial_covariance(snapshots, geom, config)?;
    let ms = sub.antennas();

    let eig = r.symmetric_eigen();
    let mut order: Vec<usize> = (0..ms).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let k = config.n_sources.unwrap_or_else(|| estimate_model_order(&sorted));
    if k == 0 || k >= ms {
        return Err(Error::invalid(format!(
            "{k} sources do not fit a {ms}-element (smoothed) aperture"
        )));
    }

    // signal eigenvectors, stored conjugated and laid out as (x, y) planes
    let (mx, my) = (sub.m_x(), sub.m_y());
    let signal: Vec<Vec<Complex64>> = order[..k]
        .iter()
        .map(|&c| (0..ms).map(|i| eig.eigenvectors[(i, c)].conj()).collect())
        .collect();

    let (nx, ny) = grid.shape();
    let ay: Vec<Vec<Complex64>> = grid
        .s_y()
        .iter()
        .map(|&s| axis_response(my, sub.d_y(), s, wavelength))
        .collect();
    let norm_a = ms as f64;
    let mut power = vec![0.0; nx * ny];
    let mut w = vec![vec![Complex64::new(0.0, 0.0); my]; k];
    for (ix, &sxv) in grid.s_x().iter().enumerate() {
        let ax = axis_response(mx, sub.d_x(), sxv, wavelength);
        for (wk, ek) in w.iter_mut().zip(&signal) {
            for (b, slot) in wk.iter_mut().enumerate() {
                *slot = (0..mx).map(|a| ek[a * my + b] * ax[a]).sum();
            }
        }
        for (iy, ayv) in ay.iter().enumerate() {
            let proj: f64 = w
                .iter()
                .map(|wk| wk.iter().zip(ayv).map(|(p, q)| p * q).sum::<Complex64>().norm_sqr())
                .sum();
            let noise = (norm_a - proj).max(norm_a * 1e-14);
            power[ix * ny + iy] = 1.0 / noise;
        }
    }
    Ok(SpectrumMap {
        grid: grid.clone(),
        power,
    })
}
