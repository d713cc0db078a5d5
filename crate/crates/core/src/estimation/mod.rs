//! Measurement-side estimators.
//!
//! Synthetic ensembles use the variance estimator [`ensemble_correlation`].
//! Measured location pairs give one snapshot each, so they are summarized
//! with [`cosine_similarity`] instead.

mod cluster;
mod music;

pub use cluster::{cluster_correlation_stats, ClusterStats, ClusterStatsOptions, SubcarrierSelection};
pub use music::{estimate_model_order, music_spectrum, spatial_covariance, AngleGrid, MusicConfig, SpectrumMap};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::ChannelVector;
use crate::theory::{CorrelationEstimate, EstimateKind};

/// Relative calibration floor: entries below this fraction of the median
/// calibration magnitude mark a dead antenna.
pub const CALIBRATION_FLOOR: f64 = 1e-6;

fn check_same_len(a: &ChannelVector, b: &ChannelVector) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
            context: "channel lengths",
        })
    }
}

/// `|h1^H h2| / (‖h1‖ ‖h2‖)`, clamped to `[0, 1]` against rounding.
pub fn cosine_similarity(h1: &ChannelVector, h2: &ChannelVector) -> Result<f64> {
    check_same_len(h1, h2)?;
    let (n1, n2) = (h1.norm(), h2.norm());
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((h1.dot(h2).norm() / (n1 * n2)).min(1.0))
}

/// `(1/M) · std` of the inner products `h_k^H h_k'` over the pairs.
pub fn ensemble_correlation(pairs: &[(ChannelVector, ChannelVector)]) -> Result<CorrelationEstimate> {
    let m = pairs.first().map_or(0, |p| p.0.len());
    let mut products = Vec::with_capacity(pairs.len());
    for (a, b) in pairs {
        if a.len() != m || b.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: if a.len() != m { a.len() } else { b.len() },
                context: "uniform antenna count across pairs",
            });
        }
        products.push(a.dot(b));
    }
    correlation_from_products(&products, m)
}

/// Same estimator on precomputed inner products of `M`-antenna channels.
///
/// The variance is the unbiased complex sample variance divided by `M²`.
/// Its standard error is the sample standard deviation of the centered
/// squared magnitudes over `√n`.
pub fn correlation_from_products(products: &[Complex64], m: usize) -> Result<CorrelationEstimate> {
    let n = products.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 pairs, got {n}")));
    }
    if m == 0 {
        return Err(Error::invalid("zero-length channels"));
    }
    let nf = n as f64;
    let scale = 1.0 / (m as f64 * m as f64);
    let mean: Complex64 = products.iter().sum::<Complex64>() / nf;
    let sq: Vec<f64> = products.iter().map(|z| (z - mean).norm_sqr() * scale).collect();
    let sum_sq: f64 = sq.iter().sum();
    let variance = sum_sq / (nf - 1.0);
    let mean_sq = sum_sq / nf;
    let spread = sq.iter().map(|s| (s - mean_sq).powi(2)).sum::<f64>() / (nf - 1.0);
    let mut est = CorrelationEstimate::from_variance(variance, EstimateKind::Empirical, m);
    est.samples = Some(n);
    est.std_error = Some((spread / nf).sqrt());
    Ok(est)
}

/// Entry-wise `raw / calib`, with the calibration node modeled as all-ones.
pub fn calibrate(raw: &ChannelVector, calib: &ChannelVector) -> Result<ChannelVector> {
    check_same_len(raw, calib)?;
    let mut mags: Vec<f64> = calib.iter().map(|z| z.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let n = mags.len();
    let median = if n % 2 == 1 {
        mags[n / 2]
    } else {
        0.5 * (mags[n / 2 - 1] + mags[n / 2])
    };
    let floor = CALIBRATION_FLOOR * median;
    let mut out = Vec::with_capacity(raw.len());
    for (i, (r, c)) in raw.iter().zip(calib.iter()).enumerate() {
        let mag = c.norm();
        if mag <= floor || mag == 0.0 {
            return Err(Error::DeadAntenna {
                antenna: i,
                magnitude: mag,
                floor,
            });
        }
        out.push(r / c);
    }
    ChannelVector::new(out)
}

/// Conjugate-beamforming interference at user `k`: `γ_k Σ_{j≠k} |h_j^H h_k|²`.
pub fn conjugate_bf_interference(channels: &[ChannelVector], gains: &[f64], k: usize) -> Result<f64> {
    if k >= channels.len() {
        return Err(Error::OutOfRange {
            index: k,
            len: channels.len(),
            context: "user index",
        });
    }
    if gains.len() != channels.len() {
        return Err(Error::DimensionMismatch {
            expected: channels.len(),
            actual: gains.len(),
            context: "one gain per user",
        });
    }
    if let Some(g) = gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::invalid(format!("gain {g} must be finite and non-negative")));
    }
    let hk = &channels[k];
    let mut total = 0.0;
    for (j, hj) in channels.iter().enumerate() {
        check_same_len(hk, hj)?;
        if j != k {
            total += hj.dot(hk).norm_sqr();
        }
    }
    Ok(gains[k] * total)
}
