//! Seeded Monte Carlo ensembles of inner products `h_kᴴ h_k'`.

use iucorr_core::estimation::correlation_from_products;
use iucorr_core::geometry::ArrayGeometry;
use iucorr_core::rng::chunked_draws;
use iucorr_core::synth::{
    draw_pair_paths, generate_channel_pair, generate_rayleigh, realize, PathEnsembleSpec, SynthOptions,
};
use iucorr_core::{CorrelationEstimate, Result};
use num_complex::Complex64;

/// `n` inner products of independent channel pairs drawn from `spec`.
pub fn pair_products(
    spec: &PathEnsembleSpec,
    geom: &ArrayGeometry,
    wavelength: f64,
    n: usize,
    seed: u64,
    point: u32,
) -> Result<Vec<Complex64>> {
    spec.check_samplable()?;
    chunked_draws(n, seed, point, |rng| {
        generate_channel_pair(spec, geom, wavelength, rng).map(|(a, b)| a.dot(&b))
    })
    .into_iter()
    .collect()
}

pub fn pair_estimate(
    spec: &PathEnsembleSpec,
    geom: &ArrayGeometry,
    wavelength: f64,
    n: usize,
    seed: u64,
    point: u32,
) -> Result<CorrelationEstimate> {
    let p = pair_products(spec, geom, wavelength, n, seed, point)?;
    correlation_from_products(&p, geom.antennas())
}

pub fn rayleigh_estimate(m: usize, n: usize, seed: u64, point: u32) -> Result<CorrelationEstimate> {
    let p: Vec<Complex64> = chunked_draws(n, seed, point, |rng| {
        let a = generate_rayleigh(m, rng)?;
        let b = generate_rayleigh(m, rng)?;
        Ok(a.dot(&b))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    correlation_from_products(&p, m)
}

/// One estimate per wavelength. Each draw fixes the paths of both users
/// and realizes them at every wavelength, so only the carrier changes
/// across the band.
pub fn band_estimates(
    spec: &PathEnsembleSpec,
    geom: &ArrayGeometry,
    wavelengths: &[f64],
    n: usize,
    seed: u64,
    point: u32,
) -> Result<Vec<CorrelationEstimate>> {
    spec.check_samplable()?;
    let draws: Vec<Vec<Complex64>> = chunked_draws(n, seed, point, |rng| {
        let r = draw_pair_paths(spec, rng, SynthOptions::default())?;
        Ok(wavelengths
            .iter()
            .map(|&l| realize(&r.user_k, geom, l).dot(&realize(&r.user_k2, geom, l)))
            .collect())
    })
    .into_iter()
    .collect::<Result<_>>()?;
    (0..wavelengths.len())
        .map(|s| {
            let col: Vec<Complex64> = draws.iter().map(|d| d[s]).collect();
            correlation_from_products(&col, geom.antennas())
        })
        .collect()
}

/// `|empirical − reference| ≤ 3·SE` on the variance.
pub fn within_three_se(est: &CorrelationEstimate, reference: f64) -> bool {
    est.std_error
        .is_some_and(|se| (est.variance - reference).abs() <= 3.0 * se)
}
