//! Two-user multipath channels with correlated path angles.
//!
//! Each user channel is `Σ_l β_l e^{jφ_l} a(θ_l)` with i.i.d. uniform
//! phases. User k draws its path sines uniformly on `[-1, 1]` per axis.
//! User k' path l' is anchored on user k path l' and offset by a uniform
//! draw on `[-α_{l'l'}, α_{l'l'}]`, independently in x and y. Sines are not
//! clipped, so the difference law holds exactly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{accumulate_path, ArrayGeometry, ChannelVector, SteeringAngles};
use crate::rng::RngStream;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Path gains of both users and per path-pair angle-correlation widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEnsembleSpec {
    gains_k: Vec<f64>,
    gains_k2: Vec<f64>,
    alpha_x: Vec<Vec<f64>>,
    alpha_y: Vec<Vec<f64>>,
}

impl PathEnsembleSpec {
    pub fn new(gains_k: Vec<f64>, gains_k2: Vec<f64>, alpha_x: Vec<Vec<f64>>, alpha_y: Vec<Vec<f64>>) -> Result<Self> {
        let spec = Self {
            gains_k,
            gains_k2,
            alpha_x,
            alpha_y,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// One unit-gain path per user.
    pub fn single_path(alpha_x: f64, alpha_y: f64) -> Result<Self> {
        Self::new(vec![1.0], vec![1.0], vec![vec![alpha_x]], vec![vec![alpha_y]])
    }

    /// `L` keyholes: gains `1/√L`, `alpha_o` within a hole, 1 across holes.
    pub fn keyhole(n_keyholes: usize, alpha_o: (f64, f64)) -> Result<Self> {
        if n_keyholes == 0 {
            return Err(Error::invalid("keyhole channel needs at least one keyhole"));
        }
        let l = n_keyholes;
        let g = 1.0 / (l as f64).sqrt();
        let mat = |a: f64| -> Vec<Vec<f64>> {
            (0..l)
                .map(|i| (0..l).map(|j| if i == j { a } else { 1.0 }).collect())
                .collect()
        };
        Self::new(vec![g; l], vec![g; l], mat(alpha_o.0), mat(alpha_o.1))
    }

    pub fn n_paths(&self) -> usize {
        self.gains_k.len()
    }

    pub fn gains_k(&self) -> &[f64] {
        &self.gains_k
    }

    pub fn gains_k2(&self) -> &[f64] {
        &self.gains_k2
    }

    pub fn alpha_x(&self) -> &[Vec<f64>] {
        &self.alpha_x
    }

    pub fn alpha_y(&self) -> &[Vec<f64>] {
        &self.alpha_y
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.gains_k.len();
        if l == 0 {
            return Err(Error::invalid("path ensemble needs at least one path"));
        }
        if self.gains_k2.len() != l {
            return Err(Error::DimensionMismatch {
                expected: l,
                actual: self.gains_k2.len(),
                context: "second user gain list",
            });
        }
        for (name, m) in [("alpha_x", &self.alpha_x), ("alpha_y", &self.alpha_y)] {
            if m.len() != l || m.iter().any(|row| row.len() != l) {
                return Err(Error::invalid(format!("{name} must be {l}x{l}")));
            }
            if let Some(a) = m.iter().flatten().find(|a| !(0.0..=1.0).contains(*a)) {
                return Err(Error::invalid(format!("{name} entry {a} outside [0, 1]")));
            }
        }
        if let Some(g) = self
            .gains_k
            .iter()
            .chain(&self.gains_k2)
            .find(|g| !(g.is_finite() && **g >= 0.0))
        {
            return Err(Error::invalid(format!("path gain {g} must be finite and non-negative")));
        }
        Ok(())
    }

    /// Cross-hole pairs must be independent for the anchored sampler to
    /// reproduce every pair law; only the diagonal can carry correlation.
    pub fn check_samplable(&self) -> Result<()> {
        self.validate()?;
        let l = self.n_paths();
        for i in 0..l {
            for j in 0..l {
                if i != j && (self.alpha_x[i][j] != 1.0 || self.alpha_y[i][j] != 1.0) {
                    return Err(Error::invalid(format!(
                        "off-diagonal alpha[{i}][{j}] must be 1 for sampling; \
                         only same-index path pairs can share angle correlation"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One path of a drawn realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Path {
    pub gain: Complex64,
    pub angles: SteeringAngles,
}

/// Drawn paths of both users; evaluate at any wavelength with [`realize`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairRealization {
    pub user_k: Vec<Path>,
    pub user_k2: Vec<Path>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SynthOptions {
    /// Forces every path phase to zero.
    pub zero_phases: bool,
}

pub(crate) fn uniform_sym(rng: &mut RngStream, half_width: f64) -> f64 {
    half_width * (2.0 * rng.random::<f64>() - 1.0)
}

pub(crate) fn random_phase(rng: &mut RngStream) -> f64 {
    2.0 * PI * rng.random::<f64>()
}

/// `s1 ~ U[-1, 1]`, `s2 = s1 + u` with `u ~ U[-α, α]`.
pub fn sample_correlated_sine_pair(alpha: f64, rng: &mut RngStream) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::invalid(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let s1 = uniform_sym(rng, 1.0);
    let u = uniform_sym(rng, alpha);
    Ok((s1, s1 + u))
}

pub fn draw_pair_paths(spec: &PathEnsembleSpec, rng: &mut RngStream, opts: SynthOptions) -> Result<PairRealization> {
    spec.check_samplable()?;
    Ok(draw_unchecked(spec, rng, opts))
}

fn draw_unchecked(spec: &PathEnsembleSpec, rng: &mut RngStream, opts: SynthOptions) -> PairRealization {
    let l = spec.n_paths();
    let phase = |rng: &mut RngStream| {
        if opts.zero_phases {
            0.0
        } else {
            random_phase(rng)
        }
    };
    let mut user_k = Vec::with_capacity(l);
    for i in 0..l {
        let angles = SteeringAngles::new(uniform_sym(rng, 1.0), uniform_sym(rng, 1.0));
        let gain = Complex64::from_polar(spec.gains_k[i], phase(rng));
        user_k.push(Path { gain, angles });
    }
    let mut user_k2 = Vec::with_capacity(l);
    for (j, anchor) in user_k.iter().enumerate() {
        let ux = uniform_sym(rng, spec.alpha_x[j][j]);
        let uy = uniform_sym(rng, spec.alpha_y[j][j]);
        let angles = SteeringAngles::new(anchor.angles.s_x + ux, anchor.angles.s_y + uy);
        let gain = Complex64::from_polar(spec.gains_k2[j], phase(rng));
        user_k2.push(Path { gain, angles });
    }
    PairRealization { user_k, user_k2 }
}

/// Sum of paths at one wavelength.
pub fn realize(paths: &[Path], geom: &ArrayGeometry, wavelength: f64) -> ChannelVector {
    let mut acc = vec![Complex64::new(0.0, 0.0); geom.antennas()];
    for p in paths {
        accumulate_path(&mut acc, geom, p.angles, wavelength, p.gain);
    }
    ChannelVector::from_vec_unchecked(acc)
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if wavelength.is_finite() && wavelength > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("wavelength must be positive, got {wavelength}")))
    }
}

pub fn generate_channel_pair(
    spec: &PathEnsembleSpec,
    geom: &ArrayGeometry,
    wavelength: f64,
    rng: &mut RngStream,
) -> Result<(ChannelVector, ChannelVector)> {
    generate_channel_pair_with(spec, geom, wavelength, rng, SynthOptions::default())
}

pub fn generate_channel_pair_with(
    spec: &PathEnsembleSpec,
    geom: &ArrayGeometry,
    wavelength: f64,
    rng: &mut RngStream,
    opts: SynthOptions,
) -> Result<(ChannelVector, ChannelVector)> {
    check_wavelength(wavelength)?;
    let r = draw_pair_paths(spec, rng, opts)?;
    Ok((
        realize(&r.user_k, geom, wavelength),
        realize(&r.user_k2, geom, wavelength),
    ))
}

pub fn generate_keyhole_pair(
    n_keyholes: usize,
    alpha_o: (f64, f64),
    geom: &ArrayGeometry,
    wavelength: f64,
    rng: &mut RngStream,
) -> Result<(ChannelVector, ChannelVector)> {
    let spec = PathEnsembleSpec::keyhole(n_keyholes, alpha_o)?;
    generate_channel_pair(&spec, geom, wavelength, rng)
}

/// Circularly symmetric complex Gaussian sample with unit variance.
pub fn complex_normal(rng: &mut RngStream) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// i.i.d. Rayleigh channel.
pub fn generate_rayleigh(m: usize, rng: &mut RngStream) -> Result<ChannelVector> {
    if m == 0 {
        return Err(Error::invalid("Rayleigh channel needs at least one antenna"));
    }
    Ok(ChannelVector::from_vec_unchecked(
        (0..m).map(|_| complex_normal(rng)).collect(),
    ))
}

/// Users of one cluster sharing an anchor set of path directions.
///
/// Each user offsets every anchor sine by an independent draw on
/// `[-α/2, α/2]`, so any two users differ by at most `α` per axis
/// (triangular law, not the uniform pair law of [`draw_pair_paths`]).
pub fn draw_cluster_paths(
    n_users: usize,
    n_paths: usize,
    alpha: (f64, f64),
    rng: &mut RngStream,
) -> Result<Vec<Vec<Path>>> {
    if n_paths == 0 {
        return Err(Error::invalid("cluster needs at least one path"));
    }
    for a in [alpha.0, alpha.1] {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::invalid(format!("alpha must lie in [0, 1], got {a}")));
        }
    }
    let anchors: Vec<SteeringAngles> = (0..n_paths)
        .map(|_| SteeringAngles::new(uniform_sym(rng, 1.0), uniform_sym(rng, 1.0)))
        .collect();
    let g = 1.0 / (n_paths as f64).sqrt();
    Ok((0..n_users)
        .map(|_| {
            anchors
                .iter()
                .map(|a| {
                    let angles = SteeringAngles::new(
                        a.s_x + uniform_sym(rng, alpha.0 / 2.0),
                        a.s_y + uniform_sym(rng, alpha.1 / 2.0),
                    );
                    Path {
                        gain: Complex64::from_polar(g, random_phase(rng)),
                        angles,
                    }
                })
                .collect()
        })
        .collect())
}

/// OFDM band layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierPlan {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub n_subcarriers: usize,
}

impl SubcarrierPlan {
    pub fn new(center_frequency: f64, bandwidth: f64, n_subcarriers: usize) -> Result<Self> {
        let plan = Self {
            center_frequency,
            bandwidth,
            n_subcarriers,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_subcarriers == 0 {
            return Err(Error::invalid("plan needs at least one subcarrier"));
        }
        if !(self.center_frequency.is_finite() && self.center_frequency > 0.0) {
            return Err(Error::invalid(format!(
                "center frequency must be positive, got {}",
                self.center_frequency
            )));
        }
        if !(self.bandwidth.is_finite() && self.bandwidth >= 0.0 && self.bandwidth < self.center_frequency) {
            return Err(Error::invalid(format!(
                "bandwidth {} must be non-negative and below the center frequency {}",
                self.bandwidth, self.center_frequency
            )));
        }
        Ok(())
    }

    /// Evenly spaced from `fc - B/2` to `fc + B/2`, ascending.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n_subcarriers;
        if n == 1 {
            return vec![self.center_frequency];
        }
        let lo = self.center_frequency - self.bandwidth / 2.0;
        let step = self.bandwidth / (n - 1) as f64;
        (0..n).map(|i| lo + step * i as f64).collect()
    }

    pub fn center_wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.center_frequency
    }
}

/// Wavelength of every subcarrier, longest (lowest frequency) first.
pub fn subcarrier_wavelengths(plan: &SubcarrierPlan) -> Result<Vec<f64>> {
    plan.validate()?;
    Ok(plan.frequencies().iter().map(|f| SPEED_OF_LIGHT / f).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::chunked_draws;

    #[test]
    fn alpha_zero_copies_sine() {
        let mut rng = RngStream::new(1, 0);
        for _ in 0..1000 {
            let (a, b) = sample_correlated_sine_pair(0.0, &mut rng).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn alpha_bounds_difference() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..10_000 {
            let (a, b) = sample_correlated_sine_pair(0.2, &mut rng).unwrap();
            assert!((b - a).abs() <= 0.2);
            assert!((-1.0..=1.0).contains(&a));
        }
        assert!(sample_correlated_sine_pair(1.1, &mut rng).is_err());
        assert!(sample_correlated_sine_pair(-0.1, &mut rng).is_err());
    }

    #[test]
    fn alpha_one_difference_std() {
        let mut rng = RngStream::new(3, 0);
        let n = 100_000;
        let d: Vec<f64> = (0..n)
            .map(|_| {
                let (a, b) = sample_correlated_sine_pair(1.0, &mut rng).unwrap();
                b - a
            })
            .collect();
        let mean = d.iter().sum::<f64>() / n as f64;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((var.sqrt() - 1.0 / 3f64.sqrt()).abs() < 0.01);
    }

    #[test]
    fn single_path_norm() {
        let g = ArrayGeometry::square(8, 0.5).unwrap();
        let s = PathEnsembleSpec::single_path(0.3, 0.7).unwrap();
        let mut rng = RngStream::new(4, 0);
        for _ in 0..20 {
            let (h1, h2) = generate_channel_pair(&s, &g, 1.0, &mut rng).unwrap();
            assert!((h1.norm() - 8.0).abs() < 1e-12);
            assert!((h2.norm() - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_power_three_paths() {
        let g = ArrayGeometry::square(8, 0.5).unwrap();
        let s = PathEnsembleSpec::keyhole(3, (0.2, 0.2)).unwrap();
        let p = chunked_draws(20_000, 5, 0, |rng| {
            let (h, _) = generate_channel_pair(&s, &g, 1.0, rng).unwrap();
            h.norm_sqr() / 64.0
        });
        let mean = p.iter().sum::<f64>() / p.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean power {mean}");
    }

    #[test]
    fn zero_phase_boresight_is_ones() {
        let g = ArrayGeometry::square(4, 0.5).unwrap();
        let paths = [Path {
            gain: Complex64::new(1.0, 0.0),
            angles: SteeringAngles::new(0.0, 0.0),
        }];
        assert_eq!(realize(&paths, &g, 1.0), ChannelVector::ones(16));

        let mut rng = RngStream::new(6, 0);
        let s = PathEnsembleSpec::single_path(0.0, 0.0).unwrap();
        let opts = SynthOptions { zero_phases: true };
        let (h1, h2) = generate_channel_pair_with(&s, &g, 1.0, &mut rng, opts).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn deterministic_under_seed() {
        let g = ArrayGeometry::square(8, 0.5).unwrap();
        let s = PathEnsembleSpec::keyhole(3, (0.1, 0.1)).unwrap();
        let a = generate_channel_pair(&s, &g, 1.0, &mut RngStream::new(9, 9)).unwrap();
        let b = generate_channel_pair(&s, &g, 1.0, &mut RngStream::new(9, 9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keyhole_one_equals_los() {
        let g = ArrayGeometry::square(4, 0.5).unwrap();
        let a = generate_keyhole_pair(1, (0.1, 0.2), &g, 1.0, &mut RngStream::new(1, 1)).unwrap();
        let s = PathEnsembleSpec::single_path(0.1, 0.2).unwrap();
        let b = generate_channel_pair(&s, &g, 1.0, &mut RngStream::new(1, 1)).unwrap();
        assert_eq!(a, b);
        assert!(generate_keyhole_pair(0, (0.1, 0.1), &g, 1.0, &mut RngStream::new(1, 1)).is_err());
    }

    #[test]
    fn unsamplable_off_diagonal() {
        let s = PathEnsembleSpec::new(
            vec![0.5, 0.5],
            vec![0.5, 0.5],
            vec![vec![0.1, 0.5], vec![1.0, 0.1]],
            vec![vec![0.1, 1.0], vec![1.0, 0.1]],
        )
        .unwrap();
        let g = ArrayGeometry::square(2, 0.5).unwrap();
        assert!(generate_channel_pair(&s, &g, 1.0, &mut RngStream::new(0, 0)).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(PathEnsembleSpec::single_path(1.5, 0.0).is_err());
        assert!(PathEnsembleSpec::new(vec![1.0], vec![1.0, 0.0], vec![vec![0.1]], vec![vec![0.1]]).is_err());
        assert!(PathEnsembleSpec::new(vec![-1.0], vec![1.0], vec![vec![0.1]], vec![vec![0.1]]).is_err());
        assert!(PathEnsembleSpec::new(vec![], vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn rayleigh_unit_power() {
        let mut rng = RngStream::new(7, 0);
        let n = 100_000;
        let p: f64 = (0..n)
            .map(|_| generate_rayleigh(1, &mut rng).unwrap()[0].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((p - 1.0).abs() < 0.02);
        assert!(generate_rayleigh(0, &mut rng).is_err());
    }

    #[test]
    fn wavelengths() {
        let plan = SubcarrierPlan::new(2.437e9, 20e6, 52).unwrap();
        let w = subcarrier_wavelengths(&plan).unwrap();
        assert_eq!(w.len(), 52);
        assert!(w.windows(2).all(|p| p[0] > p[1]));
        let ratio = w[0] / w[51];
        assert!((ratio - 1.0083).abs() < 1e-4, "ratio {ratio}");

        let one = subcarrier_wavelengths(&SubcarrierPlan::new(2.437e9, 20e6, 1).unwrap()).unwrap();
        assert_eq!(one, vec![SPEED_OF_LIGHT / 2.437e9]);

        assert!(SubcarrierPlan::new(1e9, 2e9, 4).is_err());
        assert!(SubcarrierPlan::new(1e9, 1e6, 0).is_err());
    }

    #[test]
    fn cluster_users_within_alpha() {
        let mut rng = RngStream::new(8, 0);
        let users = draw_cluster_paths(5, 2, (0.1, 0.2), &mut rng).unwrap();
        for a in &users {
            for b in &users {
                for (p, q) in a.iter().zip(b) {
                    assert!((p.angles.s_x - q.angles.s_x).abs() <= 0.1 + 1e-15);
                    assert!((p.angles.s_y - q.angles.s_y).abs() <= 0.2 + 1e-15);
                }
            }
        }
    }
}
