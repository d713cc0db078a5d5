//! The acceptance checks. Each check returns a report entry rather than
//! failing, so a full run always lists every criterion.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use iucorr_core::dataset::{DatasetReader, LinkLabel};
use iucorr_core::estimation::{
    calibrate, cluster_correlation_stats, music_spectrum, AngleGrid, ClusterStatsOptions, MusicConfig,
};
use iucorr_core::geometry::{steering_vector, ArrayGeometry, ChannelVector, SteeringAngles};
use iucorr_core::rng::RngStream;
use iucorr_core::synth::{complex_normal, SubcarrierPlan, SPEED_OF_LIGHT};
use iucorr_core::synthetic::{build_synthetic_dataset, SyntheticDatasetSpec};
use iucorr_core::theory::{
    correlation_asymptotic, correlation_closed_form, eta, keyhole_closed_form, lemma_2d_finite, lemma_2d_limit,
    response_dot_moments, variance_with_kernel, SincSeries,
};
use iucorr_core::{dataset::write_dataset, Error};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BandConfig, ChannelConfig, ExperimentConfig, ExperimentKind, Layout};
use crate::experiment::{keyhole_spec, run_band};
use crate::montecarlo::{pair_estimate, rayleigh_estimate, within_three_se};
use crate::quadrature::dot_moments_quadrature;

pub const DEFAULT_SEED: u64 = 20_240_917;
pub const MUSIC_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub status: Status,
    pub observed: String,
    pub tolerance: String,
    /// Informative checks never fail a run.
    pub gating: bool,
}

impl CheckResult {
    fn new(id: u8, name: &'static str, pass: bool, observed: String, tolerance: impl Into<String>) -> Self {
        Self {
            id,
            name,
            status: if pass { Status::Pass } else { Status::Fail },
            observed,
            tolerance: tolerance.into(),
            gating: true,
        }
    }

    fn errored(id: u8, name: &'static str, e: impl fmt::Display) -> Self {
        Self::new(id, name, false, format!("error: {e}"), "-")
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:02} {}: {} (tolerance: {})",
            self.status, self.id, self.name, self.observed, self.tolerance
        )
    }

    pub fn is_failure(&self) -> bool {
        self.gating && self.status == Status::Fail
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    pub seed: Option<u64>,
    /// Directory of an imported measured dataset, for check 14.
    pub measured: Option<PathBuf>,
    /// Scratch directory for the container check; a temp dir by default.
    pub scratch: Option<PathBuf>,
}

impl VerifyOptions {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fmt_list(v: &[String]) -> String {
    v.join(", ")
}

pub fn check_rayleigh(seed: u64) -> CheckResult {
    const NAME: &str = "rayleigh baseline";
    let mut obs = Vec::new();
    let mut ok = true;
    for (i, m) in [16usize, 64, 256].into_iter().enumerate() {
        match rayleigh_estimate(m, 20_000, seed, 100 + i as u32) {
            Ok(e) => {
                let target = 1.0 / (m as f64).sqrt();
                let r = rel(e.correlation, target);
                ok &= r < 0.05;
                obs.push(format!(
                    "M={m}: {:.5} vs {:.5} ({:.2}%)",
                    e.correlation,
                    target,
                    100.0 * r
                ));
            }
            Err(e) => return CheckResult::errored(1, NAME, e),
        }
    }
    CheckResult::new(1, NAME, ok, fmt_list(&obs), "5% relative")
}

/// The grid check with an arbitrary kernel for the closed form. With the
/// true `eta` this is criterion 2; a corrupted kernel must fail it.
pub fn check_closed_form_vs_mc_with<K>(seed: u64, kernel: K) -> CheckResult
where
    K: Fn(f64, usize) -> f64 + Sync,
{
    const NAME: &str = "closed form vs Monte Carlo";
    let mut grid = Vec::new();
    for layout in [Layout::Upa, Layout::Ula] {
        for alpha in [0.05, 0.1, 0.2, 0.6] {
            for keyholes in [1usize, 3] {
                grid.push((layout, alpha, keyholes));
            }
        }
    }
    let results: Vec<_> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(layout, alpha, keyholes))| {
            let geom = layout.geometry(64, 0.5)?;
            let spec = keyhole_spec(keyholes, alpha)?;
            let cf = variance_with_kernel(&spec, &geom, 1.0, &kernel)?;
            let e = pair_estimate(&spec, &geom, 1.0, 20_000, seed, 200 + i as u32)?;
            Ok::<_, crate::error::CliError>((layout, alpha, keyholes, e, cf))
        })
        .collect();
    let mut pass = 0;
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    for r in &results {
        match r {
            Ok((layout, alpha, keyholes, e, cf)) => {
                let z = (e.variance - cf).abs() / e.std_error.unwrap_or(f64::NAN);
                worst = worst.max(z);
                if within_three_se(e, *cf) {
                    pass += 1;
                } else {
                    failed.push(format!("{} a={alpha} L={keyholes} z={z:.2}", layout.as_str()));
                }
            }
            Err(e) => return CheckResult::errored(2, NAME, e),
        }
    }
    let frac = pass as f64 / grid.len() as f64;
    let mut obs = format!("{pass}/{} within 3 SE, max |z| = {worst:.2}", grid.len());
    if !failed.is_empty() {
        obs.push_str(&format!("; outside: {}", fmt_list(&failed)));
    }
    CheckResult::new(
        2,
        NAME,
        frac >= 0.95,
        obs,
        ">= 95% of points within 3 SE, 20000 samples",
    )
}

pub fn check_closed_form_vs_mc(seed: u64) -> CheckResult {
    check_closed_form_vs_mc_with(seed, eta)
}

/// The accuracy window is read at the correlation level, the quantity the
/// large-array statement is made about; variance ratios are reported too.
pub fn check_asymptotic_window() -> CheckResult {
    const NAME: &str = "large-array accuracy window";
    let run = || -> iucorr_core::Result<(f64, f64, f64, f64)> {
        let spec = keyhole_spec(1, 0.2)?;
        let upa = ArrayGeometry::square(16, 0.5)?;
        let ula = ArrayGeometry::ula(196, 0.5)?;
        let ru =
            correlation_closed_form(&spec, &upa, 1.0)?.variance / correlation_asymptotic(&spec, &upa, 1.0)?.variance;
        let rl =
            correlation_closed_form(&spec, &ula, 1.0)?.variance / correlation_asymptotic(&spec, &ula, 1.0)?.variance;
        Ok((ru.sqrt(), rl.sqrt(), ru, rl))
    };
    match run() {
        Ok((cu, cl, vu, vl)) => {
            let ok = (cu - 1.0).abs() <= 0.10 && (cl - 1.0).abs() <= 0.10;
            CheckResult::new(
                3,
                NAME,
                ok,
                format!(
                    "correlation ratio UPA 16x16 {cu:.4}, ULA 196 {cl:.4}; variance ratio UPA {vu:.4}, ULA {vl:.4}"
                ),
                "correlation ratio within 10%",
            )
        }
        Err(e) => CheckResult::errored(3, NAME, e),
    }
}

pub fn check_spacing_offset() -> CheckResult {
    const NAME: &str = "spacing-alpha offset";
    let run = || -> crate::error::CliResult<Vec<f64>> {
        let mut out = Vec::new();
        for layout in [Layout::Upa, Layout::Ula] {
            let a = correlation_closed_form(&keyhole_spec(1, 0.2)?, &layout.geometry(64, 0.25)?, 1.0)?;
            let b = correlation_closed_form(&keyhole_spec(1, 0.1)?, &layout.geometry(64, 0.5)?, 1.0)?;
            out.push(rel(a.correlation, b.correlation));
        }
        Ok(out)
    };
    match run() {
        Ok(d) => CheckResult::new(
            4,
            NAME,
            d.iter().all(|x| *x <= 1e-12),
            format!("relative difference UPA {:.2e}, ULA {:.2e}", d[0], d[1]),
            "1e-12 relative",
        ),
        Err(e) => CheckResult::errored(4, NAME, e),
    }
}

pub fn check_keyhole_identity() -> CheckResult {
    const NAME: &str = "keyhole identity";
    let run = || -> iucorr_core::Result<f64> {
        let geom = ArrayGeometry::square(8, 0.5)?;
        let mut worst: f64 = 0.0;
        for l in [1usize, 2, 3, 8] {
            for asym in [false, true] {
                let k = keyhole_closed_form(l, (0.1, 0.1), &geom, 1.0, asym)?.variance;
                let spec = iucorr_core::synth::PathEnsembleSpec::keyhole(l, (0.1, 0.1))?;
                let g = if asym {
                    correlation_asymptotic(&spec, &geom, 1.0)?
                } else {
                    correlation_closed_form(&spec, &geom, 1.0)?
                }
                .variance;
                worst = worst.max(rel(k, g));
            }
        }
        Ok(worst)
    };
    match run() {
        Ok(w) => CheckResult::new(
            5,
            NAME,
            w <= 1e-12,
            format!("max relative difference {w:.2e} over L in {{1,2,3,8}}"),
            "1e-12",
        ),
        Err(e) => CheckResult::errored(5, NAME, e),
    }
}

pub fn check_uniform_los() -> CheckResult {
    const NAME: &str = "uniform random LOS landmark";
    let run = || -> iucorr_core::Result<Vec<(usize, f64)>> {
        let spec = keyhole_spec(1, 1.0)?;
        [16usize, 64, 100, 256]
            .into_iter()
            .map(|m| {
                Ok((
                    m,
                    correlation_asymptotic(&spec, &ArrayGeometry::ula(m, 0.5)?, 1.0)?.variance,
                ))
            })
            .collect()
    };
    match run() {
        Ok(v) => {
            let ok = v.iter().all(|(m, x)| *x == 1.0 / *m as f64);
            let obs = v.iter().map(|(m, x)| format!("M={m}: {x:e}")).collect::<Vec<_>>();
            CheckResult::new(6, NAME, ok, fmt_list(&obs), "exactly 1/M")
        }
        Err(e) => CheckResult::errored(6, NAME, e),
    }
}

pub fn check_cesaro_series() -> CheckResult {
    const NAME: &str = "single sinc series";
    let gammas = [0.5, 1.0, FRAC_PI_2, PI];
    let res: Vec<_> = gammas
        .par_iter()
        .map(|&g| {
            let s = SincSeries::new(g)?;
            Ok::<_, Error>((g, s.cesaro_mean(1_000_000), s.closed_form(), s.partial_sum(1000)))
        })
        .collect();
    let mut ok = true;
    let mut obs = Vec::new();
    for r in res {
        match r {
            Ok((g, c, cf, partial)) => {
                let err = (c - cf).abs();
                ok &= err <= 1e-3;
                if g == PI {
                    ok &= partial == 1.0 && c == 1.0;
                }
                obs.push(format!("g={g:.4}: |err|={err:.1e}"));
            }
            Err(e) => return CheckResult::errored(7, NAME, e),
        }
    }
    CheckResult::new(7, NAME, ok, fmt_list(&obs), "1e-3 at N=1e6; exact at g=pi")
}

pub fn check_double_sinc_sum() -> CheckResult {
    const NAME: &str = "double sinc sum";
    let mut ok = true;
    let mut obs = Vec::new();
    for g in [0.5, 1.0, FRAC_PI_2, PI] {
        match (lemma_2d_finite(g, 10_000), lemma_2d_limit(g)) {
            (Ok(v), Ok(l)) => {
                let r = rel(v, l);
                ok &= r <= 1e-3;
                obs.push(format!("g={g:.4}: rel {r:.1e}"));
            }
            (Err(e), _) | (_, Err(e)) => return CheckResult::errored(8, NAME, e),
        }
    }
    CheckResult::new(8, NAME, ok, fmt_list(&obs), "0.1% at M=1e4")
}

pub fn check_moments_quadrature() -> CheckResult {
    const NAME: &str = "response moments vs quadrature";
    let mut worst: f64 = 0.0;
    for (mx, my) in [(4usize, 1usize), (4, 4)] {
        let geom = match ArrayGeometry::new(mx, my, 0.5, 0.5) {
            Ok(g) => g,
            Err(e) => return CheckResult::errored(9, NAME, e),
        };
        for alpha in [0.25, 0.5, 1.0] {
            let (m, v) = match response_dot_moments(alpha, alpha, &geom, 1.0) {
                Ok(x) => x,
                Err(e) => return CheckResult::errored(9, NAME, e),
            };
            let (qm, qv) = dot_moments_quadrature(&geom, 1.0, alpha, alpha, 1e-10);
            worst = worst.max((m - qm).abs()).max((v - qv).abs());
        }
    }
    CheckResult::new(
        9,
        NAME,
        worst <= 1e-6,
        format!("max abs difference {worst:.2e}"),
        "1e-6 absolute",
    )
}

/// The band run behind check 10, shared with the experiment runner.
pub fn flatness_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        kind: ExperimentKind::SubcarrierVariation,
        seed,
        samples: Some(500),
        rayleigh_samples: None,
        output: None,
        array: crate::config::ArrayConfig {
            layout: Layout::Upa,
            antennas: vec![64],
            spacing: 0.5,
            spacing_m: Some(0.0635),
            aperture: None,
        },
        channel: ChannelConfig {
            keyholes: vec![1, 3],
            alphas: vec![0.05, 0.1, 0.2, 0.6],
        },
        band: Some(BandConfig {
            center_frequency_hz: 2.437e9,
            bandwidth_hz: 20e6,
            n_subcarriers: 52,
        }),
        offsets: None,
        dataset: None,
        lemma: None,
        music: None,
    }
}

pub fn check_subcarrier_flatness(seed: u64) -> CheckResult {
    const NAME: &str = "subcarrier flatness";
    let (_, lambdas, curves) = match run_band(&flatness_config(seed)) {
        Ok(x) => x,
        Err(e) => return CheckResult::errored(10, NAME, e),
    };
    let wl = lambdas[0] / lambdas[lambdas.len() - 1];
    let expected = wl * wl;
    let max_std = curves.iter().map(|c| c.correlation_std()).fold(0.0, f64::max);
    let max_dev = curves
        .iter()
        .map(|c| (c.asymptotic_edge_ratio() - expected).abs())
        .fold(0.0, f64::max);
    let cf: Vec<f64> = curves.iter().map(|c| c.closed_form_edge_ratio()).collect();
    let (cf_lo, cf_hi) = cf.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let ok = max_std < 0.01 && max_dev <= 1e-4;
    CheckResult::new(
        10,
        NAME,
        ok,
        format!(
            "max per-curve std {max_std:.2e} over {} curves; edge variance ratio {:.5} vs (lambda_low/lambda_high)^2 = {expected:.5} \
             (|diff| {max_dev:.1e}); correlation ratio {:.5}; finite-array ratio {cf_lo:.5}..{cf_hi:.5}; 1.0168 differs by {:.1e}",
            curves.len(),
            curves[0].asymptotic_edge_ratio(),
            wl,
            (expected - 1.0168).abs()
        ),
        "std < 0.01; ratio within 1e-4",
    )
}

fn planar_snapshots(
    truths: &[SteeringAngles],
    geom: &ArrayGeometry,
    plan: &SubcarrierPlan,
    snr_db: f64,
    rng: &mut RngStream,
) -> iucorr_core::Result<Vec<ChannelVector>> {
    let paths: Vec<(f64, f64)> = truths
        .iter()
        .map(|_| (rng.random_range(0.0..2.0 * PI), rng.random_range(0.0..=200e-9)))
        .collect();
    let sigma = 10f64.powf(-snr_db / 20.0);
    plan.frequencies()
        .iter()
        .map(|&f| {
            let lambda = SPEED_OF_LIGHT / f;
            let mut x = vec![Complex64::new(0.0, 0.0); geom.antennas()];
            for (t, &(phi, tau)) in truths.iter().zip(&paths) {
                let g = Complex64::from_polar(1.0, phi - 2.0 * PI * f * tau);
                for (xi, ai) in x.iter_mut().zip(steering_vector(geom, *t, lambda)?.iter()) {
                    *xi += g * ai;
                }
            }
            for xi in x.iter_mut() {
                *xi += complex_normal(rng) * sigma;
            }
            ChannelVector::new(x)
        })
        .collect()
}

/// One planted-source MUSIC trial; true when every source has a distinct
/// spectrum maximum within one degree on both axes.
pub fn music_trial(seed: u64, trial: usize, two_sources: bool) -> iucorr_core::Result<bool> {
    let plan = SubcarrierPlan::new(2.437e9, 20e6, 52)?;
    let geom = ArrayGeometry::square(8, 0.0635)?;
    let first = SteeringAngles::from_degrees(20.0, 10.0);
    let mut truths = vec![first];
    if two_sources {
        truths.push(SteeringAngles::new(first.s_x - 0.5, first.s_y));
    }
    let mut rng = RngStream::new(seed, (u64::from(two_sources) << 32) | trial as u64);
    let snaps = planar_snapshots(&truths, &geom, &plan, 20.0, &mut rng)?;
    let grid = AngleGrid::degrees(1.0)?;
    let map = music_spectrum(
        &snaps,
        &geom,
        plan.center_wavelength(),
        &MusicConfig::with_sources(truths.len()),
        &grid,
    )?;
    let maxima = map.local_maxima(truths.len());
    let tol = 1.0 + 1e-9;
    let mut used = vec![false; maxima.len()];
    for t in &truths {
        let (tx, ty) = (t.s_x.asin().to_degrees(), t.s_y.asin().to_degrees());
        let hit = maxima.iter().enumerate().find(|(k, (ix, iy))| {
            !used[*k]
                && (map.grid.s_x()[*ix].asin().to_degrees() - tx).abs() <= tol
                && (map.grid.s_y()[*iy].asin().to_degrees() - ty).abs() <= tol
        });
        match hit {
            Some((k, _)) => used[k] = true,
            None => return Ok(false),
        }
    }
    Ok(true)
}

pub fn check_music(seed: u64) -> CheckResult {
    const NAME: &str = "MUSIC planted sources";
    let mut obs = Vec::new();
    let mut ok = true;
    for two in [false, true] {
        let hits: iucorr_core::Result<Vec<bool>> = (0..MUSIC_TRIALS)
            .into_par_iter()
            .map(|t| music_trial(seed, t, two))
            .collect();
        match hits {
            Ok(h) => {
                let n = h.iter().filter(|x| **x).count();
                ok &= n * 100 >= 95 * MUSIC_TRIALS;
                obs.push(format!("{} source(s): {n}/{MUSIC_TRIALS}", if two { 2 } else { 1 }));
            }
            Err(e) => return CheckResult::errored(11, NAME, e),
        }
    }
    CheckResult::new(11, NAME, ok, fmt_list(&obs), ">= 95% within 1 degree, 20 dB SNR")
}

pub fn check_calibration(seed: u64) -> CheckResult {
    const NAME: &str = "calibration round trip";
    let mut rng = RngStream::new(seed, 12);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let h: Vec<Complex64> = (0..64).map(|_| complex_normal(&mut rng)).collect();
        let screen: Vec<Complex64> = (0..64)
            .map(|_| Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI)))
            .collect();
        let raw = ChannelVector::new(h.iter().zip(&screen).map(|(a, s)| a * s).collect());
        let cal = ChannelVector::new(screen);
        match (raw, cal) {
            (Ok(raw), Ok(cal)) => match calibrate(&raw, &cal) {
                Ok(out) => {
                    for (a, b) in out.iter().zip(&h) {
                        worst = worst.max((a - b).norm());
                    }
                }
                Err(e) => return CheckResult::errored(12, NAME, e),
            },
            (Err(e), _) | (_, Err(e)) => return CheckResult::errored(12, NAME, e),
        }
    }
    CheckResult::new(
        12,
        NAME,
        worst <= 1e-12,
        format!("max entry error {worst:.1e} over 200 screens"),
        "1e-12",
    )
}

fn container_roundtrip(dir: &Path, seed: u64) -> crate::error::CliResult<String> {
    let spec = SyntheticDatasetSpec {
        seed,
        ..SyntheticDatasetSpec::default()
    };
    let (manifest, records) = build_synthetic_dataset(&spec)?;
    let written = write_dataset(dir, &manifest, &records)?;
    let reader = DatasetReader::open(dir)?;
    if reader.manifest() != &written {
        return Err(crate::error::CliError::invalid(
            "manifest changed across the round trip",
        ));
    }
    for r in &records {
        if &reader.load(&r.location_id)? != r {
            return Err(crate::error::CliError::invalid(format!(
                "record {} differs after reload",
                r.location_id
            )));
        }
    }
    let n_clusters = manifest.clusters.len();
    let n_locations = records.len() - 1;

    // truncation and a single flipped byte must both be caught by name
    let victims = [&records[1].location_id, &records[records.len() - 1].location_id];
    let p0 = dir.join(format!("{}.cplx", victims[0]));
    let bytes = fs::read(&p0).map_err(|e| crate::error::CliError::io(&p0, e))?;
    fs::write(&p0, &bytes[..bytes.len() - 8]).map_err(|e| crate::error::CliError::io(&p0, e))?;
    let p1 = dir.join(format!("{}.cplx", victims[1]));
    let mut bytes1 = fs::read(&p1).map_err(|e| crate::error::CliError::io(&p1, e))?;
    bytes1[17] ^= 0x01;
    fs::write(&p1, &bytes1).map_err(|e| crate::error::CliError::io(&p1, e))?;
    for v in victims {
        match reader.load(v) {
            Err(Error::Checksum { location, .. }) if &location == v => {}
            other => {
                return Err(crate::error::CliError::invalid(format!(
                    "corruption of {v} not reported as a checksum error: {other:?}"
                )))
            }
        }
    }
    Ok(format!(
        "{n_clusters} clusters x {} locations round-tripped bit-exact ({} blobs); truncation and bit flip detected",
        n_locations / n_clusters,
        records.len()
    ))
}

pub fn check_container(seed: u64, scratch: Option<&Path>) -> CheckResult {
    const NAME: &str = "dataset container";
    let dir = match scratch {
        Some(p) => p.to_path_buf(),
        None => std::env::temp_dir().join(format!("iucorr-verify-{}-{seed}", std::process::id())),
    };
    let _ = fs::remove_dir_all(&dir);
    let out = container_roundtrip(&dir, seed);
    let _ = fs::remove_dir_all(&dir);
    match out {
        Ok(obs) => CheckResult::new(13, NAME, true, obs, "bit-exact; corruption detected"),
        Err(e) => CheckResult::errored(13, NAME, e),
    }
}

fn normalized(id: &str) -> String {
    id.chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect::<String>()
        .to_ascii_uppercase()
}

/// Cluster index by id (`LOS 4`, `LOS4`, `los_4`), else by ordinal within
/// its label.
fn find_cluster(ids: &[String], labels: &[LinkLabel], label: LinkLabel, ordinal: usize) -> Option<usize> {
    let want = format!("{}{ordinal}", label.as_str());
    ids.iter().position(|c| normalized(c) == want).or_else(|| {
        labels
            .iter()
            .enumerate()
            .filter(|(_, l)| **l == label)
            .nth(ordinal - 1)
            .map(|(i, _)| i)
    })
}

pub fn check_measured(path: Option<&Path>) -> CheckResult {
    const NAME: &str = "measured dataset";
    let skip = |why: String| CheckResult {
        id: 14,
        name: NAME,
        status: Status::Skip,
        observed: why,
        tolerance: "informative".into(),
        gating: false,
    };
    let Some(path) = path else {
        return skip("no measured dataset supplied".into());
    };
    if !path.join(iucorr_core::dataset::MANIFEST_FILE).is_file() {
        return skip(format!("no dataset at {}", path.display()));
    }
    let run = || -> crate::error::CliResult<(bool, String)> {
        let reader = DatasetReader::open(path)?;
        let s = cluster_correlation_stats(&reader, &ClusterStatsOptions::new(64))?;
        let k = s.len();
        let diag: Vec<f64> = (0..k).map(|i| s.mean[i][i]).collect();
        let min_intra = diag.iter().cloned().fold(f64::MAX, f64::min);
        let labels = &s.labels;
        let by_label = |l: LinkLabel| (0..k).filter(move |&i| labels[i] == l);
        let los_low = by_label(LinkLabel::Los).map(|i| diag[i]).fold(f64::MAX, f64::min);
        let nlos_high = by_label(LinkLabel::Nlos).map(|i| diag[i]).fold(f64::MIN, f64::max);
        let pair = match (
            find_cluster(&s.cluster_ids, &s.labels, LinkLabel::Los, 4),
            find_cluster(&s.cluster_ids, &s.labels, LinkLabel::Nlos, 2),
        ) {
            (Some(a), Some(b)) => s.mean[a][b],
            _ => f64::NAN,
        };
        let threshold = 2.0 / 8.0;
        let mut high = 0;
        let mut total = 0;
        for i in 0..k {
            for j in i + 1..k {
                total += 1;
                if s.mean[i][j] >= threshold {
                    high += 1;
                }
            }
        }
        let frac = high as f64 / total.max(1) as f64;
        let ok = min_intra >= 0.48
            && (los_low - 0.838).abs() <= 0.02
            && (nlos_high - 0.623).abs() <= 0.02
            && (pair - 0.557).abs() <= 0.02
            && (frac - 0.3056).abs() <= 1.0 / 36.0;
        Ok((
            ok,
            format!(
                "min intra {min_intra:.3}; lowest LOS intra {los_low:.3}; highest NLOS intra {nlos_high:.3}; \
                 LOS4-NLOS2 {pair:.3}; pairs >= 2x Rayleigh {high}/{total} ({:.2}%)",
                100.0 * frac
            ),
        ))
    };
    let mut r = match run() {
        Ok((ok, obs)) => CheckResult::new(14, NAME, ok, obs, "+-0.02 on means; +-1 pair on the fraction"),
        Err(e) => CheckResult::errored(14, NAME, e),
    };
    r.gating = false;
    r
}

/// Every acceptance check, in criterion order.
pub fn verify_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    let seed = opts.seed();
    vec![
        check_rayleigh(seed),
        check_closed_form_vs_mc(seed),
        check_asymptotic_window(),
        check_spacing_offset(),
        check_keyhole_identity(),
        check_uniform_los(),
        check_cesaro_series(),
        check_double_sinc_sum(),
        check_moments_quadrature(),
        check_subcarrier_flatness(seed),
        check_music(seed),
        check_calibration(seed),
        check_container(seed, opts.scratch.as_deref()),
        check_measured(opts.measured.as_deref()),
    ]
}
