//! Synthetic stand-in for a measured campaign.
//!
//! Users are grouped in clusters that share path directions up to a small
//! angle spread. Every path has its own delay, so the channel varies across
//! subcarriers. All channels, including the calibration node, pass through
//! one random per-antenna, per-subcarrier phase screen, as an uncalibrated
//! base station would record them.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{write_dataset, ClusterEntry, DatasetManifest, LinkLabel, LocationRecord};
use crate::error::{Error, Result};
use crate::geometry::{accumulate_path, ArrayGeometry, ChannelVector};
use crate::rng::RngStream;
use crate::synth::{complex_normal, draw_cluster_paths, SubcarrierPlan, SPEED_OF_LIGHT};

pub const CALIBRATION_ID: &str = "calibration";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticDatasetSpec {
    pub seed: u64,
    pub los_clusters: usize,
    pub nlos_clusters: usize,
    pub locations_per_cluster: usize,
    pub los_paths: usize,
    pub nlos_paths: usize,
    /// Per-axis sine spread shared by the users of one cluster.
    pub intra_alpha: f64,
    pub frames: usize,
    pub snr_db: f64,
    pub max_delay_s: f64,
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub m_x: usize,
    pub m_y: usize,
    pub spacing_m: f64,
    pub phase_screen: bool,
}

impl Default for SyntheticDatasetSpec {
    fn default() -> Self {
        Self {
            seed: 1,
            los_clusters: 4,
            nlos_clusters: 5,
            locations_per_cluster: 25,
            los_paths: 1,
            nlos_paths: 3,
            intra_alpha: 0.05,
            frames: 1,
            snr_db: 30.0,
            max_delay_s: 200e-9,
            center_frequency_hz: 2.437e9,
            bandwidth_hz: 20e6,
            n_subcarriers: 52,
            m_x: 8,
            m_y: 8,
            spacing_m: 0.0635,
            phase_screen: true,
        }
    }
}

impl SyntheticDatasetSpec {
    pub fn plan(&self) -> Result<SubcarrierPlan> {
        SubcarrierPlan::new(self.center_frequency_hz, self.bandwidth_hz, self.n_subcarriers)
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.m_x, self.m_y, self.spacing_m, self.spacing_m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.los_clusters + self.nlos_clusters == 0 {
            return Err(Error::invalid("at least one cluster is required"));
        }
        if self.locations_per_cluster == 0 || self.frames == 0 {
            return Err(Error::invalid("locations_per_cluster and frames must be positive"));
        }
        if self.los_paths == 0 || self.nlos_paths == 0 {
            return Err(Error::invalid("path counts must be positive"));
        }
        if !(0.0..=1.0).contains(&self.intra_alpha) {
            return Err(Error::invalid(format!(
                "intra_alpha {} outside [0, 1]",
                self.intra_alpha
            )));
        }
        if !self.snr_db.is_finite() || !(self.max_delay_s >= 0.0 && self.max_delay_s.is_finite()) {
            return Err(Error::invalid(
                "snr_db and max_delay_s must be finite, delay non-negative",
            ));
        }
        self.plan()?;
        self.geometry()?;
        Ok(())
    }

    pub fn cluster_ids(&self) -> Vec<(String, LinkLabel)> {
        let los = (1..=self.los_clusters).map(|i| (format!("LOS{i}"), LinkLabel::Los));
        let nlos = (1..=self.nlos_clusters).map(|i| (format!("NLOS{i}"), LinkLabel::Nlos));
        los.chain(nlos).collect()
    }
}

struct DelayedPath {
    gain: Complex64,
    angles: crate::geometry::SteeringAngles,
    delay: f64,
}

/// Builds the manifest and records in memory. Deterministic in `spec.seed`.
pub fn build_synthetic_dataset(spec: &SyntheticDatasetSpec) -> Result<(DatasetManifest, Vec<LocationRecord>)> {
    spec.validate()?;
    let plan = spec.plan()?;
    let geom = spec.geometry()?;
    let freqs = plan.frequencies();
    let m = geom.antennas();
    let ids = spec.cluster_ids();

    let mut screen_rng = RngStream::new(spec.seed, u64::MAX);
    let screen: Vec<Vec<Complex64>> = freqs
        .iter()
        .map(|_| {
            (0..m)
                .map(|_| {
                    if spec.phase_screen {
                        Complex64::from_polar(1.0, screen_rng.random_range(0.0..2.0 * PI))
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect()
        })
        .collect();

    let noise_std = 10f64.powf(-spec.snr_db / 20.0);
    let snr = vec![spec.snr_db; m];

    let calib_frames: Vec<Vec<ChannelVector>> = (0..spec.frames)
        .map(|_| {
            screen
                .iter()
                .map(|s| ChannelVector::from_vec_unchecked(s.clone()))
                .collect()
        })
        .collect();
    let calibration = LocationRecord::from_channels(CALIBRATION_ID, None, &calib_frames, snr.clone())?;

    let per_cluster: Vec<Result<Vec<LocationRecord>>> = ids
        .par_iter()
        .enumerate()
        .map(|(ci, (cid, label))| {
            let mut rng = RngStream::new(spec.seed, ci as u64);
            let n_paths = match label {
                LinkLabel::Los => spec.los_paths,
                LinkLabel::Nlos => spec.nlos_paths,
            };
            let users = draw_cluster_paths(
                spec.locations_per_cluster,
                n_paths,
                (spec.intra_alpha, spec.intra_alpha),
                &mut rng,
            )?;
            users
                .into_iter()
                .enumerate()
                .map(|(u, paths)| {
                    let paths: Vec<DelayedPath> = paths
                        .into_iter()
                        .map(|p| DelayedPath {
                            gain: p.gain,
                            angles: p.angles,
                            delay: rng.random_range(0.0..=spec.max_delay_s),
                        })
                        .collect();
                    let frames: Vec<Vec<ChannelVector>> = (0..spec.frames)
                        .map(|_| {
                            freqs
                                .iter()
                                .zip(&screen)
                                .map(|(&f, s)| {
                                    let lambda = SPEED_OF_LIGHT / f;
                                    let mut acc = vec![Complex64::new(0.0, 0.0); m];
                                    for p in &paths {
                                        let rot = Complex64::from_polar(
                                            1.0,
                                            -2.0 * PI * (f - plan.center_frequency) * p.delay,
                                        );
                                        accumulate_path(&mut acc, &geom, p.angles, lambda, p.gain * rot);
                                    }
                                    for (x, sc) in acc.iter_mut().zip(s) {
                                        *x = (*x + complex_normal(&mut rng) * noise_std) * sc;
                                    }
                                    ChannelVector::from_vec_unchecked(acc)
                                })
                                .collect()
                        })
                        .collect();
                    LocationRecord::from_channels(
                        format!("{cid}_{:02}", u + 1),
                        Some(cid.clone()),
                        &frames,
                        snr.clone(),
                    )
                })
                .collect()
        })
        .collect();

    let mut records = vec![calibration];
    let mut clusters = Vec::with_capacity(ids.len());
    for ((cid, label), recs) in ids.into_iter().zip(per_cluster) {
        let recs = recs?;
        clusters.push(ClusterEntry {
            cluster_id: cid,
            label,
            location_ids: recs.iter().map(|r| r.location_id.clone()).collect(),
        });
        records.extend(recs);
    }
    let manifest = DatasetManifest::new(plan, geom, clusters, CALIBRATION_ID);
    Ok((manifest, records))
}

pub fn write_synthetic_dataset(spec: &SyntheticDatasetSpec, dir: impl AsRef<Path>) -> Result<DatasetManifest> {
    let (manifest, records) = build_synthetic_dataset(spec)?;
    write_dataset(dir.as_ref(), &manifest, &records)
}
