//! Intra- and inter-cluster correlation statistics over a stored dataset.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{calibrate, cosine_similarity};
use crate::dataset::{select_channel, DatasetReader, LinkLabel};
use crate::error::{Error, Result};
use crate::geometry::{subsample_square, ChannelVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SubcarrierSelection {
    #[default]
    All,
    Indices(Vec<usize>),
}

impl SubcarrierSelection {
    pub fn resolve(&self, n_subcarriers: usize) -> Result<Vec<usize>> {
        match self {
            Self::All => Ok((0..n_subcarriers).collect()),
            Self::Indices(idx) => {
                if idx.is_empty() {
                    return Err(Error::invalid("empty subcarrier selection"));
                }
                if let Some(&i) = idx.iter().find(|&&i| i >= n_subcarriers) {
                    return Err(Error::OutOfRange {
                        index: i,
                        len: n_subcarriers,
                        context: "subcarrier selection",
                    });
                }
                Ok(idx.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStatsOptions {
    /// Sub-array size; a perfect square.
    pub m: usize,
    pub subcarriers: SubcarrierSelection,
    /// Drop locations with any antenna below this SNR.
    pub min_snr_db: Option<f64>,
    pub frame: usize,
}

impl ClusterStatsOptions {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            subcarriers: SubcarrierSelection::All,
            min_snr_db: None,
            frame: 0,
        }
    }
}

/// `K×K` symmetric summaries, row-major.
///
/// `mean[i][j]` averages over location pairs and subcarriers. `std[i][j]` is
/// the spread across subcarriers of the per-subcarrier pair mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStats {
    pub cluster_ids: Vec<String>,
    pub labels: Vec<LinkLabel>,
    pub subcarriers: Vec<usize>,
    pub mean: Vec<Vec<f64>>,
    pub std: Vec<Vec<f64>>,
    pub n_pairs: Vec<Vec<usize>>,
    /// `subcarrier_means[i][j][s]` for the `s`-th selected subcarrier.
    pub subcarrier_means: Vec<Vec<Vec<f64>>>,
}

impl ClusterStats {
    pub fn len(&self) -> usize {
        self.cluster_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cluster_ids.is_empty()
    }

    pub fn index_of(&self, cluster_id: &str) -> Option<usize> {
        self.cluster_ids.iter().position(|c| c == cluster_id)
    }
}

// calibrated, sub-sampled channels of one location, one per selected subcarrier
type Prepared = Vec<ChannelVector>;

fn prepare_cluster(
    reader: &DatasetReader,
    location_ids: &[String],
    calib: &[ChannelVector],
    subcarriers: &[usize],
    opts: &ClusterStatsOptions,
) -> Result<Vec<Prepared>> {
    let geom = reader.manifest().geometry()?;
    let mut out = Vec::with_capacity(location_ids.len());
    for id in location_ids {
        let rec = reader.load(id)?;
        if let Some(t) = opts.min_snr_db {
            if !rec.meets_snr(t) {
                continue;
            }
        }
        let mut per_sc = Vec::with_capacity(subcarriers.len());
        for (&sc, c) in subcarriers.iter().zip(calib) {
            let raw = select_channel(&rec, opts.frame, sc)?;
            let h = calibrate(&raw, c)?;
            per_sc.push(subsample_square(&h, &geom, opts.m)?.0);
        }
        out.push(per_sc);
    }
    Ok(out)
}

// per-subcarrier mean and pair count for one block
fn block(a: &[Prepared], b: &[Prepared], same: bool, n_sc: usize) -> Result<(Vec<f64>, usize)> {
    let mut sums = vec![0.0; n_sc];
    let mut pairs = 0usize;
    for (i, x) in a.iter().enumerate() {
        let start = if same { i + 1 } else { 0 };
        for y in &b[start..] {
            for (s, slot) in sums.iter_mut().enumerate() {
                *slot += cosine_similarity(&x[s], &y[s])?;
            }
            pairs += 1;
        }
    }
    if pairs > 0 {
        sums.iter_mut().for_each(|v| *v /= pairs as f64);
    }
    Ok((sums, pairs))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Correlation statistics for every pair of clusters in the dataset.
///
/// Each location blob is read once. Blocks with no location pairs (a
/// single-location cluster on the diagonal) report zero mean and zero pairs.
pub fn cluster_correlation_stats(reader: &DatasetReader, opts: &ClusterStatsOptions) -> Result<ClusterStats> {
    let manifest = reader.manifest();
    if manifest.clusters.is_empty() {
        return Err(Error::invalid("dataset has no clusters"));
    }
    let geom = manifest.geometry()?;
    crate::geometry::square_subarray_indices(&geom, opts.m)?;
    let subcarriers = opts.subcarriers.resolve(manifest.n_subcarriers)?;

    let calib_rec = reader.calibration()?;
    let calib = subcarriers
        .iter()
        .map(|&sc| select_channel(&calib_rec, opts.frame, sc))
        .collect::<Result<Vec<_>>>()?;

    let prepared = manifest
        .clusters
        .par_iter()
        .map(|c| prepare_cluster(reader, &c.location_ids, &calib, &subcarriers, opts))
        .collect::<Result<Vec<_>>>()?;

    let k = prepared.len();
    let n_sc = subcarriers.len();
    let blocks: Vec<(usize, usize)> = (0..k).flat_map(|i| (i..k).map(move |j| (i, j))).collect();
    let results = blocks
        .par_iter()
        .map(|&(i, j)| block(&prepared[i], &prepared[j], i == j, n_sc))
        .collect::<Result<Vec<_>>>()?;

    let mut mean = vec![vec![0.0; k]; k];
    let mut std = vec![vec![0.0; k]; k];
    let mut n_pairs = vec![vec![0; k]; k];
    let mut subcarrier_means = vec![vec![Vec::new(); k]; k];
    for (&(i, j), (per_sc, pairs)) in blocks.iter().zip(results) {
        let (m, s) = if pairs > 0 { mean_std(&per_sc) } else { (0.0, 0.0) };
        for (r, c) in [(i, j), (j, i)] {
            mean[r][c] = m;
            std[r][c] = s;
            n_pairs[r][c] = pairs;
            subcarrier_means[r][c] = per_sc.clone();
        }
    }
    Ok(ClusterStats {
        cluster_ids: manifest.clusters.iter().map(|c| c.cluster_id.clone()).collect(),
        labels: manifest.clusters.iter().map(|c| c.label).collect(),
        subcarriers,
        mean,
        std,
        n_pairs,
        subcarrier_means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{write_dataset, ClusterEntry, DatasetManifest, LocationRecord};
    use crate::geometry::ArrayGeometry;
    use crate::rng::RngStream;
    use crate::synth::{draw_cluster_paths, realize, SubcarrierPlan, SPEED_OF_LIGHT};
    use num_complex::Complex64;

    fn build(dir: &std::path::Path, per_cluster: usize, n_clusters: usize, n_sc: usize, alpha: f64) -> DatasetReader {
        let plan = SubcarrierPlan::new(2.437e9, 20e6, n_sc).unwrap();
        let lambda = SPEED_OF_LIGHT / plan.center_frequency;
        let geom = ArrayGeometry::square(8, lambda / 2.0).unwrap();
        let mut rng = RngStream::new(91, 0);
        let mut clusters = Vec::new();
        let mut records = Vec::new();
        let snr = vec![30.0; 64];
        records.push(
            LocationRecord::from_channels("calib", None, &[vec![ChannelVector::ones(64); n_sc]], snr.clone()).unwrap(),
        );
        for c in 0..n_clusters {
            let cid = format!("c{c}");
            let users = draw_cluster_paths(per_cluster, 3, (alpha, alpha), &mut rng).unwrap();
            let mut ids = Vec::new();
            for (u, paths) in users.iter().enumerate() {
                let id = format!("{cid}_{u}");
                let h: Vec<ChannelVector> = plan
                    .frequencies()
                    .iter()
                    .map(|f| realize(paths, &geom, SPEED_OF_LIGHT / f))
                    .collect();
                records.push(LocationRecord::from_channels(&id, Some(cid.clone()), &[h], snr.clone()).unwrap());
                ids.push(id);
            }
            clusters.push(ClusterEntry {
                cluster_id: cid,
                label: LinkLabel::Nlos,
                location_ids: ids,
            });
        }
        let manifest = DatasetManifest::new(plan, geom, clusters, "calib");
        write_dataset(dir, &manifest, &records).unwrap();
        DatasetReader::open(dir).unwrap()
    }

    #[test]
    fn single_sample_has_zero_std() {
        let tmp = tempfile::tempdir().unwrap();
        let reader = build(tmp.path(), 1, 3, 1, 0.05);
        let stats = cluster_correlation_stats(&reader, &ClusterStatsOptions::new(64)).unwrap();
        for i in 0..3 {
            assert_eq!(stats.n_pairs[i][i], 0);
            for j in 0..3 {
                assert_eq!(stats.std[i][j], 0.0);
            }
        }
        assert_eq!(stats.n_pairs[0][1], 1);
    }

    #[test]
    fn intra_exceeds_inter() {
        let tmp = tempfile::tempdir().unwrap();
        let reader = build(tmp.path(), 5, 3, 4, 0.05);
        let stats = cluster_correlation_stats(&reader, &ClusterStatsOptions::new(64)).unwrap();
        let min_diag = (0..3).map(|i| stats.mean[i][i]).fold(f64::MAX, f64::min);
        let max_off = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| stats.mean[i][j])
            .fold(f64::MIN, f64::max);
        assert!(min_diag > max_off, "{min_diag} vs {max_off}");
        assert_eq!(stats.n_pairs[0][0], 10);
        assert_eq!(stats.n_pairs[0][1], 25);
        assert_eq!(stats.mean, transpose(&stats.mean));
        // calibration + 15 locations, each read once
        assert_eq!(reader.loads(), 16);
    }

    fn transpose(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        (0..m.len()).map(|j| m.iter().map(|r| r[j]).collect()).collect()
    }

    #[test]
    fn phase_screen_is_removed() {
        let tmp = tempfile::tempdir().unwrap();
        let reader = build(tmp.path(), 2, 1, 1, 0.0);
        let clean = cluster_correlation_stats(&reader, &ClusterStatsOptions::new(16)).unwrap();

        // same channels behind a per-antenna phase screen, calibrated away
        let tmp2 = tempfile::tempdir().unwrap();
        let m = reader.manifest().clone();
        let mut rng = RngStream::new(5, 0);
        let screen: Vec<Complex64> = (0..64)
            .map(|_| Complex64::from_polar(1.0, rand::Rng::random_range(&mut rng, 0.0..std::f64::consts::TAU)))
            .collect();
        let apply = |h: ChannelVector| ChannelVector::new(h.iter().zip(&screen).map(|(a, b)| a * b).collect()).unwrap();
        let mut records = Vec::new();
        for l in &m.locations {
            let r = reader.load(&l.location_id).unwrap();
            let h = apply(select_channel(&r, 0, 0).unwrap());
            records.push(
                LocationRecord::from_channels(&r.location_id, r.cluster_id.clone(), &[vec![h]], r.snr_db.clone())
                    .unwrap(),
            );
        }
        let mut fresh = m.clone();
        fresh.locations.clear();
        write_dataset(tmp2.path(), &fresh, &records).unwrap();
        let screened = DatasetReader::open(tmp2.path()).unwrap();
        let got = cluster_correlation_stats(&screened, &ClusterStatsOptions::new(16)).unwrap();
        assert!((got.mean[0][0] - clean.mean[0][0]).abs() < 1e-5);
    }

    #[test]
    fn bad_options() {
        let tmp = tempfile::tempdir().unwrap();
        let reader = build(tmp.path(), 2, 1, 2, 0.1);
        assert!(cluster_correlation_stats(&reader, &ClusterStatsOptions::new(10)).is_err());
        assert!(cluster_correlation_stats(&reader, &ClusterStatsOptions::new(81)).is_err());
        let mut o = ClusterStatsOptions::new(16);
        o.subcarriers = SubcarrierSelection::Indices(vec![5]);
        assert!(cluster_correlation_stats(&reader, &o).is_err());
        o.subcarriers = SubcarrierSelection::Indices(vec![1]);
        o.min_snr_db = Some(40.0);
        let s = cluster_correlation_stats(&reader, &o).unwrap();
        assert_eq!(s.n_pairs[0][0], 0);
    }
}
