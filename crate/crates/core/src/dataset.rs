//! On-disk channel dataset.
//!
//! A dataset is a directory holding `manifest.toml` and one `<location_id>.cplx`
//! blob per location. A blob is a flat array of little-endian `f32` pairs
//! `(re, im)`, frame-major, then subcarrier, then antenna (row-major antenna
//! order as in [`crate::geometry`]). Each blob's CRC-64/XZ is recorded in the
//! manifest as 16 lowercase hex digits.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use crc::{Crc, CRC_64_XZ};
use num_complex::{Complex32, Complex64};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ArrayGeometry, ChannelVector};
use crate::synth::SubcarrierPlan;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const BLOB_EXTENSION: &str = "cplx";

const CRC64: Crc<u64> = Crc::<u64>::new(&CRC_64_XZ);

pub fn checksum(bytes: &[u8]) -> u64 {
    CRC64.checksum(bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LinkLabel {
    #[serde(rename = "LOS")]
    Los,
    #[serde(rename = "NLOS")]
    Nlos,
}

impl LinkLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Los => "LOS",
            Self::Nlos => "NLOS",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterEntry {
    pub cluster_id: String,
    pub label: LinkLabel,
    pub location_ids: Vec<String>,
}

/// Per-blob bookkeeping written by [`write_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationEntry {
    pub location_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cluster_id: Option<String>,
    pub frames: usize,
    pub snr_db: Vec<f64>,
    pub checksum: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub schema_version: u32,
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
    pub m_x: usize,
    pub m_y: usize,
    pub d_x_m: f64,
    pub d_y_m: f64,
    pub calibration_location_id: String,
    pub clusters: Vec<ClusterEntry>,
    #[serde(default)]
    pub locations: Vec<LocationEntry>,
}

impl DatasetManifest {
    pub fn new(
        plan: SubcarrierPlan,
        geometry: ArrayGeometry,
        clusters: Vec<ClusterEntry>,
        calibration_location_id: impl Into<String>,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            center_frequency_hz: plan.center_frequency,
            bandwidth_hz: plan.bandwidth,
            n_subcarriers: plan.n_subcarriers,
            m_x: geometry.m_x(),
            m_y: geometry.m_y(),
            d_x_m: geometry.d_x(),
            d_y_m: geometry.d_y(),
            calibration_location_id: calibration_location_id.into(),
            clusters,
            locations: Vec::new(),
        }
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.m_x, self.m_y, self.d_x_m, self.d_y_m)
    }

    pub fn plan(&self) -> Result<SubcarrierPlan> {
        SubcarrierPlan::new(self.center_frequency_hz, self.bandwidth_hz, self.n_subcarriers)
    }

    pub fn antennas(&self) -> usize {
        self.m_x * self.m_y
    }

    pub fn location(&self, id: &str) -> Option<&LocationEntry> {
        self.locations.iter().find(|l| l.location_id == id)
    }

    /// Structural checks that need no blob access.
    fn validate_header(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::UnsupportedVersion {
                found: self.schema_version,
                supported: SCHEMA_VERSION,
            });
        }
        self.geometry()?;
        self.plan()?;
        if self.clusters.is_empty() {
            return Err(Error::InvalidDataset("no clusters".into()));
        }
        let mut cluster_ids = HashSet::new();
        let mut seen = HashSet::new();
        for c in &self.clusters {
            if !cluster_ids.insert(c.cluster_id.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate cluster `{}`", c.cluster_id)));
            }
            for id in &c.location_ids {
                check_location_id(id)?;
                if !seen.insert(id.as_str()) {
                    return Err(Error::InvalidDataset(format!("location `{id}` listed twice")));
                }
            }
        }
        if seen.contains(self.calibration_location_id.as_str()) {
            return Err(Error::InvalidDataset(
                "calibration location must not belong to a cluster".into(),
            ));
        }
        check_location_id(&self.calibration_location_id)?;
        Ok(())
    }

    fn validate_locations(&self) -> Result<()> {
        let mut by_id = HashSet::new();
        for l in &self.locations {
            if !by_id.insert(l.location_id.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate location `{}`", l.location_id)));
            }
            if l.frames == 0 {
                return Err(Error::InvalidDataset(format!(
                    "location `{}` has no frames",
                    l.location_id
                )));
            }
            if l.snr_db.len() != self.antennas() {
                return Err(Error::DimensionMismatch {
                    expected: self.antennas(),
                    actual: l.snr_db.len(),
                    context: "per-antenna SNR list",
                });
            }
            parse_checksum(&l.checksum, &l.location_id)?;
        }
        if !by_id.contains(self.calibration_location_id.as_str()) {
            return Err(Error::InvalidDataset(format!(
                "calibration location `{}` has no record",
                self.calibration_location_id
            )));
        }
        for c in &self.clusters {
            for id in &c.location_ids {
                let entry = self
                    .location(id)
                    .ok_or_else(|| Error::InvalidDataset(format!("location `{id}` has no record")))?;
                if entry.cluster_id.as_deref() != Some(c.cluster_id.as_str()) {
                    return Err(Error::InvalidDataset(format!(
                        "location `{id}` is listed in cluster `{}` but records {:?}",
                        c.cluster_id, entry.cluster_id
                    )));
                }
            }
        }
        Ok(())
    }
}

fn check_location_id(id: &str) -> Result<()> {
    let ok = !id.is_empty()
        && !id.starts_with('.')
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDataset(format!(
            "location id `{id}` must be non-empty ASCII [A-Za-z0-9_.-] and not start with '.'"
        )))
    }
}

fn parse_checksum(hex: &str, location: &str) -> Result<u64> {
    if hex.len() != 16 {
        return Err(Error::InvalidDataset(format!("bad checksum field for `{location}`")));
    }
    u64::from_str_radix(hex, 16).map_err(|_| Error::InvalidDataset(format!("bad checksum field for `{location}`")))
}

/// One measured (or synthesized) location: frames x subcarriers x antennas.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationRecord {
    pub location_id: String,
    /// `None` for the calibration node.
    pub cluster_id: Option<String>,
    frames: usize,
    n_subcarriers: usize,
    antennas: usize,
    samples: Vec<Complex32>,
    pub snr_db: Vec<f64>,
}

impl LocationRecord {
    pub fn new(
        location_id: impl Into<String>,
        cluster_id: Option<String>,
        frames: usize,
        n_subcarriers: usize,
        antennas: usize,
        samples: Vec<Complex32>,
        snr_db: Vec<f64>,
    ) -> Result<Self> {
        let location_id = location_id.into();
        if frames == 0 || n_subcarriers == 0 || antennas == 0 {
            return Err(Error::InvalidDataset(format!(
                "location `{location_id}` has an empty tensor dimension"
            )));
        }
        let expected = frames * n_subcarriers * antennas;
        if samples.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: samples.len(),
                context: "location tensor size",
            });
        }
        if snr_db.len() != antennas {
            return Err(Error::DimensionMismatch {
                expected: antennas,
                actual: snr_db.len(),
                context: "per-antenna SNR list",
            });
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidDataset(format!(
                "location `{location_id}` has non-finite samples"
            )));
        }
        Ok(Self {
            location_id,
            cluster_id,
            frames,
            n_subcarriers,
            antennas,
            samples,
            snr_db,
        })
    }

    /// Builds a record from per-(frame, subcarrier) channel vectors, rounding
    /// to single precision.
    pub fn from_channels(
        location_id: impl Into<String>,
        cluster_id: Option<String>,
        channels: &[Vec<ChannelVector>],
        snr_db: Vec<f64>,
    ) -> Result<Self> {
        let frames = channels.len();
        let n_sc = channels.first().map_or(0, Vec::len);
        let antennas = channels.first().and_then(|f| f.first()).map_or(0, ChannelVector::len);
        let mut samples = Vec::with_capacity(frames * n_sc * antennas);
        for frame in channels {
            if frame.len() != n_sc {
                return Err(Error::DimensionMismatch {
                    expected: n_sc,
                    actual: frame.len(),
                    context: "subcarriers per frame",
                });
            }
            for h in frame {
                if h.len() != antennas {
                    return Err(Error::DimensionMismatch {
                        expected: antennas,
                        actual: h.len(),
                        context: "antennas per channel",
                    });
                }
                samples.extend(h.iter().map(|z| Complex32::new(z.re as f32, z.im as f32)));
            }
        }
        Self::new(location_id, cluster_id, frames, n_sc, antennas, samples, snr_db)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_subcarriers
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn samples(&self) -> &[Complex32] {
        &self.samples
    }

    /// Every antenna at or above `threshold_db`.
    pub fn meets_snr(&self, threshold_db: f64) -> bool {
        self.snr_db.iter().all(|&s| s >= threshold_db)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.samples.len() * 8);
        for z in &self.samples {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }
}

/// The length-M channel at `(frame, subcarrier)`.
pub fn select_channel(record: &LocationRecord, frame: usize, subcarrier: usize) -> Result<ChannelVector> {
    if frame >= record.frames {
        return Err(Error::OutOfRange {
            index: frame,
            len: record.frames,
            context: "frame",
        });
    }
    if subcarrier >= record.n_subcarriers {
        return Err(Error::OutOfRange {
            index: subcarrier,
            len: record.n_subcarriers,
            context: "subcarrier",
        });
    }
    let start = (frame * record.n_subcarriers + subcarrier) * record.antennas;
    let v = record.samples[start..start + record.antennas]
        .iter()
        .map(|z| Complex64::new(f64::from(z.re), f64::from(z.im)))
        .collect();
    Ok(ChannelVector::from_vec_unchecked(v))
}

fn blob_path(dir: &Path, location_id: &str) -> PathBuf {
    dir.join(format!("{location_id}.{BLOB_EXTENSION}"))
}

/// Writes manifest and blobs under `dir`, filling in `manifest.locations`.
/// Returns the manifest as written.
pub fn write_dataset(
    dir: impl AsRef<Path>,
    manifest: &DatasetManifest,
    records: &[LocationRecord],
) -> Result<DatasetManifest> {
    let dir = dir.as_ref();
    if records.is_empty() {
        return Err(Error::InvalidDataset("no location records".into()));
    }
    manifest.validate_header()?;
    let m = manifest.antennas();
    let mut cluster_of: BTreeMap<&str, &str> = BTreeMap::new();
    for c in &manifest.clusters {
        for id in &c.location_ids {
            cluster_of.insert(id, &c.cluster_id);
        }
    }

    let mut out = manifest.clone();
    out.locations.clear();
    let mut blobs = Vec::with_capacity(records.len());
    for r in records {
        check_location_id(&r.location_id)?;
        if r.antennas != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                actual: r.antennas,
                context: "record antennas vs manifest geometry",
            });
        }
        if r.n_subcarriers != manifest.n_subcarriers {
            return Err(Error::DimensionMismatch {
                expected: manifest.n_subcarriers,
                actual: r.n_subcarriers,
                context: "record subcarriers vs manifest",
            });
        }
        let listed = cluster_of.get(r.location_id.as_str()).copied();
        if listed != r.cluster_id.as_deref() {
            return Err(Error::InvalidDataset(format!(
                "record `{}` claims cluster {:?} but the manifest lists {:?}",
                r.location_id, r.cluster_id, listed
            )));
        }
        let bytes = r.to_bytes();
        out.locations.push(LocationEntry {
            location_id: r.location_id.clone(),
            cluster_id: r.cluster_id.clone(),
            frames: r.frames,
            snr_db: r.snr_db.clone(),
            checksum: format!("{:016x}", checksum(&bytes)),
        });
        blobs.push((r.location_id.as_str(), bytes));
    }
    out.validate_locations()?;

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (id, bytes) in blobs {
        let p = blob_path(dir, id);
        fs::write(&p, bytes).map_err(|e| Error::io(&p, e))?;
    }
    let text = toml::to_string(&out).map_err(|e| Error::Manifest(e.to_string()))?;
    let p = dir.join(MANIFEST_FILE);
    fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
    Ok(out)
}

/// Parses manifest text, checking the schema version before the layout.
pub fn parse_manifest(text: &str) -> Result<DatasetManifest> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Manifest(e.to_string()))?;
    let version = table
        .get("schema_version")
        .and_then(toml::Value::as_integer)
        .ok_or_else(|| Error::Manifest("missing integer `schema_version`".into()))?;
    if version != i64::from(SCHEMA_VERSION) {
        return Err(Error::UnsupportedVersion {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            supported: SCHEMA_VERSION,
        });
    }
    let manifest: DatasetManifest = toml::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
    manifest.validate_header()?;
    manifest.validate_locations()?;
    Ok(manifest)
}

/// Read-only handle; location tensors are loaded one at a time on request.
#[derive(Debug)]
pub struct DatasetReader {
    root: PathBuf,
    manifest: DatasetManifest,
    loads: AtomicUsize,
    bytes_read: AtomicU64,
}

/// Opens and validates a dataset directory.
pub fn read_dataset(dir: impl AsRef<Path>) -> Result<DatasetReader> {
    DatasetReader::open(dir)
}

impl DatasetReader {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let root = dir.as_ref().to_path_buf();
        let p = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        let manifest = parse_manifest(&text)?;
        Ok(Self {
            root,
            manifest,
            loads: AtomicUsize::new(0),
            bytes_read: AtomicU64::new(0),
        })
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Number of blobs loaded so far.
    pub fn loads(&self) -> usize {
        self.loads.load(Ordering::Relaxed)
    }

    pub fn bytes_read(&self) -> u64 {
        self.bytes_read.load(Ordering::Relaxed)
    }

    pub fn load(&self, location_id: &str) -> Result<LocationRecord> {
        let entry = self
            .manifest
            .location(location_id)
            .ok_or_else(|| Error::UnknownLocation(location_id.to_string()))?;
        let p = blob_path(&self.root, location_id);
        let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
        self.loads.fetch_add(1, Ordering::Relaxed);
        self.bytes_read.fetch_add(bytes.len() as u64, Ordering::Relaxed);

        let expected = parse_checksum(&entry.checksum, location_id)?;
        let actual = checksum(&bytes);
        if actual != expected {
            return Err(Error::Checksum {
                location: location_id.to_string(),
                expected,
                actual,
            });
        }
        let m = self.manifest.antennas();
        let n = entry.frames * self.manifest.n_subcarriers * m;
        if bytes.len() != n * 8 {
            return Err(Error::DimensionMismatch {
                expected: n * 8,
                actual: bytes.len(),
                context: "blob byte length",
            });
        }
        let samples = bytes
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes(c[0..4].try_into().expect("4 bytes"));
                let im = f32::from_le_bytes(c[4..8].try_into().expect("4 bytes"));
                Complex32::new(re, im)
            })
            .collect();
        LocationRecord::new(
            location_id,
            entry.cluster_id.clone(),
            entry.frames,
            self.manifest.n_subcarriers,
            m,
            samples,
            entry.snr_db.clone(),
        )
    }

    pub fn calibration(&self) -> Result<LocationRecord> {
        self.load(&self.manifest.calibration_location_id.clone())
    }

    /// Loads every blob once, checking checksums and shapes.
    pub fn validate_all(&self) -> Result<usize> {
        for l in &self.manifest.locations {
            self.load(&l.location_id)?;
        }
        Ok(self.manifest.locations.len())
    }
}

/// Maps an external release layout onto [`LocationRecord`]s.
pub trait ImportAdapter {
    fn import(&self, source: &Path) -> Result<(DatasetManifest, Vec<LocationRecord>)>;
}

/// Reorders antennas: output antenna `i` takes input antenna `perm[i]`.
/// Used by adapters whose array indexing differs from row-major x-outer.
pub fn remap_antennas(record: &LocationRecord, perm: &[usize]) -> Result<LocationRecord> {
    let m = record.antennas;
    if perm.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            actual: perm.len(),
            context: "antenna permutation length",
        });
    }
    let mut seen = vec![false; m];
    for &p in perm {
        if p >= m || std::mem::replace(&mut seen[p], true) {
            return Err(Error::invalid("antenna map is not a permutation"));
        }
    }
    let samples = record
        .samples
        .chunks_exact(m)
        .flat_map(|row| perm.iter().map(move |&p| row[p]))
        .collect();
    let snr = perm.iter().map(|&p| record.snr_db[p]).collect();
    LocationRecord::new(
        record.location_id.clone(),
        record.cluster_id.clone(),
        record.frames,
        record.n_subcarriers,
        m,
        samples,
        snr,
    )
}
