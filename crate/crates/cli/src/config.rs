//! Experiment configuration files (TOML, unknown keys rejected).

use std::path::{Path, PathBuf};

use iucorr_core::geometry::{perfect_square_root, ArrayGeometry};
use iucorr_core::synth::SubcarrierPlan;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SWEEP_SAMPLES: usize = 20_000;
pub const DEFAULT_RAYLEIGH_SAMPLES: usize = 1_000;
pub const DEFAULT_SUBCARRIER_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    AlphaSweep,
    MSweep,
    SpacingOffset,
    SubcarrierVariation,
    ClusterStats,
    LemmaReport,
    MusicMap,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::AlphaSweep => "alpha_sweep",
            Self::MSweep => "m_sweep",
            Self::SpacingOffset => "spacing_offset",
            Self::SubcarrierVariation => "subcarrier_variation",
            Self::ClusterStats => "cluster_stats",
            Self::LemmaReport => "lemma_report",
            Self::MusicMap => "music_map",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    #[default]
    Upa,
    Ula,
}

impl Layout {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Upa => "upa",
            Self::Ula => "ula",
        }
    }

    /// Square UPA or ULA with `antennas` elements and uniform spacing.
    pub fn geometry(&self, antennas: usize, spacing: f64) -> CliResult<ArrayGeometry> {
        Ok(match self {
            Self::Upa => {
                let side = perfect_square_root(antennas)
                    .ok_or_else(|| CliError::invalid(format!("UPA needs a square antenna count, got {antennas}")))?;
                ArrayGeometry::square(side, spacing)?
            }
            Self::Ula => ArrayGeometry::ula(antennas, spacing)?,
        })
    }

    /// Elements along x, the axis that carries the aperture.
    pub fn side(&self, antennas: usize) -> usize {
        match self {
            Self::Upa => perfect_square_root(antennas).unwrap_or(antennas),
            Self::Ula => antennas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ArrayConfig {
    pub layout: Layout,
    pub antennas: Vec<usize>,
    /// Spacing in wavelengths.
    pub spacing: f64,
    /// Physical spacing in meters, for runs over a subcarrier plan.
    pub spacing_m: Option<f64>,
    /// Holds `spacing · side` fixed across the antenna sweep when set.
    pub aperture: Option<f64>,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            layout: Layout::Upa,
            antennas: vec![64],
            spacing: 0.5,
            spacing_m: None,
            aperture: None,
        }
    }
}

impl ArrayConfig {
    pub fn spacing_for(&self, antennas: usize) -> f64 {
        match self.aperture {
            Some(a) => a / self.layout.side(antennas) as f64,
            None => self.spacing,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    /// Keyhole counts; 1 is the single-path LOS channel.
    pub keyholes: Vec<usize>,
    pub alphas: Vec<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            keyholes: vec![1],
            alphas: vec![0.05, 0.1, 0.2, 0.6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub center_frequency_hz: f64,
    pub bandwidth_hz: f64,
    pub n_subcarriers: usize,
}

impl BandConfig {
    pub fn plan(&self) -> CliResult<SubcarrierPlan> {
        Ok(SubcarrierPlan::new(
            self.center_frequency_hz,
            self.bandwidth_hz,
            self.n_subcarriers,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetConfig {
    pub path: PathBuf,
    pub min_snr_db: Option<f64>,
    pub subcarriers: Option<Vec<usize>>,
    #[serde(default)]
    pub frame: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LemmaConfig {
    pub gammas: Vec<f64>,
    /// Series lengths for the averaged partial sums.
    pub cesaro_terms: Vec<usize>,
    /// Array sizes for the two-dimensional sum.
    pub sizes: Vec<usize>,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        use std::f64::consts::{FRAC_PI_2, PI};
        Self {
            gammas: vec![0.5, 1.0, FRAC_PI_2, PI],
            cesaro_terms: vec![100, 10_000, 1_000_000],
            sizes: vec![100, 1_000, 10_000],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MusicMapConfig {
    pub location: String,
    #[serde(default = "default_step")]
    pub step_deg: f64,
    pub n_sources: Option<usize>,
    #[serde(default = "yes")]
    pub forward_backward: bool,
    #[serde(default = "default_smoothing")]
    pub smoothing: [usize; 2],
    #[serde(default)]
    pub frame: usize,
}

fn default_step() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_smoothing() -> [usize; 2] {
    [1, 1]
}

fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub samples: Option<usize>,
    pub rayleigh_samples: Option<usize>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub array: ArrayConfig,
    #[serde(default)]
    pub channel: ChannelConfig,
    pub band: Option<BandConfig>,
    /// `(spacing in wavelengths, alpha)` pairs.
    pub offsets: Option<Vec<[f64; 2]>>,
    pub dataset: Option<DatasetConfig>,
    pub lemma: Option<LemmaConfig>,
    pub music: Option<MusicMapConfig>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Ok((Self::parse(&text)?, text))
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(match self.kind {
            ExperimentKind::SubcarrierVariation => DEFAULT_SUBCARRIER_SAMPLES,
            _ => DEFAULT_SWEEP_SAMPLES,
        })
    }

    pub fn rayleigh_samples(&self) -> usize {
        self.rayleigh_samples.unwrap_or(DEFAULT_RAYLEIGH_SAMPLES)
    }

    pub fn validate(&self) -> CliResult<()> {
        use ExperimentKind::*;
        let bad = |m: String| Err(CliError::invalid(m));
        let empirical = matches!(self.kind, AlphaSweep | MSweep | SpacingOffset | SubcarrierVariation);
        if empirical && self.samples() < 2 {
            return bad(format!("samples must be at least 2, got {}", self.samples()));
        }
        if self.kind == MSweep && self.rayleigh_samples() < 2 {
            return bad("rayleigh_samples must be at least 2".into());
        }
        if matches!(
            self.kind,
            AlphaSweep | MSweep | SpacingOffset | SubcarrierVariation | ClusterStats
        ) {
            if self.array.antennas.is_empty() {
                return bad("array.antennas must not be empty".into());
            }
            if self.array.antennas.contains(&0) {
                return bad("array.antennas entries must be positive".into());
            }
        }
        if matches!(self.kind, AlphaSweep | MSweep | SpacingOffset | SubcarrierVariation) {
            if self.channel.keyholes.is_empty() || self.channel.keyholes.contains(&0) {
                return bad("channel.keyholes must be a non-empty list of positive counts".into());
            }
            for &m in &self.array.antennas {
                self.array.layout.geometry(m, 0.5)?;
            }
            if let Some(a) = self.array.aperture {
                if !(a.is_finite() && a > 0.0) {
                    return bad(format!("array.aperture must be positive, got {a}"));
                }
            } else if !(self.array.spacing.is_finite() && self.array.spacing > 0.0) {
                return bad(format!("array.spacing must be positive, got {}", self.array.spacing));
            }
        }
        let check_alpha = |a: f64| -> CliResult<()> {
            if (0.0..=1.0).contains(&a) {
                Ok(())
            } else {
                Err(CliError::invalid(format!("alpha {a} outside [0, 1]")))
            }
        };
        match self.kind {
            AlphaSweep | MSweep | SubcarrierVariation => {
                if self.channel.alphas.is_empty() {
                    return bad("channel.alphas must not be empty".into());
                }
                self.channel.alphas.iter().try_for_each(|&a| check_alpha(a))?;
            }
            SpacingOffset => {
                let offsets = self.offsets.as_deref().unwrap_or_default();
                if offsets.is_empty() {
                    return bad("spacing_offset needs a non-empty offsets list".into());
                }
                for [d, a] in offsets {
                    if !(d.is_finite() && *d > 0.0) {
                        return bad(format!("offset spacing {d} must be positive"));
                    }
                    check_alpha(*a)?;
                }
            }
            _ => {}
        }
        match self.kind {
            SubcarrierVariation => {
                let band = self
                    .band
                    .ok_or_else(|| CliError::invalid("subcarrier_variation needs a [band] table"))?;
                band.plan()?;
                match self.array.spacing_m {
                    Some(d) if d.is_finite() && d > 0.0 => {}
                    _ => return bad("subcarrier_variation needs a positive array.spacing_m".into()),
                }
            }
            ClusterStats => {
                if self.dataset.is_none() {
                    return bad("cluster_stats needs a [dataset] table with a path".into());
                }
                for &m in &self.array.antennas {
                    if perfect_square_root(m).is_none() {
                        return bad(format!("sub-array size {m} is not a perfect square"));
                    }
                }
            }
            MusicMap => {
                if self.dataset.is_none() {
                    return bad("music_map needs a [dataset] table with a path".into());
                }
                let m = self
                    .music
                    .as_ref()
                    .ok_or_else(|| CliError::invalid("music_map needs a [music] table"))?;
                if !(m.step_deg > 0.0 && m.step_deg <= 90.0) {
                    return bad(format!("music.step_deg {} outside (0, 90]", m.step_deg));
                }
            }
            LemmaReport => {
                let l = self.lemma.clone().unwrap_or_default();
                if l.gammas.is_empty() || l.cesaro_terms.is_empty() || l.sizes.is_empty() {
                    return bad("lemma lists must not be empty".into());
                }
                if let Some(g) = l.gammas.iter().find(|g| !(**g > 0.0 && **g <= std::f64::consts::PI)) {
                    return bad(format!("gamma {g} outside (0, π]"));
                }
                if l.sizes.contains(&0) {
                    return bad("lemma sizes must be positive".into());
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_sweep() {
        let c = ExperimentConfig::parse("kind = \"alpha_sweep\"").unwrap();
        assert_eq!(c.samples(), 20_000);
        assert_eq!(c.seed, 1);
        assert_eq!(c.channel.alphas, vec![0.05, 0.1, 0.2, 0.6]);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("kind = \"alpha_sweep\"\nsamplez = 3").is_err());
        assert!(ExperimentConfig::parse("kind = \"alpha_sweep\"\n[array]\nspacingg = 0.5").is_err());
        assert!(ExperimentConfig::parse("kind = \"nope\"").is_err());
    }

    #[test]
    fn grid_validation() {
        let c = "kind = \"m_sweep\"\n[array]\nantennas = [15]";
        assert!(ExperimentConfig::parse(c).is_err());
        let c = "kind = \"m_sweep\"\n[array]\nlayout = \"ula\"\nantennas = [15]";
        assert!(ExperimentConfig::parse(c).is_ok());
        assert!(ExperimentConfig::parse("kind = \"alpha_sweep\"\nsamples = 1").is_err());
        assert!(ExperimentConfig::parse("kind = \"alpha_sweep\"\n[channel]\nalphas = []").is_err());
        assert!(ExperimentConfig::parse("kind = \"alpha_sweep\"\n[channel]\nalphas = [1.5]").is_err());
        assert!(ExperimentConfig::parse("kind = \"spacing_offset\"").is_err());
        assert!(ExperimentConfig::parse("kind = \"cluster_stats\"").is_err());
        assert!(ExperimentConfig::parse("kind = \"subcarrier_variation\"").is_err());
    }

    #[test]
    fn aperture_spacing() {
        let c = ExperimentConfig::parse("kind = \"m_sweep\"\n[array]\nantennas = [16, 64]\naperture = 4.0").unwrap();
        assert_eq!(c.array.spacing_for(16), 1.0);
        assert_eq!(c.array.spacing_for(64), 0.5);
    }
}
