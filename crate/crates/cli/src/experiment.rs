//! Config-driven experiments, each producing one [`ResultTable`].

use std::path::Path;

use iucorr_core::dataset::{select_channel, DatasetReader};
use iucorr_core::estimation::{
    calibrate, cluster_correlation_stats, music_spectrum, AngleGrid, ClusterStatsOptions, MusicConfig, SpectrumMap,
    SubcarrierSelection,
};
use iucorr_core::geometry::{ArrayGeometry, ChannelVector};
use iucorr_core::synth::{subcarrier_wavelengths, PathEnsembleSpec};
use iucorr_core::theory::{
    correlation_asymptotic, correlation_closed_form, lemma_2d_finite, lemma_2d_limit, SincSeries,
};
use iucorr_core::CorrelationEstimate;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, ExperimentKind, MusicMapConfig};
use crate::error::{CliError, CliResult};
use crate::montecarlo::{band_estimates, pair_estimate, rayleigh_estimate, within_three_se};
use crate::table::{ColumnType, Provenance, ResultTable, Value};

use ColumnType::{Bool, Float, Int, Text};

/// Path spec for `L` keyholes; `L = 1` is the single-path LOS channel.
pub fn keyhole_spec(keyholes: usize, alpha: f64) -> iucorr_core::Result<PathEnsembleSpec> {
    if keyholes == 1 {
        PathEnsembleSpec::single_path(alpha, alpha)
    } else {
        PathEnsembleSpec::keyhole(keyholes, (alpha, alpha))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub antennas: usize,
    pub spacing: f64,
    pub alpha: f64,
    pub keyholes: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct GridResult {
    pub point: GridPoint,
    pub geometry: ArrayGeometry,
    pub empirical: CorrelationEstimate,
    pub closed_form: CorrelationEstimate,
    pub asymptotic: CorrelationEstimate,
    pub rayleigh: Option<CorrelationEstimate>,
}

impl GridResult {
    pub fn within_three_se(&self) -> bool {
        within_three_se(&self.empirical, self.closed_form.variance)
    }
}

fn grid_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let mut out = Vec::new();
    for &keyholes in &cfg.channel.keyholes {
        for &antennas in &cfg.array.antennas {
            match cfg.kind {
                ExperimentKind::SpacingOffset => {
                    for [spacing, alpha] in cfg.offsets.as_deref().unwrap_or_default() {
                        out.push(GridPoint {
                            antennas,
                            spacing: *spacing,
                            alpha: *alpha,
                            keyholes,
                        });
                    }
                }
                _ => {
                    for &alpha in &cfg.channel.alphas {
                        out.push(GridPoint {
                            antennas,
                            spacing: cfg.array.spacing_for(antennas),
                            alpha,
                            keyholes,
                        });
                    }
                }
            }
        }
    }
    out
}

/// Monte Carlo plus both theory values at every grid point. Point `i` uses
/// RNG point id `i`, so results do not depend on scheduling.
pub fn run_grid(cfg: &ExperimentConfig) -> CliResult<Vec<GridResult>> {
    let n = cfg.samples();
    let with_rayleigh = cfg.kind == ExperimentKind::MSweep;
    let points = grid_points(cfg);
    points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let geom = cfg.array.layout.geometry(p.antennas, p.spacing)?;
            let spec = keyhole_spec(p.keyholes, p.alpha)?;
            let empirical = pair_estimate(&spec, &geom, 1.0, n, cfg.seed, i as u32)?;
            let rayleigh = if with_rayleigh {
                let id = (points.len() + i) as u32;
                Some(rayleigh_estimate(p.antennas, cfg.rayleigh_samples(), cfg.seed, id)?)
            } else {
                None
            };
            Ok(GridResult {
                point: *p,
                geometry: geom,
                empirical,
                closed_form: correlation_closed_form(&spec, &geom, 1.0)?,
                asymptotic: correlation_asymptotic(&spec, &geom, 1.0)?,
                rayleigh,
            })
        })
        .collect()
}

fn grid_table(cfg: &ExperimentConfig, prov: Provenance, mut results: Vec<GridResult>) -> CliResult<ResultTable> {
    let key = |r: &GridResult| {
        let p = r.point;
        match cfg.kind {
            ExperimentKind::MSweep => (p.keyholes, p.alpha.to_bits(), p.antennas, p.spacing.to_bits()),
            ExperimentKind::SpacingOffset => (
                p.keyholes,
                p.antennas as u64,
                p.spacing.to_bits() as usize,
                p.alpha.to_bits(),
            ),
            _ => (
                p.keyholes,
                p.antennas as u64,
                p.alpha.to_bits() as usize,
                p.spacing.to_bits(),
            ),
        }
    };
    results.sort_by_key(key);
    let mut cols = vec![
        ("layout", Text),
        ("m_x", Int),
        ("m_y", Int),
        ("antennas", Int),
        ("spacing", Float),
        ("alpha", Float),
        ("keyholes", Int),
        ("samples", Int),
        ("empirical_variance", Float),
        ("empirical_variance_se", Float),
        ("empirical_correlation", Float),
        ("empirical_correlation_se", Float),
        ("closed_form_variance", Float),
        ("closed_form_correlation", Float),
        ("asymptotic_variance", Float),
        ("asymptotic_correlation", Float),
        ("within_3se", Bool),
        ("rayleigh_correlation", Float),
    ];
    if cfg.kind == ExperimentKind::MSweep {
        cols.extend([
            ("rayleigh_samples", Int),
            ("rayleigh_empirical_correlation", Float),
            ("rayleigh_empirical_correlation_se", Float),
        ]);
    }
    let mut t = ResultTable::new(&cols, prov);
    for r in &results {
        let p = r.point;
        let e = &r.empirical;
        let mut row: Vec<Value> = vec![
            cfg.array.layout.as_str().into(),
            r.geometry.m_x().into(),
            r.geometry.m_y().into(),
            p.antennas.into(),
            p.spacing.into(),
            p.alpha.into(),
            p.keyholes.into(),
            e.samples.unwrap_or(0).into(),
            e.variance.into(),
            e.std_error.unwrap_or(f64::NAN).into(),
            e.correlation.into(),
            e.correlation_std_error().unwrap_or(f64::NAN).into(),
            r.closed_form.variance.into(),
            r.closed_form.correlation.into(),
            r.asymptotic.variance.into(),
            r.asymptotic.correlation.into(),
            r.within_three_se().into(),
            (1.0 / (p.antennas as f64).sqrt()).into(),
        ];
        if let Some(ray) = &r.rayleigh {
            row.extend([
                ray.samples.unwrap_or(0).into(),
                ray.correlation.into(),
                ray.correlation_std_error().unwrap_or(f64::NAN).into(),
            ]);
        }
        t.push(row)?;
    }
    let pass = results.iter().filter(|r| r.within_three_se()).count();
    t.provenance.note("kind", cfg.kind.as_str());
    t.provenance.note("within_3se", format!("{pass}/{}", results.len()));
    Ok(t)
}

/// Per-curve results of a band sweep.
#[derive(Debug, Clone)]
pub struct BandCurve {
    pub antennas: usize,
    pub alpha: f64,
    pub keyholes: usize,
    pub empirical: Vec<CorrelationEstimate>,
    pub closed_form: Vec<CorrelationEstimate>,
    pub asymptotic: Vec<CorrelationEstimate>,
}

impl BandCurve {
    /// Population std of the empirical correlation across subcarriers.
    pub fn correlation_std(&self) -> f64 {
        let xs: Vec<f64> = self.empirical.iter().map(|e| e.correlation).collect();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    /// First over last subcarrier (longest over shortest wavelength).
    pub fn asymptotic_edge_ratio(&self) -> f64 {
        self.asymptotic[0].variance / self.asymptotic[self.asymptotic.len() - 1].variance
    }

    pub fn closed_form_edge_ratio(&self) -> f64 {
        self.closed_form[0].variance / self.closed_form[self.closed_form.len() - 1].variance
    }
}

pub fn run_band(cfg: &ExperimentConfig) -> CliResult<(Vec<f64>, Vec<f64>, Vec<BandCurve>)> {
    let band = cfg.band.ok_or_else(|| CliError::invalid("missing [band]"))?;
    let plan = band.plan()?;
    let freqs = plan.frequencies();
    let lambdas = subcarrier_wavelengths(&plan)?;
    let spacing = cfg
        .array
        .spacing_m
        .ok_or_else(|| CliError::invalid("missing array.spacing_m"))?;
    let mut curves = Vec::new();
    for &keyholes in &cfg.channel.keyholes {
        for &antennas in &cfg.array.antennas {
            for &alpha in &cfg.channel.alphas {
                curves.push((antennas, alpha, keyholes));
            }
        }
    }
    let out = curves
        .par_iter()
        .enumerate()
        .map(|(i, &(antennas, alpha, keyholes))| {
            let geom = cfg.array.layout.geometry(antennas, spacing)?;
            let spec = keyhole_spec(keyholes, alpha)?;
            let empirical = band_estimates(&spec, &geom, &lambdas, cfg.samples(), cfg.seed, i as u32)?;
            let closed_form = lambdas
                .iter()
                .map(|&l| correlation_closed_form(&spec, &geom, l))
                .collect::<iucorr_core::Result<_>>()?;
            let asymptotic = lambdas
                .iter()
                .map(|&l| correlation_asymptotic(&spec, &geom, l))
                .collect::<iucorr_core::Result<_>>()?;
            Ok(BandCurve {
                antennas,
                alpha,
                keyholes,
                empirical,
                closed_form,
                asymptotic,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok((freqs, lambdas, out))
}

fn band_table(cfg: &ExperimentConfig, mut prov: Provenance) -> CliResult<ResultTable> {
    let (freqs, lambdas, curves) = run_band(cfg)?;
    prov.note("kind", cfg.kind.as_str());
    let wl_ratio = lambdas[0] / lambdas[lambdas.len() - 1];
    prov.note("wavelength_ratio", format!("{wl_ratio:.10}"));
    prov.note("wavelength_ratio_squared", format!("{:.10}", wl_ratio * wl_ratio));
    let mut t = ResultTable::new(
        &[
            ("antennas", Int),
            ("alpha", Float),
            ("keyholes", Int),
            ("subcarrier", Int),
            ("frequency_hz", Float),
            ("wavelength_m", Float),
            ("samples", Int),
            ("empirical_variance", Float),
            ("empirical_variance_se", Float),
            ("empirical_correlation", Float),
            ("empirical_correlation_se", Float),
            ("closed_form_variance", Float),
            ("closed_form_correlation", Float),
            ("asymptotic_variance", Float),
            ("asymptotic_correlation", Float),
            ("within_3se", Bool),
        ],
        prov,
    );
    for c in &curves {
        let tag = format!("M={} alpha={} L={}", c.antennas, c.alpha, c.keyholes);
        t.provenance.note(
            format!("correlation_std[{tag}]"),
            format!("{:.6e}", c.correlation_std()),
        );
        t.provenance.note(
            format!("asymptotic_edge_ratio[{tag}]"),
            format!("{:.10}", c.asymptotic_edge_ratio()),
        );
        t.provenance.note(
            format!("closed_form_edge_ratio[{tag}]"),
            format!("{:.10}", c.closed_form_edge_ratio()),
        );
        for s in 0..freqs.len() {
            let e = &c.empirical[s];
            t.push(vec![
                c.antennas.into(),
                c.alpha.into(),
                c.keyholes.into(),
                s.into(),
                freqs[s].into(),
                lambdas[s].into(),
                e.samples.unwrap_or(0).into(),
                e.variance.into(),
                e.std_error.unwrap_or(f64::NAN).into(),
                e.correlation.into(),
                e.correlation_std_error().unwrap_or(f64::NAN).into(),
                c.closed_form[s].variance.into(),
                c.closed_form[s].correlation.into(),
                c.asymptotic[s].variance.into(),
                c.asymptotic[s].correlation.into(),
                within_three_se(e, c.closed_form[s].variance).into(),
            ])?;
        }
    }
    Ok(t)
}

fn cluster_table(cfg: &ExperimentConfig, mut prov: Provenance) -> CliResult<ResultTable> {
    let ds = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| CliError::invalid("missing [dataset]"))?;
    let reader = DatasetReader::open(&ds.path)?;
    prov.note("kind", cfg.kind.as_str());
    let mut t = ResultTable::new(
        &[
            ("antennas", Int),
            ("cluster_i", Text),
            ("cluster_j", Text),
            ("label_i", Text),
            ("label_j", Text),
            ("mean", Float),
            ("std", Float),
            ("n_pairs", Int),
        ],
        prov,
    );
    for &m in &cfg.array.antennas {
        let opts = ClusterStatsOptions {
            m,
            subcarriers: match &ds.subcarriers {
                Some(v) => SubcarrierSelection::Indices(v.clone()),
                None => SubcarrierSelection::All,
            },
            min_snr_db: ds.min_snr_db,
            frame: ds.frame,
        };
        let s = cluster_correlation_stats(&reader, &opts)?;
        for i in 0..s.len() {
            for j in 0..s.len() {
                t.push(vec![
                    m.into(),
                    s.cluster_ids[i].clone().into(),
                    s.cluster_ids[j].clone().into(),
                    s.labels[i].as_str().into(),
                    s.labels[j].as_str().into(),
                    s.mean[i][j].into(),
                    s.std[i][j].into(),
                    s.n_pairs[i][j].into(),
                ])?;
            }
        }
    }
    Ok(t)
}

fn lemma_table(cfg: &ExperimentConfig, mut prov: Provenance) -> CliResult<ResultTable> {
    let l = cfg.lemma.clone().unwrap_or_default();
    prov.note("kind", cfg.kind.as_str());
    let mut t = ResultTable::new(
        &[
            ("series", Text),
            ("gamma", Float),
            ("n", Int),
            ("value", Float),
            ("limit", Float),
            ("abs_error", Float),
            ("rel_error", Float),
        ],
        prov,
    );
    let mut rows = Vec::new();
    for &g in &l.gammas {
        let s = SincSeries::new(g)?;
        let limit = s.closed_form();
        for &n in &l.cesaro_terms {
            rows.push(("cesaro", g, n, s.cesaro_mean(n), limit));
        }
        for &n in &l.cesaro_terms {
            rows.push(("partial", g, n, s.partial_sum(n), limit));
        }
        let limit2 = lemma_2d_limit(g)?;
        for &m in &l.sizes {
            rows.push(("double", g, m, lemma_2d_finite(g, m)?, limit2));
        }
    }
    for (series, g, n, v, lim) in rows {
        t.push(vec![
            series.into(),
            g.into(),
            n.into(),
            v.into(),
            lim.into(),
            (v - lim).abs().into(),
            ((v - lim).abs() / lim).into(),
        ])?;
    }
    Ok(t)
}

/// Calibrated snapshots (every subcarrier of one frame) of a location.
pub fn location_snapshots(reader: &DatasetReader, location: &str, frame: usize) -> CliResult<Vec<ChannelVector>> {
    let rec = reader.load(location)?;
    let cal = reader.calibration()?;
    (0..rec.n_subcarriers())
        .map(|s| {
            let raw = select_channel(&rec, frame, s)?;
            let c = select_channel(&cal, frame.min(cal.frames() - 1), s)?;
            Ok(calibrate(&raw, &c)?)
        })
        .collect()
}

pub fn music_for_location(dataset: &Path, m: &MusicMapConfig) -> CliResult<SpectrumMap> {
    let reader = DatasetReader::open(dataset)?;
    let geom = reader.manifest().geometry()?;
    let lambda = reader.manifest().plan()?.center_wavelength();
    let snaps = location_snapshots(&reader, &m.location, m.frame)?;
    let cfg = MusicConfig {
        n_sources: m.n_sources,
        forward_backward: m.forward_backward,
        smoothing: (m.smoothing[0], m.smoothing[1]),
    };
    let grid = AngleGrid::degrees(m.step_deg)?;
    Ok(music_spectrum(&snaps, &geom, lambda, &cfg, &grid)?)
}

pub fn spectrum_table(map: &SpectrumMap, mut prov: Provenance) -> CliResult<ResultTable> {
    let (ix, iy) = map.peak();
    let (sx, sy) = (map.grid.s_x()[ix], map.grid.s_y()[iy]);
    prov.note("peak_s_x", sx);
    prov.note("peak_s_y", sy);
    prov.note("peak_theta_x_deg", format!("{:.3}", sx.asin().to_degrees()));
    prov.note("peak_theta_y_deg", format!("{:.3}", sy.asin().to_degrees()));
    let mut t = ResultTable::new(
        &[
            ("s_x", Float),
            ("s_y", Float),
            ("theta_x_deg", Float),
            ("theta_y_deg", Float),
            ("power", Float),
            ("power_db", Float),
        ],
        prov,
    );
    let db = map.log_power_db();
    let ny = map.grid.s_y().len();
    for (i, &sx) in map.grid.s_x().iter().enumerate() {
        for (j, &sy) in map.grid.s_y().iter().enumerate() {
            let k = i * ny + j;
            t.push(vec![
                sx.into(),
                sy.into(),
                sx.asin().to_degrees().into(),
                sy.asin().to_degrees().into(),
                map.power[k].into(),
                db[k].into(),
            ])?;
        }
    }
    Ok(t)
}

pub fn run_experiment(cfg: &ExperimentConfig, config_text: &str) -> CliResult<ResultTable> {
    cfg.validate()?;
    let prov = Provenance::new(config_text, cfg.seed);
    match cfg.kind {
        ExperimentKind::AlphaSweep | ExperimentKind::MSweep | ExperimentKind::SpacingOffset => {
            let r = run_grid(cfg)?;
            grid_table(cfg, prov, r)
        }
        ExperimentKind::SubcarrierVariation => band_table(cfg, prov),
        ExperimentKind::ClusterStats => cluster_table(cfg, prov),
        ExperimentKind::LemmaReport => lemma_table(cfg, prov),
        ExperimentKind::MusicMap => {
            let ds = cfg
                .dataset
                .as_ref()
                .ok_or_else(|| CliError::invalid("missing [dataset]"))?;
            let m = cfg.music.as_ref().ok_or_else(|| CliError::invalid("missing [music]"))?;
            let map = music_for_location(&ds.path, m)?;
            let mut prov = prov;
            prov.note("kind", cfg.kind.as_str());
            prov.note("location", &m.location);
            spectrum_table(&map, prov)
        }
    }
}
