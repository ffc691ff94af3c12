//! Run configuration, read from and written to TOML.
//!
//! Missing keys take the defaults below; unknown keys are rejected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flcore::FirstVisitMode;
use crate::learn::ModelKind;
use crate::orbital::{ConstellationSpec, GroundStation};
use crate::strategies::{Strategy, StrategyKind, DEFAULT_FEDASYNC_ALPHA0, DEFAULT_FEDASYNC_POLY_A};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub constellation: ConstellationConfig,
    pub gs: GroundStationConfig,
    pub sim: SimConfig,
    pub fl: FlConfig,
    pub trainer: TrainerSection,
    pub data: DataConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstellationConfig {
    pub planes: usize,
    pub sats_per_plane: usize,
    pub inclination_deg: f64,
    /// One altitude per plane.
    pub altitudes_km: Vec<f64>,
    pub phasing_offset_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GroundStationConfig {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
    pub min_elev_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub duration_s: f64,
    pub coarse_step_s: f64,
    pub refine_tol_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlConfig {
    pub strategy: StrategyKind,
    #[serde(rename = "K")]
    pub buffer_size: usize,
    pub eta_g: f64,
    pub first_visit_mode: FirstVisitMode,
    pub fedasync_alpha0: f64,
    pub fedasync_poly_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerSection {
    pub model: ModelKind,
    #[serde(rename = "E")]
    pub epochs: usize,
    pub batch_size: usize,
    pub eta_l0: f64,
    pub lr_decay: f64,
    pub hidden_width: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataKind {
    Blobs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Iid,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub kind: DataKind,
    pub n_samples: usize,
    pub classes: usize,
    pub dim: usize,
    /// Cluster spread of the blobs generator; larger values overlap the classes.
    pub spread: f64,
    pub partition: PartitionKind,
    pub dirichlet_beta: f64,
    pub test_fraction: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            constellation: ConstellationConfig::default(),
            gs: GroundStationConfig::default(),
            sim: SimConfig::default(),
            fl: FlConfig::default(),
            trainer: TrainerSection::default(),
            data: DataConfig::default(),
        }
    }
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        let mut altitudes_km = vec![500.0; 5];
        altitudes_km.extend([2000.0; 5]);
        Self {
            planes: 10,
            sats_per_plane: 4,
            inclination_deg: 80.0,
            altitudes_km,
            phasing_offset_deg: 0.0,
        }
    }
}

impl Default for GroundStationConfig {
    fn default() -> Self {
        Self {
            lat_deg: 90.0,
            lon_deg: 0.0,
            alt_m: 0.0,
            min_elev_deg: 10.0,
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            duration_s: 86_400.0,
            coarse_step_s: crate::contact::DEFAULT_COARSE_STEP_S,
            refine_tol_s: crate::contact::DEFAULT_REFINE_TOL_S,
        }
    }
}

impl Default for FlConfig {
    fn default() -> Self {
        Self {
            strategy: StrategyKind::FedGsm,
            buffer_size: 5,
            eta_g: 0.1,
            first_visit_mode: FirstVisitMode::Bootstrap,
            fedasync_alpha0: DEFAULT_FEDASYNC_ALPHA0,
            fedasync_poly_a: DEFAULT_FEDASYNC_POLY_A,
        }
    }
}

impl Default for TrainerSection {
    fn default() -> Self {
        Self {
            model: ModelKind::SoftmaxLinear,
            epochs: 5,
            batch_size: 10,
            eta_l0: 0.1,
            lr_decay: 0.998,
            hidden_width: crate::learn::model::DEFAULT_HIDDEN_WIDTH,
        }
    }
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            kind: DataKind::Blobs,
            n_samples: 10_000,
            classes: 10,
            dim: 32,
            spread: 2.0,
            partition: PartitionKind::Iid,
            dirichlet_beta: 0.3,
            test_fraction: 0.2,
        }
    }
}

fn ensure(cond: bool, key: &str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::config(key, reason))
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).map_err(|e| {
            let key = e.span().map(|r| s[r].trim().to_string()).unwrap_or_else(|| "<document>".into());
            Error::config(key, e.message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config always serializes")
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn satellites(&self) -> usize {
        self.constellation.planes * self.constellation.sats_per_plane
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.constellation;
        ensure(c.planes > 0, "constellation.planes", "must be positive")?;
        ensure(c.sats_per_plane > 0, "constellation.sats_per_plane", "must be positive")?;
        ensure(
            c.altitudes_km.len() == c.planes,
            "constellation.altitudes_km",
            format!("expected {} entries, found {}", c.planes, c.altitudes_km.len()),
        )?;
        ensure(
            c.altitudes_km.iter().all(|h| *h > 0.0 && h.is_finite()),
            "constellation.altitudes_km",
            "altitudes must be positive",
        )?;
        ensure(c.inclination_deg.is_finite(), "constellation.inclination_deg", "must be finite")?;
        ensure(c.phasing_offset_deg.is_finite(), "constellation.phasing_offset_deg", "must be finite")?;

        let g = &self.gs;
        ensure((-90.0..=90.0).contains(&g.lat_deg), "gs.lat_deg", "must lie in [-90, 90]")?;
        ensure(g.lon_deg.is_finite(), "gs.lon_deg", "must be finite")?;
        ensure(g.alt_m.is_finite() && g.alt_m >= 0.0, "gs.alt_m", "must be finite and >= 0")?;
        ensure((0.0..90.0).contains(&g.min_elev_deg), "gs.min_elev_deg", "must lie in [0, 90)")?;

        let s = &self.sim;
        ensure(s.duration_s > 0.0 && s.duration_s.is_finite(), "sim.duration_s", "must be positive")?;
        ensure(s.coarse_step_s > 0.0, "sim.coarse_step_s", "must be positive")?;
        ensure(
            s.refine_tol_s > 0.0 && s.refine_tol_s < s.coarse_step_s,
            "sim.refine_tol_s",
            "must be positive and below sim.coarse_step_s",
        )?;

        let f = &self.fl;
        ensure(f.buffer_size >= 1, "fl.K", "must be at least 1")?;
        ensure(
            f.buffer_size <= self.satellites(),
            "fl.K",
            format!("{} exceeds the {} satellites", f.buffer_size, self.satellites()),
        )?;
        ensure(f.eta_g >= 0.0 && f.eta_g.is_finite(), "fl.eta_g", "must be finite and >= 0")?;
        ensure(
            f.fedasync_alpha0 > 0.0 && f.fedasync_alpha0 <= 1.0,
            "fl.fedasync_alpha0",
            "must lie in (0, 1]",
        )?;
        ensure(f.fedasync_poly_a >= 0.0 && f.fedasync_poly_a.is_finite(), "fl.fedasync_poly_a", "must be >= 0")?;

        let t = &self.trainer;
        ensure(t.batch_size >= 1, "trainer.batch_size", "must be at least 1")?;
        ensure(t.eta_l0 > 0.0 && t.eta_l0.is_finite(), "trainer.eta_l0", "must be positive")?;
        ensure(t.lr_decay > 0.0 && t.lr_decay <= 1.0, "trainer.lr_decay", "must lie in (0, 1]")?;
        ensure(
            t.model != ModelKind::Mlp1 || t.hidden_width >= 1,
            "trainer.hidden_width",
            "must be at least 1 for mlp1",
        )?;

        let d = &self.data;
        ensure(d.classes >= 2, "data.classes", "must be at least 2")?;
        ensure(d.dim >= 2, "data.dim", "must be at least 2")?;
        ensure(d.n_samples >= d.classes, "data.n_samples", "must cover every class")?;
        ensure(d.spread >= 0.0 && d.spread.is_finite(), "data.spread", "must be finite and >= 0")?;
        ensure(
            d.test_fraction > 0.0 && d.test_fraction < 1.0,
            "data.test_fraction",
            "must lie in (0, 1)",
        )?;
        ensure(
            d.dirichlet_beta > 0.0 && d.dirichlet_beta.is_finite(),
            "data.dirichlet_beta",
            "must be positive",
        )?;
        let n_train = d.n_samples - (d.n_samples as f64 * d.test_fraction).round() as usize;
        ensure(
            n_train >= self.satellites(),
            "data.n_samples",
            format!("{n_train} training samples cannot cover {} satellites", self.satellites()),
        )?;
        Ok(())
    }

    pub fn constellation_spec(&self) -> ConstellationSpec<f64> {
        let c = &self.constellation;
        ConstellationSpec {
            planes: c.planes,
            sats_per_plane: c.sats_per_plane,
            inclination_rad: c.inclination_deg.to_radians(),
            altitudes_m: c.altitudes_km.iter().map(|h| h * 1000.0).collect(),
            phasing_offset_rad: c.phasing_offset_deg.to_radians(),
        }
    }

    pub fn ground_station(&self) -> Result<GroundStation<f64>> {
        let g = &self.gs;
        GroundStation::new(
            g.lat_deg.to_radians(),
            g.lon_deg.to_radians(),
            g.alt_m,
            g.min_elev_deg.to_radians(),
        )
    }

    pub fn strategy(&self) -> Strategy<f64> {
        Strategy::from_kind(self.fl.strategy, self.fl.fedasync_alpha0, self.fl.fedasync_poly_a)
    }
}
