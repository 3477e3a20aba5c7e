//! Scenario configuration: named presets plus TOML files.
//!
//! A scenario bundles everything a campaign needs — array sizes, channel
//! geometry, OFDM numerology, feedback bit budgets, the precoding variant,
//! and the Monte-Carlo controls. Six presets ship with the crate:
//!
//! * `mmwave` — 28 GHz, 850 MHz bandwidth, 32-antenna BS, 4-antenna UEs;
//! * `sub6`   — 3.5 GHz, 150 MHz bandwidth, richer scattering;
//! * `mode1`..`mode4` — wideband operating points that differ in carrier,
//!   bandwidth, BS array size, and per-ADC power draw (used by the energy
//!   command).
//!
//! A TOML file starts from the preset named by its `band` key and overrides
//! any subset of the remaining fields. Unknown keys are rejected so a typo
//! cannot silently fall back to a default.

use serde::{Deserialize, Serialize};

use crate::channel::ChannelGeometry;
use crate::error::{Error, Result};
use crate::metrics::{Connection, DevicePowers};

/// Frequency band / operating-mode label. Doubles as the preset selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Band {
    Mmwave,
    Sub6,
    Mode1,
    Mode2,
    Mode3,
    Mode4,
}

impl Band {
    pub fn name(self) -> &'static str {
        match self {
            Band::Mmwave => "mmwave",
            Band::Sub6 => "sub6",
            Band::Mode1 => "mode1",
            Band::Mode2 => "mode2",
            Band::Mode3 => "mode3",
            Band::Mode4 => "mode4",
        }
    }

    pub fn from_name(name: &str) -> Option<Band> {
        match name {
            "mmwave" => Some(Band::Mmwave),
            "sub6" => Some(Band::Sub6),
            "mode1" => Some(Band::Mode1),
            "mode2" => Some(Band::Mode2),
            "mode3" => Some(Band::Mode3),
            "mode4" => Some(Band::Mode4),
            _ => None,
        }
    }
}

/// Feedback bit budgets for the three quantized quantities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitBudget {
    /// Bits indexing the BS-side beamsteering codebook (per RF chain).
    pub bs_rf: u32,
    /// Bits indexing the UE-side beamsteering codebook.
    pub ue_rf: u32,
    /// Bits for the baseband stage: RVQ codebook size for quantized direction
    /// feedback, or the digital-codebook budget for the search variants.
    pub bb: u32,
}

/// Which precoder the campaign runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Closed-form baseband precoder from fed-back effective channels.
    #[serde(rename = "v1-mrt")]
    V1Mrt,
    #[serde(rename = "v1-zf")]
    V1Zf,
    #[serde(rename = "v1-mmse")]
    V1Mmse,
    /// Per-subcarrier digital-codebook search maximizing sum rate.
    #[serde(rename = "v2-rate")]
    V2Rate,
    /// Per-subcarrier digital-codebook search maximizing sum SINR.
    #[serde(rename = "v2-sinr")]
    V2Sinr,
    /// Joint search over all beam/digital combinations (tiny setups only).
    #[serde(rename = "exhaustive")]
    Exhaustive,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::V1Mrt => "v1-mrt",
            Variant::V1Zf => "v1-zf",
            Variant::V1Mmse => "v1-mmse",
            Variant::V2Rate => "v2-rate",
            Variant::V2Sinr => "v2-sinr",
            Variant::Exhaustive => "exhaustive",
        }
    }

    pub fn from_name(name: &str) -> Option<Variant> {
        match name {
            "v1-mrt" => Some(Variant::V1Mrt),
            "v1-zf" => Some(Variant::V1Zf),
            "v1-mmse" => Some(Variant::V1Mmse),
            "v2-rate" => Some(Variant::V2Rate),
            "v2-sinr" => Some(Variant::V2Sinr),
            "exhaustive" => Some(Variant::Exhaustive),
            _ => None,
        }
    }
}

/// How the effective-channel directions reach the transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackMode {
    /// RVQ-quantized direction plus scalar gain (the limited-feedback path).
    Quantized,
    /// Unquantized directions; isolates quantization loss in comparisons.
    Perfect,
}

/// Full scenario description. See the module docs for the preset semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Label stamped into result records. Defaults to the band name.
    pub id: String,
    pub band: Band,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// BS antennas.
    pub n_bs: usize,
    /// Antennas per UE.
    pub n_ue: usize,
    /// BS RF chains.
    pub n_rf: usize,
    /// Simultaneously served single-stream users.
    pub n_users: usize,
    /// Scattering clusters per link.
    pub clusters: usize,
    /// Rays per cluster.
    pub rays: usize,
    /// Laplacian angular spread (standard deviation), degrees.
    pub angular_spread_deg: f64,
    /// OFDM subcarriers K.
    pub n_subcarriers: usize,
    /// Cyclic-prefix length in samples; the channel keeps cp_len + 1 taps.
    pub cp_len: usize,
    /// Raised-cosine roll-off in [0, 1].
    pub rolloff: f64,
    pub velocity_kmh: f64,
    /// Antenna spacing over wavelength (0.5 = half-wavelength ULA).
    pub antenna_spacing: f64,
    pub bits: BitBudget,
    pub variant: Variant,
    /// Phase-shifter network topology used by the power model.
    pub connection: Connection,
    pub feedback: FeedbackMode,
    pub snr_db_sweep: Vec<f64>,
    /// Monte-Carlo trials per SNR point.
    pub trials: usize,
    pub master_seed: u64,
    /// Per-ADC power draw in watts (enters the energy command's power model).
    pub adc_w: f64,
}

/// TOML surface: `band` picks the preset, everything else optionally
/// overrides it. `deny_unknown_fields` keeps typos from silently vanishing.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioOverlay {
    band: Band,
    id: Option<String>,
    carrier_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    n_bs: Option<usize>,
    n_ue: Option<usize>,
    n_rf: Option<usize>,
    n_users: Option<usize>,
    clusters: Option<usize>,
    rays: Option<usize>,
    angular_spread_deg: Option<f64>,
    n_subcarriers: Option<usize>,
    cp_len: Option<usize>,
    rolloff: Option<f64>,
    velocity_kmh: Option<f64>,
    antenna_spacing: Option<f64>,
    bits: Option<BitBudget>,
    variant: Option<Variant>,
    connection: Option<Connection>,
    feedback: Option<FeedbackMode>,
    snr_db_sweep: Option<Vec<f64>>,
    trials: Option<usize>,
    master_seed: Option<u64>,
    adc_w: Option<f64>,
}

/// Default SNR sweep: -25 dB to 10 dB in 5 dB steps.
pub fn default_snr_sweep() -> Vec<f64> {
    (0..8).map(|i| -25.0 + 5.0 * i as f64).collect()
}

impl ScenarioConfig {
    /// The named preset. `None` if the name is not one of the six presets.
    pub fn preset(name: &str) -> Option<ScenarioConfig> {
        Band::from_name(name).map(ScenarioConfig::for_band)
    }

    /// Preset backing the given band.
    pub fn for_band(band: Band) -> ScenarioConfig {
        let base = ScenarioConfig {
            id: band.name().to_string(),
            band,
            carrier_hz: 28e9,
            bandwidth_hz: 850e6,
            n_bs: 32,
            n_ue: 4,
            n_rf: 2,
            n_users: 2,
            clusters: 4,
            rays: 10,
            angular_spread_deg: 2.0,
            n_subcarriers: 16,
            cp_len: 4,
            rolloff: 1.0,
            velocity_kmh: 20.0,
            antenna_spacing: 0.5,
            bits: BitBudget { bs_rf: 6, ue_rf: 4, bb: 8 },
            variant: Variant::V1Mmse,
            connection: Connection::Fully,
            feedback: FeedbackMode::Quantized,
            snr_db_sweep: default_snr_sweep(),
            trials: 1000,
            master_seed: 1,
            adc_w: DevicePowers::default().adc,
        };
        match band {
            Band::Mmwave => base,
            Band::Sub6 => ScenarioConfig {
                carrier_hz: 3.5e9,
                bandwidth_hz: 150e6,
                n_bs: 16,
                n_ue: 2,
                clusters: 10,
                rays: 20,
                n_subcarriers: 32,
                cp_len: 8,
                ..base
            },
            // The four wideband operating modes share the mmWave geometry but
            // change carrier, bandwidth, array size, and ADC draw. Eight RF
            // chains so user-count sweeps up to 8 stay valid.
            Band::Mode1 => ScenarioConfig { n_rf: 8, adc_w: 0.25, ..base },
            Band::Mode2 => ScenarioConfig {
                carrier_hz: 39e9,
                bandwidth_hz: 1.4e9,
                n_bs: 64,
                n_rf: 8,
                adc_w: 0.4,
                ..base
            },
            Band::Mode3 => ScenarioConfig {
                carrier_hz: 39e9,
                bandwidth_hz: 1.6e9,
                n_bs: 64,
                n_rf: 8,
                adc_w: 0.45,
                ..base
            },
            Band::Mode4 => ScenarioConfig {
                carrier_hz: 73e9,
                bandwidth_hz: 2e9,
                n_bs: 128,
                n_rf: 8,
                adc_w: 0.55,
                ..base
            },
        }
    }

    /// Parse a TOML scenario: preset selected by `band`, then overridden
    /// field by field. The result is validated before it is returned.
    pub fn from_toml_str(text: &str) -> Result<ScenarioConfig> {
        let overlay: ScenarioOverlay =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let mut cfg = ScenarioConfig::for_band(overlay.band);
        if let Some(v) = overlay.id {
            cfg.id = v;
        }
        if let Some(v) = overlay.carrier_hz {
            cfg.carrier_hz = v;
        }
        if let Some(v) = overlay.bandwidth_hz {
            cfg.bandwidth_hz = v;
        }
        if let Some(v) = overlay.n_bs {
            cfg.n_bs = v;
        }
        if let Some(v) = overlay.n_ue {
            cfg.n_ue = v;
        }
        if let Some(v) = overlay.n_rf {
            cfg.n_rf = v;
        }
        if let Some(v) = overlay.n_users {
            cfg.n_users = v;
        }
        if let Some(v) = overlay.clusters {
            cfg.clusters = v;
        }
        if let Some(v) = overlay.rays {
            cfg.rays = v;
        }
        if let Some(v) = overlay.angular_spread_deg {
            cfg.angular_spread_deg = v;
        }
        if let Some(v) = overlay.n_subcarriers {
            cfg.n_subcarriers = v;
        }
        if let Some(v) = overlay.cp_len {
            cfg.cp_len = v;
        }
        if let Some(v) = overlay.rolloff {
            cfg.rolloff = v;
        }
        if let Some(v) = overlay.velocity_kmh {
            cfg.velocity_kmh = v;
        }
        if let Some(v) = overlay.antenna_spacing {
            cfg.antenna_spacing = v;
        }
        if let Some(v) = overlay.bits {
            cfg.bits = v;
        }
        if let Some(v) = overlay.variant {
            cfg.variant = v;
        }
        if let Some(v) = overlay.connection {
            cfg.connection = v;
        }
        if let Some(v) = overlay.feedback {
            cfg.feedback = v;
        }
        if let Some(v) = overlay.snr_db_sweep {
            cfg.snr_db_sweep = v;
        }
        if let Some(v) = overlay.trials {
            cfg.trials = v;
        }
        if let Some(v) = overlay.master_seed {
            cfg.master_seed = v;
        }
        if let Some(v) = overlay.adc_w {
            cfg.adc_w = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Serialize the fully resolved scenario to TOML. The output parses back
    /// through [`ScenarioConfig::from_toml_str`] to an identical config.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Load a scenario by preset name or TOML file path.
    pub fn load(name_or_path: &str) -> Result<ScenarioConfig> {
        if let Some(preset) = ScenarioConfig::preset(name_or_path) {
            return Ok(preset);
        }
        let text = std::fs::read_to_string(name_or_path).map_err(|e| Error::ConfigFile {
            path: name_or_path.to_string(),
            msg: e.to_string(),
        })?;
        ScenarioConfig::from_toml_str(&text).map_err(|e| Error::ConfigFile {
            path: name_or_path.to_string(),
            msg: e.to_string(),
        })
    }

    /// Check every cross-field invariant, reporting the offending fields.
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: usize) -> Result<()> {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be positive (got 0)")));
            }
            Ok(())
        }
        positive("n_bs", self.n_bs)?;
        positive("n_ue", self.n_ue)?;
        positive("n_rf", self.n_rf)?;
        positive("n_users", self.n_users)?;
        positive("clusters", self.clusters)?;
        positive("rays", self.rays)?;
        positive("n_subcarriers", self.n_subcarriers)?;
        positive("cp_len", self.cp_len)?;
        positive("trials", self.trials)?;
        if self.n_users > self.n_rf {
            return Err(Error::Config(format!(
                "n_users ({}) must not exceed n_rf ({}): each served user needs its own RF chain",
                self.n_users, self.n_rf
            )));
        }
        if self.n_rf > self.n_bs {
            return Err(Error::Config(format!(
                "n_rf ({}) must not exceed n_bs ({})",
                self.n_rf, self.n_bs
            )));
        }
        if self.cp_len >= self.n_subcarriers {
            return Err(Error::Config(format!(
                "cp_len ({}) must be shorter than n_subcarriers ({})",
                self.cp_len, self.n_subcarriers
            )));
        }
        let min_cp = crate::channel::PULSE_HALF_WIDTH as usize;
        if self.cp_len < min_cp {
            return Err(Error::Config(format!(
                "cp_len ({}) must be at least {min_cp}: the channel keeps cp_len + 1 taps and \
                 the shaping pulse spans {min_cp} samples on each side",
                self.cp_len
            )));
        }
        if !(self.carrier_hz > 0.0) {
            return Err(Error::Config(format!(
                "carrier_hz must be positive (got {})",
                self.carrier_hz
            )));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::Config(format!(
                "bandwidth_hz must be positive (got {})",
                self.bandwidth_hz
            )));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::Config(format!(
                "rolloff must lie in [0, 1] (got {})",
                self.rolloff
            )));
        }
        if !(self.velocity_kmh >= 0.0) {
            return Err(Error::Config(format!(
                "velocity_kmh must be non-negative (got {})",
                self.velocity_kmh
            )));
        }
        if !(self.antenna_spacing > 0.0) {
            return Err(Error::Config(format!(
                "antenna_spacing must be positive (got {})",
                self.antenna_spacing
            )));
        }
        if !(self.adc_w > 0.0) {
            return Err(Error::Config(format!(
                "adc_w must be positive (got {})",
                self.adc_w
            )));
        }
        if self.snr_db_sweep.is_empty() {
            return Err(Error::Config("snr_db_sweep must not be empty".into()));
        }
        if self.snr_db_sweep.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("snr_db_sweep entries must be finite".into()));
        }
        for (name, bits) in [
            ("bits.bs_rf", self.bits.bs_rf),
            ("bits.ue_rf", self.bits.ue_rf),
            ("bits.bb", self.bits.bb),
        ] {
            if bits == 0 || bits > crate::codebook::MAX_BITS {
                return Err(Error::Config(format!(
                    "{name} must lie in 1..={} (got {bits})",
                    crate::codebook::MAX_BITS
                )));
            }
        }
        Ok(())
    }

    /// Channel geometry derived from the scenario: one tap per CP sample plus
    /// the main tap, sampled at the configured bandwidth.
    pub fn geometry(&self) -> ChannelGeometry {
        ChannelGeometry {
            n_rx: self.n_ue,
            n_tx: self.n_bs,
            n_clusters: self.clusters,
            rays_per_cluster: self.rays,
            angular_spread_rad: self.angular_spread_deg.to_radians(),
            n_taps: self.cp_len + 1,
            sample_interval_s: 1.0 / self.bandwidth_hz,
            carrier_hz: self.carrier_hz,
            velocity_mps: self.velocity_kmh / 3.6,
            rolloff: self.rolloff,
            antenna_spacing: self.antenna_spacing,
        }
    }

    /// Device powers with this scenario's per-ADC draw.
    pub fn device_powers(&self) -> DevicePowers {
        DevicePowers { adc: self.adc_w, ..DevicePowers::default() }
    }
}
