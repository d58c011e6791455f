//! JSON simulation configuration.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::array::{UlaConfig, USpaceAngle};
use crate::channel::{ChannelState, PathComponent};
use crate::codebook::{build_codebook, Codebook};
use crate::error::{Error, Result};
use crate::mobility::{RoomScenario, TrajectoryKind};
use crate::monopulse::{midpoint_threshold, IndexMode};
use crate::tracker::TrackerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub tx: UlaConfig,
    pub rx: UlaConfig,
    pub channel: ChannelConfig,
    #[serde(default)]
    pub tracker: TrackerSettings,
    #[serde(default)]
    pub quantization_bits: Option<u32>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub trials: usize,
    /// Receive-beam offset applied to the search result before tracking.
    #[serde(default)]
    pub seed_rx_offset: i64,
    #[serde(default)]
    pub montecarlo: MonteCarloSettings,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ChannelConfig {
    /// Fixed path list; tracked for `rounds` sessions.
    Static {
        paths: Vec<PathComponent>,
        #[serde(default)]
        noise_variance: f64,
        #[serde(default = "unit")]
        tx_power: f64,
        #[serde(default = "one")]
        rounds: usize,
        #[serde(default = "default_round_interval")]
        round_interval_s: f64,
    },
    /// Single path following a user trajectory; one tracking session per
    /// trajectory sample.
    Room {
        scenario: RoomScenario,
        trajectory: TrajectoryKind,
        duration_s: f64,
        #[serde(default = "broadside")]
        aod_u: USpaceAngle,
        #[serde(default = "unit_gain", with = "crate::channel::complex_object")]
        gain: Complex64,
        /// Scale amplitude by `r0/r` (power ∝ 1/r²).
        #[serde(default)]
        inverse_square_gain: bool,
        #[serde(default)]
        noise_variance: f64,
        #[serde(default = "unit")]
        tx_power: f64,
    },
}

fn unit() -> f64 {
    1.0
}

fn default_round_interval() -> f64 {
    0.01
}

fn broadside() -> USpaceAngle {
    USpaceAngle::BROADSIDE
}

fn unit_gain() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Convergence threshold: a number, or `"midpoint"` for the comparator value
/// halfway between two grid beams.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Epsilon {
    Value(f64),
    Rule(EpsilonRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    Midpoint,
}

impl Default for Epsilon {
    fn default() -> Self {
        Epsilon::Value(0.05)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrackerSettings {
    pub epsilon: Epsilon,
    /// Defaults to `4·N_rx`.
    pub max_iterations: Option<usize>,
    pub averaging_count: usize,
    pub index_mode: IndexMode,
    pub noise_floor_factor: f64,
    pub min_detectable_power: f64,
}

impl Default for TrackerSettings {
    fn default() -> Self {
        let base = TrackerConfig::for_beams(1);
        Self {
            epsilon: Epsilon::default(),
            max_iterations: None,
            averaging_count: base.averaging_count,
            index_mode: base.index_mode,
            noise_floor_factor: base.noise_floor_factor,
            min_detectable_power: base.min_detectable_power,
        }
    }
}

impl TrackerSettings {
    pub fn resolve(&self, cb_rx: &Codebook) -> Result<TrackerConfig> {
        let epsilon = match self.epsilon {
            Epsilon::Value(v) => v,
            Epsilon::Rule(EpsilonRule::Midpoint) => midpoint_threshold(cb_rx),
        };
        let cfg = TrackerConfig {
            epsilon,
            max_iterations: self.max_iterations.unwrap_or(4 * cb_rx.len()),
            averaging_count: self.averaging_count,
            index_mode: self.index_mode,
            noise_floor_factor: self.noise_floor_factor,
            min_detectable_power: self.min_detectable_power,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloSettings {
    /// Per-lobe SNR levels in dB; empty runs once at the configured noise.
    pub snr_db: Vec<f64>,
    /// Sweep `sweep_bits` instead of using `quantization_bits`.
    pub quantization_sweep: bool,
    /// `null` stands for unquantized phases.
    pub sweep_bits: Vec<Option<u32>>,
    /// Draw a fresh on-grid AoA/AoD per trial; otherwise reuse the
    /// configured static path list.
    pub random_grid_paths: bool,
}

impl Default for MonteCarloSettings {
    fn default() -> Self {
        Self {
            snr_db: Vec::new(),
            quantization_sweep: false,
            sweep_bits: vec![Some(2), Some(3), Some(4), None],
            random_grid_paths: true,
        }
    }
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.tx.validate()?;
        self.rx.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        let (_, cb_rx) = self.codebooks()?;
        self.tracker.resolve(&cb_rx)?;
        match &self.channel {
            ChannelConfig::Static {
                rounds,
                round_interval_s,
                ..
            } => {
                if *rounds == 0 {
                    return Err(Error::Config("rounds must be at least 1".into()));
                }
                if round_interval_s.is_nan() || *round_interval_s < 0.0 {
                    return Err(Error::Config("round_interval_s must be non-negative".into()));
                }
                self.static_channel()?;
            }
            ChannelConfig::Room {
                scenario,
                duration_s,
                noise_variance,
                tx_power,
                ..
            } => {
                scenario.validate()?;
                if !(*duration_s > 0.0 && duration_s.is_finite()) {
                    return Err(Error::Config("duration_s must be positive".into()));
                }
                // Reuse the channel constructor's checks.
                let probe = PathComponent {
                    aoa_u: USpaceAngle::BROADSIDE,
                    aod_u: USpaceAngle::BROADSIDE,
                    gain: unit_gain(),
                };
                ChannelState::new(self.tx, self.rx, vec![probe], *noise_variance, *tx_power)?;
            }
        }
        for bits in self.montecarlo.sweep_bits.iter().flatten() {
            if !(1..=crate::codebook::MAX_QUANTIZATION_BITS).contains(bits) {
                return Err(Error::Config(format!("sweep bit count {bits} out of range")));
            }
        }
        if self.montecarlo.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr_db values must be finite".into()));
        }
        Ok(())
    }

    pub fn codebooks(&self) -> Result<(Codebook, Codebook)> {
        self.codebooks_with_bits(self.quantization_bits)
    }

    pub fn codebooks_with_bits(&self, bits: Option<u32>) -> Result<(Codebook, Codebook)> {
        Ok((build_codebook(&self.tx, bits)?, build_codebook(&self.rx, bits)?))
    }

    /// Channel for a `static` scenario.
    pub fn static_channel(&self) -> Result<ChannelState> {
        match &self.channel {
            ChannelConfig::Static {
                paths,
                noise_variance,
                tx_power,
                ..
            } => ChannelState::new(self.tx, self.rx, paths.clone(), *noise_variance, *tx_power),
            ChannelConfig::Room { .. } => Err(Error::Config("expected a static channel".into())),
        }
    }

    /// `(gain, tx_power, noise_variance)` of the dominant path.
    pub fn link_budget(&self) -> Result<(Complex64, f64, f64)> {
        Ok(match &self.channel {
            ChannelConfig::Static { .. } => {
                let ch = self.static_channel()?;
                (ch.dominant_path().gain, ch.tx_power(), ch.noise_variance())
            }
            ChannelConfig::Room {
                gain,
                tx_power,
                noise_variance,
                ..
            } => (*gain, *tx_power, *noise_variance),
        })
    }
}
