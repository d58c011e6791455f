//! Exhaustive beam search and the iterative monopulse tracking loop.
//!
//! A tracking session starts from a beam pair (normally the search result),
//! then alternates between observing the monopulse error around the current
//! receive beam and stepping one beam left or right, until the error falls
//! below the threshold or the iteration budget runs out. The transmit beam is
//! held fixed for the whole session.
//!
//! Observation gates each lobe against a detection floor. When both adjacent
//! lobes are dark the boresight beam is checked: if it is lit the target sits
//! on the current MRA (error 0). Otherwise the squint is widened one beam at a
//! time until a lobe lights up, which lets the loop walk back from seeds
//! several beams away. When the two widened lobes coincide (squint `N/2` on
//! the circular grid) the single lobe counts as the right one.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{measure_rssi_averaged, ChannelState, RssiSample};
use crate::codebook::Codebook;
use crate::error::{Error, Result};
use crate::monopulse::{lobe_indices, monopulse_error_with, IndexMode, MonopulseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BeamPair {
    pub tx: usize,
    pub rx: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchResult {
    pub tx_beam: usize,
    pub rx_beam: usize,
    pub rssi: RssiSample,
}

impl SearchResult {
    pub fn pair(&self) -> BeamPair {
        BeamPair {
            tx: self.tx_beam,
            rx: self.rx_beam,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    /// Convergence threshold on `|error|`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// RSSI samples averaged per lobe measurement.
    pub averaging_count: usize,
    #[serde(default)]
    pub index_mode: IndexMode,
    /// Detection margin in standard deviations of the averaged noise power:
    /// the floor is `σ²·N_rx·(1 + factor/√averaging_count)`.
    #[serde(default = "default_noise_floor_factor")]
    pub noise_floor_factor: f64,
    /// Absolute detection floor in linear power units.
    #[serde(default = "default_min_detectable_power")]
    pub min_detectable_power: f64,
}

fn default_noise_floor_factor() -> f64 {
    3.0
}

fn default_min_detectable_power() -> f64 {
    1e-12
}

impl TrackerConfig {
    /// Defaults for an `n`-beam receive codebook: ε = 0.05, 4·n iterations,
    /// no averaging.
    pub fn for_beams(n: usize) -> Self {
        Self {
            epsilon: 0.05,
            max_iterations: 4 * n,
            averaging_count: 1,
            index_mode: IndexMode::Circular,
            noise_floor_factor: default_noise_floor_factor(),
            min_detectable_power: default_min_detectable_power(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if self.averaging_count == 0 {
            return Err(Error::Config("averaging_count must be positive".into()));
        }
        if !(self.noise_floor_factor.is_finite() && self.noise_floor_factor >= 0.0) {
            return Err(Error::Config("noise_floor_factor must be non-negative".into()));
        }
        if !(self.min_detectable_power.is_finite() && self.min_detectable_power >= 0.0) {
            return Err(Error::Config("min_detectable_power must be non-negative".into()));
        }
        Ok(())
    }

    /// Power below which a lobe is treated as dark.
    pub fn detection_floor(&self, ch: &ChannelState) -> f64 {
        let margin = 1.0 + self.noise_floor_factor / (self.averaging_count as f64).sqrt();
        self.min_detectable_power.max(margin * ch.combined_noise_power())
    }
}

/// What an observation was based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ObservationKind {
    /// Lobes at `squint` beams either side were compared.
    Lobes { squint: usize },
    /// Both adjacent lobes were dark and the boresight beam was lit.
    Boresight,
    /// Nothing above the detection floor.
    NoSignal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Observation {
    pub error: MonopulseError,
    pub kind: ObservationKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackerState {
    pub rx_beam: usize,
    pub tx_beam: usize,
    pub n_beams: usize,
    pub last_error: Option<MonopulseError>,
    pub last_observation: Option<ObservationKind>,
    pub iterations: usize,
    pub converged: bool,
    pub track_lost: bool,
}

impl TrackerState {
    pub fn new(seed: BeamPair, n_beams: usize) -> Self {
        Self {
            rx_beam: seed.rx,
            tx_beam: seed.tx,
            n_beams,
            last_error: None,
            last_observation: None,
            iterations: 0,
            converged: false,
            track_lost: false,
        }
    }

    pub fn pair(&self) -> BeamPair {
        BeamPair {
            tx: self.tx_beam,
            rx: self.rx_beam,
        }
    }
}

/// Measures every (tx, rx) beam pair and returns the strongest. Pairs are
/// visited tx-major; ties keep the first pair visited.
pub fn exhaustive_search<R: Rng + ?Sized>(
    ch: &ChannelState,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    averaging_count: usize,
    rng: &mut R,
) -> Result<SearchResult> {
    let mut best: Option<SearchResult> = None;
    for (tx, w_tx) in cb_tx.beams().iter().enumerate() {
        for (rx, w_rx) in cb_rx.beams().iter().enumerate() {
            let rssi = measure_rssi_averaged(ch, w_tx, w_rx, averaging_count, rng)?;
            if best.is_none_or(|b| rssi.power > b.rssi.power) {
                best = Some(SearchResult {
                    tx_beam: tx,
                    rx_beam: rx,
                    rssi,
                });
            }
        }
    }
    best.ok_or_else(|| Error::Contract("empty codebook".into()))
}

/// One gated monopulse observation around `pair.rx`.
pub fn observe<R: Rng + ?Sized>(
    ch: &ChannelState,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    pair: BeamPair,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> Result<Observation> {
    let w_tx = cb_tx.beam(pair.tx)?;
    let floor = cfg.detection_floor(ch);
    let mut measure =
        |w: &crate::array::SteeringVector| measure_rssi_averaged(ch, w_tx, w, cfg.averaging_count, rng);
    let lit = |e: &MonopulseError| e.p_left > 0.0 || e.p_right > 0.0;

    let adjacent = monopulse_error_with(cb_rx, pair.rx, 1, cfg.index_mode, floor, &mut measure)?;
    if lit(&adjacent) {
        return Ok(Observation {
            error: adjacent,
            kind: ObservationKind::Lobes { squint: 1 },
        });
    }
    let dark = MonopulseError::from_powers(0.0, 0.0);
    if measure(cb_rx.beam(pair.rx)?)?.power > floor {
        return Ok(Observation {
            error: dark,
            kind: ObservationKind::Boresight,
        });
    }
    for squint in 2..=cb_rx.len() / 2 {
        let (left, right) = lobe_indices(cb_rx, pair.rx, squint, cfg.index_mode);
        let error = if left == right {
            MonopulseError::gated(0.0, measure(cb_rx.beam(right)?)?.power, floor)
        } else {
            monopulse_error_with(cb_rx, pair.rx, squint, cfg.index_mode, floor, &mut measure)?
        };
        if lit(&error) {
            return Ok(Observation {
                error,
                kind: ObservationKind::Lobes { squint },
            });
        }
    }
    Ok(Observation {
        error: dark,
        kind: ObservationKind::NoSignal,
    })
}

/// Applies one monopulse error to the tracker state.
pub fn tracker_step(st: &TrackerState, cfg: &TrackerConfig, err: MonopulseError) -> Result<TrackerState> {
    if st.converged {
        return Err(Error::Contract("tracker_step called on a converged state".into()));
    }
    let mut next = *st;
    next.iterations += 1;
    next.last_error = Some(err);
    if err.value.abs() <= cfg.epsilon {
        next.converged = true;
        return Ok(next);
    }
    let n = st.n_beams;
    next.rx_beam = match (cfg.index_mode, err.value > 0.0) {
        (IndexMode::Circular, true) => (st.rx_beam + 1) % n,
        (IndexMode::Circular, false) => (st.rx_beam + n - 1) % n,
        (IndexMode::Clamped, true) => (st.rx_beam + 1).min(n - 1),
        (IndexMode::Clamped, false) => st.rx_beam.saturating_sub(1),
    };
    Ok(next)
}

/// Runs observe/step from `seed` until convergence or `max_iterations`.
/// Returns one state per iteration; the last is flagged `track_lost` when the
/// budget ran out.
pub fn track_until_converged<R: Rng + ?Sized>(
    ch: &ChannelState,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    seed: BeamPair,
    cfg: &TrackerConfig,
    rng: &mut R,
) -> Result<Vec<TrackerState>> {
    cfg.validate()?;
    cb_tx.beam(seed.tx)?;
    cb_rx.beam(seed.rx)?;
    let mut state = TrackerState::new(seed, cb_rx.len());
    let mut trace = Vec::new();
    while !state.converged && state.iterations < cfg.max_iterations {
        let obs = observe(ch, cb_tx, cb_rx, state.pair(), cfg, rng)?;
        state = match obs.kind {
            ObservationKind::NoSignal => TrackerState {
                iterations: state.iterations + 1,
                last_error: Some(obs.error),
                ..state
            },
            _ => tracker_step(&state, cfg, obs.error)?,
        };
        state.last_observation = Some(obs.kind);
        trace.push(state);
    }
    if let Some(last) = trace.last_mut() {
        last.track_lost = !last.converged;
    }
    Ok(trace)
}

/// Outcome of one tracking session as seen by a harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundOutcome {
    Converged,
    /// Budget exhausted while alternating between two adjacent beams, the
    /// signature of a target between two MRAs.
    Dither,
    TrackLost,
}

pub fn classify_round(trace: &[TrackerState]) -> RoundOutcome {
    let Some(last) = trace.last() else {
        return RoundOutcome::TrackLost;
    };
    if last.converged {
        return RoundOutcome::Converged;
    }
    let tail = &trace[trace.len().saturating_sub(4)..];
    if tail.len() == 4 {
        let a = tail[0].rx_beam;
        let b = tail[1].rx_beam;
        let n = last.n_beams;
        let adjacent = a != b && ((a + 1) % n == b || (b + 1) % n == a);
        let alternating = tail.iter().enumerate().all(|(i, s)| s.rx_beam == if i % 2 == 0 { a } else { b });
        if adjacent && alternating {
            return RoundOutcome::Dither;
        }
    }
    RoundOutcome::TrackLost
}
