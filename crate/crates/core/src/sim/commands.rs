//! Experiment drivers behind the `codebook`, `pattern`, `track` and
//! `montecarlo` subcommands. Each returns in-memory results; rendering to
//! text is separate so outputs can be compared byte for byte.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::array::{array_factor_raw, USpaceAngle};
use crate::channel::{measure_rssi_averaged, ChannelState, PathComponent};
use crate::codebook::{grid_u, max_leakage, orthogonality_gram, Codebook};
use crate::error::{Error, Result};
use crate::mobility::generate_trajectory;
use crate::rng::{rng_from_seed, trial_rng, SimRng};
use crate::tracker::{
    classify_round, exhaustive_search, track_until_converged, BeamPair, RoundOutcome, TrackerConfig, TrackerState,
};

use super::config::{ChannelConfig, SimConfig};
use super::format::csv_num;

pub const SCHEMA_VERSION: u32 = 1;

pub const TRACK_CSV_HEADER: &str = "step,t_s,true_u,rx_beam,mra_u,error,rssi_db,converged,track_lost";

/// Which array a codebook command reports on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    Tx,
    #[default]
    Rx,
}

fn side_codebook(cfg: &SimConfig, side: Side) -> Result<Codebook> {
    let (tx, rx) = cfg.codebooks()?;
    Ok(match side {
        Side::Tx => tx,
        Side::Rx => rx,
    })
}

// ── codebook ────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexEntry {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexEntry {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodebookDocument {
    pub schema_version: u32,
    pub n_elements: usize,
    pub spacing_wavelengths: f64,
    pub quantization_bits: Option<u32>,
    pub mra_u: Vec<f64>,
    /// `beams[k][n]` is the weight of element `n` in beam `k`.
    pub beams: Vec<Vec<ComplexEntry>>,
    pub gram: Vec<Vec<f64>>,
}

pub fn cmd_codebook(cfg: &SimConfig, side: Side) -> Result<CodebookDocument> {
    let cb = side_codebook(cfg, side)?;
    Ok(CodebookDocument {
        schema_version: SCHEMA_VERSION,
        n_elements: cb.cfg().n_elements,
        spacing_wavelengths: cb.cfg().spacing_wavelengths,
        quantization_bits: cb.quantization_bits(),
        mra_u: cb.mra_u().to_vec(),
        beams: cb
            .beams()
            .iter()
            .map(|b| b.weights().iter().map(|&w| w.into()).collect())
            .collect(),
        gram: orthogonality_gram(&cb),
    })
}

/// One row per weight: `beam,mra_u,element,re,im`.
pub fn codebook_csv(doc: &CodebookDocument) -> String {
    let mut out = String::from("beam,mra_u,element,re,im\n");
    for (k, beam) in doc.beams.iter().enumerate() {
        for (n, w) in beam.iter().enumerate() {
            let _ = writeln!(out, "{k},{},{n},{},{}", csv_num(doc.mra_u[k]), csv_num(w.re), csv_num(w.im));
        }
    }
    out
}

// ── pattern ─────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternTable {
    pub schema_version: u32,
    pub u: Vec<f64>,
    pub beams: Vec<usize>,
    /// `power_db[i][b]`: beam `beams[b]` at `u[i]`, dB relative to `N²`.
    pub power_db: Vec<Vec<f64>>,
}

/// Uniform half-open grid `u_i = −1 + 2i/points`; contains every codebook
/// MRA when `N` divides `points`.
pub fn pattern_grid(points: usize) -> Vec<f64> {
    (0..points).map(|i| -1.0 + 2.0 * i as f64 / points as f64).collect()
}

pub fn cmd_pattern(cfg: &SimConfig, side: Side, beams: Option<&[usize]>, points: usize) -> Result<PatternTable> {
    if points < 2 {
        return Err(Error::Config(format!("pattern needs at least 2 points, got {points}")));
    }
    let cb = side_codebook(cfg, side)?;
    let beams: Vec<usize> = match beams {
        Some(b) => b.to_vec(),
        None => (0..cb.len()).collect(),
    };
    for &k in &beams {
        cb.beam(k)?;
    }
    let peak = (cb.len() * cb.len()) as f64;
    let u = pattern_grid(points);
    let power_db = u
        .iter()
        .map(|&x| {
            beams
                .iter()
                .map(|&k| {
                    let p = array_factor_raw(cb.cfg(), cb.beams()[k].weights(), x).norm_sqr();
                    10.0 * (p / peak).log10()
                })
                .collect()
        })
        .collect();
    Ok(PatternTable {
        schema_version: SCHEMA_VERSION,
        u,
        beams,
        power_db,
    })
}

pub fn pattern_csv(t: &PatternTable) -> String {
    let mut out = String::from("u");
    for k in &t.beams {
        let _ = write!(out, ",beam_{k}");
    }
    out.push('\n');
    for (u, row) in t.u.iter().zip(&t.power_db) {
        out.push_str(&csv_num(*u));
        for v in row {
            out.push(',');
            out.push_str(&csv_num(*v));
        }
        out.push('\n');
    }
    out
}

// ── track ───────────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrackRecord {
    pub step: usize,
    pub t: f64,
    pub true_aoa_u: f64,
    pub rx_beam: usize,
    pub mra_u: f64,
    pub error: f64,
    pub rssi_db: f64,
    pub converged: bool,
    pub track_lost: bool,
}

impl TrackRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.step,
            csv_num(self.t),
            csv_num(self.true_aoa_u),
            self.rx_beam,
            csv_num(self.mra_u),
            csv_num(self.error),
            csv_num(self.rssi_db),
            self.converged,
            self.track_lost
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub epsilon: f64,
    pub search_tx_beam: usize,
    pub search_rx_beam: usize,
    pub seed_rx_beam: usize,
    /// Tracking sessions run: one per round (static) or per trajectory sample.
    pub rounds: usize,
    /// Iterations of the first session, when it converged.
    pub iterations_to_converge: Option<usize>,
    pub total_iterations: usize,
    pub converged_rounds: usize,
    pub dither_episodes: usize,
    pub track_losses: usize,
    pub beam_switches: usize,
    pub final_rx_beam: usize,
    pub final_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrackOutput {
    pub summary: TrackSummary,
    pub records: Vec<TrackRecord>,
}

impl TrackOutput {
    pub fn csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.records.len() + 1));
        out.push_str(TRACK_CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out
    }

    pub fn summary_json(&self) -> String {
        to_json(&self.summary)
    }

    pub fn json(&self) -> String {
        to_json(self)
    }
}

/// Pretty JSON with a trailing newline; non-finite floats become `null`.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

struct Session<'a> {
    cb_tx: &'a Codebook,
    cb_rx: &'a Codebook,
    tcfg: TrackerConfig,
    rng: SimRng,
    records: Vec<TrackRecord>,
    step: usize,
    outcomes: Vec<(usize, RoundOutcome)>,
    last_state: Option<TrackerState>,
}

impl Session<'_> {
    /// Runs one tracking session; appends all iterations or only the final
    /// state to the records.
    fn round(&mut self, ch: &ChannelState, pair: BeamPair, t: f64, every_iteration: bool) -> Result<BeamPair> {
        let trace = track_until_converged(ch, self.cb_tx, self.cb_rx, pair, &self.tcfg, &mut self.rng)?;
        let outcome = classify_round(&trace);
        self.outcomes.push((trace.len(), outcome));
        let true_u = ch.dominant_path().aoa_u.value();
        let rows: &[TrackerState] = if every_iteration { &trace } else { &trace[trace.len() - 1..] };
        for st in rows {
            let w_tx = self.cb_tx.beam(st.tx_beam)?;
            let w_rx = self.cb_rx.beam(st.rx_beam)?;
            let rssi = measure_rssi_averaged(ch, w_tx, w_rx, self.tcfg.averaging_count, &mut self.rng)?;
            self.records.push(TrackRecord {
                step: self.step,
                t,
                true_aoa_u: true_u,
                rx_beam: st.rx_beam,
                mra_u: self.cb_rx.mra_u()[st.rx_beam],
                error: st.last_error.map_or(0.0, |e| e.value),
                rssi_db: rssi.db,
                converged: st.converged,
                track_lost: st.track_lost && outcome == RoundOutcome::TrackLost,
            });
            self.step += 1;
        }
        let last = *trace.last().expect("at least one iteration");
        self.last_state = Some(last);
        Ok(last.pair())
    }
}

pub fn cmd_track(cfg: &SimConfig) -> Result<TrackOutput> {
    let (cb_tx, cb_rx) = cfg.codebooks()?;
    let tcfg = cfg.tracker.resolve(&cb_rx)?;
    let mut session = Session {
        cb_tx: &cb_tx,
        cb_rx: &cb_rx,
        tcfg,
        rng: rng_from_seed(cfg.seed),
        records: Vec::new(),
        step: 0,
        outcomes: Vec::new(),
        last_state: None,
    };

    let (search, seed_pair) = match &cfg.channel {
        ChannelConfig::Static {
            rounds,
            round_interval_s,
            ..
        } => {
            let ch = cfg.static_channel()?;
            let search = exhaustive_search(&ch, &cb_tx, &cb_rx, tcfg.averaging_count, &mut session.rng)?;
            let seed = offset_seed(&cb_rx, search.pair(), cfg.seed_rx_offset);
            let mut pair = seed;
            for r in 0..*rounds {
                pair = session.round(&ch, pair, r as f64 * round_interval_s, true)?;
            }
            (search, seed)
        }
        ChannelConfig::Room {
            scenario,
            trajectory,
            duration_s,
            aod_u,
            gain,
            inverse_square_gain,
            noise_variance,
            tx_power,
        } => {
            let samples = generate_trajectory(scenario, trajectory, *duration_s)?;
            let r0 = (samples[0].position - scenario.ap_position).norm();
            let channel_at = |i: usize| {
                let s = &samples[i];
                let g = if *inverse_square_gain {
                    *gain * (r0 / (s.position - scenario.ap_position).norm())
                } else {
                    *gain
                };
                let path = PathComponent {
                    aoa_u: s.aoa_u,
                    aod_u: *aod_u,
                    gain: g,
                };
                ChannelState::new(cfg.tx, cfg.rx, vec![path], *noise_variance, *tx_power)
            };
            let first = channel_at(0)?;
            let search = exhaustive_search(&first, &cb_tx, &cb_rx, tcfg.averaging_count, &mut session.rng)?;
            let seed = offset_seed(&cb_rx, search.pair(), cfg.seed_rx_offset);
            let mut pair = seed;
            for (i, s) in samples.iter().enumerate() {
                pair = session.round(&channel_at(i)?, pair, s.t, false)?;
            }
            (search, seed)
        }
    };

    let outcomes = &session.outcomes;
    let count = |o: RoundOutcome| outcomes.iter().filter(|(_, x)| *x == o).count();
    let mut beam_switches = 0;
    let mut prev = seed_pair.rx;
    for r in &session.records {
        if r.rx_beam != prev {
            beam_switches += 1;
        }
        prev = r.rx_beam;
    }
    let last = session.last_state.expect("at least one round");
    let summary = TrackSummary {
        schema_version: SCHEMA_VERSION,
        command: "track",
        seed: cfg.seed,
        epsilon: tcfg.epsilon,
        search_tx_beam: search.tx_beam,
        search_rx_beam: search.rx_beam,
        seed_rx_beam: seed_pair.rx,
        rounds: outcomes.len(),
        iterations_to_converge: outcomes
            .first()
            .filter(|(_, o)| *o == RoundOutcome::Converged)
            .map(|(n, _)| *n),
        total_iterations: outcomes.iter().map(|(n, _)| n).sum(),
        converged_rounds: count(RoundOutcome::Converged),
        dither_episodes: count(RoundOutcome::Dither),
        track_losses: count(RoundOutcome::TrackLost),
        beam_switches,
        final_rx_beam: last.rx_beam,
        final_error: last.last_error.map(|e| e.value),
    };
    Ok(TrackOutput {
        summary,
        records: session.records,
    })
}

fn offset_seed(cb_rx: &Codebook, pair: BeamPair, offset: i64) -> BeamPair {
    BeamPair {
        tx: pair.tx,
        rx: cb_rx.wrap_index(pair.rx, offset as isize),
    }
}

// ── montecarlo ──────────────────────────────────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub true_rx_beam: usize,
    pub final_rx_beam: usize,
    pub converged: bool,
    pub iterations: usize,
    pub final_abs_error: f64,
    pub outcome: RoundOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloCell {
    pub quantization_bits: Option<u32>,
    pub snr_db: Option<f64>,
    pub noise_variance: f64,
    /// Fraction of trials converged onto the true receive beam.
    pub convergence_rate: f64,
    /// Fraction of trials converged on any beam.
    pub converged_fraction: f64,
    pub mean_iterations: f64,
    pub mean_final_abs_error: f64,
    pub max_final_abs_error: f64,
    pub dither_episodes: usize,
    pub track_losses: usize,
    /// Largest off-diagonal receive Gram entry over `N_rx`.
    pub rx_leakage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub trials: usize,
    pub averaging_count: usize,
    pub cells: Vec<MonteCarloCell>,
}

/// Noise variance that puts a matched-beam signal `snr_db` above the
/// combined noise `σ²·N_rx`.
pub fn noise_for_snr(gain: Complex64, tx_power: f64, n_tx: usize, n_rx: usize, snr_db: f64) -> f64 {
    let signal = tx_power * gain.norm_sqr() * (n_tx * n_tx * n_rx * n_rx) as f64;
    signal / (n_rx as f64 * 10f64.powf(snr_db / 10.0))
}

pub fn cmd_montecarlo(cfg: &SimConfig) -> Result<MonteCarloSummary> {
    let (gain, tx_power, configured_noise) = cfg.link_budget()?;
    let bits_list: Vec<Option<u32>> = if cfg.montecarlo.quantization_sweep {
        cfg.montecarlo.sweep_bits.clone()
    } else {
        vec![cfg.quantization_bits]
    };
    let snr_list: Vec<Option<f64>> = if cfg.montecarlo.snr_db.is_empty() {
        vec![None]
    } else {
        cfg.montecarlo.snr_db.iter().copied().map(Some).collect()
    };

    let mut cells = Vec::new();
    for &bits in &bits_list {
        let (cb_tx, cb_rx) = cfg.codebooks_with_bits(bits)?;
        let tcfg = cfg.tracker.resolve(&cb_rx)?;
        for &snr in &snr_list {
            let noise = match snr {
                Some(s) => noise_for_snr(gain, tx_power, cfg.tx.n_elements, cfg.rx.n_elements, s),
                None => configured_noise,
            };
            let results = run_trials(cfg, &cb_tx, &cb_rx, &tcfg, gain, tx_power, noise)?;
            cells.push(summarize(bits, snr, noise, &results, &cb_rx));
        }
    }
    Ok(MonteCarloSummary {
        schema_version: SCHEMA_VERSION,
        command: "montecarlo",
        seed: cfg.seed,
        trials: cfg.trials,
        averaging_count: cfg.tracker.averaging_count,
        cells,
    })
}

/// Runs every trial; trial `i` depends only on the config and
/// `seed.wrapping_add(i)`, so the parallel schedule does not matter.
pub fn run_trials(
    cfg: &SimConfig,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    tcfg: &TrackerConfig,
    gain: Complex64,
    tx_power: f64,
    noise_variance: f64,
) -> Result<Vec<TrialResult>> {
    (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, cb_tx, cb_rx, tcfg, gain, tx_power, noise_variance, i))
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn run_trial(
    cfg: &SimConfig,
    cb_tx: &Codebook,
    cb_rx: &Codebook,
    tcfg: &TrackerConfig,
    gain: Complex64,
    tx_power: f64,
    noise_variance: f64,
    trial: usize,
) -> Result<TrialResult> {
    let mut rng = trial_rng(cfg.seed, trial as u64);
    let n_tx = cfg.tx.n_elements;
    let n_rx = cfg.rx.n_elements;
    let ch = if cfg.montecarlo.random_grid_paths {
        let rx_k = rng.random_range(0..n_rx);
        let tx_k = rng.random_range(0..n_tx);
        let path = PathComponent {
            aoa_u: USpaceAngle::new(grid_u(n_rx, rx_k))?,
            aod_u: USpaceAngle::new(grid_u(n_tx, tx_k))?,
            gain,
        };
        ChannelState::new(cfg.tx, cfg.rx, vec![path], noise_variance, tx_power)?
    } else {
        cfg.static_channel()?.with_noise_variance(noise_variance)?
    };
    // Unquantized argmax beam toward the dominant path is the target.
    let true_rx_beam = crate::codebook::generate_codebook(&cfg.rx).best_beam(ch.dominant_path().aoa_u.value());

    let search = exhaustive_search(&ch, cb_tx, cb_rx, tcfg.averaging_count, &mut rng)?;
    let seed = offset_seed(cb_rx, search.pair(), cfg.seed_rx_offset);
    let trace = track_until_converged(&ch, cb_tx, cb_rx, seed, tcfg, &mut rng)?;
    let last = trace.last().expect("at least one iteration");
    Ok(TrialResult {
        trial,
        true_rx_beam,
        final_rx_beam: last.rx_beam,
        converged: last.converged,
        iterations: trace.len(),
        final_abs_error: last.last_error.map_or(0.0, |e| e.value.abs()),
        outcome: classify_round(&trace),
    })
}

fn summarize(bits: Option<u32>, snr: Option<f64>, noise: f64, results: &[TrialResult], cb_rx: &Codebook) -> MonteCarloCell {
    let n = results.len() as f64;
    let on_target = results.iter().filter(|r| r.converged && r.final_rx_beam == r.true_rx_beam).count();
    let converged = results.iter().filter(|r| r.converged).count();
    MonteCarloCell {
        quantization_bits: bits,
        snr_db: snr,
        noise_variance: noise,
        convergence_rate: on_target as f64 / n,
        converged_fraction: converged as f64 / n,
        mean_iterations: results.iter().map(|r| r.iterations as f64).sum::<f64>() / n,
        mean_final_abs_error: results.iter().map(|r| r.final_abs_error).sum::<f64>() / n,
        max_final_abs_error: results.iter().map(|r| r.final_abs_error).fold(0.0, f64::max),
        dither_episodes: results.iter().filter(|r| r.outcome == RoundOutcome::Dither).count(),
        track_losses: results.iter().filter(|r| r.outcome == RoundOutcome::TrackLost).count(),
        rx_leakage: max_leakage(cb_rx),
    }
}
