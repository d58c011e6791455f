//! Sparse MIMO channel built from (AoA, AoD, gain) path triples, and noisy
//! RSSI measurement through a chosen transmit/receive beam pair.
//!
//! `H = Σ_p g_p · a_rx(aoa_p) · a_tx(aod_p)^H`. The effective scalar channel
//! `w_rx^H · H · w_tx` is evaluated path by path so `H` is never formed.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::{array_factor, steering_vector, SteeringVector, UlaConfig, USpaceAngle};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathComponent {
    pub aoa_u: USpaceAngle,
    pub aod_u: USpaceAngle,
    /// Linear complex amplitude; path loss is folded in here.
    #[serde(with = "complex_object")]
    pub gain: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    tx_cfg: UlaConfig,
    rx_cfg: UlaConfig,
    paths: Vec<PathComponent>,
    noise_variance: f64,
    tx_power: f64,
}

impl ChannelState {
    pub fn new(
        tx_cfg: UlaConfig,
        rx_cfg: UlaConfig,
        paths: Vec<PathComponent>,
        noise_variance: f64,
        tx_power: f64,
    ) -> Result<Self> {
        tx_cfg.validate()?;
        rx_cfg.validate()?;
        if paths.is_empty() {
            return Err(Error::Config("channel needs at least one path".into()));
        }
        if !(noise_variance.is_finite() && noise_variance >= 0.0) {
            return Err(Error::Config(format!(
                "noise_variance must be non-negative, got {noise_variance}"
            )));
        }
        if !(tx_power.is_finite() && tx_power > 0.0) {
            return Err(Error::Config(format!("tx_power must be positive, got {tx_power}")));
        }
        Ok(Self {
            tx_cfg,
            rx_cfg,
            paths,
            noise_variance,
            tx_power,
        })
    }

    /// Noiseless single-path channel with unit transmit power.
    pub fn single_path(
        tx_cfg: UlaConfig,
        rx_cfg: UlaConfig,
        aoa_u: USpaceAngle,
        aod_u: USpaceAngle,
        gain: Complex64,
    ) -> Result<Self> {
        Self::new(tx_cfg, rx_cfg, vec![PathComponent { aoa_u, aod_u, gain }], 0.0, 1.0)
    }

    pub fn tx_cfg(&self) -> &UlaConfig {
        &self.tx_cfg
    }

    pub fn rx_cfg(&self) -> &UlaConfig {
        &self.rx_cfg
    }

    pub fn paths(&self) -> &[PathComponent] {
        &self.paths
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn tx_power(&self) -> f64 {
        self.tx_power
    }

    /// Copy with a different per-element noise variance.
    pub fn with_noise_variance(&self, noise_variance: f64) -> Result<Self> {
        Self::new(self.tx_cfg, self.rx_cfg, self.paths.clone(), noise_variance, self.tx_power)
    }

    /// Path with the largest `|gain|`; the first one wins ties.
    pub fn dominant_path(&self) -> &PathComponent {
        self.paths
            .iter()
            .reduce(|best, p| if p.gain.norm() > best.gain.norm() { p } else { best })
            .expect("paths is never empty")
    }

    /// Combined noise power after the receive combiner, `σ²·N_rx`.
    pub fn combined_noise_power(&self) -> f64 {
        self.noise_variance * self.rx_cfg.n_elements as f64
    }

    fn check_dims(&self, w_tx: &SteeringVector, w_rx: &SteeringVector) -> Result<()> {
        if w_tx.len() != self.tx_cfg.n_elements {
            return Err(Error::DimensionMismatch {
                expected: self.tx_cfg.n_elements,
                got: w_tx.len(),
            });
        }
        if w_rx.len() != self.rx_cfg.n_elements {
            return Err(Error::DimensionMismatch {
                expected: self.rx_cfg.n_elements,
                got: w_rx.len(),
            });
        }
        Ok(())
    }
}

/// Received power sample, linear and in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RssiSample {
    pub power: f64,
    pub db: f64,
}

impl RssiSample {
    /// `db` is `-inf` for zero power.
    pub fn from_power(power: f64) -> Self {
        debug_assert!(power >= 0.0);
        Self {
            power,
            db: 10.0 * power.log10(),
        }
    }
}

/// `w_rx^H · H · w_tx`, accumulated path by path.
pub fn effective_gain(ch: &ChannelState, w_tx: &SteeringVector, w_rx: &SteeringVector) -> Result<Complex64> {
    ch.check_dims(w_tx, w_rx)?;
    let mut total = Complex64::new(0.0, 0.0);
    for p in &ch.paths {
        let rx = array_factor(&ch.rx_cfg, w_rx, p.aoa_u)?;
        // a_tx^H · w_tx = conj(w_tx^H · a_tx)
        let tx = array_factor(&ch.tx_cfg, w_tx, p.aod_u)?.conj();
        total += p.gain * rx * tx;
    }
    Ok(total)
}

/// Explicit `N_rx × N_tx` channel matrix (row = receive element).
pub fn channel_matrix(ch: &ChannelState) -> Vec<Vec<Complex64>> {
    let mut h = vec![vec![Complex64::new(0.0, 0.0); ch.tx_cfg.n_elements]; ch.rx_cfg.n_elements];
    for p in &ch.paths {
        let a_rx = steering_vector(&ch.rx_cfg, p.aoa_u);
        let a_tx = steering_vector(&ch.tx_cfg, p.aod_u);
        for (row, ar) in h.iter_mut().zip(a_rx.weights()) {
            for (entry, at) in row.iter_mut().zip(a_tx.weights()) {
                *entry += p.gain * ar * at.conj();
            }
        }
    }
    h
}

/// `w_rx^H · H · w_tx` through the materialized matrix; meant for small arrays.
pub fn effective_gain_materialized(
    ch: &ChannelState,
    w_tx: &SteeringVector,
    w_rx: &SteeringVector,
) -> Result<Complex64> {
    ch.check_dims(w_tx, w_rx)?;
    let h = channel_matrix(ch);
    Ok(h.iter()
        .zip(w_rx.weights())
        .map(|(row, wr)| {
            wr.conj()
                * row
                    .iter()
                    .zip(w_tx.weights())
                    .map(|(hij, wt)| hij * wt)
                    .sum::<Complex64>()
        })
        .sum())
}

/// One RSSI sample: `|√P·g_eff + η|²` with `η ~ CN(0, σ²·N_rx)`.
///
/// No random numbers are drawn when the channel is noiseless.
pub fn measure_rssi<R: Rng + ?Sized>(
    ch: &ChannelState,
    w_tx: &SteeringVector,
    w_rx: &SteeringVector,
    rng: &mut R,
) -> Result<RssiSample> {
    let y = ch.tx_power.sqrt() * effective_gain(ch, w_tx, w_rx)?;
    Ok(RssiSample::from_power(add_noise(ch, y, rng).norm_sqr()))
}

/// Mean of `count` independent RSSI samples.
pub fn measure_rssi_averaged<R: Rng + ?Sized>(
    ch: &ChannelState,
    w_tx: &SteeringVector,
    w_rx: &SteeringVector,
    count: usize,
    rng: &mut R,
) -> Result<RssiSample> {
    if count == 0 {
        return Err(Error::Contract("averaging count must be positive".into()));
    }
    let y = ch.tx_power.sqrt() * effective_gain(ch, w_tx, w_rx)?;
    if ch.noise_variance == 0.0 {
        return Ok(RssiSample::from_power(y.norm_sqr()));
    }
    let sum: f64 = (0..count).map(|_| add_noise(ch, y, rng).norm_sqr()).sum();
    Ok(RssiSample::from_power(sum / count as f64))
}

fn add_noise<R: Rng + ?Sized>(ch: &ChannelState, y: Complex64, rng: &mut R) -> Complex64 {
    if ch.noise_variance == 0.0 {
        return y;
    }
    let sigma = (ch.combined_noise_power() / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    y + Complex64::new(sigma * re, sigma * im)
}

/// `{"re": .., "im": ..}` encoding for complex values.
pub(crate) mod complex_object {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(deny_unknown_fields)]
    struct ReIm {
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        ReIm { re: c.re, im: c.im }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let v = ReIm::deserialize(d)?;
        Ok(Complex64::new(v.re, v.im))
    }
}
