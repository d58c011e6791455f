//! Amplitude-comparison monopulse error from two squinted receive lobes.
//!
//! The lobes are the codebook beams either side of the current beam. A
//! target right of boresight (larger u) lights the right lobe more and gives
//! a positive error; the error is the normalized difference
//! `(P_R − P_L)/(P_R + P_L)`.
//!
//! Lobe powers at or below a detection floor count as zero. Without this an
//! on-grid target, which sits in exact nulls of both neighbours, would yield
//! a ratio of two rounding residues.

use serde::{Deserialize, Serialize};

use crate::array::{array_factor_raw, SteeringVector};
use crate::channel::RssiSample;
use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Floor used by [`monopulse_error`] and [`error_at`].
pub const DEFAULT_DARK_FLOOR: f64 = 1e-12;

/// How lobe indices are formed at the ends of the beam grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexMode {
    /// Indices wrap modulo N; the DFT grid is periodic in u with period 2.
    #[default]
    Circular,
    /// Indices saturate at 0 and N − 1.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonopulseError {
    /// Normalized error in `[−1, 1]`.
    pub value: f64,
    pub p_left: f64,
    pub p_right: f64,
}

impl MonopulseError {
    /// Zeroes powers at or below `floor`, then forms the normalized
    /// difference.
    pub fn gated(p_left: f64, p_right: f64, floor: f64) -> Self {
        let gate = |p: f64| if p > floor { p } else { 0.0 };
        Self::from_powers(gate(p_left), gate(p_right))
    }

    /// Forms the normalized difference; two dark lobes give 0.
    pub fn from_powers(p_left: f64, p_right: f64) -> Self {
        let total = p_left + p_right;
        let value = if total > 0.0 { (p_right - p_left) / total } else { 0.0 };
        Self {
            value,
            p_left,
            p_right,
        }
    }
}

/// Left and right lobe indices at `squint` beams from `k`.
pub fn lobe_indices(cb: &Codebook, k: usize, squint: usize, mode: IndexMode) -> (usize, usize) {
    let s = squint as isize;
    match mode {
        IndexMode::Circular => (cb.wrap_index(k, -s), cb.wrap_index(k, s)),
        IndexMode::Clamped => (k.saturating_sub(squint), (k + squint).min(cb.len() - 1)),
    }
}

/// Monopulse error around receive beam `k` using its two neighbours.
///
/// `measure` returns the RSSI seen through a receive beam; it owns the
/// channel, transmit beam and random stream.
pub fn monopulse_error<F>(cb_rx: &Codebook, k: usize, measure: F) -> Result<MonopulseError>
where
    F: FnMut(&SteeringVector) -> Result<RssiSample>,
{
    monopulse_error_with(cb_rx, k, 1, IndexMode::Circular, DEFAULT_DARK_FLOOR, measure)
}

/// General form of [`monopulse_error`] with an arbitrary squint (in beams),
/// index mode and detection floor. Left lobe is measured first.
pub fn monopulse_error_with<F>(
    cb_rx: &Codebook,
    k: usize,
    squint: usize,
    mode: IndexMode,
    floor: f64,
    mut measure: F,
) -> Result<MonopulseError>
where
    F: FnMut(&SteeringVector) -> Result<RssiSample>,
{
    cb_rx.beam(k)?;
    if squint == 0 {
        return Err(Error::Contract("squint must be at least one beam".into()));
    }
    let (left, right) = lobe_indices(cb_rx, k, squint, mode);
    let p_left = measure(cb_rx.beam(left)?)?.power;
    let p_right = measure(cb_rx.beam(right)?)?.power;
    Ok(MonopulseError::gated(p_left, p_right, floor))
}

/// Noiseless comparator output for a point target at receive direction `u`.
pub fn error_at(cb_rx: &Codebook, k: usize, u: f64, mode: IndexMode) -> Result<MonopulseError> {
    let cfg = *cb_rx.cfg();
    monopulse_error_with(cb_rx, k, 1, mode, DEFAULT_DARK_FLOOR, |w| {
        Ok(RssiSample::from_power(array_factor_raw(&cfg, w.weights(), u).norm_sqr()))
    })
}

/// Comparator magnitude for a target halfway between beam `N/2` and its
/// right neighbour.
///
/// Used as an error threshold it makes the tracker switch beams exactly
/// when the neighbouring beam becomes the better one. This only holds while
/// the target is inside the current beam's main lobe; sidelobe comparisons
/// for distant targets can fall below it.
pub fn midpoint_threshold(cb_rx: &Codebook) -> f64 {
    let k = cb_rx.len() / 2;
    let n = cb_rx.len();
    let mid = 0.5 * (cb_rx.mra_u()[k] + cb_rx.mra_u()[(k + 1) % n]);
    error_at(cb_rx, k, mid, IndexMode::Circular)
        .expect("beam N/2 exists")
        .value
        .abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::UlaConfig;
    use crate::codebook::{generate_codebook, quantize_codebook};
    use proptest::prelude::*;

    fn cb(n: usize) -> Codebook {
        generate_codebook(&UlaConfig::half_wavelength(n).unwrap())
    }

    /// Closed-form Dirichlet power for a half-wavelength array, independent of
    /// the array-factor code path.
    fn dirichlet_power(n: usize, delta: f64) -> f64 {
        let x = std::f64::consts::PI * 0.5 * delta;
        if x.sin().abs() < 1e-15 {
            return (n * n) as f64;
        }
        ((n as f64 * x).sin() / x.sin()).powi(2)
    }

    #[test]
    fn zero_at_mra() {
        let cb = cb(8);
        for k in 0..8 {
            let e = error_at(&cb, k, cb.mra_u()[k], IndexMode::Circular).unwrap();
            assert!(e.value.abs() < 1e-12, "beam {k}: {}", e.value);
        }
    }

    #[test]
    fn sign_follows_offset() {
        let cb = cb(8);
        assert!(error_at(&cb, 4, 0.05, IndexMode::Circular).unwrap().value > 0.0);
        assert!(error_at(&cb, 4, -0.05, IndexMode::Circular).unwrap().value < 0.0);
    }

    #[test]
    fn halfway_to_left_neighbour() {
        let cb = cb(8);
        let e = error_at(&cb, 4, -0.125, IndexMode::Circular).unwrap();
        let pl = dirichlet_power(8, -0.125 + 0.25);
        let pr = dirichlet_power(8, -0.125 - 0.25);
        let oracle = (pr - pl) / (pr + pl);
        assert!((e.value - oracle).abs() < 1e-12);
        // 40-digit evaluation of the same ratio.
        assert!((e.value + 0.780_454_565_784_353_4).abs() < 1e-12, "{}", e.value);
        assert!((e.p_left - 26.274_142_369_088_18).abs() < 1e-9);
    }

    #[test]
    fn midpoint_threshold_value() {
        assert!((midpoint_threshold(&cb(8)) - 0.780_454_565_784_353_4).abs() < 1e-12);
    }

    #[test]
    fn gating() {
        assert_eq!(MonopulseError::gated(1e-30, 2e-31, 1e-12).value, 0.0);
        let e = MonopulseError::gated(1e-13, 5.0, 1e-12);
        assert_eq!((e.p_left, e.value), (0.0, 1.0));
        assert_eq!(MonopulseError::gated(1.0, 3.0, 1e-12).value, 0.5);
    }

    #[test]
    fn dark_lobes_give_zero() {
        let e = MonopulseError::from_powers(0.0, 0.0);
        assert_eq!(e.value, 0.0);
        assert_eq!(MonopulseError::from_powers(0.0, 3.0).value, 1.0);
        assert_eq!(MonopulseError::from_powers(3.0, 0.0).value, -1.0);
    }

    #[test]
    fn lobe_indexing_modes() {
        let cb = cb(8);
        assert_eq!(lobe_indices(&cb, 0, 1, IndexMode::Circular), (7, 1));
        assert_eq!(lobe_indices(&cb, 7, 1, IndexMode::Circular), (6, 0));
        assert_eq!(lobe_indices(&cb, 0, 1, IndexMode::Clamped), (0, 1));
        assert_eq!(lobe_indices(&cb, 7, 2, IndexMode::Clamped), (5, 7));
        assert_eq!(lobe_indices(&cb, 2, 4, IndexMode::Circular), (6, 6));
    }

    #[test]
    fn measurement_order_and_errors() {
        let cb = cb(8);
        let mut seen = Vec::new();
        let e = monopulse_error(&cb, 3, |w| {
            seen.push(w.clone());
            Ok(RssiSample::from_power(seen.len() as f64))
        })
        .unwrap();
        assert_eq!(seen, vec![cb.beams()[2].clone(), cb.beams()[4].clone()]);
        assert_eq!((e.p_left, e.p_right), (1.0, 2.0));
        assert!(monopulse_error(&cb, 8, |_| Ok(RssiSample::from_power(1.0))).is_err());
        assert!(monopulse_error_with(&cb, 1, 0, IndexMode::Circular, 0.0, |_| Ok(RssiSample::from_power(1.0))).is_err());
    }

    #[test]
    fn monotone_over_half_spacing() {
        let cb = cb(8);
        let mut last = 0.0;
        for i in 0..32 {
            let delta = i as f64 / 31.0 * 0.125;
            let v = error_at(&cb, 4, delta, IndexMode::Circular).unwrap().value.abs();
            assert!(v >= last, "delta {delta}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn quantized_threshold_still_in_range() {
        let q = quantize_codebook(&cb(8), 2).unwrap();
        let t = midpoint_threshold(&q);
        assert!(t > 0.0 && t < 1.0);
    }

    proptest! {
        #[test]
        fn sign_correct_inside_half_spacing(n in 4usize..33, frac in 0.001f64..0.999, k_seed in any::<usize>()) {
            let cb = cb(n);
            let k = 1 + k_seed % (n - 2);
            let delta = frac / n as f64;
            let mra = cb.mra_u()[k];
            prop_assert!(error_at(&cb, k, mra + delta, IndexMode::Circular).unwrap().value > 0.0);
            prop_assert!(error_at(&cb, k, mra - delta, IndexMode::Circular).unwrap().value < 0.0);
        }

        #[test]
        fn gain_invariant(scale in 1e-6f64..1e6, delta in -0.12f64..0.12) {
            let cb = cb(8);
            let cfg = *cb.cfg();
            let base = error_at(&cb, 4, delta, IndexMode::Circular).unwrap().value;
            let scaled = monopulse_error(&cb, 4, |w| {
                Ok(RssiSample::from_power(scale * array_factor_raw(&cfg, w.weights(), delta).norm_sqr()))
            }).unwrap().value;
            prop_assert!((base - scaled).abs() < 1e-12);
        }
    }
}
