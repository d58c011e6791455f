//! Orthogonal (DFT / Butler) beamforming codebooks.
//!
//! Beam `k` of an `N`-element codebook points at `u_k = −1 + 2k/N`. At
//! half-wavelength spacing every beam has exact nulls at all other MRAs.

use std::f64::consts::PI;

use serde::Serialize;

use crate::array::{array_factor_raw, steering_vector, SteeringVector, UlaConfig, USpaceAngle};
use crate::error::{Error, Result};

/// Bisection tolerance in u for half-power point search.
pub const HPBW_TOLERANCE_U: f64 = 1e-9;

/// Largest supported phase-shifter resolution.
pub const MAX_QUANTIZATION_BITS: u32 = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    cfg: UlaConfig,
    beams: Vec<SteeringVector>,
    mra_u: Vec<f64>,
    quantization_bits: Option<u32>,
}

impl Codebook {
    pub fn cfg(&self) -> &UlaConfig {
        &self.cfg
    }

    pub fn beams(&self) -> &[SteeringVector] {
        &self.beams
    }

    pub fn mra_u(&self) -> &[f64] {
        &self.mra_u
    }

    pub fn quantization_bits(&self) -> Option<u32> {
        self.quantization_bits
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn beam(&self, k: usize) -> Result<&SteeringVector> {
        self.beams.get(k).ok_or(Error::BeamIndex {
            index: k,
            len: self.beams.len(),
        })
    }

    /// Index of the beam with the largest power toward `u`; ties go to the
    /// lowest index.
    pub fn best_beam(&self, u: f64) -> usize {
        let mut best = 0;
        let mut best_power = f64::NEG_INFINITY;
        for (k, beam) in self.beams.iter().enumerate() {
            let p = array_factor_raw(&self.cfg, beam.weights(), u).norm_sqr();
            if p > best_power {
                best = k;
                best_power = p;
            }
        }
        best
    }

    /// Offset `k + delta` wrapped onto `0..N`.
    pub fn wrap_index(&self, k: usize, delta: isize) -> usize {
        let n = self.len() as isize;
        (k as isize + delta).rem_euclid(n) as usize
    }

    /// Shortest distance between two beam indices on the circular grid.
    pub fn circular_distance(&self, a: usize, b: usize) -> usize {
        let n = self.len();
        let d = a.abs_diff(b) % n;
        d.min(n - d)
    }
}

/// MRA of beam `k` on the DFT grid.
pub fn grid_u(n: usize, k: usize) -> f64 {
    -1.0 + 2.0 * k as f64 / n as f64
}

pub fn generate_codebook(cfg: &UlaConfig) -> Codebook {
    let n = cfg.n_elements;
    let mra_u: Vec<f64> = (0..n).map(|k| grid_u(n, k)).collect();
    let beams = mra_u
        .iter()
        .map(|&u| steering_vector(cfg, USpaceAngle::new(u).expect("grid u lies in [-1, 1)")))
        .collect();
    Codebook {
        cfg: *cfg,
        beams,
        mra_u,
        quantization_bits: None,
    }
}

/// `|AF_k(u)|²` for each grid point.
pub fn beam_pattern(cb: &Codebook, k: usize, u_grid: &[USpaceAngle]) -> Result<Vec<f64>> {
    let beam = cb.beam(k)?;
    Ok(u_grid
        .iter()
        .map(|u| array_factor_raw(&cb.cfg, beam.weights(), u.value()).norm_sqr())
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HpbwMeasurement {
    pub beam_index: usize,
    /// Half-power width in u.
    pub width_u: f64,
    /// Half-power width in θ (radians); absent when a half-power point falls
    /// outside the visible region.
    pub width_theta: Option<f64>,
    pub lower_u: f64,
    pub upper_u: f64,
}

/// Half-power beamwidth of beam `k`, located by bisection on
/// `|AF(u)|² = peak/2` on each side of the MRA.
///
/// The pattern is evaluated analytically past `|u| = 1`, so `width_u` is
/// defined for every beam; `width_theta` only when both points are visible.
pub fn measure_hpbw(cb: &Codebook, k: usize) -> Result<HpbwMeasurement> {
    let beam = cb.beam(k)?;
    let cfg = &cb.cfg;
    let mra = cb.mra_u[k];
    let power = |u: f64| array_factor_raw(cfg, beam.weights(), u).norm_sqr();
    let half = power(mra) / 2.0;
    // First null of the main lobe sits 1/(N·d/λ) away from the MRA.
    let null_offset = 1.0 / (cfg.n_elements as f64 * cfg.spacing_wavelengths);

    let side = |dir: f64| {
        let (mut inside, mut outside) = (0.0_f64, null_offset);
        while outside - inside > HPBW_TOLERANCE_U {
            let mid = 0.5 * (inside + outside);
            if power(mra + dir * mid) >= half {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        mra + dir * 0.5 * (inside + outside)
    };
    let lower_u = side(-1.0);
    let upper_u = side(1.0);
    let visible = |u: f64| u > -1.0 && u < 1.0;
    let width_theta =
        (visible(lower_u) && visible(upper_u)).then(|| upper_u.asin() - lower_u.asin());
    Ok(HpbwMeasurement {
        beam_index: k,
        width_u: upper_u - lower_u,
        width_theta,
        lower_u,
        upper_u,
    })
}

/// Rounds `phase` to the nearest multiple of `2π/2^bits`; exact ties go to
/// the smaller phase.
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let step = 2.0 * PI / (1u64 << bits) as f64;
    (phase / step - 0.5).ceil() * step
}

pub fn quantize_codebook(cb: &Codebook, bits: u32) -> Result<Codebook> {
    if !(1..=MAX_QUANTIZATION_BITS).contains(&bits) {
        return Err(Error::Config(format!(
            "quantization bits must be in 1..={MAX_QUANTIZATION_BITS}, got {bits}"
        )));
    }
    let beams = cb
        .beams
        .iter()
        .map(|b| SteeringVector::from_phases(b.phases().into_iter().map(|p| quantize_phase(p, bits))))
        .collect();
    Ok(Codebook {
        cfg: cb.cfg,
        beams,
        mra_u: cb.mra_u.clone(),
        quantization_bits: Some(bits),
    })
}

/// Builds the codebook for `cfg`, quantized when `bits` is set.
pub fn build_codebook(cfg: &UlaConfig, bits: Option<u32>) -> Result<Codebook> {
    let cb = generate_codebook(cfg);
    match bits {
        Some(b) => quantize_codebook(&cb, b),
        None => Ok(cb),
    }
}

/// `|⟨beam_i, beam_j⟩|` for all pairs.
pub fn orthogonality_gram(cb: &Codebook) -> Vec<Vec<f64>> {
    cb.beams
        .iter()
        .map(|bi| {
            cb.beams
                .iter()
                .map(|bj| {
                    bi.weights()
                        .iter()
                        .zip(bj.weights())
                        .map(|(a, b)| a.conj() * b)
                        .sum::<num_complex::Complex64>()
                        .norm()
                })
                .collect()
        })
        .collect()
}

/// Largest off-diagonal Gram entry divided by `N`.
pub fn max_leakage(cb: &Codebook) -> f64 {
    let n = cb.len() as f64;
    orthogonality_gram(cb)
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| *j != i).map(|(_, v)| *v))
        .fold(0.0, f64::max)
        / n
}
