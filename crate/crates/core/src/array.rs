//! Uniform linear array manifold: steering vectors, `u = sin(θ)` conversion
//! and array-factor evaluation.
//!
//! Angles live in u-space throughout the crate. Element `n` of the steering
//! vector toward `u` carries the phase `−2π·(d/λ)·n·u`, so element 0 is always
//! the phase reference and equals 1.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking the unit-modulus invariant.
pub const UNIT_MODULUS_TOL: f64 = 1e-12;

/// ULA geometry shared by transmit and receive sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UlaConfig {
    pub n_elements: usize,
    /// Element spacing `d/λ`.
    #[serde(default = "default_spacing")]
    pub spacing_wavelengths: f64,
    /// Accept `d/λ > 0.5` (grating lobes in the visible region).
    #[serde(default)]
    pub allow_grating_lobes: bool,
}

fn default_spacing() -> f64 {
    0.5
}

impl UlaConfig {
    pub fn new(n_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        let cfg = Self {
            n_elements,
            spacing_wavelengths,
            allow_grating_lobes: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Half-wavelength spaced array.
    pub fn half_wavelength(n_elements: usize) -> Result<Self> {
        Self::new(n_elements, 0.5)
    }

    /// Like [`UlaConfig::new`] but admits spacings above half a wavelength.
    pub fn with_grating_lobes(n_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        let cfg = Self {
            n_elements,
            spacing_wavelengths,
            allow_grating_lobes: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements < 2 {
            return Err(Error::Config(format!(
                "n_elements must be at least 2, got {}",
                self.n_elements
            )));
        }
        let d = self.spacing_wavelengths;
        if !(d.is_finite() && d > 0.0) {
            return Err(Error::Config(format!(
                "spacing_wavelengths must be positive, got {d}"
            )));
        }
        if d > 0.5 && !self.allow_grating_lobes {
            return Err(Error::Config(format!(
                "spacing_wavelengths {d} > 0.5 admits grating lobes; set allow_grating_lobes to override"
            )));
        }
        Ok(())
    }
}

/// Direction cosine `u = sin(θ)`, with `θ` measured from broadside.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct USpaceAngle(f64);

impl USpaceAngle {
    pub const BROADSIDE: USpaceAngle = USpaceAngle(0.0);

    pub fn new(u: f64) -> Result<Self> {
        if u.is_finite() && u.abs() <= 1.0 {
            Ok(Self(u))
        } else {
            Err(Error::Domain(format!("u = {u} outside [-1, 1]")))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for USpaceAngle {
    type Error = Error;

    fn try_from(u: f64) -> Result<Self> {
        Self::new(u)
    }
}

impl From<USpaceAngle> for f64 {
    fn from(u: USpaceAngle) -> f64 {
        u.0
    }
}

/// Unit-modulus complex weights, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    weights: Vec<Complex64>,
}

impl SteeringVector {
    /// Wraps weights after checking the unit-modulus invariant.
    pub fn from_weights(weights: Vec<Complex64>) -> Result<Self> {
        if let Some((n, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| (w.norm() - 1.0).abs() > UNIT_MODULUS_TOL)
        {
            return Err(Error::Contract(format!(
                "weight {n} has modulus {} (expected 1)",
                w.norm()
            )));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Per-element phases in `(−π, π]`.
    pub fn phases(&self) -> Vec<f64> {
        self.weights.iter().map(|w| w.arg()).collect()
    }

    pub(crate) fn from_phases(phases: impl IntoIterator<Item = f64>) -> Self {
        Self {
            weights: phases.into_iter().map(|p| Complex64::from_polar(1.0, p)).collect(),
        }
    }
}

pub fn u_from_theta(theta: f64) -> Result<USpaceAngle> {
    if !(theta.is_finite() && theta.abs() <= FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "theta = {theta} rad outside the visible region [-π/2, π/2]"
        )));
    }
    // sin(±π/2) is exactly ±1 in f64, so the result always validates.
    USpaceAngle::new(theta.sin())
}

pub fn theta_from_u(u: USpaceAngle) -> f64 {
    u.value().asin()
}

/// Steering vector toward `u`: `w[n] = exp(−j·2π·(d/λ)·n·u)`.
pub fn steering_vector(cfg: &UlaConfig, u: USpaceAngle) -> SteeringVector {
    steering_vector_raw(cfg, u.value())
}

/// Steering vector for any real `u`, including the invisible region `|u| > 1`
/// where the DFT grid continues periodically.
pub(crate) fn steering_vector_raw(cfg: &UlaConfig, u: f64) -> SteeringVector {
    let step = -2.0 * PI * cfg.spacing_wavelengths * u;
    SteeringVector::from_phases((0..cfg.n_elements).map(|n| step * n as f64))
}

/// `Σ_n conj(w[n])·exp(−j·2π·(d/λ)·n·u)`, the beamformer response toward `u`.
pub fn array_factor(cfg: &UlaConfig, weights: &SteeringVector, u: USpaceAngle) -> Result<Complex64> {
    if weights.len() != cfg.n_elements {
        return Err(Error::DimensionMismatch {
            expected: cfg.n_elements,
            got: weights.len(),
        });
    }
    Ok(array_factor_raw(cfg, weights.weights(), u.value()))
}

pub(crate) fn array_factor_raw(cfg: &UlaConfig, weights: &[Complex64], u: f64) -> Complex64 {
    let step = -2.0 * PI * cfg.spacing_wavelengths * u;
    weights
        .iter()
        .enumerate()
        .map(|(n, w)| w.conj() * Complex64::from_polar(1.0, step * n as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn cfg8() -> UlaConfig {
        UlaConfig::half_wavelength(8).unwrap()
    }

    fn u(x: f64) -> USpaceAngle {
        USpaceAngle::new(x).unwrap()
    }

    fn assert_vec_close(got: &SteeringVector, want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (n, (g, w)) in got.weights().iter().zip(want).enumerate() {
            assert!((g - w).norm() < tol, "element {n}: got {g}, want {w}");
        }
    }

    #[test]
    fn config_invariants() {
        assert!(UlaConfig::new(1, 0.5).is_err());
        assert!(UlaConfig::new(4, 0.0).is_err());
        assert!(UlaConfig::new(4, -0.1).is_err());
        assert!(UlaConfig::new(4, 0.7).is_err());
        assert!(UlaConfig::with_grating_lobes(4, 0.7).is_ok());
        assert!(UlaConfig::new(2, 0.25).is_ok());
    }

    #[test]
    fn theta_to_u() {
        assert_eq!(u_from_theta(0.0).unwrap().value(), 0.0);
        let u48 = u_from_theta(48.59_f64.to_radians()).unwrap().value();
        assert!((u48 - 0.75).abs() < 5e-5, "{u48}");
        assert_eq!(u_from_theta(-FRAC_PI_2).unwrap().value(), -1.0);
        assert!(u_from_theta(2.0).is_err());
        assert!(u_from_theta(f64::NAN).is_err());
    }

    #[test]
    fn u_to_theta() {
        assert_eq!(theta_from_u(u(0.0)), 0.0);
        let t = theta_from_u(u(0.75));
        assert!((t - 0.8481).abs() < 1e-4);
        assert!((t.to_degrees() - 48.59).abs() < 5e-3);
        assert_eq!(theta_from_u(u(-1.0)), -FRAC_PI_2);
        for t in [-FRAC_PI_2, FRAC_PI_2] {
            assert_eq!(theta_from_u(u_from_theta(t).unwrap()), t);
        }
        assert!(USpaceAngle::new(1.0 + 1e-9).is_err());
    }

    #[test]
    fn steering_matches_table_columns() {
        let c = Complex64::new;
        assert_vec_close(&steering_vector(&cfg8(), u(0.0)), &[c(1.0, 0.0); 8], 1e-12);
        let j = c(0.0, 1.0);
        let one = c(1.0, 0.0);
        assert_vec_close(
            &steering_vector(&cfg8(), u(-0.5)),
            &[one, j, -one, -j, one, j, -one, -j],
            1e-12,
        );
        assert_vec_close(
            &steering_vector(&cfg8(), u(-0.75)),
            &[
                one,
                c(-S, S),
                -j,
                c(S, S),
                -one,
                c(S, -S),
                j,
                c(-S, -S),
            ],
            1e-12,
        );
    }

    #[test]
    fn array_factor_examples() {
        let cfg = cfg8();
        let w = steering_vector(&cfg, u(0.25));
        assert!((array_factor(&cfg, &w, u(0.25)).unwrap().norm() - 8.0).abs() < 1e-12);

        let w0 = steering_vector(&cfg, u(0.0));
        assert!(array_factor(&cfg, &w0, u(0.25)).unwrap().norm() < 1e-10);

        // Closed-form Dirichlet kernel |sin(Nx)/sin(x)|, x = π·(d/λ)·u.
        let x = PI * 0.5 * 0.125;
        let dirichlet = ((8.0 * x).sin() / x.sin()).abs();
        let af = array_factor(&cfg, &w0, u(0.125)).unwrap().norm();
        assert!((af - dirichlet).abs() < 1e-12);
        assert!((af - 5.125_830_895_483_012).abs() < 1e-12);
    }

    #[test]
    fn array_factor_rejects_wrong_length() {
        let w = steering_vector(&UlaConfig::half_wavelength(4).unwrap(), u(0.0));
        assert_eq!(
            array_factor(&cfg8(), &w, u(0.0)),
            Err(Error::DimensionMismatch { expected: 8, got: 4 })
        );
    }

    #[test]
    fn from_weights_checks_modulus() {
        assert!(SteeringVector::from_weights(vec![Complex64::new(0.5, 0.0)]).is_err());
        assert!(SteeringVector::from_weights(vec![Complex64::new(0.0, -1.0)]).is_ok());
    }

    fn arb_cfg() -> impl Strategy<Value = UlaConfig> {
        (2usize..64, 0.05f64..=0.5).prop_map(|(n, d)| UlaConfig::new(n, d).unwrap())
    }

    proptest! {
        #[test]
        fn unit_modulus_and_reference(cfg in arb_cfg(), x in -1.0f64..=1.0) {
            let sv = steering_vector(&cfg, u(x));
            prop_assert_eq!(sv.weights()[0], Complex64::new(1.0, 0.0));
            for w in sv.weights() {
                prop_assert!((w.norm() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn conjugate_symmetry(cfg in arb_cfg(), x in -1.0f64..=1.0) {
            let a = steering_vector(&cfg, u(x));
            let b = steering_vector(&cfg, u(-x));
            for (p, q) in a.weights().iter().zip(b.weights()) {
                prop_assert!((p.conj() - q).norm() < 1e-12);
            }
        }

        #[test]
        fn self_gain_is_n(cfg in arb_cfg(), x in -1.0f64..=1.0) {
            let sv = steering_vector(&cfg, u(x));
            let g = array_factor(&cfg, &sv, u(x)).unwrap().norm();
            prop_assert!((g - cfg.n_elements as f64).abs() < 1e-10);
        }

        #[test]
        // asin is ill-conditioned at ±1: an f64 ulp in u maps to ~1e-8 rad
        // in θ, so the interior is checked at 1e-12 and the endpoints exactly.
        fn theta_round_trip(theta in (-FRAC_PI_2 + 1e-3)..=(FRAC_PI_2 - 1e-3)) {
            let back = theta_from_u(u_from_theta(theta).unwrap());
            prop_assert!((back - theta).abs() < 1e-12);
        }
    }
}
