//! Monopulse beam tracking for sparse MIMO links with constant-modulus DFT
//! codebooks on uniform linear arrays.
//!
//! The pieces, bottom up:
//!
//! - [`array`]: steering vectors and array factors in u-space.
//! - [`codebook`]: orthogonal DFT codebooks, beam patterns, half-power
//!   beamwidths and phase-shifter quantization.
//! - [`channel`]: path-wise sparse channel and noisy RSSI measurement.
//! - [`monopulse`]: amplitude-comparison error from the neighbouring beams.
//! - [`tracker`]: exhaustive search seeding and the step-left/step-right
//!   tracking loop.
//! - [`mobility`]: user trajectories and the AoA stream they produce.
//! - [`sim`]: JSON configs and the experiment drivers behind the CLI.
//!
//! ```
//! use monopulse_track::array::{UlaConfig, USpaceAngle};
//! use monopulse_track::channel::ChannelState;
//! use monopulse_track::codebook::generate_codebook;
//! use monopulse_track::rng::rng_from_seed;
//! use monopulse_track::tracker::{track_until_converged, BeamPair, TrackerConfig};
//! use num_complex::Complex64;
//!
//! let ula = UlaConfig::half_wavelength(8).unwrap();
//! let cb = generate_codebook(&ula);
//! let ch = ChannelState::single_path(
//!     ula,
//!     ula,
//!     USpaceAngle::new(0.5).unwrap(),
//!     USpaceAngle::new(0.0).unwrap(),
//!     Complex64::new(1.0, 0.0),
//! )
//! .unwrap();
//! let cfg = TrackerConfig::for_beams(8);
//! let trace = track_until_converged(&ch, &cb, &cb, BeamPair { tx: 4, rx: 4 }, &cfg, &mut rng_from_seed(0)).unwrap();
//! let last = trace.last().unwrap();
//! assert!(last.converged);
//! assert_eq!(cb.mra_u()[last.rx_beam], 0.5);
//! ```

pub mod array;
pub mod channel;
pub mod codebook;
pub mod error;
pub mod mobility;
pub mod monopulse;
pub mod rng;
pub mod sim;
pub mod tracker;

pub use error::{Error, Result};
