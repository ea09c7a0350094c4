//! MIMO-OFDM link simulation with blind channel identification from
//! second-order statistics.
//!
//! The crate is layered bottom-up:
//!
//! - [`sysmodel`]: constellations, DFT/circulant algebra, OFDM modulation and
//!   the CP precoder.
//! - [`channel`]: Rayleigh FIR channels, packet-level Doppler evolution, the
//!   block-Toeplitz filtering matrix and noisy transmission.
//! - [`estimator`]: windowing, sample covariance, eigendecomposition, noise
//!   subspace, the quadratic cost in the channel taps and its unit-norm
//!   minimizer.
//! - [`rxchain`]: CP removal, per-tone ZF/MMSE equalization, NMSE/BER metrics
//!   and the Monte Carlo trial/sweep drivers.
//! - [`simcli`]: config files, run manifests, CSV output and the command-line
//!   runner.

pub mod channel;
pub mod config;
mod error;
pub mod estimator;
pub mod linalg;
pub mod rxchain;
pub mod simcli;
pub mod sysmodel;

pub use config::{
    ChannelModel, ChannelProfile, CsiMode, EqualizerKind, Modulation, PowerDelayProfile,
    SystemConfig, WindowGeometry,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
