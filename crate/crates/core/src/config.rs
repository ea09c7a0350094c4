//! Scenario parameters and their validity rules.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol alphabet on every subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK")]
    Qpsk,
    #[serde(rename = "QAM16")]
    Qam16,
}

/// Fading law for the channel taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelModel {
    /// Independent circularly-symmetric Gaussian taps.
    Rayleigh,
    /// Unit direct path between equal-index antennas, nothing else.
    Awgn,
}

/// Average tap powers, normalized to unit total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "shape")]
pub enum PowerDelayProfile {
    Uniform,
    /// `pdp[l] ∝ exp(-l / decay)`.
    Exponential { decay: f64 },
}

impl PowerDelayProfile {
    pub fn powers(&self, taps: usize) -> Vec<f64> {
        let raw: Vec<f64> = match *self {
            PowerDelayProfile::Uniform => vec![1.0; taps],
            PowerDelayProfile::Exponential { decay } => {
                (0..taps).map(|l| (-(l as f64) / decay).exp()).collect()
            }
        };
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|p| p / total).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EqualizerKind {
    Zf,
    Mmse,
}

/// Which channel knowledge feeds the equalizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsiMode {
    /// Blind estimate, ambiguity removed with the true channel.
    Blind,
    /// Blind estimate, ambiguity removed with one known block per packet.
    BlindPilot,
    /// True channel.
    Perfect,
}

macro_rules! keyword_enum {
    ($ty:ty, $what:literal, { $($text:literal => $variant:expr),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.trim() {
                    $(t if t.eq_ignore_ascii_case($text) => Ok($variant),)+
                    other => Err(Error::InvalidConfig(format!(
                        concat!("unknown ", $what, " '{}'"), other
                    ))),
                }
            }
        }
    };
}

keyword_enum!(Modulation, "constellation", { "QPSK" => Modulation::Qpsk, "QAM16" => Modulation::Qam16 });
keyword_enum!(ChannelModel, "channel model", { "rayleigh" => ChannelModel::Rayleigh, "awgn" => ChannelModel::Awgn });
keyword_enum!(EqualizerKind, "equalizer", { "zf" => EqualizerKind::Zf, "mmse" => EqualizerKind::Mmse });
keyword_enum!(CsiMode, "csi mode", {
    "blind" => CsiMode::Blind,
    "blind_pilot" => CsiMode::BlindPilot,
    "perfect" => CsiMode::Perfect,
});

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiMode::Blind => "blind",
            CsiMode::BlindPilot => "blind_pilot",
            CsiMode::Perfect => "perfect",
        })
    }
}

/// Propagation channel actually simulated (the estimator's tap count lives
/// in [`SystemConfig::chan_taps`] and may differ).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub model: ChannelModel,
    pub taps: usize,
    pub pdp: PowerDelayProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub tx_antennas: usize,
    pub rx_antennas: usize,
    pub subcarriers: usize,
    pub cp_len: usize,
    /// Tap count assumed by the estimator.
    pub chan_taps: usize,
    /// Number of consecutive OFDM blocks stacked per observation window.
    pub smoothing: usize,
    pub constellation: Modulation,
    pub signal_power: f64,
    pub noise_power: f64,
    /// Doppler spread normalized to the packet duration.
    pub doppler_fdt: f64,
    pub blocks_per_packet: usize,
    pub packets: usize,
    pub seed: u64,
    pub channel: ChannelProfile,
    /// Cap on windows averaged into the covariance; `None` uses all.
    pub max_windows: Option<usize>,
    pub equalizer: EqualizerKind,
}

impl SystemConfig {
    /// A small valid scenario, handy as a starting point.
    pub fn new(tx_antennas: usize, rx_antennas: usize) -> Self {
        SystemConfig {
            tx_antennas,
            rx_antennas,
            subcarriers: 8,
            cp_len: 2,
            chan_taps: 2,
            smoothing: 2,
            constellation: Modulation::Qam16,
            signal_power: 1.0,
            noise_power: 0.0,
            doppler_fdt: 0.0,
            blocks_per_packet: 64,
            packets: 1,
            seed: 0,
            channel: ChannelProfile {
                model: ChannelModel::Rayleigh,
                taps: 2,
                pdp: PowerDelayProfile::Uniform,
            },
            max_windows: None,
            equalizer: EqualizerKind::Zf,
        }
    }

    pub fn geometry(&self) -> WindowGeometry {
        WindowGeometry {
            tx: self.tx_antennas,
            rx: self.rx_antennas,
            subcarriers: self.subcarriers,
            cp_len: self.cp_len,
            smoothing: self.smoothing,
            taps: self.chan_taps,
        }
    }

    /// Sets the noise power from an SNR in dB (`+inf` gives a noiseless link).
    pub fn set_snr_db(&mut self, snr_db: f64) {
        self.noise_power = if snr_db == f64::INFINITY {
            0.0
        } else {
            self.signal_power / 10f64.powf(snr_db / 10.0)
        };
    }

    pub fn snr_db(&self) -> f64 {
        if self.noise_power == 0.0 {
            f64::INFINITY
        } else {
            10.0 * (self.signal_power / self.noise_power).log10()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return bad("antenna counts must be positive".into());
        }
        if self.subcarriers < 2 {
            return bad(format!("subcarriers = {} must be at least 2", self.subcarriers));
        }
        if self.cp_len < 1 || self.cp_len > self.subcarriers {
            return bad(format!(
                "cp_len = {} must lie in 1..={}",
                self.cp_len, self.subcarriers
            ));
        }
        if self.chan_taps < 1 || self.channel.taps < 1 {
            return bad("channel tap counts must be positive".into());
        }
        if self.cp_len < self.chan_taps {
            return bad(format!(
                "cp_len = {} shorter than estimator taps L = {}",
                self.cp_len, self.chan_taps
            ));
        }
        if self.cp_len < self.channel.taps {
            return bad(format!(
                "cp_len = {} shorter than channel taps = {}",
                self.cp_len, self.channel.taps
            ));
        }
        if self.smoothing < 1 {
            return bad("smoothing J must be positive".into());
        }
        if !(self.signal_power > 0.0 && self.signal_power.is_finite()) {
            return bad(format!("signal_power = {} must be positive", self.signal_power));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return bad(format!("noise_power = {} must be >= 0", self.noise_power));
        }
        if !(self.doppler_fdt >= 0.0 && self.doppler_fdt.is_finite()) {
            return bad(format!("doppler_fdT = {} must be >= 0", self.doppler_fdt));
        }
        if let PowerDelayProfile::Exponential { decay } = self.channel.pdp {
            if !(decay > 0.0 && decay.is_finite()) {
                return bad(format!("pdp decay = {decay} must be positive"));
            }
        }
        if self.packets == 0 {
            return bad("packets must be positive".into());
        }
        let min_blocks = self.smoothing.max(2);
        if self.blocks_per_packet < min_blocks {
            return bad(format!(
                "blocks_per_packet = {} must be at least {} (one pilot, one data block, one window)",
                self.blocks_per_packet, min_blocks
            ));
        }
        if self.max_windows == Some(0) {
            return bad("max_windows must be positive".into());
        }
        self.geometry().check_noise_dim()
    }
}

/// Dimensions of one observation window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WindowGeometry {
    pub tx: usize,
    pub rx: usize,
    pub subcarriers: usize,
    pub cp_len: usize,
    pub smoothing: usize,
    /// Estimator tap count `L`; also the number of leading samples dropped
    /// per receive antenna.
    pub taps: usize,
}

impl WindowGeometry {
    pub fn block_len(&self) -> usize {
        self.subcarriers + self.cp_len
    }

    /// Transmitted samples per antenna covered by one window, `J(K+P)`.
    pub fn span(&self) -> usize {
        self.smoothing * self.block_len()
    }

    /// Kept samples per receive antenna, `J(K+P) - L`.
    pub fn rows_per_rx(&self) -> usize {
        self.span() - self.taps
    }

    pub fn window_len(&self) -> usize {
        self.rx * self.rows_per_rx()
    }

    /// Rank of the noiseless covariance, `J K M_t`.
    pub fn signal_dim(&self) -> usize {
        self.smoothing * self.subcarriers * self.tx
    }

    /// `g = J K (M_r - M_t) + J P M_r - L M_r`, possibly non-positive.
    pub fn noise_dim(&self) -> i64 {
        let (j, k, p, l) = (
            self.smoothing as i64,
            self.subcarriers as i64,
            self.cp_len as i64,
            self.taps as i64,
        );
        let (mt, mr) = (self.tx as i64, self.rx as i64);
        j * k * (mr - mt) + j * p * mr - l * mr
    }

    /// Length of the stacked channel vector, `M_t M_r L`.
    pub fn channel_len(&self) -> usize {
        self.tx * self.rx * self.taps
    }

    pub fn check_noise_dim(&self) -> Result<()> {
        if self.taps > self.span() {
            return Err(Error::InvalidConfig(format!(
                "taps L = {} exceed window span J(K+P) = {}",
                self.taps,
                self.span()
            )));
        }
        let g = self.noise_dim();
        if g < 1 {
            return Err(Error::InvalidConfig(format!(
                "noise subspace empty: g = J·K·(M_r−M_t) + J·P·M_r − L·M_r = \
                 {j}·{k}·({mr}−{mt}) + {j}·{p}·{mr} − {l}·{mr} = {g} < 1",
                j = self.smoothing,
                k = self.subcarriers,
                p = self.cp_len,
                l = self.taps,
                mr = self.rx,
                mt = self.tx,
            )));
        }
        Ok(())
    }
}
