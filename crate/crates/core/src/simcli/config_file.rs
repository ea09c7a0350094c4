//! Sectioned `key = value` scenario files.
//!
//! ```text
//! # comment
//! [system]
//! tx_antennas = 4
//! ...
//! [sweep]
//! snr_db = 0, 5, 10
//! ```
//!
//! | section       | key                 | default                         |
//! |---------------|---------------------|---------------------------------|
//! | `[system]`    | `tx_antennas`       | required                        |
//! |               | `rx_antennas`       | required                        |
//! |               | `subcarriers`       | required                        |
//! |               | `cp_len`            | required                        |
//! |               | `constellation`     | required (`QPSK`, `QAM16`)      |
//! |               | `signal_power`      | `1`                             |
//! |               | `blocks_per_packet` | `64`                            |
//! |               | `packets`           | `1`                             |
//! |               | `seed`              | `0` (master seed)               |
//! | `[channel]`   | `model`             | `rayleigh` (`awgn`)             |
//! |               | `taps`              | follows the estimator taps      |
//! |               | `pdp`               | `uniform` (`exponential`)       |
//! |               | `pdp_decay`         | `1` (exponential only)          |
//! |               | `doppler_fdT`       | `0`                             |
//! | `[estimator]` | `taps`              | required                        |
//! |               | `smoothing`         | required                        |
//! |               | `max_windows`       | all windows                     |
//! |               | `equalizer`         | `zf` (`mmse`)                   |
//! |               | `csi_mode`          | `blind_pilot` (`blind`, `perfect`) |
//! | `[sweep]`     | `snr_db`            | required, list (`inf` allowed)  |
//! |               | `taps`              | `[estimator] taps`, list        |
//! |               | `doppler_fdT`       | `[channel] doppler_fdT`, list   |
//! |               | `seeds`             | `1`                             |

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::config::{
    ChannelModel, ChannelProfile, CsiMode, EqualizerKind, Modulation, PowerDelayProfile,
    SystemConfig,
};
use crate::error::{Error, Result};
use crate::rxchain::SweepGrid;

const SCHEMA: &[(&str, &[&str])] = &[
    (
        "system",
        &[
            "tx_antennas",
            "rx_antennas",
            "subcarriers",
            "cp_len",
            "constellation",
            "signal_power",
            "blocks_per_packet",
            "packets",
            "seed",
        ],
    ),
    ("channel", &["model", "taps", "pdp", "pdp_decay", "doppler_fdT"]),
    ("estimator", &["taps", "smoothing", "max_windows", "equalizer", "csi_mode"]),
    ("sweep", &["snr_db", "taps", "doppler_fdT", "seeds"]),
];

struct Entry {
    value: String,
    line: usize,
}

struct Document {
    entries: BTreeMap<(String, String), Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut section: Option<&str> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Parse {
                        line,
                        message: format!("malformed section header '{content}'"),
                    })?
                    .trim();
                let known = SCHEMA.iter().find(|(s, _)| *s == name).ok_or_else(|| Error::Parse {
                    line,
                    message: format!("unknown section [{name}]"),
                })?;
                section = Some(known.0);
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected key = value, got '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section.ok_or_else(|| Error::Parse {
                line,
                message: format!("key '{key}' outside any section"),
            })?;
            let keys = SCHEMA.iter().find(|(s, _)| *s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !keys.contains(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key '{key}' in section [{sec}]"),
                });
            }
            let slot = (sec.to_string(), key.to_string());
            if let Some(prev) = entries.get(&slot) {
                return Err(Error::Parse {
                    line,
                    message: format!(
                        "duplicate key '{key}' in section [{sec}] (first set on line {})",
                        prev.line
                    ),
                });
            }
            entries.insert(
                slot,
                Entry {
                    value: value.to_string(),
                    line,
                },
            );
        }
        Ok(Document { entries })
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_string(), key.to_string()))
    }

    fn get<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.raw(section, key) {
            None => Ok(None),
            Some(e) => e.value.parse::<T>().map(Some).map_err(|err| Error::Parse {
                line: e.line,
                message: format!("bad value '{}' for {key}: {err}", e.value),
            }),
        }
    }

    fn require<T: FromStr>(&self, section: &str, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)?.ok_or_else(|| {
            Error::InvalidConfig(format!("missing required key '{key}' in section [{section}]"))
        })
    }

    fn list<T: FromStr>(&self, section: &str, key: &str) -> Result<Option<Vec<T>>>
    where
        T::Err: std::fmt::Display,
    {
        let Some(e) = self.raw(section, key) else {
            return Ok(None);
        };
        e.value
            .split(',')
            .map(|item| {
                let item = item.trim();
                item.parse::<T>().map_err(|err| Error::Parse {
                    line: e.line,
                    message: format!("bad list item '{item}' for {key}: {err}"),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

/// Parses and fully validates a scenario file (every grid cell is checked).
pub fn parse_config(text: &str) -> Result<SweepGrid> {
    let doc = Document::parse(text)?;

    let tx_antennas = doc.require("system", "tx_antennas")?;
    let rx_antennas = doc.require("system", "rx_antennas")?;
    let subcarriers = doc.require("system", "subcarriers")?;
    let cp_len = doc.require("system", "cp_len")?;
    let constellation: Modulation = doc.require("system", "constellation")?;
    let chan_taps: usize = doc.require("estimator", "taps")?;
    let smoothing = doc.require("estimator", "smoothing")?;
    let snr_db: Vec<f64> = doc
        .list("sweep", "snr_db")?
        .ok_or_else(|| Error::InvalidConfig("missing required key 'snr_db' in section [sweep]".into()))?;

    let pdp = match doc.get::<String>("channel", "pdp")?.as_deref() {
        None | Some("uniform") => PowerDelayProfile::Uniform,
        Some("exponential") => PowerDelayProfile::Exponential {
            decay: doc.get("channel", "pdp_decay")?.unwrap_or(1.0),
        },
        Some(other) => {
            return Err(Error::InvalidConfig(format!("unknown power-delay profile '{other}'")))
        }
    };
    let true_taps: Option<usize> = doc.get("channel", "taps")?;

    let base = SystemConfig {
        tx_antennas,
        rx_antennas,
        subcarriers,
        cp_len,
        chan_taps,
        smoothing,
        constellation,
        signal_power: doc.get("system", "signal_power")?.unwrap_or(1.0),
        noise_power: 0.0,
        doppler_fdt: doc.get("channel", "doppler_fdT")?.unwrap_or(0.0),
        blocks_per_packet: doc.get("system", "blocks_per_packet")?.unwrap_or(64),
        packets: doc.get("system", "packets")?.unwrap_or(1),
        seed: doc.get("system", "seed")?.unwrap_or(0),
        channel: ChannelProfile {
            model: doc.get::<ChannelModel>("channel", "model")?.unwrap_or(ChannelModel::Rayleigh),
            taps: true_taps.unwrap_or(chan_taps),
            pdp,
        },
        max_windows: doc.get("estimator", "max_windows")?,
        equalizer: doc.get::<EqualizerKind>("estimator", "equalizer")?.unwrap_or(EqualizerKind::Zf),
    };
    let grid = SweepGrid {
        base,
        csi_mode: doc.get::<CsiMode>("estimator", "csi_mode")?.unwrap_or(CsiMode::BlindPilot),
        snr_db,
        taps: doc.list("sweep", "taps")?.unwrap_or_default(),
        doppler_fdt: doc.list("sweep", "doppler_fdT")?.unwrap_or_default(),
        seeds: doc.get("sweep", "seeds")?.unwrap_or(1),
        true_taps,
    };
    grid.cells()?;
    Ok(grid)
}
