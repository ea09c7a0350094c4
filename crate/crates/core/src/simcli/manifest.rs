use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rxchain::SweepGrid;

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    /// Seconds since the Unix epoch at run start.
    pub started_unix: u64,
    pub master_seed: u64,
    pub grid: SweepGrid,
}

impl RunManifest {
    pub fn new(grid: SweepGrid) -> Self {
        let started_unix = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        RunManifest {
            tool: super::tool_version(),
            started_unix,
            master_seed: grid.base.seed,
            grid,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut m: RunManifest = serde_json::from_str(text)
            .map_err(|e| Error::InvalidConfig(format!("manifest: {e}")))?;
        m.grid.base.seed = m.master_seed;
        Ok(m)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        super::csv::write_atomic(path, &self.to_json())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcli::parse_config;
    use proptest::prelude::*;

    const BASE: &str = "\
[system]
tx_antennas = 1
rx_antennas = 2
subcarriers = 8
cp_len = 2
constellation = QPSK
[channel]
pdp = exponential
pdp_decay = 1.7
[estimator]
taps = 2
smoothing = 2
max_windows = 10
[sweep]
snr_db = 0.1, 12.345678901234567, inf
doppler_fdT = 0, 0.013
seeds = 3
";

    #[test]
    fn round_trip_with_infinite_snr() {
        let m = RunManifest::new(parse_config(BASE).unwrap());
        let back = RunManifest::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    proptest! {
        #[test]
        fn round_trip_is_lossless(seed in any::<u64>(), snr in -50.0f64..80.0, fdt in 0.0f64..1.0, power in 1e-6f64..1e6) {
            let mut grid = parse_config(BASE).unwrap();
            grid.base.seed = seed;
            grid.base.signal_power = power;
            grid.snr_db = vec![snr, f64::INFINITY];
            grid.doppler_fdt = vec![fdt];
            let m = RunManifest::new(grid);
            let back = RunManifest::from_json(&m.to_json()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
