//! Run a small sweep in-process and write the CSV and manifest the CLI
//! would produce.

use subspace_ofdm::rxchain::run_sweep;
use subspace_ofdm::simcli::{parse_config, render_csv, RunManifest};

const SCENARIO: &str = "
[system]
tx_antennas = 1
rx_antennas = 3
subcarriers = 8
cp_len = 2
constellation = QPSK
blocks_per_packet = 100

[estimator]
taps = 2
smoothing = 2

[sweep]
snr_db = 5, 15, 25
seeds = 3
";

fn main() {
    let grid = parse_config(SCENARIO).unwrap();
    let records: Vec<_> = run_sweep(&grid, 1).unwrap().into_iter().map(Result::unwrap).collect();
    print!("{}", render_csv(&records));
    println!("\n{}", RunManifest::new(grid).to_json());
}
