//! 4x4 16-QAM sweep over SNR, estimator length and Doppler, read from the
//! bundled scenario file. Prints median BER/NMSE per SNR and L.
//!
//! `cargo run --release --example mimo_4x4_sweep [-- path/to/scenario.cfg]`

use std::collections::BTreeMap;
use std::path::PathBuf;

use subspace_ofdm::rxchain::{median, run_sweep};
use subspace_ofdm::simcli::load_grid;

fn main() {
    let path = std::env::args_os().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/mimo_4x4_qam16.cfg")
    });
    let grid = load_grid(&path).unwrap();
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let records: Vec<_> = run_sweep(&grid, jobs).unwrap().into_iter().filter_map(Result::ok).collect();

    let mut groups: BTreeMap<(i64, usize), Vec<_>> = BTreeMap::new();
    for r in &records {
        groups.entry((r.snr_db as i64, r.estimator_l)).or_default().push(r);
    }
    println!("snr_db  L   median BER   median NMSE");
    for ((snr, l), rs) in groups {
        let ber: Vec<f64> = rs.iter().map(|r| r.ber).collect();
        let nm: Vec<f64> = rs.iter().map(|r| r.nmse).collect();
        println!("{snr:>6} {l:>2}   {:.3e}    {:.3e}", median(&ber), median(&nm));
    }
}
