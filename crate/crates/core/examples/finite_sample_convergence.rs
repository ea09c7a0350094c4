//! Blind SIMO estimation from sample covariances: error against the number
//! of observation windows at a few SNRs.

use subspace_ofdm::rxchain::{median, run_trial};
use subspace_ofdm::{CsiMode, SystemConfig};

fn main() {
    let windows = [25, 50, 100, 200, 500, 1000];
    print!("snr_db");
    for w in windows {
        print!("{w:>11}");
    }
    println!();
    for snr in [10.0, 20.0, 30.0] {
        print!("{snr:>6}");
        for w in windows {
            let errs: Vec<f64> = (0..9)
                .map(|seed| {
                    let mut cfg = SystemConfig::new(1, 2);
                    cfg.blocks_per_packet = 2 * w;
                    cfg.max_windows = Some(w);
                    cfg.seed = seed;
                    cfg.set_snr_db(snr);
                    run_trial(&cfg, CsiMode::Blind).unwrap().nmse
                })
                .collect();
            print!("{:>11.3e}", median(&errs));
        }
        println!();
    }
}
