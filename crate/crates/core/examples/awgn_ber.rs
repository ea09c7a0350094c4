//! SISO 16-QAM over a flat AWGN channel against the closed-form Gray BER.

use subspace_ofdm::rxchain::run_trial;
use subspace_ofdm::{ChannelModel, CsiMode, Modulation, SystemConfig};

fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn main() {
    println!("snr_db  simulated    closed form");
    for snr_db in [6.0, 10.0, 14.0, 18.0] {
        let mut cfg = SystemConfig::new(1, 1);
        cfg.subcarriers = 64;
        cfg.cp_len = 1;
        cfg.chan_taps = 1;
        cfg.channel.taps = 1;
        cfg.channel.model = ChannelModel::Awgn;
        cfg.constellation = Modulation::Qam16;
        cfg.blocks_per_packet = 2000;
        cfg.max_windows = Some(64);
        cfg.set_snr_db(snr_db);
        let rec = run_trial(&cfg, CsiMode::Perfect).unwrap();
        let a = (3.0 * 10f64.powf(snr_db / 10.0) / 15.0).sqrt();
        let theory = (3.0 * q(a) + 2.0 * q(3.0 * a) - q(5.0 * a)) / 4.0;
        println!("{snr_db:>6}  {:.4e}   {theory:.4e}", rec.ber);
    }
}
