//! A 2x2 blind estimate is only known up to a 2x2 mixing of the transmit
//! streams: a single scalar cannot align it, the subspace fit and a pilot
//! block can.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subspace_ofdm::channel::draw_channel;
use subspace_ofdm::estimator::{
    estimate_from_covariance, exact_covariance, resolve_ambiguity, AmbiguityMode, AmbiguityReference,
};
use subspace_ofdm::rxchain::{nmse, run_trial};
use subspace_ofdm::sysmodel::Precoder;
use subspace_ofdm::{CsiMode, SystemConfig, WindowGeometry};

fn main() {
    let geom = WindowGeometry {
        tx: 2,
        rx: 3,
        subcarriers: 8,
        cp_len: 2,
        smoothing: 2,
        taps: 2,
    };
    let pre = Precoder::new(8, 2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = draw_channel(&mut rng, 2, 3, &[0.5, 0.5]).unwrap();
    let cov = exact_covariance(&ch, &pre, &geom, 1.0, 0.0).unwrap();
    let est = estimate_from_covariance(&cov, &pre, &geom).unwrap().estimate;
    let weakest: Vec<String> = est.spectrum[..6].iter().map(|v| format!("{v:.2e}")).collect();
    println!("smallest eigenvalues of Q: {}", weakest.join(", "));
    for mode in [AmbiguityMode::OracleScalar, AmbiguityMode::OracleSubspace] {
        let a = resolve_ambiguity(&est, AmbiguityReference::Truth(ch.as_vec()), mode, &geom).unwrap();
        println!("{mode:?}: NMSE {:.2e}", nmse(&a.channel, ch.as_vec()).unwrap());
    }

    let mut cfg = SystemConfig::new(2, 3);
    cfg.blocks_per_packet = 400;
    cfg.set_snr_db(25.0);
    for mode in [CsiMode::Perfect, CsiMode::BlindPilot] {
        let rec = run_trial(&cfg, mode).unwrap();
        println!("{mode} at 25 dB: BER {:.3e}", rec.ber);
    }
}
