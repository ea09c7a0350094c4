//! Feed the analytic received covariance to the blind estimator and compare
//! against the true channel, for SIMO and for a 2x4 MIMO link.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subspace_ofdm::channel::draw_channel;
use subspace_ofdm::estimator::{
    estimate_from_covariance, exact_covariance, resolve_ambiguity, AmbiguityMode, AmbiguityReference,
};
use subspace_ofdm::rxchain::nmse;
use subspace_ofdm::sysmodel::Precoder;
use subspace_ofdm::WindowGeometry;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let pre = Precoder::new(8, 2, 2).unwrap();
    for (tx, rx) in [(1, 2), (1, 4), (2, 4)] {
        let geom = WindowGeometry {
            tx,
            rx,
            subcarriers: 8,
            cp_len: 2,
            smoothing: 2,
            taps: 2,
        };
        let ch = draw_channel(&mut rng, tx, rx, &[0.5, 0.5]).unwrap();
        let cov = exact_covariance(&ch, &pre, &geom, 1.0, 0.01).unwrap();
        let out = estimate_from_covariance(&cov, &pre, &geom).unwrap();
        let aligned = resolve_ambiguity(
            &out.estimate,
            AmbiguityReference::Truth(ch.as_vec()),
            AmbiguityMode::OracleSubspace,
            &geom,
        )
        .unwrap();
        println!(
            "{tx}x{rx}: noise dim {}, null-space multiplicity {}, aligned NMSE {:.2e}",
            out.noise.dim,
            out.estimate.multiplicity,
            nmse(&aligned.channel, ch.as_vec()).unwrap()
        );
    }
}
