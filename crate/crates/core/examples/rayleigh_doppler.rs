//! Packet-to-packet Rayleigh fading: the AR(1) correlation follows the
//! Bessel J0 Doppler autocorrelation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use subspace_ofdm::channel::{doppler_rho, draw_channel, evolve_channel};

fn main() {
    let pdp = [0.6, 0.3, 0.1];
    let trials = 20_000;
    println!("fdT      rho=J0(2pi fdT)   measured");
    for fdt in [0.0, 0.01, 0.05, 0.1, 0.2, 0.3827] {
        let rho = doppler_rho(fdt);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut acc = 0.0;
        let mut energy = 0.0;
        for _ in 0..trials {
            let a = draw_channel(&mut rng, 1, 1, &pdp).unwrap();
            let b = evolve_channel(&a, rho, &mut rng).unwrap();
            acc += a.as_vec().iter().zip(b.as_vec()).map(|(x, y)| (x.conj() * y).re).sum::<f64>();
            energy += a.energy();
        }
        println!("{fdt:<8} {rho:>+.5}          {:>+.5}", acc / energy);
    }
}
