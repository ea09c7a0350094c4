//! Gray-mapped QPSK and 16-QAM: print the labelled points and push random
//! bits through modulate/demodulate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_ofdm::sysmodel::Constellation;
use subspace_ofdm::Modulation;

fn main() {
    for kind in [Modulation::Qpsk, Modulation::Qam16] {
        let c = Constellation::new(kind);
        println!("{kind:?}: {} bits/symbol", c.bits_per_symbol());
        for (idx, p) in c.points().iter().enumerate() {
            let label: String = c.label(idx).iter().map(|b| char::from(b'0' + b)).collect();
            println!("  {label}  {:+.4} {:+.4}j", p.re, p.im);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bits: Vec<u8> = (0..4000).map(|_| rng.random_range(0..2)).collect();
        let back = c.demodulate(&c.modulate(&bits).unwrap());
        println!("  round trip of {} bits exact: {}\n", bits.len(), back == bits);
    }
}
