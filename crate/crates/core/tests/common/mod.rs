#![allow(dead_code)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use subspace_ofdm::channel::complex_gaussian;
use subspace_ofdm::WindowGeometry;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n).map(|_| complex_gaussian(rng, 1.0)).collect()
}

/// Random geometry with M_t ≤ M_r ≤ 4, K ≤ 16, J ≤ 3, L ≤ P ≤ K.
pub fn random_geometry(rng: &mut ChaCha8Rng) -> WindowGeometry {
    let rx = rng.random_range(1..=4);
    let tx = rng.random_range(1..=rx);
    let subcarriers = rng.random_range(2..=16);
    let cp_len = rng.random_range(1..=subcarriers.min(6));
    let taps = rng.random_range(1..=cp_len);
    let smoothing = rng.random_range(1..=3);
    WindowGeometry {
        tx,
        rx,
        subcarriers,
        cp_len,
        smoothing,
        taps,
    }
}

/// Direct linear convolution of one path, zero history.
pub fn convolve(h: &[Complex64], s: &[Complex64]) -> Vec<Complex64> {
    (0..s.len())
        .map(|t| {
            let mut acc = Complex64::default();
            for (l, c) in h.iter().enumerate() {
                if l <= t {
                    acc += c * s[t - l];
                }
            }
            acc
        })
        .collect()
}
