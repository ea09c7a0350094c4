//! With a cyclic prefix at least as long as the channel, each OFDM block
//! sees a circulant channel that the DFT turns into per-tone gains.

use subspace_ofdm::linalg::max_abs;
use subspace_ofdm::sysmodel::{circulant_matrix, dft_matrix, freq_response};
use subspace_ofdm::Complex64;

fn main() {
    let k = 8;
    let h = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.5, -0.25),
        Complex64::new(0.0, 0.2),
    ];
    let f = dft_matrix(k).unwrap();
    let c = circulant_matrix(&h, k).unwrap();
    let d = &f * &c * f.adjoint();
    let resp = freq_response(&h, k).unwrap();

    println!("tone   diag(F C F^H)          H(k)");
    for (tone, r) in resp.iter().enumerate() {
        let v = d[(tone, tone)];
        println!("{tone:>4}   {:+.5} {:+.5}j   {:+.5} {:+.5}j", v.re, v.im, r.re, r.im);
    }
    let mut off = d.clone();
    off.fill_diagonal(Complex64::default());
    println!("largest off-diagonal magnitude: {:.2e}", max_abs(&off));
}
