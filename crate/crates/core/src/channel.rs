//! Frequency-selective Rayleigh channels, packet-level Doppler evolution,
//! the windowed block-Toeplitz filtering matrix and noisy transmission.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::WindowGeometry;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// `M_t × M_r` grid of `L`-tap impulse responses.
///
/// Taps are stored flat in the stacked-channel order used by the estimator:
/// tap index fastest, then receive antenna, then transmit antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    tx: usize,
    rx: usize,
    taps: usize,
    coeffs: Vec<Complex64>,
    pdp: Vec<f64>,
}

impl ChannelSet {
    /// Wraps a stacked channel vector. The power-delay profile is set uniform.
    pub fn from_vec(tx: usize, rx: usize, taps: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if tx == 0 || rx == 0 || taps == 0 {
            return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
        }
        if coeffs.len() != tx * rx * taps {
            return Err(Error::DimensionMismatch {
                context: "channel vector",
                expected: tx * rx * taps,
                actual: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::InvalidArgument("non-finite channel tap".into()));
        }
        Ok(ChannelSet {
            tx,
            rx,
            taps,
            coeffs,
            pdp: vec![1.0 / taps as f64; taps],
        })
    }

    /// Unit direct path on equal-index antenna pairs.
    pub fn identity(tx: usize, rx: usize, taps: usize) -> Self {
        let mut coeffs = vec![Complex64::default(); tx * rx * taps];
        for i in 0..tx.min(rx) {
            coeffs[(i * rx + i) * taps] = Complex64::new(1.0, 0.0);
        }
        let mut pdp = vec![0.0; taps];
        pdp[0] = 1.0;
        ChannelSet {
            tx,
            rx,
            taps,
            coeffs,
            pdp,
        }
    }

    pub fn tx(&self) -> usize {
        self.tx
    }

    pub fn rx(&self) -> usize {
        self.rx
    }

    pub fn taps(&self) -> usize {
        self.taps
    }

    pub fn pdp(&self) -> &[f64] {
        &self.pdp
    }

    /// Impulse response from tx `i` to rx `j`.
    pub fn path(&self, i: usize, j: usize) -> &[Complex64] {
        let start = (i * self.rx + j) * self.taps;
        &self.coeffs[start..start + self.taps]
    }

    /// Stacked channel vector.
    pub fn as_vec(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Copy truncated or zero-padded to `taps` taps per path.
    pub fn resized(&self, taps: usize) -> ChannelSet {
        let mut coeffs = Vec::with_capacity(self.tx * self.rx * taps);
        for i in 0..self.tx {
            for j in 0..self.rx {
                let p = self.path(i, j);
                coeffs.extend((0..taps).map(|l| p.get(l).copied().unwrap_or_default()));
            }
        }
        let pdp = (0..taps).map(|l| self.pdp.get(l).copied().unwrap_or(0.0)).collect();
        ChannelSet {
            tx: self.tx,
            rx: self.rx,
            taps,
            coeffs,
            pdp,
        }
    }

    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

fn check_pdp(pdp: &[f64]) -> Result<()> {
    if pdp.is_empty() {
        return Err(Error::InvalidArgument("empty power-delay profile".into()));
    }
    if pdp.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
        return Err(Error::InvalidArgument("power-delay profile entries must be >= 0".into()));
    }
    let total: f64 = pdp.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!(
            "power-delay profile sums to {total}, expected 1"
        )));
    }
    Ok(())
}

/// Independent Rayleigh taps, `h_{i,j}(l) ~ CN(0, pdp[l])`.
pub fn draw_channel<R: Rng + ?Sized>(
    rng: &mut R,
    tx: usize,
    rx: usize,
    pdp: &[f64],
) -> Result<ChannelSet> {
    check_pdp(pdp)?;
    if tx == 0 || rx == 0 {
        return Err(Error::InvalidArgument("antenna counts must be positive".into()));
    }
    let taps = pdp.len();
    let mut coeffs = Vec::with_capacity(tx * rx * taps);
    for _ in 0..tx * rx {
        coeffs.extend(pdp.iter().map(|&p| complex_gaussian(rng, p)));
    }
    Ok(ChannelSet {
        tx,
        rx,
        taps,
        coeffs,
        pdp: pdp.to_vec(),
    })
}

/// Bessel function of the first kind, order zero.
///
/// Power series up to `|x| = 16`, Hankel asymptotic expansion beyond.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= 16.0 {
        let q = -(x * x) / 4.0;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term.abs() < 1e-17 * sum.abs().max(1e-3) && k > q.abs().sqrt() {
                break;
            }
            k += 1.0;
        }
        sum
    } else {
        // P ~ Σ (-1)^k c_{2k} / x^{2k}, Q ~ -Σ (-1)^k c_{2k+1} / x^{2k+1},
        // c_m = Π_{i=1..m} (2i-1)^2 / (m! 8^m)
        let mut p = 0.0;
        let mut q = 0.0;
        let mut a = 1.0;
        let mut last = f64::MAX;
        for m in 0..60 {
            if m > 0 {
                let odd = (2 * m - 1) as f64;
                a *= odd * odd / (m as f64 * 8.0 * x);
            }
            if a.abs() > last {
                break;
            }
            last = a.abs();
            let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if m % 2 == 0 {
                p += sign * a;
            } else {
                q -= sign * a;
            }
            if a < 1e-18 {
                break;
            }
        }
        let chi = x - PI / 4.0;
        (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Packet-to-packet tap correlation `J0(2π f_d T)`.
pub fn doppler_rho(fdt: f64) -> f64 {
    bessel_j0(2.0 * PI * fdt)
}

/// First-order Gauss–Markov step `h' = ρ h + √(1-ρ²) w`, `w ~ CN(0, pdp)`.
pub fn evolve_channel<R: Rng + ?Sized>(ch: &ChannelSet, rho: f64, rng: &mut R) -> Result<ChannelSet> {
    if rho.is_nan() || rho.abs() > 1.0 {
        return Err(Error::InvalidArgument(format!("correlation {rho} outside [-1, 1]")));
    }
    let innovation = (1.0 - rho * rho).max(0.0).sqrt();
    let mut next = ch.clone();
    let taps = ch.taps;
    for (n, c) in next.coeffs.iter_mut().enumerate() {
        let w = complex_gaussian(rng, ch.pdp[n % taps]);
        *c = *c * rho + w * innovation;
    }
    Ok(next)
}

/// Windowed block-Toeplitz convolution matrix.
///
/// Shape `M_r·(J(K+P) − L) × M_t·J(K+P)`: block `(j, i)` maps the `J(K+P)`
/// samples sent on tx `i` to the outputs of rx `j` at times
/// `t ∈ [L, J(K+P))`, with `L` the geometry's (estimator) tap count.
pub fn filtering_matrix(ch: &ChannelSet, geom: &WindowGeometry) -> Result<CMatrix> {
    if ch.tx != geom.tx || ch.rx != geom.rx {
        return Err(Error::DimensionMismatch {
            context: "filtering_matrix antennas",
            expected: geom.tx * geom.rx,
            actual: ch.tx * ch.rx,
        });
    }
    let span = geom.span();
    let rows = geom.rows_per_rx();
    let mut h = CMatrix::zeros(geom.rx * rows, geom.tx * span);
    for i in 0..ch.tx {
        for j in 0..ch.rx {
            let path = ch.path(i, j);
            for r in 0..rows {
                let t = geom.taps + r;
                for (l, &c) in path.iter().enumerate() {
                    if l <= t {
                        h[(j * rows + r, i * span + t - l)] = c;
                    }
                }
            }
        }
    }
    Ok(h)
}

/// Complex AWGN with variance `σ_b²` per sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    variance: f64,
}

impl NoiseModel {
    pub fn new(variance: f64) -> Result<Self> {
        if !(variance >= 0.0 && variance.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise variance {variance}")));
        }
        Ok(NoiseModel { variance })
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }
}

/// Time-domain samples per receive antenna.
#[derive(Debug, Clone, PartialEq)]
pub struct RxStream {
    pub samples: Vec<Vec<Complex64>>,
}

impl RxStream {
    pub fn rx(&self) -> usize {
        self.samples.len()
    }

    pub fn len(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Linear convolution of every tx stream with its paths plus AWGN.
///
/// Inputs before `t = 0` are zero; the output has the input length. Noise is
/// always drawn, so the random stream consumed does not depend on the SNR.
pub fn transmit<R: Rng + ?Sized>(
    streams: &[Vec<Complex64>],
    ch: &ChannelSet,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<RxStream> {
    if streams.len() != ch.tx {
        return Err(Error::DimensionMismatch {
            context: "transmit streams",
            expected: ch.tx,
            actual: streams.len(),
        });
    }
    let n = streams[0].len();
    if let Some(bad) = streams.iter().find(|s| s.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "transmit stream length",
            expected: n,
            actual: bad.len(),
        });
    }
    if n < ch.taps {
        return Err(Error::InvalidArgument(format!(
            "stream of {n} samples shorter than {} taps",
            ch.taps
        )));
    }
    let mut samples = vec![vec![Complex64::default(); n]; ch.rx];
    for (j, out) in samples.iter_mut().enumerate() {
        for (i, s) in streams.iter().enumerate() {
            let path = ch.path(i, j);
            for (t, y) in out.iter_mut().enumerate() {
                let mut acc = Complex64::default();
                for (l, &c) in path.iter().enumerate().take(t + 1) {
                    acc += c * s[t - l];
                }
                *y += acc;
            }
        }
        for y in out.iter_mut() {
            *y += complex_gaussian(rng, noise.variance);
        }
    }
    Ok(RxStream { samples })
}
