//! Deterministic signal model: constellations, the unitary DFT, OFDM
//! modulation with a cyclic prefix, the block precoder and the
//! circulant/frequency-response view of an FIR channel.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::config::Modulation;
use crate::error::{Error, Result};
use crate::linalg::{cis, kron_identity, CMatrix, CVector};

/// Gray-labelled square constellation with unit average energy.
///
/// `points[k]` carries the label `k` read as a big-endian bit pattern, so the
/// point index and its label coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    bits_per_symbol: usize,
}

/// Per-axis Gray levels before normalization.
fn gray_level(bits: u32, width: usize) -> f64 {
    match (width, bits) {
        (1, 0) => -1.0,
        (1, 1) => 1.0,
        (2, 0b00) => -3.0,
        (2, 0b01) => -1.0,
        (2, 0b11) => 1.0,
        (2, 0b10) => 3.0,
        _ => unreachable!("unsupported axis width"),
    }
}

impl Constellation {
    pub fn new(kind: Modulation) -> Self {
        let (axis_bits, norm) = match kind {
            Modulation::Qpsk => (1usize, 2f64.sqrt()),
            Modulation::Qam16 => (2usize, 10f64.sqrt()),
        };
        let bits_per_symbol = 2 * axis_bits;
        let mask = (1u32 << axis_bits) - 1;
        let points = (0..1u32 << bits_per_symbol)
            .map(|label| {
                let i = gray_level(label >> axis_bits, axis_bits);
                let q = gray_level(label & mask, axis_bits);
                Complex64::new(i, q) / norm
            })
            .collect();
        Constellation {
            points,
            bits_per_symbol,
        }
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// Bit label of point `index`, most significant bit first.
    pub fn label(&self, index: usize) -> Vec<u8> {
        (0..self.bits_per_symbol)
            .rev()
            .map(|b| ((index >> b) & 1) as u8)
            .collect()
    }

    /// Maps bit groups (values 0/1) to points.
    pub fn modulate(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::InvalidArgument(format!(
                "{} bits is not a multiple of {} bits per symbol",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        bits.chunks(self.bits_per_symbol)
            .map(|group| {
                let mut index = 0usize;
                for &b in group {
                    if b > 1 {
                        return Err(Error::InvalidArgument(format!("bit value {b}")));
                    }
                    index = (index << 1) | b as usize;
                }
                Ok(self.points[index])
            })
            .collect()
    }

    /// Index of the nearest point; near-exact ties go to the lower index.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (k, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d * (1.0 - 1e-12) - 1e-300 {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Hard-decision demapping.
    pub fn demodulate(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut bits = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &z in symbols {
            let k = self.nearest(z);
            bits.extend((0..self.bits_per_symbol).rev().map(|b| ((k >> b) & 1) as u8));
        }
        bits
    }
}

/// Unitary DFT matrix, `F[a][b] = exp(-2πj·a·b/K) / √K` (0-indexed).
pub fn dft_matrix(k: usize) -> Result<CMatrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("DFT size must be positive".into()));
    }
    let scale = 1.0 / (k as f64).sqrt();
    Ok(CMatrix::from_fn(k, k, |a, b| {
        // reduce the exponent first so large K keeps full phase accuracy
        let e = (a * b) % k;
        cis(-2.0 * PI * e as f64 / k as f64) * scale
    }))
}

/// `x = F^H d`, emitted as `[x[K-P..K], x]`.
pub fn ofdm_modulate(d: &[Complex64], dft: &CMatrix, cp_len: usize) -> Result<Vec<Complex64>> {
    let k = dft.nrows();
    if d.len() != k {
        return Err(Error::DimensionMismatch {
            context: "ofdm_modulate symbols",
            expected: k,
            actual: d.len(),
        });
    }
    if cp_len > k {
        return Err(Error::InvalidArgument(format!(
            "cyclic prefix {cp_len} longer than block {k}"
        )));
    }
    let x = dft.adjoint() * CVector::from_column_slice(d);
    let mut out = Vec::with_capacity(k + cp_len);
    out.extend(x.iter().skip(k - cp_len));
    out.extend(x.iter());
    Ok(out)
}

/// IFFT-plus-CP operator for one block and its `J`-fold block-diagonal
/// extension.
#[derive(Debug, Clone)]
pub struct Precoder {
    /// Unitary `K×K` DFT.
    pub dft: CMatrix,
    /// `(K+P)×K`: rows `0..P` repeat the last `P` rows of `F^H`.
    pub block: CMatrix,
    /// `J(K+P)×JK`, `I_J ⊗ block`.
    pub stacked: CMatrix,
    pub cp_len: usize,
    pub smoothing: usize,
}

impl Precoder {
    pub fn new(subcarriers: usize, cp_len: usize, smoothing: usize) -> Result<Self> {
        if cp_len > subcarriers {
            return Err(Error::InvalidArgument(format!(
                "cyclic prefix {cp_len} longer than block {subcarriers}"
            )));
        }
        if smoothing == 0 {
            return Err(Error::InvalidArgument("smoothing must be positive".into()));
        }
        let dft = dft_matrix(subcarriers)?;
        let idft = dft.adjoint();
        let k = subcarriers;
        let block = CMatrix::from_fn(k + cp_len, k, |r, c| {
            if r < cp_len {
                idft[(k - cp_len + r, c)]
            } else {
                idft[(r - cp_len, c)]
            }
        });
        let stacked = kron_identity(smoothing, &block);
        Ok(Precoder {
            dft,
            block,
            stacked,
            cp_len,
            smoothing,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.dft.nrows()
    }
}

/// Unnormalized DFT of the zero-padded taps: `H(k) = Σ_l h(l)·e^{-2πjkl/K}`.
pub fn freq_response(h: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    if h.len() > k {
        return Err(Error::InvalidArgument(format!(
            "{} taps do not fit a {k}-point DFT",
            h.len()
        )));
    }
    Ok((0..k)
        .map(|tone| {
            h.iter()
                .enumerate()
                .map(|(l, &c)| c * cis(-2.0 * PI * ((tone * l) % k) as f64 / k as f64))
                .sum()
        })
        .collect())
}

/// Circular-convolution matrix, entry `(a, b) = h⁰[(a - b) mod K]`.
pub fn circulant_matrix(h: &[Complex64], k: usize) -> Result<CMatrix> {
    if h.len() > k {
        return Err(Error::InvalidArgument(format!(
            "{} taps do not fit a {k}×{k} circulant",
            h.len()
        )));
    }
    Ok(CMatrix::from_fn(k, k, |a, b| {
        let idx = (a + k - b) % k;
        h.get(idx).copied().unwrap_or_default()
    }))
}

/// Per-subcarrier `M_r×M_t` channel matrices; entry `(j, i)` of tone `k` is
/// the response of the path from tx `i` to rx `j`.
pub fn per_tone_channel(ch: &ChannelSet, k: usize) -> Result<Vec<CMatrix>> {
    let (mt, mr) = (ch.tx(), ch.rx());
    let mut tones = vec![CMatrix::zeros(mr, mt); k];
    for i in 0..mt {
        for j in 0..mr {
            for (tone, v) in freq_response(ch.path(i, j), k)?.into_iter().enumerate() {
                tones[tone][(j, i)] = v;
            }
        }
    }
    Ok(tones)
}

/// One OFDM block in the frequency domain: `grid[i][k]` is the symbol on
/// subcarrier `k` of tx antenna `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolBlock {
    pub grid: Vec<Vec<Complex64>>,
}

impl SymbolBlock {
    pub fn tx(&self) -> usize {
        self.grid.len()
    }

    pub fn subcarriers(&self) -> usize {
        self.grid.first().map_or(0, Vec::len)
    }
}
