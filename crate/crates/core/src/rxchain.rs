//! Receiver side and Monte Carlo drivers: CP removal and DFT, per-tone
//! equalization, NMSE/BER, single trials and parameter sweeps.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{doppler_rho, draw_channel, evolve_channel, transmit, ChannelSet, NoiseModel};
use crate::config::{ChannelModel, CsiMode, EqualizerKind, SystemConfig};
use crate::error::{Error, Result};
use crate::estimator::{
    estimate_from_covariance, extract_windows, resolve_ambiguity, sample_covariance,
    scalar_align, AmbiguityMode, AmbiguityReference, BlindOutcome, PilotObservation,
};
use crate::linalg::{CMatrix, CVector};
use crate::sysmodel::{ofdm_modulate, per_tone_channel, Constellation, Precoder, SymbolBlock};

/// Drops the cyclic prefix and applies the unitary DFT.
pub fn ofdm_demodulate_block(rx_block: &[Complex64], dft: &CMatrix, cp_len: usize) -> Result<Vec<Complex64>> {
    let k = dft.nrows();
    if rx_block.len() != k + cp_len {
        return Err(Error::DimensionMismatch {
            context: "ofdm_demodulate_block",
            expected: k + cp_len,
            actual: rx_block.len(),
        });
    }
    let y = dft * CVector::from_column_slice(&rx_block[cp_len..]);
    Ok(y.iter().copied().collect())
}

/// Per-tone linear equalizer, precomputed for a fixed channel.
#[derive(Debug, Clone)]
pub struct Equalizer {
    filters: Vec<CMatrix>,
}

impl Equalizer {
    /// `noise_ratio` is `σ_b² / σ_s²`; ignored by ZF.
    pub fn new(chan: &[CMatrix], method: EqualizerKind, noise_ratio: f64) -> Result<Self> {
        let filters = chan
            .iter()
            .enumerate()
            .map(|(tone, h)| {
                let (mr, mt) = h.shape();
                let svd = h.clone().svd(false, false);
                let smax = svd.singular_values.max();
                let smin = svd.singular_values.min();
                let full_rank = mr >= mt && smax > 0.0 && smin > 1e-12 * smax;
                match method {
                    EqualizerKind::Zf => {
                        if !full_rank {
                            return Err(Error::RankDeficientTone { tone });
                        }
                        let gram = h.adjoint() * h;
                        let inv = gram
                            .try_inverse()
                            .ok_or(Error::RankDeficientTone { tone })?;
                        Ok(inv * h.adjoint())
                    }
                    EqualizerKind::Mmse => {
                        let reg = h.adjoint() * h
                            + CMatrix::identity(mt, mt) * Complex64::new(noise_ratio, 0.0);
                        let inv = reg.try_inverse().ok_or(Error::RankDeficientTone { tone })?;
                        Ok(inv * h.adjoint())
                    }
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Equalizer { filters })
    }

    pub fn apply(&self, tones: &[CVector]) -> Result<Vec<CVector>> {
        if tones.len() != self.filters.len() {
            return Err(Error::DimensionMismatch {
                context: "equalizer tones",
                expected: self.filters.len(),
                actual: tones.len(),
            });
        }
        tones
            .iter()
            .zip(&self.filters)
            .map(|(y, g)| {
                if y.len() != g.ncols() {
                    return Err(Error::DimensionMismatch {
                        context: "equalizer rx antennas",
                        expected: g.ncols(),
                        actual: y.len(),
                    });
                }
                Ok(g * y)
            })
            .collect()
    }
}

/// ZF: `pinv(H) y`; MMSE: `(H^H H + (σ_b²/σ_s²) I)^{-1} H^H y`, per tone.
pub fn equalize(
    tones: &[CVector],
    chan: &[CMatrix],
    method: EqualizerKind,
    noise_ratio: f64,
) -> Result<Vec<CVector>> {
    Equalizer::new(chan, method, noise_ratio)?.apply(tones)
}

/// `‖α·est − truth‖² / ‖truth‖²` with the least-squares scalar `α`.
pub fn nmse(est: &[Complex64], truth: &[Complex64]) -> Result<f64> {
    let energy: f64 = truth.iter().map(|z| z.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::InvalidArgument("NMSE against an all-zero channel".into()));
    }
    let aligned = scalar_align(est, truth)?;
    let err: f64 = aligned
        .channel
        .iter()
        .zip(truth)
        .map(|(a, t)| (a - t).norm_sqr())
        .sum();
    Ok(err / energy)
}

/// Fraction of differing bits.
pub fn ber(tx_bits: &[u8], rx_bits: &[u8]) -> Result<f64> {
    if tx_bits.len() != rx_bits.len() {
        return Err(Error::DimensionMismatch {
            context: "ber",
            expected: tx_bits.len(),
            actual: rx_bits.len(),
        });
    }
    if tx_bits.is_empty() {
        return Err(Error::InvalidArgument("BER of an empty sequence".into()));
    }
    let errors = tx_bits.iter().zip(rx_bits).filter(|(a, b)| a != b).count();
    Ok(errors as f64 / tx_bits.len() as f64)
}

/// One Monte Carlo outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub snr_db: f64,
    pub packets: usize,
    pub windows_used: usize,
    pub nmse: f64,
    pub ber: f64,
    pub residual: f64,
    pub estimator_l: usize,
    pub true_l: usize,
    pub doppler_fdt: f64,
    pub csi_mode: CsiMode,
}

/// A trial record plus the intermediates behind it.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    /// True channel of every packet.
    pub channels: Vec<ChannelSet>,
    /// `None` only in perfect-CSI mode when the covariance could not be split
    /// (e.g. a noiseless run with fewer windows than the signal dimension).
    pub blind: Option<BlindOutcome>,
    /// NMSE of each packet's aligned estimate.
    pub packet_nmse: Vec<f64>,
    /// Demapped data symbols matched their transmitted points exactly.
    pub symbols_exact: bool,
}

/// Independent random streams of one trial.
struct TrialRng {
    channel: ChaCha8Rng,
    bits: ChaCha8Rng,
    noise: ChaCha8Rng,
}

impl TrialRng {
    fn new(seed: u64) -> Self {
        let stream = |id: u64| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(id);
            r
        };
        TrialRng {
            channel: stream(1),
            bits: stream(2),
            noise: stream(3),
        }
    }
}

struct Packet {
    channel: ChannelSet,
    blocks: Vec<SymbolBlock>,
    /// `bits[b]`, all tx antennas concatenated.
    bits: Vec<Vec<u8>>,
    /// Constellation indices of every symbol, same order as `bits`.
    labels: Vec<Vec<usize>>,
    rx: Vec<Vec<Complex64>>,
}

/// Runs the full chain for one scenario; deterministic in `cfg`.
///
/// The blind estimator runs in every mode so NMSE is always reported. In
/// perfect-CSI mode a covariance that cannot be split leaves `nmse` and
/// `residual` as NaN instead of failing the trial.
pub fn run_trial(cfg: &SystemConfig, csi_mode: CsiMode) -> Result<TrialRecord> {
    run_trial_detailed(cfg, csi_mode).map(|o| o.record)
}

pub fn run_trial_detailed(cfg: &SystemConfig, csi_mode: CsiMode) -> Result<TrialOutcome> {
    cfg.validate()?;
    let geom = cfg.geometry();
    let precoder = Precoder::new(cfg.subcarriers, cfg.cp_len, cfg.smoothing)?;
    let constellation = Constellation::new(cfg.constellation);
    let amp = cfg.signal_power.sqrt();
    let noise = NoiseModel::new(cfg.noise_power)?;
    let pdp = cfg.channel.pdp.powers(cfg.channel.taps);
    let rho = doppler_rho(cfg.doppler_fdt);
    let (k, p) = (cfg.subcarriers, cfg.cp_len);
    let bps = constellation.bits_per_symbol();
    let mut rng = TrialRng::new(cfg.seed);

    let mut packets = Vec::with_capacity(cfg.packets);
    let mut windows = Vec::new();
    for n in 0..cfg.packets {
        let channel = match (cfg.channel.model, packets.last()) {
            (ChannelModel::Awgn, _) => ChannelSet::identity(cfg.tx_antennas, cfg.rx_antennas, cfg.channel.taps),
            (ChannelModel::Rayleigh, None) => {
                draw_channel(&mut rng.channel, cfg.tx_antennas, cfg.rx_antennas, &pdp)?
            }
            (ChannelModel::Rayleigh, Some(prev)) => {
                let prev: &Packet = prev;
                evolve_channel(&prev.channel, rho, &mut rng.channel)?
            }
        };
        let mut streams = vec![Vec::with_capacity(cfg.blocks_per_packet * (k + p)); cfg.tx_antennas];
        let mut blocks = Vec::with_capacity(cfg.blocks_per_packet);
        let mut bits = Vec::with_capacity(cfg.blocks_per_packet);
        let mut labels = Vec::with_capacity(cfg.blocks_per_packet);
        for _ in 0..cfg.blocks_per_packet {
            let block_bits: Vec<u8> = (0..cfg.tx_antennas * k * bps)
                .map(|_| rng.bits.random_range(0..2u8))
                .collect();
            let mut grid = Vec::with_capacity(cfg.tx_antennas);
            for (i, chunk) in block_bits.chunks(k * bps).enumerate() {
                let d: Vec<Complex64> = constellation.modulate(chunk)?.into_iter().map(|s| s * amp).collect();
                streams[i].extend(ofdm_modulate(&d, &precoder.dft, p)?);
                grid.push(d);
            }
            labels.push(
                block_bits
                    .chunks(bps)
                    .map(|g| g.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
                    .collect(),
            );
            blocks.push(SymbolBlock { grid });
            bits.push(block_bits);
        }
        let rx = transmit(&streams, &channel, noise, &mut rng.noise)?;
        let remaining = cfg.max_windows.map(|cap| cap.saturating_sub(windows.len()));
        windows.extend(extract_windows(&rx, &geom, remaining));
        if n + 1 == cfg.packets && windows.is_empty() {
            return Err(Error::InvalidArgument("no complete observation window".into()));
        }
        packets.push(Packet {
            channel,
            blocks,
            bits,
            labels,
            rx: rx.samples,
        });
    }

    let cov = sample_covariance(&windows)?;
    let blind = match estimate_from_covariance(&cov.matrix, &precoder, &geom) {
        Ok(b) => Some(b),
        Err(_) if csi_mode == CsiMode::Perfect => None,
        Err(e) => return Err(e),
    };
    let est = blind.as_ref().map(|b| &b.estimate);
    let est_l = cfg.chan_taps;
    let common_l = est_l.max(cfg.channel.taps);

    let mut packet_nmse = Vec::with_capacity(packets.len());
    let mut bit_errors = 0usize;
    let mut bit_total = 0usize;
    let mut symbols_exact = true;
    for pk in &packets {
        let oracle_ch = match est {
            Some(est) => {
                let truth_est_len = pk.channel.resized(est_l);
                let oracle = resolve_ambiguity(
                    est,
                    AmbiguityReference::Truth(truth_est_len.as_vec()),
                    AmbiguityMode::OracleSubspace,
                    &geom,
                )?;
                let ch = ChannelSet::from_vec(cfg.tx_antennas, cfg.rx_antennas, est_l, oracle.channel)?;
                packet_nmse.push(nmse(
                    ch.resized(common_l).as_vec(),
                    pk.channel.resized(common_l).as_vec(),
                )?);
                Some(ch)
            }
            None => {
                packet_nmse.push(f64::NAN);
                None
            }
        };

        let demod_block = |b: usize| -> Result<Vec<CVector>> {
            let span = b * (k + p)..(b + 1) * (k + p);
            let per_rx = pk
                .rx
                .iter()
                .map(|s| ofdm_demodulate_block(&s[span.clone()], &precoder.dft, p))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..k)
                .map(|tone| CVector::from_iterator(cfg.rx_antennas, per_rx.iter().map(|y| y[tone])))
                .collect())
        };

        let csi = match (csi_mode, est, oracle_ch) {
            (CsiMode::Perfect, _, _) => pk.channel.clone(),
            (CsiMode::Blind, _, Some(ch)) => ch,
            (CsiMode::BlindPilot, Some(est), _) => {
                let pilot_tones = demod_block(0)?;
                let pilot = PilotObservation {
                    block: pk.blocks[0].clone(),
                    tones: (0..cfg.rx_antennas)
                        .map(|j| pilot_tones.iter().map(|y| y[j]).collect())
                        .collect(),
                };
                let fit = resolve_ambiguity(est, AmbiguityReference::Pilot(&pilot), AmbiguityMode::PilotBlock, &geom)?;
                ChannelSet::from_vec(cfg.tx_antennas, cfg.rx_antennas, est_l, fit.channel)?
            }
            _ => unreachable!("blind modes propagate estimation errors"),
        };
        let eq = Equalizer::new(
            &per_tone_channel(&csi, k)?,
            cfg.equalizer,
            cfg.noise_power / cfg.signal_power,
        )?;
        for b in 1..cfg.blocks_per_packet {
            let shat = eq.apply(&demod_block(b)?)?;
            let mut rx_labels = Vec::with_capacity(cfg.tx_antennas * k);
            for i in 0..cfg.tx_antennas {
                for s in &shat {
                    rx_labels.push(constellation.nearest(s[i] / amp));
                }
            }
            symbols_exact &= rx_labels == pk.labels[b];
            let rx_bits: Vec<u8> = rx_labels.iter().flat_map(|&l| constellation.label(l)).collect();
            bit_errors += rx_bits.iter().zip(&pk.bits[b]).filter(|(a, b)| a != b).count();
            bit_total += rx_bits.len();
        }
    }

    let record = TrialRecord {
        seed: cfg.seed,
        snr_db: cfg.snr_db(),
        packets: cfg.packets,
        windows_used: windows.len(),
        nmse: packet_nmse.iter().sum::<f64>() / packet_nmse.len() as f64,
        ber: bit_errors as f64 / bit_total as f64,
        residual: est.map_or(f64::NAN, |e| e.residual),
        estimator_l: est_l,
        true_l: cfg.channel.taps,
        doppler_fdt: cfg.doppler_fdt,
        csi_mode,
    };
    Ok(TrialOutcome {
        record,
        channels: packets.into_iter().map(|pk| pk.channel).collect(),
        blind,
        packet_nmse,
        symbols_exact,
    })
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `index` under `master`: `splitmix64(master ^ splitmix64(index))`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Cartesian grid of scenarios around a base configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: SystemConfig,
    pub csi_mode: CsiMode,
    #[serde(with = "snr_list")]
    pub snr_db: Vec<f64>,
    /// Estimator tap counts; empty means the base value.
    pub taps: Vec<usize>,
    /// Doppler values; empty means the base value.
    pub doppler_fdt: Vec<f64>,
    /// Monte Carlo replicates per cell.
    pub seeds: usize,
    /// Fixed true tap count; `None` makes the channel follow the estimator.
    pub true_taps: Option<usize>,
}

/// JSON has no infinities; non-finite SNR values travel as strings.
mod snr_list {
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Value {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        values
            .iter()
            .map(|&v| {
                if v.is_finite() {
                    Value::Number(v)
                } else {
                    Value::Text(v.to_string())
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Value>::deserialize(d)?
            .into_iter()
            .map(|v| match v {
                Value::Number(x) => Ok(x),
                Value::Text(t) => t
                    .parse::<f64>()
                    .map_err(|_| D::Error::custom(format!("invalid snr_db value '{t}'"))),
            })
            .collect()
    }
}

/// One point of the grid with its resolved configuration.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub index: usize,
    pub replicate: usize,
    pub config: SystemConfig,
}

impl SweepGrid {
    pub fn master_seed(&self) -> u64 {
        self.base.seed
    }

    fn taps_axis(&self) -> Vec<usize> {
        if self.taps.is_empty() {
            vec![self.base.chan_taps]
        } else {
            self.taps.clone()
        }
    }

    fn doppler_axis(&self) -> Vec<f64> {
        if self.doppler_fdt.is_empty() {
            vec![self.base.doppler_fdt]
        } else {
            self.doppler_fdt.clone()
        }
    }

    /// Cells ordered by (snr, taps, doppler, replicate); every config validated.
    ///
    /// Replicate `r` uses `derive_seed(master, r)` in every cell, so cells
    /// differing only in SNR see the same channels, bits and noise shape.
    pub fn cells(&self) -> Result<Vec<SweepCell>> {
        if self.snr_db.is_empty() || self.seeds == 0 {
            return Err(Error::InvalidConfig("empty sweep grid".into()));
        }
        if let Some(bad) = self.snr_db.iter().find(|s| s.is_nan()) {
            return Err(Error::InvalidConfig(format!("snr_db value {bad}")));
        }
        let mut cells = Vec::new();
        for &snr in &self.snr_db {
            for &taps in &self.taps_axis() {
                for &fdt in &self.doppler_axis() {
                    for r in 0..self.seeds {
                        let mut cfg = self.base.clone();
                        cfg.set_snr_db(snr);
                        cfg.chan_taps = taps;
                        cfg.channel.taps = self.true_taps.unwrap_or(taps);
                        cfg.doppler_fdt = fdt;
                        cfg.seed = derive_seed(self.master_seed(), r as u64);
                        cfg.validate()?;
                        cells.push(SweepCell {
                            index: cells.len(),
                            replicate: r,
                            config: cfg,
                        });
                    }
                }
            }
        }
        Ok(cells)
    }
}

/// Outcome of one cell; failures carry the cell context.
pub type CellResult = Result<TrialRecord>;

/// Evaluates every cell on `jobs` worker threads; results come back in cell
/// order regardless of scheduling.
pub fn run_sweep(grid: &SweepGrid, jobs: usize) -> Result<Vec<CellResult>> {
    let cells = grid.cells()?;
    let run = |cell: &SweepCell| -> CellResult {
        run_trial(&cell.config, grid.csi_mode).map_err(|e| Error::Trial {
            seed: cell.config.seed,
            snr_db: cell.config.snr_db(),
            taps: cell.config.chan_taps,
            source: Box::new(e),
        })
    };
    if jobs <= 1 {
        return Ok(cells.iter().map(run).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(run).collect()))
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
