//! Blind channel identification from the second-order statistics of the
//! received windows.
//!
//! The pipeline is: [`extract_windows`] → [`sample_covariance`] →
//! [`eigendecompose`] → [`noise_subspace`] → [`build_quadratic_form`] →
//! [`estimate_channel`], optionally followed by [`resolve_ambiguity`].
//!
//! The noise-subspace vectors `G_i` are orthogonal to the signal matrix
//! `A = H·(I_{M_t} ⊗ W̃)` of the true channel. `A^H G_i` is linear in the
//! conjugated channel vector, `A^H G_i = (I ⊗ W̃)^H Φ(G_i) conj(h)`, so the
//! total leakage `Σ_i ‖A^H G_i‖²` is a Hermitian form in `conj(h)` and its
//! unit-norm minimizer is the eigenvector of the smallest eigenvalue.

use num_complex::Complex64;

use crate::channel::{filtering_matrix, ChannelSet, RxStream};
use crate::config::WindowGeometry;
use crate::error::{Error, Result};
use crate::linalg::{
    hermitian_defect, hermitian_eigen_ascending, hermitian_part, kron_identity, max_abs, CMatrix,
    CVector,
};
use crate::sysmodel::{freq_response, Precoder, SymbolBlock};

/// Relative eigenvalue spread under which the minimum of the quadratic form
/// is treated as degenerate.
pub const MULTIPLICITY_TOL: f64 = 1e-6;

/// Signal/noise eigenvalue ratio below which the subspace split is flagged.
pub const WEAK_GAP_RATIO: f64 = 1.05;

/// Cuts non-overlapping observation windows out of a received stream.
///
/// Window `w` holds samples `[w·J(K+P) + L, (w+1)·J(K+P))` of every receive
/// antenna, antenna-major. Returns an empty vector when the stream is
/// shorter than one window.
pub fn extract_windows(
    rx: &RxStream,
    geom: &WindowGeometry,
    max_windows: Option<usize>,
) -> Vec<CVector> {
    let span = geom.span();
    let rows = geom.rows_per_rx();
    if rx.rx() != geom.rx {
        return Vec::new();
    }
    let mut count = rx.len() / span;
    if let Some(cap) = max_windows {
        count = count.min(cap);
    }
    (0..count)
        .map(|w| {
            let start = w * span + geom.taps;
            CVector::from_iterator(
                geom.window_len(),
                rx.samples
                    .iter()
                    .flat_map(|s| s[start..start + rows].iter().copied()),
            )
        })
        .collect()
}

/// Sample estimate of `E[r r^H]`.
#[derive(Debug, Clone)]
pub struct SampleCovariance {
    pub matrix: CMatrix,
    pub count: usize,
}

pub fn sample_covariance(windows: &[CVector]) -> Result<SampleCovariance> {
    let first = windows
        .first()
        .ok_or_else(|| Error::InvalidArgument("no windows to average".into()))?;
    let n = first.len();
    if let Some(bad) = windows.iter().find(|w| w.len() != n) {
        return Err(Error::DimensionMismatch {
            context: "covariance window",
            expected: n,
            actual: bad.len(),
        });
    }
    let mut x = CMatrix::zeros(n, windows.len());
    for (c, w) in windows.iter().enumerate() {
        x.set_column(c, w);
    }
    let sum = &x * x.adjoint();
    let matrix = hermitian_part(&sum.unscale(windows.len() as f64));
    Ok(SampleCovariance {
        matrix,
        count: windows.len(),
    })
}

/// Eigenpairs sorted by decreasing eigenvalue.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Hermitian eigendecomposition, eigenvalues descending.
pub fn eigendecompose(m: &CMatrix) -> Result<EigenSystem> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "eigendecompose (square)",
            expected: m.nrows(),
            actual: m.ncols(),
        });
    }
    let asymmetry = hermitian_defect(m);
    if asymmetry > 1e-10 * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (mut values, vectors) = hermitian_eigen_ascending(&hermitian_part(m));
    values.reverse();
    let n = values.len();
    let mut desc = CMatrix::zeros(n, n);
    for k in 0..n {
        desc.set_column(k, &vectors.column(n - 1 - k));
    }
    Ok(EigenSystem {
        values,
        vectors: desc,
    })
}

/// Orthonormal basis of the `g` weakest eigen-directions of the covariance.
#[derive(Debug, Clone)]
pub struct NoiseSubspace {
    pub basis: CMatrix,
    pub dim: usize,
    /// `λ_{JKM_t} / λ_{JKM_t+1}` (1-indexed), infinite when the noise floor is 0.
    pub boundary_gap: f64,
    /// Set when the gap is below [`WEAK_GAP_RATIO`] with a non-zero noise floor.
    pub weak_gap: bool,
}

pub fn noise_subspace(es: &EigenSystem, geom: &WindowGeometry) -> Result<NoiseSubspace> {
    geom.check_noise_dim()?;
    let n = geom.window_len();
    if es.values.len() != n || es.vectors.nrows() != n {
        return Err(Error::DimensionMismatch {
            context: "noise_subspace eigensystem",
            expected: n,
            actual: es.values.len(),
        });
    }
    let signal = geom.signal_dim();
    let dim = n - signal;
    let top = es.values[0].max(0.0);
    let upper = es.values[signal - 1].max(0.0);
    let lower = es.values[signal].max(0.0);
    if upper - lower <= 1e-12 * top.max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateSubspace {
            index: signal,
            upper,
            lower,
        });
    }
    let boundary_gap = if lower > 0.0 { upper / lower } else { f64::INFINITY };
    let weak_gap = lower > 1e-12 * top && boundary_gap < WEAK_GAP_RATIO;
    Ok(NoiseSubspace {
        basis: es.vectors.columns(signal, dim).clone_owned(),
        dim,
        boundary_gap,
        weak_gap,
    })
}

/// Per-transmitter block of [`phi_operator`], shape `J(K+P) × M_r L`.
fn phi_block(g: &[Complex64], geom: &WindowGeometry) -> CMatrix {
    let span = geom.span();
    let rows = geom.rows_per_rx();
    let taps = geom.taps;
    CMatrix::from_fn(span, geom.rx * taps, |tau, col| {
        let (j, l) = (col / taps, col % taps);
        match (tau + l).checked_sub(taps) {
            Some(r) if r < rows => g[j * rows + r],
            _ => Complex64::default(),
        }
    })
}

/// Linear rearrangement `Φ(g)` with `H^H g = Φ(g)·conj(h)` for every channel
/// `h` of the geometry's tap count, `H = filtering_matrix(h)`.
///
/// Shape `M_t·J(K+P) × M_t·M_r·L`; block diagonal over transmit antennas
/// with Hankel-patterned blocks.
pub fn phi_operator(g: &[Complex64], geom: &WindowGeometry) -> Result<CMatrix> {
    if g.len() != geom.window_len() {
        return Err(Error::DimensionMismatch {
            context: "phi_operator vector",
            expected: geom.window_len(),
            actual: g.len(),
        });
    }
    Ok(kron_identity(geom.tx, &phi_block(g, geom)))
}

/// Hermitian form `Q` of the leakage cost in `conj(h)`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub matrix: CMatrix,
    /// Transmit antennas; the null space of `Q` is at least `tx²`-dimensional
    /// for a channel that fits the noise subspace exactly.
    pub tx: usize,
}

impl QuadraticForm {
    pub fn new(matrix: CMatrix, tx: usize) -> Result<Self> {
        let asymmetry = hermitian_defect(&matrix);
        if asymmetry > 1e-10 * max_abs(&matrix).max(1.0) {
            return Err(Error::NotHermitian { asymmetry });
        }
        Ok(QuadraticForm { matrix, tx })
    }

    /// `v^H Q v`.
    pub fn cost(&self, v: &CVector) -> f64 {
        v.dotc(&(&self.matrix * v)).re
    }
}

/// `Q = Σ_i Φ_i^H (W̃ W̃^H) Φ_i` with `Φ_i = phi_operator(G_i)`, `W̃` the
/// precoder replicated over transmit antennas.
pub fn build_quadratic_form(
    ns: &NoiseSubspace,
    precoder: &Precoder,
    geom: &WindowGeometry,
) -> Result<QuadraticForm> {
    if ns.basis.nrows() != geom.window_len() {
        return Err(Error::DimensionMismatch {
            context: "quadratic form noise basis",
            expected: geom.window_len(),
            actual: ns.basis.nrows(),
        });
    }
    if precoder.stacked.nrows() != geom.span() {
        return Err(Error::DimensionMismatch {
            context: "quadratic form precoder",
            expected: geom.span(),
            actual: precoder.stacked.nrows(),
        });
    }
    // Φ and W̃ are both block diagonal over tx with identical blocks, so Q is
    // I_{M_t} ⊗ q with q accumulated from one block.
    let w_adj = precoder.stacked.adjoint();
    let n = geom.rx * geom.taps;
    let mut q = CMatrix::zeros(n, n);
    let mut g = vec![Complex64::default(); geom.window_len()];
    for col in ns.basis.column_iter() {
        g.iter_mut().zip(col.iter()).for_each(|(d, s)| *d = *s);
        let psi = &w_adj * phi_block(&g, geom);
        q.gemm_ad(Complex64::new(1.0, 0.0), &psi, &psi, Complex64::new(1.0, 0.0));
    }
    let q = hermitian_part(&q);
    Ok(QuadraticForm {
        matrix: kron_identity(geom.tx, &q),
        tx: geom.tx,
    })
}

/// Unit-norm minimizer of the leakage cost.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// Stacked channel vector (tap fastest, then rx, then tx), unit norm.
    pub h_vec: Vec<Complex64>,
    /// Smallest eigenvalue of `Q`.
    pub residual: f64,
    /// Eigenvalues of `Q` within [`MULTIPLICITY_TOL`] of the minimum.
    pub multiplicity: usize,
    /// Orthonormal channel-domain basis of the ambiguity set:
    /// `max(multiplicity, tx²)` weakest eigen-directions, conjugated back.
    pub null_basis: CMatrix,
    /// Eigenvalues of `Q`, ascending.
    pub spectrum: Vec<f64>,
}

impl ChannelEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.multiplicity > 1
    }

    pub fn to_channel(&self, geom: &WindowGeometry) -> Result<ChannelSet> {
        ChannelSet::from_vec(geom.tx, geom.rx, geom.taps, self.h_vec.clone())
    }
}

/// Rotates `v` so that its first largest-magnitude entry is real positive.
fn fix_phase(v: &mut [Complex64]) {
    let mut best = 0;
    for k in 1..v.len() {
        if v[k].norm() > v[best].norm() {
            best = k;
        }
    }
    let mag = v[best].norm();
    if mag > 0.0 {
        let rot = v[best].conj() / mag;
        v.iter_mut().for_each(|z| *z *= rot);
    }
}

pub fn estimate_channel(qf: &QuadraticForm) -> Result<ChannelEstimate> {
    let n = qf.matrix.nrows();
    if n == 0 || !qf.matrix.is_square() {
        return Err(Error::InvalidArgument("empty or non-square quadratic form".into()));
    }
    let (values, vectors) = hermitian_eigen_ascending(&hermitian_part(&qf.matrix));
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let multiplicity = values
        .iter()
        .take_while(|&&v| v - values[0] <= MULTIPLICITY_TOL * scale)
        .count();
    let mut h_vec: Vec<Complex64> = vectors.column(0).iter().map(|z| z.conj()).collect();
    fix_phase(&mut h_vec);
    let dim = multiplicity.max(qf.tx * qf.tx).min(n);
    let null_basis = vectors.columns(0, dim).map(|z| z.conj());
    Ok(ChannelEstimate {
        h_vec,
        residual: values[0],
        multiplicity,
        null_basis,
        spectrum: values,
    })
}

/// How the scale (SIMO) or mixing (MIMO) ambiguity is removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityMode {
    /// `α = ⟨ĥ, h⟩ / ‖ĥ‖²` against the true channel.
    OracleScalar,
    /// Projection of the true channel onto [`ChannelEstimate::null_basis`].
    OracleSubspace,
    /// Least-squares fit of the ambiguity coefficients to one known block.
    PilotBlock,
}

/// One known frequency-domain block and what the receiver saw for it.
#[derive(Debug, Clone)]
pub struct PilotObservation {
    pub block: SymbolBlock,
    /// `tones[j][k]`: CP-stripped, DFT'd sample of rx `j` on subcarrier `k`.
    pub tones: Vec<Vec<Complex64>>,
}

pub enum AmbiguityReference<'a> {
    Truth(&'a [Complex64]),
    Pilot(&'a PilotObservation),
}

/// Aligned channel and the fitted ambiguity coefficients (a single `α` for
/// scalar alignment).
#[derive(Debug, Clone)]
pub struct Alignment {
    pub channel: Vec<Complex64>,
    pub coefficients: Vec<Complex64>,
}

/// Least-squares `α` minimizing `‖α·est − truth‖`.
pub fn scalar_align(est: &[Complex64], truth: &[Complex64]) -> Result<Alignment> {
    if est.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "scalar alignment",
            expected: truth.len(),
            actual: est.len(),
        });
    }
    let energy: f64 = est.iter().map(|z| z.norm_sqr()).sum();
    let alpha = if energy > 0.0 {
        est.iter().zip(truth).map(|(e, t)| e.conj() * t).sum::<Complex64>() / energy
    } else {
        Complex64::default()
    };
    Ok(Alignment {
        channel: est.iter().map(|e| e * alpha).collect(),
        coefficients: vec![alpha],
    })
}

/// Frequency-domain prediction of a pilot block for a stacked channel vector.
fn pilot_prediction(h: &[Complex64], block: &SymbolBlock, geom: &WindowGeometry) -> Result<Vec<Complex64>> {
    let k = block.subcarriers();
    let taps = geom.taps;
    let mut y = vec![Complex64::default(); geom.rx * k];
    for i in 0..geom.tx {
        for j in 0..geom.rx {
            let start = (i * geom.rx + j) * taps;
            let resp = freq_response(&h[start..start + taps], k)?;
            for tone in 0..k {
                y[j * k + tone] += resp[tone] * block.grid[i][tone];
            }
        }
    }
    Ok(y)
}

/// Removes the blind ambiguity from `est` using either the true channel or
/// one pilot block.
pub fn resolve_ambiguity(
    est: &ChannelEstimate,
    reference: AmbiguityReference<'_>,
    mode: AmbiguityMode,
    geom: &WindowGeometry,
) -> Result<Alignment> {
    let n = est.h_vec.len();
    if n != geom.channel_len() {
        return Err(Error::DimensionMismatch {
            context: "ambiguity estimate length",
            expected: geom.channel_len(),
            actual: n,
        });
    }
    match (mode, reference) {
        (AmbiguityMode::OracleScalar, AmbiguityReference::Truth(truth)) => {
            scalar_align(&est.h_vec, truth)
        }
        (AmbiguityMode::OracleSubspace, AmbiguityReference::Truth(truth)) => {
            if truth.len() != n {
                return Err(Error::DimensionMismatch {
                    context: "subspace alignment",
                    expected: n,
                    actual: truth.len(),
                });
            }
            let coeffs = est.null_basis.adjoint() * CVector::from_column_slice(truth);
            let channel = &est.null_basis * &coeffs;
            Ok(Alignment {
                channel: channel.iter().copied().collect(),
                coefficients: coeffs.iter().copied().collect(),
            })
        }
        (AmbiguityMode::PilotBlock, AmbiguityReference::Pilot(pilot)) => {
            let k = pilot.block.subcarriers();
            if pilot.block.tx() != geom.tx || pilot.tones.len() != geom.rx {
                return Err(Error::InvalidArgument("pilot block antenna counts do not match".into()));
            }
            if pilot.tones.iter().any(|t| t.len() != k) || k < geom.taps {
                return Err(Error::InvalidArgument("pilot tone grid is ragged or too short".into()));
            }
            let basis = if est.null_basis.ncols() == 1 {
                CMatrix::from_column_slice(n, 1, &est.h_vec)
            } else {
                est.null_basis.clone()
            };
            let mut design = CMatrix::zeros(geom.rx * k, basis.ncols());
            for (c, col) in basis.column_iter().enumerate() {
                let v: Vec<Complex64> = col.iter().copied().collect();
                let pred = pilot_prediction(&v, &pilot.block, geom)?;
                design.set_column(c, &CVector::from_vec(pred));
            }
            let y = CVector::from_iterator(geom.rx * k, pilot.tones.iter().flatten().copied());
            let coeffs = design
                .svd(true, true)
                .solve(&y, 1e-12)
                .map_err(|e| Error::InvalidArgument(format!("pilot least squares: {e}")))?;
            let channel = &basis * &coeffs;
            Ok(Alignment {
                channel: channel.iter().copied().collect(),
                coefficients: coeffs.iter().copied().collect(),
            })
        }
        (AmbiguityMode::PilotBlock, AmbiguityReference::Truth(_)) => Err(Error::InvalidArgument(
            "pilot alignment requested without pilot data".into(),
        )),
        (_, AmbiguityReference::Pilot(_)) => Err(Error::InvalidArgument(
            "oracle alignment requires the true channel".into(),
        )),
    }
}

/// `A = H·(I_{M_t} ⊗ W̃)`, the map from stacked frequency-domain symbols of
/// one window to the received window.
pub fn signal_matrix(ch: &ChannelSet, precoder: &Precoder, geom: &WindowGeometry) -> Result<CMatrix> {
    let h = filtering_matrix(ch, geom)?;
    Ok(h * kron_identity(geom.tx, &precoder.stacked))
}

/// `A·σ_s²·A^H + σ_b²·I`, the covariance of a window for i.i.d. unit-power
/// symbols scaled to `σ_s²`.
pub fn exact_covariance(
    ch: &ChannelSet,
    precoder: &Precoder,
    geom: &WindowGeometry,
    signal_power: f64,
    noise_power: f64,
) -> Result<CMatrix> {
    let a = signal_matrix(ch, precoder, geom)?;
    let n = a.nrows();
    let r = (&a * a.adjoint()).scale(signal_power)
        + CMatrix::identity(n, n).scale(noise_power);
    Ok(hermitian_part(&r))
}

/// `‖G^H A‖_F`.
pub fn orthogonality_residual(ns: &NoiseSubspace, a: &CMatrix) -> f64 {
    (ns.basis.adjoint() * a).norm()
}

/// Every intermediate of one blind estimation.
#[derive(Debug, Clone)]
pub struct BlindOutcome {
    pub eigen: EigenSystem,
    pub noise: NoiseSubspace,
    pub form: QuadraticForm,
    pub estimate: ChannelEstimate,
}

/// Runs eigendecomposition through the minimizer on a covariance matrix.
pub fn estimate_from_covariance(
    cov: &CMatrix,
    precoder: &Precoder,
    geom: &WindowGeometry,
) -> Result<BlindOutcome> {
    let eigen = eigendecompose(cov)?;
    let noise = noise_subspace(&eigen, geom)?;
    let form = build_quadratic_form(&noise, precoder, geom)?;
    let estimate = estimate_channel(&form)?;
    Ok(BlindOutcome {
        eigen,
        noise,
        form,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, transmit, NoiseModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn simo() -> WindowGeometry {
        WindowGeometry {
            tx: 1,
            rx: 2,
            subcarriers: 8,
            cp_len: 2,
            smoothing: 2,
            taps: 2,
        }
    }

    #[test]
    fn window_counts_and_length() {
        let geom = WindowGeometry {
            tx: 1,
            rx: 2,
            subcarriers: 8,
            cp_len: 2,
            smoothing: 2,
            taps: 2,
        };
        let stream = RxStream {
            samples: vec![vec![c(1.0, 0.0); 20], vec![c(2.0, 0.0); 20]],
        };
        let w = extract_windows(&stream, &geom, None);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].len(), 36);
        let short = RxStream {
            samples: vec![vec![c(1.0, 0.0); 19]; 2],
        };
        assert!(extract_windows(&short, &geom, None).is_empty());
        let long = RxStream {
            samples: vec![vec![c(1.0, 0.0); 100]; 2],
        };
        assert_eq!(extract_windows(&long, &geom, None).len(), 5);
        assert_eq!(extract_windows(&long, &geom, Some(3)).len(), 3);
    }

    #[test]
    fn noiseless_window_matches_filtering_matrix() {
        let geom = simo();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let ch = draw_channel(&mut rng, 1, 2, &[0.5, 0.5]).unwrap();
        let n = geom.span() * 3;
        let s: Vec<_> = (0..n).map(|_| crate::channel::complex_gaussian(&mut rng, 1.0)).collect();
        let r = transmit(std::slice::from_ref(&s), &ch, NoiseModel::new(0.0).unwrap(), &mut rng).unwrap();
        let windows = extract_windows(&r, &geom, None);
        let h = filtering_matrix(&ch, &geom).unwrap();
        for (w, win) in windows.iter().enumerate() {
            let seg = CVector::from_column_slice(&s[w * geom.span()..(w + 1) * geom.span()]);
            assert!(max_abs(&(win - &h * seg)) < 1e-12);
        }
    }

    #[test]
    fn covariance_examples() {
        let r = CVector::from_vec(vec![c(1.0, 2.0), c(0.0, -1.0)]);
        let cov = sample_covariance(std::slice::from_ref(&r)).unwrap();
        assert!(max_abs(&(cov.matrix - &r * r.adjoint())) < 1e-15);
        let e1 = CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e2 = CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let cov = sample_covariance(&[e1, e2]).unwrap();
        let expect = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.5, 0.0), c(0.5, 0.0), c(0.0, 0.0)]));
        assert_eq!(cov.matrix, expect);
        assert_eq!(cov.count, 2);
        assert!(sample_covariance(&[]).is_err());
    }

    #[test]
    fn eigendecompose_examples() {
        let es = eigendecompose(&CMatrix::identity(4, 4)).unwrap();
        assert!(es.values.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(1.0, 0.0), c(3.0, 0.0), c(2.0, 0.0)]));
        let es = eigendecompose(&d).unwrap();
        assert!((es.values[0] - 3.0).abs() < 1e-14);
        assert!((es.values[1] - 2.0).abs() < 1e-14);
        assert!((es.values[2] - 1.0).abs() < 1e-14);
        assert!((es.vectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((es.vectors[(2, 1)].norm() - 1.0).abs() < 1e-14);
        assert!((es.vectors[(0, 2)].norm() - 1.0).abs() < 1e-14);
        let mut skew = CMatrix::identity(2, 2);
        skew[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(eigendecompose(&skew), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn random_hermitian_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = CMatrix::from_fn(20, 20, |_, _| crate::channel::complex_gaussian(&mut rng, 1.0));
        let h = hermitian_part(&a);
        let es = eigendecompose(&h).unwrap();
        assert!(es.values.windows(2).all(|w| w[0] >= w[1]));
        let d = CMatrix::from_diagonal(&CVector::from_iterator(20, es.values.iter().map(|&v| c(v, 0.0))));
        let back = &es.vectors * d * es.vectors.adjoint();
        assert!(max_abs(&(back - &h)) < 1e-10);
        let gram = es.vectors.adjoint() * &es.vectors;
        assert!(max_abs(&(gram - CMatrix::identity(20, 20))) < 1e-9);
    }

    #[test]
    fn exact_covariance_noise_subspace_is_orthogonal() {
        let geom = simo();
        assert_eq!(geom.noise_dim(), 20);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let ch = draw_channel(&mut rng, 1, 2, &[0.5, 0.5]).unwrap();
        let pre = Precoder::new(8, 2, 2).unwrap();
        let r = exact_covariance(&ch, &pre, &geom, 1.0, 0.1).unwrap();
        let ns = noise_subspace(&eigendecompose(&r).unwrap(), &geom).unwrap();
        assert_eq!(ns.dim, 20);
        let a = signal_matrix(&ch, &pre, &geom).unwrap();
        assert!(max_abs(&(ns.basis.adjoint() * &a)) < 1e-9);
        let gram = ns.basis.adjoint() * &ns.basis;
        assert!(max_abs(&(gram - CMatrix::identity(20, 20))) < 1e-9);
    }

    #[test]
    fn tie_at_boundary_is_an_error() {
        let geom = simo();
        let es = eigendecompose(&CMatrix::identity(36, 36)).unwrap();
        assert!(matches!(noise_subspace(&es, &geom), Err(Error::DegenerateSubspace { .. })));
    }

    #[test]
    fn weak_gap_is_flagged() {
        let geom = simo();
        let mut d = vec![c(1.0, 0.0); 36];
        for v in d.iter_mut().take(16) {
            *v = c(1.02, 0.0);
        }
        let es = eigendecompose(&CMatrix::from_diagonal(&CVector::from_vec(d))).unwrap();
        let ns = noise_subspace(&es, &geom).unwrap();
        assert!(ns.weak_gap);
    }

    #[test]
    fn phi_identity_and_linearity() {
        let geom = WindowGeometry {
            tx: 2,
            rx: 3,
            subcarriers: 4,
            cp_len: 2,
            smoothing: 2,
            taps: 2,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = geom.window_len();
        let draw = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
            (0..n).map(|_| crate::channel::complex_gaussian(rng, 1.0)).collect()
        };
        let g1 = draw(&mut rng);
        let g2 = draw(&mut rng);
        let ch = draw_channel(&mut rng, 2, 3, &[0.5, 0.5]).unwrap();
        let h = filtering_matrix(&ch, &geom).unwrap();
        let lhs = h.adjoint() * CVector::from_column_slice(&g1);
        let hc = CVector::from_iterator(geom.channel_len(), ch.as_vec().iter().map(|z| z.conj()));
        let rhs = phi_operator(&g1, &geom).unwrap() * hc;
        assert!(max_abs(&(lhs - rhs)) < 1e-12);

        let alpha = c(0.3, -1.1);
        let mix: Vec<_> = g1.iter().zip(&g2).map(|(a, b)| alpha * a + b).collect();
        let lin = phi_operator(&g1, &geom).unwrap() * alpha + phi_operator(&g2, &geom).unwrap();
        assert!(max_abs(&(phi_operator(&mix, &geom).unwrap() - lin)) < 1e-14);

        let zero = phi_operator(&vec![Complex64::default(); n], &geom).unwrap();
        assert_eq!(max_abs(&zero), 0.0);
        assert!(phi_operator(&g1[1..], &geom).is_err());
    }

    #[test]
    fn estimate_channel_examples() {
        let q = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        let est = estimate_channel(&QuadraticForm::new(q, 1).unwrap()).unwrap();
        assert!((est.h_vec[0] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(est.residual.abs() < 1e-14);
        assert_eq!(est.multiplicity, 1);

        let est = estimate_channel(&QuadraticForm::new(CMatrix::identity(3, 3), 1).unwrap()).unwrap();
        assert!((est.residual - 1.0).abs() < 1e-14);
        assert_eq!(est.multiplicity, 3);
        assert!(est.is_degenerate());
        assert_eq!(est.null_basis.ncols(), 3);
        let norm: f64 = est.h_vec.iter().map(|z| z.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pilot_without_data_rejected() {
        let q = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]));
        let est = estimate_channel(&QuadraticForm::new(q, 1).unwrap()).unwrap();
        let geom = WindowGeometry {
            tx: 1,
            rx: 1,
            subcarriers: 4,
            cp_len: 2,
            smoothing: 1,
            taps: 2,
        };
        let truth = [c(1.0, 0.0), c(0.0, 0.0)];
        let r = resolve_ambiguity(&est, AmbiguityReference::Truth(&truth), AmbiguityMode::PilotBlock, &geom);
        assert!(r.is_err());
    }

    #[test]
    fn scalar_alignment_examples() {
        let truth = [c(1.0, 0.5), c(-0.3, 2.0), c(0.7, 0.0)];
        let norm: f64 = truth.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let rot = Complex64::from_polar(1.0 / norm, 0.7);
        let est: Vec<_> = truth.iter().map(|z| z * rot).collect();
        let al = scalar_align(&est, &truth).unwrap();
        for (a, b) in al.channel.iter().zip(&truth) {
            assert!((a - b).norm() < 1e-12);
        }
        let ortho = [c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        let al = scalar_align(&ortho, &truth).unwrap();
        assert!(al.channel.iter().all(|z| z.norm() == 0.0));
    }
}
