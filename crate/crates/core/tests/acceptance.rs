//! End-to-end acceptance checks. Runs as a plain binary so that the
//! per-criterion verdict lines are always printed.

mod common;

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{convolve, gaussian_vec, random_geometry, rng};
use num_complex::Complex64;
use subspace_ofdm::channel::{draw_channel, filtering_matrix};
use subspace_ofdm::estimator::{
    estimate_from_covariance, exact_covariance, orthogonality_residual, phi_operator, signal_matrix,
};
use subspace_ofdm::linalg::{max_abs, project_onto, to_vector, CMatrix};
use subspace_ofdm::rxchain::{median, nmse, run_sweep, run_trial, run_trial_detailed};
use subspace_ofdm::simcli::load_grid;
use subspace_ofdm::sysmodel::{circulant_matrix, dft_matrix, freq_response, Precoder};
use subspace_ofdm::{ChannelModel, CsiMode, Modulation, SystemConfig, WindowGeometry};

type Check = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn within(elapsed: Duration, limit: Duration, detail: String) -> Check {
    let msg = format!("{detail}; {:.2}s (limit {}s)", elapsed.as_secs_f64(), limit.as_secs());
    ensure(elapsed < limit, msg)
}

fn model_consistency() -> Check {
    let start = Instant::now();
    let mut r = rng(1);
    let configs = 120;
    let mut worst = 0.0f64;
    for _ in 0..configs {
        let geom = random_geometry(&mut r);
        let k = geom.subcarriers;
        let f = dft_matrix(k).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs(&(&f * f.adjoint() - CMatrix::identity(k, k))));

        let pdp = vec![1.0 / geom.taps as f64; geom.taps];
        let ch = draw_channel(&mut r, geom.tx, geom.rx, &pdp).map_err(|e| e.to_string())?;
        let path = ch.path(0, 0);
        let d = &f * circulant_matrix(path, k).map_err(|e| e.to_string())? * f.adjoint();
        let resp = freq_response(path, k).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs(&(d - CMatrix::from_diagonal(&to_vector(&resp)))));

        let span = geom.span();
        let streams: Vec<_> = (0..geom.tx).map(|_| gaussian_vec(&mut r, span)).collect();
        let h = filtering_matrix(&ch, &geom).map_err(|e| e.to_string())?;
        let out = &h * to_vector(&streams.concat());
        let rows = geom.rows_per_rx();
        for j in 0..geom.rx {
            let mut direct = vec![Complex64::default(); span];
            for (i, s) in streams.iter().enumerate() {
                for (acc, v) in direct.iter_mut().zip(convolve(ch.path(i, j), s)) {
                    *acc += v;
                }
            }
            for row in 0..rows {
                worst = worst.max((out[j * rows + row] - direct[geom.taps + row]).norm());
            }
        }

        for _ in 0..3 {
            let g = gaussian_vec(&mut r, geom.window_len());
            let lhs = h.adjoint() * to_vector(&g);
            let phi = phi_operator(&g, &geom).map_err(|e| e.to_string())?;
            let rhs = phi * to_vector(ch.as_vec()).conjugate();
            worst = worst.max(max_abs(&(lhs - rhs)));
        }
    }
    let ok = worst < 1e-10;
    let detail = format!("{configs} configs, worst identity error {worst:.2e} (tol 1e-10)");
    ensure(ok, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(30), detail)
}

fn geometry(tx: usize, rx: usize) -> WindowGeometry {
    WindowGeometry {
        tx,
        rx,
        subcarriers: 8,
        cp_len: 2,
        smoothing: 2,
        taps: 2,
    }
}

fn exact_recovery() -> Check {
    let start = Instant::now();
    let pre = Precoder::new(8, 2, 2).map_err(|e| e.to_string())?;
    let mut r = rng(2);

    let simo = geometry(1, 2);
    let mut worst_nmse = 0.0f64;
    for _ in 0..10 {
        let ch = draw_channel(&mut r, 1, 2, &[0.5, 0.5]).map_err(|e| e.to_string())?;
        let cov = exact_covariance(&ch, &pre, &simo, 1.0, 0.0).map_err(|e| e.to_string())?;
        let est = estimate_from_covariance(&cov, &pre, &simo).map_err(|e| e.to_string())?.estimate;
        worst_nmse = worst_nmse.max(nmse(&est.h_vec, ch.as_vec()).map_err(|e| e.to_string())?);
    }

    let mimo = geometry(2, 4);
    let mut worst_cost = 0.0f64;
    let mut worst_proj = 0.0f64;
    for _ in 0..10 {
        let ch = draw_channel(&mut r, 2, 4, &[0.5, 0.5]).map_err(|e| e.to_string())?;
        let cov = exact_covariance(&ch, &pre, &mimo, 1.0, 0.0).map_err(|e| e.to_string())?;
        let out = estimate_from_covariance(&cov, &pre, &mimo).map_err(|e| e.to_string())?;
        let truth = to_vector(ch.as_vec());
        worst_cost = worst_cost.max(out.form.cost(&truth.conjugate()) / out.form.matrix.norm());
        let resid = (&truth - project_onto(&out.estimate.null_basis, &truth)).norm() / truth.norm();
        worst_proj = worst_proj.max(resid);
    }
    let detail = format!(
        "SIMO nmse {worst_nmse:.2e} (<1e-8); 2x4 cost/|Q|_F {worst_cost:.2e} (<1e-10), null-space residual {worst_proj:.2e} (<1e-6)"
    );
    ensure(worst_nmse < 1e-8 && worst_cost < 1e-10 && worst_proj < 1e-6, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(5), detail)
}

struct ConvergenceRun {
    nmse: Vec<f64>,
    orthogonality: Vec<f64>,
    elapsed: Duration,
}

fn convergence_run() -> Result<ConvergenceRun, String> {
    let start = Instant::now();
    let mut nmse_medians = Vec::new();
    let mut orth_medians = Vec::new();
    for windows in [50usize, 200, 1000] {
        let mut nmses = Vec::new();
        let mut orths = Vec::new();
        for seed in 0..10 {
            let mut cfg = SystemConfig::new(1, 2);
            cfg.blocks_per_packet = windows * cfg.smoothing;
            cfg.max_windows = Some(windows);
            cfg.seed = 1000 + seed;
            cfg.set_snr_db(30.0);
            let out = run_trial_detailed(&cfg, CsiMode::Blind).map_err(|e| e.to_string())?;
            let blind = out.blind.ok_or("blind estimate missing")?;
            let pre = Precoder::new(cfg.subcarriers, cfg.cp_len, cfg.smoothing).map_err(|e| e.to_string())?;
            let a = signal_matrix(&out.channels[0], &pre, &cfg.geometry()).map_err(|e| e.to_string())?;
            nmses.push(out.record.nmse);
            orths.push(orthogonality_residual(&blind.noise, &a));
        }
        nmse_medians.push(median(&nmses));
        orth_medians.push(median(&orths));
    }
    Ok(ConvergenceRun {
        nmse: nmse_medians,
        orthogonality: orth_medians,
        elapsed: start.elapsed(),
    })
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn non_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn fmt_series(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ")
}

fn finite_sample(run: &Result<ConvergenceRun, String>) -> Check {
    let run = run.as_ref().map_err(Clone::clone)?;
    let detail = format!("median NMSE at 50/200/1000 windows: {} (last <1e-2)", fmt_series(&run.nmse));
    ensure(strictly_decreasing(&run.nmse) && run.nmse[2] < 1e-2, detail.clone())?;
    within(run.elapsed, Duration::from_secs(120), detail)
}

fn orthogonality(run: &Result<ConvergenceRun, String>) -> Check {
    let run = run.as_ref().map_err(Clone::clone)?;
    let detail = format!(
        "median |G^H A(h)|_F at 50/200/1000 windows: {}",
        fmt_series(&run.orthogonality)
    );
    ensure(strictly_decreasing(&run.orthogonality), detail)
}

fn noiseless_chain() -> Check {
    let start = Instant::now();
    let mut cfg = SystemConfig::new(4, 4);
    cfg.subcarriers = 16;
    cfg.cp_len = 8;
    cfg.chan_taps = 8;
    cfg.channel.taps = 8;
    cfg.constellation = Modulation::Qam16;
    let bits_per_block = 4 * 16 * 4;
    let data_blocks = 10_000usize.div_ceil(bits_per_block);
    cfg.blocks_per_packet = data_blocks + 1;
    cfg.set_snr_db(f64::INFINITY);
    cfg.seed = 5;
    let out = run_trial_detailed(&cfg, CsiMode::Perfect).map_err(|e| e.to_string())?;
    let bits = data_blocks * bits_per_block;
    let detail = format!(
        "4x4 16-QAM, {bits} bits: BER {}, symbols exact {}",
        out.record.ber, out.symbols_exact
    );
    ensure(out.record.ber == 0.0 && out.symbols_exact && bits >= 10_000, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(5), detail)
}

fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn awgn_oracle() -> Check {
    let start = Instant::now();
    let snr_db = 20.0;
    let snr = 10f64.powf(snr_db / 10.0);
    let a = (3.0 * snr / 15.0).sqrt();
    let theory = (3.0 * q_function(a) + 2.0 * q_function(3.0 * a) - q_function(5.0 * a)) / 4.0;

    let mut cfg = SystemConfig::new(1, 1);
    cfg.subcarriers = 64;
    cfg.cp_len = 1;
    cfg.chan_taps = 1;
    cfg.channel.taps = 1;
    cfg.channel.model = ChannelModel::Awgn;
    cfg.constellation = Modulation::Qam16;
    let bits_per_block = 64 * 4;
    let target_bits = 10_000_000usize;
    let data_blocks = target_bits.div_ceil(bits_per_block);
    cfg.blocks_per_packet = data_blocks + 1;
    cfg.max_windows = Some(64);
    cfg.set_snr_db(snr_db);
    cfg.seed = 6;
    let rec = run_trial(&cfg, CsiMode::Perfect).map_err(|e| e.to_string())?;
    let ratio = rec.ber / theory;
    let detail = format!(
        "{} bits: BER {:.3e} vs closed form {theory:.3e}, ratio {ratio:.3}",
        data_blocks * bits_per_block,
        rec.ber
    );
    ensure((0.5..=2.0).contains(&ratio), detail.clone())?;
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn config_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn mimo_sweep() -> Check {
    let start = Instant::now();
    let grid = load_grid(&config_path("mimo_4x4_qam16.cfg")).map_err(|e| e.to_string())?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let results = run_sweep(&grid, jobs).map_err(|e| e.to_string())?;
    let cells = results.len();
    let records: Vec<_> = results
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|e| format!("trial failed: {e}"))?;
    let at = |snr: f64, pick: fn(&subspace_ofdm::rxchain::TrialRecord) -> f64| {
        let v: Vec<f64> = records.iter().filter(|r| r.snr_db == snr).map(pick).collect();
        median(&v)
    };
    let snrs = [5.0, 15.0, 25.0];
    let ber: Vec<f64> = snrs.iter().map(|&s| at(s, |r| r.ber)).collect();
    let nm: Vec<f64> = snrs.iter().map(|&s| at(s, |r| r.nmse)).collect();
    let detail = format!(
        "{cells} trials; median BER at 5/15/25 dB: {}; median NMSE: {}",
        fmt_series(&ber),
        fmt_series(&nm)
    );
    ensure(non_increasing(&ber) && non_increasing(&nm), detail.clone())?;
    within(start.elapsed(), Duration::from_secs(600), detail)
}

fn reproducibility() -> Check {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_subspace-ofdm");
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let run = |config: &Path, out: &str, jobs: &str| -> Result<Vec<u8>, String> {
        let out = dir.path().join(out);
        let status = Command::new(bin)
            .arg("run")
            .arg(config)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        std::fs::read(&out).map_err(|e| e.to_string())
    };
    let first = run(&config_path("doppler_sweep.cfg"), "seed.csv", "1")?;
    let manifest = dir.path().join("seed.csv.manifest.json");
    let a = run(&manifest, "a.csv", "1")?;
    let b = run(&manifest, "b.csv", "1")?;
    let c = run(&manifest, "c.csv", "4")?;
    let rows = first.iter().filter(|&&b| b == b'\n').count() - 1;
    let same = a == first && b == first && c == first;
    let detail = format!("{rows} rows; manifest reruns and --jobs 4 byte-identical: {same}");
    ensure(same, detail.clone())?;
    within(start.elapsed(), Duration::from_secs(60), detail)
}

fn main() -> ExitCode {
    let convergence = convergence_run();
    let criteria: Vec<Criterion> = vec![
        ("model consistency", Box::new(model_consistency)),
        ("exact-covariance recovery", Box::new(exact_recovery)),
        ("finite-sample consistency", Box::new(|| finite_sample(&convergence))),
        ("orthogonality convergence", Box::new(|| orthogonality(&convergence))),
        ("noiseless perfect-CSI chain", Box::new(noiseless_chain)),
        ("AWGN demodulation oracle", Box::new(awgn_oracle)),
        ("4x4 16-QAM sweep", Box::new(mimo_sweep)),
        ("reproducibility", Box::new(reproducibility)),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] criterion {} {name}: {detail}", n + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {} {name}: {detail}", n + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
