//! Scenario files, run manifests, CSV output and the command runner behind
//! the `subspace-ofdm` binary.

mod config_file;
mod csv;
mod manifest;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

pub use config_file::parse_config;
pub use csv::{emit_csv, format_real, render_csv, CSV_HEADER};
pub use manifest::RunManifest;

use crate::error::{Error, Result};
use crate::rxchain::{median, run_sweep, SweepGrid, TrialRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_TRIAL_ERRORS: i32 = 2;

pub fn tool_version() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

/// Reads a scenario file or a run manifest (detected by a leading `{`).
pub fn load_grid(path: &Path) -> Result<SweepGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim_start().starts_with('{') {
        let m = RunManifest::from_json(&text)?;
        m.grid.cells()?;
        Ok(m.grid)
    } else {
        parse_config(&text)
    }
}

/// `<out>.manifest.json` next to the CSV.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// `<out>.errors.txt`, written only when some cells failed.
pub fn errors_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".errors.txt");
    PathBuf::from(s)
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: Option<u64>,
}

/// SNR, NMSE values, BER values of one summary row.
type SummaryCell = (f64, Vec<f64>, Vec<f64>);

/// Summary table: median NMSE and BER per (SNR, estimator L).
pub fn summary_table(records: &[TrialRecord]) -> String {
    let mut cells: BTreeMap<(u64, usize), SummaryCell> = BTreeMap::new();
    for r in records {
        // total order on f64 bits for grouping, SNR restored for printing
        let key = (ordered_bits(r.snr_db), r.estimator_l);
        let e = cells.entry(key).or_insert((r.snr_db, Vec::new(), Vec::new()));
        e.1.push(r.nmse);
        e.2.push(r.ber);
    }
    let mut out = String::from("  snr_db      L   trials   median_nmse     median_ber\n");
    for ((_, l), (snr, nmse, ber)) in &cells {
        out.push_str(&format!(
            "{:>8} {:>6} {:>8} {:>13.4e} {:>14.4e}\n",
            snr,
            l,
            nmse.len(),
            median(nmse),
            median(ber)
        ));
    }
    out
}

fn ordered_bits(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

/// Executes a sweep and writes CSV, manifest and (on cell failures) an error
/// log. Returns the process exit code.
pub fn run(opts: &RunOptions, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run_inner(opts, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

fn run_inner(opts: &RunOptions, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let mut grid = load_grid(&opts.config)?;
    if let Some(seed) = opts.seed {
        grid.base.seed = seed;
    }
    grid.cells()?;
    if let Some(dir) = opts.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
            ));
        }
    }
    let manifest = RunManifest::new(grid.clone());
    let results = run_sweep(&grid, opts.jobs.max(1))?;

    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push(format!("cell {idx}: {e}")),
        }
    }
    if !records.is_empty() {
        emit_csv(&records, &opts.out)?;
    }
    manifest.write(&manifest_path(&opts.out))?;
    let _ = write!(stdout, "{}", summary_table(&records));
    if failures.is_empty() {
        return Ok(EXIT_OK);
    }
    for f in &failures {
        let _ = writeln!(stderr, "{f}");
    }
    let mut log = failures.join("\n");
    log.push('\n');
    csv::write_atomic(&errors_path(&opts.out), &log)?;
    Ok(EXIT_TRIAL_ERRORS)
}

/// Parses and validates without running; prints the grid size and noise
/// subspace dimensions.
pub fn validate(path: &Path, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match load_grid(path).and_then(|g| g.cells().map(|c| (g, c))) {
        Ok((grid, cells)) => {
            let _ = writeln!(stdout, "ok: {} cells, csi_mode {}", cells.len(), grid.csi_mode);
            let mut seen = std::collections::BTreeSet::new();
            for c in &cells {
                let g = c.config.geometry();
                if seen.insert(g.taps) {
                    let _ = writeln!(
                        stdout,
                        "  L={}: window {} samples, signal dim {}, noise dim g={}",
                        g.taps,
                        g.window_len(),
                        g.signal_dim(),
                        g.noise_dim()
                    );
                }
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}
