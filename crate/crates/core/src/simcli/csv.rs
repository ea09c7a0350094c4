use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rxchain::TrialRecord;

pub const CSV_HEADER: &str =
    "seed,snr_db,packets,windows_used,estimator_L,true_L,doppler_fdT,csi_mode,nmse,ber,residual";

/// 17 significant digits; exact zero prints as `0`.
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

pub fn render_csv(records: &[TrialRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.seed,
            format_real(r.snr_db),
            r.packets,
            r.windows_used,
            r.estimator_l,
            r.true_l,
            format_real(r.doppler_fdt),
            r.csi_mode,
            format_real(r.nmse),
            format_real(r.ber),
            format_real(r.residual),
        );
    }
    out
}

/// Writes the CSV through a temporary sibling so a failed run never leaves a
/// truncated file behind.
pub fn emit_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to write".into()));
    }
    write_atomic(path, &render_csv(records))
}

pub(crate) fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = std::path::PathBuf::from(tmp);
    std::fs::write(&tmp, contents).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        Error::io(path, e)
    })
}
