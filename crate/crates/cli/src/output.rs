//! Sweep CSV serialization and plot-data extraction.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mfqec::threshold::{SweepPoint, ThresholdEstimate};

pub const HEADER: [&str; 11] =
    ["code", "variant", "p", "trials", "failures", "censored", "mean_cycles", "p_log", "ci_low", "ci_high", "seed"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders the CSV, optionally flagged as partial and with a threshold line.
pub fn render_csv(
    code: &str,
    variant: &str,
    seed: u64,
    points: &[SweepPoint],
    threshold: Option<&ThresholdEstimate>,
    partial: bool,
) -> String {
    let mut out = Vec::new();
    if partial {
        out.extend_from_slice(b"# partial=true\n");
    }
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(HEADER).expect("in-memory write");
        for pt in points {
            w.write_record([
                code.to_string(),
                variant.to_string(),
                fmt_f64(pt.p),
                pt.n_trials.to_string(),
                pt.n_failures().to_string(),
                pt.n_censored.to_string(),
                fmt_f64(pt.mean_cycles),
                fmt_f64(pt.p_log),
                fmt_f64(pt.ci_low),
                fmt_f64(pt.ci_high),
                seed.to_string(),
            ])
            .expect("in-memory write");
        }
        w.flush().expect("in-memory write");
    }
    let mut text = String::from_utf8(out).expect("csv output is utf-8");
    if let Some(t) = threshold {
        text.push_str(&threshold_line(code, variant, t));
        text.push('\n');
    }
    text
}

pub fn threshold_line(code: &str, variant: &str, t: &ThresholdEstimate) -> String {
    format!(
        "# threshold code={code} variant={variant} p_th={} p_lo={} p_hi={} ci_low={} ci_high={}",
        fmt_f64(t.p_th),
        fmt_f64(t.p_lo),
        fmt_f64(t.p_hi),
        fmt_f64(t.ci_low),
        fmt_f64(t.ci_high)
    )
}

/// Writes via a temporary file so readers never see a torn file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(tmp, path)
}

#[derive(Debug, thiserror::Error)]
pub enum PlotError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("CSV is missing column `{0}`")]
    MissingColumn(&'static str),
    #[error("row {row}: column `{column}` is not a number: {value:?}")]
    BadNumber { row: usize, column: &'static str, value: String },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// Files written by [`emit_plot_data`].
#[derive(Debug, Default, PartialEq)]
pub struct PlotFiles {
    pub curves: Vec<PathBuf>,
    pub identity: PathBuf,
}

/// One `p p_log` file per (code, variant) plus `<stem>_identity.dat`, both
/// columns in log-log-ready form with full precision.
pub fn emit_plot_data(csv_path: &Path, out_dir: &Path) -> Result<PlotFiles, PlotError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| PlotError::Io { path, source }
    };
    let text = fs::read_to_string(csv_path).map_err(io_err(csv_path))?;
    let stem = csv_path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep").to_string();
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut curves: BTreeMap<(String, String), Vec<(f64, f64)>> = BTreeMap::new();
    if !text.trim().is_empty() {
        let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
        let headers = reader.headers()?.clone();
        let col = |name: &'static str| headers.iter().position(|h| h == name).ok_or(PlotError::MissingColumn(name));
        let (ic, iv, ip, il) = (col("code")?, col("variant")?, col("p")?, col("p_log")?);
        for (row, rec) in reader.records().enumerate() {
            let rec = rec?;
            let num = |i: usize, column: &'static str| {
                let value = rec.get(i).unwrap_or("");
                value.parse::<f64>().map_err(|_| PlotError::BadNumber { row: row + 1, column, value: value.into() })
            };
            let key = (rec.get(ic).unwrap_or("").to_string(), rec.get(iv).unwrap_or("").to_string());
            curves.entry(key).or_default().push((num(ip, "p")?, num(il, "p_log")?));
        }
    }

    let mut files = PlotFiles { identity: out_dir.join(format!("{stem}_identity.dat")), ..Default::default() };
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for ((code, variant), pts) in &curves {
        let path = out_dir.join(format!("{stem}_{code}_{variant}.dat"));
        let mut body = String::new();
        for &(p, p_log) in pts {
            lo = lo.min(p);
            hi = hi.max(p);
            body.push_str(&format!("{} {}\n", fmt_f64(p), fmt_f64(p_log)));
        }
        fs::write(&path, body).map_err(io_err(&path))?;
        files.curves.push(path);
    }
    let identity = if lo <= hi {
        format!("{a} {a}\n{b} {b}\n", a = fmt_f64(lo), b = fmt_f64(hi))
    } else {
        String::new()
    };
    fs::write(&files.identity, identity).map_err(io_err(&files.identity))?;
    Ok(files)
}
