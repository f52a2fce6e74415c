//! CSV and SVG writers.
//!
//! Numbers are written with Rust's shortest round-trip formatting (`{:?}`,
//! switching to an exponent for very small or large magnitudes), which is
//! locale-independent and parses back to the identical `f64`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ipr_rmt::ipr::EigRecord;

use crate::error::CliError;

/// Run `body` against `path`, or stdout when `path` is `None`.
///
/// A file that `body` fails to complete is removed.
pub fn with_output<F>(path: Option<&Path>, body: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    match path {
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            body(&mut lock)?;
            lock.flush()?;
            Ok(())
        }
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))?;
            let mut writer = BufWriter::new(file);
            let result = body(&mut writer).and_then(|()| writer.flush().map_err(CliError::from));
            drop(writer);
            if result.is_err() {
                let _ = std::fs::remove_file(path);
            }
            result
        }
    }
}

/// Shortest representation that parses back to exactly `v`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Streaming writer of eigenvalue records.
pub struct RecordsCsv<W: Write> {
    inner: csv::Writer<W>,
    q_set: Vec<u32>,
}

impl<W: Write> RecordsCsv<W> {
    /// Writes the header `trial,idx,re_lambda,im_lambda,is_real,ipr_q…,residual`.
    pub fn new(writer: W, q_set: &[u32]) -> Result<Self, CliError> {
        let mut inner = csv::Writer::from_writer(writer);
        let mut header =
            vec!["trial".to_string(), "idx".into(), "re_lambda".into(), "im_lambda".into(), "is_real".into()];
        header.extend(q_set.iter().map(|q| format!("ipr_q{q}")));
        header.push("residual".into());
        inner.write_record(&header)?;
        Ok(Self { inner, q_set: q_set.to_vec() })
    }

    pub fn write(&mut self, r: &EigRecord) -> Result<(), CliError> {
        let mut row = vec![
            r.trial_id.to_string(),
            r.index.to_string(),
            num(r.re_lambda),
            num(r.im_lambda),
            r.is_real_eig.to_string(),
        ];
        for q in &self.q_set {
            let v = r.ipr.get(q).ok_or_else(|| CliError::Runtime(format!("record lacks IPR of order {q}")))?;
            row.push(num(*v));
        }
        row.push(num(r.residual));
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Write `records` (restricted to the IPR orders in `q_set`) to `path` or stdout.
pub fn write_records_csv(records: &[EigRecord], q_set: &[u32], path: Option<&Path>) -> Result<(), CliError> {
    with_output(path, |w| {
        let mut csv = RecordsCsv::new(w, q_set)?;
        records.iter().try_for_each(|r| csv.write(r))?;
        csv.finish()
    })
}

/// Parse a records CSV written by [`RecordsCsv`].
pub fn read_records_csv<R: io::Read>(reader: R) -> Result<Vec<EigRecord>, CliError> {
    let mut csv = csv::Reader::from_reader(reader);
    let headers = csv.headers()?.clone();
    let bad = |what: &str| CliError::Runtime(format!("malformed records CSV: {what}"));
    let q_cols: Vec<(usize, u32)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("ipr_q").and_then(|q| q.parse().ok()).map(|q| (i, q)))
        .collect();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(name));
    let (trial, idx, re, im, real, res) =
        (col("trial")?, col("idx")?, col("re_lambda")?, col("im_lambda")?, col("is_real")?, col("residual")?);
    let mut out = Vec::new();
    for row in csv.records() {
        let row = row?;
        let field = |i: usize| row.get(i).ok_or_else(|| bad("short row"));
        let float = |i: usize| field(i)?.parse::<f64>().map_err(|_| bad("number"));
        let mut ipr = BTreeMap::new();
        for &(i, q) in &q_cols {
            ipr.insert(q, float(i)?);
        }
        out.push(EigRecord {
            trial_id: field(trial)?.parse().map_err(|_| bad("trial"))?,
            index: field(idx)?.parse().map_err(|_| bad("idx"))?,
            re_lambda: float(re)?,
            im_lambda: float(im)?,
            is_real_eig: field(real)?.parse().map_err(|_| bad("is_real"))?,
            ipr,
            residual: float(res)?,
        });
    }
    Ok(out)
}

/// Two-column CSV `x,<value_name>`.
pub fn write_xy_csv(xs: &[f64], ys: &[f64], value_name: &str, path: Option<&Path>) -> Result<(), CliError> {
    if xs.len() != ys.len() {
        return Err(CliError::Runtime(format!("{} abscissae but {} values", xs.len(), ys.len())));
    }
    with_output(path, |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["x", value_name])?;
        for (x, y) in xs.iter().zip(ys) {
            csv.write_record([num(*x), num(*y)])?;
        }
        csv.flush()?;
        Ok(())
    })
}

/// Density table with header `x,density`.
pub fn write_density_csv(grid: &[f64], values: &[f64], path: Option<&Path>) -> Result<(), CliError> {
    write_xy_csv(grid, values, "density", path)
}

/// Three-stop viridis-like ramp, `t ∈ [0, 1]`.
fn color(t: f64) -> String {
    const STOPS: [[f64; 3]; 3] = [[68.0, 1.0, 84.0], [33.0, 145.0, 140.0], [253.0, 231.0, 37.0]];
    let t = t.clamp(0.0, 1.0) * 2.0;
    let (lo, hi, f) = if t < 1.0 { (STOPS[0], STOPS[1], t) } else { (STOPS[1], STOPS[2], t - 1.0) };
    let c: Vec<u8> = (0..3).map(|k| (lo[k] + f * (hi[k] - lo[k])).round() as u8).collect();
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}

/// Scatter of the eigenvalues coloured by `IPR_q`, on a linear scale clipped
/// to `[q!, (2q−1)!!]`. Non-real eigenvalues of real matrices are mirrored so
/// the full conjugate-symmetric spectrum is drawn.
pub fn write_svg_scatter(records: &[EigRecord], q: u32, mirror: bool, path: Option<&Path>) -> Result<(), CliError> {
    let lo: f64 = (1..=q).map(f64::from).product();
    let hi: f64 = (1..=q).map(|i| f64::from(2 * i - 1)).product();
    let mut points = Vec::with_capacity(2 * records.len());
    for r in records {
        let v = *r.ipr.get(&q).ok_or_else(|| CliError::Runtime(format!("records lack IPR of order {q}")))?;
        points.push((r.re_lambda, r.im_lambda, v));
        if mirror && !r.is_real_eig {
            points.push((r.re_lambda, -r.im_lambda, v));
        }
    }
    let extent = points.iter().fold(1e-12f64, |m, &(x, y, _)| m.max(x.abs()).max(y.abs())) * 1.05;
    let (size, margin) = (600.0, 40.0);
    let scale = (size - 2.0 * margin) / (2.0 * extent);
    with_output(path, |w| {
        writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
        writeln!(
            w,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{size}" height="{h}" viewBox="0 0 {size} {h}">"#,
            h = size + 30.0
        )?;
        writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#)?;
        let c = size / 2.0;
        writeln!(
            w,
            r##"<line x1="{margin}" y1="{c}" x2="{e}" y2="{c}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
            e = size - margin
        )?;
        writeln!(
            w,
            r##"<line x1="{c}" y1="{margin}" x2="{c}" y2="{e}" stroke="#bbbbbb" stroke-width="0.5"/>"##,
            e = size - margin
        )?;
        writeln!(w, "<g>")?;
        for (x, y, v) in &points {
            let t = (v - lo) / (hi - lo);
            writeln!(
                w,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{}"/>"#,
                c + x * scale,
                c - y * scale,
                color(t)
            )?;
        }
        writeln!(w, "</g>")?;
        writeln!(
            w,
            r#"<text x="{margin}" y="{}" font-family="sans-serif" font-size="12">IPR_{q}: {} eigenvalues, colour {lo} (dark) to {hi} (light), axes ±{extent:.3}</text>"#,
            size + 10.0,
            points.len()
        )?;
        writeln!(w, "</svg>")?;
        Ok(())
    })
}
