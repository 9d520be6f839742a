use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::curves::C64;
use crate::error::{Error, Result};

/// C's `%.17g`: 17 significant digits, trailing zeros removed, exponent
/// notation outside `1e-4 ≤ |x| < 1e17`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{x:.*}", (16 - exp) as usize)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Provenance line written at the top of every output file.
#[derive(Clone, Debug, PartialEq)]
pub struct Stamp {
    pub config_hash: String,
    pub scale: f64,
}

impl Stamp {
    pub fn line(&self) -> String {
        format!("config_hash={},scale={}", self.config_hash, fmt_g17(self.scale))
    }
}

/// CSV file with a `# config_hash=…` comment line and a mandatory header.
pub struct Table {
    path: PathBuf,
    writer: csv::Writer<File>,
}

impl Table {
    pub fn create(path: &Path, stamp: &Stamp, header: &[&str]) -> Result<Self> {
        let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
        std::io::Write::write_all(&mut file, format!("# {}\n", stamp.line()).as_bytes())
            .map_err(|e| Error::io(path, e))?;
        let mut writer = csv::Writer::from_writer(file);
        writer.write_record(header).map_err(|e| csv_error(path, e))?;
        Ok(Table { path: path.to_owned(), writer })
    }

    pub fn row<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.writer.write_record(fields).map_err(|e| csv_error(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Format { path: path.display().to_string(), reason: e.to_string() }
}

pub fn write_matrix(path: &Path, stamp: &Stamp, m: &DMatrix<C64>) -> Result<()> {
    let mut t = Table::create(path, stamp, &["i", "j", "re", "im"])?;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let v = m[(i, j)];
            t.row([i.to_string(), j.to_string(), fmt_g17(v.re), fmt_g17(v.im)])?;
        }
    }
    t.finish()
}

/// Reads a square matrix written by [`write_matrix`].
pub fn read_matrix(path: &Path) -> Result<DMatrix<C64>> {
    let bad = |reason: String| Error::Format { path: path.display().to_string(), reason };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => bad(format!("{other:?}")),
        })?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 4 {
            return Err(bad(format!("expected 4 fields, got {}", record.len())));
        }
        let idx = |k: usize| record[k].parse::<usize>().map_err(|e| bad(e.to_string()));
        let num = |k: usize| record[k].parse::<f64>().map_err(|e| bad(e.to_string()));
        entries.push((idx(0)?, idx(1)?, C64::new(num(2)?, num(3)?)));
    }
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n * n != entries.len() || n == 0 {
        return Err(bad(format!("{} entries do not form a square matrix", entries.len())));
    }
    let mut m = DMatrix::from_element(n, n, C64::new(f64::NAN, 0.0));
    for (i, j, v) in entries {
        if i >= n || j >= n {
            return Err(bad(format!("index ({i}, {j}) out of range for size {n}")));
        }
        m[(i, j)] = v;
    }
    if m.iter().any(|v| v.re.is_nan()) {
        return Err(bad("missing entries".into()));
    }
    Ok(m)
}

/// One closed polyline of an overlay.
pub struct Polyline<'a> {
    pub points: &'a [C64],
    pub color: &'a str,
    pub width: f64,
}

/// Writes polylines and an optional marker, with the y axis pointing up.
pub fn write_svg(
    path: &Path,
    stamp: &Stamp,
    lines: &[Polyline],
    marker: Option<C64>,
) -> Result<()> {
    let all = lines.iter().flat_map(|l| l.points.iter()).chain(marker.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in all {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0).max(1e-12);
    let (w, h) = (x1 - x0 + 2.0 * pad, y1 - y0 + 2.0 * pad);
    let unit = w.max(h) / 400.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="{}" height="{}">"#,
        fmt_g17(x0 - pad),
        fmt_g17(-y1 - pad),
        fmt_g17(w),
        fmt_g17(h),
        (600.0 * w / w.max(h)).round(),
        (600.0 * h / w.max(h)).round()
    );
    let _ = writeln!(s, "<!-- {} -->", stamp.line());
    for l in lines {
        let pts: Vec<String> = l
            .points
            .iter()
            .map(|p| format!("{},{}", fmt_g17(p.re), fmt_g17(-p.im)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="{}" stroke-width="{}"/>"#,
            pts.join(" "),
            l.color,
            fmt_g17(l.width * unit)
        );
    }
    if let Some(r) = marker {
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}" fill="blue"/>"#,
            fmt_g17(r.re),
            fmt_g17(-r.im),
            fmt_g17(3.0 * unit)
        );
    }
    s.push_str("</svg>\n");
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}
