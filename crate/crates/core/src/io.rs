//! Text and image artifacts: turbine time series, slice grids, heatmaps.
//!
//! Every text format accepts leading `#` comment lines, which carry
//! provenance such as the config hash.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rotor::{TurbineSample, TurbineTimeSeries};
use crate::wake::SliceField;

pub const TIMESERIES_COLUMNS: [&str; 15] = [
    "t", "psi", "theta1", "theta2", "theta3", "F1", "F2", "F3", "M1", "M2", "M3", "thrust", "Mtilt", "Myaw", "power",
];

/// Upper bound on grid cells accepted by the parsers.
pub const MAX_GRID_CELLS: usize = 1 << 22;

const PIXELS_PER_CELL: u32 = 4;

fn comment_block(comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        for line in c.lines() {
            writeln!(out, "# {line}").unwrap();
        }
    }
    out
}

fn parse_f64(token: &str, line: usize, what: &str) -> Result<f64> {
    token
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::parse(line, format!("bad number `{token}` for {what}")))
}

pub fn timeseries_to_csv(series: &TurbineTimeSeries, comments: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TIMESERIES_COLUMNS)?;
    for s in &series.samples {
        let row = [
            s.t, s.psi, s.pitch[0], s.pitch[1], s.pitch[2], s.force[0], s.force[1], s.force[2], s.moment[0],
            s.moment[1], s.moment[2], s.thrust, s.m_tilt, s.m_yaw, s.power,
        ];
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = comment_block(comments);
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// Parses a time-series CSV; `dt` is taken from the first two samples.
pub fn timeseries_from_csv(text: &str) -> Result<TurbineTimeSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader.headers()?.clone();
    if header.iter().ne(TIMESERIES_COLUMNS.iter().copied()) {
        return Err(Error::parse(1, "unexpected time-series header"));
    }
    let mut samples = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != TIMESERIES_COLUMNS.len() {
            return Err(Error::parse(line, format!("expected {} fields, got {}", TIMESERIES_COLUMNS.len(), rec.len())));
        }
        let mut v = [0.0; 15];
        for (i, slot) in v.iter_mut().enumerate() {
            *slot = parse_f64(&rec[i], line, TIMESERIES_COLUMNS[i])?;
        }
        samples.push(TurbineSample {
            t: v[0],
            psi: v[1],
            pitch: [v[2], v[3], v[4]],
            force: [v[5], v[6], v[7]],
            moment: [v[8], v[9], v[10]],
            thrust: v[11],
            m_tilt: v[12],
            m_yaw: v[13],
            power: v[14],
        });
    }
    if samples.len() < 2 {
        return Err(Error::parse(0, "time series needs at least two samples"));
    }
    let series = TurbineTimeSeries {
        dt: samples[1].t - samples[0].t,
        samples,
    };
    series.validate()?;
    Ok(series)
}

/// Plain-text grid: five `key value` header lines, then `nz` rows of `ny`
/// whitespace-separated velocities, lowest `z` first.
pub fn slice_to_grid(slice: &SliceField, comments: &[String]) -> String {
    let mut out = comment_block(comments);
    writeln!(out, "x_over_d {}", slice.x_over_d).unwrap();
    writeln!(out, "ny {}", slice.ny).unwrap();
    writeln!(out, "nz {}", slice.nz).unwrap();
    writeln!(out, "dy {}", slice.dy).unwrap();
    writeln!(out, "dz {}", slice.dz).unwrap();
    for row in slice.values.chunks(slice.ny) {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn slice_from_grid(text: &str) -> Result<SliceField> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let mut header = [0.0; 5];
    for (slot, key) in header.iter_mut().zip(["x_over_d", "ny", "nz", "dy", "dz"]) {
        let (n, line) = lines
            .next()
            .ok_or_else(|| Error::parse(0, format!("missing `{key}` header")))?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(key) {
            return Err(Error::parse(n, format!("expected `{key}` header")));
        }
        let value = parts.next().ok_or_else(|| Error::parse(n, format!("`{key}` has no value")))?;
        if parts.next().is_some() {
            return Err(Error::parse(n, format!("trailing tokens after `{key}`")));
        }
        *slot = parse_f64(value, n, key)?;
    }
    let count = |v: f64, key: &str| -> Result<usize> {
        if v.fract() != 0.0 || !(2.0..=MAX_GRID_CELLS as f64).contains(&v) {
            return Err(Error::parse(0, format!("`{key}` must be an integer in [2, {MAX_GRID_CELLS}], got {v}")));
        }
        Ok(v as usize)
    };
    let (ny, nz) = (count(header[1], "ny")?, count(header[2], "nz")?);
    if ny.saturating_mul(nz) > MAX_GRID_CELLS {
        return Err(Error::parse(0, format!("grid {ny}×{nz} exceeds {MAX_GRID_CELLS} cells")));
    }
    let (x_over_d, dy, dz) = (header[0], header[3], header[4]);
    if !x_over_d.is_finite() || !(dy.is_finite() && dy > 0.0) || !(dz.is_finite() && dz > 0.0) {
        return Err(Error::parse(0, "x_over_d must be finite and dy, dz positive"));
    }

    let mut values = Vec::with_capacity(ny * nz);
    let mut rows = 0;
    for (n, line) in lines {
        if rows == nz {
            return Err(Error::parse(n, format!("more than {nz} rows")));
        }
        let before = values.len();
        for tok in line.split_whitespace() {
            let v = parse_f64(tok, n, "velocity")?;
            if !v.is_finite() {
                return Err(Error::parse(n, "non-finite velocity"));
            }
            values.push(v);
            if values.len() - before > ny {
                return Err(Error::parse(n, format!("more than {ny} values in row")));
            }
        }
        if values.len() - before != ny {
            return Err(Error::parse(n, format!("expected {ny} values, got {}", values.len() - before)));
        }
        rows += 1;
    }
    if rows != nz {
        return Err(Error::parse(0, format!("expected {nz} rows, got {rows}")));
    }
    Ok(SliceField {
        x_over_d,
        ny,
        nz,
        dy,
        dz,
        values,
    })
}

/// Long-format CSV with columns `y, z, u` in metres and m/s.
pub fn slice_to_csv(slice: &SliceField, comments: &[String]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["y", "z", "u"])?;
    for k in 0..slice.nz {
        for j in 0..slice.ny {
            w.write_record([slice.y(j), slice.z(k), slice.at(j, k)].iter().map(|v| v.to_string()))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let mut out = comment_block(comments);
    writeln!(out, "# x_over_d: {}", slice.x_over_d).unwrap();
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}

/// Blue-white-red map of `t ∈ [-1, 1]`.
pub fn diverging_color(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(-1.0, 1.0) } else { 0.0 };
    let (lo, hi) = ([59.0, 76.0, 192.0], [180.0, 4.0, 38.0]);
    let white = [247.0, 247.0, 247.0];
    let (end, s) = if t < 0.0 { (lo, -t) } else { (hi, t) };
    [0, 1, 2].map(|i| (white[i] + (end[i] - white[i]) * s).round() as u8)
}

/// Rasterizes `slice - center` on a diverging scale symmetric about zero,
/// with `+z` up and `+y` to the right.
pub fn heatmap_image(slice: &SliceField, center: f64) -> image::RgbImage {
    let span = slice
        .values
        .iter()
        .map(|v| (v - center).abs())
        .fold(0.0, f64::max);
    let (w, h) = (slice.ny as u32 * PIXELS_PER_CELL, slice.nz as u32 * PIXELS_PER_CELL);
    image::RgbImage::from_fn(w, h, |px, py| {
        let j = (px / PIXELS_PER_CELL) as usize;
        let k = slice.nz - 1 - (py / PIXELS_PER_CELL) as usize;
        let t = if span > 0.0 { (slice.at(j, k) - center) / span } else { 0.0 };
        image::Rgb(diverging_color(t))
    })
}

pub fn write_heatmap(slice: &SliceField, center: f64, path: &Path) -> Result<()> {
    heatmap_image(slice, center).save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
