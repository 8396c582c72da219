//! File formats: IDX ingestion, CSV datasets/reports, and PGM sample grids.
//!
//! All CSVs are comma-separated with a header row, LF line endings, UTF-8.
//! Reals are written with 17 significant digits so every file round-trips
//! to the exact in-memory value.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::data::Dataset;
use crate::distributions::{ProbVector, Sample};
use crate::error::{Error, Result};
use crate::training::TrainingMetrics;

pub const IDX_MAGIC_IMAGES: u32 = 0x0000_0803;
pub const IDX_MAGIC_LABELS: u32 = 0x0000_0801;

/// Gray level used for grid separators and unfilled cells.
pub const PGM_SEPARATOR: u8 = 128;

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn read_be_u32(bytes: &[u8], offset: usize) -> Result<u32> {
    let end = offset + 4;
    if end > bytes.len() {
        return Err(Error::Data(format!(
            "truncated header: expected {} bytes, found {}",
            end,
            bytes.len()
        )));
    }
    Ok(u32::from_be_bytes([
        bytes[offset],
        bytes[offset + 1],
        bytes[offset + 2],
        bytes[offset + 3],
    ]))
}

/// Parse an IDX file.
///
/// Images (magic `0x00000803`, dimensions `n x rows x cols`, u8 pixels) are
/// scaled to `[0, 1]` and binarized at threshold 0.5 into bit vectors of
/// dimension `rows * cols`. Labels (magic `0x00000801`) become discrete
/// samples.
pub fn load_idx(path: &Path) -> Result<Dataset> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    parse_idx(&bytes, &path.display().to_string())
}

pub fn parse_idx(bytes: &[u8], source: &str) -> Result<Dataset> {
    let magic = read_be_u32(bytes, 0)?;
    match magic {
        IDX_MAGIC_IMAGES => {
            let n = read_be_u32(bytes, 4)? as usize;
            let rows = read_be_u32(bytes, 8)? as usize;
            let cols = read_be_u32(bytes, 12)? as usize;
            let per_image = rows
                .checked_mul(cols)
                .ok_or_else(|| Error::Data("dimension overflow".to_string()))?;
            let expected = n
                .checked_mul(per_image)
                .and_then(|p| p.checked_add(16))
                .ok_or_else(|| Error::Data("dimension overflow".to_string()))?;
            if bytes.len() != expected {
                return Err(Error::Data(format!(
                    "truncated payload: expected {expected} bytes, found {}",
                    bytes.len()
                )));
            }
            let mut samples = Vec::with_capacity(n);
            for i in 0..n {
                let start = 16 + i * per_image;
                let bits: Vec<u8> = bytes[start..start + per_image]
                    .iter()
                    .map(|&px| u8::from(px as f64 / 255.0 > 0.5))
                    .collect();
                samples.push(Sample::Binary(bits));
            }
            Dataset::new(samples, "idx_images", source)
        }
        IDX_MAGIC_LABELS => {
            let n = read_be_u32(bytes, 4)? as usize;
            let expected = n
                .checked_add(8)
                .ok_or_else(|| Error::Data("dimension overflow".to_string()))?;
            if bytes.len() != expected {
                return Err(Error::Data(format!(
                    "truncated payload: expected {expected} bytes, found {}",
                    bytes.len()
                )));
            }
            let samples = bytes[8..]
                .iter()
                .map(|&b| Sample::Discrete(b as usize))
                .collect();
            Dataset::new(samples, "idx_labels", source)
        }
        other => Err(Error::Data(format!(
            "bad magic 0x{other:08x}, expected 0x{IDX_MAGIC_IMAGES:08x} (images) or 0x{IDX_MAGIC_LABELS:08x} (labels)"
        ))),
    }
}

/// Write raw u8 images in IDX format (the inverse of [`load_idx`] up to
/// binarization). Useful for building fixtures and synthetic exports.
pub fn write_idx_images(path: &Path, images: &[Vec<u8>], rows: usize, cols: usize) -> Result<()> {
    let per_image = rows * cols;
    for (i, img) in images.iter().enumerate() {
        if img.len() != per_image {
            return Err(Error::Data(format!(
                "image {i} has {} pixels, expected {per_image}",
                img.len()
            )));
        }
    }
    let mut bytes = Vec::with_capacity(16 + images.len() * per_image);
    bytes.extend_from_slice(&IDX_MAGIC_IMAGES.to_be_bytes());
    bytes.extend_from_slice(&(images.len() as u32).to_be_bytes());
    bytes.extend_from_slice(&(rows as u32).to_be_bytes());
    bytes.extend_from_slice(&(cols as u32).to_be_bytes());
    for img in images {
        bytes.extend_from_slice(img);
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn sample_tokens(s: &Sample) -> Vec<String> {
    match s {
        Sample::Discrete(v) => vec![v.to_string()],
        Sample::Binary(bits) => bits.iter().map(|b| b.to_string()).collect(),
        Sample::Real(xs) => xs.iter().map(|&v| fmt_f64(v)).collect(),
    }
}

fn dataset_header(s: &Sample) -> String {
    match s {
        Sample::Discrete(_) => "x".to_string(),
        Sample::Binary(bits) => (0..bits.len())
            .map(|j| format!("x{j}"))
            .collect::<Vec<_>>()
            .join(","),
        Sample::Real(xs) => (0..xs.len())
            .map(|j| format!("x{j}"))
            .collect::<Vec<_>>()
            .join(","),
    }
}

pub fn write_dataset_csv(path: &Path, data: &Dataset) -> Result<()> {
    let mut out = String::new();
    out.push_str(&dataset_header(&data.samples()[0]));
    out.push('\n');
    for s in data.samples() {
        out.push_str(&sample_tokens(s).join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

fn parse_sample(tokens: &[&str], variant: &str, line: usize) -> Result<Sample> {
    let bad = |t: &str| Error::Data(format!("line {line}: cannot parse `{t}`"));
    match variant {
        "discrete" => {
            let v: usize = tokens[0].parse().map_err(|_| bad(tokens[0]))?;
            Ok(Sample::Discrete(v))
        }
        "binary" => {
            let mut bits = Vec::with_capacity(tokens.len());
            for t in tokens {
                match *t {
                    "0" => bits.push(0),
                    "1" => bits.push(1),
                    other => return Err(bad(other)),
                }
            }
            Ok(Sample::Binary(bits))
        }
        "real" => {
            let mut xs = Vec::with_capacity(tokens.len());
            for t in tokens {
                xs.push(t.parse::<f64>().map_err(|_| bad(t))?);
            }
            Ok(Sample::Real(xs))
        }
        other => Err(Error::Data(format!("unknown sample variant `{other}`"))),
    }
}

/// Infer the variant of a data row: a lone `x` column is discrete; rows
/// whose tokens are all `0`/`1` are binary; anything else is real.
fn infer_variant(header: &[&str], rows: &[Vec<&str>]) -> &'static str {
    if header == ["x"] {
        return "discrete";
    }
    let all_bits = rows
        .iter()
        .all(|r| r.iter().all(|t| *t == "0" || *t == "1"));
    if all_bits {
        "binary"
    } else {
        "real"
    }
}

/// Read a dataset CSV produced by [`write_dataset_csv`]. `variant` forces
/// the interpretation; by default it is inferred from the tokens.
pub fn read_dataset_csv(path: &Path, variant: Option<&str>) -> Result<Dataset> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty file", path.display())))?
        .split(',')
        .collect();
    let rows: Vec<Vec<&str>> = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').collect())
        .collect();
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let variant = match variant {
        Some(v) => v,
        None => infer_variant(&header, &rows),
    };
    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(Error::Data(format!(
                "{}: line {} has {} fields, header has {}",
                path.display(),
                i + 2,
                row.len(),
                header.len()
            )));
        }
        samples.push(parse_sample(row, variant, i + 2)?);
    }
    Dataset::new(samples, "csv", &path.display().to_string())
}

/// Export retained chain samples: header `t,x...`, one row per sample.
pub fn write_chain_csv(path: &Path, steps: &[usize], samples: &[Sample]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("chain samples"));
    }
    if steps.len() != samples.len() {
        return Err(Error::LengthMismatch(steps.len(), samples.len()));
    }
    let mut out = String::new();
    out.push_str("t,");
    out.push_str(&dataset_header(&samples[0]));
    out.push('\n');
    for (t, s) in steps.iter().zip(samples) {
        out.push_str(&t.to_string());
        out.push(',');
        out.push_str(&sample_tokens(s).join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Read a chain CSV back into step indices and samples.
pub fn read_chain_csv(path: &Path, variant: Option<&str>) -> Result<(Vec<usize>, Vec<Sample>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines().map(|l| l.trim_end_matches('\r'));
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Data(format!("{}: empty file", path.display())))?
        .split(',')
        .collect();
    if header.first() != Some(&"t") {
        return Err(Error::Data(format!(
            "{}: chain CSV must start with a `t` column",
            path.display()
        )));
    }
    let rows: Vec<Vec<&str>> = lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').collect())
        .collect();
    if rows.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    let value_rows: Vec<Vec<&str>> = rows.iter().map(|r| r[1..].to_vec()).collect();
    let variant = match variant {
        Some(v) => v,
        None => infer_variant(&header[1..], &value_rows),
    };
    let mut steps = Vec::with_capacity(rows.len());
    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let t: usize = row[0]
            .parse()
            .map_err(|_| Error::Data(format!("line {}: bad step index `{}`", i + 2, row[0])))?;
        steps.push(t);
        samples.push(parse_sample(&row[1..], variant, i + 2)?);
    }
    Ok((steps, samples))
}

pub fn write_metrics_csv(path: &Path, metrics: &TrainingMetrics) -> Result<()> {
    let mut out = String::from("epoch,train_nll,valid_nll,seconds\n");
    for e in &metrics.epochs {
        let valid = e.valid_nll.map(fmt_f64).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            e.epoch,
            fmt_f64(e.train_nll),
            valid,
            fmt_f64(e.seconds)
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// One row of an evaluation report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub metric: String,
    pub value: f64,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = String::from("metric,value,n_samples,seed\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.metric,
            fmt_f64(r.value),
            r.n_samples,
            r.seed
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Look up one metric's value in a report CSV.
pub fn read_report_csv_value(path: &Path, metric: &str) -> Result<f64> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            continue;
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() == 4 && fields[0] == metric {
            return fields[1]
                .parse()
                .map_err(|_| Error::Data(format!("line {}: bad value `{}`", i + 1, fields[1])));
        }
    }
    Err(Error::Data(format!(
        "metric `{metric}` not found in {}",
        path.display()
    )))
}

pub fn write_prob_vector_csv(path: &Path, p: &ProbVector) -> Result<()> {
    let mut out = String::from("state,prob\n");
    for (i, &v) in p.as_slice().iter().enumerate() {
        out.push_str(&format!("{i},{}\n", fmt_f64(v)));
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_prob_vector_csv(path: &Path) -> Result<ProbVector> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Data(format!(
                "{}: line {} has {} fields, expected 2",
                path.display(),
                i + 1,
                fields.len()
            )));
        }
        let state: usize = fields[0]
            .parse()
            .map_err(|_| Error::Data(format!("line {}: bad state `{}`", i + 1, fields[0])))?;
        if state != values.len() {
            return Err(Error::Data(format!(
                "line {}: states must be consecutive from 0",
                i + 1
            )));
        }
        let prob: f64 = fields[1]
            .parse()
            .map_err(|_| Error::Data(format!("line {}: bad probability `{}`", i + 1, fields[1])))?;
        values.push(prob);
    }
    ProbVector::new(values)
}

/// Tile binary samples into a PGM image: each sample is a `side x side`
/// block (bit 1 -> 255, bit 0 -> 0) with 1-pixel separators of gray
/// [`PGM_SEPARATOR`] to its right and below; unfilled cells stay gray.
pub fn write_sample_grid(
    samples: &[Sample],
    rows: usize,
    cols: usize,
    side: usize,
    path: &Path,
) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptyInput("grid samples"));
    }
    if rows * cols < samples.len() {
        return Err(Error::InvalidParameter(format!(
            "{rows}x{cols} grid cannot hold {} samples",
            samples.len()
        )));
    }
    for (i, s) in samples.iter().enumerate() {
        let bits = s.as_binary()?;
        if bits.len() != side * side {
            return Err(Error::InvalidParameter(format!(
                "sample {i} has dimension {}, not the square of side {side}",
                bits.len()
            )));
        }
    }
    let width = cols * (side + 1);
    let height = rows * (side + 1);
    let mut pixels = vec![PGM_SEPARATOR; width * height];
    for (i, s) in samples.iter().enumerate() {
        let bits = s.as_binary()?;
        let (cell_r, cell_c) = (i / cols, i % cols);
        let (top, left) = (cell_r * (side + 1), cell_c * (side + 1));
        for r in 0..side {
            for c in 0..side {
                pixels[(top + r) * width + (left + c)] =
                    if bits[r * side + c] != 0 { 255 } else { 0 };
            }
        }
    }
    let mut out = Vec::with_capacity(32 + pixels.len());
    write!(out, "P5\n{width} {height}\n255\n")?;
    out.extend_from_slice(&pixels);
    fs::write(path, out)?;
    Ok(())
}

/// Parse a binary (P5) PGM: returns `(width, height, pixels)`.
pub fn read_pgm(path: &Path) -> Result<(usize, usize, Vec<u8>)> {
    let bytes = fs::read(path)
        .map_err(|e| Error::Data(format!("cannot read {}: {e}", path.display())))?;
    let mut pos = 0usize;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Data("truncated PGM header".to_string()));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(Error::Data("not a binary PGM (missing P5)".to_string()));
    }
    let width: usize = token()?
        .parse()
        .map_err(|_| Error::Data("bad PGM width".to_string()))?;
    let height: usize = token()?
        .parse()
        .map_err(|_| Error::Data("bad PGM height".to_string()))?;
    let maxval: usize = token()?
        .parse()
        .map_err(|_| Error::Data("bad PGM maxval".to_string()))?;
    if maxval != 255 {
        return Err(Error::Data(format!("unsupported PGM maxval {maxval}")));
    }
    let data_start = pos + 1; // single whitespace after maxval
    let expected = width * height;
    if bytes.len() < data_start + expected {
        return Err(Error::Data(format!(
            "truncated PGM payload: expected {expected} bytes, found {}",
            bytes.len().saturating_sub(data_start)
        )));
    }
    Ok((width, height, bytes[data_start..data_start + expected].to_vec()))
}
