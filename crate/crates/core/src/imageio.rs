//! PGM (portable graymap) codec and CSV export of histograms and transfer functions.
//!
//! Both the plain `P2` and raw `P5` variants are supported. Raw samples are one
//! byte when `maxval < 256` and two big-endian bytes otherwise.

use std::fmt::Write as _;

use thiserror::Error;

use crate::image::{GrayImage, Histogram, ImageError};
use crate::polycurve::PolygonalFunction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PnmError {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("PGM payload truncated: expected {expected} samples, found {found}")]
    TruncatedPayload { expected: usize, found: usize },
    #[error("invalid PGM sample token {0:?}")]
    InvalidSample(String),
    #[error("sample {index} = {value} exceeds maxval {maxval}")]
    SampleOutOfRange {
        index: usize,
        value: u32,
        maxval: u16,
    },
    #[error(transparent)]
    Image(#[from] ImageError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PgmFormat {
    /// `P2`, whitespace-separated decimal samples.
    Ascii,
    /// `P5`, packed samples.
    #[default]
    Binary,
}

impl PgmFormat {
    fn magic(self) -> &'static str {
        match self {
            PgmFormat::Ascii => "P2",
            PgmFormat::Binary => "P5",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PgmHeader {
    pub format: PgmFormat,
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.data.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.data.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn token(&mut self) -> Option<&'a [u8]> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self
            .data
            .get(self.pos)
            .is_some_and(|b| !b.is_ascii_whitespace() && *b != b'#')
        {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.data[start..self.pos])
    }

    fn header_number(&mut self, what: &str) -> Result<u32, PnmError> {
        let tok = self
            .token()
            .ok_or_else(|| PnmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| {
                PnmError::MalformedHeader(format!(
                    "invalid {what} {:?}",
                    String::from_utf8_lossy(tok)
                ))
            })
    }
}

fn parse_header(cursor: &mut Cursor<'_>) -> Result<PgmHeader, PnmError> {
    let format = match cursor.data.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(PnmError::MalformedHeader("expected magic P2 or P5".into())),
    };
    cursor.pos = 2;
    if !cursor
        .data
        .get(2)
        .is_some_and(|b| b.is_ascii_whitespace() || *b == b'#')
    {
        return Err(PnmError::MalformedHeader(
            "magic number must be followed by whitespace".into(),
        ));
    }
    let width = cursor.header_number("width")? as usize;
    let height = cursor.header_number("height")? as usize;
    let maxval = cursor.header_number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!(
            "dimensions must be positive, got {width}x{height}"
        )));
    }
    if !(1..=65535).contains(&maxval) {
        return Err(PnmError::MalformedHeader(format!(
            "maxval must be in 1..=65535, got {maxval}"
        )));
    }
    Ok(PgmHeader {
        format,
        width,
        height,
        maxval: maxval as u16,
    })
}

/// Parses only the header, leaving the raster untouched.
pub fn read_header(bytes: &[u8]) -> Result<PgmHeader, PnmError> {
    parse_header(&mut Cursor {
        data: bytes,
        pos: 0,
    })
}

pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage, PnmError> {
    let mut cursor = Cursor {
        data: bytes,
        pos: 0,
    };
    let header = parse_header(&mut cursor)?;
    let expected = header
        .width
        .checked_mul(header.height)
        .ok_or_else(|| PnmError::MalformedHeader("image too large".into()))?;

    let levels = match header.format {
        PgmFormat::Ascii => read_ascii_samples(&mut cursor, expected, header.maxval)?,
        PgmFormat::Binary => {
            // exactly one whitespace byte separates maxval from the raster
            let payload = match bytes.get(cursor.pos) {
                Some(b) if b.is_ascii_whitespace() => &bytes[cursor.pos + 1..],
                Some(_) => {
                    return Err(PnmError::MalformedHeader(
                        "maxval must be followed by a single whitespace byte".into(),
                    ))
                }
                None => &[],
            };
            read_binary_samples(payload, expected, header.maxval)?
        }
    };
    Ok(GrayImage::new(
        header.width,
        header.height,
        header.maxval,
        levels,
    )?)
}

fn read_ascii_samples(
    cursor: &mut Cursor<'_>,
    expected: usize,
    maxval: u16,
) -> Result<Vec<u16>, PnmError> {
    let mut levels = Vec::with_capacity(expected);
    while levels.len() < expected {
        let Some(tok) = cursor.token() else {
            return Err(PnmError::TruncatedPayload {
                expected,
                found: levels.len(),
            });
        };
        let value: u32 = std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::InvalidSample(String::from_utf8_lossy(tok).into_owned()))?;
        if value > u32::from(maxval) {
            return Err(PnmError::SampleOutOfRange {
                index: levels.len(),
                value,
                maxval,
            });
        }
        levels.push(value as u16);
    }
    Ok(levels)
}

fn read_binary_samples(payload: &[u8], expected: usize, maxval: u16) -> Result<Vec<u16>, PnmError> {
    let width = if maxval > 255 { 2 } else { 1 };
    let found = payload.len() / width;
    if found < expected {
        return Err(PnmError::TruncatedPayload { expected, found });
    }
    let levels: Vec<u16> = if width == 1 {
        payload[..expected].iter().map(|&b| u16::from(b)).collect()
    } else {
        payload[..2 * expected]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]))
            .collect()
    };
    if let Some((index, &value)) = levels.iter().enumerate().find(|(_, &v)| v > maxval) {
        return Err(PnmError::SampleOutOfRange {
            index,
            value: u32::from(value),
            maxval,
        });
    }
    Ok(levels)
}

pub fn write_pgm(image: &GrayImage, format: PgmFormat) -> Vec<u8> {
    let maxval = image.max_level();
    let mut out = format!(
        "{}\n{} {}\n{}\n",
        format.magic(),
        image.width(),
        image.height(),
        maxval
    )
    .into_bytes();
    match format {
        PgmFormat::Binary if maxval > 255 => {
            out.extend(image.levels().iter().flat_map(|l| l.to_be_bytes()));
        }
        PgmFormat::Binary => {
            out.extend(image.levels().iter().map(|&l| l as u8));
        }
        PgmFormat::Ascii => {
            // plain PGM lines should stay within 70 characters
            let mut line = String::new();
            for row in image.levels().chunks(image.width()) {
                for &level in row {
                    let sample = level.to_string();
                    if !line.is_empty() && line.len() + 1 + sample.len() > 70 {
                        out.extend_from_slice(line.as_bytes());
                        out.push(b'\n');
                        line.clear();
                    }
                    if !line.is_empty() {
                        line.push(' ');
                    }
                    line.push_str(&sample);
                }
                out.extend_from_slice(line.as_bytes());
                out.push(b'\n');
                line.clear();
            }
        }
    }
    out
}

pub fn histogram(image: &GrayImage) -> Histogram {
    Histogram::from_image(image)
}

/// `level,count` CSV with one row per level `0..=max_level`.
pub fn export_histogram_csv(histogram: &Histogram) -> String {
    let mut out = String::from("level,count\n");
    for (level, count) in histogram.counts().iter().enumerate() {
        writeln!(out, "{level},{count}").unwrap();
    }
    out
}

/// Samples the transfer function as it is applied to pixels: input clamped to
/// the node span, output clamped to `[0, range_max]`, no rounding.
///
/// `samples` rows are spread evenly over `[0, domain_max]`, endpoints included,
/// and one extra row per node is added with `node` set to 1. Rows are ordered
/// by `v`; at equal `v` the sample row comes first.
pub fn export_function_csv(poly: &PolygonalFunction, samples: usize, domain_max: f64) -> String {
    let samples = samples.max(2);
    let step = domain_max / (samples - 1) as f64;
    let mut rows: Vec<(f64, bool)> = (0..samples)
        .map(|k| {
            let v = if k == samples - 1 {
                domain_max
            } else {
                k as f64 * step
            };
            (v, false)
        })
        .collect();
    rows.extend(poly.nodes().as_slice().iter().map(|&v| (v, true)));
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let top = poly.range_max();
    let mut out = String::from("v,f,node\n");
    for (v, is_node) in rows {
        let f = poly.evaluate_clamped(v).clamp(0.0, top);
        writeln!(out, "{},{},{}", plain(v), plain(f), u8::from(is_node)).unwrap();
    }
    out
}

/// Six decimals with trailing zeros dropped, so `127.5` prints as `127.5` and
/// rounding noise like `7e-15` prints as `0`.
fn plain(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    match s {
        "-0" | "" => "0".to_string(),
        _ => s.to_string(),
    }
}
