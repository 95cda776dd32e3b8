//! Image and label-map files.
//!
//! Images: binary PPM (`P6`, maxval up to 255) and 8-bit PNG (gray or RGB;
//! alpha is dropped). Label maps: the `SINL1` binary form, CSV, and 8/16-bit
//! binary PGM (`P5`).
//!
//! `SINL1` layout: the five magic bytes, then height, width and label count as
//! little-endian `u32`, then `height * width` little-endian `u32` labels.

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{ImageGrid, LabelMap};

pub const LABEL_MAGIC: &[u8; 5] = b"SINL1";
const LABEL_HEADER_LEN: usize = 5 + 12;

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Netpbm header reader. Tracks the byte offset for error reporting.
struct PnmHeader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PnmHeader<'a> {
    fn skip_space_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while self.bytes.get(self.pos).is_some_and(|&b| b != b'\n') {
                    self.pos += 1;
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::decode(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::decode(start, format!("{what} out of range")))
    }

    /// Parses `magic width height maxval` plus the single separator byte.
    fn parse(bytes: &'a [u8], magic: &[u8; 2]) -> Result<(usize, usize, usize, usize)> {
        if bytes.len() < 2 || &bytes[..2] != magic {
            return Err(Error::decode(
                0,
                format!("missing {} magic", String::from_utf8_lossy(magic)),
            ));
        }
        let mut header = PnmHeader { bytes, pos: 2 };
        let width = header.number("width")?;
        let height = header.number("height")?;
        let maxval = header.number("maxval")?;
        match bytes.get(header.pos) {
            Some(b) if b.is_ascii_whitespace() => header.pos += 1,
            _ => {
                return Err(Error::decode(
                    header.pos,
                    "expected whitespace after maxval",
                ))
            }
        }
        if width == 0 || height == 0 {
            return Err(Error::decode(2, "zero image dimension"));
        }
        Ok((width, height, maxval, header.pos))
    }
}

pub fn decode_ppm(bytes: &[u8]) -> Result<ImageGrid> {
    let (width, height, maxval, start) = PnmHeader::parse(bytes, b"P6")?;
    if maxval == 0 || maxval > 255 {
        return Err(Error::decode(
            start - 1,
            format!("unsupported maxval {maxval}"),
        ));
    }
    let need = width * height * 3;
    let payload = &bytes[start..];
    if payload.len() < need {
        return Err(Error::decode(
            bytes.len(),
            format!("truncated pixel data: {} of {need} bytes", payload.len()),
        ));
    }
    let scale = maxval as f32;
    let data = payload[..need]
        .iter()
        .map(|&b| (b as f32 / scale).min(1.0))
        .collect();
    ImageGrid::new(height, width, 3, data)
}

struct CountingReader<'a> {
    inner: &'a [u8],
    consumed: usize,
}

impl Read for CountingReader<'_> {
    fn read(&mut self, buf: &mut [u8]) -> std::io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.consumed += n;
        Ok(n)
    }
}

pub fn decode_png(bytes: &[u8]) -> Result<ImageGrid> {
    let mut reader = CountingReader {
        inner: bytes,
        consumed: 0,
    };
    let mut decoder = png::Decoder::new(&mut reader);
    decoder.set_transformations(png::Transformations::EXPAND | png::Transformations::STRIP_16);
    let mut png_reader = decoder
        .read_info()
        .map_err(|e| Error::decode(0, format!("png header: {e}")))?;
    let mut buf = vec![0; png_reader.output_buffer_size()];
    let frame = png_reader.next_frame(&mut buf);
    let info = match frame {
        Ok(info) => info,
        Err(e) => {
            drop(png_reader);
            return Err(Error::decode(reader.consumed, format!("png data: {e}")));
        }
    };
    let (w, h) = (info.width as usize, info.height as usize);
    let pixels = &buf[..info.buffer_size()];
    let (channels, data): (usize, Vec<f32>) = match info.color_type {
        png::ColorType::Grayscale => (1, pixels.iter().map(|&b| b as f32 / 255.0).collect()),
        png::ColorType::GrayscaleAlpha => (
            1,
            pixels
                .chunks_exact(2)
                .map(|p| p[0] as f32 / 255.0)
                .collect(),
        ),
        png::ColorType::Rgb => (3, pixels.iter().map(|&b| b as f32 / 255.0).collect()),
        png::ColorType::Rgba => (
            3,
            pixels
                .chunks_exact(4)
                .flat_map(|p| [p[0], p[1], p[2]])
                .map(|b| b as f32 / 255.0)
                .collect(),
        ),
        png::ColorType::Indexed => {
            return Err(Error::decode(0, "palette PNG was not expanded"));
        }
    };
    ImageGrid::new(h, w, channels, data)
}

/// Decodes PPM or PNG, chosen by magic bytes.
pub fn decode_image(bytes: &[u8]) -> Result<ImageGrid> {
    if bytes.starts_with(b"P6") {
        decode_ppm(bytes)
    } else if bytes.starts_with(b"\x89PNG") {
        decode_png(bytes)
    } else {
        Err(Error::decode(
            0,
            "unrecognized image format (expected P6 PPM or PNG)",
        ))
    }
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    decode_image(&read_file(path.as_ref())?)
}

#[inline]
fn to_byte(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

fn rgb_bytes(image: &ImageGrid) -> Vec<u8> {
    image.to_rgb().data().iter().map(|&v| to_byte(v)).collect()
}

pub fn encode_ppm(image: &ImageGrid) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(rgb_bytes(image));
    out
}

pub fn encode_png(image: &ImageGrid) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut encoder = png::Encoder::new(&mut out, image.width() as u32, image.height() as u32);
        let (color, data) = match image.channels() {
            1 => (
                png::ColorType::Grayscale,
                image.data().iter().map(|&v| to_byte(v)).collect(),
            ),
            _ => (png::ColorType::Rgb, rgb_bytes(image)),
        };
        encoder.set_color(color);
        encoder.set_depth(png::BitDepth::Eight);
        let mut writer = encoder
            .write_header()
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
        writer
            .write_image_data(&data)
            .map_err(|e| Error::invalid(format!("png encode: {e}")))?;
    }
    Ok(out)
}

/// Writes PNG, or PPM when the extension is `.ppm`.
pub fn save_image(image: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = match extension(path).as_deref() {
        Some("ppm") => encode_ppm(image),
        _ => encode_png(image)?,
    };
    write_file(path, &bytes)
}

fn extension(path: &Path) -> Option<String> {
    path.extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelFormat {
    Binary,
    Csv,
    Pgm,
}

impl LabelFormat {
    /// `.csv` and `.pgm` by extension, binary otherwise.
    pub fn from_path(path: &Path) -> Self {
        match extension(path).as_deref() {
            Some("csv") => LabelFormat::Csv,
            Some("pgm") => LabelFormat::Pgm,
            _ => LabelFormat::Binary,
        }
    }
}

fn label_count(map: &LabelMap) -> u32 {
    map.max_label().map_or(0, |m| m + 1)
}

pub fn encode_label_map(map: &LabelMap, format: LabelFormat) -> Result<Vec<u8>> {
    Ok(match format {
        LabelFormat::Binary => {
            let mut out = Vec::with_capacity(LABEL_HEADER_LEN + map.len() * 4);
            out.extend_from_slice(LABEL_MAGIC);
            for v in [map.height() as u32, map.width() as u32, label_count(map)] {
                out.extend_from_slice(&v.to_le_bytes());
            }
            for l in map.labels() {
                out.extend_from_slice(&l.to_le_bytes());
            }
            out
        }
        LabelFormat::Csv => {
            let mut out = String::with_capacity(map.len() * 4);
            for row in map.rows() {
                let cells: Vec<String> = row.iter().map(u32::to_string).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out.into_bytes()
        }
        LabelFormat::Pgm => {
            let max = map.max_label().unwrap_or(0);
            if max > u16::MAX as u32 {
                return Err(Error::invalid(format!(
                    "label {max} does not fit a 16-bit PGM"
                )));
            }
            let mut out = format!("P5\n{} {}\n65535\n", map.width(), map.height()).into_bytes();
            for &l in map.labels() {
                out.extend_from_slice(&(l as u16).to_be_bytes());
            }
            out
        }
    })
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn decode_binary_labels(bytes: &[u8]) -> Result<LabelMap> {
    if bytes.len() < LABEL_HEADER_LEN {
        return Err(Error::decode(bytes.len(), "truncated label map header"));
    }
    let height = read_u32(bytes, 5) as usize;
    let width = read_u32(bytes, 9) as usize;
    let count = read_u32(bytes, 13);
    let need = height * width * 4;
    let payload = &bytes[LABEL_HEADER_LEN..];
    if payload.len() != need {
        return Err(Error::decode(
            LABEL_HEADER_LEN + payload.len().min(need),
            format!("expected {need} payload bytes, found {}", payload.len()),
        ));
    }
    let labels: Vec<u32> = payload
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if let Some(pos) = labels.iter().position(|&l| l >= count) {
        return Err(Error::decode(
            LABEL_HEADER_LEN + pos * 4,
            format!("label {} not below declared count {count}", labels[pos]),
        ));
    }
    LabelMap::new(height, width, labels)
}

fn decode_csv_labels(bytes: &[u8]) -> Result<LabelMap> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| Error::decode(e.valid_up_to(), "CSV is not UTF-8"))?;
    let mut labels = Vec::new();
    let mut width = None;
    let mut height = 0;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let start = offset;
        offset += line.len();
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let before = labels.len();
        for cell in trimmed.split(',') {
            let v = cell
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::decode(start, format!("bad label {:?}", cell.trim())))?;
            labels.push(v);
        }
        let row_len = labels.len() - before;
        match width {
            None => width = Some(row_len),
            Some(w) if w != row_len => {
                return Err(Error::decode(
                    start,
                    format!("row has {row_len} labels, expected {w}"),
                ));
            }
            _ => {}
        }
        height += 1;
    }
    let Some(width) = width else {
        return Err(Error::decode(0, "empty label CSV"));
    };
    LabelMap::new(height, width, labels)
}

fn decode_pgm_labels(bytes: &[u8]) -> Result<LabelMap> {
    let (width, height, maxval, start) = PnmHeader::parse(bytes, b"P5")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::decode(
            start - 1,
            format!("unsupported maxval {maxval}"),
        ));
    }
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let payload = &bytes[start..];
    if payload.len() < need {
        return Err(Error::decode(
            bytes.len(),
            format!("truncated PGM data: {} of {need} bytes", payload.len()),
        ));
    }
    let labels = if wide {
        payload[..need]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
            .collect()
    } else {
        payload[..need].iter().map(|&b| b as u32).collect()
    };
    LabelMap::new(height, width, labels)
}

/// Decodes any label-map form, chosen by content.
pub fn decode_label_map(bytes: &[u8]) -> Result<LabelMap> {
    if bytes.starts_with(LABEL_MAGIC) {
        decode_binary_labels(bytes)
    } else if bytes.starts_with(b"P5") {
        decode_pgm_labels(bytes)
    } else if bytes.first().is_some_and(u8::is_ascii_digit) {
        decode_csv_labels(bytes)
    } else {
        Err(Error::decode(0, "bad label map magic"))
    }
}

pub fn save_label_map(map: &LabelMap, path: impl AsRef<Path>, format: LabelFormat) -> Result<()> {
    write_file(path.as_ref(), &encode_label_map(map, format)?)
}

pub fn load_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    decode_label_map(&read_file(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const PPM_2X2: &[u8] =
        b"P6\n# fixture\n2 2\n255\n\x00\x7f\xff\x01\x02\x03\x10\x20\x30\xff\xff\xff";

    #[test]
    fn ppm_fixture_values() {
        let img = decode_image(PPM_2X2).unwrap();
        assert_eq!(img.dims(), (2, 2));
        assert_eq!(img.pixel(0, 0), &[0.0, 127.0 / 255.0, 1.0]);
        assert_eq!(img.pixel(0, 1), &[1.0 / 255.0, 2.0 / 255.0, 3.0 / 255.0]);
        assert_eq!(img.pixel(1, 1), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn truncated_ppm_reports_offset() {
        let cut = &PPM_2X2[..PPM_2X2.len() - 2];
        match decode_image(cut) {
            Err(Error::Decode { offset, .. }) => assert_eq!(offset, cut.len()),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            decode_image(b"P6\n2 x\n"),
            Err(Error::Decode { offset: 5, .. })
        ));
        assert!(decode_image(b"GIF89a").is_err());
    }

    #[test]
    fn png_and_ppm_agree() {
        let ppm = decode_image(PPM_2X2).unwrap();
        let png = decode_image(&encode_png(&ppm).unwrap()).unwrap();
        assert_eq!(ppm, png);
    }

    #[test]
    fn corrupt_png_is_an_error() {
        let img = decode_image(PPM_2X2).unwrap();
        let mut bytes = encode_png(&img).unwrap();
        let n = bytes.len();
        bytes.truncate(n - 20);
        assert!(matches!(decode_image(&bytes), Err(Error::Decode { .. })));
    }

    #[test]
    fn csv_form() {
        let m = LabelMap::from_rows(&[[0, 1], [2, 3]]);
        let bytes = encode_label_map(&m, LabelFormat::Csv).unwrap();
        assert_eq!(bytes, b"0,1\n2,3\n");
        assert_eq!(decode_label_map(&bytes).unwrap(), m);
        assert!(matches!(
            decode_label_map(b"0,1\n2\n"),
            Err(Error::Decode { offset: 4, .. })
        ));
    }

    #[test]
    fn binary_form() {
        let m = LabelMap::from_rows(&[[0, 1, 2], [3, 4, 5], [6, 7, 8]]);
        let bytes = encode_label_map(&m, LabelFormat::Binary).unwrap();
        assert_eq!(bytes.len() - LABEL_HEADER_LEN, 36);
        assert_eq!(&bytes[..5], b"SINL1");
        assert_eq!(decode_label_map(&bytes).unwrap(), m);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_label_map(&bad).is_err());
        assert!(decode_label_map(&bytes[..bytes.len() - 1]).is_err());
        let mut big = bytes.clone();
        big[13] = 2; // declared count below the labels present
        assert!(decode_label_map(&big).is_err());
    }

    #[test]
    fn pgm_form() {
        let m = LabelMap::from_rows(&[[0, 300], [65535, 7]]);
        let bytes = encode_label_map(&m, LabelFormat::Pgm).unwrap();
        assert_eq!(decode_label_map(&bytes).unwrap(), m);
        let eight = b"P5 2 1 255\n\x03\x09";
        assert_eq!(
            decode_label_map(eight).unwrap(),
            LabelMap::from_rows(&[[3, 9]])
        );
        assert!(encode_label_map(&LabelMap::filled(1, 1, 70000), LabelFormat::Pgm).is_err());
    }
}
