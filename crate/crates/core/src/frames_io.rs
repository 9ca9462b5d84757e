//! Clip directories of numbered lossless frames.
//!
//! A clip is a directory holding `frame_000001.png` (or `.ppm`),
//! `frame_000002.png`, ... numbered from 1 without gaps. Frames must be
//! 8-bit RGB; PNG and binary PPM (`P6`, maxval 255) are accepted.

use std::collections::BTreeMap;
use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use crate::dataset::write_atomic;
use crate::error::{Error, Result};
use crate::imaging::Frame;

pub const FRAME_PREFIX: &str = "frame_";

pub fn frame_file_name(index: usize, ext: &str) -> String {
    format!("{FRAME_PREFIX}{index:06}.{ext}")
}

/// Frame number encoded in a file name, if it follows the naming scheme.
fn parse_frame_name(name: &str) -> Option<usize> {
    let stem = name.strip_prefix(FRAME_PREFIX)?;
    let (digits, ext) = stem.split_once('.')?;
    if digits.len() != 6 || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    if !matches!(ext.to_ascii_lowercase().as_str(), "png" | "ppm") {
        return None;
    }
    digits.parse().ok()
}

/// Frame files of a clip directory in numeric order.
pub fn list_frames(clip_dir: &Path) -> Result<Vec<PathBuf>> {
    let ingest = |message: String| Error::Ingest { path: clip_dir.to_path_buf(), message };
    let entries = fs::read_dir(clip_dir).map_err(|e| Error::io(clip_dir, e))?;
    let mut found: BTreeMap<usize, PathBuf> = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(clip_dir, e))?;
        let name = entry.file_name();
        let Some(index) = name.to_str().and_then(parse_frame_name) else {
            continue;
        };
        if let Some(prev) = found.insert(index, entry.path()) {
            return Err(ingest(format!("frame {index} appears twice ({} and {})", prev.display(), entry.path().display())));
        }
    }
    if found.is_empty() {
        return Err(ingest("no frame_NNNNNN.png or .ppm files".into()));
    }
    for (expected, &index) in (1..).zip(found.keys()) {
        if index != expected {
            return Err(ingest(format!("missing frame {expected}")));
        }
    }
    Ok(found.into_values().collect())
}

pub fn ingest_frames(clip_dir: &Path) -> Result<Vec<Frame>> {
    list_frames(clip_dir)?.iter().map(|p| read_frame(p)).collect()
}

pub fn read_frame(path: &Path) -> Result<Frame> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let is_ppm = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    if is_ppm {
        decode_ppm(&bytes, path)
    } else {
        decode_png(&bytes, path)
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Format { path: path.to_path_buf(), message: message.into() }
}

pub fn decode_png(bytes: &[u8], path: &Path) -> Result<Frame> {
    let mut decoder = png::Decoder::new(Cursor::new(bytes));
    decoder.set_transformations(png::Transformations::IDENTITY);
    let mut reader = decoder.read_info().map_err(|e| format_err(path, e.to_string()))?;
    let info = reader.info();
    if info.bit_depth != png::BitDepth::Eight {
        return Err(format_err(path, format!("{:?} bit samples, expected 8", info.bit_depth)));
    }
    if info.color_type != png::ColorType::Rgb {
        return Err(format_err(path, format!("{:?} image, expected RGB", info.color_type)));
    }
    let size = reader.output_buffer_size().ok_or_else(|| format_err(path, "image too large"))?;
    let mut buf = vec![0u8; size];
    let out = reader.next_frame(&mut buf).map_err(|e| format_err(path, e.to_string()))?;
    buf.truncate(out.buffer_size());
    Frame::new(out.width as usize, out.height as usize, buf).map_err(|e| format_err(path, e.to_string()))
}

pub fn encode_png(frame: &Frame) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    let mut encoder = png::Encoder::new(&mut out, frame.width() as u32, frame.height() as u32);
    encoder.set_color(png::ColorType::Rgb);
    encoder.set_depth(png::BitDepth::Eight);
    let serde = |e: png::EncodingError| Error::Serde(e.to_string());
    let mut writer = encoder.write_header().map_err(serde)?;
    writer.write_image_data(frame.samples()).map_err(serde)?;
    writer.finish().map_err(serde)?;
    Ok(out)
}

/// Reads the next whitespace-delimited header token, skipping `#` comments.
fn ppm_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (start < *pos).then(|| &bytes[start..*pos])
}

pub fn decode_ppm(bytes: &[u8], path: &Path) -> Result<Frame> {
    let mut pos = 0;
    if ppm_token(bytes, &mut pos) != Some(b"P6".as_slice()) {
        return Err(format_err(path, "not a binary PPM (P6)"));
    }
    let mut number = |what: &str| -> Result<usize> {
        ppm_token(bytes, &mut pos)
            .and_then(|t| std::str::from_utf8(t).ok())
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| format_err(path, format!("bad PPM {what}")))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval != 255 {
        return Err(format_err(path, format!("maxval {maxval}, expected 255 (8-bit)")));
    }
    // exactly one whitespace byte separates the header from the raster
    let data = bytes.get(pos + 1..).unwrap_or(&[]);
    let need = width * height * 3;
    if data.len() != need {
        return Err(format_err(path, format!("raster has {} bytes, expected {need}", data.len())));
    }
    Frame::new(width, height, data.to_vec()).map_err(|e| format_err(path, e.to_string()))
}

pub fn encode_ppm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", frame.width(), frame.height()).into_bytes();
    out.extend_from_slice(frame.samples());
    out
}

/// Writes `frames` as `frame_000001.png`, ... into `clip_dir`.
pub fn write_clip(clip_dir: &Path, frames: &[Frame]) -> Result<()> {
    fs::create_dir_all(clip_dir).map_err(|e| Error::io(clip_dir, e))?;
    for (i, frame) in frames.iter().enumerate() {
        write_atomic(&clip_dir.join(frame_file_name(i + 1, "png")), &encode_png(frame)?)?;
    }
    Ok(())
}
