//! Binary Netpbm codecs: P6 (RGB) and P5 (grayscale), maxval 255.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use motiondet::imagecore::{GrayImage, RgbImage};

pub fn encode_ppm(img: &RgbImage) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.as_raw());
    out
}

struct Header {
    magic: [u8; 2],
    width: usize,
    height: usize,
    data_start: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    ensure!(bytes.len() >= 2, "file too short for a Netpbm header");
    let magic = [bytes[0], bytes[1]];
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        // whitespace and `#` comments may separate header fields
        loop {
            match bytes.get(pos) {
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        ensure!(pos > start, "malformed header near byte {start}");
        *field = std::str::from_utf8(&bytes[start..pos])?.parse()?;
    }
    // exactly one whitespace byte before the raster
    ensure!(
        bytes.get(pos).is_some_and(u8::is_ascii_whitespace),
        "missing separator before pixel data"
    );
    let [width, height, maxval] = fields;
    ensure!(
        maxval == 255,
        "only 8-bit images (maxval 255) are supported, got {maxval}"
    );
    Ok(Header {
        magic,
        width,
        height,
        data_start: pos + 1,
    })
}

/// Decodes P6 directly and P5 by replicating gray into RGB.
pub fn decode_rgb(bytes: &[u8]) -> Result<RgbImage> {
    let h = parse_header(bytes)?;
    let channels = match &h.magic {
        b"P6" => 3,
        b"P5" => 1,
        m => bail!(
            "unsupported format {:?}; expected binary P6 or P5",
            String::from_utf8_lossy(m)
        ),
    };
    let len = h.width * h.height * channels;
    let data = bytes
        .get(h.data_start..h.data_start + len)
        .context("truncated pixel data")?
        .to_vec();
    if channels == 3 {
        Ok(RgbImage::new(h.width, h.height, data)?)
    } else {
        Ok(GrayImage::new(h.width, h.height, data)?.to_rgb())
    }
}

pub fn read_rgb(path: &Path) -> Result<RgbImage> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    decode_rgb(&bytes).with_context(|| format!("cannot decode {}", path.display()))
}
