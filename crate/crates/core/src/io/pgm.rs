//! PGM (P2 ASCII / P5 binary) reading and writing, maxval up to 255.
//!
//! The writer always emits the canonical binary form
//! `P5\n<w> <h>\n<maxval>\n` followed by one byte per sample.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgmFormat {
    Ascii,
    Binary,
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_space_and_comments(&mut self) {
        while self.pos < self.buf.len() {
            match self.buf[self.pos] {
                b'#' => {
                    while self.pos < self.buf.len() && self.buf[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                c if c.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn number(&mut self, what: &str) -> Result<usize> {
        self.skip_space_and_comments();
        let start = self.pos;
        while self.pos < self.buf.len() && self.buf[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::Pgm(format!("expected {what}")));
        }
        std::str::from_utf8(&self.buf[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Pgm(format!("{what} out of range")))
    }
}

/// Parses a PGM file. The image gets `maxval + 1` levels.
pub fn decode_pgm(buf: &[u8]) -> Result<GrayImage> {
    let format = match buf.get(..2) {
        Some(b"P2") => PgmFormat::Ascii,
        Some(b"P5") => PgmFormat::Binary,
        _ => return Err(Error::Pgm("missing P2/P5 magic number".into())),
    };
    let mut cur = Cursor { buf, pos: 2 };
    let width = cur.number("width")?;
    let height = cur.number("height")?;
    let maxval = cur.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(Error::Pgm(format!("empty image {width}x{height}")));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!("unsupported maxval {maxval}")));
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| Error::Pgm("image too large".into()))?;
    let data: Vec<u16> = match format {
        PgmFormat::Binary => {
            // Exactly one whitespace byte separates the header from the raster.
            match buf.get(cur.pos) {
                Some(c) if c.is_ascii_whitespace() => cur.pos += 1,
                _ => return Err(Error::Pgm("missing whitespace after maxval".into())),
            }
            let raster = buf
                .get(cur.pos..cur.pos + n)
                .ok_or_else(|| Error::Pgm(format!("truncated raster: need {n} bytes")))?;
            raster.iter().map(|&b| u16::from(b)).collect()
        }
        PgmFormat::Ascii => (0..n)
            .map(|_| cur.number("sample").map(|v| v as u16))
            .collect::<Result<_>>()?,
    };
    if let Some(&bad) = data.iter().find(|&&d| d as usize > maxval) {
        return Err(Error::Pgm(format!("sample {bad} exceeds maxval {maxval}")));
    }
    GrayImage::new(width, height, maxval + 1, data)
}

pub fn encode_pgm(img: &GrayImage, format: PgmFormat) -> Result<Vec<u8>> {
    let maxval = img.levels() - 1;
    if maxval == 0 || maxval > 255 {
        return Err(Error::Pgm(format!(
            "cannot store {} levels in an 8-bit PGM",
            img.levels()
        )));
    }
    let mut out = Vec::with_capacity(img.len() + 20);
    match format {
        PgmFormat::Binary => {
            write!(out, "P5\n{} {}\n{}\n", img.width(), img.height(), maxval)?;
            out.extend(img.data().iter().map(|&d| d as u8));
        }
        PgmFormat::Ascii => {
            write!(out, "P2\n{} {}\n{}\n", img.width(), img.height(), maxval)?;
            for row in img.data().chunks(img.width()) {
                let line: Vec<String> = row.iter().map(|d| d.to_string()).collect();
                writeln!(out, "{}", line.join(" "))?;
            }
        }
    }
    Ok(out)
}

pub fn read_pgm(path: impl AsRef<Path>) -> Result<GrayImage> {
    decode_pgm(&fs::read(path)?)
}

pub fn write_pgm(path: impl AsRef<Path>, img: &GrayImage) -> Result<()> {
    fs::write(path, encode_pgm(img, PgmFormat::Binary)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ascii_with_comments() {
        let src = b"P2\n# a comment\n3 2 # trailing\n15\n0 1 2\n3 4 15\n";
        let img = decode_pgm(src).unwrap();
        assert_eq!((img.width(), img.height(), img.levels()), (3, 2, 16));
        assert_eq!(img.data(), &[0, 1, 2, 3, 4, 15]);
    }

    #[test]
    fn canonical_binary_layout() {
        let img = GrayImage::new(2, 2, 256, vec![0, 10, 200, 255]).unwrap();
        let bytes = encode_pgm(&img, PgmFormat::Binary).unwrap();
        assert_eq!(&bytes[..11], b"P5\n2 2\n255\n");
        assert_eq!(&bytes[11..], &[0, 10, 200, 255]);
        assert_eq!(decode_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn ascii_round_trip() {
        let img = GrayImage::new(3, 1, 100, vec![0, 50, 99]).unwrap();
        let bytes = encode_pgm(&img, PgmFormat::Ascii).unwrap();
        assert_eq!(decode_pgm(&bytes).unwrap(), img);
    }

    #[test]
    fn malformed_inputs() {
        assert!(decode_pgm(b"P6\n1 1\n255\n\0\0\0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n255\n\0\0").is_err());
        assert!(decode_pgm(b"P5\n2 2\n65535\n").is_err());
        assert!(decode_pgm(b"P2\n2 1\n10\n3 11\n").is_err());
        assert!(decode_pgm(b"P2\n2 1\n10\n3\n").is_err());
        assert!(decode_pgm(b"P5\n0 2\n255\n").is_err());
        assert!(decode_pgm(b"").is_err());
    }

    #[test]
    fn writer_rejects_wide_images() {
        let img = GrayImage::new(1, 1, 1024, vec![700]).unwrap();
        assert!(encode_pgm(&img, PgmFormat::Binary).is_err());
    }

    proptest! {
        #[test]
        fn canonical_p5_is_byte_stable(
            w in 1usize..20,
            h in 1usize..20,
            maxval in 1u16..=255,
            seed in any::<u64>(),
        ) {
            let mut s = seed;
            let mut bytes = format!("P5\n{w} {h}\n{maxval}\n").into_bytes();
            for _ in 0..w * h {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                bytes.push(((s >> 33) % (maxval as u64 + 1)) as u8);
            }
            let img = decode_pgm(&bytes).unwrap();
            prop_assert_eq!(encode_pgm(&img, PgmFormat::Binary).unwrap(), bytes);
        }
    }
}
