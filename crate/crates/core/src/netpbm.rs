//! Binary PGM (P5) and PPM (P6) with 8-bit samples.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    /// 1 for P5, 3 for P6.
    pub channels: usize,
    pub maxval: u16,
    /// Row-major, interleaved channels.
    pub data: Vec<u8>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::Netpbm(format!(
                "{channels} channels; only 1 and 3 are supported"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::Netpbm(format!(
                "{} samples for a {width}x{height}x{channels} image",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            maxval: 255,
            data,
        })
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0;
        let magic = token(bytes, &mut pos)?;
        let channels = match magic.as_slice() {
            b"P5" => 1,
            b"P6" => 3,
            other => return Err(Error::Netpbm(format!("bad magic `{}`", String::from_utf8_lossy(other)))),
        };
        let width = number(bytes, &mut pos)?;
        let height = number(bytes, &mut pos)?;
        let maxval = number(bytes, &mut pos)?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Netpbm(format!("maxval {maxval} is not an 8-bit depth")));
        }
        // exactly one whitespace byte separates the header from the raster
        if pos >= bytes.len() || !bytes[pos].is_ascii_whitespace() {
            return Err(Error::Netpbm("missing whitespace after header".into()));
        }
        pos += 1;
        let n = width * height * channels;
        if bytes.len() < pos + n {
            return Err(Error::Netpbm(format!(
                "truncated raster: need {n} bytes, have {}",
                bytes.len() - pos
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            maxval: maxval as u16,
            data: bytes[pos..pos + n].to_vec(),
        })
    }

    pub fn read<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        Self::decode(&buf)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::decode(&std::fs::read(path)?)
    }

    pub fn encode(&self) -> Vec<u8> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        let mut out = format!("{magic}\n{} {}\n{}\n", self.width, self.height, self.maxval).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.encode())?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode())?;
        Ok(())
    }

    /// Samples of pixel `(row, col)`.
    pub fn pixel(&self, row: usize, col: usize) -> &[u8] {
        let i = (row * self.width + col) * self.channels;
        &self.data[i..i + self.channels]
    }
}

fn skip_space_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        if bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else if bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        } else {
            break;
        }
    }
}

fn token(bytes: &[u8], pos: &mut usize) -> Result<Vec<u8>> {
    skip_space_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    if start == *pos {
        return Err(Error::Netpbm("unexpected end of header".into()));
    }
    Ok(bytes[start..*pos].to_vec())
}

fn number(bytes: &[u8], pos: &mut usize) -> Result<usize> {
    let t = token(bytes, pos)?;
    std::str::from_utf8(&t)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Netpbm(format!("bad header field `{}`", String::from_utf8_lossy(&t))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_gray_and_color() {
        let g = Image::new(3, 2, 1, vec![0, 1, 2, 253, 254, 255]).unwrap();
        assert_eq!(Image::decode(&g.encode()).unwrap(), g);
        let c = Image::new(2, 1, 3, vec![10, 20, 30, 40, 50, 60]).unwrap();
        let bytes = c.encode();
        assert!(bytes.starts_with(b"P6\n2 1\n255\n"));
        assert_eq!(Image::decode(&bytes).unwrap(), c);
    }

    #[test]
    fn header_comments_and_whitespace() {
        let mut b = b"P5 # gray\n# another\n 2\t1 255\n".to_vec();
        b.extend_from_slice(&[7, 9]);
        let img = Image::decode(&b).unwrap();
        assert_eq!((img.width, img.height, img.pixel(0, 1)), (2, 1, &[9u8][..]));
    }

    #[test]
    fn raster_byte_that_looks_like_space() {
        // the raster starts right after the single separator, even if it is whitespace
        let mut b = b"P5\n2 1\n255\n".to_vec();
        b.extend_from_slice(b" \n");
        assert_eq!(Image::decode(&b).unwrap().data, vec![b' ', b'\n']);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Image::decode(b"P2\n1 1\n255\n0").is_err());
        assert!(Image::decode(b"P5\n2 2\n255\n\x00").is_err());
        assert!(Image::decode(b"P5\n1 1\n65535\n\x00\x00").is_err());
        assert!(Image::new(1, 1, 2, vec![0, 0]).is_err());
    }
}
