use nalgebra::Vector3;

use super::FormatError;
use crate::grid::{GridSpec, Vec3};
use crate::occupancy::LabeledPoint;
use crate::render::Image;

pub const VGRD_MAGIC: &[u8; 4] = b"VGRD";
pub const PNTS_MAGIC: &[u8; 4] = b"PNTS";
pub const FPLN_MAGIC: &[u8; 4] = b"FPLN";
pub const VERSION: u32 = 1;
pub const VGRD_HEADER_LEN: usize = 40;
pub const PNTS_HEADER_LEN: usize = 16;
pub const PNTS_RECORD_LEN: usize = 20;
pub const FPLN_HEADER_LEN: usize = 20;

/// Little-endian cursor that reports the byte offset of every failure.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        if self.bytes.len() - self.pos < n {
            return Err(FormatError::Truncated {
                offset: self.bytes.len(),
                expected: self.pos + n,
                actual: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<(), FormatError> {
        if self.bytes.len() < 4 && want.starts_with(self.bytes) {
            return Err(FormatError::Truncated { offset: self.bytes.len(), expected: 4, actual: self.bytes.len() });
        }
        let got = self.take(4).map_err(|_| FormatError::Magic {
            expected: String::from_utf8_lossy(want).into(),
            found: String::from_utf8_lossy(self.bytes).into(),
        })?;
        if got != want {
            return Err(FormatError::Magic {
                expected: String::from_utf8_lossy(want).into(),
                found: String::from_utf8_lossy(got).into(),
            });
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FormatError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, FormatError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn version(&mut self) -> Result<(), FormatError> {
        let offset = self.pos;
        match self.u32()? {
            VERSION => Ok(()),
            found => Err(FormatError::Version { found, offset }),
        }
    }

    /// Payload of `count` f32 values; the remaining length must match.
    fn f32s(&mut self, count: usize) -> Result<Vec<f32>, FormatError> {
        let expected = self.pos + count * 4;
        if self.bytes.len() != expected {
            let err = if self.bytes.len() < expected { FormatError::Truncated {
                offset: self.bytes.len(),
                expected,
                actual: self.bytes.len(),
            } } else { FormatError::Trailing { offset: expected, expected, actual: self.bytes.len() } };
            return Err(err);
        }
        let data = self.take(count * 4)?;
        Ok(data.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect())
    }

    fn finish(&self) -> Result<(), FormatError> {
        if self.pos != self.bytes.len() {
            return Err(FormatError::Trailing { offset: self.pos, expected: self.pos, actual: self.bytes.len() });
        }
        Ok(())
    }
}

fn header_err(offset: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Header { offset, msg: msg.into() }
}

/// Checked product of payload dimensions, in values.
fn payload_len(offset: usize, dims: &[u32]) -> Result<usize, FormatError> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .filter(|n| n.checked_mul(4).is_some())
        .ok_or_else(|| header_err(offset, format!("dimensions {dims:?} overflow")))
}

/// Multi-channel grid file contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Vgrid {
    pub spec: GridSpec,
    /// One `nx·ny·nz` array per channel, x fastest.
    pub channels: Vec<Vec<f32>>,
}

pub fn encode_vgrid(grid: &Vgrid) -> Result<Vec<u8>, FormatError> {
    let n = grid.spec.cell_count();
    for (c, ch) in grid.channels.iter().enumerate() {
        if ch.len() != n {
            return Err(FormatError::Invalid(format!("channel {c} holds {} values, expected {n}", ch.len())));
        }
        if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
            return Err(FormatError::Invalid(format!("channel {c} value {i} is not finite")));
        }
    }
    let mut out = Vec::with_capacity(VGRD_HEADER_LEN + 4 * n * grid.channels.len());
    out.extend_from_slice(VGRD_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in grid.spec.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(grid.channels.len() as u32).to_le_bytes());
    for c in grid.spec.origin().iter() {
        out.extend_from_slice(&c.to_le_bytes());
    }
    out.extend_from_slice(&grid.spec.spacing().to_le_bytes());
    for ch in &grid.channels {
        for v in ch {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_vgrid(bytes: &[u8]) -> Result<Vgrid, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(VGRD_MAGIC)?;
    r.version()?;
    let dims = [r.u32()?, r.u32()?, r.u32()?];
    let nch = r.u32()?;
    let origin = Vec3::new(r.f32()?, r.f32()?, r.f32()?);
    let spacing = r.f32()?;
    let spec = GridSpec::new(dims.map(|d| d as usize), origin, spacing).map_err(|e| header_err(8, e.to_string()))?;
    let per = payload_len(8, &dims)?;
    let total = payload_len(8, &[dims[0], dims[1], dims[2], nch])?;
    let flat = r.f32s(total)?;
    let channels = flat.chunks(per.max(1)).take(nch as usize).map(<[f32]>::to_vec).collect();
    Ok(Vgrid { spec, channels })
}

pub fn encode_points(points: &[LabeledPoint]) -> Vec<u8> {
    let mut out = Vec::with_capacity(PNTS_HEADER_LEN + PNTS_RECORD_LEN * points.len());
    out.extend_from_slice(PNTS_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for p in points {
        for c in p.position.iter() {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&p.opacity.to_le_bytes());
        out.extend_from_slice(&p.material_id.to_le_bytes());
    }
    out
}

pub fn decode_points(bytes: &[u8]) -> Result<Vec<LabeledPoint>, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(PNTS_MAGIC)?;
    r.version()?;
    let count = r.u64()?;
    let expected = (count as u128) * PNTS_RECORD_LEN as u128 + PNTS_HEADER_LEN as u128;
    if expected > bytes.len() as u128 {
        return Err(FormatError::Truncated {
            offset: bytes.len(),
            expected: expected.min(usize::MAX as u128) as usize,
            actual: bytes.len(),
        });
    }
    let mut points = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let position = Vector3::new(r.f32()?, r.f32()?, r.f32()?);
        let opacity = r.f32()?;
        let material_id = r.u32()?;
        points.push(LabeledPoint { position, opacity, material_id });
    }
    r.finish()?;
    Ok(points)
}

/// Row-major float image with interleaved channels.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<f32>,
}

pub fn encode_plane(plane: &Plane) -> Result<Vec<u8>, FormatError> {
    if plane.data.len() != plane.width * plane.height * plane.channels {
        return Err(FormatError::Invalid(format!(
            "plane data holds {} values, expected {}x{}x{}",
            plane.data.len(),
            plane.width,
            plane.height,
            plane.channels
        )));
    }
    let mut out = Vec::with_capacity(FPLN_HEADER_LEN + 4 * plane.data.len());
    out.extend_from_slice(FPLN_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    for d in [plane.width, plane.height, plane.channels] {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for v in &plane.data {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_plane(bytes: &[u8]) -> Result<Plane, FormatError> {
    let mut r = Reader::new(bytes);
    r.magic(FPLN_MAGIC)?;
    r.version()?;
    let dims = [r.u32()?, r.u32()?, r.u32()?];
    if dims[2] == 0 {
        return Err(header_err(16, "channel count must be positive"));
    }
    let n = payload_len(8, &dims)?;
    let data = r.f32s(n)?;
    Ok(Plane { width: dims[0] as usize, height: dims[1] as usize, channels: dims[2] as usize, data })
}

pub fn encode_ppm(image: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend_from_slice(&image.data);
    out
}

/// Binary PPM with maxval 255; `#` comments are allowed in the header.
pub fn decode_ppm(bytes: &[u8]) -> Result<Image, FormatError> {
    if bytes.len() < 2 || &bytes[..2] != b"P6" {
        return Err(FormatError::Magic {
            expected: "P6".into(),
            found: String::from_utf8_lossy(&bytes[..bytes.len().min(2)]).into(),
        });
    }
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for f in &mut fields {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                _ => break,
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        *f = std::str::from_utf8(&bytes[start..pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| header_err(start, "expected a decimal number"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err(header_err(pos, "expected whitespace after maxval"));
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval != 255 {
        return Err(header_err(pos, format!("maxval {maxval} is not 255")));
    }
    let n = width
        .checked_mul(height)
        .and_then(|p| p.checked_mul(3))
        .ok_or_else(|| header_err(3, "image size overflows"))?;
    let expected = pos + n;
    if bytes.len() < expected {
        return Err(FormatError::Truncated { offset: bytes.len(), expected, actual: bytes.len() });
    }
    if bytes.len() > expected {
        return Err(FormatError::Trailing { offset: expected, expected, actual: bytes.len() });
    }
    Ok(Image { width, height, data: bytes[pos..].to_vec() })
}
