use std::path::Path;

use crate::error::{Error, Result};

/// Magic tag of the Middlebury `.flo` format.
pub const FLO_MAGIC: &[u8; 4] = b"PIEH";
const FLO_HEADER_LEN: usize = 12;

/// Dense per-pixel motion in pixels/frame, row-major `(dx, dy)` with y pointing down.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowField {
    width: usize,
    height: usize,
    vectors: Vec<[f32; 2]>,
}

impl FlowField {
    pub fn new(width: usize, height: usize, vectors: Vec<[f32; 2]>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidInput("flow field has zero extent".into()));
        }
        if vectors.len() != width * height {
            return Err(Error::InvalidInput(format!(
                "flow field {width}x{height} needs {} vectors, got {}",
                width * height,
                vectors.len()
            )));
        }
        if vectors.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::Validation(
                "flow field holds a non-finite component".into(),
            ));
        }
        Ok(Self {
            width,
            height,
            vectors,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            vectors: vec![[0.0, 0.0]; width * height],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        f: impl Fn(usize, usize) -> [f32; 2],
    ) -> Result<Self> {
        let mut vectors = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                vectors.push(f(x, y));
            }
        }
        Self::new(width, height, vectors)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn vectors(&self) -> &[[f32; 2]] {
        &self.vectors
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f32; 2] {
        self.vectors[y * self.width + x]
    }

    pub fn max_magnitude(&self) -> f32 {
        self.vectors
            .iter()
            .map(|[dx, dy]| dx.hypot(*dy))
            .fold(0.0, f32::max)
    }

    /// Element-wise map over the vectors.
    pub fn map(&self, f: impl Fn([f32; 2]) -> [f32; 2]) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.vectors.iter().map(|v| f(*v)).collect(),
        )
    }

    pub fn read_flo(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < FLO_HEADER_LEN {
            return Err(Error::Format(format!(
                "flo header needs {FLO_HEADER_LEN} bytes, got {}",
                bytes.len()
            )));
        }
        if &bytes[..4] != FLO_MAGIC {
            return Err(Error::Format(format!(
                "bad flo magic {:?}",
                String::from_utf8_lossy(&bytes[..4])
            )));
        }
        let width = i32::from_le_bytes(bytes[4..8].try_into().unwrap());
        let height = i32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if width <= 0 || height <= 0 {
            return Err(Error::Format(format!(
                "bad flo dimensions {width}x{height}"
            )));
        }
        let (width, height) = (width as usize, height as usize);
        let expected = width
            .checked_mul(height)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| Error::Format("flo dimensions overflow".into()))?;
        let payload = &bytes[FLO_HEADER_LEN..];
        if payload.len() != expected {
            return Err(Error::Format(format!(
                "flo payload for {width}x{height} needs {expected} bytes, got {}",
                payload.len()
            )));
        }
        let vectors = payload
            .chunks_exact(8)
            .map(|c| {
                [
                    f32::from_le_bytes(c[0..4].try_into().unwrap()),
                    f32::from_le_bytes(c[4..8].try_into().unwrap()),
                ]
            })
            .collect();
        Self::new(width, height, vectors).map_err(|e| match e {
            Error::Validation(msg) => Error::Format(msg),
            other => other,
        })
    }

    pub fn write_flo(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FLO_HEADER_LEN + self.vectors.len() * 8);
        out.extend_from_slice(FLO_MAGIC);
        out.extend_from_slice(&(self.width as i32).to_le_bytes());
        out.extend_from_slice(&(self.height as i32).to_le_bytes());
        for [dx, dy] in &self.vectors {
            out.extend_from_slice(&dx.to_le_bytes());
            out.extend_from_slice(&dy.to_le_bytes());
        }
        out
    }

    pub fn load_flo(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::read_flo(&bytes)
    }

    pub fn save_flo(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.write_flo()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smallest_field_layout() {
        let f = FlowField::zeros(1, 1);
        let bytes = f.write_flo();
        assert_eq!(bytes.len(), FLO_HEADER_LEN + 8);
        assert_eq!(&bytes[..4], b"PIEH");
        assert_eq!(FlowField::read_flo(&bytes).unwrap(), f);
    }

    #[test]
    fn two_by_two_round_trip() {
        let f = FlowField::new(
            2,
            2,
            vec![[0.5, -1.25], [3.0, 0.0], [-7.75, 2.5], [1e-7, -0.0]],
        )
        .unwrap();
        let bytes = f.write_flo();
        let g = FlowField::read_flo(&bytes).unwrap();
        assert_eq!(g.write_flo(), bytes);
        for (a, b) in f.vectors().iter().zip(g.vectors()) {
            assert_eq!(a[0].to_bits(), b[0].to_bits());
            assert_eq!(a[1].to_bits(), b[1].to_bits());
        }
    }

    #[test]
    fn bad_magic_and_truncation() {
        let mut bytes = FlowField::zeros(2, 2).write_flo();
        let truncated = &bytes[..bytes.len() - 1];
        assert!(matches!(
            FlowField::read_flo(truncated),
            Err(Error::Format(_))
        ));
        bytes[..4].copy_from_slice(b"XXXX");
        assert!(matches!(FlowField::read_flo(&bytes), Err(Error::Format(_))));
        assert!(matches!(FlowField::read_flo(b"PIE"), Err(Error::Format(_))));
    }

    #[test]
    fn non_finite_payload_is_a_format_error() {
        let mut bytes = FlowField::zeros(1, 1).write_flo();
        bytes[12..16].copy_from_slice(&f32::NAN.to_le_bytes());
        assert!(matches!(FlowField::read_flo(&bytes), Err(Error::Format(_))));
    }

    proptest! {
        #[test]
        fn flo_bytes_round_trip(
            w in 1usize..6,
            h in 1usize..6,
            seed in proptest::collection::vec(-1e4f32..1e4, 72),
        ) {
            let vectors = (0..w * h).map(|i| [seed[2 * i], seed[2 * i + 1]]).collect();
            let f = FlowField::new(w, h, vectors).unwrap();
            let bytes = f.write_flo();
            let g = FlowField::read_flo(&bytes).unwrap();
            prop_assert_eq!(g.write_flo(), bytes);
            prop_assert_eq!(g, f);
        }
    }
}
