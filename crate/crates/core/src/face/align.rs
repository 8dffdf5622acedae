use super::{FaceGeometry, Point};
use crate::error::{Error, Result};
use crate::flow::Frame;

/// `p -> scale * R(rotation) * p + translation`, rotation in radians in
/// image coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Similarity {
    pub scale: f64,
    pub rotation: f64,
    pub translation: Point,
}

impl Similarity {
    pub const IDENTITY: Similarity = Similarity {
        scale: 1.0,
        rotation: 0.0,
        translation: Point::new(0.0, 0.0),
    };

    /// The transform taking the segment `(src_a, src_b)` onto `(dst_a, dst_b)`.
    pub fn from_pairs(src_a: Point, src_b: Point, dst_a: Point, dst_b: Point) -> Result<Self> {
        let s = src_b - src_a;
        let d = dst_b - dst_a;
        let denom = s.x * s.x + s.y * s.y;
        if denom <= 1e-18 {
            return Err(Error::Validation("degenerate source segment".into()));
        }
        // Complex division d / s.
        let re = (d.x * s.x + d.y * s.y) / denom;
        let im = (d.y * s.x - d.x * s.y) / denom;
        let rotated = Point::new(re * src_a.x - im * src_a.y, im * src_a.x + re * src_a.y);
        Ok(Self {
            scale: re.hypot(im),
            rotation: im.atan2(re),
            translation: dst_a - rotated,
        })
    }

    pub fn apply(&self, p: Point) -> Point {
        let (s, c) = self.rotation.sin_cos();
        Point::new(
            self.scale * (c * p.x - s * p.y) + self.translation.x,
            self.scale * (s * p.x + c * p.y) + self.translation.y,
        )
    }

    pub fn inverse(&self) -> Similarity {
        let inv = Similarity {
            scale: 1.0 / self.scale,
            rotation: -self.rotation,
            translation: Point::default(),
        };
        let t = inv.apply(self.translation);
        Similarity {
            translation: Point::new(-t.x, -t.y),
            ..inv
        }
    }

    pub fn rotation_deg(&self) -> f64 {
        self.rotation.to_degrees()
    }
}

/// Warps `frame` so that content at `p` moves to `transform(p)`.
pub fn warp_similarity(frame: &Frame, transform: &Similarity) -> Result<Frame> {
    let inv = transform.inverse();
    Frame::from_fn(frame.width(), frame.height(), |x, y| {
        let src = inv.apply(Point::new(x as f64, y as f64));
        frame.sample(src.x, src.y)
    })
}

#[derive(Clone, Debug)]
pub struct AlignedSequence {
    pub frames: Vec<Frame>,
    pub landmarks: Vec<FaceGeometry>,
    /// Per-frame transform onto the first frame's eye positions.
    pub transforms: Vec<Similarity>,
}

/// Maps every frame's eye centres onto those of the first frame.
pub fn align_by_eyes(frames: &[Frame], landmarks: &[FaceGeometry]) -> Result<AlignedSequence> {
    if frames.is_empty() {
        return Err(Error::Validation("no frames to align".into()));
    }
    if frames.len() != landmarks.len() {
        return Err(Error::Validation(format!(
            "{} frames but {} landmark sets",
            frames.len(),
            landmarks.len()
        )));
    }
    let (ref_r, ref_l) = landmarks[0].eye_centers();
    let mut out = AlignedSequence {
        frames: Vec::with_capacity(frames.len()),
        landmarks: Vec::with_capacity(frames.len()),
        transforms: Vec::with_capacity(frames.len()),
    };
    for (frame, geom) in frames.iter().zip(landmarks) {
        let (r, l) = geom.eye_centers();
        let t = Similarity::from_pairs(r, l, ref_r, ref_l)?;
        let is_identity = (t.scale - 1.0).abs() < 1e-12
            && t.rotation.abs() < 1e-12
            && t.translation.norm() < 1e-9;
        if is_identity {
            out.frames.push(frame.clone());
            out.landmarks.push(geom.clone());
        } else {
            out.frames.push(warp_similarity(frame, &t)?);
            out.landmarks.push(geom.map(|p| t.apply(p))?);
        }
        out.transforms.push(t);
    }
    Ok(out)
}
