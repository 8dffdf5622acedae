//! Synthetic flow fields, frame pairs, landmark sets and labelled datasets
//! with analytic ground truth. Everything is a pure function of its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::classify::LabeledSample;
use crate::error::{Error, Result};
use crate::flow::{gaussian_blur, FlowField, Frame};

/// Unit vector in image coordinates for a direction in degrees
/// (0 = right, 90 = up on screen).
pub fn direction_vector(direction_deg: f64) -> (f64, f64) {
    let a = direction_deg.to_radians();
    (a.cos(), -a.sin())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SynthSpec {
    UniformTranslation {
        direction_deg: f64,
        magnitude: f64,
    },
    /// `direction * magnitude * exp(-r^2 / 2 sigma^2)` around `center`.
    GaussianBlob {
        center: [f64; 2],
        sigma: f64,
        direction_deg: f64,
        magnitude: f64,
    },
    /// Radial unit vectors away from `center`, scaled by `magnitude`.
    Diverging {
        center: [f64; 2],
        magnitude: f64,
    },
    /// Uniform directions, magnitudes uniform in `[0, magnitude]`.
    RandomNoise {
        magnitude: f64,
        seed: u64,
    },
    /// `base` with every vector rotated by `angle_deg` (counter-clockwise on screen).
    RotatedCopy {
        base: Box<SynthSpec>,
        angle_deg: f64,
    },
    /// Vector sum of several fields.
    Sum {
        parts: Vec<SynthSpec>,
    },
}

impl SynthSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check_mag = |m: f64| {
            if m >= 0.0 && m.is_finite() {
                Ok(())
            } else {
                Err(Error::Spec(format!(
                    "magnitude {m} must be finite and >= 0"
                )))
            }
        };
        match self {
            SynthSpec::UniformTranslation { magnitude, .. }
            | SynthSpec::Diverging { magnitude, .. }
            | SynthSpec::RandomNoise { magnitude, .. } => check_mag(*magnitude),
            SynthSpec::GaussianBlob {
                sigma, magnitude, ..
            } => {
                check_mag(*magnitude)?;
                if *sigma > 0.0 {
                    Ok(())
                } else {
                    Err(Error::Spec(format!("blob sigma {sigma} must be positive")))
                }
            }
            SynthSpec::RotatedCopy { base, .. } => base.validate(),
            SynthSpec::Sum { parts } => parts.iter().try_for_each(|p| p.validate()),
        }
    }
}

pub fn make_flow(spec: &SynthSpec, width: usize, height: usize) -> Result<FlowField> {
    spec.validate()?;
    let vectors = render(spec, width, height);
    FlowField::new(width, height, vectors)
}

fn render(spec: &SynthSpec, width: usize, height: usize) -> Vec<[f32; 2]> {
    let n = width * height;
    let coords = (0..n).map(move |i| ((i % width) as f64, (i / width) as f64));
    match spec {
        SynthSpec::UniformTranslation {
            direction_deg,
            magnitude,
        } => {
            let (ux, uy) = direction_vector(*direction_deg);
            vec![[(ux * magnitude) as f32, (uy * magnitude) as f32]; n]
        }
        SynthSpec::GaussianBlob {
            center,
            sigma,
            direction_deg,
            magnitude,
        } => {
            let (ux, uy) = direction_vector(*direction_deg);
            coords
                .map(|(x, y)| {
                    let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
                    let m = magnitude * (-r2 / (2.0 * sigma * sigma)).exp();
                    [(ux * m) as f32, (uy * m) as f32]
                })
                .collect()
        }
        SynthSpec::Diverging { center, magnitude } => coords
            .map(|(x, y)| {
                let (dx, dy) = (x - center[0], y - center[1]);
                let r = dx.hypot(dy);
                if r == 0.0 {
                    [0.0, 0.0]
                } else {
                    [(dx / r * magnitude) as f32, (dy / r * magnitude) as f32]
                }
            })
            .collect(),
        SynthSpec::RandomNoise { magnitude, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..n)
                .map(|_| {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let m: f64 = rng.random::<f64>() * magnitude;
                    [(a.cos() * m) as f32, (-a.sin() * m) as f32]
                })
                .collect()
        }
        SynthSpec::RotatedCopy { base, angle_deg } => render(base, width, height)
            .into_iter()
            .map(|v| rotate_vector(v, *angle_deg))
            .collect(),
        SynthSpec::Sum { parts } => {
            let mut acc = vec![[0.0f32; 2]; n];
            for part in parts {
                for (a, v) in acc.iter_mut().zip(render(part, width, height)) {
                    a[0] += v[0];
                    a[1] += v[1];
                }
            }
            acc
        }
    }
}

/// Rotates an image-coordinate vector counter-clockwise on screen.
pub fn rotate_vector([dx, dy]: [f32; 2], angle_deg: f64) -> [f32; 2] {
    let (s, c) = angle_deg.to_radians().sin_cos();
    let (x, y) = (dx as f64, -(dy as f64));
    [(x * c - y * s) as f32, -((x * s + y * c) as f32)]
}

pub fn rotate_flow(flow: &FlowField, angle_deg: f64) -> FlowField {
    flow.map(|v| rotate_vector(v, angle_deg))
        .expect("rotation keeps vectors finite")
}

/// Band-limited noise texture in `[0, 1]`.
pub fn texture(width: usize, height: usize, seed: u64) -> Result<Frame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f32> = (0..width * height).map(|_| rng.random::<f32>()).collect();
    let blurred = gaussian_blur(&noise, width, height, 1.5);
    let lo = blurred.iter().cloned().fold(f32::INFINITY, f32::min);
    let hi = blurred.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
    let span = (hi - lo).max(1e-6);
    Frame::new(
        width,
        height,
        blurred
            .iter()
            .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect(),
    )
}

/// Backward warp: `out(p) = frame(p - flow(p))`, so `flow` is (approximately)
/// the motion from `frame` to `out` for smooth fields.
pub fn warp_frame(frame: &Frame, flow: &FlowField) -> Result<Frame> {
    if frame.width() != flow.width() || frame.height() != flow.height() {
        return Err(Error::InvalidInput("frame and flow sizes differ".into()));
    }
    Frame::from_fn(frame.width(), frame.height(), |x, y| {
        let [dx, dy] = flow.get(x, y);
        frame.sample(x as f64 - dx as f64, y as f64 - dy as f64)
    })
}

#[derive(Clone, Debug)]
pub struct FramePair {
    pub prev: Frame,
    pub next: Frame,
    /// True displacement of the interior, pixels.
    pub shift: (i64, i64),
}

/// A textured frame and its copy shifted by an integer displacement, with
/// clamped edges.
pub fn make_frame_pair(
    shift: (f64, f64),
    width: usize,
    height: usize,
    texture_seed: u64,
) -> Result<FramePair> {
    if shift.0.fract() != 0.0 || shift.1.fract() != 0.0 {
        return Err(Error::Spec(format!(
            "frame pairs need an integer shift, got ({}, {})",
            shift.0, shift.1
        )));
    }
    let (sx, sy) = (shift.0 as i64, shift.1 as i64);
    let prev = texture(width, height, texture_seed)?;
    let next = Frame::from_fn(width, height, |x, y| {
        let px = (x as i64 - sx).clamp(0, width as i64 - 1) as usize;
        let py = (y as i64 - sy).clamp(0, height as i64 - 1) as usize;
        prev.get(px, py)
    })?;
    Ok(FramePair {
        prev,
        next,
        shift: (sx, sy),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Pairwise distance between class means, in units of the class spread.
    pub separation: f64,
    pub subjects: usize,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            classes: 2,
            per_class: 20,
            dim: 4,
            separation: 10.0,
            subjects: 10,
            seed: 0,
        }
    }
}

/// Isotropic unit-variance Gaussian blobs, one per class. With
/// `dim >= classes` the means sit on scaled basis vectors, so every pair of
/// means is exactly `separation` apart; otherwise they sit on a circle in
/// the first two axes with neighbouring means `separation` apart.
pub fn make_dataset(spec: &DatasetSpec) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let dim = spec.dim.max(2);
    let means: Vec<Vec<f64>> = (0..spec.classes)
        .map(|c| {
            let mut m = vec![0.0; dim];
            if dim >= spec.classes {
                m[c] = spec.separation / std::f64::consts::SQRT_2;
            } else {
                let step = std::f64::consts::TAU / spec.classes as f64;
                let radius = spec.separation / (2.0 * (step / 2.0).sin());
                m[0] = radius * (c as f64 * step).cos();
                m[1] = radius * (c as f64 * step).sin();
            }
            m
        })
        .collect();
    let subjects = spec.subjects.max(1);
    let mut out = Vec::with_capacity(spec.classes * spec.per_class);
    for (c, mean) in means.iter().enumerate() {
        for j in 0..spec.per_class {
            let features = mean.iter().map(|m| m + normal.sample(&mut rng)).collect();
            out.push(LabeledSample {
                id: format!("c{c}_{j:03}"),
                features,
                label: c,
                subject: format!("s{:02}", j % subjects),
            });
        }
    }
    out
}

/// Four tight clusters at `(+-1, +-1)` labelled by the sign product.
pub fn make_xor(per_cluster: usize, spread: f64, seed: u64) -> Vec<LabeledSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, spread).expect("valid spread");
    let mut out = Vec::new();
    for (k, (cx, cy)) in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)]
        .iter()
        .enumerate()
    {
        for j in 0..per_cluster {
            out.push(LabeledSample {
                id: format!("xor{k}_{j}"),
                features: vec![cx + normal.sample(&mut rng), cy + normal.sample(&mut rng)],
                label: usize::from(k >= 2),
                subject: format!("s{j}"),
            });
        }
    }
    out
}

/// One moving facial area of a synthetic expression class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlobMotion {
    /// Position in the canonical face frame.
    pub center: [f64; 2],
    pub direction_deg: f64,
}

/// Three expression-like classes, each a distinct set of localised motions
/// on the canonical face: mouth corners pulled outwards and up, brows
/// raised, and the lower lip and chin pulled down.
pub fn expression_classes() -> Vec<(&'static str, Vec<BlobMotion>)> {
    let blob = |x, y, d| BlobMotion {
        center: [x, y],
        direction_deg: d,
    };
    vec![
        (
            "brow_raise",
            vec![blob(83.0, 69.0, 90.0), blob(117.0, 69.0, 90.0)],
        ),
        ("jaw_drop", vec![blob(100.0, 199.0, 270.0)]),
        (
            "smile",
            vec![blob(79.0, 170.0, 150.0), blob(121.0, 170.0, 30.0)],
        ),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub per_class: usize,
    /// Frames per sequence, at least two.
    pub frames: usize,
    /// Peak displacement per frame, pixels.
    pub magnitude: f64,
    pub sigma: f64,
    /// Random deviation of each sequence's motion direction, degrees.
    pub direction_jitter: f64,
    /// Standard deviation of per-frame landmark noise, pixels.
    pub landmark_noise: f64,
    pub subjects: usize,
    pub seed: u64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            per_class: 20,
            frames: 3,
            magnitude: 5.0,
            sigma: 10.0,
            direction_jitter: 10.0,
            landmark_noise: 0.3,
            subjects: 10,
            seed: 0,
        }
    }
}

/// Writes a labelled corpus of synthetic expression sequences under `dir`:
/// `seq/<id>/frame_NNN.png`, `lm/<id>/frame_NNN.pts` and `manifest.csv`.
/// Returns the manifest path.
pub fn write_expression_corpus(
    dir: &std::path::Path,
    spec: &CorpusSpec,
) -> Result<std::path::PathBuf> {
    use crate::face::{canonical_landmarks, FaceGeometry, Point, CANONICAL_FRAME};

    if spec.frames < 2 {
        return Err(Error::Spec("a sequence needs at least two frames".into()));
    }
    let (w, h) = CANONICAL_FRAME;
    let io = |p: &std::path::Path, e| Error::Io {
        path: p.to_path_buf(),
        source: e,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.landmark_noise.max(1e-12)).expect("valid noise");
    let mut manifest = String::from("id,frames_dir,landmarks,label,subject,onset,apex\n");
    let mut n = 0;
    for (label, motions) in expression_classes() {
        for j in 0..spec.per_class {
            let id = format!("{label}_{j:03}");
            let seq_dir = dir.join("seq").join(&id);
            let lm_dir = dir.join("lm").join(&id);
            std::fs::create_dir_all(&seq_dir).map_err(|e| io(&seq_dir, e))?;
            std::fs::create_dir_all(&lm_dir).map_err(|e| io(&lm_dir, e))?;

            let parts = motions
                .iter()
                .map(|m| SynthSpec::GaussianBlob {
                    center: m.center,
                    sigma: spec.sigma,
                    direction_deg: m.direction_deg
                        + rng.random_range(-1.0..=1.0) * spec.direction_jitter,
                    magnitude: spec.magnitude * rng.random_range(0.9..=1.1),
                })
                .collect();
            let flow = make_flow(&SynthSpec::Sum { parts }, w, h)?;
            let mut frame = texture(w, h, rng.random())?;
            for t in 0..spec.frames {
                if t > 0 {
                    frame = warp_frame(&frame, &flow)?;
                }
                frame.save_png(seq_dir.join(format!("frame_{t:03}.png")))?;
                let lm: Vec<Point> = canonical_landmarks()
                    .into_iter()
                    .map(|p| p + Point::new(noise.sample(&mut rng), noise.sample(&mut rng)))
                    .collect();
                let path = lm_dir.join(format!("frame_{t:03}.pts"));
                std::fs::write(&path, FaceGeometry::new(lm)?.to_text())
                    .map_err(|e| io(&path, e))?;
            }
            manifest.push_str(&format!(
                "{id},seq/{id},lm/{id},{label},s{:02},0,{}\n",
                n % spec.subjects.max(1),
                spec.frames - 1
            ));
            n += 1;
        }
    }
    let path = dir.join("manifest.csv");
    std::fs::write(&path, manifest).map_err(|e| io(&path, e))?;
    Ok(path)
}
