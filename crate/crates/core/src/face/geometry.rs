use std::collections::BTreeMap;
use std::ops::{Add, Mul, Sub};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LANDMARK_COUNT: usize = 68;
/// Face size used to scale region sides, in inter-ocular distances.
pub const FACE_SIZE_PER_INTER_OCULAR: f64 = 2.4;

pub const RIGHT_EYE: std::ops::Range<usize> = 36..42;
pub const LEFT_EYE: std::ops::Range<usize> = 42..48;
pub const NOSE_TOP: usize = 27;
pub const NOSE_BOTTOM: usize = 33;
/// Eyebrow anchors of the forehead points `PA..PF`.
pub const FOREHEAD_ANCHORS: [(&str, usize); 6] = [
    ("PA", 17),
    ("PB", 19),
    ("PC", 21),
    ("PD", 22),
    ("PE", 24),
    ("PF", 26),
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(self, other: Point, t: f64) -> Point {
        self + (other - self) * t
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, k: f64) -> Point {
        Point::new(self.x * k, self.y * k)
    }
}

pub fn mean_point(points: impl IntoIterator<Item = Point>) -> Point {
    let (mut sum, mut n) = (Point::default(), 0usize);
    for p in points {
        sum = sum + p;
        n += 1;
    }
    sum * (1.0 / n.max(1) as f64)
}

/// 68 landmarks (standard 0-based indexing) plus the points derived from them.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceGeometry {
    landmarks: Vec<Point>,
    derived: BTreeMap<String, Point>,
    inter_ocular: f64,
}

impl FaceGeometry {
    pub fn new(landmarks: Vec<Point>) -> Result<Self> {
        if landmarks.len() != LANDMARK_COUNT {
            return Err(Error::Format(format!(
                "expected {LANDMARK_COUNT} landmarks, got {}",
                landmarks.len()
            )));
        }
        if landmarks
            .iter()
            .any(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(Error::Validation("non-finite landmark".into()));
        }
        let derived = derive_points(&landmarks)?;
        let (r, l) = eye_centers(&landmarks);
        Ok(Self {
            inter_ocular: r.dist(l),
            landmarks,
            derived,
        })
    }

    /// Like [`FaceGeometry::new`], additionally requiring every landmark to
    /// lie inside a `width x height` frame.
    pub fn within(landmarks: Vec<Point>, width: usize, height: usize) -> Result<Self> {
        if let Some((i, p)) = landmarks.iter().enumerate().find(|(_, p)| {
            p.x < 0.0 || p.y < 0.0 || p.x > (width - 1) as f64 || p.y > (height - 1) as f64
        }) {
            return Err(Error::Validation(format!(
                "landmark {i} at ({:.1}, {:.1}) outside the {width}x{height} frame",
                p.x, p.y
            )));
        }
        Self::new(landmarks)
    }

    pub fn landmarks(&self) -> &[Point] {
        &self.landmarks
    }

    pub fn derived(&self) -> &BTreeMap<String, Point> {
        &self.derived
    }

    pub fn inter_ocular(&self) -> f64 {
        self.inter_ocular
    }

    pub fn face_size(&self) -> f64 {
        self.inter_ocular * FACE_SIZE_PER_INTER_OCULAR
    }

    pub fn face_center(&self) -> Point {
        mean_point(self.landmarks.iter().copied())
    }

    pub fn eye_centers(&self) -> (Point, Point) {
        eye_centers(&self.landmarks)
    }

    /// Looks up `P0..P67` or a derived point name.
    pub fn point(&self, id: &str) -> Option<Point> {
        if let Some(idx) = id.strip_prefix('P').and_then(|n| n.parse::<usize>().ok()) {
            return self.landmarks.get(idx).copied();
        }
        self.derived.get(id).copied()
    }

    /// Unit vector from the right eye centre to the left one, and the "up"
    /// direction perpendicular to it.
    pub fn axes(&self) -> (Point, Point) {
        axes(&self.landmarks)
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Self> {
        Self::new(self.landmarks.iter().map(|p| f(*p)).collect())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::new(parse_landmarks(&text)?)
    }

    pub fn load_within(path: impl AsRef<Path>, width: usize, height: usize) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::within(parse_landmarks(&text)?, width, height)
    }

    /// Plain `x y` per line.
    pub fn to_text(&self) -> String {
        self.landmarks
            .iter()
            .map(|p| format!("{} {}\n", p.x, p.y))
            .collect()
    }
}

fn eye_centers(landmarks: &[Point]) -> (Point, Point) {
    (
        mean_point(landmarks[RIGHT_EYE].iter().copied()),
        mean_point(landmarks[LEFT_EYE].iter().copied()),
    )
}

fn axes(landmarks: &[Point]) -> (Point, Point) {
    let (r, l) = eye_centers(landmarks);
    let d = l - r;
    let u = d * (1.0 / d.norm());
    (u, Point::new(u.y, -u.x))
}

/// Parses either `x y` pairs one per line (commas allowed) or the ibug
/// `.pts` layout with a `version`/`n_points` header and braces.
pub fn parse_landmarks(text: &str) -> Result<Vec<Point>> {
    let mut points = Vec::new();
    let mut declared = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line == "{" || line == "}" {
            continue;
        }
        if line.starts_with("version") {
            continue;
        }
        if let Some(rest) = line.strip_prefix("n_points:") {
            declared = Some(rest.trim().parse::<usize>().map_err(|_| {
                Error::Format(format!(
                    "line {}: bad n_points {:?}",
                    lineno + 1,
                    rest.trim()
                ))
            })?);
            continue;
        }
        let fields: Vec<&str> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .collect();
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::Format(format!("line {}: bad number {s:?}", lineno + 1)))
        };
        match fields.as_slice() {
            [x, y] => points.push(Point::new(parse(x)?, parse(y)?)),
            _ => {
                return Err(Error::Format(format!(
                    "line {}: expected two coordinates, got {line:?}",
                    lineno + 1
                )))
            }
        }
    }
    if let Some(n) = declared {
        if n != points.len() {
            return Err(Error::Format(format!(
                "header declares {n} points, file holds {}",
                points.len()
            )));
        }
    }
    if points.len() != LANDMARK_COUNT {
        return Err(Error::Format(format!(
            "expected {LANDMARK_COUNT} landmarks, got {}",
            points.len()
        )));
    }
    Ok(points)
}

/// Forehead points `PA..PF` (eyebrow anchors raised by a quarter of the nose
/// length, perpendicular to the eye axis) and `PQ`, the midpoint of `P10`
/// and `P55`.
pub fn derive_points(landmarks: &[Point]) -> Result<BTreeMap<String, Point>> {
    if landmarks.len() != LANDMARK_COUNT {
        return Err(Error::Validation(format!(
            "expected {LANDMARK_COUNT} landmarks, got {}",
            landmarks.len()
        )));
    }
    let (r, l) = eye_centers(landmarks);
    if r.dist(l) <= 1e-9 {
        return Err(Error::Validation("eye centres coincide".into()));
    }
    let (_, up) = axes(landmarks);
    let offset = landmarks[NOSE_TOP].dist(landmarks[NOSE_BOTTOM]) / 4.0;
    let mut out = BTreeMap::new();
    for (name, anchor) in FOREHEAD_ANCHORS {
        out.insert(name.to_string(), landmarks[anchor] + up * offset);
    }
    out.insert("PQ".to_string(), landmarks[10].lerp(landmarks[55], 0.5));
    Ok(out)
}

/// A frontal face in a 200x240 frame, roughly symmetric about x = 100.
pub fn canonical_landmarks() -> Vec<Point> {
    const XY: [(f64, f64); LANDMARK_COUNT] = [
        (40.0, 100.0),
        (42.0, 120.0),
        (45.0, 140.0),
        (50.0, 160.0),
        (57.0, 178.0),
        (67.0, 194.0),
        (79.0, 207.0),
        (92.0, 215.0),
        (100.0, 218.0),
        (108.0, 215.0),
        (121.0, 207.0),
        (133.0, 194.0),
        (143.0, 178.0),
        (150.0, 160.0),
        (155.0, 140.0),
        (158.0, 120.0),
        (160.0, 100.0),
        (52.0, 82.0),
        (62.0, 75.0),
        (73.0, 73.0),
        (84.0, 75.0),
        (93.0, 79.0),
        (107.0, 79.0),
        (116.0, 75.0),
        (127.0, 73.0),
        (138.0, 75.0),
        (148.0, 82.0),
        (100.0, 92.0),
        (100.0, 104.0),
        (100.0, 116.0),
        (100.0, 128.0),
        (88.0, 138.0),
        (94.0, 141.0),
        (100.0, 143.0),
        (106.0, 141.0),
        (112.0, 138.0),
        (62.0, 96.0),
        (69.0, 91.0),
        (78.0, 91.0),
        (86.0, 97.0),
        (78.0, 100.0),
        (69.0, 100.0),
        (114.0, 97.0),
        (122.0, 91.0),
        (131.0, 91.0),
        (138.0, 96.0),
        (131.0, 100.0),
        (122.0, 100.0),
        (78.0, 168.0),
        (86.0, 162.0),
        (94.0, 159.0),
        (100.0, 160.0),
        (106.0, 159.0),
        (114.0, 162.0),
        (122.0, 168.0),
        (114.0, 176.0),
        (106.0, 179.0),
        (100.0, 180.0),
        (94.0, 179.0),
        (86.0, 176.0),
        (82.0, 168.0),
        (94.0, 164.0),
        (100.0, 165.0),
        (106.0, 164.0),
        (118.0, 168.0),
        (106.0, 172.0),
        (100.0, 173.0),
        (94.0, 172.0),
    ];
    XY.iter().map(|&(x, y)| Point::new(x, y)).collect()
}

pub const CANONICAL_FRAME: (usize, usize) = (200, 240);
