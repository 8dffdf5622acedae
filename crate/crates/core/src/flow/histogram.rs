use super::FlowField;
use crate::error::{Error, Result};

/// One flow vector reduced to its direction bin and (capped) magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionSample {
    pub bin: usize,
    pub magnitude: f64,
}

/// The direction-binned flow of one local motion region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionHistogram {
    bins: usize,
    samples: Vec<MotionSample>,
}

impl RegionHistogram {
    pub fn new(bins: usize, samples: Vec<MotionSample>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidInput(
                "histogram needs at least one bin".into(),
            ));
        }
        if let Some(s) = samples
            .iter()
            .find(|s| s.bin >= bins || !(s.magnitude >= 0.0) || !s.magnitude.is_finite())
        {
            return Err(Error::Validation(format!(
                "sample {s:?} does not fit a {bins}-bin histogram"
            )));
        }
        Ok(Self { bins, samples })
    }

    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn samples(&self) -> &[MotionSample] {
        &self.samples
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Direction of a flow vector in degrees, `[0, 360)`, counter-clockwise from
/// +x with the image y axis flipped so that "up on screen" is 90°.
pub fn direction_deg(dx: f64, dy: f64) -> f64 {
    let deg = (-dy).atan2(dx).to_degrees();
    let deg = if deg < 0.0 { deg + 360.0 } else { deg };
    if deg >= 360.0 {
        0.0
    } else {
        deg
    }
}

pub fn direction_bin(dx: f64, dy: f64, bins: usize) -> usize {
    let width = 360.0 / bins as f64;
    ((direction_deg(dx, dy) / width).floor() as usize).min(bins - 1)
}

/// Axis-aligned square window in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SquareRegion {
    pub cx: f64,
    pub cy: f64,
    pub side: f64,
}

impl SquareRegion {
    pub fn new(cx: f64, cy: f64, side: f64) -> Self {
        Self { cx, cy, side }
    }

    /// Half-open pixel bounds `[x0, x1) x [y0, y1)`, before clipping.
    pub fn pixel_bounds(&self) -> (i64, i64, i64, i64) {
        let side = self.side.round().max(1.0) as i64;
        let x0 = (self.cx - self.side / 2.0).round() as i64;
        let y0 = (self.cy - self.side / 2.0).round() as i64;
        (x0, y0, x0 + side, y0 + side)
    }

    /// Bounds clipped to a `width x height` grid, `None` when nothing is left.
    pub fn clip(&self, width: usize, height: usize) -> Option<(usize, usize, usize, usize)> {
        let (x0, y0, x1, y1) = self.pixel_bounds();
        let x0 = x0.max(0);
        let y0 = y0.max(0);
        let x1 = x1.min(width as i64);
        let y1 = y1.min(height as i64);
        (x0 < x1 && y0 < y1).then_some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }
}

/// Collects one sample per moving pixel of `region`; still pixels are skipped.
pub fn sample_region(
    flow: &FlowField,
    region: &SquareRegion,
    bins: usize,
    magnitude_cap: f64,
) -> Result<RegionHistogram> {
    if bins < 4 {
        return Err(Error::InvalidInput(format!("bin count {bins} below 4")));
    }
    let (x0, y0, x1, y1) = region.clip(flow.width(), flow.height()).ok_or_else(|| {
        Error::EmptyRegion(format!(
            "region at ({:.1}, {:.1}) side {:.1} misses the {}x{} field",
            region.cx,
            region.cy,
            region.side,
            flow.width(),
            flow.height()
        ))
    })?;
    let mut samples = Vec::with_capacity((x1 - x0) * (y1 - y0));
    for y in y0..y1 {
        for x in x0..x1 {
            let [dx, dy] = flow.get(x, y);
            let (dx, dy) = (dx as f64, dy as f64);
            let magnitude = dx.hypot(dy);
            if magnitude == 0.0 {
                continue;
            }
            samples.push(MotionSample {
                bin: direction_bin(dx, dy, bins),
                magnitude: magnitude.min(magnitude_cap),
            });
        }
    }
    RegionHistogram::new(bins, samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(w: usize, h: usize, v: [f32; 2]) -> FlowField {
        FlowField::from_fn(w, h, |_, _| v).unwrap()
    }

    #[test]
    fn rightward_motion_lands_in_bin_zero() {
        let f = uniform(20, 20, [1.0, 0.0]);
        let h = sample_region(&f, &SquareRegion::new(10.0, 10.0, 10.0), 9, 10.0).unwrap();
        assert_eq!(h.samples().len(), 100);
        assert!(h.samples().iter().all(|s| s.bin == 0 && s.magnitude == 1.0));
    }

    #[test]
    fn downward_motion_is_270_degrees() {
        assert_eq!(direction_deg(0.0, 1.0), 270.0);
        assert_eq!(direction_deg(0.0, -1.0), 90.0);
        let f = uniform(20, 20, [0.0, 1.0]);
        let h = sample_region(&f, &SquareRegion::new(10.0, 10.0, 10.0), 9, 10.0).unwrap();
        // 270 / 40 = 6.75
        assert!(h.samples().iter().all(|s| s.bin == 6));
    }

    #[test]
    fn magnitudes_are_capped() {
        let f = FlowField::from_fn(10, 10, |x, y| {
            if (x, y) == (4, 4) {
                [50.0, 0.0]
            } else {
                [0.0; 2]
            }
        })
        .unwrap();
        let h = sample_region(&f, &SquareRegion::new(5.0, 5.0, 10.0), 8, 10.0).unwrap();
        assert_eq!(
            h.samples(),
            &[MotionSample {
                bin: 0,
                magnitude: 10.0
            }]
        );
    }

    #[test]
    fn region_is_clipped_and_empty_intersection_fails() {
        let f = uniform(10, 10, [1.0, 1.0]);
        let h = sample_region(&f, &SquareRegion::new(0.0, 0.0, 10.0), 8, 10.0).unwrap();
        assert_eq!(h.samples().len(), 25);
        let err = sample_region(&f, &SquareRegion::new(-20.0, 5.0, 4.0), 8, 10.0);
        assert!(matches!(err, Err(Error::EmptyRegion(_))));
        assert!(sample_region(&f, &SquareRegion::new(5.0, 5.0, 4.0), 3, 10.0).is_err());
    }

    #[test]
    fn rotation_by_one_bin_shifts_indices() {
        let bins = 12;
        let step = (360.0f64 / bins as f64).to_radians();
        let f = FlowField::from_fn(16, 16, |x, y| {
            let a = ((x + 3 * y) % bins) as f64 * step + step / 2.0;
            [(2.0 * a.cos()) as f32, (-2.0 * a.sin()) as f32]
        })
        .unwrap();
        let rotated = f
            .map(|[dx, dy]| {
                let (dx, dy) = (dx as f64, -(dy as f64));
                let (s, c) = step.sin_cos();
                [(dx * c - dy * s) as f32, -((dx * s + dy * c) as f32)]
            })
            .unwrap();
        let region = SquareRegion::new(8.0, 8.0, 16.0);
        let a = sample_region(&f, &region, bins, 10.0).unwrap();
        let b = sample_region(&rotated, &region, bins, 10.0).unwrap();
        for (sa, sb) in a.samples().iter().zip(b.samples()) {
            assert_eq!((sa.bin + 1) % bins, sb.bin);
        }
    }
}
