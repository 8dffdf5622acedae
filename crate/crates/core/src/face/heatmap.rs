use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::{align_by_eyes, FaceGeometry};
use crate::error::{Error, Result};
use crate::flow::{compute_flow, FlowField, FlowParams, Frame};
use crate::lmp::{propagate, LmpConfig};

pub const HEATMAP_COLS: usize = 20;
pub const HEATMAP_ROWS: usize = 30;
const CELLS: usize = HEATMAP_COLS * HEATMAP_ROWS;

/// One labelled frame sequence with per-frame landmarks.
#[derive(Clone, Debug)]
pub struct Sequence {
    pub id: String,
    pub frames: Vec<Frame>,
    pub landmarks: Vec<FaceGeometry>,
    pub label: String,
    pub subject: String,
}

impl Sequence {
    /// Eye-aligned frames and landmarks.
    pub fn aligned(&self) -> Result<(Vec<Frame>, Vec<FaceGeometry>)> {
        let a = align_by_eyes(&self.frames, &self.landmarks)?;
        Ok((a.frames, a.landmarks))
    }

    /// Flow between consecutive aligned frames, plus the first aligned
    /// frame's landmarks.
    pub fn aligned_flows(&self, params: &FlowParams) -> Result<(Vec<FlowField>, FaceGeometry)> {
        if self.frames.len() < 2 {
            return Err(Error::Validation(format!(
                "sequence {} needs at least two frames",
                self.id
            )));
        }
        let (frames, landmarks) = self.aligned()?;
        let flows = frames
            .windows(2)
            .map(|w| compute_flow(&w[0], &w[1], params))
            .collect::<Result<Vec<_>>>()?;
        Ok((flows, landmarks.into_iter().next().expect("non-empty")))
    }
}

/// Row-major 20x30 block mask; a block is set when the local motion
/// pattern grown from its centre is coherent.
pub fn block_mask(flow: &FlowField, face_size: f64, cfg: &LmpConfig) -> Result<Vec<bool>> {
    let (w, h) = (flow.width() as f64, flow.height() as f64);
    let mut mask = vec![false; CELLS];
    for row in 0..HEATMAP_ROWS {
        for col in 0..HEATMAP_COLS {
            let cx = (col as f64 + 0.5) * w / HEATMAP_COLS as f64;
            let cy = (row as f64 + 0.5) * h / HEATMAP_ROWS as f64;
            mask[row * HEATMAP_COLS + col] = propagate(flow, (cx, cy), face_size, cfg)?.coherent;
        }
    }
    Ok(mask)
}

/// Union of the per-pair block masks of one sequence.
pub fn sequence_mask(flows: &[FlowField], face_size: f64, cfg: &LmpConfig) -> Result<Vec<bool>> {
    let mut mask = vec![false; CELLS];
    for flow in flows {
        for (m, b) in mask.iter_mut().zip(block_mask(flow, face_size, cfg)?) {
            *m |= b;
        }
    }
    Ok(mask)
}

/// Per-class density of coherent motion on the 20x30 block grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HeatMap {
    pub label: String,
    values: Vec<f64>,
}

impl HeatMap {
    /// Mean of the given sequence masks; an empty list yields an all-zero map.
    pub fn from_masks(label: impl Into<String>, masks: &[Vec<bool>]) -> Result<Self> {
        let mut values = vec![0.0; CELLS];
        for m in masks {
            if m.len() != CELLS {
                return Err(Error::Validation(format!(
                    "mask has {} cells, expected {CELLS}",
                    m.len()
                )));
            }
            for (v, &b) in values.iter_mut().zip(m) {
                if b {
                    *v += 1.0;
                }
            }
        }
        if !masks.is_empty() {
            let n = masks.len() as f64;
            values.iter_mut().for_each(|v| *v /= n);
        }
        Ok(Self {
            label: label.into(),
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * HEATMAP_COLS + col]
    }

    /// Cell containing pixel `(x, y)` of a `width x height` frame.
    pub fn cell_of(x: f64, y: f64, width: usize, height: usize) -> (usize, usize) {
        let col = (x / width as f64 * HEATMAP_COLS as f64).floor() as usize;
        let row = (y / height as f64 * HEATMAP_ROWS as f64).floor() as usize;
        (col.min(HEATMAP_COLS - 1), row.min(HEATMAP_ROWS - 1))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.chunks(HEATMAP_COLS) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn save_png(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let pixels: Vec<u8> = self
            .values
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        image::GrayImage::from_raw(HEATMAP_COLS as u32, HEATMAP_ROWS as u32, pixels)
            .expect("buffer matches dimensions")
            .save(path)
            .map_err(|source| Error::Image {
                path: path.to_path_buf(),
                source,
            })
    }
}

/// Heat map of a single class; sequences are processed in parallel.
pub fn build_heat_map(
    label: &str,
    sequences: &[Sequence],
    cfg: &LmpConfig,
    flow_params: &FlowParams,
) -> Result<HeatMap> {
    cfg.validate()?;
    if let Some(s) = sequences.iter().find(|s| s.label != label) {
        return Err(Error::Validation(format!(
            "sequence {} has label {:?}, expected {label:?}",
            s.id, s.label
        )));
    }
    let masks = sequences
        .par_iter()
        .map(|s| {
            let (flows, first) = s.aligned_flows(flow_params)?;
            sequence_mask(&flows, first.face_size(), cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    HeatMap::from_masks(label, &masks)
}

/// One heat map per distinct label, in sorted label order.
pub fn build_heat_maps(
    sequences: &[Sequence],
    cfg: &LmpConfig,
    flow_params: &FlowParams,
) -> Result<Vec<HeatMap>> {
    let mut labels: Vec<&str> = sequences.iter().map(|s| s.label.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    labels
        .into_iter()
        .map(|label| {
            let members: Vec<Sequence> = sequences
                .iter()
                .filter(|s| s.label == label)
                .cloned()
                .collect();
            build_heat_map(label, &members, cfg, flow_params)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_flow, SynthSpec};

    fn cfg() -> LmpConfig {
        LmpConfig {
            beta: 2,
            ..LmpConfig::default()
        }
    }

    fn blob_flow() -> FlowField {
        let spec = SynthSpec::GaussianBlob {
            center: [60.0, 160.0],
            sigma: 8.0,
            direction_deg: 30.0,
            magnitude: 5.0,
        };
        make_flow(&spec, 200, 240).unwrap()
    }

    #[test]
    fn zero_motion_gives_zero_map() {
        let flow = FlowField::zeros(200, 240);
        let mask = sequence_mask(&[flow], 124.8, &cfg()).unwrap();
        let map = HeatMap::from_masks("x", &[mask.clone(), mask]).unwrap();
        assert!(map.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn blob_cells_light_up() {
        let mask = sequence_mask(&[blob_flow()], 124.8, &cfg()).unwrap();
        let map = HeatMap::from_masks("x", &[mask.clone(), mask.clone()]).unwrap();
        let (col, row) = HeatMap::cell_of(60.0, 160.0, 200, 240);
        assert_eq!(map.get(col, row), 1.0);
        assert_eq!(map.get(0, 0), 0.0);
        assert_eq!(map.get(HEATMAP_COLS - 1, 0), 0.0);

        let zero = vec![false; CELLS];
        let half = HeatMap::from_masks("x", &[mask.clone(), zero.clone()]).unwrap();
        assert_eq!(half.get(col, row), 0.5);
        let swapped = HeatMap::from_masks("x", &[zero, mask]).unwrap();
        assert_eq!(half, swapped);
        assert!(half.values().iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn exports() {
        let dir = tempfile::tempdir().unwrap();
        let mut mask = vec![false; CELLS];
        mask[3] = true;
        let map = HeatMap::from_masks("a", &[mask]).unwrap();
        map.save_png(dir.path().join("a.png")).unwrap();
        map.save_csv(dir.path().join("a.csv")).unwrap();
        let img = image::open(dir.path().join("a.png")).unwrap().to_luma8();
        assert_eq!(img.dimensions(), (20, 30));
        assert_eq!(img.get_pixel(3, 0)[0], 255);
        let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
        assert_eq!(csv.lines().count(), HEATMAP_ROWS);
    }

    #[test]
    fn wrong_mask_size_is_rejected() {
        assert!(HeatMap::from_masks("a", &[vec![true; 5]]).is_err());
    }
}
