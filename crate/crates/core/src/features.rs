//! Per-region motion features: local motion patterns inside each of the 25
//! facial regions, summed over time into the global motion distribution
//! (GMD), with optional shape descriptors of the regions at the apex frame.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::face::{build_rois, FaceGeometry, Polygon, RoiPartition, RoiSpec, Sequence, ROI_COUNT};
use crate::flow::{FlowField, FlowParams};
use crate::lmp::{propagate, LmpConfig};

/// Values per region in a [`GeoVector`].
pub const GEO_PER_ROI: usize = 3;
pub const GEO_LEN: usize = ROI_COUNT * GEO_PER_ROI;

/// Motion distribution of one region: a local motion pattern grown from the
/// polygon centroid, keeping only regions centred inside the polygon.
pub fn roi_motion(
    flow: &FlowField,
    roi: &Polygon,
    face_size: f64,
    cfg: &LmpConfig,
) -> Result<Vec<f64>> {
    if roi.area() < 1e-9 {
        return Err(Error::Geometry("region polygon has zero area".into()));
    }
    let c = roi.centroid();
    let lmp = propagate(flow, (c.x, c.y), face_size, cfg)?;
    Ok(lmp.distribution_where(|r| roi.contains(crate::face::Point::new(r.center.0, r.center.1))))
}

/// Distributions of all regions for one flow field, region-major.
pub fn frame_distributions(
    flow: &FlowField,
    rois: &RoiPartition,
    face_size: f64,
    cfg: &LmpConfig,
) -> Result<Vec<Vec<f64>>> {
    rois.polygons()
        .par_iter()
        .map(|p| roi_motion(flow, p, face_size, cfg))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmdVector {
    pub values: Vec<f64>,
    pub bins: usize,
    pub frames: usize,
    pub sequence_id: String,
}

/// Sums per-frame region distributions over time and concatenates the
/// regions.
pub fn accumulate(sequence_id: &str, per_frame: &[Vec<Vec<f64>>]) -> Result<GmdVector> {
    let first = per_frame
        .first()
        .ok_or_else(|| Error::Validation("no frame distributions to accumulate".into()))?;
    let rois = first.len();
    let bins = first.first().map_or(0, Vec::len);
    if rois == 0 || bins == 0 {
        return Err(Error::Validation("empty frame distribution".into()));
    }
    let mut values = vec![0.0; rois * bins];
    for (t, frame) in per_frame.iter().enumerate() {
        if frame.len() != rois || frame.iter().any(|d| d.len() != bins) {
            return Err(Error::Validation(format!(
                "frame {t} does not have {rois} regions of {bins} bins"
            )));
        }
        for (k, d) in frame.iter().enumerate() {
            for (v, x) in values[k * bins..(k + 1) * bins].iter_mut().zip(d) {
                *v += x;
            }
        }
    }
    Ok(GmdVector {
        values,
        bins,
        frames: per_frame.len(),
        sequence_id: sequence_id.to_string(),
    })
}

/// Region shape at one frame: per region the centroid offset from the face
/// centre, expressed in the eye-aligned frame and divided by the
/// inter-ocular distance, then the area divided by the squared face size.
#[derive(Clone, Debug, PartialEq)]
pub struct GeoVector(pub Vec<f64>);

pub fn geo_features(apex: &FaceGeometry, rois: &RoiPartition) -> GeoVector {
    let centre = apex.face_center();
    let (u, up) = apex.axes();
    let io = apex.inter_ocular();
    let face_area = apex.face_size().powi(2);
    let mut out = Vec::with_capacity(GEO_LEN);
    for p in rois.polygons() {
        let d = p.centroid() - centre;
        out.push((d.x * u.x + d.y * u.y) / io);
        out.push((d.x * up.x + d.y * up.y) / io);
        out.push(p.area() / face_area);
    }
    GeoVector(out)
}

pub fn fuse(gmd: &GmdVector, geo: &GeoVector) -> Vec<f64> {
    gmd.values.iter().chain(&geo.0).copied().collect()
}

/// GMD of a sequence: frames are eye-aligned, flow is computed between
/// consecutive frames, and the regions of each pair come from the first
/// frame of the pair. With `geo`, shape features of the last frame (taken as
/// the apex) are appended.
pub fn extract_sequence(
    seq: &Sequence,
    cfg: &LmpConfig,
    flow_params: &FlowParams,
    roi_spec: &RoiSpec,
    geo: bool,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    let (flows, _) = seq.aligned_flows(flow_params)?;
    let (_, landmarks) = seq.aligned()?;
    let face_size = landmarks[0].face_size();
    let per_frame = flows
        .par_iter()
        .zip(&landmarks)
        .map(|(flow, lm)| frame_distributions(flow, &build_rois(lm, roi_spec)?, face_size, cfg))
        .collect::<Result<Vec<_>>>()?;
    let gmd = accumulate(&seq.id, &per_frame)?;
    if geo {
        let apex = landmarks.last().expect("non-empty");
        Ok(fuse(
            &gmd,
            &geo_features(apex, &build_rois(apex, roi_spec)?),
        ))
    } else {
        Ok(gmd.values)
    }
}

/// One row of a feature table.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub label: String,
    pub subject: String,
    pub values: Vec<f64>,
}

pub fn write_features(path: impl AsRef<Path>, rows: &[FeatureRow]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_features_to(file, rows)
}

pub fn write_features_to(writer: impl std::io::Write, rows: &[FeatureRow]) -> Result<()> {
    let dim = rows.first().map_or(0, |r| r.values.len());
    if let Some(r) = rows.iter().find(|r| r.values.len() != dim) {
        return Err(Error::Validation(format!(
            "row {} has {} values, expected {dim}",
            r.id,
            r.values.len()
        )));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["id".to_string(), "label".into(), "subject".into()];
    header.extend((0..dim).map(|i| format!("f{i}")));
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.id.clone(), r.label.clone(), r.subject.clone()];
        rec.extend(r.values.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<features>", e))?;
    Ok(())
}

pub fn read_features(path: impl AsRef<Path>) -> Result<Vec<FeatureRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_features_from(file)
}

pub fn read_features_from(reader: impl std::io::Read) -> Result<Vec<FeatureRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "label" || &header[2] != "subject" {
        return Err(Error::Format(
            "feature table must start with columns id,label,subject".into(),
        ));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .skip(3)
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: {v:?} is not a number", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(FeatureRow {
            id: rec[0].to_string(),
            label: rec[1].to_string(),
            subject: rec[2].to_string(),
            values,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::{canonical_landmarks, Point};
    use crate::flow::direction_bin;
    use crate::synth::{make_flow, SynthSpec};

    fn cfg() -> LmpConfig {
        LmpConfig {
            beta: 3,
            ..LmpConfig::default()
        }
    }

    fn square(x: f64, y: f64, s: f64) -> Polygon {
        Polygon::new(vec![
            Point::new(x, y),
            Point::new(x + s, y),
            Point::new(x + s, y + s),
            Point::new(x, y + s),
        ])
    }

    /// Translation of `mag` px at `deg` inside `[x0, x0 + s)^2`, zero elsewhere.
    fn patch_flow(x0: usize, s: usize, deg: f64, mag: f64) -> FlowField {
        let (dx, dy) = crate::synth::direction_vector(deg);
        FlowField::from_fn(200, 240, |x, y| {
            if (x0..x0 + s).contains(&x) && (x0..x0 + s).contains(&y) {
                [(dx * mag) as f32, (dy * mag) as f32]
            } else {
                [0.0, 0.0]
            }
        })
        .unwrap()
    }

    #[test]
    fn zero_flow_gives_zero_distribution() {
        let d = roi_motion(
            &FlowField::zeros(200, 240),
            &square(40.0, 40.0, 30.0),
            124.8,
            &cfg(),
        )
        .unwrap();
        assert_eq!(d, vec![0.0; 9]);
    }

    #[test]
    fn translation_inside_roi_lands_in_its_bin() {
        let c = cfg();
        let flow = patch_flow(40, 30, 45.0, 5.0);
        let d = roi_motion(&flow, &square(40.0, 40.0, 30.0), 124.8, &c).unwrap();
        let (dx, dy) = crate::synth::direction_vector(45.0);
        let bin = direction_bin(dx, dy, c.bins);
        assert!(d[bin] > 0.0);
        for (i, v) in d.iter().enumerate() {
            if i != bin {
                assert_eq!(*v, 0.0, "bin {i}");
            }
        }
    }

    #[test]
    fn motion_outside_roi_is_ignored() {
        let flow = patch_flow(120, 30, 45.0, 5.0);
        let d = roi_motion(&flow, &square(40.0, 40.0, 30.0), 124.8, &cfg()).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_roi_is_a_geometry_error() {
        let line = Polygon::new(vec![
            Point::new(1.0, 1.0),
            Point::new(5.0, 5.0),
            Point::new(9.0, 9.0),
        ]);
        assert!(matches!(
            roi_motion(&FlowField::zeros(50, 50), &line, 124.8, &cfg()),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn accumulate_sums_and_commutes() {
        let d = vec![vec![1.0, 0.0], vec![0.5, 2.0]];
        let e = vec![vec![0.0, 3.0], vec![1.0, 1.0]];
        let one = accumulate("s", std::slice::from_ref(&d)).unwrap();
        assert_eq!(one.values, vec![1.0, 0.0, 0.5, 2.0]);
        let both = accumulate("s", &[d.clone(), e.clone()]).unwrap();
        assert_eq!(both.values, vec![1.0, 3.0, 1.5, 3.0]);
        assert_eq!(both, accumulate("s", &[e, d.clone()]).unwrap());
        let bad = vec![vec![1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0]];
        assert!(matches!(
            accumulate("s", &[d, bad]),
            Err(Error::Validation(_))
        ));
        assert!(accumulate("s", &[]).is_err());
    }

    #[test]
    fn gmd_length_matches_bins() {
        let geom = FaceGeometry::new(canonical_landmarks()).unwrap();
        let rois = build_rois(&geom, &RoiSpec::default()).unwrap();
        for bins in [6, 9, 12] {
            let c = LmpConfig { bins, ..cfg() };
            let flow = make_flow(
                &SynthSpec::GaussianBlob {
                    center: [80.0, 168.0],
                    sigma: 6.0,
                    direction_deg: 120.0,
                    magnitude: 5.0,
                },
                200,
                240,
            )
            .unwrap();
            let d = frame_distributions(&flow, &rois, geom.face_size(), &c).unwrap();
            let g = accumulate("s", &[d]).unwrap();
            assert_eq!(g.values.len(), 25 * bins);
            assert!(g.values.iter().any(|&v| v > 0.0));
            let geo = geo_features(&geom, &rois);
            assert_eq!(fuse(&g, &geo).len(), 25 * bins + GEO_LEN);
        }
    }

    #[test]
    fn geo_features_are_similarity_invariant() {
        let geom = FaceGeometry::new(canonical_landmarks()).unwrap();
        let spec = RoiSpec::default();
        let base = geo_features(&geom, &build_rois(&geom, &spec).unwrap());
        assert_eq!(base.0.len(), GEO_LEN);
        let (s, c) = 0.3f64.sin_cos();
        let transforms: [Box<dyn Fn(Point) -> Point>; 3] = [
            Box::new(|p| p + Point::new(13.0, -7.0)),
            Box::new(|p| p * 2.0),
            Box::new(move |p| Point::new(c * p.x - s * p.y + 40.0, s * p.x + c * p.y)),
        ];
        for t in &transforms {
            let g = geom.map(t).unwrap();
            let other = geo_features(&g, &build_rois(&g, &spec).unwrap());
            for (a, b) in base.0.iter().zip(&other.0) {
                assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn feature_csv_round_trips() {
        let rows = vec![
            FeatureRow {
                id: "a".into(),
                label: "happy".into(),
                subject: "s1".into(),
                values: vec![0.1, 2.0, 1e-17],
            },
            FeatureRow {
                id: "b".into(),
                label: "sad".into(),
                subject: "s2".into(),
                values: vec![3.0, 0.0, 7.25],
            },
        ];
        let mut buf = Vec::new();
        write_features_to(&mut buf, &rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("id,label,subject,f0,f1,f2\n"));
        assert_eq!(read_features_from(buf.as_slice()).unwrap(), rows);
        assert!(read_features_from("x,y\n1,2\n".as_bytes()).is_err());
    }
}
