use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FaceGeometry, Point, Polygon};
use crate::error::{Error, Result};

pub const ROI_COUNT: usize = 25;

/// Built-in partition approximating the 25-region facial layout.
pub const DEFAULT_ROI_SPEC: &str = include_str!("../../data/roi_default.json");

/// Extra mesh point defined from named points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointExpr {
    /// Average of the listed points.
    Mean(Vec<String>),
    /// `a + t * (b - a)`.
    Lerp(String, String, f64),
}

/// Declarative region layout: extra points plus, for each region id
/// `1..=25`, an ordered list of point ids forming its outline.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoiSpec {
    #[serde(default)]
    pub points: BTreeMap<String, PointExpr>,
    pub regions: BTreeMap<String, Vec<String>>,
}

impl Default for RoiSpec {
    fn default() -> Self {
        Self::from_json(DEFAULT_ROI_SPEC).expect("built-in ROI spec parses")
    }
}

impl RoiSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Spec(e.to_string()))?;
        spec.check_ids()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    fn check_ids(&self) -> Result<()> {
        if self.regions.len() != ROI_COUNT {
            return Err(Error::Spec(format!(
                "expected {ROI_COUNT} regions, spec has {}",
                self.regions.len()
            )));
        }
        for k in 1..=ROI_COUNT {
            let outline = self
                .regions
                .get(&k.to_string())
                .ok_or_else(|| Error::Spec(format!("region {k} missing")))?;
            if outline.len() < 3 {
                return Err(Error::Spec(format!("region {k} has fewer than 3 points")));
            }
        }
        Ok(())
    }

    /// Regions in id order `1..=25`.
    fn outlines(&self) -> impl Iterator<Item = (usize, &Vec<String>)> {
        (1..=ROI_COUNT).map(|k| (k, &self.regions[&k.to_string()]))
    }
}

/// The 25 facial regions of one face, region `k` at index `k - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct RoiPartition {
    polygons: Vec<Polygon>,
}

impl RoiPartition {
    pub fn polygons(&self) -> &[Polygon] {
        &self.polygons
    }

    /// Region by its 1-based id.
    pub fn region(&self, id: usize) -> &Polygon {
        &self.polygons[id - 1]
    }
}

fn resolve(geometry: &FaceGeometry, extra: &BTreeMap<String, Point>, id: &str) -> Result<Point> {
    geometry
        .point(id)
        .or_else(|| extra.get(id).copied())
        .ok_or_else(|| Error::Spec(format!("unknown point id {id:?}")))
}

pub fn build_rois(geometry: &FaceGeometry, spec: &RoiSpec) -> Result<RoiPartition> {
    spec.check_ids()?;
    let mut extra = BTreeMap::new();
    for (name, expr) in &spec.points {
        let empty = BTreeMap::new();
        let p = match expr {
            PointExpr::Mean(ids) => {
                if ids.is_empty() {
                    return Err(Error::Spec(format!("point {name} averages nothing")));
                }
                let pts = ids
                    .iter()
                    .map(|id| resolve(geometry, &empty, id))
                    .collect::<Result<Vec<_>>>()?;
                super::mean_point(pts)
            }
            PointExpr::Lerp(a, b, t) => {
                resolve(geometry, &empty, a)?.lerp(resolve(geometry, &empty, b)?, *t)
            }
        };
        extra.insert(name.clone(), p);
    }
    let polygons = spec
        .outlines()
        .map(|(_, ids)| {
            ids.iter()
                .map(|id| resolve(geometry, &extra, id))
                .collect::<Result<Vec<_>>>()
                .map(Polygon::new)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RoiPartition { polygons })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::face::canonical_landmarks;

    fn canonical() -> FaceGeometry {
        FaceGeometry::new(canonical_landmarks()).unwrap()
    }

    #[test]
    fn default_partition_is_well_formed() {
        let rois = build_rois(&canonical(), &RoiSpec::default()).unwrap();
        assert_eq!(rois.polygons().len(), ROI_COUNT);
        for (k, p) in rois.polygons().iter().enumerate() {
            assert!(p.is_simple(), "region {} is not simple", k + 1);
        }
        assert!(rois.region(19).overlap_area(rois.region(18), 0.25) > 50.0);
        assert!(rois.region(22).overlap_area(rois.region(23), 0.25) > 50.0);
    }

    #[test]
    fn wrong_region_count_is_a_spec_error() {
        let mut spec = RoiSpec::default();
        spec.regions.remove("25");
        let json = serde_json::to_string(&spec).unwrap();
        assert!(matches!(RoiSpec::from_json(&json), Err(Error::Spec(_))));
        assert!(matches!(
            build_rois(&canonical(), &spec),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn unknown_point_is_a_spec_error() {
        let mut spec = RoiSpec::default();
        spec.regions
            .insert("3".into(), vec!["P1".into(), "P2".into(), "NOPE".into()]);
        assert!(matches!(
            build_rois(&canonical(), &spec),
            Err(Error::Spec(_))
        ));
    }

    #[test]
    fn scaling_landmarks_scales_vertices() {
        let g = canonical();
        let g2 = g.map(|p| p * 2.0).unwrap();
        let a = build_rois(&g, &RoiSpec::default()).unwrap();
        let b = build_rois(&g2, &RoiSpec::default()).unwrap();
        for (pa, pb) in a.polygons().iter().zip(b.polygons()) {
            for (va, vb) in pa.vertices.iter().zip(&pb.vertices) {
                assert!((va.x * 2.0 - vb.x).abs() < 1e-9);
                assert!((va.y * 2.0 - vb.y).abs() < 1e-9);
            }
        }
    }
}
