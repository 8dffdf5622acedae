//! Derived landmarks and the 25-region partition of the canonical face.
//!
//! cargo run --example face_regions [-- <landmarks.pts>]

use lmpkit::face::{build_rois, canonical_landmarks, FaceGeometry, RoiSpec};

fn main() -> lmpkit::Result<()> {
    let geom = match std::env::args().nth(1) {
        Some(path) => FaceGeometry::load(path)?,
        None => FaceGeometry::new(canonical_landmarks())?,
    };
    println!(
        "inter-ocular {:.2} px, face size {:.2} px",
        geom.inter_ocular(),
        geom.face_size()
    );
    for (name, p) in geom.derived() {
        println!("{name:>4} ({:7.2}, {:7.2})", p.x, p.y);
    }
    let rois = build_rois(&geom, &RoiSpec::default())?;
    for (k, poly) in rois.polygons().iter().enumerate() {
        let c = poly.centroid();
        println!(
            "region {:2}: centroid ({:6.1}, {:6.1}) area {:7.1} px^2",
            k + 1,
            c.x,
            c.y,
            poly.area()
        );
    }
    println!(
        "overlap 19/18 {:.1} px^2, 22/23 {:.1} px^2",
        rois.region(19).overlap_area(rois.region(18), 0.1),
        rois.region(22).overlap_area(rois.region(23), 0.1)
    );
    Ok(())
}
