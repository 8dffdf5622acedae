//! Built-in parameter presets and what they imply for a given face size.
//!
//! cargo run --example presets [-- <face_size_px>]

use lmpkit::lmp::{max_regions, LmpConfig, PRESET_NAMES};

fn main() -> lmpkit::Result<()> {
    let face: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(130.0);
    println!("face size {face} px");
    println!(
        "{:<9} {:>3} {:>5} {:>6} {:>5} {:>4} {:>8} {:>8}",
        "preset", "B", "beta", "rho", "alpha", "s", "side px", "regions"
    );
    for name in PRESET_NAMES {
        let cfg = LmpConfig::preset(name)?;
        cfg.validate()?;
        println!(
            "{name:<9} {:>3} {:>5} {:>6.2} {:>5} {:>4} {:>8.1} {:>8}",
            cfg.bins,
            cfg.beta,
            cfg.rho,
            cfg.intensity_alpha,
            cfg.span_s,
            cfg.region_side(face),
            max_regions(cfg.beta, cfg.connectivity as usize)
        );
    }
    println!(
        "\ncasme2 as JSON:\n{}",
        LmpConfig::preset("casme2")?.to_json()
    );
    Ok(())
}
