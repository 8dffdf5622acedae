//! Grows a local motion pattern over synthetic fields and prints how far it
//! spreads and where its mass lies.
//!
//! cargo run --release --example local_pattern [-- <field.json>]

use lmpkit::lmp::{max_regions, propagate, LmpConfig};
use lmpkit::synth::{make_flow, SynthSpec};

fn main() -> lmpkit::Result<()> {
    let cfg = LmpConfig::default();
    let mut fields = vec![
        (
            "translation",
            SynthSpec::UniformTranslation {
                direction_deg: 30.0,
                magnitude: 4.0,
            },
        ),
        (
            "blob",
            SynthSpec::GaussianBlob {
                center: [100.0, 100.0],
                sigma: 8.0,
                direction_deg: 120.0,
                magnitude: 5.0,
            },
        ),
        (
            "diverging",
            SynthSpec::Diverging {
                center: [100.0, 100.0],
                magnitude: 3.0,
            },
        ),
        (
            "noise",
            SynthSpec::RandomNoise {
                magnitude: 4.0,
                seed: 7,
            },
        ),
    ];
    if let Some(path) = std::env::args().nth(1) {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| lmpkit::Error::InvalidInput(e.to_string()))?;
        fields = vec![("custom", SynthSpec::from_json(&text)?)];
    }
    println!(
        "B = {}, beta = {}, at most {} regions",
        cfg.bins,
        cfg.beta,
        max_regions(cfg.beta, 8)
    );
    for (name, spec) in fields {
        let flow = make_flow(&spec, 200, 200)?;
        let lmp = propagate(&flow, (100.0, 100.0), 130.0, &cfg)?;
        let total: f64 = lmp.distribution.iter().sum();
        let peak = lmp
            .distribution
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(i, _)| i);
        println!(
            "{name:<12} coherent {:<5} regions {:>3}  mass {total:>9.1}  peak bin {peak}",
            lmp.coherent, lmp.region_count
        );
    }
    Ok(())
}
