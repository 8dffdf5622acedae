//! Per-class motion heat maps over the synthetic expression corpus.
//!
//! cargo run --release --example heat_maps [-- <out_dir>]

use lmpkit::cli::{load_sequence, read_manifest};
use lmpkit::face::{build_heat_maps, HEATMAP_COLS, HEATMAP_ROWS};
use lmpkit::flow::FlowParams;
use lmpkit::lmp::LmpConfig;
use lmpkit::synth::{write_expression_corpus, CorpusSpec};

fn main() -> lmpkit::Result<()> {
    let tmp = tempfile::tempdir().map_err(|e| lmpkit::Error::Internal(e.to_string()))?;
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| tmp.path().to_path_buf(), Into::into);
    let spec = CorpusSpec {
        per_class: 5,
        ..CorpusSpec::default()
    };
    let manifest = write_expression_corpus(&out, &spec)?;
    let seqs = read_manifest(&manifest)?
        .iter()
        .map(load_sequence)
        .collect::<lmpkit::Result<Vec<_>>>()?;
    let maps = build_heat_maps(&seqs, &LmpConfig::default(), &FlowParams::default())?;
    for map in &maps {
        println!("{}:", map.label);
        for row in 0..HEATMAP_ROWS {
            let line: String = (0..HEATMAP_COLS)
                .map(|c| match map.get(c, row) {
                    v if v >= 0.75 => '#',
                    v if v >= 0.25 => '+',
                    v if v > 0.0 => '.',
                    _ => ' ',
                })
                .collect();
            println!("  |{line}|");
        }
        map.save_png(out.join(format!("{}.png", map.label)))?;
    }
    println!("images in {}", out.display());
    Ok(())
}
