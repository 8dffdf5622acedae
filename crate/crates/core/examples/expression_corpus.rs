//! Generates a synthetic three-class expression corpus, extracts motion
//! features through the command-line front end and cross-validates them.
//!
//! cargo run --release --example expression_corpus [-- <out-dir>]

use std::time::Instant;

use lmpkit::synth::{write_expression_corpus, CorpusSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let tmp = tempfile::tempdir()?;
    let dir = out.unwrap_or_else(|| tmp.path().to_path_buf());
    std::fs::create_dir_all(&dir)?;

    let start = Instant::now();
    let manifest = write_expression_corpus(&dir, &CorpusSpec::default())?;
    println!(
        "corpus written to {} in {:.1?}",
        dir.display(),
        start.elapsed()
    );

    let features = dir.join("features.csv");
    let report = dir.join("report.json");
    let run = |args: &[&str]| lmpkit::cli::run(args.iter().copied());
    let code = run(&[
        "lmpkit",
        "extract",
        manifest.to_str().unwrap(),
        "--out",
        features.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "extract failed");
    println!("features extracted after {:.1?}", start.elapsed());
    let code = run(&[
        "lmpkit",
        "eval",
        features.to_str().unwrap(),
        "--protocol",
        "kfold10",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "eval failed");
    let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report)?)?;
    println!(
        "10-fold accuracy {} (total {:.1?})",
        r["accuracy"],
        start.elapsed()
    );
    println!("confusion {}", r["confusion"]);
    Ok(())
}
