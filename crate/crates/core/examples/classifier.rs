//! SVM evaluation on synthetic features under k-fold and leave-one-subject-out.
//!
//! cargo run --release --example classifier

use lmpkit::classify::{evaluate, grid_search, Dataset, Protocol, Tuning};
use lmpkit::synth::{make_dataset, DatasetSpec};

fn main() -> lmpkit::Result<()> {
    let samples = make_dataset(&DatasetSpec {
        classes: 4,
        per_class: 30,
        dim: 8,
        separation: 4.0,
        subjects: 6,
        seed: 3,
    });
    let best = grid_search(&samples, 0)?;
    println!(
        "grid search picked C = {}, gamma = {:?}",
        best.c, best.gamma
    );
    let data = Dataset::from_samples(samples)?;
    for protocol in [Protocol::KFold { k: 10, seed: 0 }, Protocol::Loso] {
        for tuning in [Tuning::default(), Tuning::Grid { seed: 0 }] {
            let r = evaluate(&data, &protocol, &tuning)?;
            println!(
                "{:<8} {:<6} accuracy {:.3} ({}/{}, {} folds skipped)",
                protocol.name(),
                if matches!(tuning, Tuning::Grid { .. }) {
                    "grid"
                } else {
                    "fixed"
                },
                r.accuracy,
                r.correct,
                r.total,
                r.skipped.len()
            );
        }
    }
    let r = evaluate(&data, &Protocol::Loso, &Tuning::default())?;
    print!("{}", r.confusion_csv());
    Ok(())
}
