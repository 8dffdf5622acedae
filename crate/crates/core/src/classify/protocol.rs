use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{check_samples, Dataset, LabeledSample};
use super::svm::{train, SvmParams};
use crate::error::{Error, Result};

pub const GRID_C: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];
pub const GRID_GAMMA_LOG2: std::ops::RangeInclusive<i32> = -6..=2;
const INNER_FOLDS: usize = 3;

/// Held-out indices of one fold.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub name: String,
    pub test: Vec<usize>,
}

/// Stratified k-fold split. Each class is shuffled with `seed`, the classes
/// are laid end to end in label order and the result is dealt round-robin,
/// so fold sizes differ by at most one both overall and within a class.
pub fn kfold(samples: &[LabeledSample], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k == 0 || k > samples.len() {
        return Err(Error::InvalidInput(format!(
            "cannot split {} samples into {k} folds",
            samples.len()
        )));
    }
    let mut strata: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        strata.entry(s.label).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut pos = 0;
    for idx in strata.values_mut() {
        idx.shuffle(&mut rng);
        for &i in idx.iter() {
            folds[pos % k].push(i);
            pos += 1;
        }
    }
    Ok(folds
        .into_iter()
        .enumerate()
        .map(|(f, mut test)| {
            test.sort_unstable();
            Fold {
                name: format!("fold{f}"),
                test,
            }
        })
        .collect())
}

/// One fold per subject, in sorted subject order.
pub fn loso(samples: &[LabeledSample]) -> Result<Vec<Fold>> {
    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, s) in samples.iter().enumerate() {
        by_subject.entry(s.subject.as_str()).or_default().push(i);
    }
    if by_subject.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "leave-one-subject-out needs at least two subjects, got {}",
            by_subject.len()
        )));
    }
    Ok(by_subject
        .into_iter()
        .map(|(s, test)| Fold {
            name: s.to_string(),
            test,
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    KFold { k: usize, seed: u64 },
    Loso,
}

impl Protocol {
    pub fn folds(&self, samples: &[LabeledSample]) -> Result<Vec<Fold>> {
        match *self {
            Protocol::KFold { k, seed } => kfold(samples, k, seed),
            Protocol::Loso => loso(samples),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Protocol::KFold { k, .. } => format!("kfold{k}"),
            Protocol::Loso => "loso".into(),
        }
    }
}

/// How each training fold chooses C and gamma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Tuning {
    Fixed(SvmParams),
    /// Exhaustive search over [`GRID_C`] x 2^[`GRID_GAMMA_LOG2`] by inner
    /// stratified 3-fold accuracy; ties keep the earlier grid point.
    Grid {
        seed: u64,
    },
}

impl Default for Tuning {
    fn default() -> Self {
        Tuning::Fixed(SvmParams::default())
    }
}

fn correct_count(
    train_set: &[LabeledSample],
    test: &[LabeledSample],
    p: &SvmParams,
) -> Result<usize> {
    let model = train(train_set, p)?;
    let mut ok = 0;
    for s in test {
        if model.predict(&s.features)? == s.label {
            ok += 1;
        }
    }
    Ok(ok)
}

fn split(samples: &[LabeledSample], test: &[usize]) -> (Vec<LabeledSample>, Vec<LabeledSample>) {
    let held: BTreeSet<usize> = test.iter().copied().collect();
    let (mut tr, mut te) = (Vec::new(), Vec::new());
    for (i, s) in samples.iter().enumerate() {
        if held.contains(&i) {
            te.push(s.clone());
        } else {
            tr.push(s.clone());
        }
    }
    (tr, te)
}

fn class_count(samples: &[LabeledSample]) -> usize {
    samples
        .iter()
        .map(|s| s.label)
        .collect::<BTreeSet<_>>()
        .len()
}

/// Best grid point by inner cross-validated accuracy on `samples`.
pub fn grid_search(samples: &[LabeledSample], seed: u64) -> Result<SvmParams> {
    let grid: Vec<SvmParams> = GRID_C
        .iter()
        .flat_map(|&c| {
            GRID_GAMMA_LOG2.map(move |e| SvmParams {
                c,
                gamma: Some(2f64.powi(e)),
            })
        })
        .collect();
    let folds = match kfold(samples, INNER_FOLDS, seed) {
        Ok(f) => f,
        Err(_) => return Ok(SvmParams::default()),
    };
    let scores = grid
        .par_iter()
        .map(|p| {
            let mut ok = 0;
            for f in &folds {
                let (tr, te) = split(samples, &f.test);
                if class_count(&tr) < 2 {
                    continue;
                }
                ok += correct_count(&tr, &te, p)?;
            }
            Ok(ok)
        })
        .collect::<Result<Vec<usize>>>()?;
    let best = scores.iter().max().copied().unwrap_or(0);
    let i = scores
        .iter()
        .position(|&s| s == best)
        .expect("non-empty grid");
    Ok(grid[i])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub name: String,
    pub test_size: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub c: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: String,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub classes: Vec<String>,
    /// Rows are true classes, columns predicted classes.
    pub confusion: Vec<Vec<usize>>,
    pub folds: Vec<FoldReport>,
    /// Folds left out because training lacked a class present in the fold.
    pub skipped: Vec<String>,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in &self.classes {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (c, row) in self.classes.iter().zip(&self.confusion) {
            out.push_str(c);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

enum FoldOutcome {
    Done(FoldReport, Vec<(usize, usize)>),
    Skipped(String),
}

/// Runs `protocol` over the dataset: each fold trains on the remaining
/// samples (scaling fitted there) and predicts the held-out ones.
pub fn evaluate(data: &Dataset, protocol: &Protocol, tuning: &Tuning) -> Result<EvalReport> {
    let samples = &data.samples;
    let dim = check_samples(samples)?;
    let folds = protocol.folds(samples)?;
    let outcomes = folds
        .par_iter()
        .map(|fold| {
            let (tr, te) = split(samples, &fold.test);
            let train_classes: BTreeSet<usize> = tr.iter().map(|s| s.label).collect();
            if train_classes.len() < 2 || te.iter().any(|s| !train_classes.contains(&s.label)) {
                return Ok(FoldOutcome::Skipped(fold.name.clone()));
            }
            let params = match tuning {
                Tuning::Fixed(p) => *p,
                Tuning::Grid { seed } => grid_search(&tr, *seed)?,
            };
            let model = train(&tr, &params)?;
            let mut pairs = Vec::with_capacity(te.len());
            for s in &te {
                pairs.push((s.label, model.predict(&s.features)?));
            }
            let correct = pairs.iter().filter(|(t, p)| t == p).count();
            Ok(FoldOutcome::Done(
                FoldReport {
                    name: fold.name.clone(),
                    test_size: te.len(),
                    correct,
                    accuracy: correct as f64 / te.len() as f64,
                    c: params.c,
                    gamma: params.gamma_for(dim),
                },
                pairs,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let n_classes = data
        .class_names
        .len()
        .max(samples.iter().map(|s| s.label + 1).max().unwrap_or(0));
    let mut confusion = vec![vec![0usize; n_classes]; n_classes];
    let mut report = EvalReport {
        protocol: protocol.name(),
        accuracy: 0.0,
        correct: 0,
        total: 0,
        classes: (0..n_classes)
            .map(|c| {
                data.class_names
                    .get(c)
                    .cloned()
                    .unwrap_or_else(|| c.to_string())
            })
            .collect(),
        confusion: Vec::new(),
        folds: Vec::new(),
        skipped: Vec::new(),
    };
    for o in outcomes {
        match o {
            FoldOutcome::Done(f, pairs) => {
                for (t, p) in pairs {
                    confusion[t][p] += 1;
                }
                report.correct += f.correct;
                report.total += f.test_size;
                report.folds.push(f);
            }
            FoldOutcome::Skipped(name) => {
                warn!("fold {name} skipped: its training split lacks a class it tests");
                report.skipped.push(name);
            }
        }
    }
    if report.total > 0 {
        report.accuracy = report.correct as f64 / report.total as f64;
    }
    report.confusion = confusion;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{make_dataset, DatasetSpec};

    fn labelled(labels: &[usize], subjects: &[&str]) -> Vec<LabeledSample> {
        labels
            .iter()
            .zip(subjects)
            .enumerate()
            .map(|(i, (&label, s))| LabeledSample {
                id: format!("x{i}"),
                features: vec![i as f64],
                label,
                subject: s.to_string(),
            })
            .collect()
    }

    #[test]
    fn kfold_sizes_and_coverage() {
        let labels: Vec<usize> = (0..327).map(|i| i % 7).collect();
        let subj = vec!["s"; 327];
        let data = labelled(&labels, &subj);
        let folds = kfold(&data, 10, 1).unwrap();
        assert_eq!(folds.len(), 10);
        let mut all: Vec<usize> = folds.iter().flat_map(|f| f.test.clone()).collect();
        all.sort_unstable();
        assert_eq!(all, (0..327).collect::<Vec<_>>());
        for f in &folds {
            assert!(f.test.len() == 32 || f.test.len() == 33);
        }
        for c in 0..7 {
            let per: Vec<usize> = folds
                .iter()
                .map(|f| f.test.iter().filter(|&&i| labels[i] == c).count())
                .collect();
            assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        assert_eq!(folds, kfold(&data, 10, 1).unwrap());
        assert_ne!(folds, kfold(&data, 10, 2).unwrap());
        assert!(matches!(kfold(&data, 328, 0), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn loso_groups_by_subject() {
        let data = labelled(&[0, 1, 0], &["a", "a", "b"]);
        let folds = loso(&data).unwrap();
        assert_eq!(folds.len(), 2);
        assert_eq!(folds[0].test, vec![0, 1]);
        assert_eq!(folds[1].test, vec![2]);
        assert!(loso(&labelled(&[0, 1], &["a", "a"])).is_err());
    }

    #[test]
    fn separable_data_scores_perfectly() {
        let data = Dataset::from_samples(make_dataset(&DatasetSpec::default())).unwrap();
        let r = evaluate(
            &data,
            &Protocol::KFold { k: 10, seed: 0 },
            &Tuning::default(),
        )
        .unwrap();
        assert_eq!(r.accuracy, 1.0);
        assert_eq!(r.total, 40);
        assert_eq!(r.confusion, vec![vec![20, 0], vec![0, 20]]);
        assert!(r.confusion_csv().starts_with("true\\predicted,0,1\n"));
    }

    #[test]
    fn degenerate_loso_fold_is_skipped() {
        // Subject "c" is the only one showing class 2.
        let mut data = make_dataset(&DatasetSpec {
            classes: 3,
            per_class: 6,
            subjects: 2,
            ..DatasetSpec::default()
        });
        for s in data.iter_mut() {
            if s.label == 2 {
                s.subject = "c".into();
            }
        }
        let ds = Dataset::from_samples(data).unwrap();
        let r = evaluate(&ds, &Protocol::Loso, &Tuning::default()).unwrap();
        assert_eq!(r.skipped, vec!["c".to_string()]);
        assert_eq!(r.total, 12);
    }

    #[test]
    fn grid_search_picks_a_grid_point() {
        let data = make_dataset(&DatasetSpec {
            per_class: 12,
            separation: 2.0,
            ..DatasetSpec::default()
        });
        let p = grid_search(&data, 4).unwrap();
        assert!(GRID_C.contains(&p.c));
        let g = p.gamma.unwrap().log2().round() as i32;
        assert!(GRID_GAMMA_LOG2.contains(&g));
    }
}
