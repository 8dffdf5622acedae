use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureRow;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub id: String,
    pub features: Vec<f64>,
    pub label: usize,
    pub subject: String,
}

/// Samples with class ids assigned from sorted label names.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
    pub class_names: Vec<String>,
}

impl Dataset {
    pub fn from_rows(rows: Vec<FeatureRow>) -> Result<Self> {
        let mut class_names: Vec<String> = rows.iter().map(|r| r.label.clone()).collect();
        class_names.sort();
        class_names.dedup();
        let samples = rows
            .into_iter()
            .map(|r| LabeledSample {
                label: class_names
                    .binary_search(&r.label)
                    .expect("label collected above"),
                id: r.id,
                features: r.values,
                subject: r.subject,
            })
            .collect();
        let ds = Self {
            samples,
            class_names,
        };
        ds.check()?;
        Ok(ds)
    }

    /// Wraps samples whose labels are already ids; classes are named by id.
    pub fn from_samples(samples: Vec<LabeledSample>) -> Result<Self> {
        let classes = samples.iter().map(|s| s.label + 1).max().unwrap_or(0);
        let ds = Self {
            samples,
            class_names: (0..classes).map(|c| c.to_string()).collect(),
        };
        ds.check()?;
        Ok(ds)
    }

    fn check(&self) -> Result<()> {
        check_samples(&self.samples).map(|_| ())
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.features.len())
    }
}

/// Verifies a constant, non-zero feature length and finite values; returns
/// the dimension.
pub fn check_samples(samples: &[LabeledSample]) -> Result<usize> {
    let dim = samples.first().map_or(0, |s| s.features.len());
    for s in samples {
        if s.features.len() != dim {
            return Err(Error::Validation(format!(
                "sample {} has {} features, expected {dim}",
                s.id,
                s.features.len()
            )));
        }
        if s.features.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "sample {} has non-finite features",
                s.id
            )));
        }
    }
    Ok(dim)
}

/// Per-dimension min-max scaling onto `[0, 1]`; constant dimensions map to 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Self {
        let mut it = rows.into_iter();
        let Some(first) = it.next() else {
            return Self {
                min: Vec::new(),
                max: Vec::new(),
            };
        };
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for r in it {
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(r) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
        Self { min, max }
    }

    pub fn transform(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&lo, &hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }
}
