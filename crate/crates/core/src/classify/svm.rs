use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{check_samples, LabeledSample, MinMaxScaler};
use crate::error::{Error, Result};

/// Stopping tolerance on the maximal KKT violation.
pub const SMO_EPS: f64 = 1e-3;
const TAU: f64 = 1e-12;
/// A pairwise decision at or above `-VOTE_EPS` votes for the smaller class id.
pub const VOTE_EPS: f64 = 1e-9;
const MODEL_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / dim`.
    pub gamma: Option<f64>,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 100.0,
            gamma: None,
        }
    }
}

impl SvmParams {
    pub fn gamma_for(&self, dim: usize) -> f64 {
        self.gamma.unwrap_or(1.0 / dim.max(1) as f64)
    }
}

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

pub fn kernel_matrix(points: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut k = vec![vec![0.0; n]; n];
    for i in 0..n {
        k[i][i] = 1.0;
        for j in 0..i {
            let v = rbf(gamma, &points[i], &points[j]);
            k[i][j] = v;
            k[j][i] = v;
        }
    }
    k
}

/// Solution of the two-class dual problem.
#[derive(Clone, Debug)]
pub struct BinarySolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

/// Sequential minimal optimisation with second-order working-set selection
/// and no shrinking. `y` holds +1/-1 and `k` is the full kernel matrix.
pub fn smo(k: &[Vec<f64>], y: &[f64], c: f64, eps: f64) -> BinarySolution {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let upper = |a: f64| a >= c;
    let lower = |a: f64| a <= 0.0;
    let max_iter = (100 * n).max(10_000_000);
    let mut iter = 0;

    while iter < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = None;
        for t in 0..n {
            let v = -y[t] * grad[t];
            let free = if y[t] > 0.0 {
                !upper(alpha[t])
            } else {
                !lower(alpha[t])
            };
            if free && v >= gmax {
                gmax = v;
                i_sel = Some(t);
            }
        }
        let Some(i) = i_sel else { break };
        let mut gmax2 = f64::NEG_INFINITY;
        let mut best = f64::INFINITY;
        let mut j_sel = None;
        for t in 0..n {
            let free = if y[t] > 0.0 {
                !lower(alpha[t])
            } else {
                !upper(alpha[t])
            };
            if !free {
                continue;
            }
            let v = y[t] * grad[t];
            gmax2 = gmax2.max(v);
            let diff = gmax + v;
            if diff > 0.0 {
                let quad = k[i][i] + k[t][t] - 2.0 * k[i][t];
                let obj = -(diff * diff) / if quad > 0.0 { quad } else { TAU };
                if obj <= best {
                    best = obj;
                    j_sel = Some(t);
                }
            }
        }
        let Some(j) = j_sel else { break };
        if gmax + gmax2 < eps {
            break;
        }
        iter += 1;

        let (old_i, old_j) = (alpha[i], alpha[j]);
        let quad = (k[i][i] + k[j][j] - 2.0 * k[i][j]).max(TAU);
        if y[i] != y[j] {
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias: mean over free vectors, else the midpoint of the feasible range.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if upper(alpha[t]) {
            if y[t] < 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else if lower(alpha[t]) {
            if y[t] > 0.0 {
                ub = ub.min(yg)
            } else {
                lb = lb.max(yg)
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    BinarySolution {
        alpha,
        rho,
        iterations: iter,
    }
}

/// Decision function `sum_i coef_i K(sv_i, x) - rho` separating class `pos`
/// (positive side) from `neg`, with `pos < neg`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    pub pos: usize,
    pub neg: usize,
    pub support: Vec<Vec<f64>>,
    /// `y_i * alpha_i` for each support vector.
    pub coef: Vec<f64>,
    pub rho: f64,
}

impl BinaryMachine {
    pub fn decision(&self, gamma: f64, x: &[f64]) -> f64 {
        self.support
            .iter()
            .zip(&self.coef)
            .map(|(sv, c)| c * rbf(gamma, sv, x))
            .sum::<f64>()
            - self.rho
    }
}

/// One-vs-one RBF support vector classifier.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub version: u32,
    pub dim: usize,
    pub c: f64,
    pub gamma: f64,
    /// Sorted class ids seen in training.
    pub classes: Vec<usize>,
    /// Optional display names indexed by class id.
    #[serde(default)]
    pub class_names: Vec<String>,
    pub scaler: MinMaxScaler,
    pub machines: Vec<BinaryMachine>,
}

pub fn train(samples: &[LabeledSample], params: &SvmParams) -> Result<SvmModel> {
    let dim = check_samples(samples)?;
    if !(params.c > 0.0) {
        return Err(Error::InvalidInput(format!(
            "C must be positive, got {}",
            params.c
        )));
    }
    let gamma = params.gamma_for(dim);
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    let mut classes: Vec<usize> = samples.iter().map(|s| s.label).collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "training needs at least two classes, got {}",
            classes.len()
        )));
    }
    let scaler = MinMaxScaler::fit(samples.iter().map(|s| s.features.as_slice()));
    let scaled: Vec<Vec<f64>> = samples
        .iter()
        .map(|s| scaler.transform(&s.features))
        .collect();

    let pairs: Vec<(usize, usize)> = classes
        .iter()
        .enumerate()
        .flat_map(|(a, &pa)| classes[a + 1..].iter().map(move |&pb| (pa, pb)))
        .collect();
    let machines = pairs
        .par_iter()
        .map(|&(pos, neg)| {
            let idx: Vec<usize> = (0..samples.len())
                .filter(|&i| samples[i].label == pos || samples[i].label == neg)
                .collect();
            let pts: Vec<Vec<f64>> = idx.iter().map(|&i| scaled[i].clone()).collect();
            let y: Vec<f64> = idx
                .iter()
                .map(|&i| if samples[i].label == pos { 1.0 } else { -1.0 })
                .collect();
            let sol = smo(&kernel_matrix(&pts, gamma), &y, params.c, SMO_EPS);
            let (mut support, mut coef) = (Vec::new(), Vec::new());
            for ((p, a), yi) in pts.into_iter().zip(&sol.alpha).zip(&y) {
                if *a > 0.0 {
                    support.push(p);
                    coef.push(yi * a);
                }
            }
            BinaryMachine {
                pos,
                neg,
                support,
                coef,
                rho: sol.rho,
            }
        })
        .collect();
    Ok(SvmModel {
        version: MODEL_VERSION,
        dim,
        c: params.c,
        gamma,
        classes,
        class_names: Vec::new(),
        scaler,
        machines,
    })
}

impl SvmModel {
    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Validation(format!(
                "input has {} features, model expects {}",
                x.len(),
                self.dim
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("input has non-finite features".into()));
        }
        Ok(())
    }

    /// Pairwise decision values in machine order.
    pub fn decision_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let z = self.scaler.transform(x);
        Ok(self
            .machines
            .iter()
            .map(|m| m.decision(self.gamma, &z))
            .collect())
    }

    /// Majority vote over the pairwise machines; ties go to the smallest id.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        let decisions = self.decision_values(x)?;
        let mut votes = vec![0usize; self.classes.len()];
        let slot = |c: usize| self.classes.binary_search(&c).expect("known class");
        for (m, d) in self.machines.iter().zip(decisions) {
            let winner = if d > -VOTE_EPS { m.pos } else { m.neg };
            votes[slot(winner)] += 1;
        }
        let best = votes.iter().max().copied().unwrap_or(0);
        let i = votes.iter().position(|&v| v == best).expect("non-empty");
        Ok(self.classes[i])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(text)?;
        if m.version != MODEL_VERSION {
            return Err(Error::Format(format!(
                "unsupported model version {}",
                m.version
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }
}
