//! Main-direction runs of a DMH and the filtered histogram they leave.

use super::{Dmh, LmpConfig};

/// A circular interval of consecutive direction bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Run {
    pub start: usize,
    pub len: usize,
}

impl Run {
    /// Bin indices in order, wrapping past the last bin.
    pub fn bins(&self, bin_count: usize) -> impl Iterator<Item = usize> + '_ {
        let start = self.start;
        (0..self.len).map(move |i| (start + i) % bin_count)
    }

    pub fn contains(&self, bin: usize, bin_count: usize) -> bool {
        (bin + bin_count - self.start) % bin_count < self.len
    }
}

/// Maximal circular runs of bins strictly above `alpha`.
pub fn runs_above(values: &[f64], alpha: f64) -> Vec<Run> {
    let n = values.len();
    let above: Vec<bool> = values.iter().map(|v| *v > alpha).collect();
    let Some(gap) = above.iter().position(|a| !a) else {
        return if n == 0 {
            vec![]
        } else {
            vec![Run { start: 0, len: n }]
        };
    };
    let mut runs = Vec::new();
    let mut current: Option<Run> = None;
    for step in 1..=n {
        let b = (gap + step) % n;
        match (above[b], current.as_mut()) {
            (true, Some(run)) => run.len += 1,
            (true, None) => current = Some(Run { start: b, len: 1 }),
            (false, _) => runs.extend(current.take()),
        }
    }
    runs.extend(current);
    runs.sort_by_key(|r| r.start);
    runs
}

/// Runs that qualify as coherent main directions: above the intensity
/// threshold, shorter than the span limit, and free of abrupt steps between
/// adjacent bins. An empty result marks the region as locally incoherent.
pub fn coherent_runs(dmh: &Dmh, cfg: &LmpConfig) -> Vec<Run> {
    let n = dmh.bins();
    runs_above(&dmh.0, cfg.intensity_alpha)
        .into_iter()
        .filter(|run| run.len < cfg.span_s)
        .filter(|run| {
            let values: Vec<f64> = run.bins(n).map(|b| dmh.0[b]).collect();
            let peak = values.iter().cloned().fold(0.0, f64::max);
            let tolerance = cfg.smooth_phi / 10.0 * peak;
            values.windows(2).all(|w| (w[0] - w[1]).abs() < tolerance)
        })
        .collect()
}

/// Filtered DMH: the DMH restricted to the support of accepted runs.
#[derive(Clone, Debug, PartialEq)]
pub struct Fdmh(pub Vec<f64>);

impl Fdmh {
    pub fn bins(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }
}

pub fn filter_dmh(dmh: &Dmh, runs: &[Run]) -> Fdmh {
    let n = dmh.bins();
    Fdmh(
        dmh.0
            .iter()
            .enumerate()
            .map(|(b, v)| {
                if runs.iter().any(|r| r.contains(b, n)) {
                    *v
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(alpha: f64, s: usize, phi: f64, bins: usize) -> LmpConfig {
        LmpConfig {
            intensity_alpha: alpha,
            span_s: s,
            smooth_phi: phi,
            bins,
            ..LmpConfig::default()
        }
    }

    #[test]
    fn single_run() {
        let mut v = vec![0.0; 9];
        v[2] = 300.0;
        v[3] = 300.0;
        let runs = coherent_runs(&Dmh(v), &cfg(200.0, 3, 100.0, 9));
        assert_eq!(runs, vec![Run { start: 2, len: 2 }]);
    }

    #[test]
    fn run_wraps_the_seam() {
        let mut v = vec![0.0; 9];
        v[8] = 300.0;
        v[0] = 300.0;
        assert_eq!(runs_above(&v, 200.0), vec![Run { start: 8, len: 2 }]);
        let runs = coherent_runs(&Dmh(v.clone()), &cfg(200.0, 3, 100.0, 9));
        assert_eq!(runs.len(), 1);
        let f = filter_dmh(&Dmh(v), &runs);
        assert_eq!(f.0[8], 300.0);
        assert_eq!(f.0[0], 300.0);
        assert_eq!(f.0[1], 0.0);
    }

    #[test]
    fn long_runs_are_dropped() {
        let mut v = vec![0.0; 9];
        for b in 3..7 {
            v[b] = 500.0;
        }
        assert!(coherent_runs(&Dmh(v), &cfg(200.0, 3, 100.0, 9)).is_empty());
    }

    #[test]
    fn abrupt_steps_are_dropped() {
        // 0.5 * 1000 = 500 tolerance; a 600 step fails, a 400 step passes.
        let mut v = vec![0.0; 9];
        v[1] = 1000.0;
        v[2] = 400.0;
        assert!(coherent_runs(&Dmh(v.clone()), &cfg(200.0, 4, 5.0, 9)).is_empty());
        v[2] = 600.0;
        assert_eq!(coherent_runs(&Dmh(v), &cfg(200.0, 4, 5.0, 9)).len(), 1);
    }

    #[test]
    fn all_bins_above_is_one_run() {
        assert_eq!(runs_above(&[5.0; 6], 1.0), vec![Run { start: 0, len: 6 }]);
        assert!(runs_above(&[0.0; 6], 1.0).is_empty());
    }

    #[test]
    fn filter_support_is_the_union_of_runs() {
        let v = Dmh(vec![300.0, 0.0, 250.0, 260.0, 0.0, 0.0]);
        let runs = vec![Run { start: 0, len: 1 }, Run { start: 2, len: 2 }];
        assert_eq!(
            filter_dmh(&v, &runs).0,
            vec![300.0, 0.0, 250.0, 260.0, 0.0, 0.0]
        );
        assert!(filter_dmh(&v, &[]).is_zero());
        assert_eq!(
            filter_dmh(&v, &runs[1..]).0,
            vec![0.0, 0.0, 250.0, 260.0, 0.0, 0.0]
        );
    }
}
