//! Magnitude layering of a region histogram and the directional and
//! magnified histogram (DMH) built from it.

use super::LmpConfig;
use crate::error::{Error, Result};
use crate::flow::RegionHistogram;

/// Samples sitting within this distance below a layer floor still belong to it.
pub const LAYER_EPS: f64 = 1e-9;
const SHARE_EPS: f64 = 1e-12;

/// Index of the magnitude band (lower, middle, upper third of `[0, cap]`).
pub fn magnitude_band(magnitude: f64, cap: f64) -> usize {
    if 3.0 * magnitude <= cap {
        0
    } else if 3.0 * magnitude <= 2.0 * cap {
        1
    } else {
        2
    }
}

/// Samples whose magnitude lies in `[floor, cap]`, reduced per bin.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub floor: f64,
    /// Sum of sample magnitudes per bin before normalization.
    pub raw_mass: Vec<f64>,
    /// Normalized per-bin share; bins under the minimum fraction are zero.
    pub shares: Vec<f64>,
    /// Whether the bin holds a sample from each magnitude band.
    pub bands: Vec<[bool; 3]>,
}

impl Layer {
    pub fn is_empty(&self) -> bool {
        self.raw_mass.iter().all(|m| *m == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayerBank {
    bins: usize,
    layers: Vec<Layer>,
}

impl LayerBank {
    pub fn bins(&self) -> usize {
        self.bins
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

pub fn build_layers(hist: &RegionHistogram, cfg: &LmpConfig) -> Result<LayerBank> {
    if hist.is_empty() {
        return Err(Error::InvalidInput(
            "cannot layer an empty region histogram".into(),
        ));
    }
    let bins = hist.bins();
    let q = cfg.layer_count();

    // A sample of magnitude m belongs to layers 0..=top(m); accumulate at its
    // top layer and suffix-sum downwards.
    let mut mass = vec![vec![0.0; bins]; q];
    let mut band_count = vec![vec![[0u32; 3]; bins]; q];
    for s in hist.samples() {
        let top = ((s.magnitude + LAYER_EPS) / cfg.layer_step).floor() as usize;
        let top = top.min(q - 1);
        // Guard against the quotient rounding above the true layer floor.
        let top = if cfg.layer_floor(top) > s.magnitude + LAYER_EPS {
            top - 1
        } else {
            top
        };
        mass[top][s.bin] += s.magnitude;
        band_count[top][s.bin][magnitude_band(s.magnitude, cfg.mag_cap)] += 1;
    }
    for k in (0..q - 1).rev() {
        for b in 0..bins {
            mass[k][b] += mass[k + 1][b];
            for p in 0..3 {
                band_count[k][b][p] += band_count[k + 1][b][p];
            }
        }
    }

    let layers = mass
        .into_iter()
        .zip(band_count)
        .enumerate()
        .map(|(k, (raw_mass, counts))| {
            let total: f64 = raw_mass.iter().sum();
            let shares = raw_mass
                .iter()
                .map(|m| {
                    if total <= 0.0 {
                        return 0.0;
                    }
                    let share = m / total;
                    if share + SHARE_EPS >= cfg.min_bin_fraction && share > 0.0 {
                        share
                    } else {
                        0.0
                    }
                })
                .collect();
            Layer {
                floor: cfg.layer_floor(k),
                raw_mass,
                shares,
                bands: counts
                    .iter()
                    .map(|c| [c[0] > 0, c[1] > 0, c[2] > 0])
                    .collect(),
            }
        })
        .collect();
    Ok(LayerBank { bins, layers })
}

/// Per-band layer counts: entry `[p][bin]` is the number of layers in which
/// `bin` survives filtering and holds a sample from magnitude band `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerTriple(pub [Vec<u32>; 3]);

pub fn cumulative_triple(bank: &LayerBank) -> LayerTriple {
    let mut ml = [
        vec![0u32; bank.bins],
        vec![0u32; bank.bins],
        vec![0u32; bank.bins],
    ];
    for layer in &bank.layers {
        for b in 0..bank.bins {
            if layer.shares[b] > 0.0 {
                for (p, counts) in ml.iter_mut().enumerate() {
                    if layer.bands[b][p] {
                        counts[b] += 1;
                    }
                }
            }
        }
    }
    LayerTriple(ml)
}

/// Directional and magnified histogram.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmh(pub Vec<f64>);

impl Dmh {
    pub fn bins(&self) -> usize {
        self.0.len()
    }
}

pub fn weighted_dmh(ml: &LayerTriple, weights: [f64; 3]) -> Dmh {
    let bins = ml.0[0].len();
    Dmh((0..bins)
        .map(|b| (0..3).map(|p| ml.0[p][b] as f64 * weights[p]).sum())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::MotionSample;

    fn hist(bins: usize, samples: &[(usize, f64)]) -> RegionHistogram {
        RegionHistogram::new(
            bins,
            samples
                .iter()
                .map(|&(bin, magnitude)| MotionSample { bin, magnitude })
                .collect(),
        )
        .unwrap()
    }

    fn cfg() -> LmpConfig {
        LmpConfig::default()
    }

    #[test]
    fn single_direction_single_magnitude() {
        let h = hist(9, &vec![(2, 1.0); 100]);
        let bank = build_layers(&h, &cfg()).unwrap();
        assert_eq!(bank.layers().len(), 51);
        for (k, layer) in bank.layers().iter().enumerate() {
            if k <= 5 {
                assert_eq!(layer.shares[2], 1.0, "layer {k}");
            } else {
                assert!(layer.is_empty(), "layer {k}");
                assert!(layer.shares.iter().all(|s| *s == 0.0));
            }
        }
    }

    #[test]
    fn ten_percent_filter_keeps_threshold() {
        let mut s = vec![(2, 1.0); 90];
        s.extend(vec![(5, 1.0); 10]);
        let bank = build_layers(&hist(9, &s), &cfg()).unwrap();
        assert_eq!(bank.layers()[0].shares[5], 0.1);

        let mut s = vec![(2, 1.0); 90];
        s.extend(vec![(5, 1.0); 9]);
        let bank = build_layers(&hist(9, &s), &cfg()).unwrap();
        assert_eq!(bank.layers()[0].shares[5], 0.0);
        assert!((bank.layers()[0].raw_mass[5] - 9.0).abs() < 1e-12);
    }

    #[test]
    fn layers_shed_low_magnitudes() {
        let bank = build_layers(&hist(9, &[(1, 0.1), (4, 5.0), (7, 9.9)]), &cfg()).unwrap();
        let nonzero = |k: usize| {
            bank.layers()[k]
                .raw_mass
                .iter()
                .filter(|m| **m > 0.0)
                .count()
        };
        assert_eq!(nonzero(0), 3);
        assert_eq!(nonzero(25), 2); // n = 5.0
        assert_eq!(nonzero(49), 1); // n = 9.8
                                    // Shares at n = 0: 0.1/15 is filtered, 5/15 and 9.9/15 survive.
        let l0 = &bank.layers()[0];
        assert_eq!(l0.shares[1], 0.0);
        assert!((l0.shares[4] - 5.0 / 15.0).abs() < 1e-12);
        assert!((l0.shares[7] - 9.9 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn empty_histogram_is_rejected() {
        assert!(matches!(
            build_layers(&hist(9, &[]), &cfg()),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn triple_counts_layers_per_band() {
        let bank = build_layers(&hist(9, &vec![(2, 1.0); 100]), &cfg()).unwrap();
        let ml = cumulative_triple(&bank);
        assert_eq!(ml.0[0][2], 6);
        assert_eq!(ml.0[1][2], 0);
        assert_eq!(ml.0[2][2], 0);

        let bank = build_layers(&hist(9, &vec![(0, 9.0); 30]), &cfg()).unwrap();
        let ml = cumulative_triple(&bank);
        assert_eq!(ml.0[2][0], 46);
        assert_eq!(ml.0[0][0] + ml.0[1][0], 0);
    }

    #[test]
    fn triple_of_an_empty_bank_is_zero() {
        let bank = LayerBank {
            bins: 9,
            layers: vec![],
        };
        assert_eq!(
            cumulative_triple(&bank),
            LayerTriple([vec![0; 9], vec![0; 9], vec![0; 9]])
        );
    }

    #[test]
    fn dmh_is_a_weighted_sum() {
        let w = [1.0, 10.0, 100.0];
        let ml = LayerTriple([vec![0, 0, 3], vec![0, 0, 1], vec![0, 0, 0]]);
        assert_eq!(weighted_dmh(&ml, w).0, vec![0.0, 0.0, 13.0]);
        let ml = LayerTriple([vec![0, 0], vec![0, 0], vec![46, 0]]);
        assert_eq!(weighted_dmh(&ml, w).0, vec![4600.0, 0.0]);
        let ml = LayerTriple([vec![0; 4], vec![0; 4], vec![0; 4]]);
        assert_eq!(weighted_dmh(&ml, w).0, vec![0.0; 4]);
    }

    #[test]
    fn dmh_is_bounded_by_layer_count() {
        let c = cfg();
        let samples: Vec<(usize, f64)> = (0..200)
            .map(|i| (i % 9, (i as f64 * 0.37) % 10.0 + 0.01))
            .collect();
        let bank = build_layers(&hist(9, &samples), &c).unwrap();
        let dmh = weighted_dmh(&cumulative_triple(&bank), c.weights);
        let bound = c.layer_count() as f64 * c.weights.iter().sum::<f64>();
        assert!(dmh.0.iter().all(|v| *v <= bound));
    }
}
