use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the local motion pattern filter.
///
/// Field names in JSON follow the column names used for the per-dataset
/// settings: `intensity_e` is the DMH threshold, `density_m` the bin span
/// limit of a main direction and `variation_v` the adjacent-bin tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmpConfig {
    /// Region side as a fraction of the face size.
    pub lambda_frac: f64,
    /// Fractional overlap of neighbouring regions.
    pub overlap: f64,
    /// Bhattacharyya similarity a neighbour must reach to be accepted.
    pub rho: f64,
    #[serde(rename = "intensity_e")]
    pub intensity_alpha: f64,
    #[serde(rename = "density_m")]
    pub span_s: usize,
    #[serde(rename = "variation_v")]
    pub smooth_phi: f64,
    /// Number of propagation rings around the central region.
    pub beta: usize,
    pub bins: usize,
    #[serde(default = "default_weights")]
    pub weights: [f64; 3],
    #[serde(default = "default_layer_step")]
    pub layer_step: f64,
    #[serde(default = "default_mag_cap")]
    pub mag_cap: f64,
    #[serde(default = "default_min_bin_fraction")]
    pub min_bin_fraction: f64,
    #[serde(default = "default_connectivity")]
    pub connectivity: u8,
}

fn default_weights() -> [f64; 3] {
    [1.0, 10.0, 100.0]
}
fn default_layer_step() -> f64 {
    0.2
}
fn default_mag_cap() -> f64 {
    10.0
}
fn default_min_bin_fraction() -> f64 {
    0.10
}
fn default_connectivity() -> u8 {
    8
}

/// Named settings, one per benchmark dataset.
pub const PRESET_NAMES: [&str; 8] = [
    "casme2", "smic-hs", "smic-vis", "smic-nir", "ck+", "mmi", "casia-vl", "casia-ni",
];

impl Default for LmpConfig {
    fn default() -> Self {
        Self::preset("casme2").expect("built-in preset")
    }
}

impl LmpConfig {
    /// Settings tuned per dataset: (λ %, Δ, ρ, E, M, V, β, B).
    pub fn preset(name: &str) -> Result<Self> {
        let (lambda_pct, overlap, rho, e, m, v, beta, bins) = match name {
            "casme2" => (4.0, 0.5, 0.75, 100.0, 4, 5.0, 6, 9),
            "smic-hs" => (3.0, 0.5, 0.75, 100.0, 3, 5.0, 6, 9),
            "smic-vis" => (5.0, 0.5, 0.75, 100.0, 4, 5.0, 3, 9),
            "smic-nir" => (4.0, 0.5, 0.75, 100.0, 3, 5.0, 3, 12),
            "ck+" => (3.0, 0.5, 1.0, 100.0, 4, 5.0, 3, 12),
            "mmi" => (3.0, 0.5, 1.0, 100.0, 4, 5.0, 6, 12),
            "casia-vl" => (4.0, 0.5, 1.0, 100.0, 5, 5.0, 3, 6),
            "casia-ni" => (5.0, 0.5, 0.75, 100.0, 5, 5.0, 6, 9),
            other => {
                return Err(Error::Config(format!(
                    "unknown preset {other:?}; known: {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Ok(Self {
            lambda_frac: lambda_pct / 100.0,
            overlap,
            rho,
            intensity_alpha: e,
            span_s: m,
            smooth_phi: v,
            beta,
            bins,
            weights: default_weights(),
            layer_step: default_layer_step(),
            mag_cap: default_mag_cap(),
            min_bin_fraction: default_min_bin_fraction(),
            connectivity: default_connectivity(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if !(self.lambda_frac > 0.0 && self.lambda_frac <= 0.10) {
            return fail(format!(
                "lambda_frac {} outside (0, 0.10]",
                self.lambda_frac
            ));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return fail(format!("overlap {} outside [0, 1)", self.overlap));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return fail(format!("rho {} outside [0, 1]", self.rho));
        }
        if !(self.intensity_alpha > 0.0) {
            return fail(format!(
                "intensity_e {} must be positive",
                self.intensity_alpha
            ));
        }
        if !(4..=36).contains(&self.bins) {
            return fail(format!("bins {} outside 4..=36", self.bins));
        }
        if self.span_s < 1 || self.span_s > self.bins {
            return fail(format!(
                "density_m {} outside 1..={}",
                self.span_s, self.bins
            ));
        }
        if !(self.smooth_phi > 0.0) {
            return fail(format!("variation_v {} must be positive", self.smooth_phi));
        }
        let [w1, w2, w3] = self.weights;
        if !(w1 < w2 && w2 < w3) {
            return fail(format!(
                "weights {:?} must be strictly increasing",
                self.weights
            ));
        }
        if !(self.layer_step > 0.0) || !(self.mag_cap > 0.0) || self.layer_step > self.mag_cap {
            return fail(format!(
                "layer_step {} and mag_cap {} must satisfy 0 < step <= cap",
                self.layer_step, self.mag_cap
            ));
        }
        if !(0.0..1.0).contains(&self.min_bin_fraction) {
            return fail(format!(
                "min_bin_fraction {} outside [0, 1)",
                self.min_bin_fraction
            ));
        }
        if self.connectivity != 4 && self.connectivity != 8 {
            return fail(format!("connectivity {} must be 4 or 8", self.connectivity));
        }
        Ok(())
    }

    /// Number of magnitude layers, counting the one that starts at zero.
    pub fn layer_count(&self) -> usize {
        (self.mag_cap / self.layer_step + 1e-9).floor() as usize + 1
    }

    /// Lower magnitude bound of layer `k`.
    pub fn layer_floor(&self, k: usize) -> f64 {
        k as f64 * self.layer_step
    }

    pub fn region_side(&self, face_size: f64) -> f64 {
        self.lambda_frac * face_size
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_validates() {
        for name in PRESET_NAMES {
            let cfg = LmpConfig::preset(name).unwrap();
            cfg.validate().unwrap();
            assert_eq!(cfg.layer_count(), 51);
        }
        assert!(LmpConfig::preset("ckplus").is_err());
    }

    #[test]
    fn casme2_row() {
        let c = LmpConfig::preset("casme2").unwrap();
        assert_eq!(
            (
                c.lambda_frac,
                c.overlap,
                c.rho,
                c.intensity_alpha,
                c.span_s,
                c.smooth_phi,
                c.beta,
                c.bins
            ),
            (0.04, 0.5, 0.75, 100.0, 4, 5.0, 6, 9)
        );
        let c = LmpConfig::preset("casia-vl").unwrap();
        assert_eq!((c.rho, c.span_s, c.beta, c.bins), (1.0, 5, 3, 6));
    }

    #[test]
    fn json_uses_table_keys() {
        let json = LmpConfig::preset("ck+").unwrap().to_json();
        for key in [
            "lambda_frac",
            "overlap",
            "rho",
            "intensity_e",
            "density_m",
            "variation_v",
            "beta",
            "bins",
            "weights",
            "layer_step",
            "mag_cap",
            "min_bin_fraction",
        ] {
            assert!(json.contains(&format!("\"{key}\"")), "missing {key}");
        }
        assert_eq!(
            LmpConfig::from_json(&json).unwrap(),
            LmpConfig::preset("ck+").unwrap()
        );
    }

    #[test]
    fn minimal_json_takes_defaults() {
        let cfg = LmpConfig::from_json(
            r#"{"lambda_frac":0.03,"overlap":0.5,"rho":0.75,"intensity_e":100,
                "density_m":4,"variation_v":5,"beta":2,"bins":12}"#,
        )
        .unwrap();
        assert_eq!(cfg.weights, [1.0, 10.0, 100.0]);
        assert_eq!(cfg.connectivity, 8);
    }

    #[test]
    fn invalid_values_are_rejected() {
        let base = LmpConfig::default();
        let cases: Vec<fn(&mut LmpConfig)> = vec![
            |c| c.lambda_frac = 0.2,
            |c| c.overlap = 1.0,
            |c| c.rho = 1.5,
            |c| c.span_s = 0,
            |c| c.span_s = 40,
            |c| c.bins = 3,
            |c| c.weights = [1.0, 1.0, 100.0],
            |c| c.min_bin_fraction = 1.0,
            |c| c.connectivity = 6,
        ];
        for mutate in cases {
            let mut c = base.clone();
            mutate(&mut c);
            assert!(matches!(c.validate(), Err(Error::Config(_))), "{c:?}");
        }
        assert!(LmpConfig::from_json(r#"{"lambda_frac":0.03}"#).is_err());
    }
}
