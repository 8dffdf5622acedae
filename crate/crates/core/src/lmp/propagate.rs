//! Coherency analysis of a single region and ring-by-ring propagation from
//! an epicenter.

use super::{
    bhattacharyya, build_layers, coherent_runs, cumulative_triple, filter_dmh, weighted_dmh, Fdmh,
    LmpConfig,
};
use crate::error::{Error, Result};
use crate::flow::{sample_region, FlowField, SquareRegion};

/// Slack on the similarity gate so that identical distributions pass `rho = 1`.
pub const SIMILARITY_EPS: f64 = 1e-9;

/// Runs one region through the full coherency filter. `Ok(None)` means the
/// region is locally incoherent (no moving pixels or no main direction).
pub fn analyze_region(
    flow: &FlowField,
    region: &SquareRegion,
    cfg: &LmpConfig,
) -> Result<Option<Fdmh>> {
    let hist = sample_region(flow, region, cfg.bins, cfg.mag_cap).map_err(|e| match e {
        Error::EmptyRegion(msg) => Error::Geometry(msg),
        other => other,
    })?;
    if hist.is_empty() {
        return Ok(None);
    }
    let bank = build_layers(&hist, cfg)?;
    let dmh = weighted_dmh(&cumulative_triple(&bank), cfg.weights);
    let runs = coherent_runs(&dmh, cfg);
    if runs.is_empty() {
        return Ok(None);
    }
    Ok(Some(filter_dmh(&dmh, &runs)))
}

/// Upper bound on the number of regions a pattern can collect.
pub fn max_regions(beta: usize, connectivity: usize) -> usize {
    if beta >= 1 {
        1 + connectivity * beta * (beta + 1) / 2
    } else {
        1
    }
}

/// Grid offsets `(gx, gy)` of ring `ring`, row-major.
pub fn ring_offsets(ring: usize, connectivity: u8) -> Vec<(i64, i64)> {
    let r = ring as i64;
    let mut out = Vec::new();
    for gy in -r..=r {
        for gx in -r..=r {
            let dist = match connectivity {
                4 => gx.abs() + gy.abs(),
                _ => gx.abs().max(gy.abs()),
            };
            if dist == r {
                out.push((gx, gy));
            }
        }
    }
    out
}

fn adjacent(a: (i64, i64), b: (i64, i64), connectivity: u8) -> bool {
    let (dx, dy) = ((a.0 - b.0).abs(), (a.1 - b.1).abs());
    match connectivity {
        4 => dx + dy == 1,
        _ => dx.max(dy) == 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AcceptedRegion {
    /// Grid offset from the central region in units of the center spacing.
    pub grid: (i64, i64),
    pub center: (f64, f64),
    pub ring: usize,
    pub fdmh: Fdmh,
}

/// Output of one local motion pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct LmpDistribution {
    pub epicenter: (f64, f64),
    /// Element-wise sum of the filtered histograms of all accepted regions.
    pub distribution: Vec<f64>,
    pub region_count: usize,
    pub coherent: bool,
    pub regions: Vec<AcceptedRegion>,
}

impl LmpDistribution {
    fn incoherent(epicenter: (f64, f64), bins: usize) -> Self {
        Self {
            epicenter,
            distribution: vec![0.0; bins],
            region_count: 0,
            coherent: false,
            regions: Vec::new(),
        }
    }

    /// Sum over the accepted regions selected by `keep`.
    pub fn distribution_where(&self, keep: impl Fn(&AcceptedRegion) -> bool) -> Vec<f64> {
        let mut out = vec![0.0; self.distribution.len()];
        for r in self.regions.iter().filter(|r| keep(r)) {
            for (o, v) in out.iter_mut().zip(&r.fdmh.0) {
                *o += v;
            }
        }
        out
    }
}

/// Grows a local motion pattern from `epicenter`. Regions have side
/// `lambda_frac * face_size` and sit on a grid of spacing
/// `side * (1 - overlap)`. Ring `i` is evaluated only after ring `i - 1`;
/// each candidate is compared against its nearest accepted neighbour in the
/// previous ring and is skipped when there is none.
pub fn propagate(
    flow: &FlowField,
    epicenter: (f64, f64),
    face_size: f64,
    cfg: &LmpConfig,
) -> Result<LmpDistribution> {
    let (ex, ey) = epicenter;
    if !(ex >= 0.0 && ey >= 0.0 && ex < flow.width() as f64 && ey < flow.height() as f64) {
        return Err(Error::Geometry(format!(
            "epicenter ({ex:.1}, {ey:.1}) outside the {}x{} field",
            flow.width(),
            flow.height()
        )));
    }
    let side = cfg.region_side(face_size);
    if !(side >= 1.0) {
        return Err(Error::Geometry(format!(
            "region side {side:.3} px is below one pixel (face size {face_size:.1})"
        )));
    }
    let spacing = side * (1.0 - cfg.overlap);
    let center_of = |g: (i64, i64)| (ex + g.0 as f64 * spacing, ey + g.1 as f64 * spacing);

    let Some(central) = analyze_region(flow, &SquareRegion::new(ex, ey, side), cfg)? else {
        return Ok(LmpDistribution::incoherent(epicenter, cfg.bins));
    };
    let mut accepted = vec![AcceptedRegion {
        grid: (0, 0),
        center: epicenter,
        ring: 0,
        fdmh: central,
    }];
    let mut previous: Vec<usize> = vec![0];
    let grid_width = 2 * cfg.beta as i64 + 1;
    let row_major = |g: (i64, i64)| (g.1 + cfg.beta as i64) * grid_width + g.0 + cfg.beta as i64;

    for ring in 1..=cfg.beta {
        if previous.is_empty() {
            break;
        }
        let mut current = Vec::new();
        for g in ring_offsets(ring, cfg.connectivity) {
            let parent = previous
                .iter()
                .filter(|&&p| adjacent(accepted[p].grid, g, cfg.connectivity))
                .min_by(|&&a, &&b| {
                    let d = |p: usize| {
                        let pg = accepted[p].grid;
                        ((pg.0 - g.0).pow(2) + (pg.1 - g.1).pow(2)) as f64
                    };
                    d(a).total_cmp(&d(b))
                        .then(row_major(accepted[a].grid).cmp(&row_major(accepted[b].grid)))
                })
                .copied();
            let Some(parent) = parent else { continue };
            let center = center_of(g);
            let fdmh = match analyze_region(flow, &SquareRegion::new(center.0, center.1, side), cfg)
            {
                Ok(Some(f)) => f,
                Ok(None) | Err(Error::Geometry(_)) => continue,
                Err(e) => return Err(e),
            };
            if bhattacharyya(&fdmh, &accepted[parent].fdmh) + SIMILARITY_EPS < cfg.rho {
                continue;
            }
            current.push(AcceptedRegion {
                grid: g,
                center,
                ring,
                fdmh,
            });
        }
        previous = (accepted.len()..accepted.len() + current.len()).collect();
        accepted.extend(current);
    }

    let mut distribution = vec![0.0; cfg.bins];
    for r in &accepted {
        for (d, v) in distribution.iter_mut().zip(&r.fdmh.0) {
            *d += v;
        }
    }
    Ok(LmpDistribution {
        epicenter,
        distribution,
        region_count: accepted.len(),
        coherent: true,
        regions: accepted,
    })
}
