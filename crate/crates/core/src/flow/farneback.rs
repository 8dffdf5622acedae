//! Two-frame dense optical flow by polynomial expansion (Farnebäck).
//!
//! Each frame is locally approximated by a quadratic polynomial
//! `f(x) ~ x'Ax + b'x + c`, fitted by Gaussian-weighted least squares.
//! A pure translation `d` between the frames gives `b2 = b1 - 2Ad`, so
//! `d` is recovered by solving a 2x2 system averaged over a window.
//! The estimate is refined coarse-to-fine over an image pyramid, warping
//! the second expansion by the running estimate at every iteration.

use serde::{Deserialize, Serialize};

use super::{FlowField, Frame};
use crate::error::{Error, Result};

/// Intensities are scaled to 8-bit range internally so the solver's
/// regularizer has the magnitude it was tuned for.
const INTENSITY_SCALE: f32 = 255.0;
const SOLVE_EPS: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowParams {
    pub levels: usize,
    pub pyr_scale: f64,
    pub window: usize,
    pub iterations: usize,
    pub poly_n: usize,
    pub poly_sigma: f64,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            levels: 3,
            pyr_scale: 0.5,
            window: 15,
            iterations: 3,
            poly_n: 5,
            poly_sigma: 1.1,
        }
    }
}

impl FlowParams {
    fn validate(&self) -> Result<()> {
        if self.levels == 0 || self.iterations == 0 || self.window == 0 || self.poly_n == 0 {
            return Err(Error::InvalidInput(format!(
                "degenerate flow params {self:?}"
            )));
        }
        if !(self.pyr_scale > 0.0 && self.pyr_scale < 1.0) {
            return Err(Error::InvalidInput(format!(
                "pyramid scale {} outside (0, 1)",
                self.pyr_scale
            )));
        }
        if !(self.poly_sigma > 0.0) {
            return Err(Error::InvalidInput("poly sigma must be positive".into()));
        }
        Ok(())
    }
}

/// Single-channel float plane.
#[derive(Clone, Debug)]
struct Plane {
    w: usize,
    h: usize,
    data: Vec<f32>,
}

impl Plane {
    fn new(w: usize, h: usize) -> Self {
        Self {
            w,
            h,
            data: vec![0.0; w * h],
        }
    }

    #[cfg(test)]
    fn at(&self, x: usize, y: usize) -> f32 {
        self.data[y * self.w + x]
    }

    fn sample(&self, x: f64, y: f64) -> f32 {
        super::frame::bilinear(&self.data, self.w, self.h, x, y)
    }

    fn convolve_rows(&self, kernel: &[f32]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let mut out = Plane::new(self.w, self.h);
        let wmax = self.w as isize - 1;
        for y in 0..self.h {
            let row = &self.data[y * self.w..(y + 1) * self.w];
            for x in 0..self.w {
                let mut acc = 0.0;
                for (k, kv) in kernel.iter().enumerate() {
                    let sx = (x as isize + k as isize - r).clamp(0, wmax) as usize;
                    acc += kv * row[sx];
                }
                out.data[y * self.w + x] = acc;
            }
        }
        out
    }

    fn convolve_cols(&self, kernel: &[f32]) -> Plane {
        let r = (kernel.len() / 2) as isize;
        let mut out = Plane::new(self.w, self.h);
        let hmax = self.h as isize - 1;
        for y in 0..self.h {
            for (k, kv) in kernel.iter().enumerate() {
                let sy = (y as isize + k as isize - r).clamp(0, hmax) as usize;
                let src = &self.data[sy * self.w..(sy + 1) * self.w];
                let dst = &mut out.data[y * self.w..(y + 1) * self.w];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += kv * s;
                }
            }
        }
        out
    }

    fn separable(&self, kx: &[f32], ky: &[f32]) -> Plane {
        self.convolve_rows(kx).convolve_cols(ky)
    }
}

fn gaussian_kernel(sigma: f64, radius: usize) -> Vec<f32> {
    let raw: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|v| (v / sum) as f32).collect()
}

/// Per-pixel quadratic coefficients: `c + bx*x + by*y + axx*x^2 + ayy*y^2 + axy*x*y`.
struct Expansion {
    bx: Plane,
    by: Plane,
    axx: Plane,
    ayy: Plane,
    axy: Plane,
}

fn poly_expand(img: &Plane, n: usize, sigma: f64) -> Expansion {
    let taps: Vec<f64> = (-(n as isize)..=n as isize)
        .map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = taps.iter().sum();
    let g: Vec<f64> = taps.iter().map(|v| v / total).collect();
    let offsets: Vec<f64> = (-(n as isize)..=n as isize).map(|t| t as f64).collect();
    let moment = |p: i32| -> Vec<f32> {
        g.iter()
            .zip(&offsets)
            .map(|(w, t)| (w * t.powi(p)) as f32)
            .collect()
    };
    let k0 = moment(0);
    let k1 = moment(1);
    let k2 = moment(2);
    let sum = |p: i32| -> f64 { g.iter().zip(&offsets).map(|(w, t)| w * t.powi(p)).sum() };
    let (s0, s2, s4) = (sum(0), sum(2), sum(4));

    // Row passes; the offset runs along x, hence kernel index order matches.
    let r0 = img.convolve_rows(&k0);
    let r1 = img.convolve_rows(&k1);
    let r2 = img.convolve_rows(&k2);
    let m00 = r0.convolve_cols(&k0);
    let m10 = r1.convolve_cols(&k0);
    let m01 = r0.convolve_cols(&k1);
    let m20 = r2.convolve_cols(&k0);
    let m02 = r0.convolve_cols(&k2);
    let m11 = r1.convolve_cols(&k1);

    // The Gram matrix of {1, x, y, x^2, y^2, xy} under separable Gaussian
    // weights is block diagonal: x, y and xy decouple, {1, x^2, y^2} is 3x3.
    let gram = [
        [s0 * s0, s2 * s0, s0 * s2],
        [s2 * s0, s4 * s0, s2 * s2],
        [s0 * s2, s2 * s2, s0 * s4],
    ];
    let inv = invert3(gram);
    let sx = s2 * s0;
    let sxy = s2 * s2;

    let (w, h) = (img.w, img.h);
    let mut e = Expansion {
        bx: Plane::new(w, h),
        by: Plane::new(w, h),
        axx: Plane::new(w, h),
        ayy: Plane::new(w, h),
        axy: Plane::new(w, h),
    };
    for i in 0..w * h {
        let v = [m00.data[i] as f64, m20.data[i] as f64, m02.data[i] as f64];
        e.axx.data[i] = (inv[1][0] * v[0] + inv[1][1] * v[1] + inv[1][2] * v[2]) as f32;
        e.ayy.data[i] = (inv[2][0] * v[0] + inv[2][1] * v[1] + inv[2][2] * v[2]) as f32;
        e.bx.data[i] = (m10.data[i] as f64 / sx) as f32;
        e.by.data[i] = (m01.data[i] as f64 / sx) as f32;
        e.axy.data[i] = (m11.data[i] as f64 / sxy) as f32;
    }
    e
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut inv = [[0.0; 3]; 3];
    for (r, row) in inv.iter_mut().enumerate() {
        for (c, slot) in row.iter_mut().enumerate() {
            let (r1, r2) = ((c + 1) % 3, (c + 2) % 3);
            let (c1, c2) = ((r + 1) % 3, (r + 2) % 3);
            *slot = (m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]) / det;
        }
    }
    inv
}

/// Builds the windowed normal equations `G d = h` for the current flow estimate.
fn update_matrices(e1: &Expansion, e2: &Expansion, flow: &[Plane; 2]) -> [Plane; 5] {
    let (w, h) = (e1.bx.w, e1.bx.h);
    let mut out = [
        Plane::new(w, h),
        Plane::new(w, h),
        Plane::new(w, h),
        Plane::new(w, h),
        Plane::new(w, h),
    ];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let dx = flow[0].data[i] as f64;
            let dy = flow[1].data[i] as f64;
            let (fx, fy) = (x as f64 + dx, y as f64 + dy);

            let axx = (e1.axx.data[i] + e2.axx.sample(fx, fy)) as f64 * 0.5;
            let ayy = (e1.ayy.data[i] + e2.ayy.sample(fx, fy)) as f64 * 0.5;
            let axy = (e1.axy.data[i] + e2.axy.sample(fx, fy)) as f64 * 0.25;

            let db_x = -0.5 * (e2.bx.sample(fx, fy) - e1.bx.data[i]) as f64 + axx * dx + axy * dy;
            let db_y = -0.5 * (e2.by.sample(fx, fy) - e1.by.data[i]) as f64 + axy * dx + ayy * dy;

            out[0].data[i] = (axx * axx + axy * axy) as f32;
            out[1].data[i] = (axy * (axx + ayy)) as f32;
            out[2].data[i] = (axy * axy + ayy * ayy) as f32;
            out[3].data[i] = (axx * db_x + axy * db_y) as f32;
            out[4].data[i] = (axy * db_x + ayy * db_y) as f32;
        }
    }
    out
}

fn solve_flow(m: &[Plane; 5], window: usize) -> [Plane; 2] {
    let kernel = vec![1.0 / window as f32; window | 1];
    let blurred: Vec<Plane> = m.iter().map(|p| p.separable(&kernel, &kernel)).collect();
    let (w, h) = (m[0].w, m[0].h);
    let mut flow = [Plane::new(w, h), Plane::new(w, h)];
    for i in 0..w * h {
        let g11 = blurred[0].data[i] as f64;
        let g12 = blurred[1].data[i] as f64;
        let g22 = blurred[2].data[i] as f64;
        let h1 = blurred[3].data[i] as f64;
        let h2 = blurred[4].data[i] as f64;
        let idet = 1.0 / (g11 * g22 - g12 * g12 + SOLVE_EPS);
        flow[0].data[i] = ((g22 * h1 - g12 * h2) * idet) as f32;
        flow[1].data[i] = ((g11 * h2 - g12 * h1) * idet) as f32;
    }
    flow
}

/// Separable Gaussian blur with clamped edges.
pub(crate) fn gaussian_blur(data: &[f32], width: usize, height: usize, sigma: f64) -> Vec<f32> {
    let radius = ((sigma * 3.0).ceil() as usize).max(1);
    let k = gaussian_kernel(sigma, radius);
    Plane {
        w: width,
        h: height,
        data: data.to_vec(),
    }
    .separable(&k, &k)
    .data
}

/// Blur then resample the base image to `scale` of its size.
fn pyramid_level(base: &Plane, scale: f64) -> Plane {
    if scale == 1.0 {
        return base.clone();
    }
    let sigma = (1.0 / scale - 1.0) * 0.5;
    let radius = ((sigma * 2.5).round() as usize).max(1);
    let k = gaussian_kernel(sigma, radius);
    let blurred = base.separable(&k, &k);
    let w = ((base.w as f64 * scale).round() as usize).max(1);
    let h = ((base.h as f64 * scale).round() as usize).max(1);
    resample(&blurred, w, h)
}

fn resample(src: &Plane, w: usize, h: usize) -> Plane {
    let sx = src.w as f64 / w as f64;
    let sy = src.h as f64 / h as f64;
    let mut out = Plane::new(w, h);
    for y in 0..h {
        for x in 0..w {
            out.data[y * w + x] =
                src.sample((x as f64 + 0.5) * sx - 0.5, (y as f64 + 0.5) * sy - 0.5);
        }
    }
    out
}

fn upsample_flow(flow: &[Plane; 2], w: usize, h: usize) -> [Plane; 2] {
    let fx = w as f32 / flow[0].w as f32;
    let fy = h as f32 / flow[0].h as f32;
    let mut u = resample(&flow[0], w, h);
    let mut v = resample(&flow[1], w, h);
    u.data.iter_mut().for_each(|d| *d *= fx);
    v.data.iter_mut().for_each(|d| *d *= fy);
    [u, v]
}

/// Dense flow from `prev` to `next`: `next(x + d(x)) ~ prev(x)`.
pub fn compute_flow(prev: &Frame, next: &Frame, params: &FlowParams) -> Result<FlowField> {
    params.validate()?;
    if prev.width() != next.width() || prev.height() != next.height() {
        return Err(Error::InvalidInput(format!(
            "frame sizes differ: {}x{} vs {}x{}",
            prev.width(),
            prev.height(),
            next.width(),
            next.height()
        )));
    }
    let to_plane = |f: &Frame| Plane {
        w: f.width(),
        h: f.height(),
        data: f.pixels().iter().map(|v| v * INTENSITY_SCALE).collect(),
    };
    let base1 = to_plane(prev);
    let base2 = to_plane(next);

    let min_side = (2 * params.poly_n + 1) as f64;
    let shortest = prev.width().min(prev.height()) as f64;
    let mut levels = 1;
    while levels < params.levels && shortest * params.pyr_scale.powi(levels as i32) >= min_side {
        levels += 1;
    }

    let mut flow: Option<[Plane; 2]> = None;
    for level in (0..levels).rev() {
        let scale = params.pyr_scale.powi(level as i32);
        let i1 = pyramid_level(&base1, scale);
        let i2 = pyramid_level(&base2, scale);
        let (w, h) = (i1.w, i1.h);
        let mut current = match flow.take() {
            Some(f) => upsample_flow(&f, w, h),
            None => [Plane::new(w, h), Plane::new(w, h)],
        };
        let e1 = poly_expand(&i1, params.poly_n, params.poly_sigma);
        let e2 = poly_expand(&i2, params.poly_n, params.poly_sigma);
        for _ in 0..params.iterations {
            let m = update_matrices(&e1, &e2, &current);
            current = solve_flow(&m, params.window);
        }
        flow = Some(current);
    }

    let [u, v] = flow.expect("at least one pyramid level");
    let vectors = u.data.iter().zip(&v.data).map(|(a, b)| [*a, *b]).collect();
    FlowField::new(prev.width(), prev.height(), vectors)
        .map_err(|e| Error::Internal(format!("flow solver produced an invalid field: {e}")))
}
