use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::StateModel;
use crate::error::{Error, Result};
use crate::numkernel::{smallest_singular_value, ComplexMatrix};

/// `10^-1, 10^-0.5, 10^0, 10^0.3`.
pub const DEFAULT_EPSILONS: [f64; 4] = [0.1, 0.316_227_766_016_837_94, 1.0, 1.995_262_314_968_879_5];

/// Rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    /// Square of half-width `w0 (max alpha + 1)` centred at the origin.
    pub fn around(model: &StateModel) -> Self {
        let top = model.spec.alpha().iter().copied().max().unwrap_or(0);
        let r = model.omega0 * (f64::from(top) + 1.0);
        Self {
            re_min: -r,
            re_max: r,
            im_min: -r,
            im_max: r,
        }
    }
}

/// Line segments of one level set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub epsilon: f64,
    pub segments: Vec<[[f64; 2]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudospectrumGrid {
    pub window: Window,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    /// `sigma_min(z I - A0)`, row-major with the imaginary axis outer.
    pub sigma_min: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub contours: Vec<Contour>,
}

impl PseudospectrumGrid {
    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.sigma_min[iy * self.re.len() + ix]
    }

    pub fn len(&self) -> usize {
        self.sigma_min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_min.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.sigma_min.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.sigma_min.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Fraction of grid points inside the `epsilon`-pseudospectrum.
    pub fn area_fraction(&self, epsilon: f64) -> f64 {
        self.sigma_min.iter().filter(|&&s| s <= epsilon).count() as f64 / self.len().max(1) as f64
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re", "im", "sigma_min"])?;
        for (iy, y) in self.im.iter().enumerate() {
            for (ix, x) in self.re.iter().enumerate() {
                w.write_record([format!("{x:.10e}"), format!("{y:.10e}"), format!("{:.10e}", self.value(ix, iy))])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// `sigma_min(z I - A0)`.
pub fn sigma_min_at(model: &StateModel, z: Complex64) -> Result<f64> {
    let d = model.dim();
    let m = ComplexMatrix::from_fn(d, d, |i, j| {
        let a = Complex64::new(-model.a0[(i, j)], 0.0);
        if i == j {
            a + z
        } else {
            a
        }
    });
    smallest_singular_value(&m)
}

fn axis(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| if i + 1 == count { hi } else { lo + (hi - lo) * i as f64 / (count - 1) as f64 })
        .collect()
}

/// Evaluates `sigma_min(z I - A0)` on a `resolution.0 x resolution.1` grid and
/// extracts contours at each `epsilon`.
pub fn pseudospectrum(
    model: &StateModel,
    window: Window,
    resolution: (usize, usize),
    epsilons: &[f64],
) -> Result<PseudospectrumGrid> {
    let (nx, ny) = resolution;
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidArgument("resolution must be at least 2 per axis".into()));
    }
    if !(window.re_min < window.re_max && window.im_min < window.im_max) {
        return Err(Error::InvalidArgument("empty window".into()));
    }
    let re = axis(window.re_min, window.re_max, nx);
    let im = axis(window.im_min, window.im_max, ny);
    let sigma_min = (0..nx * ny)
        .into_par_iter()
        .map(|p| sigma_min_at(model, Complex64::new(re[p % nx], im[p / nx])))
        .collect::<Result<Vec<_>>>()?;
    let mut grid = PseudospectrumGrid {
        window,
        re,
        im,
        sigma_min,
        epsilons: epsilons.to_vec(),
        contours: Vec::new(),
    };
    grid.contours = epsilons.iter().map(|&e| marching_squares(&grid, e)).collect();
    Ok(grid)
}

fn marching_squares(g: &PseudospectrumGrid, level: f64) -> Contour {
    let (nx, ny) = (g.re.len(), g.im.len());
    let mut segments = Vec::new();
    let lerp = |p: [f64; 2], q: [f64; 2], a: f64, b: f64| {
        let t = if b != a { (level - a) / (b - a) } else { 0.5 };
        [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]
    };
    for iy in 0..ny - 1 {
        for ix in 0..nx - 1 {
            // corners counter-clockwise from bottom-left
            let pts = [
                [g.re[ix], g.im[iy]],
                [g.re[ix + 1], g.im[iy]],
                [g.re[ix + 1], g.im[iy + 1]],
                [g.re[ix], g.im[iy + 1]],
            ];
            let val = [g.value(ix, iy), g.value(ix + 1, iy), g.value(ix + 1, iy + 1), g.value(ix, iy + 1)];
            let crossings: Vec<[f64; 2]> = (0..4)
                .filter_map(|e| {
                    let (a, b) = (e, (e + 1) % 4);
                    ((val[a] <= level) != (val[b] <= level)).then(|| lerp(pts[a], pts[b], val[a], val[b]))
                })
                .collect();
            match crossings.len() {
                2 => segments.push([crossings[0], crossings[1]]),
                4 => {
                    segments.push([crossings[0], crossings[1]]);
                    segments.push([crossings[2], crossings[3]]);
                }
                _ => {}
            }
        }
    }
    Contour { epsilon: level, segments }
}
