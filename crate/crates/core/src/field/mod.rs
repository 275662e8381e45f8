//! Uniform Cartesian grids and the scalar and vector fields sampled on them.
//!
//! A [`Grid2D`] covers a square containing two discs centered at the
//! origin: the support disc of radius `r1` and the data disc of radius `r2`.
//! Samples are stored row-major, `index = iy * nx + ix`.

mod helmholtz;
mod ops;
mod phantom;

pub use helmholtz::{helmholtz_decompose, HelmholtzParts};
pub use ops::{
    curl, directional_derivative, divergence, gradient, laplacian, laplacians_from_div_curl,
    partial_x, partial_y, second_directional_derivative,
};
pub use phantom::{make_phantom, Bump, Phantom, PhantomFields, PhantomKind, Projection};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{disc_chord, Direction, Vec2};

/// Minimum samples per axis.
pub const MIN_SAMPLES: usize = 16;

/// Nodes outside the data disc kept around it so bilinear lookups on its
/// boundary only touch computed samples.
const DATA_MARGIN_CELLS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    /// Coordinates of sample (0, 0).
    pub origin: Vec2,
    /// Radius of the support disc D1.
    pub r1: f64,
    /// Radius of the data disc D2.
    pub r2: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, h: f64, origin: Vec2, r1: f64, r2: f64) -> Result<Self> {
        if nx < MIN_SAMPLES || ny < MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_SAMPLES} samples per axis, got {nx}x{ny}"
            )));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if !(r1.is_finite() && r1 > 0.0 && r2.is_finite() && r2 > r1) {
            return Err(Error::InvalidGrid(format!("need 0 < r1 < r2, got r1={r1}, r2={r2}")));
        }
        let g = Grid2D { nx, ny, h, origin, r1, r2 };
        let (lo, hi) = (g.point(0, 0), g.point(nx - 1, ny - 1));
        let tol = 1e-12 * r2;
        if lo.x > -r2 + tol || lo.y > -r2 + tol || hi.x < r2 - tol || hi.y < r2 - tol {
            return Err(Error::InvalidGrid(format!(
                "grid [{}, {}]x[{}, {}] does not contain the disc of radius {r2}",
                lo.x, hi.x, lo.y, hi.y
            )));
        }
        Ok(g)
    }

    /// Square `n x n` grid with a node at the origin (index `n / 2`) whose
    /// data disc is the smallest one for which a vertex outside it sends at
    /// most one of the given rays through the support disc.
    pub fn for_rays(n: usize, r1: f64, rays: &[Direction]) -> Result<Self> {
        if n < MIN_SAMPLES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_SAMPLES} samples per axis, got {n}"
            )));
        }
        let target = required_data_radius(r1, rays)?;
        let c = n / 2;
        // (n - 1 - c) * h = target + 5h leaves room for the data margin
        let h = target / (c as f64 - 6.0).max(1.0);
        let r2 = target.max(r1 + 2.0 * h);
        let origin = Vec2::new(-(c as f64) * h, -(c as f64) * h);
        Grid2D::new(n, n, h, origin, r1, r2)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, idx: usize) -> (usize, usize) {
        (idx % self.nx, idx / self.nx)
    }

    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + ix as f64 * self.h,
            self.origin.y + iy as f64 * self.h,
        )
    }

    pub fn point_at(&self, idx: usize) -> Vec2 {
        let (ix, iy) = self.coords(idx);
        self.point(ix, iy)
    }

    /// Radius up to which transform data are computed: D2 plus a thin ring.
    pub fn data_radius(&self) -> f64 {
        self.r2 + DATA_MARGIN_CELLS * self.h
    }

    /// Fails if a vertex outside D2 could send two of `rays` through D1.
    pub fn check_rays(&self, rays: &[Direction]) -> Result<()> {
        let need = required_data_radius(self.r1, rays)?;
        if self.r2 < need * (1.0 - 1e-12) {
            return Err(Error::SupportRadius { have: self.r2, need });
        }
        Ok(())
    }

    /// Index of the node nearest to `p`, if `p` lies inside the grid box.
    pub fn nearest(&self, p: Vec2) -> Option<(usize, usize)> {
        let fx = ((p.x - self.origin.x) / self.h).round();
        let fy = ((p.y - self.origin.y) / self.h).round();
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }
}

/// `r1 / sin(theta / 2)` for the smallest angle `theta` between two rays:
/// beyond this radius no vertex has two rays crossing the support disc.
pub fn required_data_radius(r1: f64, rays: &[Direction]) -> Result<f64> {
    let mut min_half_sin = 1.0f64;
    for (i, a) in rays.iter().enumerate() {
        for b in &rays[i + 1..] {
            let cos = a.dot(b.vec()).clamp(-1.0, 1.0);
            // sin(theta/2) = sqrt((1 - cos theta) / 2)
            let s = ((1.0 - cos) / 2.0).sqrt();
            if s < 1e-8 {
                return Err(Error::DegenerateGeometry { det: s });
            }
            min_half_sin = min_half_sin.min(s);
        }
    }
    Ok(r1 / min_half_sin)
}

/// Something that can be evaluated anywhere in the plane and whose
/// restriction to a line is supported on a known interval.
pub trait PlanarFunction: Sync {
    fn value(&self, p: Vec2) -> f64;

    /// Interval of `t` outside of which `value(p + t d)` vanishes, or `None`
    /// if it vanishes on the whole line. `d` is a unit vector.
    fn line_window(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)>;
}

/// Closed-form function supported in the closed disc of radius `radius`.
pub struct Analytic<F> {
    pub f: F,
    pub radius: f64,
}

impl<F: Fn(Vec2) -> f64 + Sync> PlanarFunction for Analytic<F> {
    fn value(&self, p: Vec2) -> f64 {
        (self.f)(p)
    }

    fn line_window(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        disc_chord(p, d, self.radius)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
    /// Radius beyond which the bilinear interpolant vanishes.
    reach: f64,
}

impl ScalarField {
    pub fn zeros(grid: Grid2D) -> Self {
        ScalarField { grid, values: vec![0.0; grid.len()], reach: 0.0 }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            let p = grid.point_at(bad);
            return Err(Error::InvalidGrid(format!("non-finite sample at ({}, {})", p.x, p.y)));
        }
        Ok(Self::from_values_unchecked(grid, values))
    }

    pub(crate) fn from_values_unchecked(grid: Grid2D, values: Vec<f64>) -> Self {
        let mut reach_sq = -1.0f64;
        for (idx, v) in values.iter().enumerate() {
            if *v != 0.0 {
                reach_sq = reach_sq.max(grid.point_at(idx).norm_sq());
            }
        }
        let reach = if reach_sq < 0.0 {
            0.0
        } else {
            reach_sq.sqrt() + 1.5 * grid.h
        };
        ScalarField { grid, values, reach }
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(Vec2) -> f64 + Sync>(grid: Grid2D, f: F) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point_at(i)))
            .collect();
        Self::from_values_unchecked(grid, values)
    }

    /// Samples `f` at nodes within `radius` of the origin, zero elsewhere.
    pub fn from_fn_within<F: Fn(Vec2) -> f64 + Sync>(grid: Grid2D, radius: f64, f: F) -> Self {
        let r2 = radius * radius;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.point_at(i);
                if p.norm_sq() <= r2 {
                    f(p)
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_values_unchecked(grid, values)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.values[self.grid.index(ix, iy)]
    }

    /// Bilinear interpolation; zero outside the grid box.
    pub fn bilinear(&self, p: Vec2) -> f64 {
        let g = &self.grid;
        let fx = (p.x - g.origin.x) / g.h;
        let fy = (p.y - g.origin.y) / g.h;
        if !(fx >= 0.0 && fy >= 0.0) {
            return 0.0;
        }
        let ix = fx.floor() as usize;
        let iy = fy.floor() as usize;
        if ix + 1 >= g.nx || iy + 1 >= g.ny {
            // exactly on the last row/column
            if ix < g.nx && iy < g.ny && fx == ix as f64 && fy == iy as f64 {
                return self.at(ix, iy);
            }
            return 0.0;
        }
        let a = fx - ix as f64;
        let b = fy - iy as f64;
        let k = g.index(ix, iy);
        let v00 = self.values[k];
        let v10 = self.values[k + 1];
        let v01 = self.values[k + g.nx];
        let v11 = self.values[k + g.nx + 1];
        (1.0 - b) * ((1.0 - a) * v00 + a * v10) + b * ((1.0 - a) * v01 + a * v11)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Applies `op` samplewise.
    pub fn map(&self, op: impl Fn(f64) -> f64) -> ScalarField {
        let values = self.values.iter().map(|&v| op(v)).collect();
        Self::from_values_unchecked(self.grid, values)
    }

    pub fn scaled(&self, a: f64) -> ScalarField {
        self.map(|v| a * v)
    }

    pub fn zip_with(&self, other: &ScalarField, op: impl Fn(f64, f64) -> f64) -> Result<ScalarField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| op(a, b))
            .collect();
        Ok(Self::from_values_unchecked(self.grid, values))
    }

    /// Zeroes every sample with `|x| >= radius`.
    pub fn masked_to_disc(&self, radius: f64) -> ScalarField {
        let r2 = radius * radius;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.grid.point_at(i).norm_sq() < r2 { v } else { 0.0 })
            .collect();
        Self::from_values_unchecked(self.grid, values)
    }

    /// True if every sample at `|x| >= r1` is negligible relative to the
    /// field's max-norm.
    pub fn vanishes_outside_support(&self) -> bool {
        let tol = 1e-12 * self.max_abs();
        let r1sq = self.grid.r1 * self.grid.r1;
        self.values
            .iter()
            .enumerate()
            .all(|(i, v)| self.grid.point_at(i).norm_sq() < r1sq || v.abs() <= tol)
    }

    /// Radius outside of which the interpolant is identically zero.
    pub fn reach(&self) -> f64 {
        self.reach
    }
}

/// Keys cubic convolution weights (`a = -1/2`) for offsets `-1, 0, 1, 2`
/// at fractional position `s` in `[0, 1)`.
#[inline]
fn keys_weights(s: f64) -> [f64; 4] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        0.5 * (-s3 + 2.0 * s2 - s),
        0.5 * (3.0 * s3 - 5.0 * s2 + 2.0),
        0.5 * (-3.0 * s3 + 4.0 * s2 + s),
        0.5 * (s3 - s2),
    ]
}

impl ScalarField {
    /// Cubic convolution interpolation, exact for quadratics; falls back to
    /// bilinear within one cell of the grid border.
    pub fn bicubic(&self, p: Vec2) -> f64 {
        let g = &self.grid;
        let fx = (p.x - g.origin.x) / g.h;
        let fy = (p.y - g.origin.y) / g.h;
        if !(fx >= 1.0 && fy >= 1.0 && fx < (g.nx - 2) as f64 && fy < (g.ny - 2) as f64) {
            return self.bilinear(p);
        }
        let (ix, iy) = (fx.floor() as usize, fy.floor() as usize);
        let wx = keys_weights(fx - ix as f64);
        let wy = keys_weights(fy - iy as f64);
        let mut acc = 0.0;
        for (j, wyj) in wy.iter().enumerate() {
            let row = (iy + j - 1) * g.nx + ix - 1;
            let r = &self.values[row..row + 4];
            acc += wyj * (wx[0] * r[0] + wx[1] * r[1] + wx[2] * r[2] + wx[3] * r[3]);
        }
        acc
    }
}

/// A [`ScalarField`] sampled by cubic convolution.
#[derive(Debug, Clone, Copy)]
pub struct Cubic<'a>(pub &'a ScalarField);

impl PlanarFunction for Cubic<'_> {
    fn value(&self, p: Vec2) -> f64 {
        self.0.bicubic(p)
    }

    fn line_window(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        if self.0.reach == 0.0 {
            return None;
        }
        disc_chord(p, d, self.0.reach + self.0.grid.h)
    }
}

impl PlanarFunction for ScalarField {
    fn value(&self, p: Vec2) -> f64 {
        self.bilinear(p)
    }

    fn line_window(&self, p: Vec2, d: Vec2) -> Option<(f64, f64)> {
        if self.reach == 0.0 {
            return None;
        }
        disc_chord(p, d, self.reach)
    }
}

/// A planar vector field `(f1, f2)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub f1: ScalarField,
    pub f2: ScalarField,
}

impl VectorField {
    pub fn new(f1: ScalarField, f2: ScalarField) -> Result<Self> {
        if f1.grid() != f2.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField { f1, f2 })
    }

    pub fn zeros(grid: Grid2D) -> Self {
        VectorField { f1: ScalarField::zeros(grid), f2: ScalarField::zeros(grid) }
    }

    pub fn from_fn<F: Fn(Vec2) -> Vec2 + Sync>(grid: Grid2D, f: F) -> Self {
        let pairs: Vec<Vec2> = (0..grid.len())
            .into_par_iter()
            .map(|i| f(grid.point_at(i)))
            .collect();
        let f1 = pairs.iter().map(|v| v.x).collect();
        let f2 = pairs.iter().map(|v| v.y).collect();
        VectorField {
            f1: ScalarField::from_values_unchecked(grid, f1),
            f2: ScalarField::from_values_unchecked(grid, f2),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        self.f1.grid()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        match i {
            0 => &self.f1,
            1 => &self.f2,
            _ => panic!("vector field has two components, asked for {i}"),
        }
    }

    /// `f . d` as a scalar field.
    pub fn dot(&self, d: Vec2) -> ScalarField {
        let values = self
            .f1
            .values()
            .iter()
            .zip(self.f2.values())
            .map(|(&a, &b)| a * d.x + b * d.y)
            .collect();
        ScalarField::from_values_unchecked(*self.grid(), values)
    }

    /// The samplewise quarter turn `(-f2, f1)`.
    pub fn perp(&self) -> VectorField {
        VectorField { f1: self.f2.scaled(-1.0), f2: self.f1.clone() }
    }

    pub fn scaled(&self, a: f64) -> VectorField {
        VectorField { f1: self.f1.scaled(a), f2: self.f2.scaled(a) }
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        Ok(VectorField {
            f1: self.f1.zip_with(&other.f1, |a, b| a + b)?,
            f2: self.f2.zip_with(&other.f2, |a, b| a + b)?,
        })
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        Ok(VectorField {
            f1: self.f1.zip_with(&other.f1, |a, b| a - b)?,
            f2: self.f2.zip_with(&other.f2, |a, b| a - b)?,
        })
    }

    /// Largest sample magnitude `|f(x)|`.
    pub fn max_norm(&self) -> f64 {
        self.f1
            .values()
            .iter()
            .zip(self.f2.values())
            .fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn masked_to_disc(&self, radius: f64) -> VectorField {
        VectorField { f1: self.f1.masked_to_disc(radius), f2: self.f2.masked_to_disc(radius) }
    }

    pub fn vanishes_outside_support(&self) -> bool {
        self.f1.vanishes_outside_support() && self.f2.vanishes_outside_support()
    }
}

/// Sum of squares of samples inside the open disc of radius `radius`,
/// scaled by the cell area. Accumulated in index order.
pub fn l2_norm_in_disc(f: &ScalarField, radius: f64) -> f64 {
    let g = f.grid();
    let r2 = radius * radius;
    let mut acc = 0.0;
    for (i, v) in f.values().iter().enumerate() {
        if g.point_at(i).norm_sq() < r2 {
            acc += v * v;
        }
    }
    (acc * g.h * g.h).sqrt()
}

/// `||a - b|| / ||b||` in L2 over the open disc of radius `radius`.
pub fn relative_l2_in_disc(a: &ScalarField, b: &ScalarField, radius: f64) -> Result<f64> {
    let diff = a.zip_with(b, |x, y| x - y)?;
    let denom = l2_norm_in_disc(b, radius);
    let num = l2_norm_in_disc(&diff, radius);
    Ok(if denom == 0.0 { num } else { num / denom })
}
