//! Parallel-beam Radon transform, its offset derivative and filtered
//! backprojection.
//!
//! `R h(psi, s)` integrates `h` along the line `{s psi + t psi^⊥}`, so `psi`
//! is the unit normal of the line and `s` its signed distance from the
//! origin. `R h(psi, s) = R h(-psi, -s)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::beam::{lattice_sum, RayQuadrature};
use crate::error::{Error, Result};
use crate::field::{Grid2D, PlanarFunction, ScalarField};
use crate::geom::Vec2;

/// Fewest angles accepted by the backprojection.
pub const MIN_FBP_ANGLES: usize = 16;

/// Angle lattice `psi_i = angle0 + i dangle` and offset lattice
/// `s_j = -radius + j ds`, with `radius = (n_offsets - 1) ds / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinogramLayout {
    pub n_angles: usize,
    pub n_offsets: usize,
    pub angle0: f64,
    pub dangle: f64,
    pub ds: f64,
}

impl SinogramLayout {
    pub fn new(n_angles: usize, n_offsets: usize, angle0: f64, dangle: f64, ds: f64) -> Result<Self> {
        if n_angles == 0 {
            return Err(Error::Config("sinogram needs at least one angle".into()));
        }
        if n_offsets < 3 || n_offsets % 2 == 0 {
            return Err(Error::Config(format!("offset count must be odd and at least 3, got {n_offsets}")));
        }
        if !(ds.is_finite() && ds > 0.0 && dangle.is_finite() && dangle > 0.0 && angle0.is_finite()) {
            return Err(Error::Config("sinogram spacings must be positive and finite".into()));
        }
        Ok(SinogramLayout { n_angles, n_offsets, angle0, dangle, ds })
    }

    /// `n_angles` angles evenly covering `[0, pi)`, offsets covering `[-radius, radius]`.
    pub fn half_turn(n_angles: usize, n_offsets: usize, radius: f64) -> Result<Self> {
        Self::spanning(n_angles, n_offsets, radius, PI)
    }

    /// `n_angles` angles evenly covering `[0, 2 pi)`.
    pub fn full_turn(n_angles: usize, n_offsets: usize, radius: f64) -> Result<Self> {
        Self::spanning(n_angles, n_offsets, radius, 2.0 * PI)
    }

    fn spanning(n_angles: usize, n_offsets: usize, radius: f64, span: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Config(format!("offset radius must be positive, got {radius}")));
        }
        if n_angles == 0 {
            return Err(Error::Config("sinogram needs at least one angle".into()));
        }
        let ds = 2.0 * radius / (n_offsets.max(2) - 1) as f64;
        Self::new(n_angles, n_offsets, 0.0, span / n_angles as f64, ds)
    }

    /// Odd offset count giving a spacing of at most `ds` over `[-radius, radius]`.
    pub fn offsets_for(radius: f64, ds: f64) -> usize {
        2 * (radius / ds).ceil().max(1.0) as usize + 1
    }

    pub fn radius(&self) -> f64 {
        0.5 * (self.n_offsets - 1) as f64 * self.ds
    }

    pub fn angle(&self, i: usize) -> f64 {
        self.angle0 + i as f64 * self.dangle
    }

    pub fn offset(&self, j: usize) -> f64 {
        -self.radius() + j as f64 * self.ds
    }

    /// Total angular range covered, `n_angles * dangle`.
    pub fn span(&self) -> f64 {
        self.n_angles as f64 * self.dangle
    }

    pub fn len(&self) -> usize {
        self.n_angles * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// One or more sinograms sharing a layout. Each component is stored row-major,
/// one row of offsets per angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    layout: SinogramLayout,
    components: Vec<Vec<f64>>,
}

impl Sinogram {
    pub fn new(layout: SinogramLayout, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Config("sinogram needs at least one component".into()));
        }
        for c in &components {
            if c.len() != layout.len() {
                return Err(Error::Config(format!(
                    "sinogram component has {} values, layout needs {}",
                    c.len(),
                    layout.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("sinogram values must be finite".into()));
            }
        }
        Ok(Sinogram { layout, components })
    }

    pub fn zeros(layout: SinogramLayout, ncomp: usize) -> Self {
        Sinogram { layout, components: vec![vec![0.0; layout.len()]; ncomp.max(1)] }
    }

    pub fn layout(&self) -> &SinogramLayout {
        &self.layout
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<f64>> {
        self.components
    }

    pub fn at(&self, c: usize, i: usize, j: usize) -> f64 {
        self.components[c][i * self.layout.n_offsets + j]
    }

    pub fn row(&self, c: usize, i: usize) -> &[f64] {
        let n = self.layout.n_offsets;
        &self.components[c][i * n..(i + 1) * n]
    }

    /// Component `c` as its own sinogram.
    pub fn split(&self, c: usize) -> Sinogram {
        Sinogram { layout: self.layout, components: vec![self.components[c].clone()] }
    }

    pub fn scaled(&self, a: f64) -> Sinogram {
        Sinogram {
            layout: self.layout,
            components: self.components.iter().map(|c| c.iter().map(|v| a * v).collect()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn expect_single(&self) -> Result<()> {
        if self.ncomp() != 1 {
            return Err(Error::Config(format!("expected a one-component sinogram, got {}", self.ncomp())));
        }
        Ok(())
    }
}

fn normal(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Line integrals of each function over the layout, with midpoint samples
/// at `s psi + (k + 1/2) step psi^⊥` for all integers `k`.
pub fn radon_project<F: PlanarFunction + ?Sized>(
    fs: &[&F],
    layout: &SinogramLayout,
    q: &RayQuadrature,
) -> Sinogram {
    let components = fs
        .iter()
        .map(|f| {
            (0..layout.len())
                .into_par_iter()
                .map(|k| {
                    let (i, j) = (k / layout.n_offsets, k % layout.n_offsets);
                    let psi = normal(layout.angle(i));
                    let foot = layout.offset(j) * psi;
                    lattice_sum(*f, foot, psi.perp(), q.step, f64::NEG_INFINITY, f64::INFINITY, false)
                })
                .collect()
        })
        .collect();
    Sinogram { layout: *layout, components }
}

/// Radon transform of a grid field over `[0, pi)` with offsets covering the
/// data disc, sampled at half the grid spacing along each line.
pub fn radon_forward(h: &ScalarField, n_angles: usize, n_offsets: usize) -> Result<Sinogram> {
    let layout = SinogramLayout::half_turn(n_angles, n_offsets, h.grid().r2)?;
    Ok(radon_project(&[h], &layout, &RayQuadrature::for_grid(h.grid())))
}

/// `d/ds` of every row: central differences inside, second-order one-sided
/// differences at both ends.
pub fn sinogram_dds(sg: &Sinogram) -> Sinogram {
    let l = sg.layout;
    let n = l.n_offsets;
    let inv = 1.0 / (2.0 * l.ds);
    let components = sg
        .components
        .iter()
        .map(|c| {
            let mut out = vec![0.0; c.len()];
            for (row, dst) in c.chunks(n).zip(out.chunks_mut(n)) {
                dst[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) * inv;
                dst[n - 1] = (3.0 * row[n - 1] - 4.0 * row[n - 2] + row[n - 3]) * inv;
                for j in 1..n - 1 {
                    dst[j] = (row[j + 1] - row[j - 1]) * inv;
                }
            }
            out
        })
        .collect();
    Sinogram { layout: l, components }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RampWindow {
    /// Plain ramp (Ram-Lak).
    #[default]
    RamLak,
    /// Ramp times a raised cosine reaching zero at the Nyquist frequency.
    Hann,
}

/// Ramp filter applied as a circular convolution with the band-limited
/// spatial kernel, zero padded so that no wrap-around reaches the data.
struct RampFilter {
    n: usize,
    padded: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    response: Vec<Complex<f64>>,
}

impl RampFilter {
    fn new(n: usize, ds: f64, window: RampWindow) -> Self {
        let padded = (2 * n - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        // h(0) = 1 / (4 ds^2), h(k) = -1 / (pi k ds)^2 for odd k, else 0
        let mut kernel = vec![Complex::new(0.0, 0.0); padded];
        kernel[0].re = 1.0 / (4.0 * ds * ds);
        for k in (1..n).step_by(2) {
            let v = -1.0 / (PI * k as f64 * ds).powi(2);
            kernel[k].re = v;
            kernel[padded - k].re = v;
        }
        forward.process(&mut kernel);
        if window == RampWindow::Hann {
            for (m, z) in kernel.iter_mut().enumerate() {
                let freq = m.min(padded - m) as f64 / padded as f64;
                *z *= 0.5 * (1.0 + (2.0 * PI * freq).cos());
            }
        }
        // fold in the convolution's ds and the inverse FFT's 1 / padded
        let scale = ds / padded as f64;
        let response = kernel.into_iter().map(|z| z * scale).collect();
        RampFilter { n, padded, forward, inverse, response }
    }

    fn apply(&self, row: &[f64]) -> Vec<f64> {
        let mut buf = vec![Complex::new(0.0, 0.0); self.padded];
        for (b, &v) in buf.iter_mut().zip(row) {
            b.re = v;
        }
        self.forward.process(&mut buf);
        for (b, r) in buf.iter_mut().zip(&self.response) {
            *b *= r;
        }
        self.inverse.process(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }
}

/// Ramp-filtered rows of a one-component sinogram.
pub fn ramp_filter(sg: &Sinogram, window: RampWindow) -> Result<Sinogram> {
    sg.expect_single()?;
    let l = sg.layout;
    let filter = RampFilter::new(l.n_offsets, l.ds, window);
    let rows: Vec<Vec<f64>> = (0..l.n_angles).into_par_iter().map(|i| filter.apply(sg.row(0, i))).collect();
    Ok(Sinogram { layout: l, components: vec![rows.concat()] })
}

/// Filtered backprojection onto the nodes of `grid` within the offset
/// radius. Filtered rows are interpolated linearly in `s`. Each angle is
/// weighted by `dangle pi / span`, so a full turn counts every line twice at
/// half weight.
pub fn fbp_inverse(sg: &Sinogram, grid: Grid2D, window: RampWindow) -> Result<ScalarField> {
    sg.expect_single()?;
    let l = *sg.layout();
    if l.n_angles < MIN_FBP_ANGLES {
        return Err(Error::Config(format!(
            "filtered backprojection needs at least {MIN_FBP_ANGLES} angles, got {}",
            l.n_angles
        )));
    }
    let filtered = ramp_filter(sg, window)?;
    let normals: Vec<Vec2> = (0..l.n_angles).map(|i| normal(l.angle(i))).collect();
    let weight = l.dangle * PI / l.span();
    let radius = l.radius();
    let (s0, n) = (-radius, l.n_offsets);
    let values = filtered.component(0);
    Ok(ScalarField::from_fn_within(grid, radius, |x| {
        let mut acc = 0.0;
        for (i, psi) in normals.iter().enumerate() {
            let u = (x.dot(*psi) - s0) / l.ds;
            let j = u.floor();
            if j < 0.0 || j as usize >= n - 1 {
                continue;
            }
            let (j, t) = (j as usize, u - j);
            let row = &values[i * n..(i + 1) * n];
            acc += (1.0 - t) * row[j] + t * row[j + 1];
        }
        acc * weight
    }))
}
