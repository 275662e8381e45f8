//! Finite-difference calculus on grid fields.
//!
//! First derivatives use second-order central differences in the interior
//! and second-order one-sided stencils on the boundary rows and columns.

use rayon::prelude::*;

use super::{Grid2D, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::geom::{Direction, Vec2};

#[inline]
fn diff_along(values: &[f64], k: usize, stride: usize, i: usize, n: usize, h: f64) -> f64 {
    if i == 0 {
        (-3.0 * values[k] + 4.0 * values[k + stride] - values[k + 2 * stride]) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * values[k] - 4.0 * values[k - stride] + values[k - 2 * stride]) / (2.0 * h)
    } else {
        (values[k + stride] - values[k - stride]) / (2.0 * h)
    }
}

fn map_nodes(grid: Grid2D, f: impl Fn(usize, usize, usize) -> f64 + Sync) -> ScalarField {
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (ix, iy) = grid.coords(k);
            f(k, ix, iy)
        })
        .collect();
    ScalarField::from_values_unchecked(grid, values)
}

pub fn partial_x(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let v = f.values();
    map_nodes(g, |k, ix, _| diff_along(v, k, 1, ix, g.nx, g.h))
}

pub fn partial_y(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let v = f.values();
    map_nodes(g, |k, _, iy| diff_along(v, k, g.nx, iy, g.ny, g.h))
}

/// `d . grad h`.
pub fn directional_derivative(h: &ScalarField, d: Direction) -> ScalarField {
    let g = *h.grid();
    let v = h.values();
    let (dx, dy) = (d.x(), d.y());
    map_nodes(g, |k, ix, iy| {
        dx * diff_along(v, k, 1, ix, g.nx, g.h) + dy * diff_along(v, k, g.nx, iy, g.ny, g.h)
    })
}

pub fn gradient(h: &ScalarField) -> VectorField {
    VectorField { f1: partial_x(h), f2: partial_y(h) }
}

pub fn divergence(f: &VectorField) -> ScalarField {
    let g = *f.grid();
    let (a, b) = (f.f1.values(), f.f2.values());
    map_nodes(g, |k, ix, iy| {
        diff_along(a, k, 1, ix, g.nx, g.h) + diff_along(b, k, g.nx, iy, g.ny, g.h)
    })
}

/// `d1 f2 - d2 f1`.
pub fn curl(f: &VectorField) -> ScalarField {
    let g = *f.grid();
    let (a, b) = (f.f1.values(), f.f2.values());
    map_nodes(g, |k, ix, iy| {
        diff_along(b, k, 1, ix, g.nx, g.h) - diff_along(a, k, g.nx, iy, g.ny, g.h)
    })
}

/// Componentwise Laplacians from the divergence `d` and curl `c` of a field:
/// `(d1 d - d2 c, d2 d + d1 c)`.
pub fn laplacians_from_div_curl(
    d: &ScalarField,
    c: &ScalarField,
) -> Result<(ScalarField, ScalarField)> {
    if d.grid() != c.grid() {
        return Err(Error::GridMismatch);
    }
    let lap1 = partial_x(d).zip_with(&partial_y(c), |a, b| a - b)?;
    let lap2 = partial_y(d).zip_with(&partial_x(c), |a, b| a + b)?;
    Ok((lap1, lap2))
}

/// Five-point Laplacian; zero on the outermost rows and columns.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    let g = *f.grid();
    let v = f.values();
    let inv = 1.0 / (g.h * g.h);
    map_nodes(g, |k, ix, iy| {
        if ix == 0 || iy == 0 || ix == g.nx - 1 || iy == g.ny - 1 {
            0.0
        } else {
            (v[k - 1] + v[k + 1] + v[k - g.nx] + v[k + g.nx] - 4.0 * v[k]) * inv
        }
    })
}

/// `D_a D_b f = sum_ij a_i b_j d_i d_j f` from the central Hessian stencil.
///
/// For axis-aligned `a`, `b` the mixed term is exactly the rhombus
/// difference `[f(x+p) + f(x-p) - f(x+q) - f(x-q)] / delta^2` with
/// `p = (a+b) delta/2`, `q = (a-b) delta/2`, `delta = 2h`; for general
/// directions the same second-order object is assembled from the three
/// Hessian entries so that every stencil point is a node. Zero on the
/// outermost rows and columns.
pub fn second_directional_derivative(f: &ScalarField, a: Vec2, b: Vec2) -> ScalarField {
    let g = *f.grid();
    let v = f.values();
    let inv = 1.0 / (g.h * g.h);
    let cxx = a.x * b.x;
    let cyy = a.y * b.y;
    let cxy = a.x * b.y + a.y * b.x;
    let n = g.nx;
    map_nodes(g, |k, ix, iy| {
        if ix == 0 || iy == 0 || ix == g.nx - 1 || iy == g.ny - 1 {
            return 0.0;
        }
        let dxx = v[k + 1] - 2.0 * v[k] + v[k - 1];
        let dyy = v[k + n] - 2.0 * v[k] + v[k - n];
        let dxy = 0.25 * (v[k + n + 1] - v[k + n - 1] - v[k - n + 1] + v[k - n - 1]);
        (cxx * dxx + cyy * dyy + cxy * dxy) * inv
    })
}
