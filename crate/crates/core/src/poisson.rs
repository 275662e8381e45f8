//! Elliptic solvers: the Dirichlet problem on the support disc and
//! free-space recovery of a compactly supported function from its
//! Laplacian.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Relative residual at which conjugate gradients stops.
pub const CG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PoissonMode {
    /// `Laplacian u = rhs` in the open disc, `u = 0` on and outside it.
    DirichletDisc { radius: f64 },
    /// `u = G * rhs` with `G(x) = log|x| / (2 pi)`.
    FreeSpace,
}

#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub rhs: ScalarField,
    pub mode: PoissonMode,
}

impl PoissonProblem {
    pub fn dirichlet_disc(rhs: ScalarField, radius: f64) -> Self {
        PoissonProblem { rhs, mode: PoissonMode::DirichletDisc { radius } }
    }

    pub fn free_space(rhs: ScalarField) -> Self {
        PoissonProblem { rhs, mode: PoissonMode::FreeSpace }
    }
}

#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub field: ScalarField,
    pub iterations: usize,
    /// Final relative residual (zero for the direct quadrature).
    pub residual: f64,
}

/// Five-point finite differences on the nodes strictly inside the disc,
/// zero boundary values, solved by conjugate gradients.
pub fn solve_dirichlet_disc(p: &PoissonProblem) -> Result<PoissonSolution> {
    let radius = match p.mode {
        PoissonMode::DirichletDisc { radius } => radius,
        PoissonMode::FreeSpace => {
            return Err(Error::Config("solve_dirichlet_disc needs a dirichlet problem".into()))
        }
    };
    let grid = *p.rhs.grid();
    let r2 = radius * radius;

    // unknown numbering in row-major node order
    let mut slot = vec![usize::MAX; grid.len()];
    let mut nodes = Vec::new();
    for (k, s) in slot.iter_mut().enumerate() {
        let (ix, iy) = grid.coords(k);
        let interior = ix > 0 && iy > 0 && ix + 1 < grid.nx && iy + 1 < grid.ny;
        if interior && grid.point_at(k).norm_sq() < r2 {
            *s = nodes.len();
            nodes.push(k);
        }
    }
    let n = nodes.len();
    let neighbours: Vec<[usize; 4]> = nodes
        .iter()
        .map(|&k| [k - 1, k + 1, k - grid.nx, k + grid.nx].map(|j| slot[j]))
        .collect();

    // A = -Laplacian * h^2 is symmetric positive definite
    let apply = |x: &[f64], out: &mut [f64]| {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            let mut acc = 4.0 * x[i];
            for &j in &neighbours[i] {
                if j != usize::MAX {
                    acc -= x[j];
                }
            }
            *o = acc;
        });
    };
    let h2 = grid.h * grid.h;
    let b: Vec<f64> = nodes.iter().map(|&k| -p.rhs.values()[k] * h2).collect();

    let (x, iterations, residual) = conjugate_gradient(apply, &b, CG_TOLERANCE, 10 * n + 100)?;

    let mut values = vec![0.0; grid.len()];
    for (i, &k) in nodes.iter().enumerate() {
        values[k] = x[i];
    }
    Ok(PoissonSolution {
        field: ScalarField::from_values_unchecked(grid, values),
        iterations,
        residual,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Plain CG for `A x = b` from `x = 0`. Inner products are accumulated
/// sequentially so the iterates do not depend on the thread count.
fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize, f64)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((x, 0, 0.0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let rel = rr_new.sqrt() / b_norm;
        if rel <= tol {
            return Ok((x, it, rel));
        }
        let beta = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    Err(Error::SolverDiverged { iterations: max_iter, residual: rr.sqrt() / b_norm })
}

/// `G * rhs` by midpoint quadrature over the nonzero samples of `rhs`,
/// evaluated at every node.
pub fn solve_free_space(p: &PoissonProblem) -> Result<PoissonSolution> {
    solve_free_space_within(p, f64::INFINITY)
}

/// As [`solve_free_space`], evaluated only at nodes with `|x| < radius`
/// (zero elsewhere).
pub fn solve_free_space_within(p: &PoissonProblem, radius: f64) -> Result<PoissonSolution> {
    if p.mode != PoissonMode::FreeSpace {
        return Err(Error::Config("solve_free_space needs a free-space problem".into()));
    }
    let grid = *p.rhs.grid();
    let (nx, ny, h) = (grid.nx, grid.ny, grid.h);
    let rhs = p.rhs.values();

    // rows of rhs with nonzero samples and their column extents
    let rows: Vec<(usize, usize, usize)> = (0..ny)
        .filter_map(|iy| {
            let row = &rhs[iy * nx..(iy + 1) * nx];
            let first = row.iter().position(|v| *v != 0.0)?;
            let last = row.iter().rposition(|v| *v != 0.0)?;
            Some((iy, first, last + 1))
        })
        .collect();
    if rows.is_empty() {
        return Ok(PoissonSolution { field: ScalarField::zeros(grid), iterations: 0, residual: 0.0 });
    }

    // kernel[(dy + ny - 1) * kw + (dx + nx - 1)] = cell weight of G at offset (dx, dy)
    let kw = 2 * nx - 1;
    let kh = 2 * ny - 1;
    let h2 = h * h;
    let self_cell = h2 / 2.0 * ((h2 / 2.0).ln() - 3.0 + PI / 2.0) / (2.0 * PI);
    let kernel: Vec<f64> = (0..kw * kh)
        .into_par_iter()
        .map(|k| {
            let dx = (k % kw) as f64 - (nx - 1) as f64;
            let dy = (k / kw) as f64 - (ny - 1) as f64;
            if dx == 0.0 && dy == 0.0 {
                self_cell
            } else {
                h2 * (h * dx.hypot(dy)).ln() / (2.0 * PI)
            }
        })
        .collect();

    let rad2 = radius * radius;
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            if grid.point_at(k).norm_sq() >= rad2 {
                return 0.0;
            }
            let (ix, iy) = grid.coords(k);
            let mut acc = 0.0;
            for &(sy, c0, c1) in &rows {
                // source (sx, sy) contributes kernel at offset (sx - ix, sy - iy)
                let krow = (sy + ny - 1 - iy) * kw + (nx - 1 - ix);
                acc += dot4(&kernel[krow + c0..krow + c1], &rhs[sy * nx + c0..sy * nx + c1]);
            }
            acc
        })
        .collect();
    Ok(PoissonSolution {
        field: ScalarField::from_values_unchecked(grid, values),
        iterations: 0,
        residual: 0.0,
    })
}

/// Dot product with four interleaved partial sums, combined in a fixed order.
#[inline]
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut s = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = 4 * c;
        s[0] += a[i] * b[i];
        s[1] += a[i + 1] * b[i + 1];
        s[2] += a[i + 2] * b[i + 2];
        s[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (s[0] + s[1]) + (s[2] + s[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{l2_norm_in_disc, laplacian, relative_l2_in_disc, Bump, Grid2D};
    use crate::geom::{Direction, Vec2};

    fn grid(n: usize) -> Grid2D {
        let u = Direction::new(1.0, 0.0).unwrap();
        let v = Direction::new(0.0, 1.0).unwrap();
        Grid2D::for_rays(n, 1.0, &[u, v]).unwrap()
    }

    #[test]
    fn self_cell_weight_matches_fine_quadrature() {
        // oracle: subdivided midpoint rule of log|y| over the cell [-h/2, h/2]^2
        let h = 0.1f64;
        let m = 2000;
        let dh = h / m as f64;
        let mut acc = 0.0;
        for i in 0..m {
            for j in 0..m {
                let x = -h / 2.0 + (i as f64 + 0.5) * dh;
                let y = -h / 2.0 + (j as f64 + 0.5) * dh;
                acc += 0.5 * (x * x + y * y).ln() * dh * dh;
            }
        }
        let closed = h * h / 2.0 * ((h * h / 2.0).ln() - 3.0 + PI / 2.0);
        assert!((acc - closed).abs() < 1e-6 * closed.abs(), "{acc} {closed}");
    }

    #[test]
    fn dirichlet_recovers_bump() {
        let g = grid(128);
        let b = Bump::unit();
        let rhs = ScalarField::from_fn(g, |p| b.laplacian(p));
        let sol = solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(rhs, 1.0)).unwrap();
        let c = g.nearest(Vec2::ZERO).unwrap();
        assert!((sol.field.at(c.0, c.1) - 1.0).abs() < 5e-3, "{}", sol.field.at(c.0, c.1));
        assert!(sol.residual <= CG_TOLERANCE);
        // the discrete Laplacian reproduces the rhs on interior samples
        let lap = laplacian(&sol.field);
        let mut worst = 0.0f64;
        for k in 0..g.len() {
            let p = g.point_at(k);
            if p.norm() < 1.0 - 2.0 * g.h {
                worst = worst.max((lap.values()[k] - b.laplacian(p)).abs());
            }
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn dirichlet_error_shrinks_under_refinement() {
        let b = Bump::new(Vec2::new(0.1, -0.2), 0.7, 1.0);
        let errs: Vec<f64> = [64, 128]
            .iter()
            .map(|&n| {
                let g = grid(n);
                let rhs = ScalarField::from_fn(g, |p| b.laplacian(p));
                let sol = solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(rhs, 1.0)).unwrap();
                let exact = ScalarField::from_fn(g, |p| b.value(p));
                relative_l2_in_disc(&sol.field, &exact, 1.0).unwrap()
            })
            .collect();
        assert!(errs[0] / errs[1] > 3.0, "{errs:?}");
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid(32);
        let d = solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(ScalarField::zeros(g), 1.0)).unwrap();
        assert_eq!(d.field.max_abs(), 0.0);
        let f = solve_free_space(&PoissonProblem::free_space(ScalarField::zeros(g))).unwrap();
        assert_eq!(f.field.max_abs(), 0.0);
    }

    #[test]
    fn dirichlet_preserves_radial_symmetry() {
        let g = grid(64);
        let rhs = ScalarField::from_fn(g, |p| if p.norm() < 0.6 { 1.0 } else { 0.0 });
        let sol = solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(rhs, 1.0)).unwrap();
        let c = g.nearest(Vec2::ZERO).unwrap();
        let scale = sol.field.max_abs();
        for d in 1..20 {
            let a = sol.field.at(c.0 + d, c.1);
            let b = sol.field.at(c.0, c.1 + d);
            let e = sol.field.at(c.0 - d, c.1);
            let f = sol.field.at(c.0, c.1 - d);
            for x in [b, e, f] {
                assert!((a - x).abs() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn wrong_mode_is_rejected() {
        let g = grid(32);
        assert!(solve_dirichlet_disc(&PoissonProblem::free_space(ScalarField::zeros(g))).is_err());
        assert!(solve_free_space(&PoissonProblem::dirichlet_disc(ScalarField::zeros(g), 1.0)).is_err());
    }

    #[test]
    fn free_space_recovers_bump() {
        let b = Bump::new(Vec2::new(0.1, 0.0), 0.8, 1.0);
        let mut errs = vec![];
        for n in [64, 128] {
            let g = grid(n);
            let rhs = ScalarField::from_fn(g, |p| b.laplacian(p));
            let sol = solve_free_space(&PoissonProblem::free_space(rhs)).unwrap();
            let exact = ScalarField::from_fn(g, |p| b.value(p));
            errs.push(relative_l2_in_disc(&sol.field, &exact, 1.0).unwrap());
        }
        assert!(errs[1] < errs[0] && errs[1] < 0.01, "{errs:?}");
    }

    #[test]
    fn free_space_translation_equivariance() {
        let g = grid(48);
        let b = Bump::new(Vec2::new(0.0, 0.0), 0.5, 1.0);
        let rhs = ScalarField::from_fn(g, |p| b.laplacian(p));
        let shifted = ScalarField::from_fn(g, |p| b.laplacian(p - Vec2::new(g.h, 0.0)));
        let a = solve_free_space(&PoissonProblem::free_space(rhs)).unwrap().field;
        let s = solve_free_space(&PoissonProblem::free_space(shifted)).unwrap().field;
        for iy in 1..g.ny - 1 {
            for ix in 1..g.nx - 1 {
                assert!((s.at(ix + 1, iy) - a.at(ix, iy)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn free_space_far_field_matches_log_mass() {
        // |u| at |x| = r2 is close to |integral of rhs| log r2 / (2 pi)
        let g = grid(64);
        let rhs = ScalarField::from_fn(g, |p| if p.norm() < 0.5 { 1.0 } else { 0.0 });
        let u = solve_free_space(&PoissonProblem::free_space(rhs.clone())).unwrap().field;
        let mass: f64 = rhs.values().iter().sum::<f64>() * g.h * g.h;
        let predicted = (mass * g.r2.ln() / (2.0 * PI)).abs();
        let node = g.nearest(Vec2::new(g.r2, 0.0)).unwrap();
        let got = u.at(node.0, node.1).abs();
        assert!((got - predicted).abs() <= 0.1 * predicted, "{got} {predicted}");
    }

    #[test]
    fn solvers_are_linear() {
        let g = grid(48);
        let a = ScalarField::from_fn(g, |p| Bump::new(Vec2::new(0.2, 0.0), 0.5, 1.0).laplacian(p));
        let b = ScalarField::from_fn(g, |p| Bump::new(Vec2::new(-0.2, 0.1), 0.6, 1.0).laplacian(p));
        let combo = a.zip_with(&b, |x, y| 2.0 * x - 0.5 * y).unwrap();
        for mode in [PoissonMode::DirichletDisc { radius: 1.0 }, PoissonMode::FreeSpace] {
            let solve = |rhs: &ScalarField| {
                let pb = PoissonProblem { rhs: rhs.clone(), mode };
                match mode {
                    PoissonMode::FreeSpace => solve_free_space(&pb).unwrap().field,
                    _ => solve_dirichlet_disc(&pb).unwrap().field,
                }
            };
            let lhs = solve(&combo);
            let rhs = solve(&a).zip_with(&solve(&b), |x, y| 2.0 * x - 0.5 * y).unwrap();
            let diff = lhs.zip_with(&rhs, |x, y| x - y).unwrap();
            assert!(l2_norm_in_disc(&diff, 3.0) < 1e-8 * l2_norm_in_disc(&lhs, 3.0));
        }
    }
}
