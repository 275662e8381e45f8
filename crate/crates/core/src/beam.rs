//! Ray integrals from a vertex: the divergent beam transform, its first
//! moment, and the signed V-line transform with its explicit inverse.
//!
//! Quadrature is composite midpoint on the lattice `t_k = (k + 1/2) step`
//! anchored at the vertex. Because the lattice does not depend on where the
//! integrand's support starts, the quadrature error varies smoothly from
//! vertex to vertex, which keeps it small after the transforms are
//! differentiated.

use crate::error::{Error, Result};
use crate::field::{second_directional_derivative, PlanarFunction, ScalarField};
use crate::geom::{Direction, Vec2};
use crate::transform::{TransformField, TransformKind};
use crate::vline::VLineGeometry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayQuadrature {
    /// Arc-length spacing of the samples.
    pub step: f64,
}

impl RayQuadrature {
    pub fn new(step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Config(format!("quadrature step must be positive, got {step}")));
        }
        Ok(RayQuadrature { step })
    }

    /// Half the grid spacing.
    pub fn for_grid(grid: &crate::field::Grid2D) -> Self {
        RayQuadrature { step: grid.h / 2.0 }
    }
}

/// `sum_k w(t_k) h(p + t_k e) step` over lattice points in `[lo, hi]`
/// intersected with the window of `h`.
#[inline]
pub(crate) fn lattice_sum<F: PlanarFunction + ?Sized>(
    h: &F,
    p: Vec2,
    e: Vec2,
    step: f64,
    lo: f64,
    hi: f64,
    moment: bool,
) -> f64 {
    let Some((a, b)) = h.line_window(p, e) else {
        return 0.0;
    };
    let (a, b) = (a.max(lo), b.min(hi));
    if !(a < b) {
        return 0.0;
    }
    let k0 = (a / step - 0.5).ceil() as i64;
    let k1 = (b / step - 0.5).floor() as i64;
    let mut acc = 0.0;
    for k in k0..=k1 {
        let t = (k as f64 + 0.5) * step;
        let v = h.value(p + t * e);
        acc += if moment { t * v } else { v };
    }
    acc * step
}

/// `X_d h(x) = int_0^inf h(x + t d) dt`.
pub fn divergent_beam<F: PlanarFunction + ?Sized>(h: &F, x: Vec2, d: Direction, q: &RayQuadrature) -> f64 {
    lattice_sum(h, x, d.vec(), q.step, 0.0, f64::INFINITY, false)
}

/// `X1_d h(x) = int_0^inf t h(x + t d) dt`.
pub fn moment_beam<F: PlanarFunction + ?Sized>(h: &F, x: Vec2, d: Direction, q: &RayQuadrature) -> f64 {
    lattice_sum(h, x, d.vec(), q.step, 0.0, f64::INFINITY, true)
}

/// Evaluates `value` at the nodes of the data disc, zero elsewhere.
pub(crate) fn over_data_disc(grid: crate::field::Grid2D, value: impl Fn(Vec2) -> f64 + Sync) -> ScalarField {
    ScalarField::from_fn_within(grid, grid.data_radius(), value)
}

/// `X_d h` sampled on the data disc.
pub fn beam_field(h: &ScalarField, d: Direction, q: &RayQuadrature) -> Result<TransformField> {
    let grid = *h.grid();
    grid.check_rays(&[d, -d])?;
    let values = over_data_disc(grid, |x| divergent_beam(h, x, d, q));
    TransformField::new(TransformKind::Beam, vec![d], vec![values])
}

/// `X1_d h` sampled on the data disc.
pub fn moment_field(h: &ScalarField, d: Direction, q: &RayQuadrature) -> ScalarField {
    over_data_disc(*h.grid(), |x| moment_beam(h, x, d, q))
}

/// `T_s h = X_u h - X_v h` on the data disc.
pub fn signed_vline(h: &ScalarField, g: &VLineGeometry, q: &RayQuadrature) -> Result<TransformField> {
    let grid = *h.grid();
    grid.check_rays(&g.rays())?;
    let (u, v) = (g.u(), g.v());
    let values = over_data_disc(grid, |x| divergent_beam(h, x, u, q) - divergent_beam(h, x, v, q));
    TransformField::new(TransformKind::Ts, g.rays().to_vec(), vec![values])
}

/// `h = D_u D_v int_0^inf T_s h(x + t w) dt / |v - u|` with
/// `w = (v - u) / |v - u|`.
///
/// The ray integral runs over the data extended along the strips, so it
/// stops once the ray has left D2 and every strip.
pub fn invert_signed(ts: &TransformField, g: &VLineGeometry, q: &RayQuadrature) -> Result<ScalarField> {
    ts.expect_components(1)?;
    let grid = *ts.grid();
    let ext = ts.extension(0)?;
    let (w, len) = g.bisector();
    let reach = grid.r1 + 3.0 * grid.h;
    let beam = ScalarField::from_fn_within(grid, reach, |x| divergent_beam(&ext, x, w, q));
    let h = second_directional_derivative(&beam, g.u().vec(), g.v().vec());
    Ok(h.scaled(1.0 / len).masked_to_disc(grid.r1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{directional_derivative, relative_l2_in_disc, Analytic, Bump, Grid2D};

    fn unit_bump() -> Analytic<impl Fn(Vec2) -> f64 + Sync> {
        Analytic { f: |p: Vec2| Bump::unit().value(p), radius: 1.0 }
    }

    fn axes() -> VLineGeometry {
        VLineGeometry::new(Direction::new(1.0, 0.0).unwrap(), Direction::new(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn beam_of_bump_from_center() {
        // int_0^1 (1 - t^2)^3 dt = 16/35 and int_0^1 t (1 - t^2)^3 dt = 1/8
        let q = RayQuadrature::new(1e-3).unwrap();
        let d = Direction::new(1.0, 0.0).unwrap();
        assert!((divergent_beam(&unit_bump(), Vec2::ZERO, d, &q) - 16.0 / 35.0).abs() < 1e-6);
        assert!((moment_beam(&unit_bump(), Vec2::ZERO, d, &q) - 0.125).abs() < 1e-6);
    }

    #[test]
    fn rays_missing_the_support_give_zero() {
        let q = RayQuadrature::new(0.01).unwrap();
        let d = Direction::new(1.0, 0.0).unwrap();
        for x in [Vec2::new(0.0, 1.5), Vec2::new(2.0, 0.0)] {
            assert_eq!(divergent_beam(&unit_bump(), x, d, &q), 0.0);
            assert_eq!(moment_beam(&unit_bump(), x, d, &q), 0.0);
        }
        let g = Grid2D::for_rays(32, 1.0, &axes().rays()).unwrap();
        assert_eq!(moment_beam(&ScalarField::zeros(g), Vec2::ZERO, d, &q), 0.0);
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        // closed form at a vertex off the center: int over the chord of the
        // bump restricted to the line y = 0.3, from x = -0.2
        let b = Bump::unit();
        let x = Vec2::new(-0.2, 0.3);
        let d = Direction::from_angle(0.4);
        let fine = {
            // Simpson oracle on the exact chord
            let (_, t1) = crate::geom::disc_chord(x, d.vec(), 1.0).unwrap();
            let n = 20000;
            let hs = t1 / n as f64;
            let f = |t: f64| b.value(x + t * d.vec());
            let mut s = f(0.0) + f(t1);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hs);
            }
            s * hs / 3.0
        };
        let err = |step: f64| (divergent_beam(&unit_bump(), x, d, &RayQuadrature::new(step).unwrap()) - fine).abs();
        let (e1, e2) = (err(0.02), err(0.01));
        assert!(e1 / e2 >= 3.5, "{e1} {e2}");
    }

    #[test]
    fn beam_inverts_the_directional_derivative() {
        // X_d (d . grad h) = -h
        let g = Grid2D::for_rays(128, 1.0, &axes().rays()).unwrap();
        let b = Bump::new(Vec2::new(0.1, -0.1), 0.7, 1.0);
        let h = ScalarField::from_fn(g, |p| b.value(p));
        let d = Direction::from_angle(0.7);
        let dh = directional_derivative(&h, d);
        let q = RayQuadrature::for_grid(&g);
        // interior error is O(h^2)
        for p in [Vec2::ZERO, Vec2::new(0.2, 0.1), Vec2::new(-0.3, 0.25)] {
            let got = divergent_beam(&dh, p, d, &q);
            assert!((got + b.value(p)).abs() < 10.0 * g.h * g.h, "{got} {}", b.value(p));
        }
    }

    #[test]
    fn signed_vline_values() {
        let geom = axes();
        let g = Grid2D::for_rays(128, 1.0, &geom.rays()).unwrap();
        let b = Bump::unit();
        let h = ScalarField::from_fn(g, |p| b.value(p));
        let q = RayQuadrature::for_grid(&g);
        let ts = signed_vline(&h, &geom, &q).unwrap();
        let c = g.nearest(Vec2::ZERO).unwrap();
        assert!(ts.component(0).at(c.0, c.1).abs() < 1e-12);
        // at (-0.5, 0): the u-ray crosses the whole chord, the v-ray half of it
        let n = g.nearest(Vec2::new(-0.5, 0.0)).unwrap();
        let x = g.point(n.0, n.1);
        let fine = RayQuadrature::new(q.step / 10.0).unwrap();
        let exact = Analytic { f: |p: Vec2| b.value(p), radius: 1.0 };
        let oracle = divergent_beam(&exact, x, geom.u(), &fine) - divergent_beam(&exact, x, geom.v(), &fine);
        assert!((ts.component(0).at(n.0, n.1) - oracle).abs() < 1e-3 * oracle.abs(), "{oracle}");
    }

    #[test]
    fn signed_vline_is_constant_along_strips() {
        let geom = axes();
        let g = Grid2D::for_rays(96, 1.0, &geom.rays()).unwrap();
        let h = ScalarField::from_fn(g, |p| Bump::new(Vec2::new(0.2, 0.0), 0.6, 1.0).value(p));
        let ts = signed_vline(&h, &geom, &RayQuadrature::for_grid(&g)).unwrap();
        // nodes left of D1 on the same row, inside S_u: only the u-ray hits
        let row = g.nearest(Vec2::new(0.0, 0.3)).unwrap().1;
        let vals: Vec<f64> = (0..g.nx)
            .filter(|&ix| {
                let p = g.point(ix, row);
                p.x < -1.0 && p.norm() <= g.r2
            })
            .map(|ix| ts.component(0).at(ix, row))
            .collect();
        assert!(vals.len() > 3);
        let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - vals[0]).abs()));
        assert!(spread < 1e-12 * vals[0].abs().max(1.0), "{vals:?}");
    }

    #[test]
    fn signed_round_trip() {
        let geom = VLineGeometry::new(Direction::from_angle(0.3), Direction::from_angle(2.0)).unwrap();
        let b = Bump::new(Vec2::new(0.15, -0.1), 0.7, 1.0);
        let mut errs = vec![];
        for n in [128, 256] {
            let g = Grid2D::for_rays(n, 1.0, &geom.rays()).unwrap();
            let h = ScalarField::from_fn(g, |p| b.value(p));
            let q = RayQuadrature::for_grid(&g);
            let back = invert_signed(&signed_vline(&h, &geom, &q).unwrap(), &geom, &q).unwrap();
            errs.push(relative_l2_in_disc(&back, &h, 1.0).unwrap());
        }
        assert!(errs[1] < errs[0] && errs[1] <= 0.05, "{errs:?}");
    }

    #[test]
    fn invert_signed_zero_and_linearity() {
        let geom = axes();
        let g = Grid2D::for_rays(64, 1.0, &geom.rays()).unwrap();
        let q = RayQuadrature::for_grid(&g);
        let zero = TransformField::new(TransformKind::Ts, geom.rays().to_vec(), vec![ScalarField::zeros(g)]).unwrap();
        assert_eq!(invert_signed(&zero, &geom, &q).unwrap().max_abs(), 0.0);
        let h = ScalarField::from_fn(g, |p| Bump::new(Vec2::ZERO, 0.8, 1.0).value(p));
        let ts = signed_vline(&h, &geom, &q).unwrap();
        let a = invert_signed(&ts, &geom, &q).unwrap();
        let b = invert_signed(&ts.scaled(-2.5), &geom, &q).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((y + 2.5 * x).abs() < 1e-12 * a.max_abs());
        }
    }
}
