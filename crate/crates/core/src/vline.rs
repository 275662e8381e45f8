//! V-line transforms of vector fields and the reconstructions built on them.
//!
//! With branch directions `u`, `v` and the divergent beam `X`:
//!
//! ```text
//! L f = -X_u(f.u)    + X_v(f.v)       I f = -X1_u(f.u)    + X1_v(f.v)
//! T f = -X_u(f.u^⊥)  + X_v(f.v^⊥)     J f = -X1_u(f.u^⊥)  + X1_v(f.v^⊥)
//! ```
//!
//! `D_u D_v L f = det(v, u) curl f` and `D_u D_v T f = -det(v, u) div f`.

use crate::beam::{divergent_beam, invert_signed, moment_beam, over_data_disc, RayQuadrature};
use crate::error::{Error, Result};
use crate::field::{
    directional_derivative, Phantom, laplacians_from_div_curl, partial_x, partial_y, second_directional_derivative, Grid2D,
    ScalarField, VectorField,
};
use crate::geom::{det2, Direction, Vec2};
use crate::poisson::{solve_dirichlet_disc, solve_free_space_within, PoissonProblem};
use crate::transform::{TransformField, TransformKind};

/// Smallest admissible `|det(v, u)|`.
pub const MIN_DET: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VLineGeometry {
    u: Direction,
    v: Direction,
}

impl VLineGeometry {
    pub fn new(u: Direction, v: Direction) -> Result<Self> {
        let det = det2(v, u);
        if !(det.abs() >= MIN_DET) {
            return Err(Error::DegenerateGeometry { det });
        }
        Ok(VLineGeometry { u, v })
    }

    pub fn u(&self) -> Direction {
        self.u
    }

    pub fn v(&self) -> Direction {
        self.v
    }

    pub fn rays(&self) -> [Direction; 2] {
        [self.u, self.v]
    }

    /// `det(v, u) = v1 u2 - u1 v2`.
    pub fn det(&self) -> f64 {
        det2(self.v, self.u)
    }

    /// `w = (v - u) / |v - u|` and `|v - u|`.
    pub fn bisector(&self) -> (Direction, f64) {
        let d = self.v.vec() - self.u.vec();
        let len = d.norm();
        (Direction::normalized(d).expect("independent directions differ"), len)
    }
}

fn pair_transform(
    f: &VectorField,
    g: &VLineGeometry,
    q: &RayQuadrature,
    transverse: bool,
    moment: bool,
) -> Result<ScalarField> {
    let grid = *f.grid();
    grid.check_rays(&g.rays())?;
    let (u, v) = (g.u(), g.v());
    let (pu, pv) = if transverse { (u.perp().vec(), v.perp().vec()) } else { (u.vec(), v.vec()) };
    let (fu, fv) = (f.dot(pu), f.dot(pv));
    let beam = if moment { moment_beam::<ScalarField> } else { divergent_beam::<ScalarField> };
    Ok(over_data_disc(grid, |x| -beam(&fu, x, u, q) + beam(&fv, x, v, q)))
}

/// `L`, `T`, `I` or `J` of an analytic phantom, integrating the closed-form
/// field along each ray instead of an interpolated sample.
pub fn forward_phantom(
    kind: TransformKind,
    phantom: &Phantom,
    grid: Grid2D,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<TransformField> {
    let (transverse, moment) = match kind {
        TransformKind::L => (false, false),
        TransformKind::T => (true, false),
        TransformKind::I => (false, true),
        TransformKind::J => (true, true),
        other => return Err(Error::Config(format!("{} is not a V-line transform of a vector field", other.name()))),
    };
    grid.check_rays(&g.rays())?;
    if phantom.reach() > grid.r1 * (1.0 + 1e-12) {
        return Err(Error::SupportLeak { reach: phantom.reach(), r1: grid.r1 });
    }
    let (u, v) = (g.u(), g.v());
    let (pu, pv) = if transverse { (u.perp().vec(), v.perp().vec()) } else { (u.vec(), v.vec()) };
    let (fu, fv) = (phantom.projection(pu), phantom.projection(pv));
    let values = if moment {
        over_data_disc(grid, |x| -moment_beam(&fu, x, u, q) + moment_beam(&fv, x, v, q))
    } else {
        over_data_disc(grid, |x| -divergent_beam(&fu, x, u, q) + divergent_beam(&fv, x, v, q))
    };
    wrap(kind, g, values)
}

fn wrap(kind: TransformKind, g: &VLineGeometry, values: ScalarField) -> Result<TransformField> {
    TransformField::new(kind, g.rays().to_vec(), vec![values])
}

/// Longitudinal V-line transform.
pub fn forward_l(f: &VectorField, g: &VLineGeometry, q: &RayQuadrature) -> Result<TransformField> {
    wrap(TransformKind::L, g, pair_transform(f, g, q, false, false)?)
}

/// Transverse V-line transform.
pub fn forward_t(f: &VectorField, g: &VLineGeometry, q: &RayQuadrature) -> Result<TransformField> {
    wrap(TransformKind::T, g, pair_transform(f, g, q, true, false)?)
}

/// First-moment longitudinal V-line transform.
pub fn forward_i(f: &VectorField, g: &VLineGeometry, q: &RayQuadrature) -> Result<TransformField> {
    wrap(TransformKind::I, g, pair_transform(f, g, q, false, true)?)
}

/// First-moment transverse V-line transform.
pub fn forward_j(f: &VectorField, g: &VLineGeometry, q: &RayQuadrature) -> Result<TransformField> {
    wrap(TransformKind::J, g, pair_transform(f, g, q, true, true)?)
}

fn mixed_derivative(data: &TransformField, g: &VLineGeometry) -> Result<ScalarField> {
    data.expect_components(1)?;
    let dd = second_directional_derivative(data.component(0), g.u().vec(), g.v().vec());
    Ok(dd.masked_to_disc(data.grid().r1))
}

/// `curl f = D_u D_v L f / det(v, u)`, zero outside D1.
pub fn recover_curl(lf: &TransformField, g: &VLineGeometry) -> Result<ScalarField> {
    Ok(mixed_derivative(lf, g)?.scaled(1.0 / g.det()))
}

/// `div f = -D_u D_v T f / det(v, u)`, zero outside D1.
pub fn recover_div(tf: &TransformField, g: &VLineGeometry) -> Result<ScalarField> {
    Ok(mixed_derivative(tf, g)?.scaled(-1.0 / g.det()))
}

fn same_grid(a: &TransformField, b: &TransformField) -> Result<Grid2D> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(*a.grid())
}

/// Recovers `f` from `div f` and `curl f`: each component solves a
/// free-space Poisson problem whose right-hand side is assembled from
/// derivatives of the two.
pub fn recover_field_lt(lf: &TransformField, tf: &TransformField, g: &VLineGeometry) -> Result<VectorField> {
    let grid = same_grid(lf, tf)?;
    let curl = recover_curl(lf, g)?;
    let div = recover_div(tf, g)?;
    let (lap1, lap2) = laplacians_from_div_curl(&div, &curl)?;
    let solve = |rhs: ScalarField| -> Result<ScalarField> {
        Ok(solve_free_space_within(&PoissonProblem::free_space(rhs), grid.r1)?.field)
    };
    VectorField::new(solve(lap1)?, solve(lap2)?)
}

/// `V` with `Laplacian V = div f` in D1 and `V = 0` on its boundary.
pub fn recover_potential(tf: &TransformField, g: &VLineGeometry) -> Result<ScalarField> {
    let div = recover_div(tf, g)?;
    let r1 = div.grid().r1;
    Ok(solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(div, r1))?.field)
}

/// `W` with `Laplacian W = curl f` in D1 and `W = 0` on its boundary.
pub fn recover_stream(lf: &TransformField, g: &VLineGeometry) -> Result<ScalarField> {
    let curl = recover_curl(lf, g)?;
    let r1 = curl.grid().r1;
    Ok(solve_dirichlet_disc(&PoissonProblem::dirichlet_disc(curl, r1))?.field)
}

/// Signed V-line data `a + cu X1_u s + cv X1_v s` on the part of the data
/// disc where the first derivatives in `a` are valid.
fn signed_data(
    g: &VLineGeometry,
    a: &ScalarField,
    mu: &ScalarField,
    mv: &ScalarField,
    cu: f64,
    cv: f64,
) -> Result<TransformField> {
    let grid = *a.grid();
    let keep = grid.data_radius() - grid.h;
    let (a, mu, mv) = (a.values(), mu.values(), mv.values());
    let values: Vec<f64> = (0..grid.len())
        .map(|k| {
            if grid.point_at(k).norm() <= keep {
                a[k] + cu * mu[k] + cv * mv[k]
            } else {
                0.0
            }
        })
        .collect();
    wrap(TransformKind::Ts, g, ScalarField::from_values_unchecked(grid, values))
}

/// `(X1_u s, X1_v s)` for `s = sign * D_u D_v h / det(v, u)`.
///
/// Since `X1_d D_d = -X_d` for data that decay along the ray, this equals
/// `-sign * (X_u D_v h, X_v D_u h) / det(v, u)`: one derivative of the data
/// followed by a plain beam, rather than a moment of the second derivative.
/// Beyond D2 the forward rays only meet strips of the other branch, where
/// the data are constant along that branch, so truncating at the data disc
/// is exact.
fn mixed_moments(
    data: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
    sign: f64,
) -> Result<(ScalarField, ScalarField)> {
    data.expect_components(1)?;
    let grid = *data.grid();
    let reach = grid.data_radius() - grid.h;
    let h = data.component(0);
    let (u, v) = (g.u(), g.v());
    let dv = directional_derivative(h, v).masked_to_disc(reach);
    let du = directional_derivative(h, u).masked_to_disc(reach);
    let c = -sign / g.det();
    let mu = ScalarField::from_fn_within(grid, reach, |x| c * divergent_beam(&dv, x, u, q));
    let mv = ScalarField::from_fn_within(grid, reach, |x| c * divergent_beam(&du, x, v, q));
    Ok((mu, mv))
}

fn invert_components(
    ts1: &TransformField,
    ts2: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<VectorField> {
    VectorField::new(invert_signed(ts1, g, q)?, invert_signed(ts2, g, q)?)
}

/// The signed V-line data `(T_s f1, T_s f2)` computed from `L f` and `I f`:
///
/// ```text
/// T_s f1 = d1 I f + u2 X1_u curl f - v2 X1_v curl f
/// T_s f2 = d2 I f - u1 X1_u curl f + v1 X1_v curl f
/// ```
pub fn signed_from_li(
    lf: &TransformField,
    if_: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<(TransformField, TransformField)> {
    same_grid(lf, if_)?;
    if_.expect_components(1)?;
    let (mu, mv) = mixed_moments(lf, g, q, 1.0)?;
    let (u, v) = (g.u(), g.v());
    let ts1 = signed_data(g, &partial_x(if_.component(0)), &mu, &mv, u.y(), -v.y())?;
    let ts2 = signed_data(g, &partial_y(if_.component(0)), &mu, &mv, -u.x(), v.x())?;
    Ok((ts1, ts2))
}

/// The signed V-line data `(T_s f1, T_s f2)` computed from `T f` and `J f`:
///
/// ```text
/// T_s f1 = -d2 J f - u1 X1_u div f + v1 X1_v div f
/// T_s f2 =  d1 J f - u2 X1_u div f + v2 X1_v div f
/// ```
pub fn signed_from_tj(
    tf: &TransformField,
    jf: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<(TransformField, TransformField)> {
    same_grid(tf, jf)?;
    jf.expect_components(1)?;
    let (mu, mv) = mixed_moments(tf, g, q, -1.0)?;
    let (u, v) = (g.u(), g.v());
    let ts1 = signed_data(g, &partial_y(jf.component(0)).scaled(-1.0), &mu, &mv, -u.x(), v.x())?;
    let ts2 = signed_data(g, &partial_x(jf.component(0)), &mu, &mv, -u.y(), v.y())?;
    Ok((ts1, ts2))
}

/// Recovers `f` componentwise from `L f` and `I f` through the signed
/// V-line transform.
pub fn recover_field_li(
    lf: &TransformField,
    if_: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<VectorField> {
    let (ts1, ts2) = signed_from_li(lf, if_, g, q)?;
    invert_components(&ts1, &ts2, g, q)
}

/// Recovers `f` componentwise from `T f` and `J f` through the signed
/// V-line transform.
pub fn recover_field_tj(
    tf: &TransformField,
    jf: &TransformField,
    g: &VLineGeometry,
    q: &RayQuadrature,
) -> Result<VectorField> {
    let (ts1, ts2) = signed_from_tj(tf, jf, g, q)?;
    invert_components(&ts1, &ts2, g, q)
}

/// `[h(x) - h(x + delta u) - h(x + delta v) + h(x + delta u + delta v)] / delta^2`,
/// the second difference of `h` around the rhombus spanned by `u` and `v`
/// at `x`. Tends to `D_u D_v h(x)` as `delta -> 0`.
pub fn rhombus_check(hfield: &TransformField, x: Vec2, delta: f64, g: &VLineGeometry) -> Result<f64> {
    hfield.expect_components(1)?;
    if !(delta.is_finite() && delta > 0.0) {
        return Err(Error::Config(format!("rhombus size must be positive, got {delta}")));
    }
    let grid = hfield.grid();
    let (du, dv) = (delta * g.u().vec(), delta * g.v().vec());
    let corners = [x, x + du, x + dv, x + du + dv];
    if corners.iter().any(|p| p.norm() > grid.r2) {
        return Err(Error::RhombusOutsideData(x.x, x.y));
    }
    let h = hfield.component(0);
    let c = h.bilinear(corners[0]) - h.bilinear(corners[1]) - h.bilinear(corners[2]) + h.bilinear(corners[3]);
    Ok(c / (delta * delta))
}
