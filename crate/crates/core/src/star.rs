//! Weighted star transforms of vector fields and their inversion.
//!
//! A star with rays `gamma_i` and weights `c_i` maps `f` to
//!
//! ```text
//! S f = sum_i c_i X_{gamma_i} (f . gamma_i, f . gamma_i^⊥)
//! ```
//!
//! With `gamma(psi) = -sum_i c_i gamma_i / (psi . gamma_i)` the Radon
//! transform satisfies `d/ds R(S f)(psi, s) = (gamma . R f, gamma^⊥ . R f)`,
//! which [`q_of_psi`] inverts wherever `gamma(psi) != 0`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::beam::{divergent_beam, over_data_disc, RayQuadrature};
use crate::error::{Error, Result};
use crate::field::{Grid2D, Phantom, PlanarFunction, VectorField};
use crate::geom::{Direction, Vec2};
use crate::radon::{fbp_inverse, radon_project, sinogram_dds, RampWindow, Sinogram, SinogramLayout, MIN_FBP_ANGLES};
use crate::transform::{TransformField, TransformKind};

/// `|psi . gamma_i|` below this puts `psi` in Z1.
pub const Z1_TOLERANCE: f64 = 1e-9;
/// `|gamma(psi)|` below this puts `psi` in Z2.
pub const Z2_TOLERANCE: f64 = 1e-9;
const PAIR_TOLERANCE: f64 = 1e-10;
const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StarGeometry {
    gammas: Vec<Direction>,
    weights: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StarClass {
    /// Rays and weights cancel in antipodal pairs; the transform has a kernel.
    Symmetric,
    Invertible,
}

impl StarGeometry {
    pub fn new(gammas: Vec<Direction>, weights: Vec<f64>) -> Result<Self> {
        if gammas.len() != weights.len() {
            return Err(Error::InvalidStar(format!(
                "{} rays but {} weights",
                gammas.len(),
                weights.len()
            )));
        }
        if gammas.len() < 2 {
            return Err(Error::InvalidStar("a star needs at least two rays".into()));
        }
        if let Some(c) = weights.iter().find(|c| !(c.is_finite() && **c != 0.0)) {
            return Err(Error::InvalidStar(format!("weights must be finite and nonzero, got {c}")));
        }
        for (i, a) in gammas.iter().enumerate() {
            for (j, b) in gammas.iter().enumerate().skip(i + 1) {
                if (a.vec() - b.vec()).norm() <= PAIR_TOLERANCE {
                    return Err(Error::InvalidStar(format!("rays {i} and {j} coincide")));
                }
            }
        }
        Ok(StarGeometry { gammas, weights })
    }

    /// `m` rays at angles `offset + 2 pi k / m`, all with weight `c`.
    pub fn equiangular(m: usize, offset: f64, c: f64) -> Result<Self> {
        let gammas = (0..m).map(|k| Direction::from_angle(offset + TAU * k as f64 / m as f64)).collect();
        Self::new(gammas, vec![c; m])
    }

    pub fn m(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[Direction] {
        &self.gammas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn weight_scale(&self) -> f64 {
        self.weights.iter().map(|c| c.abs()).sum()
    }

    /// Pairing test: `m` even and the rays split into pairs with
    /// `gamma_j = -gamma_i` and `c_j = -c_i`.
    pub fn classify(&self) -> StarClass {
        let m = self.m();
        if m % 2 == 1 {
            return StarClass::Invertible;
        }
        let tol = PAIR_TOLERANCE * self.weights.iter().fold(0.0f64, |a, c| a.max(c.abs()));
        let mut used = vec![false; m];
        for i in 0..m {
            if used[i] {
                continue;
            }
            let partner = (i + 1..m).find(|&j| {
                !used[j]
                    && (self.gammas[i].vec() + self.gammas[j].vec()).norm() <= PAIR_TOLERANCE
                    && (self.weights[i] + self.weights[j]).abs() <= tol
            });
            match partner {
                Some(j) => {
                    used[i] = true;
                    used[j] = true;
                }
                None => return StarClass::Invertible,
            }
        }
        StarClass::Symmetric
    }

    /// Coefficients of `P(psi) = sum_i c_i gamma_i prod_{j != i} (psi . gamma_j)`,
    /// a homogeneous polynomial of degree `m - 1`. Entry `k` of each
    /// component multiplies `psi_1^(m-1-k) psi_2^k`.
    pub fn p_coefficients(&self) -> [Vec<f64>; 2] {
        let m = self.m();
        let mut out = [vec![0.0; m], vec![0.0; m]];
        for i in 0..m {
            let mut poly = vec![1.0];
            for (j, g) in self.gammas.iter().enumerate() {
                if j == i {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (k, a) in poly.iter().enumerate() {
                    next[k] += a * g.x();
                    next[k + 1] += a * g.y();
                }
                poly = next;
            }
            let ci = self.weights[i];
            let g = self.gammas[i];
            for (k, a) in poly.iter().enumerate() {
                out[0][k] += ci * g.x() * a;
                out[1][k] += ci * g.y() * a;
            }
        }
        out
    }

    /// `P(psi)` evaluated directly from its product form.
    pub fn p_of(&self, psi: Vec2) -> Vec2 {
        let dots: Vec<f64> = self.gammas.iter().map(|g| psi.dot(g.vec())).collect();
        let mut acc = Vec2::ZERO;
        for (i, (g, c)) in self.gammas.iter().zip(&self.weights).enumerate() {
            let prod: f64 = dots.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| d).product();
            acc = acc + g.vec() * (c * prod);
        }
        acc
    }

    /// Coefficient test: `P` vanishes identically.
    pub fn p_vanishes(&self) -> bool {
        let [a, b] = self.p_coefficients();
        let norm = a.iter().chain(&b).map(|x| x * x).sum::<f64>().sqrt();
        norm <= PAIR_TOLERANCE * self.weight_scale()
    }
}

/// `gamma(psi) = -sum_i c_i gamma_i / (psi . gamma_i)`.
pub fn gamma_of_psi(sg: &StarGeometry, psi: Direction) -> Result<Vec2> {
    let p = psi.vec();
    let mut acc = Vec2::ZERO;
    for (index, (g, c)) in sg.gammas.iter().zip(&sg.weights).enumerate() {
        let dot = p.dot(g.vec());
        if dot.abs() < Z1_TOLERANCE {
            return Err(Error::SingularType1 { index, dot });
        }
        acc = acc - g.vec() * (c / dot);
    }
    Ok(acc)
}

/// `Q(psi)`, the inverse of the matrix with rows `gamma(psi)` and
/// `gamma(psi)^⊥`: `(1 / |gamma|^2) [[g1, -g2], [g2, g1]]`.
pub fn q_of_psi(sg: &StarGeometry, psi: Direction) -> Result<[[f64; 2]; 2]> {
    let g = gamma_of_psi(sg, psi)?;
    let n2 = g.norm_sq();
    if n2.sqrt() < Z2_TOLERANCE {
        return Err(Error::SingularType2 { norm: n2.sqrt() });
    }
    Ok([[g.x / n2, -g.y / n2], [g.y / n2, g.x / n2]])
}

/// Directions where the inversion formula is singular, as angles in `[0, 2 pi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularDirections {
    /// `psi . gamma_i = 0`; two angles per ray, sorted, repeated when rays
    /// are antipodal.
    pub z1: Vec<f64>,
    /// `gamma(psi) = 0` away from Z1, sorted.
    pub z2: Vec<f64>,
    /// Set when `P` vanishes identically, so that every direction is singular.
    pub degenerate: bool,
}

impl SingularDirections {
    /// Angular distance from `angle` to the nearest singular direction.
    pub fn distance(&self, angle: f64) -> f64 {
        self.z1
            .iter()
            .chain(&self.z2)
            .map(|z| {
                let d = (angle - z).rem_euclid(TAU);
                d.min(TAU - d)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn psi_at(theta: f64) -> Vec2 {
    Vec2::new(theta.cos(), theta.sin())
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    while b - a > ROOT_TOLERANCE {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > ROOT_TOLERANCE {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Z1 from orthogonality; Z2 from sign changes of either component of `P`
/// and local minima of `|P|` on `samples` equally spaced angles, refined to
/// `1e-12` and kept when `|gamma(psi)|` re-evaluates below the Z2 tolerance.
pub fn singular_directions(sg: &StarGeometry, samples: usize) -> SingularDirections {
    let mut z1: Vec<f64> = sg
        .gammas
        .iter()
        .flat_map(|g| {
            let a = g.angle();
            [(a + 0.5 * PI).rem_euclid(TAU), (a + 1.5 * PI).rem_euclid(TAU)]
        })
        .collect();
    z1.sort_by(f64::total_cmp);
    if sg.p_vanishes() {
        return SingularDirections { z1, z2: Vec::new(), degenerate: true };
    }
    let n = samples.max(16);
    let dt = TAU / n as f64;
    let p = |t: f64| sg.p_of(psi_at(t));
    let vals: Vec<Vec2> = (0..=n).map(|k| p(k as f64 * dt)).collect();
    let mut candidates = Vec::new();
    for k in 0..n {
        let (a, b) = (k as f64 * dt, (k + 1) as f64 * dt);
        for comp in 0..2 {
            let pick = |v: Vec2| if comp == 0 { v.x } else { v.y };
            let (fa, fb) = (pick(vals[k]), pick(vals[k + 1]));
            if fa == 0.0 {
                candidates.push(a);
            } else if (fa > 0.0) != (fb > 0.0) && fb != 0.0 {
                candidates.push(bisect(|t| pick(p(t)), a, b));
            }
        }
        let prev = vals[(k + n - 1) % n].norm();
        let (cur, next) = (vals[k].norm(), vals[k + 1].norm());
        if cur <= prev && cur <= next {
            candidates.push(golden_min(|t| p(t).norm(), a - dt, a + dt));
        }
    }
    let mut z2: Vec<f64> = Vec::new();
    for t in candidates {
        let t = t.rem_euclid(TAU);
        let psi = Direction::from_angle(t);
        let Ok(g) = gamma_of_psi(sg, psi) else { continue };
        if g.norm() > Z2_TOLERANCE {
            continue;
        }
        let near = |z: &f64| {
            let d = (t - z).rem_euclid(TAU);
            d.min(TAU - d) < 1e-9
        };
        if !z2.iter().any(near) {
            z2.push(t);
        }
    }
    z2.sort_by(f64::total_cmp);
    SingularDirections { z1, z2, degenerate: false }
}

fn star_transform<F, P>(sg: &StarGeometry, grid: Grid2D, q: &RayQuadrature, project: P) -> Result<TransformField>
where
    F: PlanarFunction,
    P: Fn(Vec2) -> F,
{
    grid.check_rays(&sg.gammas)?;
    let along: Vec<F> = sg.gammas.iter().map(|g| project(g.vec())).collect();
    let across: Vec<F> = sg.gammas.iter().map(|g| project(g.vec().perp())).collect();
    let sum = |fs: &[F]| {
        over_data_disc(grid, |x| {
            sg.gammas.iter().zip(&sg.weights).zip(fs).map(|((g, c), f)| c * divergent_beam(f, x, *g, q)).sum()
        })
    };
    TransformField::new(TransformKind::Star, sg.gammas.clone(), vec![sum(&along), sum(&across)])
}

/// `S f` of a grid field, sampled on the data disc.
pub fn forward_star(f: &VectorField, sg: &StarGeometry, q: &RayQuadrature) -> Result<TransformField> {
    star_transform(sg, *f.grid(), q, |d| f.dot(d))
}

/// `S f` of an analytic phantom, integrating the closed-form field.
pub fn forward_star_phantom(
    phantom: &Phantom,
    grid: Grid2D,
    sg: &StarGeometry,
    q: &RayQuadrature,
) -> Result<TransformField> {
    if phantom.reach() > grid.r1 * (1.0 + 1e-12) {
        return Err(Error::SupportLeak { reach: phantom.reach(), r1: grid.r1 });
    }
    star_transform(sg, grid, q, |d| phantom.projection(d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarInversion {
    /// Angles evenly covering `[0, 2 pi)`.
    pub n_angles: usize,
    /// Odd offset count; `None` picks a spacing of one grid cell.
    pub n_offsets: Option<usize>,
    /// Half-width in radians of the band dropped around each singular direction.
    pub guard: f64,
    pub window: RampWindow,
    /// Samples used to locate Z2.
    pub z2_samples: usize,
}

impl Default for StarInversion {
    fn default() -> Self {
        StarInversion {
            n_angles: 360,
            n_offsets: None,
            guard: 2f64.to_radians(),
            window: RampWindow::RamLak,
            z2_samples: 4096,
        }
    }
}

/// Intermediate sinograms of the star inversion.
#[derive(Debug, Clone)]
pub struct StarSinograms {
    /// `d/ds R(S f)`, two components. Rows of dropped angles are zero.
    pub dds: Sinogram,
    /// `Q d/ds R(S f) = R f`, two components, dropped rows refilled.
    pub radon: Sinogram,
    /// Angles inside a guard band.
    pub dropped: Vec<bool>,
    /// `|gamma(psi)|` per angle, zero where dropped.
    pub gamma_norm: Vec<f64>,
}

fn full_turn_layout(sf: &TransformField, opts: &StarInversion) -> Result<SinogramLayout> {
    let grid = sf.grid();
    let n_offsets = opts.n_offsets.unwrap_or_else(|| SinogramLayout::offsets_for(grid.r2, grid.h));
    SinogramLayout::full_turn(opts.n_angles, n_offsets, grid.r2)
}

fn check_star_data(sf: &TransformField, sg: &StarGeometry) -> Result<()> {
    if sf.kind() != TransformKind::Star {
        return Err(Error::Config(format!("expected star data, got {}", sf.kind().name())));
    }
    sf.expect_components(2)?;
    if sf.branches() != sg.gammas() {
        return Err(Error::Config("star data were computed for different rays".into()));
    }
    if sg.classify() == StarClass::Symmetric {
        return Err(Error::NotInvertible);
    }
    Ok(())
}

/// Linear interpolation in angle over dropped rows, wrapping around the full turn.
fn refill(values: &mut [f64], dropped: &[bool], n_offsets: usize) -> Result<()> {
    let n = dropped.len();
    let kept: Vec<usize> = (0..n).filter(|&i| !dropped[i]).collect();
    if kept.is_empty() {
        return Err(Error::Config("every angle falls inside a guard band".into()));
    }
    for i in (0..n).filter(|&i| dropped[i]) {
        let next = kept.iter().copied().find(|&k| k > i).unwrap_or(kept[0] + n);
        let prev = kept.iter().rev().copied().find(|&k| k < i).map_or(kept[kept.len() - 1] as isize - n as isize, |k| k as isize);
        let (a, b) = (prev.rem_euclid(n as isize) as usize, next % n);
        let t = (i as isize - prev) as f64 / (next as isize - prev) as f64;
        for j in 0..n_offsets {
            values[i * n_offsets + j] = (1.0 - t) * values[a * n_offsets + j] + t * values[b * n_offsets + j];
        }
    }
    Ok(())
}

/// Radon data of `S f` (integrated along the strips beyond D2), their
/// offset derivative, and `R f` recovered through `Q(psi)`.
pub fn star_sinograms(
    sf: &TransformField,
    sg: &StarGeometry,
    opts: &StarInversion,
    q: &RayQuadrature,
) -> Result<StarSinograms> {
    check_star_data(sf, sg)?;
    let layout = full_turn_layout(sf, opts)?;
    let sing = singular_directions(sg, opts.z2_samples);
    let dropped: Vec<bool> = (0..layout.n_angles).map(|i| sing.distance(layout.angle(i)) < opts.guard).collect();
    let survivors = dropped.iter().filter(|d| !**d).count();
    if survivors < MIN_FBP_ANGLES {
        return Err(Error::Config(format!(
            "only {survivors} angles survive the guard bands, need {MIN_FBP_ANGLES}"
        )));
    }
    let kept: Vec<usize> = (0..layout.n_angles).filter(|&i| !dropped[i]).collect();
    let (e0, e1) = (sf.extension(0)?, sf.extension(1)?);
    let n = layout.n_offsets;
    // project only the surviving angles
    let rows: Vec<[Vec<f64>; 2]> = kept
        .par_iter()
        .map(|&i| {
            let one = SinogramLayout::new(1, n, layout.angle(i), layout.dangle, layout.ds).expect("valid row layout");
            let sino = radon_project(&[&e0, &e1], &one, q);
            let d = sinogram_dds(&sino);
            [d.component(0).to_vec(), d.component(1).to_vec()]
        })
        .collect();
    let mut dds = [vec![0.0; layout.len()], vec![0.0; layout.len()]];
    let mut rf = [vec![0.0; layout.len()], vec![0.0; layout.len()]];
    let mut gamma_norm = vec![0.0; layout.n_angles];
    for (&i, [d0, d1]) in kept.iter().zip(&rows) {
        let psi = Direction::from_angle(layout.angle(i));
        let qm = q_of_psi(sg, psi)?;
        gamma_norm[i] = gamma_of_psi(sg, psi)?.norm();
        for j in 0..n {
            let k = i * n + j;
            dds[0][k] = d0[j];
            dds[1][k] = d1[j];
            rf[0][k] = qm[0][0] * d0[j] + qm[0][1] * d1[j];
            rf[1][k] = qm[1][0] * d0[j] + qm[1][1] * d1[j];
        }
    }
    for c in &mut rf {
        refill(c, &dropped, n)?;
    }
    let [a, b] = dds;
    let [c, d] = rf;
    Ok(StarSinograms {
        dds: Sinogram::new(layout, vec![a, b])?,
        radon: Sinogram::new(layout, vec![c, d])?,
        dropped,
        gamma_norm,
    })
}

/// Recovers `f` from `S f`: componentwise `R f` through `Q(psi)`, then
/// filtered backprojection of each component.
pub fn invert_star(
    sf: &TransformField,
    sg: &StarGeometry,
    opts: &StarInversion,
    q: &RayQuadrature,
) -> Result<VectorField> {
    let s = star_sinograms(sf, sg, opts, q)?;
    let grid = *sf.grid();
    let f1 = fbp_inverse(&s.radon.split(0), grid, opts.window)?;
    let f2 = fbp_inverse(&s.radon.split(1), grid, opts.window)?;
    VectorField::new(f1.masked_to_disc(grid.r1), f2.masked_to_disc(grid.r1))
}
