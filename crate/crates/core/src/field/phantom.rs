//! Analytic test fields built from the C2 bump `(1 - rho^2)^3`.

use super::{Grid2D, PlanarFunction, ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::geom::{disc_chord, Vec2};

/// `amplitude * (1 - |x - center|^2 / scale^2)^3` inside its disc, zero
/// outside. Value, gradient and Hessian vanish on the boundary circle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Vec2,
    pub scale: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: Vec2, scale: f64, amplitude: f64) -> Self {
        Bump { center, scale, amplitude }
    }

    /// Unit bump on the unit disc.
    pub fn unit() -> Self {
        Bump::new(Vec2::ZERO, 1.0, 1.0)
    }

    /// `(y, q)` with `y = x - center`, `q = |y|^2 / scale^2`.
    #[inline]
    fn local(&self, p: Vec2) -> (Vec2, f64) {
        let y = p - self.center;
        (y, y.norm_sq() / (self.scale * self.scale))
    }

    pub fn reach(&self) -> f64 {
        self.center.norm() + self.scale
    }

    pub fn value(&self, p: Vec2) -> f64 {
        let (_, q) = self.local(p);
        if q >= 1.0 {
            return 0.0;
        }
        self.amplitude * (1.0 - q).powi(3)
    }

    /// `-6 (1 - q)^2 y / s^2`
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let (y, q) = self.local(p);
        if q >= 1.0 {
            return Vec2::ZERO;
        }
        let s2 = self.scale * self.scale;
        y * (-6.0 * self.amplitude * (1.0 - q).powi(2) / s2)
    }

    /// `12 (1 - q)(3q - 1) / s^2`
    pub fn laplacian(&self, p: Vec2) -> f64 {
        let (_, q) = self.local(p);
        if q >= 1.0 {
            return 0.0;
        }
        let s2 = self.scale * self.scale;
        self.amplitude * 12.0 * (1.0 - q) * (3.0 * q - 1.0) / s2
    }

    /// `48 (2 - 3q) y / s^4`
    pub fn laplacian_gradient(&self, p: Vec2) -> Vec2 {
        let (y, q) = self.local(p);
        if q >= 1.0 {
            return Vec2::ZERO;
        }
        let s4 = self.scale.powi(4);
        y * (self.amplitude * 48.0 * (2.0 - 3.0 * q) / s4)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    /// `f = grad V`
    Potential,
    /// `f = perp(grad W)`
    Solenoidal,
    /// Potential and solenoidal bumps with distinct centers.
    Mixed,
}

impl std::str::FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "potential" => Ok(PhantomKind::Potential),
            "solenoidal" => Ok(PhantomKind::Solenoidal),
            "mixed" => Ok(PhantomKind::Mixed),
            other => Err(Error::Config(format!("unknown phantom kind '{other}'"))),
        }
    }
}

/// Closed-form vector field `grad V + perp(grad W)` with `V`, `W` sums of
/// bumps.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Phantom {
    pub potential: Vec<Bump>,
    pub stream: Vec<Bump>,
}

/// The scalar field `f . d` of a phantom `f`.
#[derive(Debug, Clone, Copy)]
pub struct Projection<'a> {
    phantom: &'a Phantom,
    d: Vec2,
    reach: f64,
}

impl PlanarFunction for Projection<'_> {
    fn value(&self, p: Vec2) -> f64 {
        self.phantom.field(p).dot(self.d)
    }

    fn line_window(&self, p: Vec2, e: Vec2) -> Option<(f64, f64)> {
        disc_chord(p, e, self.reach)
    }
}

impl Phantom {
    /// The standard phantoms. `Mixed` places a potential and a solenoidal
    /// bump of half the scale at `center +- (scale / 2) (cos 35deg, sin 35deg)`.
    pub fn standard(kind: PhantomKind, center: Vec2, scale: f64) -> Self {
        match kind {
            PhantomKind::Potential => Phantom {
                potential: vec![Bump::new(center, scale, 1.0)],
                stream: vec![],
            },
            PhantomKind::Solenoidal => Phantom {
                potential: vec![],
                stream: vec![Bump::new(center, scale, 1.0)],
            },
            PhantomKind::Mixed => {
                let off = Vec2::from_angle(35f64.to_radians()) * (0.5 * scale);
                Phantom {
                    potential: vec![Bump::new(center + off, 0.5 * scale, 1.0)],
                    stream: vec![Bump::new(center - off, 0.5 * scale, 1.0)],
                }
            }
        }
    }

    pub fn bumps(&self) -> impl Iterator<Item = &Bump> {
        self.potential.iter().chain(&self.stream)
    }

    pub fn projection(&self, d: Vec2) -> Projection<'_> {
        Projection { phantom: self, d, reach: self.reach() }
    }

    /// Largest `|center| + scale` over all bumps.
    pub fn reach(&self) -> f64 {
        self.bumps().map(Bump::reach).fold(0.0, f64::max)
    }

    pub fn field(&self, p: Vec2) -> Vec2 {
        let mut acc = Vec2::ZERO;
        for b in &self.potential {
            acc = acc + b.gradient(p);
        }
        for b in &self.stream {
            acc = acc + b.gradient(p).perp();
        }
        acc
    }

    /// `div f = Laplacian V`
    pub fn div(&self, p: Vec2) -> f64 {
        self.potential.iter().map(|b| b.laplacian(p)).sum()
    }

    /// `curl f = Laplacian W`
    pub fn curl(&self, p: Vec2) -> f64 {
        self.stream.iter().map(|b| b.laplacian(p)).sum()
    }

    pub fn grad_div(&self, p: Vec2) -> Vec2 {
        self.potential.iter().fold(Vec2::ZERO, |a, b| a + b.laplacian_gradient(p))
    }

    pub fn grad_curl(&self, p: Vec2) -> Vec2 {
        self.stream.iter().fold(Vec2::ZERO, |a, b| a + b.laplacian_gradient(p))
    }

    pub fn potential_value(&self, p: Vec2) -> f64 {
        self.potential.iter().map(|b| b.value(p)).sum()
    }

    pub fn stream_value(&self, p: Vec2) -> f64 {
        self.stream.iter().map(|b| b.value(p)).sum()
    }

    /// `Laplacian f_i = d_i div f + (-d_2, d_1)_i curl f`
    pub fn field_laplacian(&self, p: Vec2) -> Vec2 {
        let gd = self.grad_div(p);
        let gc = self.grad_curl(p);
        Vec2::new(gd.x - gc.y, gd.y + gc.x)
    }

    /// Samples the field and its oracles. Fails if a bump leaves D1.
    pub fn sample(&self, grid: Grid2D) -> Result<PhantomFields> {
        for b in self.bumps() {
            if !(b.scale > 0.0) || b.reach() > grid.r1 * (1.0 + 1e-12) {
                return Err(Error::SupportLeak { reach: b.reach(), r1: grid.r1 });
            }
        }
        Ok(PhantomFields {
            field: VectorField::from_fn(grid, |p| self.field(p)),
            div: ScalarField::from_fn(grid, |p| self.div(p)),
            curl: ScalarField::from_fn(grid, |p| self.curl(p)),
            potential: ScalarField::from_fn(grid, |p| self.potential_value(p)),
            stream: ScalarField::from_fn(grid, |p| self.stream_value(p)),
            analytic: self.clone(),
        })
    }
}

/// A sampled phantom with its closed-form oracle fields.
#[derive(Debug, Clone)]
pub struct PhantomFields {
    pub field: VectorField,
    pub div: ScalarField,
    pub curl: ScalarField,
    /// `V` with `f = grad V + perp(grad W)`.
    pub potential: ScalarField,
    /// `W` with `f = grad V + perp(grad W)`.
    pub stream: ScalarField,
    pub analytic: Phantom,
}

pub fn make_phantom(grid: Grid2D, kind: PhantomKind, center: Vec2, scale: f64) -> Result<PhantomFields> {
    Phantom::standard(kind, center, scale).sample(grid)
}
