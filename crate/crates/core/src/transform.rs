//! Sampled transform data and their extension beyond the data disc.
//!
//! Transform values are computed at the nodes of the data disc D2. Outside
//! D2 at most one ray of a vertex meets the support disc D1, and the value
//! of a divergent-beam transform does not change while the vertex slides
//! along that ray. [`StripExtension`] uses this to evaluate the data
//! anywhere in the plane.

use crate::error::{Error, Result};
use crate::field::{PlanarFunction, ScalarField};
use crate::geom::{disc_chord, Direction, Vec2};

/// Largest parameter distance, in units of `r2`, that a line window is
/// allowed to cover. Only lines nearly parallel to a strip get this long.
const WINDOW_CAP: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformKind {
    L,
    T,
    I,
    J,
    /// Signed V-line transform of a scalar.
    Ts,
    /// Two-component star transform.
    Star,
    /// Divergent beam of a scalar along one direction.
    Beam,
}

impl TransformKind {
    /// Whether the data are constant along the strips. The first-moment
    /// transforms are affine there, not constant.
    pub fn extends_along_strips(self) -> bool {
        !matches!(self, TransformKind::I | TransformKind::J)
    }

    pub fn name(self) -> &'static str {
        match self {
            TransformKind::L => "L",
            TransformKind::T => "T",
            TransformKind::I => "I",
            TransformKind::J => "J",
            TransformKind::Ts => "signed",
            TransformKind::Star => "star",
            TransformKind::Beam => "beam",
        }
    }
}

/// Transform samples on the nodes of the data disc (zero elsewhere),
/// together with the ray directions that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformField {
    kind: TransformKind,
    branches: Vec<Direction>,
    components: Vec<ScalarField>,
}

impl TransformField {
    pub fn new(kind: TransformKind, branches: Vec<Direction>, components: Vec<ScalarField>) -> Result<Self> {
        let first = components
            .first()
            .ok_or_else(|| Error::Config("transform field needs at least one component".into()))?;
        if components.iter().any(|c| c.grid() != first.grid()) {
            return Err(Error::GridMismatch);
        }
        if branches.is_empty() {
            return Err(Error::Config("transform field needs at least one branch".into()));
        }
        Ok(TransformField { kind, branches, components })
    }

    pub fn kind(&self) -> TransformKind {
        self.kind
    }

    pub fn branches(&self) -> &[Direction] {
        &self.branches
    }

    pub fn grid(&self) -> &crate::field::Grid2D {
        self.components[0].grid()
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &ScalarField {
        &self.components[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.components
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.components
    }

    pub fn scaled(&self, a: f64) -> TransformField {
        TransformField {
            kind: self.kind,
            branches: self.branches.clone(),
            components: self.components.iter().map(|c| c.scaled(a)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(ScalarField::max_abs).fold(0.0, f64::max)
    }

    pub(crate) fn expect_components(&self, n: usize) -> Result<()> {
        if self.ncomp() != n {
            return Err(Error::Config(format!(
                "{} data must have {n} component(s), got {}",
                self.kind.name(),
                self.ncomp()
            )));
        }
        Ok(())
    }

    /// Component `i` as a function on the whole plane.
    pub fn extension(&self, i: usize) -> Result<StripExtension<'_>> {
        if !self.kind.extends_along_strips() {
            return Err(Error::Config(format!(
                "{} data are not constant along strips and cannot be extended",
                self.kind.name()
            )));
        }
        let grid = self.grid();
        grid.check_rays(&self.branches)?;
        Ok(StripExtension {
            data: &self.components[i],
            branches: &self.branches,
            r1: grid.r1,
            r2: grid.r2,
        })
    }
}

/// Transform data inside D2, continued outside D2 as constant along the
/// strip of the one branch whose ray still meets D1 (zero if none does).
#[derive(Debug, Clone, Copy)]
pub struct StripExtension<'a> {
    data: &'a ScalarField,
    branches: &'a [Direction],
    r1: f64,
    r2: f64,
}

impl StripExtension<'_> {
    /// Branch whose ray from `p` meets the open disc D1, for `|p| > r1`.
    fn hitting_branch(&self, p: Vec2) -> Option<Vec2> {
        self.branches.iter().map(|d| d.vec()).find(|&d| {
            p.dot(d) < 0.0 && p.dot(d.perp()).abs() < self.r1
        })
    }
}

impl PlanarFunction for StripExtension<'_> {
    fn value(&self, p: Vec2) -> f64 {
        if p.norm_sq() <= self.r2 * self.r2 {
            return self.data.bilinear(p);
        }
        match self.hitting_branch(p) {
            Some(d) => match disc_chord(p, d, self.r2) {
                Some((t_in, _)) => self.data.bilinear(p + t_in * d),
                None => 0.0,
            },
            None => 0.0,
        }
    }

    fn line_window(&self, p: Vec2, e: Vec2) -> Option<(f64, f64)> {
        let cap = WINDOW_CAP * self.r2;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        if let Some((a, b)) = disc_chord(p, e, self.r2) {
            lo = a;
            hi = b;
        }
        for d in self.branches.iter().map(|d| d.vec()) {
            let n = d.perp();
            // band |x . n| < r1
            let (c0, c1) = (p.dot(n), e.dot(n));
            let (mut a, mut b) = if c1.abs() < 1e-15 {
                if c0.abs() >= self.r1 {
                    continue;
                }
                (-cap, cap)
            } else {
                let t1 = (-self.r1 - c0) / c1;
                let t2 = (self.r1 - c0) / c1;
                (t1.min(t2), t1.max(t2))
            };
            // upstream half-plane x . d < 0
            let (h0, h1) = (p.dot(d), e.dot(d));
            if h1.abs() < 1e-15 {
                if h0 >= 0.0 {
                    continue;
                }
            } else if h1 > 0.0 {
                b = b.min(-h0 / h1);
            } else {
                a = a.max(-h0 / h1);
            }
            if a < b {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        let (lo, hi) = (lo.max(-cap), hi.min(cap));
        (lo < hi).then_some((lo, hi))
    }
}
