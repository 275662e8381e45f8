//! Relative error norms of a reconstruction against an oracle, over D1.

use vline_core::field::ScalarField;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Errors {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Relative L1, L2 and Linf errors over the open disc of radius `radius`.
/// A zero oracle leaves the error absolute.
pub fn errors_in_disc(rec: &ScalarField, oracle: &ScalarField, radius: f64) -> CliResult<Errors> {
    if rec.grid() != oracle.grid() {
        return Err(CliError::Config("reconstruction and oracle live on different grids".into()));
    }
    let g = rec.grid();
    let r2 = radius * radius;
    let (mut d1, mut d2, mut dinf, mut n1, mut n2, mut ninf) = (0.0, 0.0, 0.0f64, 0.0, 0.0, 0.0f64);
    for (i, (a, b)) in rec.values().iter().zip(oracle.values()).enumerate() {
        if g.point_at(i).norm_sq() >= r2 {
            continue;
        }
        let d = (a - b).abs();
        d1 += d;
        d2 += d * d;
        dinf = dinf.max(d);
        n1 += b.abs();
        n2 += b * b;
        ninf = ninf.max(b.abs());
    }
    let rel = |num: f64, den: f64| if den == 0.0 { num } else { num / den };
    Ok(Errors { l1: rel(d1, n1), l2: rel(d2.sqrt(), n2.sqrt()), linf: rel(dinf, ninf) })
}

/// Report lines `component<k>.rel_<norm>=<value>`, one block per component.
pub fn report_lines(recs: &[&ScalarField], oracles: &[ScalarField], radius: f64) -> CliResult<Vec<String>> {
    if recs.len() != oracles.len() {
        return Err(CliError::Config(format!(
            "oracle has {} components, reconstruction has {}",
            oracles.len(),
            recs.len()
        )));
    }
    let mut lines = vec![format!("radius={radius}")];
    for (k, (r, o)) in recs.iter().zip(oracles).enumerate() {
        let e = errors_in_disc(r, o, radius)?;
        lines.push(format!("component{}.rel_l1={:e}", k + 1, e.l1));
        lines.push(format!("component{}.rel_l2={:e}", k + 1, e.l2));
        lines.push(format!("component{}.rel_linf={:e}", k + 1, e.linf));
    }
    Ok(lines)
}
