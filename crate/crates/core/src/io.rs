//! File formats.
//!
//! Binary grid files (`VLT1`), all little-endian:
//!
//! ```text
//! "VLT1" u32 nx, u32 ny, f64 h, f64 origin_x, f64 origin_y, f64 r1, f64 r2,
//! u32 ncomp, then ncomp blocks of nx * ny f64 (row-major, x fastest)
//! ```
//!
//! Binary sinogram files (`VLS1`):
//!
//! ```text
//! "VLS1" u32 n_angles, u32 n_offsets, u32 ncomp, f64 ds, f64 angle0,
//! f64 dangle, then ncomp blocks of n_angles * n_offsets f64 (one row per angle)
//! ```
//!
//! Text formats are `key=value` lines; `#` starts a comment.

use std::io::{BufRead, Read, Write};

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField};
use crate::geom::{Direction, Vec2};
use crate::radon::{Sinogram, SinogramLayout};
use crate::star::StarGeometry;
use crate::vline::VLineGeometry;

const GRID_MAGIC: &[u8; 4] = b"VLT1";
const SINO_MAGIC: &[u8; 4] = b"VLS1";
/// Largest accepted value count, to reject corrupt headers before allocating.
const MAX_VALUES: u64 = 1 << 31;

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn get_u32(r: &mut impl Read) -> Result<usize> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(u32::from_le_bytes(b) as usize)
}

fn get_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(truncated)?;
    Ok(f64::from_le_bytes(b))
}

fn get_values(r: &mut impl Read, n: usize) -> Result<Vec<f64>> {
    let mut bytes = vec![0u8; n * 8];
    r.read_exact(&mut bytes).map_err(truncated)?;
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

fn truncated(e: std::io::Error) -> Error {
    if e.kind() == std::io::ErrorKind::UnexpectedEof {
        Error::Format("file ends early".into())
    } else {
        Error::Io(e)
    }
}

fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut m = [0u8; 4];
    r.read_exact(&mut m).map_err(truncated)?;
    if &m != magic {
        return Err(Error::Format(format!(
            "expected magic {:?}, found {:?}",
            String::from_utf8_lossy(magic),
            String::from_utf8_lossy(&m)
        )));
    }
    Ok(())
}

fn expect_end(r: &mut impl Read) -> Result<()> {
    let mut b = [0u8; 1];
    match r.read(&mut b)? {
        0 => Ok(()),
        _ => Err(Error::Format("trailing bytes after the last value".into())),
    }
}

/// Writes one or two fields on a common grid.
pub fn write_vlt1(w: &mut impl Write, comps: &[&ScalarField]) -> Result<()> {
    let first = comps.first().ok_or_else(|| Error::Config("nothing to write".into()))?;
    if comps.len() > 2 {
        return Err(Error::Config(format!("VLT1 holds one or two components, got {}", comps.len())));
    }
    let g = *first.grid();
    if comps.iter().any(|c| *c.grid() != g) {
        return Err(Error::GridMismatch);
    }
    w.write_all(GRID_MAGIC)?;
    put_u32(w, g.nx)?;
    put_u32(w, g.ny)?;
    for v in [g.h, g.origin.x, g.origin.y, g.r1, g.r2] {
        put_f64(w, v)?;
    }
    put_u32(w, comps.len())?;
    for c in comps {
        for &v in c.values() {
            put_f64(w, v)?;
        }
    }
    Ok(())
}

pub fn read_vlt1(r: &mut impl Read) -> Result<Vec<ScalarField>> {
    expect_magic(r, GRID_MAGIC)?;
    let (nx, ny) = (get_u32(r)?, get_u32(r)?);
    let h = get_f64(r)?;
    let origin = Vec2::new(get_f64(r)?, get_f64(r)?);
    let (r1, r2) = (get_f64(r)?, get_f64(r)?);
    let ncomp = get_u32(r)?;
    if !(1..=2).contains(&ncomp) {
        return Err(Error::Format(format!("VLT1 component count must be 1 or 2, got {ncomp}")));
    }
    if (nx as u64) * (ny as u64) * (ncomp as u64) > MAX_VALUES {
        return Err(Error::Format(format!("implausible VLT1 size {nx} x {ny} x {ncomp}")));
    }
    let grid = Grid2D::new(nx, ny, h, origin, r1, r2).map_err(|e| Error::Format(e.to_string()))?;
    let mut comps = Vec::with_capacity(ncomp);
    for _ in 0..ncomp {
        let values = get_values(r, nx * ny)?;
        comps.push(ScalarField::from_values(grid, values).map_err(|e| Error::Format(e.to_string()))?);
    }
    expect_end(r)?;
    Ok(comps)
}

pub fn write_vls1(w: &mut impl Write, sg: &Sinogram) -> Result<()> {
    let l = sg.layout();
    w.write_all(SINO_MAGIC)?;
    put_u32(w, l.n_angles)?;
    put_u32(w, l.n_offsets)?;
    put_u32(w, sg.ncomp())?;
    for v in [l.ds, l.angle0, l.dangle] {
        put_f64(w, v)?;
    }
    for c in sg.components() {
        for &v in c {
            put_f64(w, v)?;
        }
    }
    Ok(())
}

pub fn read_vls1(r: &mut impl Read) -> Result<Sinogram> {
    expect_magic(r, SINO_MAGIC)?;
    let (n_angles, n_offsets, ncomp) = (get_u32(r)?, get_u32(r)?, get_u32(r)?);
    let (ds, angle0, dangle) = (get_f64(r)?, get_f64(r)?, get_f64(r)?);
    if ncomp == 0 || (n_angles as u64) * (n_offsets as u64) * (ncomp as u64) > MAX_VALUES {
        return Err(Error::Format(format!("implausible VLS1 size {n_angles} x {n_offsets} x {ncomp}")));
    }
    let layout = SinogramLayout::new(n_angles, n_offsets, angle0, dangle, ds).map_err(|e| Error::Format(e.to_string()))?;
    let comps = (0..ncomp).map(|_| get_values(r, layout.len())).collect::<Result<Vec<_>>>()?;
    expect_end(r)?;
    Sinogram::new(layout, comps).map_err(|e| Error::Format(e.to_string()))
}

/// `x,y,v1[,v2]` per node, with a header line.
pub fn write_csv(w: &mut impl Write, comps: &[&ScalarField]) -> Result<()> {
    let first = comps.first().ok_or_else(|| Error::Config("nothing to write".into()))?;
    let g = *first.grid();
    if comps.iter().any(|c| *c.grid() != g) {
        return Err(Error::GridMismatch);
    }
    let names: Vec<String> = (1..=comps.len()).map(|i| format!("v{i}")).collect();
    writeln!(w, "x,y,{}", names.join(","))?;
    for k in 0..g.len() {
        let p = g.point_at(k);
        write!(w, "{},{}", p.x, p.y)?;
        for c in comps {
            write!(w, ",{}", c.values()[k])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `key=value` pairs in file order; blank lines and `#` comments skipped.
pub fn parse_key_values(r: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Comma-separated floats.
pub fn parse_floats(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Format(format!("'{}' is not a number", t.trim()))))
        .collect()
}

/// Unit direction from `x,y`. Off-unit input is normalized; the returned
/// flag is set when the length differed from 1 by more than `1e-6`.
pub fn parse_direction(s: &str) -> Result<(Direction, bool)> {
    let v = parse_floats(s)?;
    if v.len() != 2 {
        return Err(Error::Format(format!("expected 'x,y', got '{s}'")));
    }
    let p = Vec2::new(v[0], v[1]);
    let d = Direction::normalized(p).map_err(|_| Error::Format(format!("'{s}' is not a direction")))?;
    Ok((d, (p.norm() - 1.0).abs() > 1e-6))
}

pub fn write_vline_geometry(w: &mut impl Write, g: &VLineGeometry) -> Result<()> {
    writeln!(w, "u={},{}", g.u().x(), g.u().y())?;
    writeln!(w, "v={},{}", g.v().x(), g.v().y())?;
    Ok(())
}

/// Reads `u=ux,uy` and `v=vx,vy`, returning warnings for normalized input.
pub fn read_vline_geometry(r: impl BufRead) -> Result<(VLineGeometry, Vec<String>)> {
    let mut u = None;
    let mut v = None;
    let mut warnings = Vec::new();
    for (k, val) in parse_key_values(r)? {
        let slot = match k.as_str() {
            "u" => &mut u,
            "v" => &mut v,
            other => return Err(Error::Format(format!("unknown geometry key '{other}'"))),
        };
        let (d, off) = parse_direction(&val)?;
        if off {
            warnings.push(format!("{k}={val} normalized to unit length"));
        }
        *slot = Some(d);
    }
    match (u, v) {
        (Some(u), Some(v)) => Ok((VLineGeometry::new(u, v)?, warnings)),
        _ => Err(Error::Format("geometry needs both u and v".into())),
    }
}

pub fn write_star_geometry(w: &mut impl Write, sg: &StarGeometry) -> Result<()> {
    for (g, c) in sg.gammas().iter().zip(sg.weights()) {
        writeln!(w, "ray = {},{},{}", g.x(), g.y(), c)?;
    }
    Ok(())
}

/// Reads `ray = gx,gy,c` lines, returning warnings for normalized rays.
pub fn read_star_geometry(r: impl BufRead) -> Result<(StarGeometry, Vec<String>)> {
    let mut gammas = Vec::new();
    let mut weights = Vec::new();
    let mut warnings = Vec::new();
    for (k, val) in parse_key_values(r)? {
        if k != "ray" {
            return Err(Error::Format(format!("unknown star key '{k}'")));
        }
        let v = parse_floats(&val)?;
        if v.len() != 3 {
            return Err(Error::Format(format!("expected 'gx,gy,c', got '{val}'")));
        }
        let p = Vec2::new(v[0], v[1]);
        let d = Direction::normalized(p).map_err(|_| Error::Format(format!("'{val}' has no direction")))?;
        if (p.norm() - 1.0).abs() > 1e-6 {
            warnings.push(format!("ray {} normalized to unit length", gammas.len()));
        }
        gammas.push(d);
        weights.push(v[2]);
    }
    Ok((StarGeometry::new(gammas, weights)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(17, 16, 0.125, Vec2::new(-1.0, -0.9375), 0.5, 0.7).unwrap()
    }

    #[test]
    fn vlt1_round_trip_is_exact() {
        let g = grid();
        let a = ScalarField::from_fn(g, |p| p.x * 0.1 + p.y);
        let b = ScalarField::from_fn(g, |p| (p.x * p.y).sin());
        let mut buf = Vec::new();
        write_vlt1(&mut buf, &[&a, &b]).unwrap();
        assert_eq!(buf.len(), 4 + 4 * 3 + 8 * 5 + 2 * 17 * 16 * 8);
        let back = read_vlt1(&mut buf.as_slice()).unwrap();
        assert_eq!(back, vec![a, b]);
    }

    #[test]
    fn vlt1_rejects_bad_input() {
        let a = ScalarField::zeros(grid());
        let mut buf = Vec::new();
        write_vlt1(&mut buf, &[&a]).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_vlt1(&mut bad.as_slice()), Err(Error::Format(_))));
        assert!(matches!(read_vlt1(&mut &buf[..buf.len() - 1]), Err(Error::Format(_))));
        let mut long = buf.clone();
        long.push(0);
        assert!(matches!(read_vlt1(&mut long.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn vls1_round_trip_is_exact() {
        let l = SinogramLayout::full_turn(4, 5, 1.0).unwrap();
        let sg = Sinogram::new(l, vec![(0..20).map(f64::from).collect(), vec![0.5; 20]]).unwrap();
        let mut buf = Vec::new();
        write_vls1(&mut buf, &sg).unwrap();
        assert_eq!(read_vls1(&mut buf.as_slice()).unwrap(), sg);
    }

    #[test]
    fn csv_has_one_line_per_node() {
        let a = ScalarField::zeros(grid());
        let mut buf = Vec::new();
        write_csv(&mut buf, &[&a]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 17 * 16 + 1);
        assert_eq!(text.lines().next().unwrap(), "x,y,v1");
    }

    #[test]
    fn geometry_text_round_trips() {
        let g = VLineGeometry::new(Direction::from_angle(0.3), Direction::from_angle(2.0)).unwrap();
        let mut buf = Vec::new();
        write_vline_geometry(&mut buf, &g).unwrap();
        let (back, warn) = read_vline_geometry(buf.as_slice()).unwrap();
        assert_eq!(back, g);
        assert!(warn.is_empty());
        let (_, warn) = read_vline_geometry("u=2,0\nv=0,1 # comment\n".as_bytes()).unwrap();
        assert_eq!(warn.len(), 1);
        assert!(read_vline_geometry("u=1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn star_text_round_trips() {
        let sg = StarGeometry::equiangular(3, 0.1, 1.5).unwrap();
        let mut buf = Vec::new();
        write_star_geometry(&mut buf, &sg).unwrap();
        let (back, warn) = read_star_geometry(buf.as_slice()).unwrap();
        assert_eq!(back, sg);
        assert!(warn.is_empty());
        let (_, warn) = read_star_geometry("ray = 3,0,1\nray=0,1,-1\n".as_bytes()).unwrap();
        assert_eq!(warn.len(), 1);
        assert!(matches!(read_star_geometry("ray = 1,0\n".as_bytes()), Err(Error::Format(_))));
    }
}
