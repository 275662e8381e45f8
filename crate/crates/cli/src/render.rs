//! Binary PGM/PPM export.
//!
//! Pixel (row, col) shows grid node (ix, iy) = (col, ny - 1 - row), so the
//! image has y pointing up. Scalars map linearly onto gray with zero at
//! mid-gray (128) and the largest |value| at 0 or 255. Vector magnitudes map
//! linearly from black (0) to white at the largest norm. Directions use HSV
//! with hue equal to the angle of the vector (0 degrees red, 120 green, 240
//! blue, counterclockwise from +x), full saturation, and value equal to the
//! normalized magnitude.

use vline_core::field::{ScalarField, VectorField};

fn header(magic: &str, nx: usize, ny: usize) -> Vec<u8> {
    format!("{magic}\n{nx} {ny}\n255\n").into_bytes()
}

fn pixels(nx: usize, ny: usize, mut f: impl FnMut(usize) -> [u8; 3], channels: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(nx * ny * channels);
    for row in 0..ny {
        let iy = ny - 1 - row;
        for ix in 0..nx {
            out.extend_from_slice(&f(iy * nx + ix)[..channels]);
        }
    }
    out
}

fn byte(x: f64) -> u8 {
    x.round().clamp(0.0, 255.0) as u8
}

pub fn scalar_pgm(f: &ScalarField) -> Vec<u8> {
    let g = f.grid();
    let m = f.max_abs();
    let v = f.values();
    let mut out = header("P5", g.nx, g.ny);
    out.extend(pixels(
        g.nx,
        g.ny,
        |k| {
            let s = if m == 0.0 { 0.0 } else { v[k] / m };
            [byte(127.5 + 127.5 * s); 3]
        },
        1,
    ));
    out
}

fn norms(f: &VectorField) -> (Vec<f64>, f64) {
    let (a, b) = (f.component(0).values(), f.component(1).values());
    let n: Vec<f64> = a.iter().zip(b).map(|(x, y)| x.hypot(*y)).collect();
    let m = n.iter().copied().fold(0.0, f64::max);
    (n, m)
}

pub fn magnitude_pgm(f: &VectorField) -> Vec<u8> {
    let g = f.component(0).grid();
    let (n, m) = norms(f);
    let mut out = header("P5", g.nx, g.ny);
    out.extend(pixels(g.nx, g.ny, |k| [byte(if m == 0.0 { 0.0 } else { 255.0 * n[k] / m }); 3], 1));
    out
}

fn hsv(hue_deg: f64, value: f64) -> [u8; 3] {
    let h = hue_deg.rem_euclid(360.0) / 60.0;
    let x = 1.0 - (h % 2.0 - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    [byte(255.0 * value * r), byte(255.0 * value * g), byte(255.0 * value * b)]
}

pub fn direction_ppm(f: &VectorField) -> Vec<u8> {
    let g = f.component(0).grid();
    let (a, b) = (f.component(0).values(), f.component(1).values());
    let (n, m) = norms(f);
    let mut out = header("P6", g.nx, g.ny);
    out.extend(pixels(
        g.nx,
        g.ny,
        |k| {
            let v = if m == 0.0 { 0.0 } else { n[k] / m };
            hsv(b[k].atan2(a[k]).to_degrees(), v)
        },
        3,
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use vline_core::field::Grid2D;
    use vline_core::Direction;

    fn grid() -> Grid2D {
        Grid2D::for_rays(20, 1.0, &[Direction::new(1.0, 0.0).unwrap(), Direction::new(0.0, 1.0).unwrap()]).unwrap()
    }

    #[test]
    fn zero_scalar_is_mid_gray() {
        let img = scalar_pgm(&ScalarField::zeros(grid()));
        let body = &img[img.len() - 400..];
        assert!(body.iter().all(|&p| p == 128));
        assert!(img.starts_with(b"P5\n20 20\n255\n"));
    }

    #[test]
    fn scalar_extremes_hit_black_and_white() {
        let f = ScalarField::from_fn(grid(), |p| p.x);
        let img = scalar_pgm(&f);
        let body = &img[img.len() - 400..];
        assert_eq!(*body.iter().min().unwrap(), 0);
        // x runs from -10h to 9h, so the brightest column is 127.5 * (1 + 9/10)
        assert_eq!(*body.iter().max().unwrap(), 242);
        // the first pixel is the top-left node: smallest x
        assert_eq!(body[0], 0);
    }

    #[test]
    fn primary_hues() {
        assert_eq!(hsv(0.0, 1.0), [255, 0, 0]);
        assert_eq!(hsv(120.0, 1.0), [0, 255, 0]);
        assert_eq!(hsv(240.0, 1.0), [0, 0, 255]);
        assert_eq!(hsv(-120.0, 1.0), [0, 0, 255]);
        assert_eq!(hsv(60.0, 0.0), [0, 0, 0]);
    }
}
