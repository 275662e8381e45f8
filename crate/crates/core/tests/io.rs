use std::io::Cursor;

use proptest::prelude::*;
use vline_core::field::{Grid2D, ScalarField};
use vline_core::io::{
    parse_direction, parse_key_values, read_star_geometry, read_vline_geometry, read_vls1, read_vlt1,
    write_csv, write_star_geometry, write_vline_geometry, write_vls1, write_vlt1,
};
use vline_core::radon::{Sinogram, SinogramLayout};
use vline_core::star::StarGeometry;
use vline_core::vline::VLineGeometry;
use vline_core::{Direction, Error, Vec2};

fn grid() -> Grid2D {
    Grid2D::new(17, 16, 0.125, Vec2::new(-1.0, -0.9375), 0.5, 0.7).unwrap()
}

#[test]
fn truncated_and_padded_grids_are_rejected() {
    let f = ScalarField::from_fn(grid(), |p| p.x);
    let mut buf = Vec::new();
    write_vlt1(&mut buf, &[&f]).unwrap();
    let short = &buf[..buf.len() - 3];
    assert!(matches!(read_vlt1(&mut Cursor::new(short)), Err(Error::Format(_))));
    let mut long = buf.clone();
    long.push(0);
    assert!(matches!(read_vlt1(&mut Cursor::new(long)), Err(Error::Format(_))));
    let mut bad = buf;
    bad[0] = b'X';
    assert!(matches!(read_vlt1(&mut Cursor::new(bad)), Err(Error::Format(_))));
}

#[test]
fn csv_has_a_header_and_one_row_per_node() {
    let f = ScalarField::from_fn(grid(), |p| p.y);
    let mut buf = Vec::new();
    write_csv(&mut buf, &[&f, &f]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,y,v1,v2"));
    assert_eq!(lines.count(), grid().len());
}

#[test]
fn key_values_skip_comments() {
    let text = "# header\nu = 1,0\n\n v=0,1 # trailing\n";
    let kv = parse_key_values(Cursor::new(text)).unwrap();
    assert_eq!(kv, vec![("u".into(), "1,0".into()), ("v".into(), "0,1".into())]);
    assert!(parse_key_values(Cursor::new("novalue\n")).is_err());
}

#[test]
fn off_unit_directions_are_normalized_with_a_warning() {
    let (d, warn) = parse_direction("3,4").unwrap();
    assert!(warn);
    assert!((d.x() - 0.6).abs() < 1e-15 && (d.y() - 0.8).abs() < 1e-15);
    let (g, warnings) = read_vline_geometry(Cursor::new("u=2,0\nv=0,1\n")).unwrap();
    assert_eq!(g.u(), Direction::new(1.0, 0.0).unwrap());
    assert_eq!(warnings.len(), 1);
    assert!(read_vline_geometry(Cursor::new("u=1,0\n")).is_err());
    assert!(matches!(read_vline_geometry(Cursor::new("u=1,0\nv=1,0\n")), Err(Error::DegenerateGeometry { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn grid_files_round_trip(vals in prop::collection::vec(-1e6f64..1e6, 17 * 16), two in any::<bool>()) {
        let f = ScalarField::from_values(grid(), vals.clone()).unwrap();
        let g = f.scaled(-0.5);
        let comps: Vec<&ScalarField> = if two { vec![&f, &g] } else { vec![&f] };
        let mut buf = Vec::new();
        write_vlt1(&mut buf, &comps).unwrap();
        let back = read_vlt1(&mut Cursor::new(buf)).unwrap();
        prop_assert_eq!(back.len(), comps.len());
        for (a, b) in back.iter().zip(comps) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn sinogram_files_round_trip(na in 1usize..6, no in 1usize..5, vals in prop::collection::vec(-10.0f64..10.0, 60)) {
        let no = 2 * no + 1;
        let l = SinogramLayout::half_turn(na, no, 1.3).unwrap();
        let sg = Sinogram::new(l, vec![vals[..l.len()].to_vec()]).unwrap();
        let mut buf = Vec::new();
        write_vls1(&mut buf, &sg).unwrap();
        prop_assert_eq!(read_vls1(&mut Cursor::new(buf)).unwrap(), sg);
    }

    #[test]
    fn geometry_files_round_trip(a in 0.0f64..6.28, b in 0.3f64..2.8, weights in prop::collection::vec(0.1f64..3.0, 4)) {
        let g = VLineGeometry::new(Direction::from_angle(a), Direction::from_angle(a + b)).unwrap();
        let mut buf = Vec::new();
        write_vline_geometry(&mut buf, &g).unwrap();
        let (back, warnings) = read_vline_geometry(Cursor::new(buf)).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert!((back.u().vec() - g.u().vec()).norm() < 1e-15);
        prop_assert!((back.v().vec() - g.v().vec()).norm() < 1e-15);

        let sg = StarGeometry::new(
            (0..4).map(|i| Direction::from_angle(a + i as f64 * 1.4)).collect(),
            weights.clone(),
        ).unwrap();
        let mut buf = Vec::new();
        write_star_geometry(&mut buf, &sg).unwrap();
        let (back, warnings) = read_star_geometry(Cursor::new(buf)).unwrap();
        prop_assert!(warnings.is_empty());
        prop_assert_eq!(back.weights(), sg.weights());
        for (x, y) in back.gammas().iter().zip(sg.gammas()) {
            prop_assert!((x.vec() - y.vec()).norm() < 1e-15);
        }
    }
}
