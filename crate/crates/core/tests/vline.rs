use proptest::prelude::*;
use vline_core::beam::{signed_vline, RayQuadrature};
use vline_core::field::{make_phantom, relative_l2_in_disc, Grid2D, Phantom, PhantomKind, VectorField};
use vline_core::transform::TransformKind;
use vline_core::vline::{
    forward_i, forward_j, forward_l, forward_phantom, forward_t, recover_curl, recover_div, recover_field_li,
    recover_field_lt, recover_field_tj, recover_potential, recover_stream, rhombus_check, signed_from_li,
    signed_from_tj, VLineGeometry,
};
use vline_core::{Direction, Error, Vec2};

fn geometry() -> VLineGeometry {
    VLineGeometry::new(Direction::from_angle(0.35), Direction::from_angle(2.2)).unwrap()
}

fn reference() -> VLineGeometry {
    VLineGeometry::new(Direction::new(1.0, 0.0).unwrap(), Direction::new(0.0, 1.0).unwrap()).unwrap()
}

fn grid(n: usize, g: &VLineGeometry) -> Grid2D {
    Grid2D::for_rays(n, 1.0, &g.rays()).unwrap()
}

fn origin() -> Vec2 {
    Vec2::new(0.0, 0.0)
}

#[test]
fn longitudinal_data_of_a_potential_field_vanish() {
    let g = geometry();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Potential, origin(), 0.5).unwrap();
    let lf = forward_l(&ph.field, &g, &q).unwrap();
    let scale = ph.field.max_norm();
    assert!(lf.max_abs() < 0.02 * scale, "{}", lf.max_abs() / scale);
    let tf = forward_t(&make_phantom(gr, PhantomKind::Solenoidal, origin(), 0.5).unwrap().field, &g, &q).unwrap();
    assert!(tf.max_abs() < 0.02 * scale);
}

#[test]
fn curl_and_div_at_128() {
    let g = reference();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let curl = recover_curl(&forward_l(&ph.field, &g, &q).unwrap(), &g).unwrap();
    let div = recover_div(&forward_t(&ph.field, &g, &q).unwrap(), &g).unwrap();
    assert!(relative_l2_in_disc(&curl, &ph.curl, 1.0).unwrap() < 0.1);
    assert!(relative_l2_in_disc(&div, &ph.div, 1.0).unwrap() < 0.1);
}

#[test]
fn lt_recovery_at_128() {
    let g = geometry();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let lf = forward_l(&ph.field, &g, &q).unwrap();
    let tf = forward_t(&ph.field, &g, &q).unwrap();
    let rec = recover_field_lt(&lf, &tf, &g).unwrap();
    for c in 0..2 {
        let err = relative_l2_in_disc(rec.component(c), ph.field.component(c), 1.0).unwrap();
        assert!(err < 0.1, "{c}: {err}");
    }
}

#[test]
fn potential_and_stream_at_128() {
    let g = geometry();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let pot = recover_potential(&forward_t(&ph.field, &g, &q).unwrap(), &g).unwrap();
    let st = recover_stream(&forward_l(&ph.field, &g, &q).unwrap(), &g).unwrap();
    assert!(relative_l2_in_disc(&pot, &ph.potential, 1.0).unwrap() < 0.1);
    assert!(relative_l2_in_disc(&st, &ph.stream, 1.0).unwrap() < 0.1);
}

#[test]
fn li_and_tj_recovery_at_128() {
    let g = reference();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let f = &ph.field;
    let li = recover_field_li(&forward_l(f, &g, &q).unwrap(), &forward_i(f, &g, &q).unwrap(), &g, &q).unwrap();
    let tj = recover_field_tj(&forward_t(f, &g, &q).unwrap(), &forward_j(f, &g, &q).unwrap(), &g, &q).unwrap();
    for c in 0..2 {
        let a = relative_l2_in_disc(li.component(c), f.component(c), 1.0).unwrap();
        let b = relative_l2_in_disc(tj.component(c), f.component(c), 1.0).unwrap();
        assert!(a < 0.1 && b < 0.1, "{c}: li {a} tj {b}");
    }
}

#[test]
fn li_recovery_from_analytic_data_converges() {
    let g = reference();
    let errs: Vec<f64> = [64, 128]
        .iter()
        .map(|&n| {
            let gr = grid(n, &g);
            let q = RayQuadrature::for_grid(&gr);
            let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
            let lf = forward_phantom(TransformKind::L, &ph.analytic, gr, &g, &q).unwrap();
            let if_ = forward_phantom(TransformKind::I, &ph.analytic, gr, &g, &q).unwrap();
            let rec = recover_field_li(&lf, &if_, &g, &q).unwrap();
            relative_l2_in_disc(rec.component(0), ph.field.component(0), 1.0).unwrap()
        })
        .collect();
    assert!(errs[1] < 0.5 * errs[0], "{errs:?}");
}

fn signed_error(g: &VLineGeometry, kind: PhantomKind, moment_pair: bool) -> [f64; 2] {
    let g = *g;
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, kind, origin(), 0.5).unwrap();
    let (a, b) = if moment_pair {
        (TransformKind::T, TransformKind::J)
    } else {
        (TransformKind::L, TransformKind::I)
    };
    let x = forward_phantom(a, &ph.analytic, gr, &g, &q).unwrap();
    let y = forward_phantom(b, &ph.analytic, gr, &g, &q).unwrap();
    let (t1, t2) = if moment_pair { signed_from_tj(&x, &y, &g, &q) } else { signed_from_li(&x, &y, &g, &q) }.unwrap();
    let d1 = signed_vline(ph.field.component(0), &g, &q).unwrap();
    let d2 = signed_vline(ph.field.component(1), &g, &q).unwrap();
    [
        relative_l2_in_disc(t1.component(0), d1.component(0), 1.0).unwrap(),
        relative_l2_in_disc(t2.component(0), d2.component(0), 1.0).unwrap(),
    ]
}

#[test]
fn signed_data_two_paths() {
    // curl-free and divergence-free fields reduce each route to a single derivative
    for g in [geometry(), reference()] {
        let li = signed_error(&g, PhantomKind::Potential, false);
        let tj = signed_error(&g, PhantomKind::Solenoidal, true);
        assert!(li.iter().chain(&tj).all(|e| *e < 0.01), "{li:?} {tj:?}");
    }
    let g = reference();
    let li = signed_error(&g, PhantomKind::Mixed, false);
    let tj = signed_error(&g, PhantomKind::Mixed, true);
    assert!(li.iter().chain(&tj).all(|e| *e < 0.05), "{li:?} {tj:?}");
}

#[test]
fn analytic_forward_matches_sampled() {
    let g = geometry();
    let gr = grid(128, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let sampled = [
        forward_l(&ph.field, &g, &q).unwrap(),
        forward_t(&ph.field, &g, &q).unwrap(),
        forward_i(&ph.field, &g, &q).unwrap(),
        forward_j(&ph.field, &g, &q).unwrap(),
    ];
    for (kind, s) in [TransformKind::L, TransformKind::T, TransformKind::I, TransformKind::J].into_iter().zip(&sampled) {
        let a = forward_phantom(kind, &ph.analytic, gr, &g, &q).unwrap();
        let err = relative_l2_in_disc(s.component(0), a.component(0), gr.r2).unwrap();
        assert!(err < 0.02, "{kind:?}: {err}");
    }
}

#[test]
fn forward_phantom_rejects_non_vline_kinds_and_leaks() {
    let g = geometry();
    let gr = grid(32, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    assert!(matches!(forward_phantom(TransformKind::Star, &ph.analytic, gr, &g, &q), Err(Error::Config(_))));
    let wide = Phantom::standard(PhantomKind::Mixed, Vec2::new(0.6, 0.0), 0.5);
    assert!(matches!(
        forward_phantom(TransformKind::L, &wide, gr, &g, &q),
        Err(Error::SupportLeak { .. })
    ));
}

#[test]
fn rhombus_second_difference_tracks_the_mixed_derivative() {
    let g = reference();
    let gr = grid(256, &g);
    let q = RayQuadrature::for_grid(&gr);
    let ph = make_phantom(gr, PhantomKind::Mixed, origin(), 0.5).unwrap();
    let lf = forward_l(&ph.field, &g, &q).unwrap();
    // D_u D_v L f = det * curl f, and det(v, u) = -1 for this pair
    let x = gr.point(100, 120);
    let want = g.det() * ph.analytic.curl(x);
    let errs: Vec<f64> = [32.0, 16.0, 8.0]
        .iter()
        .map(|k| {
            let c = rhombus_check(&lf, x, k * gr.h, &g).unwrap();
            (c - want).abs()
        })
        .collect();
    assert!(errs[2] < errs[0], "{errs:?}");
    assert!(matches!(rhombus_check(&lf, Vec2::new(1.9, 1.9), gr.h, &g), Err(Error::RhombusOutsideData(..))));
}

#[test]
fn geometry_rejects_parallel_rays() {
    let u = Direction::from_angle(0.4);
    assert!(matches!(VLineGeometry::new(u, u), Err(Error::DegenerateGeometry { .. })));
    assert!(matches!(VLineGeometry::new(u, -u), Err(Error::DegenerateGeometry { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn transforms_intertwine_under_perp(seed_angle in 0.0f64..6.0, cx in -0.2f64..0.2) {
        // T f = -L (perp f) since perp(perp f) = -f
        let g = VLineGeometry::new(Direction::from_angle(seed_angle), Direction::from_angle(seed_angle + 1.7)).unwrap();
        let gr = grid(32, &g);
        let q = RayQuadrature::for_grid(&gr);
        let f = make_phantom(gr, PhantomKind::Mixed, Vec2::new(cx, 0.0), 0.4).unwrap().field;
        let pf: VectorField = f.perp();
        let t = forward_t(&f, &g, &q).unwrap();
        let l = forward_l(&pf, &g, &q).unwrap();
        let scale = t.max_abs().max(1.0);
        for (a, b) in t.component(0).values().iter().zip(l.component(0).values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale || (a + b).abs() <= 1e-12 * scale);
        }
    }
}
