use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use vline_core::beam::{invert_signed, signed_vline, RayQuadrature};
use vline_core::field::{Grid2D, Phantom, PhantomKind, ScalarField, VectorField};
use vline_core::io::parse_floats;
use vline_core::radon::{radon_project, RampWindow, SinogramLayout};
use vline_core::star::{forward_star, invert_star, StarClass, StarInversion};
use vline_core::transform::{TransformField, TransformKind};
use vline_core::vline::{
    forward_i, forward_j, forward_l, forward_t, recover_curl, recover_div, recover_field_li, recover_field_lt,
    recover_field_tj, recover_potential, recover_stream, VLineGeometry,
};
use vline_core::{Direction, Vec2};

use crate::error::{CliError, CliResult};
use crate::files::{read_fields, read_geometry, read_transform, write_bytes, write_fields, write_sinogram, write_transform, Geometry, Manifest};
use crate::render::{direction_ppm, magnitude_pgm, scalar_pgm};
use crate::report::report_lines;
use crate::{ForwardArgs, InvertArgs, PhantomArgs, RadonArgs, RenderArgs, ReportArgs};

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn manifest_path(explicit: &Option<PathBuf>, out: &Path) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    })
}

fn vline(g: &Geometry) -> CliResult<&VLineGeometry> {
    match g {
        Geometry::VLine(g) => Ok(g),
        Geometry::Star(_) => Err(config("this operation needs a V-line geometry (u=, v=), got a star")),
    }
}

fn quadrature(step: Option<f64>, grid: &Grid2D) -> CliResult<RayQuadrature> {
    Ok(match step {
        Some(s) => RayQuadrature::new(s)?,
        None => RayQuadrature::for_grid(grid),
    })
}

fn vector(comps: Vec<ScalarField>, path: &Path) -> CliResult<VectorField> {
    match <[ScalarField; 2]>::try_from(comps) {
        Ok([a, b]) => Ok(VectorField::new(a, b)?),
        Err(c) => Err(config(format!("{} holds {} component(s), expected a vector field", path.display(), c.len()))),
    }
}

fn parts(f: VectorField) -> Vec<ScalarField> {
    vec![f.component(0).clone(), f.component(1).clone()]
}

fn scalar(comps: Vec<ScalarField>, path: &Path) -> CliResult<ScalarField> {
    match <[ScalarField; 1]>::try_from(comps) {
        Ok([a]) => Ok(a),
        Err(c) => Err(config(format!("{} holds {} components, expected a scalar field", path.display(), c.len()))),
    }
}

pub fn phantom(a: &PhantomArgs) -> CliResult<()> {
    let kind: PhantomKind = a.kind.parse()?;
    let c = parse_floats(&a.center)?;
    let &[cx, cy] = c.as_slice() else {
        return Err(config(format!("center needs two numbers, got {:?}", a.center)));
    };
    let rays = match &a.geometry {
        Some(p) => read_geometry(p)?.rays(),
        None => vec![Direction::new(1.0, 0.0)?, Direction::new(0.0, 1.0)?],
    };
    let grid = Grid2D::for_rays(a.nx, a.r1, &rays)?;
    let ph = Phantom::standard(kind, Vec2::new(cx, cy), a.scale);
    let s = ph.sample(grid)?;
    let pot = Phantom { potential: ph.potential.clone(), stream: vec![] };
    let sol = Phantom { potential: vec![], stream: ph.stream.clone() };
    let pot_part = VectorField::from_fn(grid, |p| pot.field(p));
    let sol_part = VectorField::from_fn(grid, |p| sol.field(p));

    let mut m = Manifest::new("phantom");
    m.param("kind", &a.kind);
    m.param("nx", a.nx);
    m.param("r1", a.r1);
    m.param("center", &a.center);
    m.param("scale", a.scale);
    if let Some(p) = &a.geometry {
        m.input("geometry", p)?;
    }
    let files: [(&str, Vec<&ScalarField>); 7] = [
        ("field.vlt", vec![s.field.component(0), s.field.component(1)]),
        ("div.vlt", vec![&s.div]),
        ("curl.vlt", vec![&s.curl]),
        ("potential.vlt", vec![&s.potential]),
        ("stream.vlt", vec![&s.stream]),
        ("potential_part.vlt", vec![pot_part.component(0), pot_part.component(1)]),
        ("solenoidal_part.vlt", vec![sol_part.component(0), sol_part.component(1)]),
    ];
    for (name, comps) in files {
        let path = a.out.join(name);
        write_fields(&path, &comps)?;
        m.output(&path);
    }
    m.write(&a.manifest.clone().unwrap_or_else(|| a.out.join("manifest.txt")))
}

/// Adds N(0, (sigma * max|data|)^2) to every sample of the data disc, in
/// component then node order, from a ChaCha8 stream seeded with `seed`.
pub fn add_noise(t: &TransformField, sigma: f64, seed: u64) -> CliResult<TransformField> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(config(format!("noise level must be a finite non-negative number, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(t.clone());
    }
    let abs = sigma * t.max_abs();
    let normal = Normal::new(0.0, abs).map_err(|e| config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = *t.grid();
    let r2 = grid.data_radius().powi(2);
    let comps = t
        .components()
        .iter()
        .map(|c| {
            let values = c
                .values()
                .iter()
                .enumerate()
                .map(|(i, &v)| if grid.point_at(i).norm_sq() <= r2 { v + normal.sample(&mut rng) } else { v })
                .collect();
            ScalarField::from_values(grid, values)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TransformField::new(t.kind(), t.branches().to_vec(), comps)?)
}

pub fn forward(a: &ForwardArgs) -> CliResult<()> {
    let geometry = read_geometry(&a.geometry)?;
    let kind = crate::files::kind_from_name(&a.transform)
        .filter(|k| *k != TransformKind::Beam)
        .ok_or_else(|| config(format!("unknown transform {:?}; use L, T, I, J, star or signed", a.transform)))?;
    let comps = read_fields(&a.field)?;
    let grid = *comps[0].grid();
    let q = quadrature(a.step, &grid)?;
    let clean = match kind {
        TransformKind::Star => match &geometry {
            Geometry::Star(sg) => forward_star(&vector(comps, &a.field)?, sg, &q)?,
            Geometry::VLine(_) => return Err(config("the star transform needs a star geometry (ray = gx,gy,c)")),
        },
        TransformKind::Ts => signed_vline(&scalar(comps, &a.field)?, vline(&geometry)?, &q)?,
        _ => {
            let f = vector(comps, &a.field)?;
            let g = vline(&geometry)?;
            match kind {
                TransformKind::L => forward_l(&f, g, &q)?,
                TransformKind::T => forward_t(&f, g, &q)?,
                TransformKind::I => forward_i(&f, g, &q)?,
                _ => forward_j(&f, g, &q)?,
            }
        }
    };
    let data = add_noise(&clean, a.noise_sigma, a.seed)?;
    write_transform(&a.out, &data)?;

    let mut m = Manifest::new("forward");
    m.param("transform", kind.name());
    m.param("noise_sigma", a.noise_sigma);
    m.param("seed", a.seed);
    m.param("step", q.step);
    m.input("field", &a.field)?;
    m.input("geometry", &a.geometry)?;
    m.output(&a.out);
    m.output(&crate::files::meta_path(&a.out));
    m.write(&manifest_path(&a.manifest, &a.out))
}

const PIPELINES: [(&str, &[TransformKind]); 9] = [
    ("lt", &[TransformKind::L, TransformKind::T]),
    ("li", &[TransformKind::L, TransformKind::I]),
    ("tj", &[TransformKind::T, TransformKind::J]),
    ("star", &[TransformKind::Star]),
    ("potential", &[TransformKind::T]),
    ("stream", &[TransformKind::L]),
    ("curl", &[TransformKind::L]),
    ("div", &[TransformKind::T]),
    ("signed", &[TransformKind::Ts]),
];

pub fn invert(a: &InvertArgs) -> CliResult<()> {
    let pipeline = a.pipeline.to_ascii_lowercase();
    let (_, kinds) = PIPELINES
        .iter()
        .find(|(n, _)| *n == pipeline)
        .ok_or_else(|| config(format!("unknown pipeline {:?}", a.pipeline)))?;
    let geometry = read_geometry(&a.geometry)?;
    if let Geometry::Star(sg) = &geometry {
        if pipeline != "star" {
            return Err(config(format!("pipeline {pipeline} needs a V-line geometry")));
        }
        // rejected before any data are read
        if sg.classify() == StarClass::Symmetric {
            return Err(vline_core::Error::NotInvertible.into());
        }
    } else if pipeline == "star" {
        return Err(config("the star pipeline needs a star geometry"));
    }
    let paths: Vec<PathBuf> = a.inputs.split(',').map(|s| PathBuf::from(s.trim())).collect();
    if paths.len() != kinds.len() {
        return Err(config(format!(
            "pipeline {pipeline} takes {} input file(s) ({}), got {}",
            kinds.len(),
            kinds.iter().map(|k| k.name()).collect::<Vec<_>>().join(", "),
            paths.len()
        )));
    }
    let mut data = Vec::new();
    for (p, k) in paths.iter().zip(kinds.iter()) {
        let t = read_transform(p)?;
        if t.kind() != *k {
            return Err(config(format!("{} holds {} data, pipeline {pipeline} expects {}", p.display(), t.kind().name(), k.name())));
        }
        if t.branches() != geometry.rays().as_slice() {
            return Err(config(format!("{} was computed for different rays than {}", p.display(), a.geometry.display())));
        }
        data.push(t);
    }
    let grid = *data[0].grid();
    let q = quadrature(a.step, &grid)?;
    let window = match a.window.to_ascii_lowercase().as_str() {
        "ramlak" | "ram-lak" => RampWindow::RamLak,
        "hann" => RampWindow::Hann,
        w => return Err(config(format!("unknown ramp window {w:?}; use ramlak or hann"))),
    };
    let rec: Vec<ScalarField> = match (&geometry, pipeline.as_str()) {
        (Geometry::Star(sg), _) => {
            let opts = StarInversion { n_angles: a.angles, guard: a.guard.to_radians(), window, ..Default::default() };
            parts(invert_star(&data[0], sg, &opts, &q)?)
        }
        (Geometry::VLine(g), p) => match p {
            "lt" => parts(recover_field_lt(&data[0], &data[1], g)?),
            "li" => parts(recover_field_li(&data[0], &data[1], g, &q)?),
            "tj" => parts(recover_field_tj(&data[0], &data[1], g, &q)?),
            "potential" => vec![recover_potential(&data[0], g)?],
            "stream" => vec![recover_stream(&data[0], g)?],
            "curl" => vec![recover_curl(&data[0], g)?],
            "div" => vec![recover_div(&data[0], g)?],
            _ => vec![invert_signed(&data[0], g, &q)?],
        },
    };
    let refs: Vec<&ScalarField> = rec.iter().collect();
    write_fields(&a.out, &refs)?;

    let mut lines = vec![format!("pipeline={pipeline}")];
    if let Some(o) = &a.oracle {
        lines.extend(report_lines(&refs, &read_fields(o)?, grid.r1)?);
    } else {
        lines.push("oracle=none".into());
    }
    let report = a.report.clone().unwrap_or_else(|| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(".report");
        PathBuf::from(s)
    });
    let text = lines.join("\n") + "\n";
    print!("{text}");
    write_bytes(&report, text.as_bytes())?;

    let mut m = Manifest::new("invert");
    m.param("pipeline", &pipeline);
    m.param("step", q.step);
    if pipeline == "star" {
        m.param("angles", a.angles);
        m.param("guard_degrees", a.guard);
        m.param("window", &a.window);
    }
    for (k, p) in paths.iter().enumerate() {
        m.input(&format!("data{k}"), p)?;
    }
    m.input("geometry", &a.geometry)?;
    if let Some(o) = &a.oracle {
        m.input("oracle", o)?;
    }
    m.output(&a.out);
    m.output(&report);
    m.write(&manifest_path(&a.manifest, &a.out))
}

pub fn radon(a: &RadonArgs) -> CliResult<()> {
    let comps = read_fields(&a.input)?;
    let grid = *comps[0].grid();
    let n_offsets = a.offsets.unwrap_or_else(|| SinogramLayout::offsets_for(grid.r2, grid.h));
    let layout = if a.full_turn {
        SinogramLayout::full_turn(a.angles, n_offsets, grid.r2)?
    } else {
        SinogramLayout::half_turn(a.angles, n_offsets, grid.r2)?
    };
    let refs: Vec<&ScalarField> = comps.iter().collect();
    let sg = radon_project(&refs, &layout, &RayQuadrature::for_grid(&grid));
    write_sinogram(&a.out, &sg)?;

    let mut m = Manifest::new("radon");
    m.param("angles", a.angles);
    m.param("offsets", n_offsets);
    m.param("full_turn", a.full_turn);
    m.input("field", &a.input)?;
    m.output(&a.out);
    m.write(&manifest_path(&a.manifest, &a.out))
}

pub fn render(a: &RenderArgs) -> CliResult<()> {
    let comps = read_fields(&a.input)?;
    let with_suffix = |suffix: &str| {
        let mut s = a.out.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    let mut outputs = Vec::new();
    if comps.len() == 1 {
        outputs.push((with_suffix(".pgm"), scalar_pgm(&comps[0])));
    } else {
        let f = vector(comps, &a.input)?;
        outputs.push((with_suffix("_mag.pgm"), magnitude_pgm(&f)));
        outputs.push((with_suffix("_dir.ppm"), direction_ppm(&f)));
    }
    let mut m = Manifest::new("render");
    m.input("field", &a.input)?;
    for (p, bytes) in &outputs {
        write_bytes(p, bytes)?;
        m.output(p);
    }
    m.write(&manifest_path(&a.manifest, &a.out))
}

pub fn report(a: &ReportArgs) -> CliResult<()> {
    let rec = read_fields(&a.field)?;
    let oracle = read_fields(&a.oracle)?;
    let radius = a.radius.unwrap_or(rec[0].grid().r1);
    let refs: Vec<&ScalarField> = rec.iter().collect();
    let text = report_lines(&refs, &oracle, radius)?.join("\n") + "\n";
    print!("{text}");
    write_bytes(&a.out, text.as_bytes())?;

    let mut m = Manifest::new("report");
    m.param("radius", radius);
    m.input("field", &a.field)?;
    m.input("oracle", &a.oracle)?;
    m.output(&a.out);
    m.write(&manifest_path(&a.manifest, &a.out))
}
