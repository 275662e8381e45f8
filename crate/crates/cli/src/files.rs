//! File access: VLT1/VLS1 payloads, `.meta` sidecars for transform data,
//! geometry files and run manifests.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use vline_core::field::ScalarField;
use vline_core::io::{parse_direction, parse_key_values, read_star_geometry, read_vline_geometry, read_vlt1, write_vlt1};
use vline_core::radon::Sinogram;
use vline_core::star::StarGeometry;
use vline_core::transform::{TransformField, TransformKind};
use vline_core::vline::VLineGeometry;

use crate::error::{in_file, CliError, CliResult};

const KINDS: [TransformKind; 7] = [
    TransformKind::L,
    TransformKind::T,
    TransformKind::I,
    TransformKind::J,
    TransformKind::Ts,
    TransformKind::Star,
    TransformKind::Beam,
];

pub fn kind_from_name(name: &str) -> Option<TransformKind> {
    KINDS.into_iter().find(|k| k.name().eq_ignore_ascii_case(name))
}

fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::at(path, e))
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::at(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| CliError::at(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(|e| CliError::at(path, e))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(bytes).map_err(|e| CliError::at(path, e))?;
    finish(path, w)
}

pub fn read_fields(path: &Path) -> CliResult<Vec<ScalarField>> {
    in_file(path, read_vlt1(&mut open(path)?))
}

pub fn write_fields(path: &Path, comps: &[&ScalarField]) -> CliResult<()> {
    let mut w = create(path)?;
    in_file(path, write_vlt1(&mut w, comps))?;
    finish(path, w)
}

pub fn write_sinogram(path: &Path, sg: &Sinogram) -> CliResult<()> {
    let mut w = create(path)?;
    in_file(path, vline_core::io::write_vls1(&mut w, sg))?;
    finish(path, w)
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

/// Writes the samples as VLT1 and the kind and ray directions to `<path>.meta`.
pub fn write_transform(path: &Path, t: &TransformField) -> CliResult<()> {
    let comps: Vec<&ScalarField> = t.components().iter().collect();
    write_fields(path, &comps)?;
    let mut meta = format!("content=transform\nkind={}\n", t.kind().name());
    for b in t.branches() {
        meta.push_str(&format!("branch={:?},{:?}\n", b.x(), b.y()));
    }
    write_bytes(&meta_path(path), meta.as_bytes())
}

pub fn read_transform(path: &Path) -> CliResult<TransformField> {
    let comps = read_fields(path)?;
    let mpath = meta_path(path);
    let kv = in_file(&mpath, parse_key_values(open(&mpath)?))?;
    let bad = |m: String| CliError::Io(format!("{}: {m}", mpath.display()));
    let mut kind = None;
    let mut branches = Vec::new();
    for (k, v) in &kv {
        match k.as_str() {
            "content" if v != "transform" => return Err(bad(format!("expected transform data, found {v}"))),
            "kind" => kind = Some(kind_from_name(v).ok_or_else(|| bad(format!("unknown transform kind {v}")))?),
            "branch" => branches.push(parse_direction(v).map_err(|e| bad(e.to_string()))?.0),
            _ => {}
        }
    }
    let kind = kind.ok_or_else(|| bad("missing kind".into()))?;
    TransformField::new(kind, branches, comps).map_err(|e| bad(e.to_string()))
}

pub enum Geometry {
    VLine(VLineGeometry),
    Star(StarGeometry),
}

impl Geometry {
    pub fn rays(&self) -> Vec<vline_core::Direction> {
        match self {
            Geometry::VLine(g) => g.rays().to_vec(),
            Geometry::Star(s) => s.gammas().to_vec(),
        }
    }
}

/// Star files list `ray = gx,gy,c` lines; anything else is read as a V-line.
pub fn read_geometry(path: &Path) -> CliResult<Geometry> {
    let mut text = String::new();
    open(path)?.read_to_string(&mut text).map_err(|e| CliError::at(path, e))?;
    let is_star = in_file(path, parse_key_values(text.as_bytes()))?.iter().any(|(k, _)| k == "ray");
    let (g, warnings) = if is_star {
        let (s, w) = read_star_geometry(text.as_bytes())?;
        (Geometry::Star(s), w)
    } else {
        let (g, w) = read_vline_geometry(text.as_bytes())?;
        (Geometry::VLine(g), w)
    };
    for w in warnings {
        eprintln!("warning: {}: {w}", path.display());
    }
    Ok(g)
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|e| CliError::at(path, e))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// Key=value record of one run: parameters, input and output hashes, and
/// the library version. Contains nothing that varies between repeats.
pub struct Manifest {
    lines: Vec<String>,
    outputs: Vec<PathBuf>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Manifest {
            lines: vec![format!("command={command}"), format!("version={}", vline_core::VERSION)],
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("param.{key}={value}"));
    }

    pub fn input(&mut self, role: &str, path: &Path) -> CliResult<()> {
        let hash = sha256_file(path)?;
        self.lines.push(format!("input.{role}={} sha256:{hash}", path.display()));
        Ok(())
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    pub fn write(mut self, path: &Path) -> CliResult<()> {
        for (k, out) in std::mem::take(&mut self.outputs).iter().enumerate() {
            let hash = sha256_file(out)?;
            self.lines.push(format!("output.{k}={} sha256:{hash}", out.display()));
        }
        let mut text = self.lines.join("\n");
        text.push('\n');
        write_bytes(path, text.as_bytes())
    }
}
