//! Minimal OBJ reader/writer: `v x y z` and 1-based `f i j k` lines only.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::real::Real;

use super::TriangleMesh;

/// Serializes a mesh to OBJ text (`v`/`f` lines only).
pub fn obj_string<R: Real>(mesh: &TriangleMesh<R>) -> String {
    let mut out = String::new();
    for v in &mesh.vertices {
        out.push_str(&format!(
            "v {:.6} {:.6} {:.6}\n",
            v.x.as_f64(),
            v.y.as_f64(),
            v.z.as_f64()
        ));
    }
    for f in &mesh.faces {
        out.push_str(&format!("f {} {} {}\n", f[0] + 1, f[1] + 1, f[2] + 1));
    }
    out
}

pub fn write_obj<R: Real>(mesh: &TriangleMesh<R>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(obj_string(mesh).as_bytes())
        .map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_obj<R: Real>(path: impl AsRef<Path>) -> Result<TriangleMesh<R>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let mut coord = |what: &str| -> Result<R> {
                    parts
                        .next()
                        .ok_or_else(|| Error::parse(path, lineno + 1, format!("missing {what}")))?
                        .parse::<f64>()
                        .map(R::of)
                        .map_err(|e| Error::parse(path, lineno + 1, format!("bad {what}: {e}")))
                };
                let (x, y, z) = (coord("x")?, coord("y")?, coord("z")?);
                vertices.push(Vec3::new(x, y, z));
            }
            Some("f") => {
                let mut index = |which: &str| -> Result<u32> {
                    let tok = parts.next().ok_or_else(|| {
                        Error::parse(path, lineno + 1, format!("missing face index {which}"))
                    })?;
                    let i: i64 = tok.parse().map_err(|e| {
                        Error::parse(path, lineno + 1, format!("bad face index {tok:?}: {e}"))
                    })?;
                    if i < 1 {
                        return Err(Error::parse(
                            path,
                            lineno + 1,
                            format!("face index {i} out of range (1-based)"),
                        ));
                    }
                    Ok((i - 1) as u32)
                };
                let f = [index("a")?, index("b")?, index("c")?];
                faces.push(f);
            }
            // Other keywords (vn, vt, o, g, ...) are outside the written
            // subset and are skipped on read.
            _ => {}
        }
    }

    let mesh = TriangleMesh { vertices, faces };
    mesh.validate()?;
    Ok(mesh)
}
