//! Minimal Wavefront OBJ reader/writer: `v`, `f` (triangles only), and
//! comments. Anything else is an explicit error rather than a silent skip.

use super::TriMesh;
use crate::error::{Error, Result};
use crate::Point3;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

pub fn read_obj(path: &Path) -> Result<TriMesh> {
    let file = std::fs::File::open(path)?;
    parse_obj(BufReader::new(file), &path.display().to_string())
}

pub fn parse_obj<R: Read>(reader: BufReader<R>, name: &str) -> Result<TriMesh> {
    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tok = trimmed.split_whitespace();
        match tok.next().unwrap() {
            "v" => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    *slot = tok
                        .next()
                        .ok_or_else(|| Error::Parse {
                            line: lineno,
                            msg: "vertex needs 3 coordinates".into(),
                        })?
                        .parse()
                        .map_err(|e| Error::Parse {
                            line: lineno,
                            msg: format!("bad coordinate: {e}"),
                        })?;
                }
                // trailing w / color components are not supported
                if tok.next().is_some() {
                    return Err(Error::Unsupported {
                        line: lineno,
                        msg: "vertex with more than 3 components".into(),
                    });
                }
                vertices.push(Point3::new(c[0], c[1], c[2]));
            }
            "f" => {
                let idx: Vec<&str> = tok.collect();
                if idx.len() != 3 {
                    return Err(Error::Unsupported {
                        line: lineno,
                        msg: format!("face with {} vertices (triangles only)", idx.len()),
                    });
                }
                let mut f = [0usize; 3];
                for (slot, s) in f.iter_mut().zip(&idx) {
                    // accept v, v/vt, v/vt/vn, v//vn — geometry index only
                    let v = s.split('/').next().unwrap();
                    let i: i64 = v.parse().map_err(|e| Error::Parse {
                        line: lineno,
                        msg: format!("bad face index: {e}"),
                    })?;
                    let i = if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        i - 1
                    };
                    if i < 0 {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: "face index out of range".into(),
                        });
                    }
                    *slot = i as usize;
                }
                faces.push(f);
            }
            "vn" | "vt" | "s" | "g" | "o" | "usemtl" | "mtllib" => {
                // ignorable attributes that do not affect geometry
            }
            other => {
                return Err(Error::Unsupported {
                    line: lineno,
                    msg: format!("directive '{other}'"),
                })
            }
        }
    }
    TriMesh::new(vertices, faces, name)
}

/// Writes vertices with shortest round-trip f64 formatting.
pub fn write_obj(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "# {}", mesh.metadata())?;
    for v in mesh.vertices() {
        writeln!(out, "v {} {} {}", v.x, v.y, v.z)?;
    }
    for f in mesh.faces() {
        writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::icosphere;

    #[test]
    fn round_trip_is_exact() {
        let m = icosphere(2.0, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.obj");
        write_obj(&m, &p).unwrap();
        let m2 = read_obj(&p).unwrap();
        assert_eq!(m.faces(), m2.faces());
        for (a, b) in m.vertices().iter().zip(m2.vertices()) {
            assert_eq!(a, b); // bit-exact through shortest round-trip
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        let src = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3 1\n";
        let err = parse_obj(BufReader::new(src.as_bytes()), "t").unwrap_err();
        match err {
            Error::Unsupported { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected error: {other}"),
        }
        let src = "curve 1 2 3\n";
        assert!(matches!(
            parse_obj(BufReader::new(src.as_bytes()), "t"),
            Err(Error::Unsupported { line: 1, .. })
        ));
    }
}
