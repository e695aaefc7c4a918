//! Isosurface extraction by marching tetrahedra on a uniform grid, and
//! the genus-2 fixture built from it.

use super::TriMesh;
use crate::error::Result;
use crate::Point3;
use std::collections::HashMap;

/// Each cube splits into six tetrahedra along the 0–7 main diagonal
/// (Kuhn triangulation); the induced face diagonals match between
/// neighboring cubes, so the output welds watertight.
const CUBE_TETS: [[usize; 4]; 6] = [
    [0, 1, 3, 7],
    [0, 1, 5, 7],
    [0, 2, 3, 7],
    [0, 2, 6, 7],
    [0, 4, 5, 7],
    [0, 4, 6, 7],
];

/// Extracts the zero level set of `f` over the box `[lo, hi]³` sampled at
/// `n+1` points per axis. Vertices on shared grid edges are welded.
pub fn marching_tetrahedra<F: Fn(f64, f64, f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    metadata: &str,
) -> Result<TriMesh> {
    let h = (hi - lo) / n as f64;
    let coord = |i: usize| lo + h * i as f64;
    // sample grid values
    let np = n + 1;
    let mut vals = vec![0.0f64; np * np * np];
    let idx = |i: usize, j: usize, k: usize| (i * np + j) * np + k;
    for i in 0..np {
        for j in 0..np {
            for k in 0..np {
                vals[idx(i, j, k)] = f(coord(i), coord(j), coord(k));
            }
        }
    }
    // Push samples sitting (almost) exactly on the level set slightly
    // outside, so no interpolated vertex coincides with a grid point and
    // the extraction never produces zero-area triangles.
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let snap = 1e-6 * scale.max(f64::MIN_POSITIVE);
    for v in &mut vals {
        if v.abs() < snap {
            *v = snap;
        }
    }

    // cube corner offsets (x fastest encoding: bit0=x, bit1=y, bit2=z)
    let corner = |c: usize| -> (usize, usize, usize) { (c & 1, (c >> 1) & 1, (c >> 2) & 1) };

    let mut vertices: Vec<Point3> = Vec::new();
    let mut faces: Vec<[usize; 3]> = Vec::new();
    // weld vertices by the grid-edge they interpolate
    let mut edge_vertex: HashMap<(usize, usize), usize> = HashMap::new();

    let emit = |ga: usize,
                    gb: usize,
                    pa: Point3,
                    pb: Point3,
                    va: f64,
                    vb: f64,
                    vertices: &mut Vec<Point3>,
                    edge_vertex: &mut HashMap<(usize, usize), usize>|
     -> usize {
        let key = (ga.min(gb), ga.max(gb));
        *edge_vertex.entry(key).or_insert_with(|| {
            let t = va / (va - vb);
            vertices.push(Point3::from(pa.coords + (pb.coords - pa.coords) * t));
            vertices.len() - 1
        })
    };

    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // global indices and positions of the 8 corners
                let mut gi = [0usize; 8];
                let mut gp = [Point3::origin(); 8];
                let mut gv = [0.0f64; 8];
                for (c, (dx, dy, dz)) in (0..8).map(|c| (c, corner(c))) {
                    gi[c] = idx(i + dx, j + dy, k + dz);
                    gp[c] = Point3::new(coord(i + dx), coord(j + dy), coord(k + dz));
                    gv[c] = vals[gi[c]];
                }
                for tet in &CUBE_TETS {
                    let vsign: Vec<bool> = tet.iter().map(|&c| gv[c] < 0.0).collect();
                    let inside: Vec<usize> =
                        (0..4).filter(|&a| vsign[a]).collect();
                    match inside.len() {
                        0 | 4 => continue,
                        1 | 3 => {
                            // one vertex separated: single triangle
                            let (apex, others): (usize, Vec<usize>) = if inside.len() == 1 {
                                (inside[0], (0..4).filter(|a| !vsign[*a]).collect())
                            } else {
                                let outs: Vec<usize> =
                                    (0..4).filter(|a| !vsign[*a]).collect();
                                (outs[0], inside.clone())
                            };
                            let mut tri = [0usize; 3];
                            for (slot, &o) in tri.iter_mut().zip(&others) {
                                let (a, b) = (tet[apex], tet[o]);
                                *slot = emit(
                                    gi[a], gi[b], gp[a], gp[b], gv[a], gv[b],
                                    &mut vertices, &mut edge_vertex,
                                );
                            }
                            if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                                orient_push(&mut faces, &vertices, tri, &gp, &gv, tet);
                            }
                        }
                        2 => {
                            // quad: split into two triangles
                            let outs: Vec<usize> =
                                (0..4).filter(|a| !vsign[*a]).collect();
                            let (i0, i1) = (inside[0], inside[1]);
                            let (o0, o1) = (outs[0], outs[1]);
                            let mk = |a: usize, b: usize,
                                      vertices: &mut Vec<Point3>,
                                      edge_vertex: &mut HashMap<(usize, usize), usize>| {
                                emit(
                                    gi[tet[a]], gi[tet[b]], gp[tet[a]], gp[tet[b]],
                                    gv[tet[a]], gv[tet[b]], vertices, edge_vertex,
                                )
                            };
                            let q00 = mk(i0, o0, &mut vertices, &mut edge_vertex);
                            let q01 = mk(i0, o1, &mut vertices, &mut edge_vertex);
                            let q10 = mk(i1, o0, &mut vertices, &mut edge_vertex);
                            let q11 = mk(i1, o1, &mut vertices, &mut edge_vertex);
                            for tri in [[q00, q01, q11], [q00, q11, q10]] {
                                if tri[0] != tri[1] && tri[1] != tri[2] && tri[0] != tri[2] {
                                    orient_push(&mut faces, &vertices, tri, &gp, &gv, tet);
                                }
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
    }
    TriMesh::new(vertices, faces, metadata)
}

/// Push `tri` wound so its normal points toward increasing `f` (outward
/// for a negative interior). The gradient is estimated from the tet.
fn orient_push(
    faces: &mut Vec<[usize; 3]>,
    vertices: &[Point3],
    tri: [usize; 3],
    gp: &[Point3; 8],
    gv: &[f64; 8],
    tet: &[usize; 4],
) {
    let (p0, p1, p2) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    let n = (p1 - p0).cross(&(p2 - p0));
    // gradient of the linear interpolant on the tet
    let a = gp[tet[0]];
    let m = nalgebra::Matrix3::from_columns(&[
        gp[tet[1]] - a,
        gp[tet[2]] - a,
        gp[tet[3]] - a,
    ])
    .transpose();
    let rhs = nalgebra::Vector3::new(
        gv[tet[1]] - gv[tet[0]],
        gv[tet[2]] - gv[tet[0]],
        gv[tet[3]] - gv[tet[0]],
    );
    let grad = m.lu().solve(&rhs).unwrap_or_else(nalgebra::Vector3::zeros);
    if n.dot(&grad) >= 0.0 {
        faces.push(tri);
    } else {
        faces.push([tri[0], tri[2], tri[1]]);
    }
}

/// Closed genus-2 surface: the zero set of
/// 2y(y²−3x²)(1−z²) + (x²+y²)² − (9z²−1)(1−z²)
/// extracted inside [−2, 2]³.
pub fn genus2_mesh(refinement: u32) -> Result<TriMesh> {
    let n = 24usize << refinement;
    marching_tetrahedra(
        |x, y, z| {
            2.0 * y * (y * y - 3.0 * x * x) * (1.0 - z * z) + (x * x + y * y).powi(2)
                - (9.0 * z * z - 1.0) * (1.0 - z * z)
        },
        -2.0,
        2.0,
        n,
        &format!("genus2 ref={refinement}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::topology_report;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_level_set_has_right_area_and_genus() {
        let m = marching_tetrahedra(
            |x, y, z| x * x + y * y + z * z - 4.0,
            -3.0,
            3.0,
            48,
            "implicit sphere",
        )
        .unwrap();
        assert!(m.is_watertight());
        assert_eq!(topology_report(&m).genus(), Some(0));
        assert_relative_eq!(
            m.total_area(),
            16.0 * std::f64::consts::PI,
            max_relative = 5e-3
        );
    }

    #[test]
    fn genus2_fixture_topology() {
        let m = genus2_mesh(1).unwrap();
        assert!(m.is_watertight(), "genus-2 fixture must be closed");
        let rep = topology_report(&m);
        assert_eq!(rep.component_count(), 1);
        assert_eq!(rep.genus(), Some(2));
    }
}
