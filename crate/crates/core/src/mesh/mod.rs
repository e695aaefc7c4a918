//! Triangle-mesh data model, primitive generators, topology reports,
//! discrete differential geometry, and OBJ I/O.

pub mod differential;
pub mod implicit;
pub mod obj;
pub mod primitives;

pub use differential::{flipped, DifferentialData};
pub use implicit::{genus2_mesh, marching_tetrahedra};
pub use obj::{read_obj, write_obj};
pub use primitives::{generate_primitive, PrimitiveKind, PrimitiveParams};

use crate::error::{Error, Result};
use crate::{Point3, Vector3};
use std::collections::HashMap;

pub const DEGENERATE_AREA_TOL: f64 = 1e-12;

/// Indexed triangle mesh in ℝ³; immutable after construction.
#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point3>,
    faces: Vec<[usize; 3]>,
    boundary_flag: Vec<bool>,
    oriented: bool,
    metadata: String,
}

impl TriMesh {
    /// Validates indices, rejects degenerate faces, checks edge
    /// manifoldness, and derives boundary flags and the orientation
    /// consistency flag.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[usize; 3]>, metadata: &str) -> Result<Self> {
        let nv = vertices.len();
        if nv == 0 || faces.is_empty() {
            return Err(Error::Parameter("mesh needs vertices and faces".into()));
        }
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= nv) {
                return Err(Error::Parameter(format!(
                    "face {fi} references vertex out of range"
                )));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(Error::Parameter(format!("face {fi} repeats a vertex")));
            }
            let a = triangle_area(&vertices[f[0]], &vertices[f[1]], &vertices[f[2]]);
            if a <= DEGENERATE_AREA_TOL {
                return Err(Error::Parameter(format!(
                    "face {fi} is degenerate (area {a:.3e})"
                )));
            }
        }

        // Directed-edge census: an undirected edge may carry at most two
        // faces; a consistently oriented interior edge appears once in
        // each direction.
        let mut undirected: HashMap<(usize, usize), u8> = HashMap::new();
        let mut directed: HashMap<(usize, usize), u8> = HashMap::new();
        for f in &faces {
            for k in 0..3 {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                *directed.entry((i, j)).or_insert(0) += 1;
                *undirected.entry((i.min(j), i.max(j))).or_insert(0) += 1;
            }
        }
        for (&(i, j), &c) in &undirected {
            if c > 2 {
                return Err(Error::Topology(format!(
                    "edge ({i},{j}) shared by {c} faces (non-manifold)"
                )));
            }
        }
        let oriented = directed.values().all(|&c| c <= 1);

        let mut boundary_flag = vec![false; nv];
        for (&(i, j), &c) in &undirected {
            if c == 1 {
                boundary_flag[i] = true;
                boundary_flag[j] = true;
            }
        }

        Ok(TriMesh {
            vertices,
            faces,
            boundary_flag,
            oriented,
            metadata: metadata.to_string(),
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn boundary_flag(&self) -> &[bool] {
        &self.boundary_flag
    }

    pub fn is_oriented(&self) -> bool {
        self.oriented
    }

    pub fn metadata(&self) -> &str {
        &self.metadata
    }

    pub fn has_boundary(&self) -> bool {
        self.boundary_flag.iter().any(|&b| b)
    }

    pub fn face_corners(&self, f: usize) -> [&Point3; 3] {
        let [i, j, k] = self.faces[f];
        [&self.vertices[i], &self.vertices[j], &self.vertices[k]]
    }

    pub fn face_normal_area(&self, f: usize) -> (Vector3, f64) {
        let [p0, p1, p2] = self.face_corners(f);
        let n = (p1 - p0).cross(&(p2 - p0));
        let len = n.norm();
        (n / len, 0.5 * len)
    }

    pub fn total_area(&self) -> f64 {
        crate::numerics::pairwise_sum(
            &(0..self.faces.len())
                .map(|f| self.face_normal_area(f).1)
                .collect::<Vec<_>>(),
        )
    }

    /// Longest edge over the whole mesh.
    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for f in &self.faces {
            for k in 0..3 {
                let e = (self.vertices[f[k]] - self.vertices[f[(k + 1) % 3]]).norm();
                h = h.max(e);
            }
        }
        h
    }

    pub fn bounding_box(&self) -> (Point3, Point3) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    /// Closed (no boundary edges), consistently oriented: required by the
    /// enclosed-volume and degree computations.
    pub fn is_watertight(&self) -> bool {
        self.oriented && !self.has_boundary()
    }

    /// New mesh with the same connectivity and transformed vertices.
    pub fn with_vertices(&self, vertices: Vec<Point3>, metadata: &str) -> Result<Self> {
        if vertices.len() != self.vertices.len() {
            return Err(Error::Parameter("vertex count mismatch".into()));
        }
        TriMesh::new(vertices, self.faces.clone(), metadata)
    }

    /// Keep only faces whose vertices all lie within `radius` of the
    /// origin; vertices are compacted. Errors if nothing survives.
    pub fn restrict_to_ball(&self, radius: f64) -> Result<Self> {
        let keep: Vec<&[usize; 3]> = self
            .faces
            .iter()
            .filter(|f| f.iter().all(|&i| self.vertices[i].coords.norm() <= radius))
            .collect();
        if keep.is_empty() {
            return Err(Error::Domain("no faces inside ball".into()));
        }
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for f in keep {
            let mut g = [0usize; 3];
            for (slot, &i) in g.iter_mut().zip(f.iter()) {
                *slot = *remap.entry(i).or_insert_with(|| {
                    vertices.push(self.vertices[i]);
                    vertices.len() - 1
                });
            }
            faces.push(g);
        }
        TriMesh::new(vertices, faces, &format!("{}|ball({radius})", self.metadata))
    }

    /// Vertex adjacency (one-ring) lists.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbr = vec![Vec::new(); self.vertices.len()];
        for f in &self.faces {
            for k in 0..3 {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                if !nbr[i].contains(&j) {
                    nbr[i].push(j);
                }
                if !nbr[j].contains(&i) {
                    nbr[j].push(i);
                }
            }
        }
        nbr
    }
}

pub fn triangle_area(p0: &Point3, p1: &Point3, p2: &Point3) -> f64 {
    0.5 * (p1 - p0).cross(&(p2 - p0)).norm()
}

/// Per-component topology summary.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ComponentReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub face_count: usize,
    pub euler_characteristic: i64,
    pub boundary_loops: usize,
    pub orientable: bool,
    /// `None` for non-orientable components.
    pub genus: Option<i64>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TopologyReport {
    pub components: Vec<ComponentReport>,
    pub orientable: bool,
}

impl TopologyReport {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Genus of a single-component closed orientable mesh.
    pub fn genus(&self) -> Option<i64> {
        if self.components.len() == 1 {
            self.components[0].genus
        } else {
            None
        }
    }
}

/// Exact integer Euler characteristic and genus per connected component.
pub fn topology_report(mesh: &TriMesh) -> TopologyReport {
    let nv = mesh.vertices.len();
    // Union-find over vertices through faces.
    let mut parent: Vec<usize> = (0..nv).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for f in &mesh.faces {
        let r = find(&mut parent, f[0]);
        for &v in &f[1..] {
            let s = find(&mut parent, v);
            parent[s] = r;
        }
    }

    let mut edges: HashMap<(usize, usize), u8> = HashMap::new();
    let mut dir_edges: HashMap<(usize, usize), u8> = HashMap::new();
    for f in &mesh.faces {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            *edges.entry((i.min(j), i.max(j))).or_insert(0) += 1;
            *dir_edges.entry((i, j)).or_insert(0) += 1;
        }
    }

    #[derive(Default)]
    struct Acc {
        v: usize,
        e: usize,
        f: usize,
        boundary_edges: Vec<(usize, usize)>,
        orientable: bool,
    }
    let mut per: HashMap<usize, Acc> = HashMap::new();
    for i in 0..nv {
        let r = find(&mut parent, i);
        let acc = per.entry(r).or_insert_with(|| Acc {
            orientable: true,
            ..Default::default()
        });
        acc.v += 1;
    }
    for f in &mesh.faces {
        let r = find(&mut parent, f[0]);
        per.get_mut(&r).unwrap().f += 1;
    }
    for (&(i, j), &c) in &edges {
        let r = find(&mut parent, i);
        let acc = per.get_mut(&r).unwrap();
        acc.e += 1;
        if c == 1 {
            acc.boundary_edges.push((i, j));
        }
    }
    for (&(i, j), &c) in &dir_edges {
        if c > 1 {
            let r = find(&mut parent, i);
            per.get_mut(&r).unwrap().orientable = false;
        }
        let _ = j;
    }

    let mut roots: Vec<usize> = per.keys().copied().collect();
    roots.sort_unstable();
    let components: Vec<ComponentReport> = roots
        .iter()
        .map(|r| {
            let acc = &per[r];
            let chi = acc.v as i64 - acc.e as i64 + acc.f as i64;
            let loops = count_boundary_loops(&acc.boundary_edges);
            let genus = if acc.orientable {
                let g2 = 2 - chi - loops as i64;
                if g2 >= 0 && g2 % 2 == 0 {
                    Some(g2 / 2)
                } else {
                    None
                }
            } else {
                None
            };
            ComponentReport {
                vertex_count: acc.v,
                edge_count: acc.e,
                face_count: acc.f,
                euler_characteristic: chi,
                boundary_loops: loops,
                orientable: acc.orientable,
                genus,
            }
        })
        .collect();
    let orientable = components.iter().all(|c| c.orientable);
    TopologyReport {
        components,
        orientable,
    }
}

fn count_boundary_loops(edges: &[(usize, usize)]) -> usize {
    if edges.is_empty() {
        return 0;
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(i, j) in edges {
        adj.entry(i).or_default().push(j);
        adj.entry(j).or_default().push(i);
    }
    let mut seen: HashMap<usize, bool> = HashMap::new();
    let mut loops = 0;
    let mut keys: Vec<usize> = adj.keys().copied().collect();
    keys.sort_unstable();
    for start in keys {
        if seen.get(&start).copied().unwrap_or(false) {
            continue;
        }
        loops += 1;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if seen.insert(v, true).unwrap_or(false) {
                continue;
            }
            for &w in &adj[&v] {
                if !seen.get(&w).copied().unwrap_or(false) {
                    stack.push(w);
                }
            }
        }
    }
    loops
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_indices_and_degenerate_faces() {
        let vs = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        assert!(TriMesh::new(vs.clone(), vec![[0, 1, 3]], "t").is_err());
        assert!(TriMesh::new(vs.clone(), vec![[0, 1, 1]], "t").is_err());
        let collinear = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
        ];
        assert!(TriMesh::new(collinear, vec![[0, 1, 2]], "t").is_err());
    }

    #[test]
    fn single_triangle_has_boundary() {
        let vs = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = TriMesh::new(vs, vec![[0, 1, 2]], "tri").unwrap();
        assert!(m.has_boundary());
        assert!(m.is_oriented());
        let rep = topology_report(&m);
        assert_eq!(rep.component_count(), 1);
        assert_eq!(rep.components[0].euler_characteristic, 1);
        assert_eq!(rep.components[0].boundary_loops, 1);
    }

    #[test]
    fn moebius_strip_reported_non_orientable() {
        // Strip of 6 triangles glued with a flip.
        let n = 6;
        let mut vs = Vec::new();
        for i in 0..n {
            let th = std::f64::consts::PI * i as f64 / n as f64;
            let (c, s) = (th.cos(), th.sin());
            for &w in &[-0.3, 0.3] {
                vs.push(Point3::new(
                    (2.0 + w * (th / 2.0).cos()) * c,
                    (2.0 + w * (th / 2.0).cos()) * s,
                    w * (th / 2.0).sin(),
                ));
            }
        }
        let mut fs = Vec::new();
        for i in 0..n {
            let (a, b) = (2 * i, 2 * i + 1);
            let (c, d) = if i + 1 < n {
                (2 * (i + 1), 2 * (i + 1) + 1)
            } else {
                (1, 0) // glue with flip
            };
            fs.push([a, b, c]);
            fs.push([b, d, c]);
        }
        let m = TriMesh::new(vs, fs, "moebius").unwrap();
        assert!(!m.is_oriented());
        let rep = topology_report(&m);
        assert!(!rep.orientable);
        assert_eq!(rep.components[0].genus, None);
    }
}
