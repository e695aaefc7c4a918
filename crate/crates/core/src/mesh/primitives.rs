//! Analytic surface generators. All meshes are outward-oriented where a
//! notion of outward exists.

use super::TriMesh;
use crate::error::{Error, Result};
use crate::Point3;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    Sphere,
    Cylinder,
    PlaneDisk,
    Torus,
    Ellipsoid,
    PerturbedSphere,
    Genus2,
}

impl std::str::FromStr for PrimitiveKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sphere" => PrimitiveKind::Sphere,
            "cylinder" => PrimitiveKind::Cylinder,
            "plane-disk" | "plane_disk" | "disk" => PrimitiveKind::PlaneDisk,
            "torus" => PrimitiveKind::Torus,
            "ellipsoid" => PrimitiveKind::Ellipsoid,
            "perturbed-sphere" | "perturbed_sphere" => PrimitiveKind::PerturbedSphere,
            "genus2" | "genus-2" => PrimitiveKind::Genus2,
            other => return Err(Error::Parameter(format!("unknown primitive '{other}'"))),
        })
    }
}

/// Shape parameters; unused fields are ignored per kind.
#[derive(Debug, Clone)]
pub struct PrimitiveParams {
    /// sphere/disk radius, cylinder radius, torus tube radius.
    pub radius: f64,
    /// torus center-circle radius.
    pub major_radius: f64,
    /// cylinder total height (truncated at ±height/2).
    pub height: f64,
    /// ellipsoid semi-axes.
    pub semi_axes: [f64; 3],
    /// perturbed-sphere amplitude.
    pub amplitude: f64,
}

impl Default for PrimitiveParams {
    fn default() -> Self {
        PrimitiveParams {
            radius: 2.0,
            major_radius: 2.0,
            height: 8.0,
            semi_axes: [2.0, 2.0, 2.0],
            amplitude: 0.1,
        }
    }
}

/// Dispatch by kind. `refinement` scales resolution; each level roughly
/// halves the edge length.
pub fn generate_primitive(
    kind: PrimitiveKind,
    refinement: u32,
    params: &PrimitiveParams,
) -> Result<TriMesh> {
    if refinement > 8 {
        return Err(Error::Parameter("refinement > 8 is impractical".into()));
    }
    match kind {
        PrimitiveKind::Sphere => icosphere(params.radius, refinement),
        PrimitiveKind::Cylinder => cylinder(params.radius, params.height, refinement),
        PrimitiveKind::PlaneDisk => plane_disk(params.radius, refinement),
        PrimitiveKind::Torus => torus(params.major_radius, params.radius, refinement),
        PrimitiveKind::Ellipsoid => ellipsoid(params.semi_axes, refinement),
        PrimitiveKind::PerturbedSphere => {
            perturbed_sphere(params.radius, params.amplitude, refinement)
        }
        PrimitiveKind::Genus2 => super::implicit::genus2_mesh(refinement),
    }
}

/// Icosahedron subdivided `refinement` times, vertices projected to the
/// sphere of radius `r`.
pub fn icosphere(r: f64, refinement: u32) -> Result<TriMesh> {
    if r <= 0.0 {
        return Err(Error::Parameter("sphere radius must be positive".into()));
    }
    let phi = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut vertices: Vec<Point3> = raw
        .iter()
        .map(|v| {
            let p = Point3::new(v[0], v[1], v[2]);
            Point3::from(p.coords * (r / p.coords.norm()))
        })
        .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..refinement {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for k in 0..3 {
                let (i, j) = (f[k], f[(k + 1) % 3]);
                let key = (i.min(j), i.max(j));
                mid[k] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[i].coords + vertices[j].coords) * 0.5;
                    vertices.push(Point3::from(m * (r / m.norm())));
                    vertices.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces, &format!("sphere r={r} ref={refinement}"))
}

/// Cylinder x²+y²=r² truncated to |z| ≤ height/2, open ends.
pub fn cylinder(r: f64, height: f64, refinement: u32) -> Result<TriMesh> {
    if r <= 0.0 || height <= 0.0 {
        return Err(Error::Parameter("cylinder radius/height must be positive".into()));
    }
    let n_theta = 16usize << refinement;
    // Aim for near-unit aspect ratio quads.
    let ring_step = 2.0 * std::f64::consts::PI * r / n_theta as f64;
    let n_z = ((height / ring_step).ceil() as usize).max(2);
    let mut vertices = Vec::with_capacity(n_theta * (n_z + 1));
    for iz in 0..=n_z {
        let z = -height / 2.0 + height * iz as f64 / n_z as f64;
        for it in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * it as f64 / n_theta as f64;
            vertices.push(Point3::new(r * th.cos(), r * th.sin(), z));
        }
    }
    let mut faces = Vec::with_capacity(2 * n_theta * n_z);
    for iz in 0..n_z {
        for it in 0..n_theta {
            let a = iz * n_theta + it;
            let b = iz * n_theta + (it + 1) % n_theta;
            let c = a + n_theta;
            let d = b + n_theta;
            // outward normal = radial direction
            faces.push([a, b, d]);
            faces.push([a, d, c]);
        }
    }
    TriMesh::new(
        vertices,
        faces,
        &format!("cylinder r={r} h={height} ref={refinement}"),
    )
}

/// Disk of radius `r` in the plane z=0, triangulated by concentric
/// hexagonal rings (ring k carries 6k vertices).
pub fn plane_disk(r: f64, refinement: u32) -> Result<TriMesh> {
    if r <= 0.0 {
        return Err(Error::Parameter("disk radius must be positive".into()));
    }
    let n_r = 4usize << refinement;
    let mut vertices = vec![Point3::new(0.0, 0.0, 0.0)];
    let mut ring_start = vec![0usize; n_r + 1];
    for k in 1..=n_r {
        ring_start[k] = vertices.len();
        let rk = r * k as f64 / n_r as f64;
        let m = 6 * k;
        for i in 0..m {
            let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
            vertices.push(Point3::new(rk * th.cos(), rk * th.sin(), 0.0));
        }
    }
    let mut faces = Vec::new();
    // Innermost fan.
    for i in 0..6 {
        faces.push([0, ring_start[1] + i, ring_start[1] + (i + 1) % 6]);
    }
    // Between rings k and k+1: walk both rings by angle.
    for k in 1..n_r {
        let (s_in, m_in) = (ring_start[k], 6 * k);
        let (s_out, m_out) = (ring_start[k + 1], 6 * (k + 1));
        let mut i = 0usize; // inner index
        let mut j = 0usize; // outer index
        let ang_in = |i: usize| 2.0 * std::f64::consts::PI * i as f64 / m_in as f64;
        let ang_out = |j: usize| 2.0 * std::f64::consts::PI * j as f64 / m_out as f64;
        while i < m_in || j < m_out {
            let next_in = ang_in(i + 1);
            let next_out = ang_out(j + 1);
            if j < m_out && (i >= m_in || next_out <= next_in + 1e-12) {
                faces.push([
                    s_in + i % m_in,
                    s_out + j % m_out,
                    s_out + (j + 1) % m_out,
                ]);
                j += 1;
            } else {
                faces.push([
                    s_in + i % m_in,
                    s_out + j % m_out,
                    s_in + (i + 1) % m_in,
                ]);
                i += 1;
            }
        }
    }
    TriMesh::new(vertices, faces, &format!("disk r={r} ref={refinement}"))
}

/// Torus: center circle radius `big_r` in the xy-plane, tube radius `a`.
pub fn torus(big_r: f64, a: f64, refinement: u32) -> Result<TriMesh> {
    if big_r <= 0.0 || a <= 0.0 || a >= big_r {
        return Err(Error::Parameter(
            "torus needs 0 < tube radius < major radius".into(),
        ));
    }
    let n_u = 12usize << refinement; // around the center circle
    let n_v = 8usize << refinement; // around the tube
    let mut vertices = Vec::with_capacity(n_u * n_v);
    for iu in 0..n_u {
        let u = 2.0 * std::f64::consts::PI * iu as f64 / n_u as f64;
        for iv in 0..n_v {
            let v = 2.0 * std::f64::consts::PI * iv as f64 / n_v as f64;
            let w = big_r + a * v.cos();
            vertices.push(Point3::new(w * u.cos(), w * u.sin(), a * v.sin()));
        }
    }
    let mut faces = Vec::with_capacity(2 * n_u * n_v);
    for iu in 0..n_u {
        for iv in 0..n_v {
            let a0 = iu * n_v + iv;
            let b0 = ((iu + 1) % n_u) * n_v + iv;
            let a1 = iu * n_v + (iv + 1) % n_v;
            let b1 = ((iu + 1) % n_u) * n_v + (iv + 1) % n_v;
            faces.push([a0, b0, b1]);
            faces.push([a0, b1, a1]);
        }
    }
    TriMesh::new(
        vertices,
        faces,
        &format!("torus R={big_r} a={a} ref={refinement}"),
    )
}

/// Ellipsoid (x/a)²+(y/b)²+(z/c)²=1 by radial scaling of the icosphere.
pub fn ellipsoid(semi: [f64; 3], refinement: u32) -> Result<TriMesh> {
    if semi.iter().any(|&s| s <= 0.0) {
        return Err(Error::Parameter("semi-axes must be positive".into()));
    }
    let unit = icosphere(1.0, refinement)?;
    let vertices = unit
        .vertices()
        .iter()
        .map(|p| Point3::new(p.x * semi[0], p.y * semi[1], p.z * semi[2]))
        .collect();
    unit.with_vertices(
        vertices,
        &format!(
            "ellipsoid a={} b={} c={} ref={refinement}",
            semi[0], semi[1], semi[2]
        ),
    )
}

/// Sphere of radius `r` modulated by the z-axis quadrupole harmonic:
/// R(p) = r (1 + ε P₂(z/|p|)), P₂(t) = (3t²−1)/2.
pub fn perturbed_sphere(r: f64, eps: f64, refinement: u32) -> Result<TriMesh> {
    if eps.abs() >= 0.5 {
        return Err(Error::Parameter("perturbation too large".into()));
    }
    let base = icosphere(r, refinement)?;
    let vertices = base
        .vertices()
        .iter()
        .map(|p| {
            let t = p.z / p.coords.norm();
            let scale = 1.0 + eps * 0.5 * (3.0 * t * t - 1.0);
            Point3::from(p.coords * scale)
        })
        .collect();
    base.with_vertices(
        vertices,
        &format!("perturbed-sphere r={r} eps={eps} ref={refinement}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::topology_report;
    use approx::assert_relative_eq;

    #[test]
    fn icosphere_area_converges() {
        // 4πR² = 16π for R = 2
        let exact = 16.0 * std::f64::consts::PI;
        let a3 = icosphere(2.0, 3).unwrap().total_area();
        let a5 = icosphere(2.0, 5).unwrap().total_area();
        assert!(a3 < exact && a5 < exact); // inscribed
        assert!((exact - a5) < (exact - a3) / 10.0);
        assert_relative_eq!(a5, exact, max_relative = 5e-4);
    }

    #[test]
    fn primitive_topology() {
        let s = icosphere(2.0, 2).unwrap();
        assert!(s.is_watertight());
        assert_eq!(topology_report(&s).genus(), Some(0));

        let t = torus(2.0, 0.5, 1).unwrap();
        assert!(t.is_watertight());
        assert_eq!(topology_report(&t).genus(), Some(1));

        let c = cylinder(2.0_f64.sqrt(), 8.0, 1).unwrap();
        assert!(c.has_boundary());
        let rep = topology_report(&c);
        assert_eq!(rep.components[0].euler_characteristic, 0);
        assert_eq!(rep.components[0].boundary_loops, 2);

        let d = plane_disk(3.0, 1).unwrap();
        let rep = topology_report(&d);
        assert_eq!(rep.components[0].euler_characteristic, 1);
        assert_eq!(rep.components[0].boundary_loops, 1);
    }

    #[test]
    fn disk_area_converges() {
        // πr² for r = 3; hexagonal rings triangulate the disk exactly up
        // to boundary-polygon deficit.
        let exact = std::f64::consts::PI * 9.0;
        let a = plane_disk(3.0, 3).unwrap().total_area();
        assert_relative_eq!(a, exact, max_relative = 2e-3);
    }

    #[test]
    fn cylinder_area_matches() {
        let r = 2.0_f64.sqrt();
        let h = 6.0;
        let exact = 2.0 * std::f64::consts::PI * r * h;
        let a = cylinder(r, h, 3).unwrap().total_area();
        assert_relative_eq!(a, exact, max_relative = 1e-3);
    }
}
