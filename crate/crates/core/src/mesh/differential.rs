//! Discrete differential geometry: vertex normals, curvatures, and the
//! lumped vertex areas used as quadrature weights for vertex fields.

use super::TriMesh;
use crate::Vector3;

/// Per-vertex geometric quantities.
///
/// Curvature sign convention: the mean curvature of a sphere of radius R
/// with respect to the outward normal is 2/R (sum of principal
/// curvatures), so the mean curvature vector points inward and
/// `mean_curvature` is positive on convex surfaces.
#[derive(Debug, Clone)]
pub struct DifferentialData {
    pub normals: Vec<Vector3>,
    pub mean_curvature: Vec<f64>,
    pub gauss_curvature: Vec<f64>,
    /// |A|² = κ₁² + κ₂², recovered as max(H² − 2K, 0).
    pub second_form_sq: Vec<f64>,
    /// Mixed Voronoi lumped vertex area (circumcentric cell, clamped to
    /// A/2 : A/4 : A/4 in obtuse triangles); sums exactly to the total
    /// area.
    pub vertex_area: Vec<f64>,
}

impl DifferentialData {
    pub fn compute(mesh: &TriMesh) -> Self {
        let nv = mesh.vertices().len();
        let vs = mesh.vertices();
        let mut normals = vec![Vector3::zeros(); nv];
        let mut vertex_area = vec![0.0f64; nv];
        let mut angle_sum = vec![0.0f64; nv];
        let mut hvec = vec![Vector3::zeros(); nv];

        for f in mesh.faces() {
            let p = [vs[f[0]], vs[f[1]], vs[f[2]]];
            let n = (p[1] - p[0]).cross(&(p[2] - p[0]));
            let area = 0.5 * n.norm();
            let mut cot = [0.0f64; 3];
            let mut obtuse = None;
            for k in 0..3 {
                let e1 = p[(k + 1) % 3] - p[k];
                let e2 = p[(k + 2) % 3] - p[k];
                let dot = e1.dot(&e2);
                cot[k] = dot / e1.cross(&e2).norm();
                if dot < 0.0 {
                    obtuse = Some(k);
                }
            }
            for k in 0..3 {
                let (i, j, l) = (f[k], f[(k + 1) % 3], f[(k + 2) % 3]);
                let e1 = p[(k + 1) % 3] - p[k];
                let e2 = p[(k + 2) % 3] - p[k];
                let angle = e1.angle(&e2);
                // angle-weighted normal accumulation
                normals[i] += n.normalize() * angle;
                angle_sum[i] += angle;
                // mixed Voronoi cell: circumcentric where the triangle is
                // acute, clamped split otherwise (Meyer et al.)
                vertex_area[i] += match obtuse {
                    None => {
                        (e1.norm_squared() * cot[(k + 2) % 3]
                            + e2.norm_squared() * cot[(k + 1) % 3])
                            / 8.0
                    }
                    Some(o) if o == k => area / 2.0,
                    Some(_) => area / 4.0,
                };
                // cotangent contribution of the corner at i to edge (j,l)
                hvec[j] += (vs[j] - vs[l]) * (0.5 * cot[k]);
                hvec[l] += (vs[l] - vs[j]) * (0.5 * cot[k]);
            }
        }

        let mut mean_curvature = vec![0.0f64; nv];
        let mut gauss_curvature = vec![0.0f64; nv];
        let mut second_form_sq = vec![0.0f64; nv];
        let boundary = mesh.boundary_flag();
        for i in 0..nv {
            if normals[i].norm() > 0.0 {
                normals[i] = normals[i].normalize();
            }
            if vertex_area[i] <= 0.0 || boundary[i] {
                // curvature left zero on boundary vertices: the cot
                // formula has no closed one-ring there
                continue;
            }
            // mean curvature vector = (1/A_i) Σ ½ cot (x_i − x_j) points
            // opposite the outward normal on convex surfaces; project.
            let h = hvec[i] / vertex_area[i];
            mean_curvature[i] = h.dot(&normals[i]);
            gauss_curvature[i] =
                (2.0 * std::f64::consts::PI - angle_sum[i]) / vertex_area[i];
            let a2 = mean_curvature[i] * mean_curvature[i] - 2.0 * gauss_curvature[i];
            second_form_sq[i] = a2.max(0.0);
        }

        DifferentialData {
            normals,
            mean_curvature,
            gauss_curvature,
            second_form_sq,
            vertex_area,
        }
    }

    /// Pointwise shrinker residual H − ⟨x, n⟩/2 at each interior vertex.
    pub fn shrinker_residual(&self, mesh: &TriMesh) -> Vec<f64> {
        mesh.vertices()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if mesh.boundary_flag()[i] {
                    0.0
                } else {
                    self.mean_curvature[i] - p.coords.dot(&self.normals[i]) / 2.0
                }
            })
            .collect()
    }
}

/// Flip face windings (and thus all normals).
pub fn flipped(mesh: &TriMesh) -> TriMesh {
    let faces = mesh.faces().iter().map(|f| [f[0], f[2], f[1]]).collect();
    TriMesh::new(mesh.vertices().to_vec(), faces, mesh.metadata())
        .expect("flipping preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{cylinder, icosphere};
    use approx::assert_relative_eq;

    #[test]
    fn sphere_curvatures() {
        // radius 2: H = 2/R = 1, K = 1/R² = 0.25, |A|² = 2/R² = 0.5
        let m = icosphere(2.0, 4).unwrap();
        let d = DifferentialData::compute(&m);
        for i in 0..m.vertices().len() {
            assert_relative_eq!(d.mean_curvature[i], 1.0, max_relative = 5e-3);
            assert_relative_eq!(d.gauss_curvature[i], 0.25, max_relative = 5e-3);
            assert_relative_eq!(d.second_form_sq[i], 0.5, max_relative = 2e-2);
            // outward normals
            assert!(d.normals[i].dot(&m.vertices()[i].coords) > 0.0);
        }
        let total: f64 = d.vertex_area.iter().sum();
        assert_relative_eq!(total, m.total_area(), max_relative = 1e-12);
    }

    #[test]
    fn cylinder_curvatures() {
        // radius √2: H = 1/r = 1/√2, K = 0, |A|² = 1/r² = 1/2
        let r = 2.0_f64.sqrt();
        let m = cylinder(r, 8.0, 3).unwrap();
        let d = DifferentialData::compute(&m);
        for i in 0..m.vertices().len() {
            if m.boundary_flag()[i] {
                continue;
            }
            assert_relative_eq!(d.mean_curvature[i], 1.0 / r, max_relative = 5e-3);
            assert!(d.gauss_curvature[i].abs() < 5e-3);
            assert_relative_eq!(d.second_form_sq[i], 0.5, max_relative = 2e-2);
        }
    }

    #[test]
    fn shrinker_residual_vanishes_on_round_sphere() {
        let m = icosphere(2.0, 4).unwrap();
        let d = DifferentialData::compute(&m);
        let res = d.shrinker_residual(&m);
        let sup = res.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        assert!(sup < 5e-3, "sup residual {sup}");
    }
}
