//! Adaptive quadrature over triangle meshes. Faces are integrated in
//! parallel with fixed symmetric rules, refined by 4-way midpoint
//! subdivision where the integrand varies too fast, and accumulated with
//! a deterministic pairwise sum so results do not depend on thread count.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::numerics::pairwise_sum;
use crate::Point3;
use rayon::prelude::*;

/// Quadrature controls.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Points per triangle: 1 (centroid), 3 (degree 2) or 7 (degree 5).
    pub points: u32,
    /// Subdivide a triangle when the relative spread of integrand values
    /// at its rule points exceeds this.
    pub adaptive_threshold: f64,
    /// Maximum subdivision depth per input face.
    pub max_subdiv: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            points: 7,
            adaptive_threshold: 0.25,
            max_subdiv: 6,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.points, 1 | 3 | 7) {
            return Err(Error::Parameter(format!(
                "quadrature rule must have 1, 3 or 7 points, got {}",
                self.points
            )));
        }
        if self.adaptive_threshold <= 0.0 {
            return Err(Error::Parameter("adaptive threshold must be > 0".into()));
        }
        if self.max_subdiv > 12 {
            return Err(Error::Parameter("max_subdiv > 12 is impractical".into()));
        }
        Ok(())
    }

    fn rule(&self) -> &'static [(f64, f64, f64)] {
        match self.points {
            1 => RULE_1,
            3 => RULE_3,
            _ => RULE_7,
        }
    }

    fn lower_rule(&self) -> &'static [(f64, f64, f64)] {
        match self.points {
            7 => RULE_3,
            _ => RULE_1,
        }
    }
}

/// (λ₁, λ₂, weight); λ₃ = 1 − λ₁ − λ₂, weights sum to 1.
const RULE_1: &[(f64, f64, f64)] = &[(1.0 / 3.0, 1.0 / 3.0, 1.0)];

const RULE_3: &[(f64, f64, f64)] = &[
    (2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0),
    (1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0),
    (1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0),
];

const RULE_7: &[(f64, f64, f64)] = &[
    (1.0 / 3.0, 1.0 / 3.0, 0.225),
    (0.059715871789770, 0.470142064105115, 0.132394152788506),
    (0.470142064105115, 0.059715871789770, 0.132394152788506),
    (0.470142064105115, 0.470142064105115, 0.132394152788506),
    (0.797426985353087, 0.101286507323456, 0.125939180544827),
    (0.101286507323456, 0.797426985353087, 0.125939180544827),
    (0.101286507323456, 0.101286507323456, 0.125939180544827),
];

/// Result of an adaptive surface integral.
#[derive(Debug, Clone, Copy)]
pub struct AreaResult {
    pub value: f64,
    /// Closed-form contribution for truncated primitives (see
    /// `measure::AnalyticTail`); zero for plain mesh integrals.
    pub tail_correction: f64,
    /// Richardson-style estimate: accumulated |high-order − low-order|
    /// over leaf triangles.
    pub error_estimate: f64,
    /// Leaf triangles actually evaluated.
    pub leaf_count: usize,
}

struct FaceAccum<const N: usize> {
    value: [f64; N],
    error: f64,
    leaves: usize,
}

fn tri_value<const N: usize, F: Fn(&Point3) -> [f64; N]>(
    p0: &Point3,
    p1: &Point3,
    p2: &Point3,
    rule: &[(f64, f64, f64)],
    f: &F,
) -> ([f64; N], f64, f64) {
    let area = crate::mesh::triangle_area(p0, p1, p2);
    let mut acc = [0.0f64; N];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(l1, l2, w) in rule {
        let l3 = 1.0 - l1 - l2;
        let p = Point3::from(p0.coords * l1 + p1.coords * l2 + p2.coords * l3);
        let vals = f(&p);
        for (a, v) in acc.iter_mut().zip(&vals) {
            *a += w * v;
        }
        // spread measured on the first output, which by convention
        // carries the dominating density
        lo = lo.min(vals[0]);
        hi = hi.max(vals[0]);
    }
    for a in &mut acc {
        *a *= area;
    }
    let spread = if hi.abs().max(lo.abs()) > 0.0 {
        (hi - lo) / hi.abs().max(lo.abs()).max(1e-300)
    } else {
        0.0
    };
    (acc, spread, area)
}

fn integrate_face<const N: usize, F: Fn(&Point3) -> [f64; N]>(
    p0: Point3,
    p1: Point3,
    p2: Point3,
    spec: &QuadratureSpec,
    depth: u32,
    f: &F,
    out: &mut FaceAccum<N>,
) {
    let (hi_val, spread, _) = tri_value(&p0, &p1, &p2, spec.rule(), f);
    if spread > spec.adaptive_threshold && depth < spec.max_subdiv {
        let m01 = Point3::from((p0.coords + p1.coords) * 0.5);
        let m12 = Point3::from((p1.coords + p2.coords) * 0.5);
        let m20 = Point3::from((p2.coords + p0.coords) * 0.5);
        integrate_face(p0, m01, m20, spec, depth + 1, f, out);
        integrate_face(m01, p1, m12, spec, depth + 1, f, out);
        integrate_face(m20, m12, p2, spec, depth + 1, f, out);
        integrate_face(m01, m12, m20, spec, depth + 1, f, out);
        return;
    }
    let (lo_val, _, _) = tri_value(&p0, &p1, &p2, spec.lower_rule(), f);
    for (a, v) in out.value.iter_mut().zip(&hi_val) {
        *a += v;
    }
    out.error += (hi_val[0] - lo_val[0]).abs();
    out.leaves += 1;
}

/// Integrates `N` scalar densities simultaneously over the mesh.
/// Returns per-output totals plus a shared error estimate and leaf
/// count (driven by the first output).
pub fn integrate_densities<const N: usize, F>(
    mesh: &TriMesh,
    spec: &QuadratureSpec,
    f: F,
) -> Result<([f64; N], f64, usize)>
where
    F: Fn(&Point3) -> [f64; N] + Sync,
{
    spec.validate()?;
    let per_face: Vec<FaceAccum<N>> = (0..mesh.faces().len())
        .into_par_iter()
        .map(|fi| {
            let [p0, p1, p2] = mesh.face_corners(fi);
            let mut acc = FaceAccum {
                value: [0.0; N],
                error: 0.0,
                leaves: 0,
            };
            integrate_face(*p0, *p1, *p2, spec, 0, &f, &mut acc);
            acc
        })
        .collect();
    let mut totals = [0.0f64; N];
    for (k, t) in totals.iter_mut().enumerate() {
        *t = pairwise_sum(&per_face.iter().map(|a| a.value[k]).collect::<Vec<_>>());
    }
    let error = pairwise_sum(&per_face.iter().map(|a| a.error).collect::<Vec<_>>());
    let leaves = per_face.iter().map(|a| a.leaves).sum();
    Ok((totals, error, leaves))
}

#[allow(clippy::too_many_arguments)]
fn integrate_face_bary<const N: usize, F>(
    face: usize,
    p: [Point3; 3],
    b: [[f64; 3]; 3],
    spec: &QuadratureSpec,
    depth: u32,
    f: &F,
    out: &mut FaceAccum<N>,
) where
    F: Fn(usize, &Point3, [f64; 3]) -> [f64; N],
{
    let eval = |rule: &[(f64, f64, f64)]| {
        let area = crate::mesh::triangle_area(&p[0], &p[1], &p[2]);
        let mut acc = [0.0f64; N];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(l1, l2, w) in rule {
            let l3 = 1.0 - l1 - l2;
            let pt = Point3::from(p[0].coords * l1 + p[1].coords * l2 + p[2].coords * l3);
            let mut bary = [0.0f64; 3];
            for k in 0..3 {
                bary[k] = b[0][k] * l1 + b[1][k] * l2 + b[2][k] * l3;
            }
            let vals = f(face, &pt, bary);
            for (a, v) in acc.iter_mut().zip(&vals) {
                *a += w * v;
            }
            lo = lo.min(vals[0]);
            hi = hi.max(vals[0]);
        }
        for a in &mut acc {
            *a *= area;
        }
        let spread = if hi.abs().max(lo.abs()) > 0.0 {
            (hi - lo) / hi.abs().max(lo.abs()).max(1e-300)
        } else {
            0.0
        };
        (acc, spread)
    };
    let (hi_val, spread) = eval(spec.rule());
    if spread > spec.adaptive_threshold && depth < spec.max_subdiv {
        let mid = |a: usize, c: usize| {
            (
                Point3::from((p[a].coords + p[c].coords) * 0.5),
                [
                    (b[a][0] + b[c][0]) * 0.5,
                    (b[a][1] + b[c][1]) * 0.5,
                    (b[a][2] + b[c][2]) * 0.5,
                ],
            )
        };
        let (m01, b01) = mid(0, 1);
        let (m12, b12) = mid(1, 2);
        let (m20, b20) = mid(2, 0);
        integrate_face_bary(face, [p[0], m01, m20], [b[0], b01, b20], spec, depth + 1, f, out);
        integrate_face_bary(face, [m01, p[1], m12], [b01, b[1], b12], spec, depth + 1, f, out);
        integrate_face_bary(face, [m20, m12, p[2]], [b20, b12, b[2]], spec, depth + 1, f, out);
        integrate_face_bary(face, [m01, m12, m20], [b01, b12, b20], spec, depth + 1, f, out);
        return;
    }
    let (lo_val, _) = eval(spec.lower_rule());
    for (a, v) in out.value.iter_mut().zip(&hi_val) {
        *a += v;
    }
    out.error += (hi_val[0] - lo_val[0]).abs();
    out.leaves += 1;
}

/// Like `integrate_densities`, but the closure also receives the source
/// face index and the barycentric coordinates of the evaluation point,
/// for integrands that interpolate per-vertex data.
pub fn integrate_barycentric<const N: usize, F>(
    mesh: &TriMesh,
    spec: &QuadratureSpec,
    f: F,
) -> Result<([f64; N], f64, usize)>
where
    F: Fn(usize, &Point3, [f64; 3]) -> [f64; N] + Sync,
{
    spec.validate()?;
    let per_face: Vec<FaceAccum<N>> = (0..mesh.faces().len())
        .into_par_iter()
        .map(|fi| {
            let [p0, p1, p2] = mesh.face_corners(fi);
            let mut acc = FaceAccum {
                value: [0.0; N],
                error: 0.0,
                leaves: 0,
            };
            integrate_face_bary(
                fi,
                [*p0, *p1, *p2],
                [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
                spec,
                0,
                &f,
                &mut acc,
            );
            acc
        })
        .collect();
    let mut totals = [0.0f64; N];
    for (k, t) in totals.iter_mut().enumerate() {
        *t = pairwise_sum(&per_face.iter().map(|a| a.value[k]).collect::<Vec<_>>());
    }
    let error = pairwise_sum(&per_face.iter().map(|a| a.error).collect::<Vec<_>>());
    let leaves = per_face.iter().map(|a| a.leaves).sum();
    Ok((totals, error, leaves))
}

/// Single-density convenience wrapper.
pub fn integrate<F>(mesh: &TriMesh, spec: &QuadratureSpec, f: F) -> Result<AreaResult>
where
    F: Fn(&Point3) -> f64 + Sync,
{
    let (v, error_estimate, leaf_count) =
        integrate_densities::<1, _>(mesh, spec, |p| [f(p)])?;
    Ok(AreaResult {
        value: v[0],
        tail_correction: 0.0,
        error_estimate,
        leaf_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::plane_disk;
    use approx::assert_relative_eq;

    #[test]
    fn constant_density_gives_area() {
        let m = plane_disk(1.0, 2).unwrap();
        let r = integrate(&m, &QuadratureSpec::default(), |_| 1.0).unwrap();
        assert_relative_eq!(r.value, m.total_area(), max_relative = 1e-13);
        assert!(r.error_estimate < 1e-12);
    }

    #[test]
    fn degree_five_polynomials_are_exact() {
        // single unit right triangle in the plane; ∫ x⁵ dA over the
        // triangle (0,0),(1,0),(0,1) is 1/42
        let m = crate::mesh::TriMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            "tri",
        )
        .unwrap();
        let spec = QuadratureSpec {
            points: 7,
            adaptive_threshold: f64::INFINITY,
            max_subdiv: 0,
        };
        let r = integrate(&m, &spec, |p| p.x.powi(5)).unwrap();
        assert_relative_eq!(r.value, 1.0 / 42.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_subdivision_beats_fixed_rule_on_peaked_density() {
        let m = plane_disk(4.0, 1).unwrap();
        let f = |p: &Point3| (-p.coords.norm_squared() / 0.5).exp();
        let exact = std::f64::consts::PI * 0.5 * (1.0 - (-32.0f64).exp());
        let coarse = QuadratureSpec {
            points: 7,
            adaptive_threshold: f64::INFINITY,
            max_subdiv: 0,
        };
        let fine = QuadratureSpec {
            points: 7,
            adaptive_threshold: 0.2,
            max_subdiv: 6,
        };
        let e0 = (integrate(&m, &coarse, f).unwrap().value - exact).abs();
        let e1 = (integrate(&m, &fine, f).unwrap().value - exact).abs();
        assert!(e1 < e0 / 50.0, "adaptive {e1} vs fixed {e0}");
    }

    #[test]
    fn multi_output_matches_separate_runs() {
        let m = plane_disk(2.0, 2).unwrap();
        let spec = QuadratureSpec::default();
        let (both, _, _) = integrate_densities::<2, _>(&m, &spec, |p| {
            let w = (-p.coords.norm_squared() / 4.0).exp();
            [w, w * p.x * p.x]
        })
        .unwrap();
        let a = integrate(&m, &spec, |p| (-p.coords.norm_squared() / 4.0).exp()).unwrap();
        assert_relative_eq!(both[0], a.value, epsilon = 1e-15);
    }
}
