//! Mass-decreasing descent: classify a surface by its distance to the
//! model shrinker library, select the two-case descent field, step with
//! guaranteed Gaussian-area decrease, and run rescaled gradient flow.

use crate::error::{Error, Result};
use crate::measure::{gaussian_area, mass_near_infinity};
use crate::mesh::{DifferentialData, TriMesh};
use crate::quad::QuadratureSpec;
use crate::radial::{radial_field, radial_flow_map, CutoffSpec};
use crate::variation::{FieldKind, VectorFieldSpec};
use crate::{Point3, Vector3};

const FOUR_OVER_E: f64 = 4.0 / std::f64::consts::E;
/// λ(S¹×ℝ) = √(2π/e).
fn cylinder_entropy() -> f64 {
    (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt()
}

/// Analytic model shrinkers: all planes through the origin, the sphere
/// of radius 2, and all cylinders of radius √2. Stand-in for the full
/// stationary family, adequate for the low-genus, low-entropy fixtures
/// this artifact exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelShrinker {
    Plane,
    Sphere,
    Cylinder,
}

impl ModelShrinker {
    pub fn name(&self) -> &'static str {
        match self {
            ModelShrinker::Plane => "plane",
            ModelShrinker::Sphere => "sphere",
            ModelShrinker::Cylinder => "cylinder",
        }
    }

    pub fn entropy(&self) -> f64 {
        match self {
            ModelShrinker::Plane => 1.0,
            ModelShrinker::Sphere => FOUR_OVER_E,
            ModelShrinker::Cylinder => cylinder_entropy(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShrinkerLibrary {
    pub members: Vec<ModelShrinker>,
}

impl Default for ShrinkerLibrary {
    fn default() -> Self {
        ShrinkerLibrary {
            members: vec![
                ModelShrinker::Plane,
                ModelShrinker::Sphere,
                ModelShrinker::Cylinder,
            ],
        }
    }
}

#[derive(Debug, Clone)]
pub struct GapReport {
    /// Proxy distance to the nearest library member: Gaussian-weighted
    /// RMS point deviation + RMS normal misalignment + |ΔF|.
    pub gamma: f64,
    pub nearest: ModelShrinker,
    /// ⌈−log₂ γ⌉ clamped to [1, 40].
    pub annulus_j: u32,
}

struct WeightedSamples {
    points: Vec<Point3>,
    normals: Vec<Vector3>,
    /// Gaussian vertex weights, normalized to sum to 1.
    weights: Vec<f64>,
    f_value: f64,
}

fn weighted_samples(mesh: &TriMesh, quad: &QuadratureSpec) -> Result<WeightedSamples> {
    let data = DifferentialData::compute(mesh);
    let mut weights: Vec<f64> = mesh
        .vertices()
        .iter()
        .zip(&data.vertex_area)
        .map(|(p, a)| a * (-p.coords.norm_squared() / 4.0).exp())
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Undefined("mesh carries no Gaussian mass".into()));
    }
    for w in &mut weights {
        *w /= total;
    }
    let f_value = gaussian_area(mesh, quad, None)?.value;
    Ok(WeightedSamples {
        points: mesh.vertices().to_vec(),
        normals: data.normals,
        weights,
        f_value,
    })
}

/// Weighted second-moment matrix Σ w·xxᵀ; its eigenvectors align the
/// plane normal (smallest) and the cylinder axis (largest).
fn moment_axes(s: &WeightedSamples) -> [Vector3; 3] {
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    for (p, w) in s.points.iter().zip(&s.weights) {
        m += p.coords * p.coords.transpose() * *w;
    }
    let eig = nalgebra::SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    // ascending: [0] = plane normal candidate, [2] = cylinder axis
    [
        eig.eigenvectors.column(order[0]).into_owned(),
        eig.eigenvectors.column(order[1]).into_owned(),
        eig.eigenvectors.column(order[2]).into_owned(),
    ]
}

fn member_proxy(member: ModelShrinker, s: &WeightedSamples, axes: &[Vector3; 3]) -> f64 {
    let mut dist2 = 0.0;
    let mut mis2 = 0.0;
    match member {
        ModelShrinker::Plane => {
            let n = axes[0];
            for ((p, nv), w) in s.points.iter().zip(&s.normals).zip(&s.weights) {
                dist2 += p.coords.dot(&n).powi(2) * w;
                mis2 += (1.0 - nv.dot(&n).powi(2)) * w;
            }
        }
        ModelShrinker::Sphere => {
            for ((p, nv), w) in s.points.iter().zip(&s.normals).zip(&s.weights) {
                let r = p.coords.norm();
                dist2 += (r - 2.0).powi(2) * w;
                if r > 0.0 {
                    mis2 += (1.0 - nv.dot(&(p.coords / r)).powi(2)) * w;
                }
            }
        }
        ModelShrinker::Cylinder => {
            let a = axes[2];
            let r0 = 2.0f64.sqrt();
            for ((p, nv), w) in s.points.iter().zip(&s.normals).zip(&s.weights) {
                let radial = p.coords - a * p.coords.dot(&a);
                let r = radial.norm();
                dist2 += (r - r0).powi(2) * w;
                if r > 0.0 {
                    mis2 += (1.0 - nv.dot(&(radial / r)).powi(2)) * w;
                }
            }
        }
    }
    dist2.sqrt() + mis2.max(0.0).sqrt() + (s.f_value - member.entropy()).abs()
}

/// Distance-to-stationary classification: the minimal proxy distance
/// over the library, with the dyadic annulus index it falls in.
pub fn stationarity_gap(
    mesh: &TriMesh,
    lib: &ShrinkerLibrary,
    quad: &QuadratureSpec,
) -> Result<GapReport> {
    let s = weighted_samples(mesh, quad)?;
    let axes = moment_axes(&s);
    let mut best: Option<(f64, ModelShrinker)> = None;
    for &m in &lib.members {
        let g = member_proxy(m, &s, &axes);
        if best.map(|(b, _)| g < b).unwrap_or(true) {
            best = Some((g, m));
        }
    }
    let (gamma, nearest) = best.ok_or_else(|| Error::Parameter("empty library".into()))?;
    let annulus_j = if gamma > 0.0 {
        (-gamma.log2()).ceil().clamp(1.0, 40.0) as u32
    } else {
        40
    };
    Ok(GapReport {
        gamma,
        nearest,
        annulus_j,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentCase {
    CompactField,
    RadialField,
}

impl DescentCase {
    pub fn name(&self) -> &'static str {
        match self {
            DescentCase::CompactField => "compact_field",
            DescentCase::RadialField => "radial_field",
        }
    }
}

#[derive(Debug, Clone)]
pub struct DescentSelection {
    pub field: VectorFieldSpec,
    pub case: DescentCase,
    /// First-order estimate of dF/dt along the field; ≤ 0.
    pub predicted_rate: f64,
    /// Sampled C¹ norm of the field (≤ 1 by construction).
    pub c1_norm: f64,
}

/// Two-case selector. Far mass is measured as a *fraction* of the total
/// Gaussian area: the absolute Gaussian mass beyond any fixed radius is
/// bounded by area·e^{−r²/4}, so an absolute threshold would never fire.
///
/// Case 2 (radial drain): if the far fraction beyond `r_far` reaches
/// `far_mass_threshold`, pick the smallest ρ ≥ max(3, r_far/2) whose
/// annulus [ρ, 2ρ] holds at most threshold/100 of the mass, and return
/// the cutoff radial field with rate certificate −(1/8)·(far mass).
///
/// Case 1 (compact gradient): the sampled field −(H − ⟨x,n⟩/2)·n under a
/// bump vanishing beyond 2·r_far, normalized to C¹ norm ≤ 1.
pub fn select_descent_field(
    mesh: &TriMesh,
    far_mass_threshold: f64,
    r_far: f64,
    quad: &QuadratureSpec,
) -> Result<DescentSelection> {
    if !(far_mass_threshold > 0.0 && r_far > 0.0) {
        return Err(Error::Parameter(
            "far mass threshold and radius must be positive".into(),
        ));
    }
    let f_total = gaussian_area(mesh, quad, None)?.value;
    if !(f_total > 0.0) {
        return Err(Error::Undefined("mesh carries no Gaussian mass".into()));
    }
    let far_abs = mass_near_infinity(mesh, r_far, quad, None)?;
    if far_abs / f_total >= far_mass_threshold {
        // Case 2: find the quiet annulus
        let mut rho = (r_far / 2.0).max(3.0);
        let max_rho = mesh.diameter() + rho + 4.0;
        loop {
            let in_ball = mass_near_infinity(mesh, rho, quad, None)?;
            let beyond = mass_near_infinity(mesh, 2.0 * rho, quad, None)?;
            let annulus = (in_ball - beyond).max(0.0);
            if annulus / f_total <= far_mass_threshold / 100.0 {
                let spec = CutoffSpec::new(rho)?;
                let (field, c1_norm) = radial_field(&spec)?;
                return Ok(DescentSelection {
                    field,
                    case: DescentCase::RadialField,
                    predicted_rate: -far_abs / 8.0,
                    c1_norm,
                });
            }
            rho *= 1.25;
            if rho > max_rho {
                return Err(Error::Selection(format!(
                    "no annulus with fractional mass ≤ {} below ρ = {max_rho:.3}",
                    far_mass_threshold / 100.0
                )));
            }
        }
    }
    // Case 1: compactly supported negative gradient
    let data = DifferentialData::compute(mesh);
    let res = data.shrinker_residual(mesh);
    let n = mesh.vertices().len();
    // Gaussian-weighted vertex masses for the L² geometry of the projection
    let w: Vec<f64> = (0..n)
        .map(|i| {
            if mesh.boundary_flag()[i] {
                0.0
            } else {
                data.vertex_area[i]
                    * (-mesh.vertices()[i].coords.norm_squared() / 4.0).exp()
                    / (4.0 * std::f64::consts::PI)
            }
        })
        .collect();
    // descend orthogonally to the translate/dilate orbit: entropy is blind to
    // those directions, and they are exactly the unstable modes that would
    // otherwise carry the descent past a shrinker saddle
    let mut phi: Vec<f64> = res.iter().map(|r| -r).collect();
    let mut orbit: Vec<Vec<f64>> = Vec::with_capacity(4);
    orbit.push(
        (0..n)
            .map(|i| mesh.vertices()[i].coords.dot(&data.normals[i]))
            .collect(),
    );
    for k in 0..3 {
        orbit.push((0..n).map(|i| data.normals[i][k]).collect());
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).zip(&w).map(|((x, y), wi)| wi * x * y).sum()
    };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(4);
    for mut v in orbit {
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-12 {
            for vi in &mut v {
                *vi /= norm;
            }
            basis.push(v);
        }
    }
    for b in &basis {
        let c = dot(&phi, b);
        for (pi, bi) in phi.iter_mut().zip(b) {
            *pi -= c * bi;
        }
    }
    let raw: Vec<Vector3> = (0..n).map(|i| data.normals[i] * phi[i]).collect();
    // C¹ normalization from sampled sup |v| and edge difference quotients
    let mut scale: f64 = 0.0;
    for v in &raw {
        scale = scale.max(v.norm());
    }
    for f in mesh.faces() {
        for k in 0..3 {
            let (i, j) = (f[k], f[(k + 1) % 3]);
            let e = (mesh.vertices()[i] - mesh.vertices()[j]).norm();
            if e > 0.0 {
                scale = scale.max((raw[i] - raw[j]).norm() / e);
            }
        }
    }
    let raw_norm = scale;
    let scale = scale.max(1.0);
    let sampled: Vec<Vector3> = raw.iter().map(|v| v / scale).collect();
    let field = VectorFieldSpec::new(FieldKind::Sampled(sampled), Some(r_far))?;
    // first-order decrease estimate: −∫ φ² dV^G scaled by the clamp, where φ
    // is the orbit-projected residual carried by the field
    let rate = dot(&phi, &phi);
    Ok(DescentSelection {
        field,
        case: DescentCase::CompactField,
        predicted_rate: -rate / scale,
        c1_norm: raw_norm / scale, // ≤ 1 after clamping
    })
}

#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    pub max_time: f64,
    pub shrink_factor: f64,
    pub min_time: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            max_time: 0.1,
            shrink_factor: 0.5,
            min_time: 1e-7,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TraceStep {
    pub step: usize,
    pub f_value: f64,
    pub case: &'static str,
    pub gamma: f64,
    pub field_norm: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct TightenTrace {
    pub steps: Vec<TraceStep>,
    /// γ at termination (below the gate, or after max_steps).
    pub final_gamma: f64,
}

/// Termination gate on the stationarity proxy.
pub const GAMMA_GATE: f64 = 2e-2;
const FAR_MASS_THRESHOLD: f64 = 0.01;
const R_FAR: f64 = 8.0;

/// The descent loop: select the two-case field, flow with a backtracking
/// line search until F decreases, stop when γ falls below the gate.
pub fn tighten(
    mesh: &TriMesh,
    max_steps: usize,
    ctl: &StepControl,
    quad: &QuadratureSpec,
) -> Result<(TightenTrace, TriMesh)> {
    let lib = ShrinkerLibrary::default();
    let mut current = mesh.clone();
    let mut trace = TightenTrace::default();
    let mut f_prev = gaussian_area(&current, quad, None)?.value;
    let mut gamma = stationarity_gap(&current, &lib, quad)?.gamma;
    for step in 0..max_steps {
        if gamma < GAMMA_GATE {
            break;
        }
        let sel = select_descent_field(&current, FAR_MASS_THRESHOLD, R_FAR, quad)?;
        let mut dt = ctl.max_time;
        let accepted = loop {
            let moved = step_along(&current, &sel, dt)?;
            let f_new = gaussian_area(&moved, quad, None)?.value;
            if f_new < f_prev {
                break (moved, f_new);
            }
            dt *= ctl.shrink_factor;
            if dt < ctl.min_time {
                return Err(Error::Stall(format!(
                    "step {step}: no decrease above dt = {}, F = {f_prev:.9e}, γ = {gamma:.3e}",
                    ctl.min_time
                )));
            }
        };
        current = accepted.0;
        f_prev = accepted.1;
        gamma = stationarity_gap(&current, &lib, quad)?.gamma;
        trace.steps.push(TraceStep {
            step,
            f_value: f_prev,
            case: sel.case.name(),
            gamma,
            field_norm: sel.c1_norm,
            dt,
        });
    }
    trace.final_gamma = gamma;
    Ok((trace, current))
}

fn step_along(mesh: &TriMesh, sel: &DescentSelection, dt: f64) -> Result<TriMesh> {
    let vertices: Result<Vec<Point3>> = match &sel.field.kind {
        FieldKind::AnalyticRadial(spec) => mesh
            .vertices()
            .iter()
            .map(|p| radial_flow_map(dt, p, Some(spec)))
            .collect(),
        _ => {
            let vals = sel.field.vertex_values(mesh)?;
            Ok(mesh
                .vertices()
                .iter()
                .zip(&vals)
                .map(|(p, v)| p + v * dt)
                .collect())
        }
    };
    mesh.with_vertices(vertices?, mesh.metadata())
}

/// Rescaled-MCF gradient flow x ← x − dt·(H − ⟨x,n⟩/2)·n with per-step
/// backtracking so F never increases. Returns the trajectory including
/// the initial mesh.
pub fn shrinker_flow(
    mesh: &TriMesh,
    steps: usize,
    dt: f64,
    remesh_every: Option<usize>,
    quad: &QuadratureSpec,
) -> Result<Vec<TriMesh>> {
    if !mesh.is_watertight() {
        return Err(Error::Topology("gradient flow needs a closed mesh".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Parameter("dt must be positive".into()));
    }
    let mut traj = vec![mesh.clone()];
    let mut f_prev = gaussian_area(mesh, quad, None)?.value;
    for step in 1..=steps {
        let current = traj.last().unwrap();
        let data = DifferentialData::compute(current);
        let res = data.shrinker_residual(current);
        let mut h = dt;
        let (mut next, mut f_new);
        loop {
            let vs: Vec<Point3> = current
                .vertices()
                .iter()
                .enumerate()
                .map(|(i, p)| p - data.normals[i] * (h * res[i]))
                .collect();
            next = current.with_vertices(vs, current.metadata())?;
            f_new = gaussian_area(&next, quad, None)?.value;
            if f_new <= f_prev + 1e-9 {
                break;
            }
            h *= 0.5;
            if h < dt * 1e-6 {
                return Err(Error::Stall(format!(
                    "flow step {step}: backtracking exhausted at F = {f_prev:.9e}"
                )));
            }
        }
        if min_face_angle(&next) < 1.0f64.to_radians() {
            if remesh_every.is_none() {
                return Err(Error::Quality(format!(
                    "flow step {step}: minimal face angle fell below 1°"
                )));
            }
        }
        if let Some(k) = remesh_every {
            if k > 0 && step % k == 0 {
                next = tangential_relax(&next, f_new, quad)?;
            }
        }
        f_prev = gaussian_area(&next, quad, None)?.value;
        traj.push(next);
    }
    Ok(traj)
}

fn min_face_angle(mesh: &TriMesh) -> f64 {
    let vs = mesh.vertices();
    let mut min = f64::INFINITY;
    for f in mesh.faces() {
        for k in 0..3 {
            let e1 = vs[f[(k + 1) % 3]] - vs[f[k]];
            let e2 = vs[f[(k + 2) % 3]] - vs[f[k]];
            min = min.min(e1.angle(&e2));
        }
    }
    min
}

/// One pass of tangential Laplacian relaxation: each interior vertex
/// moves toward its one-ring centroid, with the normal component removed
/// so the shape is preserved to first order. Reverted entirely if F
/// drifts by more than the 1e−4 budget.
fn tangential_relax(mesh: &TriMesh, f_before: f64, quad: &QuadratureSpec) -> Result<TriMesh> {
    let data = DifferentialData::compute(mesh);
    let neighbors = mesh.vertex_neighbors();
    let vs = mesh.vertices();
    let moved: Vec<Point3> = (0..vs.len())
        .map(|i| {
            if mesh.boundary_flag()[i] || neighbors[i].is_empty() {
                return vs[i];
            }
            let mut c = Vector3::zeros();
            for &j in &neighbors[i] {
                c += vs[j].coords;
            }
            c /= neighbors[i].len() as f64;
            let d = c - vs[i].coords;
            let tangential = d - data.normals[i] * d.dot(&data.normals[i]);
            vs[i] + tangential * 0.5
        })
        .collect();
    let relaxed = mesh.with_vertices(moved, mesh.metadata())?;
    let f_after = gaussian_area(&relaxed, quad, None)?.value;
    if (f_after - f_before).abs() > 1e-4 {
        return Ok(mesh.clone());
    }
    Ok(relaxed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{ellipsoid, icosphere, perturbed_sphere};
    use crate::variation::shrinker_residual;
    use approx::assert_relative_eq;

    #[test]
    fn library_members_are_nearly_stationary_with_stone_masses() {
        let quad = QuadratureSpec::default();
        let fixtures = [
            (
                crate::mesh::primitives::plane_disk(10.0, 4).unwrap(),
                Some(crate::measure::AnalyticTail::PlaneDisk {
                    offset: 0.0,
                    radius: 10.0,
                }),
                1.0,
            ),
            (icosphere(2.0, 4).unwrap(), None, FOUR_OVER_E),
            (
                crate::mesh::primitives::cylinder(2.0f64.sqrt(), 16.0, 3).unwrap(),
                Some(crate::measure::AnalyticTail::Cylinder {
                    radius: 2.0f64.sqrt(),
                    half_height: 8.0,
                }),
                cylinder_entropy(),
            ),
        ];
        for (mesh, tail, f_expected) in &fixtures {
            assert!(shrinker_residual(mesh).sup < 5e-2);
            let f = gaussian_area(mesh, &quad, tail.as_ref()).unwrap().value;
            assert_relative_eq!(f, *f_expected, epsilon = 1e-3);
        }
    }

    #[test]
    fn gap_classification() {
        let quad = QuadratureSpec::default();
        let lib = ShrinkerLibrary::default();
        // self distance of the library sphere
        let sphere = icosphere(2.0, 4).unwrap();
        let g = stationarity_gap(&sphere, &lib, &quad).unwrap();
        assert!(g.gamma < 2e-2, "self gamma {}", g.gamma);
        assert_eq!(g.nearest, ModelShrinker::Sphere);
        assert!(g.annulus_j >= 1 && g.annulus_j <= 40);
        // perturbed sphere lands between the gate and 0.5
        let bump = perturbed_sphere(2.0, 0.1, 3).unwrap();
        let g = stationarity_gap(&bump, &lib, &quad).unwrap();
        assert!(g.gamma > 2e-2 && g.gamma < 0.5, "gamma {}", g.gamma);
        assert_eq!(g.nearest, ModelShrinker::Sphere);
        // far translated sphere is far from everything
        let far = crate::measure::translate_dilate(
            &icosphere(2.0, 3).unwrap(),
            &Vector3::new(-6.0, 0.0, 0.0),
            1.0,
        )
        .unwrap();
        let g = stationarity_gap(&far, &lib, &quad).unwrap();
        assert!(g.gamma > 0.1, "gamma {}", g.gamma);
    }

    #[test]
    fn selector_cases_and_certificates() {
        let quad = QuadratureSpec::default();
        // all mass far away: the radial case fires with its rate bound
        let far = icosphere(20.0, 3).unwrap();
        let sel = select_descent_field(&far, 0.01, 8.0, &quad).unwrap();
        assert_eq!(sel.case, DescentCase::RadialField);
        assert!(sel.c1_norm <= 1.0);
        let fv = crate::variation::first_variation(&far, &sel.field, &quad).unwrap();
        let far_mass = mass_near_infinity(&far, 8.0, &quad, None).unwrap();
        assert!(fv <= -far_mass / 8.0, "fv {fv} vs bound {}", -far_mass / 8.0);
        assert!(fv <= sel.predicted_rate);
        // compact mass: gradient case with a strictly negative rate
        let bump = perturbed_sphere(2.0, 0.1, 3).unwrap();
        let sel = select_descent_field(&bump, 0.01, 8.0, &quad).unwrap();
        assert_eq!(sel.case, DescentCase::CompactField);
        assert!(sel.predicted_rate < 0.0);
        assert!(crate::variation::first_variation(&bump, &sel.field, &quad).unwrap() < 0.0);
        // near-stationary: rate collapses
        let sphere = icosphere(2.0, 4).unwrap();
        let sel = select_descent_field(&sphere, 0.01, 8.0, &quad).unwrap();
        assert_eq!(sel.case, DescentCase::CompactField);
        assert!(sel.predicted_rate.abs() < 1e-3);
    }

    #[test]
    fn tighten_descends_to_the_sphere() {
        let quad = QuadratureSpec::default();
        let m = perturbed_sphere(2.0, 0.1, 3).unwrap();
        let (trace, last) = tighten(&m, 200, &StepControl::default(), &quad).unwrap();
        // F nonincreasing along the trace
        let mut prev = f64::INFINITY;
        for s in &trace.steps {
            assert!(s.f_value <= prev + 1e-9);
            prev = s.f_value;
        }
        assert!(trace.final_gamma < 5e-2, "gamma {}", trace.final_gamma);
        assert!(shrinker_residual(&last).sup < 8e-2);
        let f = gaussian_area(&last, &quad, None).unwrap().value;
        assert!(f >= FOUR_OVER_E - 1e-6 && f <= FOUR_OVER_E + 5e-3, "F {f}");
    }

    #[test]
    fn tighten_drains_far_mass_radially() {
        let quad = QuadratureSpec::default();
        let far = icosphere(20.0, 2).unwrap();
        let ctl = StepControl::default();
        let (trace, _) = tighten(&far, 20, &ctl, &quad).unwrap();
        assert!(!trace.steps.is_empty());
        let f0 = gaussian_area(&far, &quad, None).unwrap().value;
        let mut prev = f0;
        for s in &trace.steps {
            assert_eq!(s.case, "radial_field");
            // decrement certificate per accepted step
            let far_mass = prev; // entire sphere is far mass
            assert!(
                prev - s.f_value >= 0.9 * (far_mass / 8.0) * s.dt,
                "step {}: decrease {} below certificate",
                s.step,
                prev - s.f_value
            );
            prev = s.f_value;
        }
    }

    #[test]
    fn library_sphere_is_a_fixed_point() {
        let quad = QuadratureSpec::default();
        let sphere = icosphere(2.0, 4).unwrap();
        let f0 = gaussian_area(&sphere, &quad, None).unwrap().value;
        let (trace, last) = tighten(&sphere, 5, &StepControl::default(), &quad).unwrap();
        assert!(trace.steps.len() <= 1);
        let f1 = gaussian_area(&last, &quad, None).unwrap().value;
        assert!((f1 - f0).abs() < 1e-6);
        let drift = sphere
            .vertices()
            .iter()
            .zip(last.vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-6);
    }

    #[test]
    fn gradient_flow_converges_to_shrinkers() {
        let quad = QuadratureSpec::default();
        // perturbed sphere relaxes to the round shrinker
        let m = perturbed_sphere(2.0, 0.05, 3).unwrap();
        let traj = shrinker_flow(&m, 250, 0.01, None, &quad).unwrap();
        let last = traj.last().unwrap();
        assert!(shrinker_residual(last).sup < 5e-2);
        let f = gaussian_area(last, &quad, None).unwrap().value;
        assert!((f - FOUR_OVER_E).abs() < 2e-3, "F {f}");
        // F nonincreasing along the trajectory
        let mut prev = f64::INFINITY;
        for mesh in &traj {
            let f = gaussian_area(mesh, &quad, None).unwrap().value;
            assert!(f <= prev + 1e-9);
            prev = f;
        }
    }

    #[test]
    fn ellipsoid_flows_to_the_round_sphere() {
        let quad = QuadratureSpec::default();
        let m = ellipsoid([2.2, 2.0, 1.8], 3).unwrap();
        let traj = shrinker_flow(&m, 400, 0.01, Some(25), &quad).unwrap();
        let last = traj.last().unwrap();
        // the raw flow leaves the dilation mode free (it drifts slowly), so
        // roundness is judged against the best-fitting sphere radius
        let n = last.vertices().len() as f64;
        let r_fit = last.vertices().iter().map(|p| p.coords.norm()).sum::<f64>() / n;
        let rms = (last
            .vertices()
            .iter()
            .map(|p| (p.coords.norm() - r_fit).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
        assert!(rms < 2e-2, "rms distance to the nearest round sphere {rms}");
    }

    #[test]
    fn exact_sphere_is_a_flow_fixed_point() {
        let quad = QuadratureSpec::default();
        let m = icosphere(2.0, 3).unwrap();
        let traj = shrinker_flow(&m, 100, 0.01, None, &quad).unwrap();
        let drift = m
            .vertices()
            .iter()
            .zip(traj.last().unwrap().vertices())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(drift < 1e-3, "drift {drift}");
    }
}
