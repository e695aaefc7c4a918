//! Gaussian-weighted integrals over surfaces: Gaussian area, the
//! two-parameter density functional, enclosed Gaussian volume, the
//! isoperimetric profile, volume-growth checks, mass near infinity, and
//! best-fit plane diagnostics.

use crate::error::{Error, Result};
use crate::mesh::TriMesh;
use crate::numerics::{bessel_i0_scaled, bisect};
use crate::quad::{integrate, integrate_densities, AreaResult, QuadratureSpec};
use crate::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Center and scale of the Gaussian density functional.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DensityParams {
    pub x0: Point3,
    pub t0: f64,
}

impl DensityParams {
    pub fn new(x0: Point3, t0: f64) -> Result<Self> {
        if !(t0 > 0.0) {
            return Err(Error::Parameter(format!("t0 must be positive, got {t0}")));
        }
        Ok(DensityParams { x0, t0 })
    }

    /// The standard Gaussian area parameters (0, 1).
    pub fn origin_unit() -> Self {
        DensityParams {
            x0: Point3::origin(),
            t0: 1.0,
        }
    }

    /// ρ(x) = (4π t₀)⁻¹ exp(−|x − x₀|²/(4 t₀)), the 2-dimensional
    /// normalization.
    pub fn density(&self, x: &Point3) -> f64 {
        ((x - self.x0).norm_squared() / (-4.0 * self.t0)).exp() / (FOUR_PI * self.t0)
    }
}

/// Closed-form Gaussian-area contribution of the untruncated remainder of
/// a plane or cylinder primitive. Both are described in the axis-aligned
/// frame the generators produce (plane normal and cylinder axis = e_z).
#[derive(Debug, Clone, Copy)]
pub enum AnalyticTail {
    /// Plane z = offset beyond in-plane radius `radius`.
    PlaneDisk { offset: f64, radius: f64 },
    /// Cylinder x² + y² = radius² beyond |z| > half_height.
    Cylinder { radius: f64, half_height: f64 },
}

impl AnalyticTail {
    /// Tail of the density functional F_{x₀,t₀}; the standard Gaussian
    /// area tail is the (0,1) case.
    pub fn density_tail(&self, p: &DensityParams) -> f64 {
        let t0 = p.t0;
        match *self {
            AnalyticTail::PlaneDisk { offset, radius } => {
                // whole plane minus disk; the offset disk integral is a
                // 1D radial integral with a Bessel kernel
                let c = (p.x0.x * p.x0.x + p.x0.y * p.x0.y).sqrt();
                let dz = offset - p.x0.z;
                let axial = (-dz * dz / (4.0 * t0)).exp();
                axial * (1.0 - offset_disk_mass(radius, c, t0))
            }
            AnalyticTail::Cylinder {
                radius,
                half_height,
            } => {
                let c = (p.x0.x * p.x0.x + p.x0.y * p.x0.y).sqrt();
                let a = p.x0.z;
                // angular factor: the θ-integral gives 2π I0(Rc/(2t0));
                // combined with e^{−(R²+c²)/(4t0)} the exponent is the
                // safe −(R−c)²/(4t0)
                let s = radius * c / (2.0 * t0);
                let ang = (radius / (2.0 * t0))
                    * (-(radius - c) * (radius - c) / (4.0 * t0)).exp()
                    * bessel_i0_scaled(s);
                // axial factor: ∫_{|z|>h} e^{−(z−a)²/(4t0)} dz
                let sq = t0.sqrt();
                let axial = (std::f64::consts::PI * t0).sqrt()
                    * (libm::erfc((half_height - a) / (2.0 * sq))
                        + libm::erfc((half_height + a) / (2.0 * sq)));
                ang * axial
            }
        }
    }

    /// Portion of the standard (0,1) tail lying outside the ball |x| > r.
    pub fn tail_beyond(&self, r: f64) -> f64 {
        match *self {
            AnalyticTail::PlaneDisk { offset, radius } => {
                let min_r = if r * r > offset * offset {
                    (r * r - offset * offset).sqrt().max(radius)
                } else {
                    radius
                };
                AnalyticTail::PlaneDisk {
                    offset,
                    radius: min_r,
                }
                .density_tail(&DensityParams::origin_unit())
            }
            AnalyticTail::Cylinder {
                radius,
                half_height,
            } => {
                let min_h = if r * r > radius * radius {
                    (r * r - radius * radius).sqrt().max(half_height)
                } else {
                    half_height
                };
                AnalyticTail::Cylinder {
                    radius,
                    half_height: min_h,
                }
                .density_tail(&DensityParams::origin_unit())
            }
        }
    }
}

/// Mass of the unit-scale disk integral ∫_{|u|<ρ} e^{−|u−c|²/(4t0)}/(4πt0) du
/// for an offset |c| from the disk center, by 1D radial quadrature.
fn offset_disk_mass(rho: f64, c: f64, t0: f64) -> f64 {
    // integrand: (r/(2t0)) e^{−(r²+c²)/(4t0)} I0(rc/(2t0)); Simpson on a
    // grid fine relative to the Gaussian scale
    let n = 2 * ((rho / t0.sqrt() * 16.0).ceil() as usize).clamp(64, 20_000);
    let h = rho / n as f64;
    let f = |r: f64| {
        let s = r * c / (2.0 * t0);
        (r / (2.0 * t0)) * (-(r * r + c * c) / (4.0 * t0) + s).exp() * bessel_i0_scaled(s)
    };
    let mut acc = f(0.0) + f(rho);
    for i in 1..n {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (acc * h / 3.0).clamp(0.0, 1.0)
}

/// F_{x₀,t₀}(Σ) = ∫ ρ_{(x₀,t₀)} dA with optional analytic tail.
pub fn f_density(
    mesh: &TriMesh,
    p: &DensityParams,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<AreaResult> {
    if !(p.t0 > 0.0) {
        return Err(Error::Parameter("t0 must be positive".into()));
    }
    let mut r = integrate(mesh, quad, |x| p.density(x))?;
    if let Some(t) = tail {
        r.tail_correction = t.density_tail(p);
        r.value += r.tail_correction;
    }
    Ok(r)
}

/// Gaussian area F(Σ) = (1/4π)∫ e^{−|x|²/4} dA.
pub fn gaussian_area(
    mesh: &TriMesh,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<AreaResult> {
    f_density(mesh, &DensityParams::origin_unit(), quad, tail)
}

/// x ↦ s(x − t): topology preserved, vertices remapped.
pub fn translate_dilate(mesh: &TriMesh, t: &Vector3, s: f64) -> Result<TriMesh> {
    if !(s > 0.0) {
        return Err(Error::Parameter(format!("scale must be positive, got {s}")));
    }
    let vertices = mesh
        .vertices()
        .iter()
        .map(|p| Point3::from((p.coords - t) * s))
        .collect();
    mesh.with_vertices(
        vertices,
        &format!("{}|td(t=[{},{},{}],s={s})", mesh.metadata(), t.x, t.y, t.z),
    )
}

/// Monte Carlo estimate of γ(Ω) = (4π)^{−3/2}∫_Ω e^{−|x|²/4}dx for the
/// region enclosed by a watertight mesh: sample the ambient measure
/// (N(0, 2I)) and test ray parity. Returns (estimate, standard error).
pub fn gaussian_enclosed_volume(mesh: &TriMesh, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if !mesh.is_watertight() {
        return Err(Error::Topology(
            "enclosed volume needs a closed, consistently oriented mesh".into(),
        ));
    }
    let grid = RayGrid::build(mesh);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    let sqrt2 = 2.0f64.sqrt();
    let draw = |rng: &mut ChaCha8Rng| -> f64 {
        // Box–Muller; one value per call keeps the stream layout simple
        let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    for _ in 0..samples {
        let p = Point3::new(
            sqrt2 * draw(&mut rng),
            sqrt2 * draw(&mut rng),
            sqrt2 * draw(&mut rng),
        );
        if grid.inside(mesh, &p) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    let se = (p * (1.0 - p) / samples as f64).sqrt();
    Ok((p, se))
}

/// 2D acceleration grid for vertical-ray parity queries.
struct RayGrid {
    lo: [f64; 2],
    hi: [f64; 2],
    n: usize,
    cells: Vec<Vec<u32>>,
}

impl RayGrid {
    fn build(mesh: &TriMesh) -> Self {
        let (blo, bhi) = mesh.bounding_box();
        let lo = [blo.x, blo.y];
        let hi = [bhi.x, bhi.y];
        let n = ((mesh.faces().len() as f64).sqrt().ceil() as usize).clamp(4, 512);
        let mut cells = vec![Vec::new(); n * n];
        let span = [(hi[0] - lo[0]).max(1e-30), (hi[1] - lo[1]).max(1e-30)];
        for (fi, _) in mesh.faces().iter().enumerate() {
            let [p0, p1, p2] = mesh.face_corners(fi);
            let (minx, maxx) = minmax3(p0.x, p1.x, p2.x);
            let (miny, maxy) = minmax3(p0.y, p1.y, p2.y);
            let i0 = (((minx - lo[0]) / span[0] * n as f64).floor() as isize).clamp(0, n as isize - 1);
            let i1 = (((maxx - lo[0]) / span[0] * n as f64).floor() as isize).clamp(0, n as isize - 1);
            let j0 = (((miny - lo[1]) / span[1] * n as f64).floor() as isize).clamp(0, n as isize - 1);
            let j1 = (((maxy - lo[1]) / span[1] * n as f64).floor() as isize).clamp(0, n as isize - 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    cells[i as usize * n + j as usize].push(fi as u32);
                }
            }
        }
        RayGrid { lo, hi, n, cells }
    }

    fn inside(&self, mesh: &TriMesh, p: &Point3) -> bool {
        if p.x < self.lo[0] || p.x > self.hi[0] || p.y < self.lo[1] || p.y > self.hi[1] {
            return false;
        }
        let span = [
            (self.hi[0] - self.lo[0]).max(1e-30),
            (self.hi[1] - self.lo[1]).max(1e-30),
        ];
        let i = (((p.x - self.lo[0]) / span[0] * self.n as f64).floor() as isize)
            .clamp(0, self.n as isize - 1) as usize;
        let j = (((p.y - self.lo[1]) / span[1] * self.n as f64).floor() as isize)
            .clamp(0, self.n as isize - 1) as usize;
        let mut crossings = 0usize;
        for &fi in &self.cells[i * self.n + j] {
            let [p0, p1, p2] = mesh.face_corners(fi as usize);
            // 2D barycentric test in the xy-projection
            let d = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
            if d.abs() < 1e-300 {
                continue;
            }
            let l1 = ((p.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p.y - p0.y)) / d;
            let l2 = ((p1.x - p0.x) * (p.y - p0.y) - (p.x - p0.x) * (p1.y - p0.y)) / d;
            let l0 = 1.0 - l1 - l2;
            if l0 < 0.0 || l1 < 0.0 || l2 < 0.0 {
                continue;
            }
            let z = p0.z * l0 + p1.z * l1 + p2.z * l2;
            if z > p.z {
                crossings += 1;
            }
        }
        crossings % 2 == 1
    }
}

fn minmax3(a: f64, b: f64, c: f64) -> (f64, f64) {
    (a.min(b).min(c), a.max(b).max(c))
}

/// Minimal Gaussian boundary area among regions of Gaussian volume `v`:
/// e^{−d²/4}, where the halfspace {z > d} carries volume v.
pub fn isoperimetric_profile(v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Parameter(format!("volume fraction {v} outside [0,1]")));
    }
    if v == 0.0 || v == 1.0 {
        return Ok(0.0);
    }
    // halfspace-volume(d) = ½ erfc(d/2)
    let d = bisect(|d| 0.5 * libm::erfc(d / 2.0) - v, -60.0, 60.0, 1e-12)?;
    Ok((-d * d / 4.0).exp())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct GrowthRecord {
    pub radius: f64,
    pub euclidean_mass: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Polynomial volume growth: Euclidean area inside B(0,r) must stay
/// below e^{1/4}·4π·F·r² for each requested radius.
pub fn volume_growth_check(
    mesh: &TriMesh,
    radii: &[f64],
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<Vec<GrowthRecord>> {
    let f = gaussian_area(mesh, quad, tail)?.value;
    let c = (0.25f64).exp() * FOUR_PI * f;
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return Err(Error::Parameter("radii must be positive".into()));
            }
            let mass = integrate(mesh, quad, |x| {
                if x.coords.norm() <= r {
                    1.0
                } else {
                    0.0
                }
            })?
            .value;
            Ok(GrowthRecord {
                radius: r,
                euclidean_mass: mass,
                bound: c * r * r,
                pass: mass <= c * r * r,
            })
        })
        .collect()
}

/// Gaussian area carried outside the ball of radius `r`.
pub fn mass_near_infinity(
    mesh: &TriMesh,
    r: f64,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::Parameter("radius must be nonnegative".into()));
    }
    let mut m = integrate(mesh, quad, |x| {
        if x.coords.norm() > r {
            DensityParams::origin_unit().density(x)
        } else {
            0.0
        }
    })?
    .value;
    if let Some(t) = tail {
        m += t.tail_beyond(r);
    }
    Ok(m)
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PlaneFit {
    pub normal: Vector3,
    pub offset: f64,
    /// Gaussian-weighted RMS orthogonal deviation plus the Gaussian-area
    /// deviation |F − e^{−offset²/4}|; zero exactly on planes.
    pub distance_proxy: f64,
}

/// Best-fit affine plane under Gaussian-weighted PCA of the surface.
pub fn nearest_plane(
    mesh: &TriMesh,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<PlaneFit> {
    let p0 = DensityParams::origin_unit();
    let ([w, wx, wy, wz, xx, yy, zz, xy, xz, yz], _, _) =
        integrate_densities::<10, _>(mesh, quad, |x| {
            let w = p0.density(x);
            [
                w,
                w * x.x,
                w * x.y,
                w * x.z,
                w * x.x * x.x,
                w * x.y * x.y,
                w * x.z * x.z,
                w * x.x * x.y,
                w * x.x * x.z,
                w * x.y * x.z,
            ]
        })?;
    let f_total = w + tail.map_or(0.0, |t| t.density_tail(&p0));
    if f_total <= 1e-14 {
        return Err(Error::Undefined("zero Gaussian area".into()));
    }
    // Tail moments are omitted: the fit uses the meshed part, the area
    // term uses the full F. On tailed fixtures the mesh dominates the fit
    // by construction.
    let mu = Vector3::new(wx, wy, wz) / w;
    let mut cov = nalgebra::Matrix3::new(xx, xy, xz, xy, yy, yz, xz, yz, zz) / w
        - mu * mu.transpose();
    cov = (cov + cov.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut k_min = 0;
    for k in 1..3 {
        if eig.eigenvalues[k] < eig.eigenvalues[k_min] {
            k_min = k;
        }
    }
    let mut normal: Vector3 = eig.eigenvectors.column(k_min).into();
    let mut offset = mu.dot(&normal);
    if offset < 0.0 || (offset == 0.0 && normal.z < 0.0) {
        normal = -normal;
        offset = -offset;
    }
    let rms = eig.eigenvalues[k_min].max(0.0).sqrt();
    let area_dev = (f_total - (-offset * offset / 4.0).exp()).abs();
    Ok(PlaneFit {
        normal,
        offset,
        distance_proxy: rms + area_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives::{cylinder, icosphere, plane_disk};
    use approx::assert_relative_eq;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn stone_constant_sphere() {
        // F(S²_R) = (R²/1)e^{−R²/4}; at R=2 this is 4/e
        let m = icosphere(2.0, 5).unwrap();
        let f = gaussian_area(&m, &quad(), None).unwrap();
        let exact = 4.0 / std::f64::consts::E;
        assert!((f.value - exact).abs() < 1e-4, "F = {}, want {}", f.value, exact);
    }

    #[test]
    fn stone_constant_plane() {
        let m = plane_disk(12.0, 3).unwrap();
        let tail = AnalyticTail::PlaneDisk {
            offset: 0.0,
            radius: 12.0,
        };
        let f = gaussian_area(&m, &quad(), Some(&tail)).unwrap();
        assert!((f.value - 1.0).abs() < 1e-6, "F = {}", f.value);
    }

    #[test]
    fn stone_constant_cylinder() {
        let r = 2.0f64.sqrt();
        let m = cylinder(r, 8.0, 3).unwrap();
        let tail = AnalyticTail::Cylinder {
            radius: r,
            half_height: 4.0,
        };
        let f = gaussian_area(&m, &quad(), Some(&tail)).unwrap();
        let exact = (2.0 * std::f64::consts::PI / std::f64::consts::E).sqrt();
        assert!((f.value - exact).abs() < 1e-3, "F = {}, want {}", f.value, exact);
    }

    #[test]
    fn density_at_unit_params_is_gaussian_area() {
        let m = icosphere(2.0, 3).unwrap();
        let a = gaussian_area(&m, &quad(), None).unwrap().value;
        let b = f_density(&m, &DensityParams::origin_unit(), &quad(), None)
            .unwrap()
            .value;
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn density_closed_form_on_sphere() {
        // F_{0,t0}(S²_R) = (R²/t0) e^{−R²/(4 t0)}
        let m = icosphere(2.0, 4).unwrap();
        let p = DensityParams::new(Point3::origin(), 4.0).unwrap();
        let v = f_density(&m, &p, &quad(), None).unwrap().value;
        assert!((v - (-0.25f64).exp()).abs() < 1e-3, "got {v}");
        let at_unit = gaussian_area(&m, &quad(), None).unwrap().value;
        assert!(v <= at_unit);
    }

    #[test]
    fn translate_dilate_identity_and_halving() {
        let m = icosphere(2.0, 4).unwrap();
        let id = translate_dilate(&m, &Vector3::zeros(), 1.0).unwrap();
        assert_eq!(m.vertices(), id.vertices());
        let half = translate_dilate(&m, &Vector3::zeros(), 0.5).unwrap();
        let f = gaussian_area(&half, &quad(), None).unwrap().value;
        assert!((f - (-0.25f64).exp()).abs() < 1e-3); // R²e^{−R²/4} at R=1
    }

    #[test]
    fn scaling_identity_machine_precision() {
        let m = crate::mesh::primitives::ellipsoid([2.2, 2.0, 1.8], 3).unwrap();
        let t = Vector3::new(0.3, -0.2, 0.5);
        let s = 1.7;
        let lhs = gaussian_area(&translate_dilate(&m, &t, s).unwrap(), &quad(), None)
            .unwrap()
            .value;
        let p = DensityParams::new(Point3::from(t), 1.0 / (s * s)).unwrap();
        let rhs = f_density(&m, &p, &quad(), None).unwrap().value;
        let f = gaussian_area(&m, &quad(), None).unwrap().value;
        assert!((lhs - rhs).abs() <= 1e-8 * f, "|{lhs} - {rhs}| vs {f}");
    }

    #[test]
    fn enclosed_volume_of_spheres() {
        // P(|N(0,2I)| ≤ 2): radial integral oracle
        let oracle = {
            // Simpson over r ∈ [0,2] of (4π)^{−3/2} e^{−r²/4} 4π r²
            let n = 4000;
            let h = 2.0 / n as f64;
            let f = |r: f64| {
                (FOUR_PI as f64).powf(-1.5) * (-r * r / 4.0).exp() * FOUR_PI * r * r
            };
            let mut acc = f(0.0) + f(2.0);
            for i in 1..n {
                acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        assert_relative_eq!(oracle, 0.42759, max_relative = 1e-4);

        let m = icosphere(2.0, 3).unwrap();
        let (v, se) = gaussian_enclosed_volume(&m, 200_000, 7).unwrap();
        assert!((v - oracle).abs() < 3.0 * se + 1e-3, "v={v} oracle={oracle} se={se}");

        let big = icosphere(50.0, 2).unwrap();
        let (v, _) = gaussian_enclosed_volume(&big, 50_000, 7).unwrap();
        assert!((v - 1.0).abs() < 1e-6);

        let far = translate_dilate(&icosphere(1.0, 2).unwrap(), &Vector3::new(-20.0, 0.0, 0.0), 1.0)
            .unwrap();
        let (v, se) = gaussian_enclosed_volume(&far, 50_000, 7).unwrap();
        assert!(v <= 3.0 * se + 1e-9);
    }

    #[test]
    fn open_mesh_rejected_for_volume() {
        let m = plane_disk(2.0, 1).unwrap();
        assert!(matches!(
            gaussian_enclosed_volume(&m, 10, 0),
            Err(Error::Topology(_))
        ));
    }

    #[test]
    fn isoperimetric_profile_values() {
        assert_relative_eq!(isoperimetric_profile(0.5).unwrap(), 1.0, epsilon = 1e-10);
        assert_eq!(isoperimetric_profile(0.0).unwrap(), 0.0);
        let v_at_2 = 0.5 * libm::erfc(1.0);
        assert_relative_eq!(
            isoperimetric_profile(v_at_2).unwrap(),
            (-1.0f64).exp(),
            epsilon = 1e-10
        );
    }

    #[test]
    fn volume_growth_closed_forms() {
        let m = icosphere(2.0, 3).unwrap();
        let recs = volume_growth_check(&m, &[3.0], &quad(), None).unwrap();
        assert!(recs[0].pass);
        assert_relative_eq!(recs[0].euclidean_mass, 16.0 * std::f64::consts::PI, max_relative = 1e-2);
        let want_bound = (0.25f64).exp() * FOUR_PI * (4.0 / std::f64::consts::E) * 9.0;
        assert_relative_eq!(recs[0].bound, want_bound, max_relative = 1e-3);

        let d = plane_disk(12.0, 3).unwrap();
        let tail = AnalyticTail::PlaneDisk { offset: 0.0, radius: 12.0 };
        let recs = volume_growth_check(&d, &[1.0], &quad(), Some(&tail)).unwrap();
        assert!(recs[0].pass);
        assert_relative_eq!(recs[0].euclidean_mass, std::f64::consts::PI, max_relative = 1e-2);
    }

    #[test]
    fn mass_near_infinity_monotone_and_matches_tail_oracle() {
        let m = icosphere(2.0, 3).unwrap();
        assert!(mass_near_infinity(&m, 10.0, &quad(), None).unwrap() < 1e-15);
        let total = mass_near_infinity(&m, 0.0, &quad(), None).unwrap();
        assert_relative_eq!(
            total,
            gaussian_area(&m, &quad(), None).unwrap().value,
            max_relative = 1e-12
        );

        let r = 2.0f64.sqrt();
        let c = cylinder(r, 8.0, 3).unwrap();
        let tail = AnalyticTail::Cylinder { radius: r, half_height: 4.0 };
        let m4 = mass_near_infinity(&c, 4.0, &quad(), Some(&tail)).unwrap();
        // oracle: (r/2)e^{−r²/4}·∫_{|z|>√(16−2)} e^{−z²/4} dz
        let z0 = (16.0f64 - 2.0).sqrt();
        let oracle = (r / 2.0)
            * (-r * r / 4.0).exp()
            * 2.0
            * std::f64::consts::PI.sqrt()
            * libm::erfc(z0 / 2.0);
        assert!((m4 - oracle).abs() < 1e-3, "{m4} vs {oracle}");
        let m5 = mass_near_infinity(&c, 5.0, &quad(), Some(&tail)).unwrap();
        assert!(m5 <= m4);
    }

    #[test]
    fn nearest_plane_diagnostics() {
        // exact offset plane
        let mut d = plane_disk(12.0, 3).unwrap();
        let up = Vector3::new(0.0, 0.0, -1.0);
        d = translate_dilate(&d, &up, 1.0).unwrap(); // shift to z = 1
        let tail = AnalyticTail::PlaneDisk { offset: 1.0, radius: 12.0 };
        let fit = nearest_plane(&d, &quad(), Some(&tail)).unwrap();
        assert!(fit.normal.z.abs() > 1.0 - 1e-9);
        assert_relative_eq!(fit.offset, 1.0, epsilon = 1e-9);
        assert!(fit.distance_proxy < 1e-6, "proxy {}", fit.distance_proxy);

        let s = icosphere(2.0, 3).unwrap();
        let fit = nearest_plane(&s, &quad(), None).unwrap();
        assert!(fit.distance_proxy > 0.3, "proxy {}", fit.distance_proxy);
    }
}
