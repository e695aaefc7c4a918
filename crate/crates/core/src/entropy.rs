//! Entropy as a global maximization of the density functional
//! F_{x₀,t₀}, plus shrinker-specific diagnostics: the maximum-at-(0,1)
//! check and dilation monotonicity.

use crate::error::{Error, Result};
use crate::measure::{f_density, AnalyticTail, DensityParams};
use crate::mesh::TriMesh;
use crate::numerics::bfgs_minimize;
use crate::quad::{integrate_densities, QuadratureSpec};
use crate::variation::shrinker_residual;
use crate::Point3;
use nalgebra::DVector;

/// Residual gate for the shrinker-only checks.
pub const SHRINKER_RESIDUAL_GATE: f64 = 5e-2;

#[derive(Debug, Clone)]
pub struct EntropyOpts {
    /// Grid points per spatial axis over the inflated bounding box.
    pub grid_n: usize,
    /// Grid points along log t₀.
    pub t_grid_n: usize,
    /// Number of best grid cells refined by quasi-Newton.
    pub starts: usize,
    /// Gradient-norm tolerance of the refinement.
    pub refine_tol: f64,
}

impl Default for EntropyOpts {
    fn default() -> Self {
        EntropyOpts {
            grid_n: 9,
            t_grid_n: 11,
            starts: 5,
            refine_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct EntropyResult {
    pub lambda: f64,
    pub argmax: DensityParams,
    pub starts_used: usize,
    /// (params, value) per refined start, best first.
    pub trace: Vec<(DensityParams, f64)>,
}

/// F_{x₀,t₀} and its analytic gradient under the integral, the tail
/// gradient by central differences.
fn value_and_grad(
    mesh: &TriMesh,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
    x0: Point3,
    log_t0: f64,
) -> Result<(f64, [f64; 4])> {
    let t0 = log_t0.exp();
    let p = DensityParams::new(x0, t0)?;
    let ([f, gx, gy, gz, gt], _, _) = integrate_densities::<5, _>(mesh, quad, |x| {
        let w = p.density(x);
        let d = x - x0;
        let gv = d * (w / (2.0 * t0));
        [
            w,
            gv.x,
            gv.y,
            gv.z,
            w * (-1.0 + d.norm_squared() / (4.0 * t0)),
        ]
    })?;
    let mut val = f;
    let mut grad = [gx, gy, gz, gt];
    if let Some(t) = tail {
        val += t.density_tail(&p);
        let h = 1e-5;
        for (k, g) in grad.iter_mut().enumerate() {
            let probe = |sign: f64| -> f64 {
                let mut xx = x0;
                let mut lt = log_t0;
                match k {
                    0 => xx.x += sign * h,
                    1 => xx.y += sign * h,
                    2 => xx.z += sign * h,
                    _ => lt += sign * h,
                }
                t.density_tail(&DensityParams {
                    x0: xx,
                    t0: lt.exp(),
                })
            };
            *g += (probe(1.0) - probe(-1.0)) / (2.0 * h);
        }
    }
    Ok((val, grad))
}

/// λ(Σ) = sup over (x₀, t₀) of F_{x₀,t₀}(Σ): coarse grid scan followed by
/// quasi-Newton refinement from the best cells. Deterministic for fixed
/// options (lexicographic tie-breaks).
pub fn entropy(
    mesh: &TriMesh,
    opts: &EntropyOpts,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<EntropyResult> {
    let diam = mesh.diameter();
    if !(diam > 0.0) {
        return Err(Error::Undefined("degenerate mesh for entropy".into()));
    }
    let (lo, hi) = mesh.bounding_box();
    let lo = lo - nalgebra::Vector3::repeat(diam);
    let hi = hi + nalgebra::Vector3::repeat(diam);
    let lt_span = 2.0 * diam.ln().abs().max(1.0);

    // coarse scan with cheap quadrature
    let cheap = QuadratureSpec {
        points: 1,
        adaptive_threshold: f64::INFINITY,
        max_subdiv: 0,
    };
    let mut cells: Vec<([f64; 4], f64)> = Vec::new();
    let nx = opts.grid_n.max(2);
    let nt = opts.t_grid_n.max(2);
    for ix in 0..nx {
        for iy in 0..nx {
            for iz in 0..nx {
                let x0 = Point3::new(
                    lo.x + (hi.x - lo.x) * ix as f64 / (nx - 1) as f64,
                    lo.y + (hi.y - lo.y) * iy as f64 / (nx - 1) as f64,
                    lo.z + (hi.z - lo.z) * iz as f64 / (nx - 1) as f64,
                );
                for it in 0..nt {
                    let lt = -lt_span + 2.0 * lt_span * it as f64 / (nt - 1) as f64;
                    let p = DensityParams::new(x0, lt.exp())?;
                    let v = f_density(mesh, &p, &cheap, tail)?.value;
                    cells.push(([x0.x, x0.y, x0.z, lt], v));
                }
            }
        }
    }
    cells.sort_by(|a, b| {
        b.1.total_cmp(&a.1)
            .then_with(|| a.0.partial_cmp(&b.0).unwrap())
    });

    let starts = opts.starts.min(cells.len()).max(1);
    // the refinement objective caps subdivision depth: full-depth
    // adaptivity at small t₀ multiplies each evaluation by up to 4^6,
    // and the optimum is re-measured with the caller's rule afterwards
    let refine_quad = QuadratureSpec {
        max_subdiv: quad.max_subdiv.min(2),
        ..*quad
    };
    let mut trace: Vec<(DensityParams, f64)> = Vec::with_capacity(starts);
    for cell in cells.iter().take(starts) {
        let x0v = DVector::from_vec(cell.0.to_vec());
        let (xv, _) = bfgs_minimize(
            |v: &DVector<f64>| {
                let (val, g) = value_and_grad(
                    mesh,
                    &refine_quad,
                    tail,
                    Point3::new(v[0], v[1], v[2]),
                    v[3],
                )
                .unwrap_or((f64::NEG_INFINITY, [0.0; 4]));
                (-val, DVector::from_vec(vec![-g[0], -g[1], -g[2], -g[3]]))
            },
            x0v,
            opts.refine_tol,
            200,
        );
        let p = DensityParams::new(Point3::new(xv[0], xv[1], xv[2]), xv[3].exp())?;
        // re-evaluate with the full quadrature for the reported value
        let v = f_density(mesh, &p, quad, tail)?.value;
        trace.push((p, v));
    }
    trace.sort_by(|a, b| {
        b.1.total_cmp(&a.1).then_with(|| {
            (a.0.x0.x, a.0.x0.y, a.0.x0.z, a.0.t0)
                .partial_cmp(&(b.0.x0.x, b.0.x0.y, b.0.x0.z, b.0.t0))
                .unwrap()
        })
    });
    let best = trace[0].clone();
    Ok(EntropyResult {
        lambda: best.1,
        argmax: best.0,
        starts_used: starts,
        trace,
    })
}

/// Grid for the shrinker center check: (x₀, t₀) lattice centered on
/// (0, 1).
#[derive(Debug, Clone, Copy)]
pub struct CenterGrid {
    /// Half-extent of each spatial axis.
    pub x_extent: f64,
    pub nx: usize,
    /// Half-extent of log t₀.
    pub lt_extent: f64,
    pub nt: usize,
}

impl Default for CenterGrid {
    fn default() -> Self {
        CenterGrid {
            x_extent: 1.5,
            nx: 11,
            lt_extent: 1.0,
            nt: 11,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CenterCheck {
    pub grid_max: f64,
    pub grid_argmax: DensityParams,
    pub value_at_origin_unit: f64,
    pub pass: bool,
}

/// For a numerically verified shrinker, F_{x₀,t₀} must attain its global
/// maximum at (0, 1).
pub fn shrinker_center_check(
    mesh: &TriMesh,
    grid: &CenterGrid,
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
    tolerance: f64,
) -> Result<CenterCheck> {
    gate_shrinker(mesh)?;
    let at_origin = f_density(mesh, &DensityParams::origin_unit(), quad, tail)?.value;
    // the scan caps subdivision depth (full depth at small t₀ multiplies
    // the work by up to 4^6 per face); the winner is re-evaluated below
    // with the caller's rule before the pass/fail comparison
    let scan_quad = QuadratureSpec {
        max_subdiv: quad.max_subdiv.min(2),
        ..*quad
    };
    let mut grid_max = f64::NEG_INFINITY;
    let mut grid_argmax = DensityParams::origin_unit();
    for ix in 0..grid.nx {
        for iy in 0..grid.nx {
            for iz in 0..grid.nx {
                let c = |i: usize| -grid.x_extent + 2.0 * grid.x_extent * i as f64 / (grid.nx - 1) as f64;
                let x0 = Point3::new(c(ix), c(iy), c(iz));
                for it in 0..grid.nt {
                    let lt = -grid.lt_extent
                        + 2.0 * grid.lt_extent * it as f64 / (grid.nt - 1) as f64;
                    let p = DensityParams::new(x0, lt.exp())?;
                    let v = f_density(mesh, &p, &scan_quad, tail)?.value;
                    if v > grid_max {
                        grid_max = v;
                        grid_argmax = p;
                    }
                }
            }
        }
    }
    grid_max = f_density(mesh, &grid_argmax, quad, tail)?.value;
    Ok(CenterCheck {
        grid_max,
        grid_argmax,
        value_at_origin_unit: at_origin,
        pass: grid_max <= at_origin + tolerance,
    })
}

fn gate_shrinker(mesh: &TriMesh) -> Result<()> {
    let res = shrinker_residual(mesh);
    if res.sup >= SHRINKER_RESIDUAL_GATE {
        return Err(Error::Precondition(format!(
            "mesh is not numerically a shrinker: sup residual {:.3e} ≥ {SHRINKER_RESIDUAL_GATE:.0e}",
            res.sup
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DilationSample {
    pub s: f64,
    pub g: f64,
    pub g_prime: f64,
}

/// g(s) = F_{sy, 1+as²}(Σ) is nonincreasing for shrinkers; reports g and
/// centered finite-difference g′ per sample.
pub fn dilation_monotonicity(
    mesh: &TriMesh,
    y: &crate::Vector3,
    a: f64,
    s_samples: &[f64],
    quad: &QuadratureSpec,
    tail: Option<&AnalyticTail>,
) -> Result<Vec<DilationSample>> {
    gate_shrinker(mesh)?;
    let g_at = |s: f64| -> Result<f64> {
        let t0 = 1.0 + a * s * s;
        if !(t0 > 0.0) {
            return Err(Error::Parameter(format!(
                "1 + a·s² = {t0} not positive at s = {s}"
            )));
        }
        let p = DensityParams::new(Point3::from(y * s), t0)?;
        Ok(f_density(mesh, &p, quad, tail)?.value)
    };
    s_samples
        .iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(Error::Parameter("dilation samples must be positive".into()));
            }
            let h = 1e-4 * s.max(1e-2);
            let g = g_at(s)?;
            let g_prime = (g_at(s + h)? - g_at(s - h)?) / (2.0 * h);
            Ok(DilationSample { s, g, g_prime })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::translate_dilate;
    use crate::mesh::primitives::{cylinder, ellipsoid, icosphere, perturbed_sphere, plane_disk};
    use crate::Vector3;
    use approx::assert_relative_eq;

    const FOUR_OVER_E: f64 = 4.0 / std::f64::consts::E;

    #[test]
    fn sphere_entropy_is_scale_free() {
        let quad = QuadratureSpec::default();
        let opts = EntropyOpts::default();
        for r in [1.0, 2.0, 5.0] {
            // entropy is scale-free, so every radius sees the same
            // faceting bias: refinement 3 overshoots 4/e by 1.4e−3
            let m = icosphere(r, 4).unwrap();
            let e = entropy(&m, &opts, &quad, None).unwrap();
            assert!((e.lambda - FOUR_OVER_E).abs() < 1e-3, "R={r}: {}", e.lambda);
            assert_relative_eq!(e.argmax.t0, r * r / 4.0, max_relative = 1e-2);
            assert!(e.argmax.x0.coords.norm() < 1e-2 * r, "R={r}");
        }
    }

    #[test]
    fn plane_entropy_is_one() {
        let quad = QuadratureSpec::default();
        let m = plane_disk(8.0, 3).unwrap();
        let tail = AnalyticTail::PlaneDisk {
            offset: 0.0,
            radius: 8.0,
        };
        let e = entropy(&m, &EntropyOpts::default(), &quad, Some(&tail)).unwrap();
        assert!((e.lambda - 1.0).abs() < 1e-4, "{}", e.lambda);
    }

    #[test]
    fn ellipsoid_entropy_dominates_sphere() {
        let quad = QuadratureSpec::default();
        let m = ellipsoid([2.2, 2.0, 1.8], 3).unwrap();
        let e = entropy(&m, &EntropyOpts::default(), &quad, None).unwrap();
        assert!(e.lambda >= FOUR_OVER_E - 1e-3, "{}", e.lambda);
        // sup dominates the (0,1) member
        let f = crate::measure::gaussian_area(&m, &quad, None).unwrap().value;
        assert!(e.lambda >= f - 1e-6);
    }

    #[test]
    fn entropy_is_translation_dilation_invariant() {
        let quad = QuadratureSpec::default();
        let opts = EntropyOpts::default();
        let m = icosphere(2.0, 3).unwrap();
        let base = entropy(&m, &opts, &quad, None).unwrap().lambda;
        let moved = translate_dilate(&m, &Vector3::new(1.0, -2.0, 0.5), 1.7).unwrap();
        let shifted = entropy(&moved, &opts, &quad, None).unwrap().lambda;
        assert!((base - shifted).abs() < 2e-3, "{base} vs {shifted}");
    }

    #[test]
    fn center_check_passes_on_shrinkers_and_gates_imposters() {
        let quad = QuadratureSpec::default();
        let grid = CenterGrid::default();
        let sphere = icosphere(2.0, 3).unwrap();
        let c = shrinker_center_check(&sphere, &grid, &quad, None, 1e-3).unwrap();
        assert!(c.pass, "grid max {} vs center {}", c.grid_max, c.value_at_origin_unit);
        let cyl = cylinder(2.0f64.sqrt(), 12.0, 2).unwrap();
        let tail = AnalyticTail::Cylinder {
            radius: 2.0f64.sqrt(),
            half_height: 6.0,
        };
        let c = shrinker_center_check(&cyl, &grid, &quad, Some(&tail), 3e-3).unwrap();
        assert!(c.pass);
        // a perturbed sphere is not a shrinker: precondition must fire
        let bad = perturbed_sphere(2.0, 0.2, 3).unwrap();
        match shrinker_center_check(&bad, &grid, &quad, None, 1e-3) {
            Err(Error::Precondition(_)) => {}
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn dilation_paths_are_monotone() {
        let quad = QuadratureSpec::default();
        let m = icosphere(2.0, 3).unwrap();
        let s: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        for (y, a) in [(Vector3::x(), 0.0), (Vector3::zeros(), 1.0)] {
            let samples = dilation_monotonicity(&m, &y, a, &s[..15], &quad, None).unwrap();
            for d in &samples {
                assert!(d.g_prime <= 2e-3, "s={}: g'={}", d.s, d.g_prime);
            }
        }
        // parameters never move: g constant
        let flat = dilation_monotonicity(&m, &Vector3::zeros(), 0.0, &s, &quad, None).unwrap();
        for d in &flat {
            assert!(d.g_prime.abs() < 1e-6);
        }
        // 1 + a·s² ≤ 0 rejected
        assert!(dilation_monotonicity(&m, &Vector3::zeros(), -1.0, &[2.0], &quad, None).is_err());
    }
}
