//! Shared numerical kernels: deterministic summation, root finding,
//! special functions, a Lanczos eigensolver, and a small BFGS minimizer.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

/// Pairwise (cascade) summation: deterministic and O(ε log n) error.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n if n <= 16 => xs.iter().sum(),
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Bisection on a bracketing interval; `f(lo)` and `f(hi)` must differ in
/// sign. Runs to absolute width `tol`.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "bisection bracket [{lo}, {hi}] does not change sign"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo < tol {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Modified Bessel function I₀ via the Abramowitz–Stegun polynomial
/// fits (absolute error < 2e-7 scaled, ample for quadrature weights).
pub fn bessel_i0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 3.75 {
        let t = (x / 3.75) * (x / 3.75);
        1.0 + t * (3.5156229
            + t * (3.0899424
                + t * (1.2067492 + t * (0.2659732 + t * (0.0360768 + t * 0.0045813)))))
    } else {
        let t = 3.75 / ax;
        (ax.exp() / ax.sqrt())
            * (0.39894228
                + t * (0.01328592
                    + t * (0.00225319
                        + t * (-0.00157565
                            + t * (0.00916281
                                + t * (-0.02057706
                                    + t * (0.02635537
                                        + t * (-0.01647633 + t * 0.00392377))))))))
    }
}

/// exp(-s) · I₀(s): stable for large s where I₀ alone overflows.
pub fn bessel_i0_scaled(s: f64) -> f64 {
    let ax = s.abs();
    if ax < 3.75 {
        bessel_i0(s) * (-s).exp()
    } else {
        let t = 3.75 / ax;
        ((if s < 0.0 { -2.0 * ax } else { 0.0 }).exp() / ax.sqrt())
            * (0.39894228
                + t * (0.01328592
                    + t * (0.00225319
                        + t * (-0.00157565
                            + t * (0.00916281
                                + t * (-0.02057706
                                    + t * (0.02635537
                                        + t * (-0.01647633 + t * 0.00392377))))))))
    }
}

/// Largest-algebraic eigenpairs of a symmetric operator given as a
/// matrix-vector product. Each pair is found by Lanczos with full
/// reorthogonalization, then deflated before the next run; a single
/// Krylov sequence cannot separate repeated eigenvalues, and the
/// spectra we chase are full of exact multiplicities.
///
/// Returns `k` (eigenvalue, eigenvector) pairs sorted descending.
pub fn lanczos_top_k<F: Fn(&DVector<f64>) -> DVector<f64>>(
    apply: F,
    n: usize,
    k: usize,
    iters: usize,
) -> Result<Vec<(f64, DVector<f64>)>> {
    if k == 0 || k > n {
        return Err(Error::Parameter("lanczos: bad k".into()));
    }
    let m_cap = iters.max(8).min(n);
    let mut found: Vec<(f64, DVector<f64>)> = Vec::with_capacity(k);
    for run in 0..k {
        // deterministic start vector, varied per run, deflated
        let mut v =
            DVector::from_fn(n, |i, _| ((i as f64 + 1.0) * (0.7391 + 0.1309 * run as f64)).sin());
        for (_, u) in &found {
            let c = u.dot(&v);
            v -= u * c;
        }
        let nv = v.norm();
        if nv < 1e-12 {
            return Err(Error::Eigen("lanczos: deflated start vector vanished".into()));
        }
        v /= nv;
        let mut q: Vec<DVector<f64>> = vec![v];
        let mut alpha: Vec<f64> = Vec::with_capacity(m_cap);
        let mut beta: Vec<f64> = Vec::with_capacity(m_cap);
        for j in 0..m_cap {
            let mut w = apply(&q[j]);
            let a = q[j].dot(&w);
            alpha.push(a);
            w -= &q[j] * a;
            if j > 0 {
                w -= &q[j - 1] * beta[j - 1];
            }
            // full reorthogonalization against converged pairs and the
            // current basis, twice for safety
            for _ in 0..2 {
                for (_, u) in &found {
                    let c = u.dot(&w);
                    w -= u * c;
                }
                for qi in &q {
                    let c = qi.dot(&w);
                    w -= qi * c;
                }
            }
            let b = w.norm();
            if b < 1e-13 || j + 1 == m_cap {
                break;
            }
            beta.push(b);
            q.push(w / b);
        }
        let t = alpha.len();
        let mut tri = DMatrix::zeros(t, t);
        for i in 0..t {
            tri[(i, i)] = alpha[i];
            if i + 1 < t {
                tri[(i, i + 1)] = beta[i];
                tri[(i + 1, i)] = beta[i];
            }
        }
        let eig = nalgebra::SymmetricEigen::new(tri);
        let mut best = 0;
        for i in 1..t {
            if eig.eigenvalues[i] > eig.eigenvalues[best] {
                best = i;
            }
        }
        let col = eig.eigenvectors.column(best);
        let mut vec = DVector::zeros(n);
        for (j, qj) in q.iter().enumerate().take(t) {
            vec += qj * col[j];
        }
        for (_, u) in &found {
            let c = u.dot(&vec);
            vec -= u * c;
        }
        let norm = vec.norm();
        if norm < 1e-12 {
            return Err(Error::Eigen("lanczos: ritz vector collapsed under deflation".into()));
        }
        vec /= norm;
        found.push((eig.eigenvalues[best], vec));
    }
    found.sort_by(|a, b| b.0.total_cmp(&a.0));
    Ok(found)
}

/// BFGS with backtracking Armijo line search. Returns (x, f(x)).
pub fn bfgs_minimize<F>(f: F, x0: DVector<f64>, tol: f64, max_iter: usize) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> (f64, DVector<f64>),
{
    let n = x0.len();
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    for _ in 0..max_iter {
        if g.norm() < tol {
            break;
        }
        let dir = -(&h * &g);
        let slope = g.dot(&dir);
        if slope >= 0.0 {
            h = DMatrix::identity(n, n);
            continue;
        }
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let xn = &x + &dir * step;
            let (fn_, gn) = f(&xn);
            if fn_ <= fx + 1e-4 * step * slope {
                let s = &xn - &x;
                let y = &gn - &g;
                let sy = s.dot(&y);
                if sy > 1e-14 {
                    let rho = 1.0 / sy;
                    let i = DMatrix::<f64>::identity(n, n);
                    let a = &i - &s * y.transpose() * rho;
                    h = &a * h * a.transpose() + &s * s.transpose() * rho;
                }
                x = xn;
                fx = fn_;
                g = gn;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pairwise_sum_matches_exact() {
        let xs: Vec<f64> = (0..10_001).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 50_005_000.0);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn bessel_i0_reference_values() {
        // I0(0)=1, I0(1)=1.2660658..., I0(5)=27.239871...
        assert_relative_eq!(bessel_i0(0.0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(bessel_i0(1.0), 1.2660658777520084, max_relative = 1e-6);
        assert_relative_eq!(bessel_i0(5.0), 27.239871823604442, max_relative = 1e-6);
        assert_relative_eq!(
            bessel_i0_scaled(50.0),
            bessel_i0(50.0) * (-50.0f64).exp(),
            max_relative = 1e-6
        );
    }

    #[test]
    fn lanczos_recovers_diagonal_spectrum() {
        let n = 50;
        let diag: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let top = lanczos_top_k(
            |v| DVector::from_fn(n, |i, _| diag[i] * v[i]),
            n,
            3,
            60,
        )
        .unwrap();
        assert_relative_eq!(top[0].0, 49.0, epsilon = 1e-8);
        assert_relative_eq!(top[1].0, 48.0, epsilon = 1e-8);
        assert_relative_eq!(top[2].0, 47.0, epsilon = 1e-8);
    }

    #[test]
    fn bfgs_minimizes_rosenbrock() {
        let f = |x: &DVector<f64>| {
            let (a, b) = (x[0], x[1]);
            let val = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = DVector::from_vec(vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ]);
            (val, g)
        };
        let (x, v) = bfgs_minimize(f, DVector::from_vec(vec![-1.2, 1.0]), 1e-10, 500);
        assert!(v < 1e-14);
        assert_relative_eq!(x[0], 1.0, epsilon = 1e-6);
    }
}
