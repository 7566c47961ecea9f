//! Shared numerics: bracketed bisection, sign-change scans, and small damped
//! Newton systems with numerical Jacobians.

/// Bisection on a bracketing interval. `f(lo)` and `f(hi)` must differ in
/// sign (zero counts as either). Refines until the interval is shorter than
/// `tol_x` or 200 iterations, whichever comes first.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol_x: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol_x {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_lo > 0.0) == (f_mid > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All roots of `f` on `(lo, hi)` found by a uniform sign-change scan over
/// `subintervals` pieces, each refined by bisection to `tol_x`.
///
/// Non-finite evaluations break the scan chain rather than poisoning a
/// bracket. Tangent roots without a sign change are not detected — callers
/// pick `subintervals` dense enough for their function class.
pub fn scan_roots<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    subintervals: usize,
    tol_x: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    if hi <= lo || subintervals == 0 {
        return out;
    }
    let step = (hi - lo) / subintervals as f64;
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=subintervals {
        let x1 = if i == subintervals {
            hi
        } else {
            lo + step * i as f64
        };
        let f1 = f(x1);
        if f0 == 0.0 {
            out.push(x0);
        } else if f0.is_finite() && f1.is_finite() && (f0 > 0.0) != (f1 > 0.0) {
            out.push(bisect(&mut f, x0, x1, tol_x));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        out.push(x0);
    }
    out.dedup_by(|a, b| (*a - *b).abs() < tol_x);
    out
}

/// Root of the affine function through (0, f0) and (1, f1). `None` when the
/// function is flat.
pub fn affine_root(f0: f64, f1: f64) -> Option<f64> {
    let slope = f1 - f0;
    if slope == 0.0 || !slope.is_finite() {
        return None;
    }
    Some(-f0 / slope)
}

/// Infinity norm.
fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solves a dense N x N linear system in place by Gaussian elimination with
/// partial pivoting. Returns `None` on a (near-)singular pivot.
#[allow(clippy::needless_range_loop)]
fn solve_linear<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let mut piv = col;
        for row in col + 1..N {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N];
    for col in (0..N).rev() {
        let mut acc = b[col];
        for k in col + 1..N {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Outcome of a damped Newton solve.
pub struct NewtonOutcome<const N: usize> {
    pub x: [f64; N],
    pub residual_norm: f64,
    pub converged: bool,
    /// True when a singular Jacobian stopped the iteration early.
    pub singular: bool,
}

/// Damped Newton on an N-dimensional system with a central-difference
/// Jacobian (step 1e-7). The step is halved until the residual norm
/// decreases; bounds clamp each coordinate. Intended as a polish pass on
/// seeds that are already close, so the iteration budget is small.
pub fn newton_system<const N: usize, F>(
    mut f: F,
    seed: [f64; N],
    bounds: [(f64, f64); N],
    tol: f64,
) -> NewtonOutcome<N>
where
    F: FnMut(&[f64; N]) -> [f64; N],
{
    const JAC_STEP: f64 = 1e-7;
    let clamp = |x: [f64; N]| {
        let mut y = x;
        for i in 0..N {
            y[i] = y[i].clamp(bounds[i].0, bounds[i].1);
        }
        y
    };
    let mut x = clamp(seed);
    let mut fx = f(&x);
    let mut best = norm_inf(&fx);
    let mut singular = false;
    for _ in 0..60 {
        if best < tol {
            return NewtonOutcome {
                x,
                residual_norm: best,
                converged: true,
                singular: false,
            };
        }
        let mut jac = [[0.0; N]; N];
        for j in 0..N {
            let mut xp = x;
            let mut xm = x;
            xp[j] += JAC_STEP;
            xm[j] -= JAC_STEP;
            let fp = f(&xp);
            let fm = f(&xm);
            for i in 0..N {
                jac[i][j] = (fp[i] - fm[i]) / (2.0 * JAC_STEP);
            }
        }
        let mut rhs = [0.0; N];
        for i in 0..N {
            rhs[i] = -fx[i];
        }
        let Some(step) = solve_linear(jac, rhs) else {
            singular = true;
            break;
        };
        let mut damping = 1.0;
        let mut advanced = false;
        for _ in 0..30 {
            let mut trial = x;
            for i in 0..N {
                trial[i] += damping * step[i];
            }
            let trial = clamp(trial);
            let ft = f(&trial);
            let n = norm_inf(&ft);
            if n.is_finite() && n < best {
                x = trial;
                fx = ft;
                best = n;
                advanced = true;
                break;
            }
            damping *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    NewtonOutcome {
        x,
        residual_norm: best,
        converged: best < tol,
        singular,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let root = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((root - 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn scan_finds_all_cubic_roots() {
        let roots = scan_roots(|x| (x - 0.2) * (x - 0.5) * (x - 0.9), 0.0, 1.0, 1000, 1e-12);
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([0.2, 0.5, 0.9]) {
            assert!((r - want).abs() < 1e-10);
        }
    }

    #[test]
    fn affine_root_matches_hand_solution() {
        assert!((affine_root(2.0, -1.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(affine_root(1.0, 1.0).is_none());
    }

    #[test]
    fn newton_solves_coupled_system() {
        // x^2 + y^2 = 1, y = x  =>  x = y = 1/sqrt(2)
        let out = newton_system(
            |v: &[f64; 2]| [v[0] * v[0] + v[1] * v[1] - 1.0, v[1] - v[0]],
            [0.8, 0.6],
            [(-2.0, 2.0), (-2.0, 2.0)],
            1e-13,
        );
        assert!(out.converged);
        let inv_sqrt2 = 0.5_f64.sqrt();
        assert!((out.x[0] - inv_sqrt2).abs() < 1e-10);
        assert!((out.x[1] - inv_sqrt2).abs() < 1e-10);
    }
}
