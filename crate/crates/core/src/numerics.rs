//! Adaptive Simpson quadrature and a bracketed root finder.

use crate::error::{PdmError, Result};

pub const QUADRATURE_TOL: f64 = 1e-10;
pub const QUADRATURE_MAX_DEPTH: u32 = 40;

/// Result of an adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

/// Adaptive Simpson rule with interval bisection and Richardson correction.
///
/// The local acceptance test is `|S_left + S_right - S_whole| ≤ 15·tol` with
/// `tol` halved at each bisection.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> Quadrature {
    if a == b {
        return Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            converged: true,
        };
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut acc = Quadrature {
        value: 0.0,
        error_estimate: 0.0,
        converged: true,
    };
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth, &mut acc);
    acc
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    acc: &mut Quadrature,
) {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    let err = delta.abs() / 15.0;
    if err <= tol || depth == 0 || !delta.is_finite() {
        if err > tol || !delta.is_finite() {
            acc.converged = false;
        }
        acc.value += left + right + delta / 15.0;
        acc.error_estimate += err;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

/// `∫ₐᵇ f` to the default tolerance, failing when refinement runs out.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<f64> {
    let (lo, hi, sign) = if a <= b { (a, b, 1.0) } else { (b, a, -1.0) };
    let q = adaptive_simpson(f, lo, hi, QUADRATURE_TOL, QUADRATURE_MAX_DEPTH);
    if !q.converged || !q.value.is_finite() {
        return Err(PdmError::QuadratureNonConvergence {
            a,
            b,
            achieved: q.error_estimate,
        });
    }
    Ok(sign * q.value)
}

/// Root of a monotone function on `[lo, hi]`: bisection down to a width of
/// `1e-14` (relative for large arguments) and one Newton polish with the
/// supplied derivative.
pub fn bracketed_root<F, D>(g: F, dg: D, mut lo: f64, mut hi: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Some(lo);
    }
    if g_hi == 0.0 {
        return Some(hi);
    }
    if g_lo.signum() == g_hi.signum() || !g_lo.is_finite() || !g_hi.is_finite() {
        return None;
    }
    for _ in 0..400 {
        let width_tol = 1e-14_f64.max(4.0 * f64::EPSILON * lo.abs().max(hi.abs()));
        if hi - lo <= width_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Some(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let gx = g(x);
    let d = dg(x);
    if d != 0.0 && d.is_finite() {
        let polished = x - gx / d;
        if polished.is_finite() && g(polished).abs() < gx.abs() {
            return Some(polished);
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_on_smooth_integrands() {
        let q = adaptive_simpson(f64::cos, 0.0, 1.0, 1e-12, 40);
        assert!(q.converged);
        assert!((q.value - 1f64.sin()).abs() < 1e-12);
        assert_eq!(integrate(f64::exp, 0.7, 0.7).unwrap(), 0.0);
        let r = integrate(|x| x * x, 2.0, 0.0).unwrap();
        assert!((r + 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn simpson_reports_non_convergence() {
        let q = adaptive_simpson(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-12, 6);
        assert!(!q.converged);
        assert!(matches!(
            integrate(|x: f64| if x > 0.5 { f64::NAN } else { 1.0 }, 0.0, 1.0),
            Err(PdmError::QuadratureNonConvergence { .. })
        ));
    }

    #[test]
    fn root_of_cubic() {
        let r = bracketed_root(|x| x * x * x - 2.0, |x| 3.0 * x * x, 0.0, 2.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-15);
        assert!(bracketed_root(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0).is_none());
    }
}
