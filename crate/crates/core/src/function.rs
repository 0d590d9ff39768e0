//! Scalar functions of one variable carried together with their analytic
//! derivative and the open interval on which both are valid.

use std::fmt;
use std::sync::Arc;

use crate::error::{PdmError, Result};

/// Margin kept between evaluation points and a singular domain endpoint.
pub const DOMAIN_GUARD: f64 = 1e-9;

/// Half-width used in place of an infinite endpoint when a finite window is
/// needed for sampling.
pub const SAMPLE_HALF_WIDTH: f64 = 5.0;

/// Open real interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        !(self.lo < self.hi) || self.hi - self.lo <= 2.0 * DOMAIN_GUARD
    }

    /// Membership with the guard margin applied at finite endpoints.
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && x > self.lo + DOMAIN_GUARD && x < self.hi - DOMAIN_GUARD
    }

    /// Membership of the closure, used for quadrature anchors sitting on a
    /// removable endpoint.
    pub fn contains_closed(&self, x: f64) -> bool {
        x.is_finite() && x >= self.lo && x <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(PdmError::DomainViolation {
                x,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Finite window used for sampling: infinite ends are replaced by
    /// `center ± SAMPLE_HALF_WIDTH` and finite (singular) ends are pulled in by
    /// 5% of their distance from `center`.
    pub fn sampling_window(&self, center: f64) -> Interval {
        let lo = if self.lo.is_finite() {
            self.lo + 0.05 * (center - self.lo).max(0.0)
        } else {
            center - SAMPLE_HALF_WIDTH
        };
        let hi = if self.hi.is_finite() {
            self.hi - 0.05 * (self.hi - center).max(0.0)
        } else {
            center + SAMPLE_HALF_WIDTH
        };
        Interval {
            lo: lo.max(self.lo),
            hi: hi.min(self.hi),
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A real function bundled with its analytic first derivative.
///
/// Evaluation does not check the domain; operations that need a valid point
/// check it themselves so that closed forms can still be probed at the edges.
#[derive(Clone)]
pub struct DifferentiableFn {
    value: ScalarFn,
    derivative: ScalarFn,
    domain: Interval,
}

impl DifferentiableFn {
    pub fn new<F, D>(value: F, derivative: D, domain: Interval) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        DifferentiableFn {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
            domain,
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0, Interval::REAL_LINE)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn with_domain(mut self, domain: Interval) -> Self {
        self.domain = domain;
        self
    }

    /// Symmetric difference quotient `(v(x+h) - v(x-h)) / 2h`.
    pub fn central_difference(&self, x: f64, h: f64) -> f64 {
        (self.value(x + h) - self.value(x - h)) / (2.0 * h)
    }

    /// Distance between the analytic derivative and a central difference,
    /// scaled by `1 + |derivative|`.
    pub fn derivative_mismatch(&self, x: f64, h: f64) -> f64 {
        let d = self.derivative(x);
        (d - self.central_difference(x, h)).abs() / (1.0 + d.abs())
    }
}

impl fmt::Debug for DifferentiableFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DifferentiableFn")
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

/// Fourth-order five-point derivative of an arbitrary closure.
pub(crate) fn five_point_derivative(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_excludes_endpoints() {
        let d = Interval::new(-1.0, 1.0);
        assert!(d.contains(0.0));
        assert!(!d.contains(1.0));
        assert!(!d.contains(1.0 - 0.5 * DOMAIN_GUARD));
        assert!(d.contains_closed(1.0));
        assert!(!d.contains(f64::NAN));
        assert!(Interval::REAL_LINE.contains(1e300));
    }

    #[test]
    fn window_is_finite_and_inside() {
        let w = Interval::new(-4.0, f64::INFINITY).sampling_window(0.0);
        assert!((w.lo - (-3.8)).abs() < 1e-12);
        assert_eq!(w.hi, SAMPLE_HALF_WIDTH);
        let w = Interval::REAL_LINE.sampling_window(-1.0);
        assert_eq!((w.lo, w.hi), (-6.0, 4.0));
    }

    #[test]
    fn empty_and_intersection() {
        let a = Interval::new(0.0, 2.0);
        let b = Interval::new(1.0, 3.0);
        assert_eq!(a.intersect(&b), Interval::new(1.0, 2.0));
        assert!(a.intersect(&Interval::new(2.0, 3.0)).is_empty());
    }

    #[test]
    fn derivative_check_on_sine() {
        let f = DifferentiableFn::new(f64::sin, f64::cos, Interval::REAL_LINE);
        for i in 0..50 {
            let x = -3.0 + 0.12 * i as f64;
            assert!(f.derivative_mismatch(x, 1e-5) < 1e-9);
        }
        let g = five_point_derivative(f64::exp, 0.3, 1e-3);
        assert!((g - 0.3f64.exp()).abs() < 1e-12);
    }
}
