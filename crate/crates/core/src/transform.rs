//! Nonlocal point transformation between a PDM system and a unit-mass
//! reference system.
//!
//! The map is `q(x) = ∫√m f dx`, `dτ/dt = f(x)`, with the compatibility
//! condition `g = m f²` (equivalently `g'/g - 2f'/f = m'/m`). Under it the
//! velocity maps as `dq/dτ = ẋ√m` and the potential as `V(x) = V_ref(q(x))`,
//! so the PDM Euler-Lagrange equation in `(x, t)` and the unit-mass one in
//! `(q, τ)` are the same equation.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{PdmError, Result};
use crate::function::{five_point_derivative, DifferentiableFn, Interval};
use crate::models::{ml_mass, ModelFamily, PdmSystem, Sign};
use crate::numerics;

/// Number of grid points used to detect sign changes of `q'`.
pub const MONOTONE_GRID: usize = 1024;

const SAMPLE_SEED: u64 = 0x0005_eed0_f9a7;

/// The quadruple `(f, g, q, q')` of a nonlocal point transformation,
/// together with the mass profile it was built for.
#[derive(Debug, Clone)]
pub struct NonlocalMap {
    pub mass: DifferentiableFn,
    /// Time rescaling `dτ/dt = f(x)`.
    pub f: DifferentiableFn,
    pub g: DifferentiableFn,
    /// Generalized coordinate; its derivative is `q' = √m f`.
    pub q: DifferentiableFn,
    domain: Interval,
    monotone: bool,
}

impl NonlocalMap {
    pub fn new(
        mass: DifferentiableFn,
        f: DifferentiableFn,
        g: DifferentiableFn,
        q: DifferentiableFn,
        domain: Interval,
    ) -> Result<Self> {
        let domain = domain
            .intersect(&mass.domain())
            .intersect(&f.domain())
            .intersect(&q.domain());
        if domain.is_empty() {
            return Err(PdmError::EmptyDomain);
        }
        let monotone = detect_monotone(&q, domain);
        Ok(NonlocalMap {
            mass,
            f,
            g,
            q,
            domain,
            monotone,
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    /// True iff `q'` keeps one sign on a 1024-point grid over the domain.
    pub fn monotone(&self) -> bool {
        self.monotone
    }

    /// `|g - m f²|` and `|q' - √m f|` at `x`.
    pub fn defect_at(&self, x: f64) -> (f64, f64) {
        let m = self.mass.value(x);
        let f = self.f.value(x);
        (
            (self.g.value(x) - m * f * f).abs(),
            (self.q.derivative(x) - m.sqrt() * f).abs(),
        )
    }
}

fn detect_monotone(q: &DifferentiableFn, domain: Interval) -> bool {
    let w = domain.sampling_window(default_center(domain));
    let mut sign = 0.0;
    for i in 0..MONOTONE_GRID {
        let x = w.lo + w.width() * (i as f64 + 0.5) / MONOTONE_GRID as f64;
        let d = q.derivative(x);
        if !d.is_finite() || d == 0.0 {
            return false;
        }
        if sign == 0.0 {
            sign = d.signum();
        } else if d.signum() != sign {
            return false;
        }
    }
    true
}

/// A representative interior point used to centre finite sampling windows.
pub fn default_center(domain: Interval) -> f64 {
    match (domain.lo.is_finite(), domain.hi.is_finite()) {
        (true, true) => 0.5 * (domain.lo + domain.hi),
        _ if domain.contains(0.0) => 0.0,
        (true, false) => domain.lo + 1.0,
        (false, true) => domain.hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Residual of the compatibility condition at one point: the larger of
/// `|g - m f²|` and the scaled logarithmic form
/// `|g'/g - 2f'/f - m'/m| / (1 + |g'/g| + 2|f'/f| + |m'/m|)`.
pub fn compatibility_residual_at(
    m: &DifferentiableFn,
    f: &DifferentiableFn,
    g: &DifferentiableFn,
    x: f64,
) -> f64 {
    let (mv, fv, gv) = (m.value(x), f.value(x), g.value(x));
    let direct = (gv - mv * fv * fv).abs();
    let lg = g.derivative(x) / gv;
    let lf = f.derivative(x) / fv;
    let lm = m.derivative(x) / mv;
    let log_form = (lg - 2.0 * lf - lm).abs() / (1.0 + lg.abs() + 2.0 * lf.abs() + lm.abs());
    direct.max(log_form)
}

/// Largest compatibility residual over `samples` seeded-random points of the
/// shared domain's sampling window.
pub fn check_compatibility(
    m: &DifferentiableFn,
    f: &DifferentiableFn,
    g: &DifferentiableFn,
    samples: usize,
) -> Result<f64> {
    let domain = m.domain().intersect(&f.domain()).intersect(&g.domain());
    if domain.is_empty() || samples == 0 {
        return Err(PdmError::EmptyDomain);
    }
    let w = domain.sampling_window(default_center(domain));
    let mut rng = StdRng::seed_from_u64(SAMPLE_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..samples {
        let x = rng.gen_range(w.lo..w.hi);
        worst = worst.max(compatibility_residual_at(m, f, g, x));
    }
    Ok(worst)
}

/// `∫_{x0}^{x} √(m(s)) f(s) ds` by adaptive Simpson quadrature.
pub fn q_from_quadrature(m: &DifferentiableFn, f: &DifferentiableFn, x0: f64, x: f64) -> Result<f64> {
    let domain = m.domain().intersect(&f.domain());
    for p in [x0, x] {
        if !domain.contains_closed(p) {
            return Err(PdmError::DomainViolation {
                x: p,
                lo: domain.lo,
                hi: domain.hi,
            });
        }
    }
    if x == x0 {
        return Ok(0.0);
    }
    numerics::integrate(|s| m.value(s).sqrt() * f.value(s), x0, x)
}

/// Solves `q(x) = q_target` for `x` inside `bracket`.
pub fn invert_q(map: &NonlocalMap, q_target: f64, bracket: Interval) -> Result<f64> {
    if !map.monotone() {
        return Err(PdmError::NonMonotone);
    }
    let (lo, hi) = (bracket.lo, bracket.hi);
    let q_lo = map.q.value(lo);
    let q_hi = map.q.value(hi);
    let no_bracket = PdmError::NoBracket {
        lo,
        hi,
        q_lo,
        q_hi,
        target: q_target,
    };
    if !(lo < hi) || (q_lo - q_target).signum() == (q_hi - q_target).signum() && q_lo != q_target && q_hi != q_target {
        return Err(no_bracket);
    }
    numerics::bracketed_root(|x| map.q.value(x) - q_target, |x| map.q.derivative(x), lo, hi)
        .ok_or(no_bracket)
}

/// Reference-picture velocity `dq/dτ = ẋ√m(x)`.
pub fn qdot_from_state(m: &DifferentiableFn, x: f64, xdot: f64) -> Result<f64> {
    m.domain().check(x)?;
    Ok(xdot * m.value(x).sqrt())
}

/// Value of the oscillator-linearization coordinate and its self-consistency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Linearization {
    /// `V'(x) / (ω² √m f)`.
    pub q: f64,
    /// `|d/dx[V'/(ω²√m f)] - √m f| / (1 + √m |f|)`, differentiated numerically.
    pub consistency_residual: f64,
}

/// `q(x) = V'(x)/(ω²√m(x) f(x))`, the coordinate that maps the PDM equation onto
/// `q'' + ω²q = 0`.
pub fn linearization_q(system: &PdmSystem, f: &DifferentiableFn, omega: f64, x: f64) -> Result<Linearization> {
    system.domain().check(x)?;
    if !(omega > 0.0) {
        return Err(PdmError::invalid("omega", format!("must be > 0, got {omega}")));
    }
    let expr = |s: f64| system.potential.derivative(s) / (omega * omega * system.mass.value(s).sqrt() * f.value(s));
    let fx = f.value(x);
    if fx == 0.0 {
        return Err(PdmError::DivisionByZero { x });
    }
    let q = expr(x);
    // Step small enough for accuracy but keeping the stencil inside the domain.
    let domain = system.domain();
    let room = (x - domain.lo).min(domain.hi - x);
    let h = (1e-3 * (1.0 + x.abs())).min(0.01 * room);
    let dq = five_point_derivative(expr, x, h);
    let target = system.mass.value(x).sqrt() * fx;
    Ok(Linearization {
        q,
        consistency_residual: (dq - target).abs() / (1.0 + target.abs()),
    })
}

/// The time rescaler `f` that realises the family's q-ansatz.
///
/// ML-I, shifted and isotonic: `f = m`. ML-II: `f = βm'/2m` with `β = 1/√λ`.
/// Quadratic: `f = 1`. Morse: `f = η`.
pub fn derive_f_for_q_ansatz(family: &ModelFamily) -> Result<DifferentiableFn> {
    Ok(catalog_map(family)?.f)
}

/// The nonlocal map that linearizes (or, for the isotonic family, maps onto the
/// Ermakov-Pinney equation) the family's equation of motion.
///
/// The ML-II map has `f = 0` at `x = 0`, so its domain is the positive half of
/// the mass domain.
pub fn catalog_map(family: &ModelFamily) -> Result<NonlocalMap> {
    family.validate()?;
    let domain = family.domain();
    match *family {
        ModelFamily::Ml1 { sign, lambda, .. } | ModelFamily::Isotonic { sign, lambda, .. } => {
            cubic_mass_map(sign, lambda, 0.0, domain)
        }
        ModelFamily::ShiftedMl {
            sign, lambda, xi, ..
        } => cubic_mass_map(sign, lambda, xi, domain),
        ModelFamily::Ml2 { sign, lambda, .. } => {
            let s = sign.factor() * lambda;
            let b = 1.0 / lambda.sqrt();
            let mass = ml_mass(sign, lambda, 0.0, domain);
            let f = DifferentiableFn::new(
                move |x| -b * s * x / (1.0 + s * x * x),
                move |x| {
                    let d = 1.0 + s * x * x;
                    -b * s * (1.0 - s * x * x) / (d * d)
                },
                domain,
            );
            // g = β²m'²/4m = λx²m³
            let g = DifferentiableFn::new(
                move |x| lambda * x * x * (1.0 + s * x * x).powi(-3),
                move |x| {
                    let d = 1.0 + s * x * x;
                    lambda * (2.0 * x * d.powi(-3) - 6.0 * s * x.powi(3) * d.powi(-4))
                },
                domain,
            );
            let q = DifferentiableFn::new(
                move |x| b / (1.0 + s * x * x).sqrt(),
                move |x| -b * s * x * (1.0 + s * x * x).powf(-1.5),
                domain,
            );
            NonlocalMap::new(mass, f, g, q, domain.intersect(&Interval::new(0.0, f64::INFINITY)))
        }
        ModelFamily::QuadraticNl { lambda, .. } => {
            let mass = DifferentiableFn::new(
                move |x| (1.0 + lambda * x).powi(-4),
                move |x| -4.0 * lambda * (1.0 + lambda * x).powi(-5),
                domain,
            );
            let f = DifferentiableFn::constant(1.0).with_domain(domain);
            let g = mass.clone();
            let q = DifferentiableFn::new(
                move |x| x / (1.0 + lambda * x),
                move |x| (1.0 + lambda * x).powi(-2),
                domain,
            );
            NonlocalMap::new(mass, f, g, q, domain)
        }
        ModelFamily::Morse { eta, .. } => {
            let mass = DifferentiableFn::new(
                move |x| (2.0 * eta * x).exp(),
                move |x| 2.0 * eta * (2.0 * eta * x).exp(),
                domain,
            );
            let f = DifferentiableFn::constant(eta).with_domain(domain);
            let g = DifferentiableFn::new(
                move |x| eta * eta * (2.0 * eta * x).exp(),
                move |x| 2.0 * eta.powi(3) * (2.0 * eta * x).exp(),
                domain,
            );
            let q = DifferentiableFn::new(
                move |x| (eta * x).exp() - 1.0,
                move |x| eta * (eta * x).exp(),
                domain,
            );
            NonlocalMap::new(mass, f, g, q, domain)
        }
    }
}

/// `f = m`, `g = m³`, `q = (x+ξ)√m` on the mass `1/(1 ± λ(x+ξ)²)`.
fn cubic_mass_map(sign: Sign, lambda: f64, xi: f64, domain: Interval) -> Result<NonlocalMap> {
    let s = sign.factor() * lambda;
    let mass = ml_mass(sign, lambda, xi, domain);
    let f = mass.clone();
    let g = DifferentiableFn::new(
        move |x| {
            let u = x + xi;
            let m = 1.0 / (1.0 + s * u * u);
            m * m * m
        },
        move |x| {
            let u = x + xi;
            -6.0 * s * u * (1.0 + s * u * u).powi(-4)
        },
        domain,
    );
    let q = DifferentiableFn::new(
        move |x| {
            let u = x + xi;
            u / (1.0 + s * u * u).sqrt()
        },
        move |x| {
            let u = x + xi;
            (1.0 + s * u * u).powf(-1.5)
        },
        domain,
    );
    NonlocalMap::new(mass, f, g, q, domain)
}

/// Unit-mass potential `V_ref(q)` of the reference picture.
///
/// `½ω²q²` for the oscillator families, `-½ω²q²` for ML-II on the `1 + λx²`
/// branch (where `β² = -1/λ` makes the real map carry the inverted
/// oscillator), and `½ω²q² + β/q²` for the isotonic family.
pub fn reference_potential(family: &ModelFamily) -> DifferentiableFn {
    let w2 = family.omega().powi(2);
    match *family {
        ModelFamily::Isotonic { beta, .. } => DifferentiableFn::new(
            move |q| 0.5 * w2 * q * q + beta / (q * q),
            move |q| w2 * q - 2.0 * beta / (q * q * q),
            Interval::new(0.0, f64::INFINITY),
        ),
        ModelFamily::Ml2 {
            sign: Sign::Plus, ..
        } => DifferentiableFn::new(move |q| -0.5 * w2 * q * q, move |q| -w2 * q, Interval::REAL_LINE),
        _ => DifferentiableFn::new(move |q| 0.5 * w2 * q * q, move |q| w2 * q, Interval::REAL_LINE),
    }
}

/// Point where the catalog `q` is anchored and its value there.
///
/// `q(0) = 0` for ML-I, quadratic, Morse and isotonic, `q(-ξ) = 0` for the
/// shifted family, and `q(0) = β` for ML-II.
pub fn q_anchor(family: &ModelFamily) -> (f64, f64) {
    match *family {
        ModelFamily::ShiftedMl { xi, .. } => (-xi, 0.0),
        ModelFamily::Ml2 { lambda, .. } => (0.0, 1.0 / lambda.sqrt()),
        _ => (0.0, 0.0),
    }
}

/// Whether the family's reference potential is the harmonic `½ω²q²`, i.e.
/// whether the linearization condition applies.
pub fn is_linearizing(family: &ModelFamily) -> bool {
    !matches!(
        family,
        ModelFamily::Isotonic { .. }
            | ModelFamily::Ml2 {
                sign: Sign::Plus,
                ..
            }
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;

    fn ml1(sign: Sign, lambda: f64) -> ModelFamily {
        ModelFamily::ml1(sign, lambda, 1.0, 1.0).unwrap()
    }

    #[test]
    fn compatibility_examples() {
        let map = catalog_map(&ml1(Sign::Plus, 0.1)).unwrap();
        assert!(check_compatibility(&map.mass, &map.f, &map.g, 200).unwrap() < 1e-14);
        let q = catalog_map(&ModelFamily::quadratic(0.25, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(check_compatibility(&q.mass, &q.f, &q.g, 200).unwrap(), 0.0);
        let m = catalog_map(&ModelFamily::morse(0.5, 1.0, 0.5).unwrap()).unwrap();
        assert!(check_compatibility(&m.mass, &m.f, &m.g, 200).unwrap() < 1e-13);
    }

    #[test]
    fn compatibility_detects_a_wrong_g() {
        let map = catalog_map(&ml1(Sign::Plus, 0.3)).unwrap();
        let bad = map.mass.clone();
        assert!(check_compatibility(&map.mass, &map.f, &bad, 100).unwrap() > 1e-3);
        let left = DifferentiableFn::constant(1.0).with_domain(Interval::new(5.0, 6.0));
        let right = DifferentiableFn::constant(1.0).with_domain(Interval::new(-2.0, -1.0));
        assert_eq!(
            check_compatibility(&map.mass, &left, &right, 10).unwrap_err(),
            PdmError::EmptyDomain
        );
    }

    #[test]
    fn quadrature_examples() {
        let map = catalog_map(&ml1(Sign::Plus, 0.1)).unwrap();
        let q = q_from_quadrature(&map.mass, &map.f, 0.0, 1.0).unwrap();
        assert!((q - 1.0 / 1.1f64.sqrt()).abs() < 1e-9);
        assert!((q - 0.9534626).abs() < 1e-7);
        assert_eq!(q_from_quadrature(&map.mass, &map.f, 0.4, 0.4).unwrap(), 0.0);

        let morse = catalog_map(&ModelFamily::morse(0.5, 1.0, 0.5).unwrap()).unwrap();
        let q = q_from_quadrature(&morse.mass, &morse.f, 0.0, 1.0).unwrap();
        assert!((q - (0.5f64.exp() - 1.0)).abs() < 1e-9);
        assert!((q - 0.6487213).abs() < 1e-7);
    }

    #[test]
    fn quadrature_rejects_points_outside() {
        let map = catalog_map(&ml1(Sign::Minus, 0.25)).unwrap();
        assert!(matches!(
            q_from_quadrature(&map.mass, &map.f, 0.0, 2.5),
            Err(PdmError::DomainViolation { .. })
        ));
    }

    #[test]
    fn inversion_examples() {
        let map = catalog_map(&ml1(Sign::Plus, 0.1)).unwrap();
        let x = invert_q(&map, 0.9534626, Interval::new(-3.0, 3.0)).unwrap();
        assert!((x - 1.0).abs() < 1e-6);
        let exact = 1.0 / 1.1f64.sqrt();
        let x = invert_q(&map, exact, Interval::new(-3.0, 3.0)).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
        assert!((map.q.value(x) - exact).abs() <= 1e-12 * (1.0 + exact));
        assert_eq!(invert_q(&map, 0.0, Interval::new(-2.0, 2.0)).unwrap(), 0.0);

        let morse = catalog_map(&ModelFamily::morse(0.5, 1.0, 0.5).unwrap()).unwrap();
        let x = invert_q(&morse, 0.5f64.exp() - 1.0, Interval::new(-1.0, 4.0)).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn inversion_errors() {
        let map = catalog_map(&ml1(Sign::Plus, 0.1)).unwrap();
        assert!(matches!(
            invert_q(&map, 5.0, Interval::new(-1.0, 1.0)),
            Err(PdmError::NoBracket { .. })
        ));
        let even = NonlocalMap::new(
            map.mass.clone(),
            map.f.clone(),
            map.g.clone(),
            DifferentiableFn::new(|x| x * x, |x| 2.0 * x, Interval::REAL_LINE),
            Interval::new(-2.0, 2.0),
        )
        .unwrap();
        assert!(!even.monotone());
        assert_eq!(invert_q(&even, 0.5, Interval::new(0.1, 1.0)).unwrap_err(), PdmError::NonMonotone);
    }

    #[test]
    fn qdot_examples() {
        let map = catalog_map(&ml1(Sign::Plus, 0.1)).unwrap();
        assert_eq!(qdot_from_state(&map.mass, 0.3, 0.0).unwrap(), 0.0);
        let sho = catalog_map(&ml1(Sign::Plus, 0.0)).unwrap();
        assert_eq!(qdot_from_state(&sho.mass, 2.0, 0.7).unwrap(), 0.7);
        let v = qdot_from_state(&map.mass, 1.0, 1.0).unwrap();
        assert!((v - 1.0 / 1.1f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn linearization_examples() {
        let fam = ml1(Sign::Plus, 0.1);
        let sys = build_model(&fam).unwrap();
        let f = derive_f_for_q_ansatz(&fam).unwrap();
        let lin = linearization_q(&sys, &f, 1.0, 1.0).unwrap();
        assert!((lin.q - 1.0 / 1.1f64.sqrt()).abs() < 1e-14);
        assert!(lin.consistency_residual <= 1e-10);
        assert_eq!(linearization_q(&sys, &f, 1.0, 0.0).unwrap().q, 0.0);

        // Morse(η=0.5, ω=1, α=η)
        let fam = ModelFamily::morse(0.5, 1.0, 0.5).unwrap();
        let sys = build_model(&fam).unwrap();
        let f = derive_f_for_q_ansatz(&fam).unwrap();
        let lin = linearization_q(&sys, &f, 1.0, 1.0).unwrap();
        assert!((lin.q - (0.5f64.exp() - 1.0)).abs() < 1e-14);
        assert!(lin.consistency_residual <= 1e-10);
    }

    #[test]
    fn linearization_division_by_zero() {
        let fam = ml1(Sign::Plus, 0.1);
        let sys = build_model(&fam).unwrap();
        let f = DifferentiableFn::new(|x| x, |_| 1.0, Interval::REAL_LINE);
        assert_eq!(
            linearization_q(&sys, &f, 1.0, 0.0).unwrap_err(),
            PdmError::DivisionByZero { x: 0.0 }
        );
    }

    #[test]
    fn derived_f_examples() {
        let fam = ml1(Sign::Plus, 0.1);
        let f = derive_f_for_q_ansatz(&fam).unwrap();
        let m = build_model(&fam).unwrap().mass;
        assert!((f.value(1.0) - 1.0 / 1.1).abs() < 1e-15);
        let direct = 1.0 + 0.5 * m.derivative(1.0) / m.value(1.0) * 1.0;
        assert!((f.value(1.0) - direct).abs() < 1e-15);

        let q = derive_f_for_q_ansatz(&ModelFamily::quadratic(0.3, 1.0, 1.0).unwrap()).unwrap();
        assert_eq!(q.value(-1.0), 1.0);
        assert_eq!(q.value(7.0), 1.0);

        let ml2 = ModelFamily::ml2(Sign::Plus, 0.1, 1.0, 1.0).unwrap();
        let f = derive_f_for_q_ansatz(&ml2).unwrap();
        let expected = 10f64.sqrt() * (-0.1 / 1.1);
        assert!((f.value(1.0) - expected).abs() < 1e-15);
        assert!((f.value(1.0) + 0.287480).abs() < 1e-6);
    }

    #[test]
    fn ml2_q_identity() {
        for sign in [Sign::Plus, Sign::Minus] {
            let fam = ModelFamily::ml2(sign, 0.2, 1.0, 1.0).unwrap();
            let map = catalog_map(&fam).unwrap();
            let b = 1.0 / 0.2f64.sqrt();
            for i in 1..40 {
                let x = 0.05 * i as f64;
                let m = map.mass.value(x);
                let dm = map.mass.derivative(x);
                assert!((map.q.value(x) - b * m.sqrt()).abs() < 1e-14);
                let via_ansatz = b * dm / (2.0 * m.sqrt());
                assert!((map.q.derivative(x) - via_ansatz).abs() < 1e-14);
                assert!((map.q.derivative(x) - m.sqrt() * map.f.value(x)).abs() < 1e-14);
            }
            assert!(map.monotone());
            assert!(map.domain().lo >= 0.0);
        }
    }

    #[test]
    fn catalog_maps_are_monotone() {
        let fams = [
            ml1(Sign::Plus, 0.4),
            ml1(Sign::Minus, 0.4),
            ModelFamily::shifted(Sign::Minus, 0.3, 1.0, 0.5, 1.0).unwrap(),
            ModelFamily::quadratic(0.25, 1.0, 1.0).unwrap(),
            ModelFamily::morse(0.5, 1.0, 0.5).unwrap(),
            ModelFamily::isotonic(Sign::Plus, 0.1, 1.0, 0.1, 1.0).unwrap(),
        ];
        for fam in fams {
            assert!(catalog_map(&fam).unwrap().monotone(), "{fam:?}");
        }
    }
}
