//! Closed-form solutions of the catalog families, with analytic first and
//! second time derivatives, and the matching reference-picture solutions.

use std::f64::consts::PI;

use crate::error::{PdmError, Result};
use crate::models::{ModelFamily, Sign};
use crate::transform::catalog_map;

/// Position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    pub x: f64,
    pub xdot: f64,
    pub xddot: f64,
}

/// Frequency `Ω` of the family's x-space closed form.
///
/// ML-I, ML-II and shifted: `Ω = ω/√(1 ± λA²)`. Quadratic: `Ω = α = ω`.
/// Morse: `Ω = α = ωη`. Isotonic: `Ω² = ω²/(1 ± λA²) ∓ 2λβ/A²`.
pub fn omega_effective(family: &ModelFamily) -> Result<f64> {
    match *family {
        ModelFamily::Ml1 {
            sign,
            lambda,
            omega,
            amplitude,
            ..
        }
        | ModelFamily::Ml2 {
            sign,
            lambda,
            omega,
            amplitude,
            ..
        }
        | ModelFamily::ShiftedMl {
            sign,
            lambda,
            omega,
            amplitude,
            ..
        } => {
            let d = 1.0 + sign.factor() * lambda * amplitude * amplitude;
            if d <= 0.0 {
                return Err(PdmError::InvalidAmplitude(format!("1 ± lambda*A^2 = {d} <= 0")));
            }
            Ok(omega / d.sqrt())
        }
        ModelFamily::QuadraticNl { omega, .. } => Ok(omega),
        ModelFamily::Morse { eta, omega, .. } => Ok(omega * eta),
        ModelFamily::Isotonic {
            sign,
            lambda,
            omega,
            beta,
            amplitude,
            ..
        } => isotonic_frequency(sign, lambda, beta, amplitude, omega),
    }
}

/// Solves `ω² = (1 ± λA²)(Ω² ± 2λβ/A²)` for `Ω` given `ω`.
pub fn isotonic_frequency(sign: Sign, lambda: f64, beta: f64, amplitude: f64, omega: f64) -> Result<f64> {
    let s = sign.factor();
    let d = 1.0 + s * lambda * amplitude * amplitude;
    if d <= 0.0 || amplitude <= 0.0 {
        return Err(PdmError::InvalidAmplitude(format!(
            "isotonic family needs A > 0 and 1 ± lambda*A^2 > 0 (A = {amplitude})"
        )));
    }
    let big2 = omega * omega / d - s * 2.0 * lambda * beta / (amplitude * amplitude);
    if big2 <= 0.0 {
        return Err(PdmError::InvalidAmplitude(format!(
            "isotonic frequency relation gives Omega^2 = {big2} <= 0"
        )));
    }
    Ok(big2.sqrt())
}

/// Solves `ω² = (1 ± λA²)(Ω² ± 2λβ/A²)` for `ω` given `Ω`.
pub fn isotonic_omega_from_frequency(
    sign: Sign,
    lambda: f64,
    beta: f64,
    amplitude: f64,
    big_omega: f64,
) -> Result<f64> {
    let s = sign.factor();
    if amplitude <= 0.0 || big_omega <= 0.0 {
        return Err(PdmError::InvalidAmplitude(format!(
            "isotonic family needs A > 0 and Omega > 0 (A = {amplitude}, Omega = {big_omega})"
        )));
    }
    let w2 = (1.0 + s * lambda * amplitude * amplitude)
        * (big_omega * big_omega + s * 2.0 * lambda * beta / (amplitude * amplitude));
    if w2 <= 0.0 {
        return Err(PdmError::InvalidAmplitude(format!(
            "isotonic frequency relation gives omega^2 = {w2} <= 0"
        )));
    }
    Ok(w2.sqrt())
}

/// Period of `x(t)` for the family's closed form: `2π/Ω`, or `π/Ω` for the
/// isotonic family whose closed form depends on `sin²(Ωt + δ)`.
pub fn predicted_period(family: &ModelFamily) -> Result<f64> {
    let big = omega_effective(family)?;
    Ok(match family {
        ModelFamily::Isotonic { .. } => PI / big,
        _ => 2.0 * PI / big,
    })
}

/// Closed-form x-space solution of a catalog family.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormSolution {
    family: ModelFamily,
    frequency: f64,
}

impl ClosedFormSolution {
    pub fn new(family: &ModelFamily) -> Result<Self> {
        family.validate()?;
        Ok(ClosedFormSolution {
            family: *family,
            frequency: omega_effective(family)?,
        })
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    /// Ω, derived from the family parameters.
    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn period(&self) -> f64 {
        match self.family {
            ModelFamily::Isotonic { .. } => PI / self.frequency,
            _ => 2.0 * PI / self.frequency,
        }
    }

    /// `(x, ẋ, ẍ)` at time `t`.
    pub fn evaluate(&self, t: f64) -> Kinematics {
        let w = self.frequency;
        let a = self.family.amplitude();
        let theta = w * t + self.family.phase();
        let (s, c) = (theta.sin(), theta.cos());
        match self.family {
            ModelFamily::Ml1 { .. } | ModelFamily::Ml2 { .. } => Kinematics {
                x: a * c,
                xdot: -a * w * s,
                xddot: -a * w * w * c,
            },
            ModelFamily::ShiftedMl { xi, .. } => Kinematics {
                x: a * c - xi,
                xdot: -a * w * s,
                xddot: -a * w * w * c,
            },
            ModelFamily::QuadraticNl { lambda, .. } => {
                // x = u/(1 - λu), u = A cos θ
                let u = a * c;
                let du = -a * w * s;
                let ddu = -w * w * u;
                let d = 1.0 - lambda * u;
                Kinematics {
                    x: u / d,
                    xdot: du / (d * d),
                    xddot: ddu / (d * d) + 2.0 * lambda * du * du / (d * d * d),
                }
            }
            ModelFamily::Morse { eta, .. } => {
                // x = ln(u)/η, u = 1 + A cos θ
                let u = 1.0 + a * c;
                let du = -a * w * s;
                let ddu = -a * w * w * c;
                Kinematics {
                    x: u.ln() / eta,
                    xdot: du / (eta * u),
                    xddot: ddu / (eta * u) - du * du / (eta * u * u),
                }
            }
            ModelFamily::Isotonic { beta, .. } => {
                // x² = y = p + r sin²θ with p = 2β/(Ω²A²), r = A² - p
                let p = 2.0 * beta / (w * w * a * a);
                let r = a * a - p;
                let y = p + r * s * s;
                let dy = r * w * (2.0 * theta).sin();
                let ddy = 2.0 * r * w * w * (2.0 * theta).cos();
                let x = y.sqrt();
                let xdot = dy / (2.0 * x);
                Kinematics {
                    x,
                    xdot,
                    xddot: ddy / (2.0 * x) - xdot * xdot / x,
                }
            }
        }
    }

    /// Initial state `(x(0), ẋ(0))`.
    pub fn initial_state(&self) -> (f64, f64) {
        let k = self.evaluate(0.0);
        (k.x, k.xdot)
    }

    /// Smallest and largest x reached by the closed form.
    pub fn x_range(&self) -> (f64, f64) {
        let a = self.family.amplitude();
        match self.family {
            ModelFamily::Ml1 { .. } | ModelFamily::Ml2 { .. } => (-a, a),
            ModelFamily::ShiftedMl { xi, .. } => (-a - xi, a - xi),
            ModelFamily::QuadraticNl { lambda, .. } => (-a / (1.0 + lambda * a), a / (1.0 - lambda * a)),
            ModelFamily::Morse { eta, .. } => ((1.0 - a).ln() / eta, (1.0 + a).ln() / eta),
            ModelFamily::Isotonic { beta, .. } => {
                let inner = (2.0 * beta).sqrt() / (self.frequency * a);
                (a.min(inner), a.max(inner))
            }
        }
    }
}

/// A closed-form solution of the unit-mass reference equation in rescaled
/// time τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSolution {
    /// `q = A cos(ωτ + φ)`, solving `q'' + ω²q = 0`.
    Harmonic { amplitude: f64, omega: f64, phase: f64 },
    /// `q = q₀ cosh(ωτ) + (p₀/ω) sinh(ωτ)`, solving `q'' - ω²q = 0`.
    Hyperbolic { q0: f64, p0: f64, omega: f64 },
    /// `q = (1/ωA) √((ω²A⁴ - 2β) sin²(ωτ + δ) + 2β)`, solving
    /// `q'' + ω²q - 2β/q³ = 0`.
    ErmakovPinney {
        amplitude: f64,
        omega: f64,
        beta: f64,
        delta: f64,
    },
}

impl ReferenceSolution {
    pub fn q(&self, tau: f64) -> f64 {
        self.q_and_rate(tau).0
    }

    /// `(q, dq/dτ)` at `tau`.
    pub fn q_and_rate(&self, tau: f64) -> (f64, f64) {
        match *self {
            ReferenceSolution::Harmonic {
                amplitude,
                omega,
                phase,
            } => {
                let (s, c) = (omega * tau + phase).sin_cos();
                (amplitude * c, -amplitude * omega * s)
            }
            ReferenceSolution::Hyperbolic { q0, p0, omega } => {
                let (sh, ch) = ((omega * tau).sinh(), (omega * tau).cosh());
                (q0 * ch + p0 / omega * sh, q0 * omega * sh + p0 * ch)
            }
            ReferenceSolution::ErmakovPinney {
                amplitude,
                omega,
                beta,
                delta,
            } => {
                let theta = omega * tau + delta;
                let s = theta.sin();
                let num = (omega * omega * amplitude.powi(4) - 2.0 * beta) * s * s + 2.0 * beta;
                let q = num.sqrt() / (omega * amplitude);
                let dnum = (omega * omega * amplitude.powi(4) - 2.0 * beta) * omega * (2.0 * theta).sin();
                let rate = dnum / (2.0 * omega * omega * amplitude * amplitude * q);
                (q, rate)
            }
        }
    }
}

/// Reference-picture solution whose pushforward is the family's closed form:
/// its initial state is the mapped state `(q(x₀), ẋ₀√m(x₀))` at `τ = 0`.
pub fn mapped_reference_solution(family: &ModelFamily) -> Result<ReferenceSolution> {
    let sol = ClosedFormSolution::new(family)?;
    let map = catalog_map(family)?;
    let (x0, v0) = sol.initial_state();
    let q0 = map.q.value(x0);
    let p0 = v0 * map.mass.value(x0).sqrt();
    let omega = family.omega();
    match *family {
        ModelFamily::Ml2 {
            sign: Sign::Plus, ..
        } => Ok(ReferenceSolution::Hyperbolic { q0, p0, omega }),
        ModelFamily::Isotonic { beta, .. } => {
            // Turning points solve ω²q⁴ - 2Eq² + 2β = 0.
            let e = 0.5 * p0 * p0 + 0.5 * omega * omega * q0 * q0 + beta / (q0 * q0);
            let disc = (e * e - 2.0 * beta * omega * omega).max(0.0);
            let outer2 = (e + disc.sqrt()) / (omega * omega);
            let amplitude = outer2.sqrt();
            let inner2 = 2.0 * beta / (omega * omega * outer2);
            let span = outer2 - inner2;
            let delta = if span <= f64::EPSILON * outer2 {
                0.0
            } else {
                let s2 = ((q0 * q0 - inner2) / span).clamp(0.0, 1.0);
                let s = s2.sqrt();
                let c = (1.0 - s2).sqrt();
                // d(q²)/dτ = ω·span·sin 2θ, so sin θ cos θ carries the sign of p0.
                let c = if p0 < 0.0 { -c } else { c };
                s.atan2(c)
            };
            Ok(ReferenceSolution::ErmakovPinney {
                amplitude,
                omega,
                beta,
                delta,
            })
        }
        _ => {
            let amplitude = (q0 * q0 + (p0 / omega) * (p0 / omega)).sqrt();
            let phase = (-p0 / omega).atan2(q0);
            Ok(ReferenceSolution::Harmonic {
                amplitude,
                omega,
                phase,
            })
        }
    }
}

/// `q(τ)` of the reference solution mapped from the family's closed form.
pub fn reference_solution_q(family: &ModelFamily, tau: f64) -> Result<f64> {
    Ok(mapped_reference_solution(family)?.q(tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::build_model;

    #[test]
    fn ml1_frequency() {
        let fam = ModelFamily::ml1(Sign::Plus, 0.1, 1.0, 1.0).unwrap();
        let w = omega_effective(&fam).unwrap();
        assert!((w - 1.0 / 1.1f64.sqrt()).abs() < 1e-15);
        assert!((w - 0.9534626).abs() < 1e-7);
    }

    #[test]
    fn degenerate_frequencies() {
        let fam = ModelFamily::ml1(Sign::Minus, 0.0, 1.7, 2.0).unwrap();
        assert_eq!(omega_effective(&fam).unwrap(), 1.7);
        let fam = ModelFamily::shifted(Sign::Plus, 0.0, 1.7, 0.0, 2.0).unwrap();
        assert_eq!(omega_effective(&fam).unwrap(), 1.7);
        let fam = ModelFamily::morse(0.5, 1.7, 0.2).unwrap();
        assert_eq!(omega_effective(&fam).unwrap(), 1.7 * 0.5);
    }

    #[test]
    fn isotonic_relation_both_directions() {
        let w = isotonic_omega_from_frequency(Sign::Plus, 0.1, 0.1, 1.0, 1.0).unwrap();
        assert!((w * w - 1.122).abs() < 1e-14);
        let big = isotonic_frequency(Sign::Plus, 0.1, 0.1, 1.0, w).unwrap();
        assert!((big - 1.0).abs() < 1e-14);
        assert!(isotonic_frequency(Sign::Plus, 0.5, 2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let fam = ModelFamily::ml1(Sign::Plus, 0.1, 1.0, 1.0).unwrap();
        let k = ClosedFormSolution::new(&fam).unwrap().evaluate(0.0);
        assert_eq!((k.x, k.xdot), (1.0, 0.0));
        assert!((k.xddot + 1.0 / 1.1).abs() < 1e-15);
        // ẍ from the equation of motion at (1, 0): -ω²x/(1+λx²)
        assert!((k.xddot - (-1.0 / 1.1)).abs() < 1e-15);

        // Morse(η=0.5, A=0.5, α=1): ω = α/η = 2
        let fam = ModelFamily::morse(0.5, 2.0, 0.5).unwrap();
        let k = ClosedFormSolution::new(&fam).unwrap().evaluate(0.0);
        assert!((k.x - 2.0 * 1.5f64.ln()).abs() < 1e-15);
        assert!((k.x - 0.8109302).abs() < 1e-7);
        assert_eq!(k.xdot, 0.0);

        let fam = ModelFamily::quadratic(0.25, 1.0, 1.0).unwrap();
        let k = ClosedFormSolution::new(&fam).unwrap().evaluate(0.0);
        assert!((k.x - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(k.xdot, 0.0);
    }

    #[test]
    fn reference_examples() {
        let h = ReferenceSolution::Harmonic {
            amplitude: 1.0,
            omega: 1.0,
            phase: 0.0,
        };
        assert!(h.q(PI / 2.0).abs() < 1e-15);

        let ep = ReferenceSolution::ErmakovPinney {
            amplitude: 1.0,
            omega: 1.0,
            beta: 0.1,
            delta: 0.0,
        };
        assert!((ep.q(0.0) - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((ep.q(0.0) - 0.4472136).abs() < 1e-7);

        // ω²A⁴ = 2β: circular orbit
        let a = (0.2f64).sqrt().sqrt();
        let circ = ReferenceSolution::ErmakovPinney {
            amplitude: a,
            omega: 1.0,
            beta: 0.1,
            delta: 0.3,
        };
        for tau in [0.0, 0.7, 2.0, 5.5] {
            assert!((circ.q(tau) - a).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_satisfy_the_equation_of_motion() {
        let fams = [
            ModelFamily::ml1(Sign::Minus, 0.3, 1.2, 1.1).unwrap().with_phase(0.4),
            ModelFamily::ml2(Sign::Plus, 0.3, 1.2, 1.1).unwrap(),
            ModelFamily::shifted(Sign::Plus, 0.2, 0.9, 0.6, 1.3).unwrap(),
            ModelFamily::quadratic(0.25, 1.0, 1.0).unwrap().with_phase(-0.2),
            ModelFamily::morse(0.7, 1.1, 0.6).unwrap(),
            ModelFamily::isotonic_from_frequency(Sign::Minus, 0.1, 1.0, 0.1, 1.0).unwrap(),
        ];
        for fam in fams {
            let sys = build_model(&fam).unwrap();
            let sol = ClosedFormSolution::new(&fam).unwrap();
            for i in 0..200 {
                let k = sol.evaluate(0.037 * i as f64);
                let r = sys.el_residual(k.x, k.xdot, k.xddot).unwrap();
                assert!(r.abs() <= 1e-10, "{fam:?} t-index {i}: residual {r}");
            }
        }
    }

    #[test]
    fn mapped_harmonic_amplitude() {
        let fam = ModelFamily::ml1(Sign::Minus, 0.25, 1.0, 1.0).unwrap();
        match mapped_reference_solution(&fam).unwrap() {
            ReferenceSolution::Harmonic { amplitude, phase, .. } => {
                assert!((amplitude - 1.0 / 0.75f64.sqrt()).abs() < 1e-14);
                assert!(phase.abs() < 1e-15);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mapped_isotonic_matches_initial_state() {
        let fam = ModelFamily::isotonic_from_frequency(Sign::Plus, 0.1, 1.0, 0.1, 1.0)
            .unwrap()
            .with_phase(0.9);
        let map = catalog_map(&fam).unwrap();
        let (x0, v0) = ClosedFormSolution::new(&fam).unwrap().initial_state();
        let (q, p) = mapped_reference_solution(&fam).unwrap().q_and_rate(0.0);
        assert!((q - map.q.value(x0)).abs() < 1e-13);
        assert!((p - v0 * map.mass.value(x0).sqrt()).abs() < 1e-12);
    }
}
