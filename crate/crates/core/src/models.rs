//! Catalog of exactly solvable position-dependent-mass oscillator families and
//! the `PdmSystem` type they build.
//!
//! A system is a mass profile `m(x)` (unit reference mass) and a potential
//! `V(x)`. Its Euler-Lagrange equation is the quadratic Liénard equation
//!
//! ```text
//! ẍ + ½ (m'/m) ẋ² + V'/m = 0
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::function::{DifferentiableFn, Interval};

/// Selects the `1 + λx²` (`Plus`) or `1 - λx²` (`Minus`) branch of the
/// Mathews-Lakshmanan mass `m = 1/(1 ± λx²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    #[inline]
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        }
    }
}

impl FromStr for Sign {
    type Err = PdmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "+" | "plus" | "+1" | "1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            other => Err(PdmError::invalid("sign", format!("expected + or -, got `{other}`"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Family tag without parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyTag {
    Ml1,
    Ml2,
    ShiftedMl,
    QuadraticNl,
    Morse,
    Isotonic,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] = [
        FamilyTag::Ml1,
        FamilyTag::Ml2,
        FamilyTag::ShiftedMl,
        FamilyTag::QuadraticNl,
        FamilyTag::Morse,
        FamilyTag::Isotonic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyTag::Ml1 => "ml1",
            FamilyTag::Ml2 => "ml2",
            FamilyTag::ShiftedMl => "shifted-ml",
            FamilyTag::QuadraticNl => "quadratic",
            FamilyTag::Morse => "morse",
            FamilyTag::Isotonic => "isotonic",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            FamilyTag::Ml1 => "Mathews-Lakshmanan I: m = 1/(1±λx²), V = ½mω²x², f = m",
            FamilyTag::Ml2 => "Mathews-Lakshmanan II: m = 1/(1±λx²), V = ∓mω²/2λ, f = βm'/2m",
            FamilyTag::ShiftedMl => {
                "shifted Mathews-Lakshmanan: m = 1/(1±λ(x+ξ)²), V = ½mω²(x+ξ)², f = m"
            }
            FamilyTag::QuadraticNl => "quadratic nonlinear: m = 1/(1+λx)⁴, V = ½ω²x²/(1+λx)², f = 1",
            FamilyTag::Morse => "Morse-type: m = e^{2ηx}, V = ½mω²(1-e^{-ηx})², f = η",
            FamilyTag::Isotonic => {
                "PDM-deformed isotonic: m = 1/(1±λx²), V = ½ω²x²m + β(1±λx²)/x², f = m"
            }
        }
    }

    /// Whether the family has a `±` mass branch.
    pub fn has_sign(self) -> bool {
        matches!(
            self,
            FamilyTag::Ml1 | FamilyTag::Ml2 | FamilyTag::ShiftedMl | FamilyTag::Isotonic
        )
    }
}

impl FromStr for FamilyTag {
    type Err = PdmError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ml1" | "ml-i" | "mathews-lakshmanan-i" => Ok(FamilyTag::Ml1),
            "ml2" | "ml-ii" | "mathews-lakshmanan-ii" => Ok(FamilyTag::Ml2),
            "shifted-ml" | "shifted" | "sml" | "ml3" => Ok(FamilyTag::ShiftedMl),
            "quadratic" | "quadratic-nl" | "qnl" => Ok(FamilyTag::QuadraticNl),
            "morse" => Ok(FamilyTag::Morse),
            "isotonic" | "ermakov-pinney" => Ok(FamilyTag::Isotonic),
            other => Err(PdmError::UnknownFamily(other.to_string())),
        }
    }
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One of the catalog families with its parameters.
///
/// `amplitude` and `phase` (`delta` for the isotonic family) select a member
/// of the family's closed-form solution set and fix the natural initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFamily {
    Ml1 {
        sign: Sign,
        lambda: f64,
        omega: f64,
        amplitude: f64,
        phase: f64,
    },
    /// The potential is `½β²ω²m` with `β² = ∓1/λ`, i.e. `∓mω²/2λ`.
    Ml2 {
        sign: Sign,
        lambda: f64,
        omega: f64,
        amplitude: f64,
        phase: f64,
    },
    ShiftedMl {
        sign: Sign,
        lambda: f64,
        omega: f64,
        xi: f64,
        amplitude: f64,
        phase: f64,
    },
    /// `α = ω`, and `0 ≤ A < 1/λ`.
    QuadraticNl {
        lambda: f64,
        omega: f64,
        amplitude: f64,
        phase: f64,
    },
    /// `α = ωη`, and `0 ≤ A < 1`.
    Morse {
        eta: f64,
        omega: f64,
        amplitude: f64,
        phase: f64,
    },
    /// Positive branch `x > 0`; `omega` is the reference (ω) frequency.
    Isotonic {
        sign: Sign,
        lambda: f64,
        omega: f64,
        beta: f64,
        amplitude: f64,
        delta: f64,
    },
}

impl ModelFamily {
    pub fn ml1(sign: Sign, lambda: f64, omega: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::Ml1 {
            sign,
            lambda,
            omega,
            amplitude,
            phase: 0.0,
        }
        .validated()
    }

    pub fn ml2(sign: Sign, lambda: f64, omega: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::Ml2 {
            sign,
            lambda,
            omega,
            amplitude,
            phase: 0.0,
        }
        .validated()
    }

    pub fn shifted(sign: Sign, lambda: f64, omega: f64, xi: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::ShiftedMl {
            sign,
            lambda,
            omega,
            xi,
            amplitude,
            phase: 0.0,
        }
        .validated()
    }

    pub fn quadratic(lambda: f64, omega: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::QuadraticNl {
            lambda,
            omega,
            amplitude,
            phase: 0.0,
        }
        .validated()
    }

    pub fn morse(eta: f64, omega: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::Morse {
            eta,
            omega,
            amplitude,
            phase: 0.0,
        }
        .validated()
    }

    pub fn isotonic(sign: Sign, lambda: f64, omega: f64, beta: f64, amplitude: f64) -> Result<Self> {
        ModelFamily::Isotonic {
            sign,
            lambda,
            omega,
            beta,
            amplitude,
            delta: 0.0,
        }
        .validated()
    }

    /// Isotonic family specified by its x-space frequency `Ω`; the reference
    /// frequency follows from `ω² = (1 ± λA²)(Ω² ± 2λβ/A²)`.
    pub fn isotonic_from_frequency(
        sign: Sign,
        lambda: f64,
        big_omega: f64,
        beta: f64,
        amplitude: f64,
    ) -> Result<Self> {
        let omega = crate::solutions::isotonic_omega_from_frequency(
            sign, lambda, beta, amplitude, big_omega,
        )?;
        Self::isotonic(sign, lambda, omega, beta, amplitude)
    }

    pub fn with_phase(mut self, value: f64) -> Self {
        match &mut self {
            ModelFamily::Ml1 { phase, .. }
            | ModelFamily::Ml2 { phase, .. }
            | ModelFamily::ShiftedMl { phase, .. }
            | ModelFamily::QuadraticNl { phase, .. }
            | ModelFamily::Morse { phase, .. } => *phase = value,
            ModelFamily::Isotonic { delta, .. } => *delta = value,
        }
        self
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn tag(&self) -> FamilyTag {
        match self {
            ModelFamily::Ml1 { .. } => FamilyTag::Ml1,
            ModelFamily::Ml2 { .. } => FamilyTag::Ml2,
            ModelFamily::ShiftedMl { .. } => FamilyTag::ShiftedMl,
            ModelFamily::QuadraticNl { .. } => FamilyTag::QuadraticNl,
            ModelFamily::Morse { .. } => FamilyTag::Morse,
            ModelFamily::Isotonic { .. } => FamilyTag::Isotonic,
        }
    }

    pub fn sign(&self) -> Option<Sign> {
        match *self {
            ModelFamily::Ml1 { sign, .. }
            | ModelFamily::Ml2 { sign, .. }
            | ModelFamily::ShiftedMl { sign, .. }
            | ModelFamily::Isotonic { sign, .. } => Some(sign),
            _ => None,
        }
    }

    pub fn omega(&self) -> f64 {
        match *self {
            ModelFamily::Ml1 { omega, .. }
            | ModelFamily::Ml2 { omega, .. }
            | ModelFamily::ShiftedMl { omega, .. }
            | ModelFamily::QuadraticNl { omega, .. }
            | ModelFamily::Morse { omega, .. }
            | ModelFamily::Isotonic { omega, .. } => omega,
        }
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            ModelFamily::Ml1 { amplitude, .. }
            | ModelFamily::Ml2 { amplitude, .. }
            | ModelFamily::ShiftedMl { amplitude, .. }
            | ModelFamily::QuadraticNl { amplitude, .. }
            | ModelFamily::Morse { amplitude, .. }
            | ModelFamily::Isotonic { amplitude, .. } => amplitude,
        }
    }

    /// φ, or δ for the isotonic family.
    pub fn phase(&self) -> f64 {
        match *self {
            ModelFamily::Ml1 { phase, .. }
            | ModelFamily::Ml2 { phase, .. }
            | ModelFamily::ShiftedMl { phase, .. }
            | ModelFamily::QuadraticNl { phase, .. }
            | ModelFamily::Morse { phase, .. } => phase,
            ModelFamily::Isotonic { delta, .. } => delta,
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        match *self {
            ModelFamily::Ml1 { lambda, .. }
            | ModelFamily::Ml2 { lambda, .. }
            | ModelFamily::ShiftedMl { lambda, .. }
            | ModelFamily::QuadraticNl { lambda, .. }
            | ModelFamily::Isotonic { lambda, .. } => Some(lambda),
            ModelFamily::Morse { .. } => None,
        }
    }

    /// The `α` of the quadratic and Morse families (`α = ω` and `α = ωη`).
    pub fn alpha(&self) -> Option<f64> {
        match *self {
            ModelFamily::QuadraticNl { omega, .. } => Some(omega),
            ModelFamily::Morse { eta, omega, .. } => Some(omega * eta),
            _ => None,
        }
    }

    /// ML-II scale `|β| = 1/√λ` (the family fixes `β² = ∓1/λ`).
    pub fn ml2_scale(&self) -> Option<f64> {
        match *self {
            ModelFamily::Ml2 { lambda, .. } => Some(1.0 / lambda.sqrt()),
            _ => None,
        }
    }

    /// Named parameters, in a stable order.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelFamily::Ml1 {
                sign,
                lambda,
                omega,
                amplitude,
                phase,
            }
            | ModelFamily::Ml2 {
                sign,
                lambda,
                omega,
                amplitude,
                phase,
            } => vec![
                ("sign", sign.factor()),
                ("lambda", lambda),
                ("omega", omega),
                ("A", amplitude),
                ("phi", phase),
            ],
            ModelFamily::ShiftedMl {
                sign,
                lambda,
                omega,
                xi,
                amplitude,
                phase,
            } => vec![
                ("sign", sign.factor()),
                ("lambda", lambda),
                ("omega", omega),
                ("xi", xi),
                ("A", amplitude),
                ("phi", phase),
            ],
            ModelFamily::QuadraticNl {
                lambda,
                omega,
                amplitude,
                phase,
            } => vec![
                ("lambda", lambda),
                ("omega", omega),
                ("A", amplitude),
                ("phi", phase),
            ],
            ModelFamily::Morse {
                eta,
                omega,
                amplitude,
                phase,
            } => vec![
                ("eta", eta),
                ("omega", omega),
                ("A", amplitude),
                ("phi", phase),
            ],
            ModelFamily::Isotonic {
                sign,
                lambda,
                omega,
                beta,
                amplitude,
                delta,
            } => vec![
                ("sign", sign.factor()),
                ("lambda", lambda),
                ("omega", omega),
                ("beta", beta),
                ("A", amplitude),
                ("delta", delta),
            ],
        }
    }

    /// Returns a copy with one named parameter replaced and re-validated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut out = *self;
        let slot: Option<&mut f64> = match (&mut out, name) {
            (ModelFamily::Ml1 { lambda, .. }, "lambda")
            | (ModelFamily::Ml2 { lambda, .. }, "lambda")
            | (ModelFamily::ShiftedMl { lambda, .. }, "lambda")
            | (ModelFamily::QuadraticNl { lambda, .. }, "lambda")
            | (ModelFamily::Isotonic { lambda, .. }, "lambda") => Some(lambda),
            (ModelFamily::Ml1 { omega, .. }, "omega")
            | (ModelFamily::Ml2 { omega, .. }, "omega")
            | (ModelFamily::ShiftedMl { omega, .. }, "omega")
            | (ModelFamily::QuadraticNl { omega, .. }, "omega")
            | (ModelFamily::Morse { omega, .. }, "omega")
            | (ModelFamily::Isotonic { omega, .. }, "omega") => Some(omega),
            (ModelFamily::Ml1 { amplitude, .. }, "A")
            | (ModelFamily::Ml2 { amplitude, .. }, "A")
            | (ModelFamily::ShiftedMl { amplitude, .. }, "A")
            | (ModelFamily::QuadraticNl { amplitude, .. }, "A")
            | (ModelFamily::Morse { amplitude, .. }, "A")
            | (ModelFamily::Isotonic { amplitude, .. }, "A") => Some(amplitude),
            (ModelFamily::Ml1 { phase, .. }, "phi")
            | (ModelFamily::Ml2 { phase, .. }, "phi")
            | (ModelFamily::ShiftedMl { phase, .. }, "phi")
            | (ModelFamily::QuadraticNl { phase, .. }, "phi")
            | (ModelFamily::Morse { phase, .. }, "phi") => Some(phase),
            (ModelFamily::Isotonic { delta, .. }, "delta") => Some(delta),
            (ModelFamily::ShiftedMl { xi, .. }, "xi") => Some(xi),
            (ModelFamily::Morse { eta, .. }, "eta") => Some(eta),
            (ModelFamily::Isotonic { beta, .. }, "beta") => Some(beta),
            _ => None,
        };
        match slot {
            Some(s) => *s = value,
            None => {
                return Err(PdmError::invalid(
                    "param",
                    format!("family {} has no parameter `{name}`", self.tag()),
                ))
            }
        }
        out.validated()
    }

    /// Checks every parameter constraint of the family.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.params() {
            if !v.is_finite() {
                return Err(PdmError::invalid(param_name(name), format!("{v} is not finite")));
            }
        }
        let omega = self.omega();
        if omega <= 0.0 {
            return Err(PdmError::invalid("omega", format!("must be > 0, got {omega}")));
        }
        let amplitude = self.amplitude();
        if amplitude < 0.0 {
            return Err(PdmError::invalid("A", format!("must be >= 0, got {amplitude}")));
        }
        if let Some(lambda) = self.lambda() {
            if lambda < 0.0 {
                return Err(PdmError::invalid("lambda", format!("must be >= 0, got {lambda}")));
            }
        }
        match *self {
            ModelFamily::Ml1 { sign, lambda, .. } | ModelFamily::ShiftedMl { sign, lambda, .. } => {
                check_ml_amplitude(sign, lambda, amplitude)
            }
            ModelFamily::Ml2 { sign, lambda, .. } => {
                if lambda <= 0.0 {
                    return Err(PdmError::invalid(
                        "lambda",
                        "ML-II needs lambda > 0 (beta^2 = -/+1/lambda must be finite)",
                    ));
                }
                check_ml_amplitude(sign, lambda, amplitude)
            }
            ModelFamily::QuadraticNl { lambda, .. } => {
                if lambda > 0.0 && amplitude * lambda >= 1.0 {
                    return Err(PdmError::invalid(
                        "A",
                        format!("quadratic family needs 0 <= A < 1/lambda, got A = {amplitude}, lambda = {lambda}"),
                    ));
                }
                Ok(())
            }
            ModelFamily::Morse { eta, .. } => {
                if eta <= 0.0 {
                    return Err(PdmError::invalid("eta", format!("must be > 0, got {eta}")));
                }
                if amplitude >= 1.0 {
                    return Err(PdmError::invalid(
                        "A",
                        format!("Morse family needs 0 <= A < 1, got {amplitude}"),
                    ));
                }
                Ok(())
            }
            ModelFamily::Isotonic {
                sign,
                lambda,
                beta,
                ..
            } => {
                if beta <= 0.0 {
                    return Err(PdmError::invalid("beta", format!("must be > 0, got {beta}")));
                }
                if amplitude <= 0.0 {
                    return Err(PdmError::invalid("A", "isotonic family needs A > 0"));
                }
                check_ml_amplitude(sign, lambda, amplitude)?;
                let big_omega = crate::solutions::omega_effective(self)?;
                // Both turning points of the closed form must lie inside the domain.
                let inner = (2.0 * beta).sqrt() / (big_omega * amplitude);
                let outer = amplitude.max(inner);
                if sign == Sign::Minus && lambda > 0.0 && lambda * outer * outer >= 1.0 {
                    return Err(PdmError::InvalidAmplitude(format!(
                        "isotonic orbit reaches x = {outer}, beyond the pole at 1/sqrt(lambda)"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Open domain of the system's mass and potential (before guarding).
    pub fn domain(&self) -> Interval {
        match *self {
            ModelFamily::Ml1 { sign, lambda, .. } | ModelFamily::Ml2 { sign, lambda, .. } => {
                ml_domain(sign, lambda, 0.0)
            }
            ModelFamily::ShiftedMl {
                sign, lambda, xi, ..
            } => ml_domain(sign, lambda, xi),
            ModelFamily::QuadraticNl { lambda, .. } => {
                if lambda > 0.0 {
                    Interval::new(-1.0 / lambda, f64::INFINITY)
                } else {
                    Interval::REAL_LINE
                }
            }
            ModelFamily::Morse { .. } => Interval::REAL_LINE,
            ModelFamily::Isotonic { sign, lambda, .. } => {
                ml_domain(sign, lambda, 0.0).intersect(&Interval::new(0.0, f64::INFINITY))
            }
        }
    }

    /// Stable equilibrium of the x-space potential.
    pub fn equilibrium(&self) -> f64 {
        match *self {
            ModelFamily::ShiftedMl { xi, .. } => -xi,
            ModelFamily::Isotonic {
                sign,
                lambda,
                omega,
                beta,
                ..
            } => {
                // q*⁴ = 2β/ω² and q = x√m  ⇒  x² = q*²/(1 ∓ λq*²)
                let q2 = (2.0 * beta).sqrt() / omega;
                (q2 / (1.0 - sign.factor() * lambda * q2)).sqrt()
            }
            _ => 0.0,
        }
    }
}

fn param_name(name: &str) -> &'static str {
    match name {
        "sign" => "sign",
        "lambda" => "lambda",
        "omega" => "omega",
        "xi" => "xi",
        "beta" => "beta",
        "eta" => "eta",
        "A" => "A",
        "phi" => "phi",
        "delta" => "delta",
        _ => "param",
    }
}

fn check_ml_amplitude(sign: Sign, lambda: f64, amplitude: f64) -> Result<()> {
    if sign == Sign::Minus && lambda * amplitude * amplitude >= 1.0 {
        return Err(PdmError::InvalidAmplitude(format!(
            "1 - lambda*A^2 = {} must be > 0",
            1.0 - lambda * amplitude * amplitude
        )));
    }
    Ok(())
}

fn ml_domain(sign: Sign, lambda: f64, xi: f64) -> Interval {
    if sign == Sign::Minus && lambda > 0.0 {
        let r = 1.0 / lambda.sqrt();
        Interval::new(-xi - r, -xi + r)
    } else {
        Interval::REAL_LINE
    }
}

/// Mass `m = 1/(1 + σλ(x+ξ)²)` and its derivative.
pub(crate) fn ml_mass(sign: Sign, lambda: f64, xi: f64, domain: Interval) -> DifferentiableFn {
    let s = sign.factor() * lambda;
    DifferentiableFn::new(
        move |x| {
            let u = x + xi;
            1.0 / (1.0 + s * u * u)
        },
        move |x| {
            let u = x + xi;
            let d = 1.0 + s * u * u;
            -2.0 * s * u / (d * d)
        },
        domain,
    )
}

/// A position-dependent-mass system: mass profile, potential and the domain
/// on which both are valid.
#[derive(Debug, Clone)]
pub struct PdmSystem {
    pub mass: DifferentiableFn,
    pub potential: DifferentiableFn,
    domain: Interval,
    equilibrium: f64,
}

impl PdmSystem {
    pub fn new(mass: DifferentiableFn, potential: DifferentiableFn, equilibrium: f64) -> Result<Self> {
        let domain = mass.domain().intersect(&potential.domain());
        if domain.is_empty() {
            return Err(PdmError::EmptyDomain);
        }
        if !domain.contains(equilibrium) {
            return Err(PdmError::DomainViolation {
                x: equilibrium,
                lo: domain.lo,
                hi: domain.hi,
            });
        }
        Ok(PdmSystem {
            mass,
            potential,
            domain,
            equilibrium,
        })
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn equilibrium(&self) -> f64 {
        self.equilibrium
    }

    /// Acceleration from the Euler-Lagrange equation, without domain checks.
    #[inline]
    pub fn acceleration(&self, x: f64, xdot: f64) -> f64 {
        let m = self.mass.value(x);
        -0.5 * self.mass.derivative(x) / m * xdot * xdot - self.potential.derivative(x) / m
    }

    /// `ẍ + ½(m'/m)ẋ² + V'/m`; zero exactly on solutions.
    pub fn el_residual(&self, x: f64, xdot: f64, xddot: f64) -> Result<f64> {
        self.domain.check(x)?;
        let m = self.mass.value(x);
        Ok(xddot + 0.5 * self.mass.derivative(x) / m * xdot * xdot + self.potential.derivative(x) / m)
    }

    /// The mass-gradient reaction force `m'(x)ẋ²/2`.
    pub fn reaction_force(&self, x: f64, xdot: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(0.5 * self.mass.derivative(x) * xdot * xdot)
    }

    /// Total energy `½m(x)ẋ² + V(x)`.
    pub fn energy(&self, x: f64, xdot: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(0.5 * self.mass.value(x) * xdot * xdot + self.potential.value(x))
    }

    /// Force field `V'/m` entering the equation of motion.
    pub fn force_per_mass(&self, x: f64) -> Result<f64> {
        self.domain.check(x)?;
        Ok(self.potential.derivative(x) / self.mass.value(x))
    }
}

/// Builds the PDM system of a catalog family.
pub fn build_model(family: &ModelFamily) -> Result<PdmSystem> {
    family.validate()?;
    let domain = family.domain();
    let (mass, potential) = match *family {
        ModelFamily::Ml1 {
            sign,
            lambda,
            omega,
            ..
        } => {
            let mass = ml_mass(sign, lambda, 0.0, domain);
            let (m, dm) = (mass.clone(), mass.clone());
            let w2 = omega * omega;
            let potential = DifferentiableFn::new(
                move |x| 0.5 * w2 * x * x * m.value(x),
                move |x| 0.5 * w2 * (2.0 * x * dm.value(x) + x * x * dm.derivative(x)),
                domain,
            );
            (mass, potential)
        }
        ModelFamily::Ml2 {
            sign,
            lambda,
            omega,
            ..
        } => {
            let mass = ml_mass(sign, lambda, 0.0, domain);
            // ½β²ω²m with β² = -σ/λ
            let c = -0.5 * sign.factor() * omega * omega / lambda;
            let (m, dm) = (mass.clone(), mass.clone());
            let potential =
                DifferentiableFn::new(move |x| c * m.value(x), move |x| c * dm.derivative(x), domain);
            (mass, potential)
        }
        ModelFamily::ShiftedMl {
            sign,
            lambda,
            omega,
            xi,
            ..
        } => {
            let mass = ml_mass(sign, lambda, xi, domain);
            let (m, dm) = (mass.clone(), mass.clone());
            let w2 = omega * omega;
            let potential = DifferentiableFn::new(
                move |x| {
                    let u = x + xi;
                    0.5 * w2 * u * u * m.value(x)
                },
                move |x| {
                    let u = x + xi;
                    0.5 * w2 * (2.0 * u * dm.value(x) + u * u * dm.derivative(x))
                },
                domain,
            );
            (mass, potential)
        }
        ModelFamily::QuadraticNl { lambda, omega, .. } => {
            let mass = DifferentiableFn::new(
                move |x| (1.0 + lambda * x).powi(-4),
                move |x| -4.0 * lambda * (1.0 + lambda * x).powi(-5),
                domain,
            );
            // Differs from -(α²/2λ²) m (1+2λx)(1+λx)² by the constant α²/2λ².
            let w2 = omega * omega;
            let potential = DifferentiableFn::new(
                move |x| {
                    let d = 1.0 + lambda * x;
                    0.5 * w2 * x * x / (d * d)
                },
                move |x| w2 * x * (1.0 + lambda * x).powi(-3),
                domain,
            );
            (mass, potential)
        }
        ModelFamily::Morse { eta, omega, .. } => {
            let mass = DifferentiableFn::new(
                move |x| (2.0 * eta * x).exp(),
                move |x| 2.0 * eta * (2.0 * eta * x).exp(),
                domain,
            );
            let w2 = omega * omega;
            let potential = DifferentiableFn::new(
                move |x| {
                    let s = 1.0 - (-eta * x).exp();
                    0.5 * w2 * (2.0 * eta * x).exp() * s * s
                },
                move |x| {
                    let e = (eta * x).exp();
                    w2 * eta * e * (e - 1.0)
                },
                domain,
            );
            (mass, potential)
        }
        ModelFamily::Isotonic {
            sign,
            lambda,
            omega,
            beta,
            ..
        } => {
            let mass = ml_mass(sign, lambda, 0.0, ml_domain(sign, lambda, 0.0));
            let (m, dm) = (mass.clone(), mass.clone());
            let w2 = omega * omega;
            let s = sign.factor() * lambda;
            let potential = DifferentiableFn::new(
                move |x| 0.5 * w2 * x * x * m.value(x) + beta * (1.0 + s * x * x) / (x * x),
                move |x| {
                    0.5 * w2 * (2.0 * x * dm.value(x) + x * x * dm.derivative(x))
                        - 2.0 * beta / (x * x * x)
                },
                domain,
            );
            (mass, potential)
        }
    };
    PdmSystem::new(mass, potential, family.equilibrium())
}

/// The alternative `∓mω²/2λ` potential that drives the same Mathews-Lakshmanan
/// dynamics as `½mω²(x+ξ)²` on the ML-I and shifted mass profiles.
///
/// Returns `None` for other families and for `λ = 0`.
pub fn paired_potential(family: &ModelFamily) -> Option<DifferentiableFn> {
    let (sign, lambda, omega, xi) = match *family {
        ModelFamily::Ml1 {
            sign,
            lambda,
            omega,
            ..
        } => (sign, lambda, omega, 0.0),
        ModelFamily::ShiftedMl {
            sign,
            lambda,
            omega,
            xi,
            ..
        } => (sign, lambda, omega, xi),
        _ => return None,
    };
    if lambda <= 0.0 {
        return None;
    }
    let domain = family.domain();
    let mass = ml_mass(sign, lambda, xi, domain);
    let c = -0.5 * sign.factor() * omega * omega / lambda;
    let dm = mass.clone();
    Some(DifferentiableFn::new(
        move |x| c * mass.value(x),
        move |x| c * dm.derivative(x),
        domain,
    ))
}
