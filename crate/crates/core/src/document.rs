//! Flat JSON form of a [`ModelFamily`].
//!
//! ```json
//! {"family": "ml1", "sign": "+", "omega": 1.0, "lambda": 0.1, "A": 1.0}
//! ```
//!
//! Unknown keys are rejected, and so are known keys that do not belong to the
//! chosen family. `"sho"` is accepted as ML-I with `λ = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{PdmError, Result};
use crate::models::{FamilyTag, ModelFamily, Sign};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sign: Option<Sign>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    /// Isotonic only: x-space frequency, an alternative to `omega`.
    #[serde(default, rename = "Omega", skip_serializing_if = "Option::is_none")]
    pub big_omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    /// Morse and quadratic only: checked against the derived `α`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
}

const ALPHA_MATCH_TOL: f64 = 1e-12;

impl ModelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| PdmError::Document(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("document serializes")
    }

    /// Builds and validates the family described by the document.
    pub fn to_family(&self) -> Result<ModelFamily> {
        let sho = self.family.trim().eq_ignore_ascii_case("sho");
        let tag: FamilyTag = if sho {
            FamilyTag::Ml1
        } else {
            self.family.parse()?
        };
        self.reject_foreign_keys(tag, sho)?;

        let sign = self.sign.unwrap_or(Sign::Plus);
        let omega = self.omega.unwrap_or(1.0);
        let amplitude = self.amplitude.unwrap_or(1.0);
        let phi = self.phi.unwrap_or(0.0);
        let lambda = match tag {
            _ if sho => 0.0,
            FamilyTag::Morse => 0.0,
            _ => require(self.lambda, "lambda", tag)?,
        };

        let family = match tag {
            FamilyTag::Ml1 => ModelFamily::ml1(sign, lambda, omega, amplitude)?,
            FamilyTag::Ml2 => ModelFamily::ml2(sign, lambda, omega, amplitude)?,
            FamilyTag::ShiftedMl => ModelFamily::shifted(sign, lambda, omega, self.xi.unwrap_or(0.0), amplitude)?,
            FamilyTag::QuadraticNl => ModelFamily::quadratic(lambda, omega, amplitude)?,
            FamilyTag::Morse => ModelFamily::morse(require(self.eta, "eta", tag)?, omega, amplitude)?,
            FamilyTag::Isotonic => {
                let beta = require(self.beta, "beta", tag)?;
                match (self.omega, self.big_omega) {
                    (Some(_), Some(_)) => {
                        return Err(PdmError::Document("give either `omega` or `Omega`, not both".into()))
                    }
                    (_, Some(big)) => ModelFamily::isotonic_from_frequency(sign, lambda, big, beta, amplitude)?,
                    _ => ModelFamily::isotonic(sign, lambda, omega, beta, amplitude)?,
                }
            }
        };
        let family = family.with_phase(if tag == FamilyTag::Isotonic {
            self.delta.unwrap_or(0.0)
        } else {
            phi
        });

        if let (Some(given), Some(derived)) = (self.alpha, family.alpha()) {
            if (given - derived).abs() > ALPHA_MATCH_TOL * (1.0 + derived.abs()) {
                return Err(PdmError::invalid(
                    "alpha",
                    format!("alpha = {given} is inconsistent with the derived value {derived}"),
                ));
            }
        }
        family.validated()
    }

    fn reject_foreign_keys(&self, tag: FamilyTag, sho: bool) -> Result<()> {
        let present = [
            ("sign", self.sign.is_some()),
            ("Omega", self.big_omega.is_some()),
            ("lambda", self.lambda.is_some()),
            ("xi", self.xi.is_some()),
            ("beta", self.beta.is_some()),
            ("eta", self.eta.is_some()),
            ("alpha", self.alpha.is_some()),
            ("phi", self.phi.is_some()),
            ("delta", self.delta.is_some()),
        ];
        for (key, set) in present {
            if set && !accepts(tag, sho, key) {
                let family = if sho { "sho" } else { tag.name() };
                return Err(PdmError::Document(format!("field `{key}` does not apply to family {family}")));
            }
        }
        Ok(())
    }

    /// Canonical document for a family.
    pub fn from_family(family: &ModelFamily) -> Self {
        let mut doc = ModelDocument {
            family: family.tag().name().to_string(),
            sign: family.sign(),
            omega: Some(family.omega()),
            ..Default::default()
        };
        for (name, value) in family.params() {
            match name {
                "lambda" => doc.lambda = Some(value),
                "xi" => doc.xi = Some(value),
                "beta" => doc.beta = Some(value),
                "eta" => doc.eta = Some(value),
                "A" => doc.amplitude = Some(value),
                "phi" => doc.phi = Some(value),
                "delta" => doc.delta = Some(value),
                _ => {}
            }
        }
        doc
    }
}

fn accepts(tag: FamilyTag, sho: bool, key: &str) -> bool {
    if sho {
        return key == "phi";
    }
    match key {
        "sign" => tag.has_sign(),
        "lambda" => tag != FamilyTag::Morse,
        "xi" => tag == FamilyTag::ShiftedMl,
        "beta" | "Omega" | "delta" => tag == FamilyTag::Isotonic,
        "eta" => tag == FamilyTag::Morse,
        "alpha" => matches!(tag, FamilyTag::Morse | FamilyTag::QuadraticNl),
        "phi" => tag != FamilyTag::Isotonic,
        _ => false,
    }
}

fn require(value: Option<f64>, key: &'static str, tag: FamilyTag) -> Result<f64> {
    value.ok_or_else(|| PdmError::Document(format!("family {} requires `{key}`", tag.name())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ModelFamily> {
        ModelDocument::from_json(text)?.to_family()
    }

    #[test]
    fn parses_the_basic_form() {
        let fam = parse(r#"{"family": "ml1", "sign": "+", "omega": 1.0, "lambda": 0.1}"#).unwrap();
        assert_eq!(fam, ModelFamily::ml1(Sign::Plus, 0.1, 1.0, 1.0).unwrap());
        let fam = parse(r#"{"family": "sho"}"#).unwrap();
        assert_eq!(fam.lambda(), Some(0.0));
    }

    #[test]
    fn rejects_unknown_and_foreign_fields() {
        let e = parse(r#"{"family": "ml1", "lambda": 0.1, "gamma": 2}"#).unwrap_err();
        assert!(matches!(e, PdmError::Document(_)));
        let e = parse(r#"{"family": "ml1", "lambda": 0.1, "eta": 2}"#).unwrap_err();
        assert!(e.is_validation());
        assert!(parse(r#"{"family": "morse", "eta": 0.5, "sign": "-"}"#).is_err());
        assert!(parse(r#"{"family": "sho", "lambda": 0.1}"#).is_err());
        assert!(parse(r#"{"family": "pendulum", "lambda": 0.1}"#).unwrap_err().is_validation());
        assert!(parse(r#"{"family": "ml1"}"#).is_err());
    }

    #[test]
    fn morse_alpha_is_checked() {
        assert!(parse(r#"{"family": "morse", "eta": 0.5, "omega": 2, "alpha": 1.0, "A": 0.5}"#).is_ok());
        assert!(parse(r#"{"family": "morse", "eta": 0.5, "omega": 2, "alpha": 2.0, "A": 0.5}"#).is_err());
    }

    #[test]
    fn isotonic_by_frequency() {
        let fam = parse(r#"{"family": "isotonic", "lambda": 0.1, "beta": 0.1, "Omega": 1.0}"#).unwrap();
        assert!((fam.omega() - 1.122f64.sqrt()).abs() < 1e-14);
        assert!(parse(r#"{"family": "isotonic", "lambda": 0.1, "beta": 0.1, "Omega": 1.0, "omega": 1.0}"#).is_err());
    }

    #[test]
    fn round_trip() {
        for fam in [
            ModelFamily::ml1(Sign::Minus, 0.2, 1.5, 0.7).unwrap().with_phase(0.3),
            ModelFamily::ml2(Sign::Plus, 0.2, 1.0, 0.5).unwrap(),
            ModelFamily::shifted(Sign::Plus, 0.2, 1.0, 0.3, 1.0).unwrap(),
            ModelFamily::quadratic(0.25, 1.0, 1.0).unwrap(),
            ModelFamily::morse(0.5, 2.0, 0.5).unwrap(),
            ModelFamily::isotonic(Sign::Plus, 0.1, 1.1, 0.1, 1.0).unwrap().with_phase(0.2),
        ] {
            let text = ModelDocument::from_family(&fam).to_json();
            assert_eq!(parse(&text).unwrap(), fam, "{text}");
        }
    }
}
