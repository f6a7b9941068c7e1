//! Validated inputs: test characteristics and prior probability.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreeningError};

fn check_probability(field: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(ScreeningError::InvalidProbability { field, value })
    }
}

/// Sensitivity/specificity pair of a binary screening test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawProfile", into = "RawProfile")]
pub struct TestProfile {
    sensitivity: f64,
    specificity: f64,
}

#[derive(Serialize, Deserialize)]
struct RawProfile {
    sensitivity: f64,
    specificity: f64,
}

impl TryFrom<RawProfile> for TestProfile {
    type Error = ScreeningError;

    fn try_from(raw: RawProfile) -> Result<Self> {
        Self::new(raw.sensitivity, raw.specificity)
    }
}

impl From<TestProfile> for RawProfile {
    fn from(t: TestProfile) -> Self {
        RawProfile {
            sensitivity: t.sensitivity,
            specificity: t.specificity,
        }
    }
}

impl TestProfile {
    pub fn new(sensitivity: f64, specificity: f64) -> Result<Self> {
        Ok(Self {
            sensitivity: check_probability("sensitivity", sensitivity)?,
            specificity: check_probability("specificity", specificity)?,
        })
    }

    /// True-positive rate.
    pub fn sensitivity(&self) -> f64 {
        self.sensitivity
    }

    /// True-negative rate.
    pub fn specificity(&self) -> f64 {
        self.specificity
    }

    /// False-positive rate, `1 - specificity`.
    pub fn false_positive_rate(&self) -> f64 {
        1.0 - self.specificity
    }

    /// Sum of sensitivity and specificity. A value of 1 marks a test whose
    /// result carries no information.
    pub fn epsilon(&self) -> f64 {
        self.sensitivity + self.specificity
    }

    /// Positive likelihood ratio `a / (1 - b)`.
    pub fn positive_likelihood_ratio(&self) -> Result<f64> {
        if self.specificity == 1.0 {
            return Err(ScreeningError::SpecificityOne);
        }
        Ok(self.sensitivity / self.false_positive_rate())
    }
}

/// Prior (pre-test) probability of disease. Doubles as prevalence.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Prior(f64);

impl Prior {
    pub fn new(phi: f64) -> Result<Self> {
        check_probability("prior", phi).map(Self)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Prior {
    type Error = ScreeningError;

    fn try_from(phi: f64) -> Result<Self> {
        Self::new(phi)
    }
}

impl From<Prior> for f64 {
    fn from(p: Prior) -> f64 {
        p.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictiveKind {
    Positive,
    Negative,
}

/// Post-test probability of the condition matching the result:
/// disease for a positive result, no disease for a negative one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveValue {
    pub value: f64,
    pub kind: PredictiveKind,
}

impl PredictiveValue {
    pub(crate) fn positive(value: f64) -> Self {
        Self {
            value,
            kind: PredictiveKind::Positive,
        }
    }

    pub(crate) fn negative(value: f64) -> Self {
        Self {
            value,
            kind: PredictiveKind::Negative,
        }
    }
}

/// Outcome of a single administration of the test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TestResult {
    #[serde(rename = "+", alias = "positive", alias = "pos")]
    Positive,
    #[serde(rename = "-", alias = "\u{2212}", alias = "negative", alias = "neg")]
    Negative,
}

impl std::str::FromStr for TestResult {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "+" | "positive" | "pos" => Ok(Self::Positive),
            "-" | "\u{2212}" | "negative" | "neg" => Ok(Self::Negative),
            other => Err(format!("unrecognised test result {other:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range() {
        assert_eq!(
            TestProfile::new(1.2, 0.5),
            Err(ScreeningError::InvalidProbability {
                field: "sensitivity",
                value: 1.2
            })
        );
        assert!(TestProfile::new(0.5, -0.01).is_err());
        assert!(TestProfile::new(f64::NAN, 0.5).is_err());
        assert!(Prior::new(1.0000001).is_err());
        assert!(Prior::new(0.0).is_ok());
    }

    #[test]
    fn epsilon_values() {
        assert_eq!(TestProfile::new(0.98, 0.97).unwrap().epsilon(), 0.98 + 0.97);
        assert!((TestProfile::new(0.98, 0.97).unwrap().epsilon() - 1.95).abs() < 1e-12);
        assert_eq!(TestProfile::new(0.0, 0.0).unwrap().epsilon(), 0.0);
        assert!((TestProfile::new(0.80, 0.85).unwrap().epsilon() - 1.65).abs() < 1e-12);
    }

    #[test]
    fn likelihood_ratio() {
        let lr = TestProfile::new(0.98, 0.97)
            .unwrap()
            .positive_likelihood_ratio()
            .unwrap();
        assert!((lr - 0.98 / 0.03).abs() / lr < 1e-12);
        assert!((lr - 32.666_666_666_666_67).abs() < 1e-9);
        let flat = TestProfile::new(0.5, 0.5).unwrap();
        assert_eq!(flat.positive_likelihood_ratio(), Ok(1.0));
        let perfect_spec = TestProfile::new(0.5, 1.0).unwrap();
        assert_eq!(
            perfect_spec.positive_likelihood_ratio(),
            Err(ScreeningError::SpecificityOne)
        );
    }

    #[test]
    fn serde_validates() {
        let ok: TestProfile =
            serde_json::from_str(r#"{"sensitivity":0.8,"specificity":0.85}"#).unwrap();
        assert_eq!(ok.sensitivity(), 0.8);
        assert!(
            serde_json::from_str::<TestProfile>(r#"{"sensitivity":2,"specificity":0.85}"#).is_err()
        );
        assert!(serde_json::from_str::<Prior>("1.5").is_err());
    }

    #[test]
    fn result_parsing() {
        assert_eq!("+".parse(), Ok(TestResult::Positive));
        assert_eq!("\u{2212}".parse(), Ok(TestResult::Negative));
        assert!("x".parse::<TestResult>().is_err());
        let r: TestResult = serde_json::from_str("\"\u{2212}\"").unwrap();
        assert_eq!(r, TestResult::Negative);
        assert_eq!(
            serde_json::to_string(&TestResult::Positive).unwrap(),
            "\"+\""
        );
    }
}
