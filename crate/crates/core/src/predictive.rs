//! Single-test predictive values and the prevalence threshold.

use crate::error::{Result, ScreeningError};
use crate::profile::{PredictiveValue, Prior, TestProfile};

/// Positive predictive value `aφ / (aφ + (1-b)(1-φ))`.
pub fn ppv(test: &TestProfile, prior: Prior) -> Result<PredictiveValue> {
    let phi = prior.value();
    let true_pos = test.sensitivity() * phi;
    let denom = true_pos + test.false_positive_rate() * (1.0 - phi);
    if denom == 0.0 {
        return Err(ScreeningError::DegenerateTest);
    }
    Ok(PredictiveValue::positive(true_pos / denom))
}

/// Negative predictive value `b(1-φ) / ((1-a)φ + b(1-φ))`.
pub fn npv(test: &TestProfile, prior: Prior) -> Result<PredictiveValue> {
    let phi = prior.value();
    let true_neg = test.specificity() * (1.0 - phi);
    let denom = (1.0 - test.sensitivity()) * phi + true_neg;
    if denom == 0.0 {
        return Err(ScreeningError::DegenerateTest);
    }
    Ok(PredictiveValue::negative(true_neg / denom))
}

/// Prevalence at which the PPV curve bends hardest:
/// `(sqrt(a(1-b)) + b - 1) / (a + b - 1)`.
///
/// Below this prior the PPV of a single positive result falls off steeply.
pub fn prevalence_threshold(test: &TestProfile) -> Result<f64> {
    let a = test.sensitivity();
    let b = test.specificity();
    let denom = a + b - 1.0;
    if denom == 0.0 {
        return Err(ScreeningError::EpsilonOne);
    }
    Ok(((a * (1.0 - b)).sqrt() + b - 1.0) / denom)
}

/// Samples the PPV at each prior in `grid`, keeping the grid order.
pub fn ppv_curve(test: &TestProfile, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&phi| Ok((phi, ppv(test, Prior::new(phi)?)?.value)))
        .collect()
}

/// Samples the NPV at each prior in `grid`, keeping the grid order.
pub fn npv_curve(test: &TestProfile, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&phi| Ok((phi, npv(test, Prior::new(phi)?)?.value)))
        .collect()
}

/// `points` evenly spaced priors covering [0, 1] inclusive.
pub fn unit_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => {
            let last = (points - 1) as f64;
            (0..points).map(|i| i as f64 / last).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: f64, b: f64) -> TestProfile {
        TestProfile::new(a, b).unwrap()
    }

    fn p(phi: f64) -> Prior {
        Prior::new(phi).unwrap()
    }

    #[test]
    fn ppv_examples() {
        assert_eq!(ppv(&t(0.5, 0.5), p(0.3)).unwrap().value, 0.3);
        for (a, b) in [(0.98, 0.97), (0.1, 0.2), (1.0, 1.0), (0.3, 0.0)] {
            assert_eq!(ppv(&t(a, b), p(1.0)).unwrap().value, 1.0);
        }
        // 0.08 / 0.215 = 16/43
        let v = ppv(&t(0.80, 0.85), p(0.10)).unwrap().value;
        assert!((v - 16.0 / 43.0).abs() < 1e-12);
    }

    #[test]
    fn ppv_degenerate() {
        assert_eq!(
            ppv(&t(0.0, 1.0), p(0.4)),
            Err(ScreeningError::DegenerateTest)
        );
        assert_eq!(
            ppv(&t(0.0, 0.3), p(1.0)),
            Err(ScreeningError::DegenerateTest)
        );
        assert_eq!(
            ppv(&t(0.7, 1.0), p(0.0)),
            Err(ScreeningError::DegenerateTest)
        );
    }

    #[test]
    fn npv_examples() {
        assert!((npv(&t(0.5, 0.5), p(0.3)).unwrap().value - 0.7).abs() < 1e-15);
        assert_eq!(npv(&t(0.9, 0.2), p(0.0)).unwrap().value, 1.0);
        // 0.425 / 0.525 = 17/21
        let v = npv(&t(0.80, 0.85), p(0.5)).unwrap().value;
        assert!((v - 17.0 / 21.0).abs() < 1e-12);
        assert_eq!(
            npv(&t(1.0, 0.0), p(0.5)),
            Err(ScreeningError::DegenerateTest)
        );
    }

    #[test]
    fn threshold_examples() {
        let fig1 = prevalence_threshold(&t(0.98, 0.97)).unwrap();
        assert!((fig1 - 0.1489).abs() < 5e-4);
        assert_eq!(prevalence_threshold(&t(1.0, 1.0)).unwrap(), 0.0);
        let fig2 = prevalence_threshold(&t(0.80, 0.85)).unwrap();
        assert!((fig2 - 0.30217).abs() < 1e-5);
        assert_eq!(
            prevalence_threshold(&t(0.5, 0.5)),
            Err(ScreeningError::EpsilonOne)
        );
        assert_eq!(
            prevalence_threshold(&t(0.25, 0.75)),
            Err(ScreeningError::EpsilonOne)
        );
    }

    #[test]
    fn curves() {
        assert_eq!(
            ppv_curve(&t(0.98, 0.97), &[0.0, 1.0]).unwrap(),
            vec![(0.0, 0.0), (1.0, 1.0)]
        );
        assert_eq!(
            ppv_curve(&t(0.5, 0.5), &[0.2, 0.7]).unwrap(),
            vec![(0.2, 0.2), (0.7, 0.7)]
        );
        let c = ppv_curve(&t(0.80, 0.85), &[0.10]).unwrap();
        assert!((c[0].1 - 16.0 / 43.0).abs() < 1e-12);

        assert_eq!(
            npv_curve(&t(0.9, 0.6), &[0.0, 1.0]).unwrap(),
            vec![(0.0, 1.0), (1.0, 0.0)]
        );
        let c = npv_curve(&t(0.5, 0.5), &[0.3]).unwrap();
        assert!((c[0].1 - 0.7).abs() < 1e-15);
        let c = npv_curve(&t(0.80, 0.85), &[0.5]).unwrap();
        assert!((c[0].1 - 17.0 / 21.0).abs() < 1e-12);

        assert_eq!(
            ppv_curve(&t(0.0, 1.0), &[0.5]),
            Err(ScreeningError::DegenerateTest)
        );
        assert!(ppv_curve(&t(0.9, 0.9), &[0.5, 1.5]).is_err());
    }

    #[test]
    fn grid() {
        assert_eq!(unit_grid(3), vec![0.0, 0.5, 1.0]);
        assert_eq!(unit_grid(1), vec![0.0]);
        assert!(unit_grid(0).is_empty());
        assert_eq!(*unit_grid(201).last().unwrap(), 1.0);
    }
}
