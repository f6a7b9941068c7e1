//! Serial testing with one test: Bayesian updating, the closed form for
//! `n` consecutive positives, and the planner for how many positives are
//! needed to reach a target PPV.
//!
//! Repeated administrations are modelled as conditionally independent
//! given disease status.

use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreeningError};
use crate::predictive::ppv;
use crate::profile::{Prior, TestProfile, TestResult};

/// Posterior after observing one result, to be used as the next prior.
pub fn posterior_update(prior: Prior, test: &TestProfile, result: TestResult) -> Result<Prior> {
    let value = match result {
        TestResult::Positive => ppv(test, prior)?.value,
        TestResult::Negative => {
            let phi = prior.value();
            let false_neg = (1.0 - test.sensitivity()) * phi;
            let denom = false_neg + test.specificity() * (1.0 - phi);
            if denom == 0.0 {
                return Err(ScreeningError::DegenerateTest);
            }
            false_neg / denom
        }
    };
    Prior::new(value)
}

/// Folds [`posterior_update`] over `results`, returning every intermediate
/// posterior starting with `prior` itself.
pub fn trajectory(prior: Prior, test: &TestProfile, results: &[TestResult]) -> Result<Vec<Prior>> {
    let mut out = Vec::with_capacity(results.len() + 1);
    out.push(prior);
    let mut current = prior;
    for &r in results {
        current = posterior_update(current, test, r)?;
        out.push(current);
    }
    Ok(out)
}

fn pow(base: f64, n: u64) -> f64 {
    match i32::try_from(n) {
        Ok(k) => base.powi(k),
        Err(_) => base.powf(n as f64),
    }
}

/// PPV after `n` consecutive positive results:
/// `aⁿφ / (aⁿφ + (1-b)ⁿ(1-φ))`.
///
/// For `n = 1` this is exactly [`ppv`].
pub fn sequential_ppv(test: &TestProfile, prior: Prior, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(ScreeningError::InvalidIterationCount);
    }
    if test.specificity() == 1.0 {
        return Err(ScreeningError::SpecificityOne);
    }
    let a = test.sensitivity();
    let fpr = test.false_positive_rate();
    let phi = prior.value();
    if a == 0.0 && phi == 1.0 {
        return Err(ScreeningError::DegenerateTest);
    }

    let true_pos = pow(a, n) * phi;
    let denom = true_pos + pow(fpr, n) * (1.0 - phi);
    if denom >= f64::MIN_POSITIVE {
        return Ok(true_pos / denom);
    }

    // Both terms underflowed; compare them in log space.
    if a == 0.0 || phi == 0.0 {
        return Ok(0.0);
    }
    if phi == 1.0 {
        return Ok(1.0);
    }
    let n = n as f64;
    let log_ratio = (n * fpr.ln() + (1.0 - phi).ln()) - (n * a.ln() + phi.ln());
    Ok(1.0 / (1.0 + log_ratio.exp()))
}

/// PPV after `n` consecutive positives for a test known only through its
/// log positive likelihood ratio. Works on the odds scale.
pub fn sequential_ppv_log_lr(log_lr: f64, prior: Prior, n: u64) -> f64 {
    let phi = prior.value();
    if phi == 0.0 || phi == 1.0 {
        return phi;
    }
    let log_odds = (phi / (1.0 - phi)).ln() + n as f64 * log_lr;
    1.0 / (1.0 + (-log_odds).exp())
}

/// Where the PPV goes under an unbounded run of positive results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConvergenceClass {
    ConvergesToOne,
    StaysAtPrior,
    ConvergesToZero,
}

/// Classifies by comparing sensitivity with the false-positive rate `1 - b`.
pub fn convergence_class(test: &TestProfile) -> Result<ConvergenceClass> {
    if test.specificity() == 1.0 {
        return Err(ScreeningError::SpecificityOne);
    }
    let a = test.sensitivity();
    let fpr = test.false_positive_rate();
    Ok(if a > fpr {
        ConvergenceClass::ConvergesToOne
    } else if a == fpr {
        ConvergenceClass::StaysAtPrior
    } else {
        ConvergenceClass::ConvergesToZero
    })
}

/// Real-valued number of positive results taking prior `phi` to PPV
/// `target`: `ln[ρ(φ-1) / (φ(ρ-1))] / ln LR+`.
///
/// No domain checks; callers guarantee `0 < phi < 1`, `0 < target < 1`
/// and `log_lr != 0`.
pub fn raw_iterations(log_lr: f64, phi: f64, target: f64) -> f64 {
    let log_odds_gap = (target / (1.0 - target)).ln() - (phi / (1.0 - phi)).ln();
    log_odds_gap / log_lr
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanStatus {
    /// The prior already meets the target; no testing needed.
    AlreadyMet,
    /// `n_i` consecutive positives reach the target.
    Planned,
    /// Positive results never raise the posterior (LR+ <= 1).
    NonInformativeTest,
}

/// Outcome of [`iterations_needed`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationPlan {
    pub target_rho: f64,
    pub prior: f64,
    /// Real-valued iteration count before rounding up. Present for
    /// `Planned`, and for `AlreadyMet` when it is finite (then `<= 0`).
    pub raw_n: Option<f64>,
    /// Whole number of consecutive positives. `0` for `AlreadyMet`, absent
    /// for `NonInformativeTest`.
    pub n_i: Option<u64>,
    pub status: PlanStatus,
}

impl IterationPlan {
    fn already_met(target: f64, phi: f64, raw_n: Option<f64>) -> Self {
        Self {
            target_rho: target,
            prior: phi,
            raw_n,
            n_i: Some(0),
            status: PlanStatus::AlreadyMet,
        }
    }

    fn non_informative(target: f64, phi: f64) -> Self {
        Self {
            target_rho: target,
            prior: phi,
            raw_n: None,
            n_i: None,
            status: PlanStatus::NonInformativeTest,
        }
    }
}

/// Ceiling of a planned raw count, at least one test.
pub fn ceil_iterations(raw_n: f64) -> u64 {
    let c = raw_n.ceil();
    if c < 1.0 {
        1
    } else if c >= u64::MAX as f64 {
        u64::MAX
    } else {
        c as u64
    }
}

// Corrects the ceiling when rounding in `raw_n` lands on the wrong side of
// an integer, so that `reaches(n) && !reaches(n - 1)` holds.
fn tighten(mut n: u64, reaches: impl Fn(u64) -> Result<bool>) -> Result<u64> {
    const MAX_STEPS: usize = 8;
    for _ in 0..MAX_STEPS {
        if reaches(n)? || n == u64::MAX {
            break;
        }
        n += 1;
    }
    for _ in 0..MAX_STEPS {
        if n <= 1 || !reaches(n - 1)? {
            break;
        }
        n -= 1;
    }
    Ok(n)
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target <= 1.0 {
        Ok(())
    } else {
        Err(ScreeningError::InvalidTarget(target))
    }
}

fn plan(
    log_lr: f64,
    phi: f64,
    target: f64,
    reaches: impl Fn(u64) -> Result<bool>,
) -> Result<IterationPlan> {
    if log_lr.is_nan() || log_lr <= 0.0 {
        return Ok(IterationPlan::non_informative(target, phi));
    }
    if phi >= target {
        let raw = (phi < 1.0).then(|| raw_iterations(log_lr, phi, target));
        return Ok(IterationPlan::already_met(target, phi, raw));
    }
    if target == 1.0 {
        return Err(ScreeningError::InfeasibleTarget { target, prior: phi });
    }
    if phi == 0.0 {
        return Err(ScreeningError::InfeasibleTarget { target, prior: phi });
    }
    let raw = raw_iterations(log_lr, phi, target);
    let n_i = tighten(ceil_iterations(raw), reaches)?;
    Ok(IterationPlan {
        target_rho: target,
        prior: phi,
        raw_n: Some(raw),
        n_i: Some(n_i),
        status: PlanStatus::Planned,
    })
}

/// Number of consecutive positive results needed for the PPV to reach
/// `target`.
///
/// `target = 1` is unreachable from any prior below 1. Tests with
/// LR+ <= 1 are reported as [`PlanStatus::NonInformativeTest`].
pub fn iterations_needed(test: &TestProfile, prior: Prior, target: f64) -> Result<IterationPlan> {
    check_target(target)?;
    let lr = test.positive_likelihood_ratio()?;
    let log_lr = if test.sensitivity() > test.false_positive_rate() {
        lr.ln()
    } else {
        // a <= 1-b: non-informative even if the quotient rounds to 1.
        f64::min(lr.ln(), 0.0)
    };
    plan(log_lr, prior.value(), target, |n| {
        Ok(sequential_ppv(test, prior, n)? >= target)
    })
}

/// [`iterations_needed`] for a test given only by `ln LR+`.
pub fn iterations_needed_log_lr(log_lr: f64, prior: Prior, target: f64) -> Result<IterationPlan> {
    check_target(target)?;
    if log_lr.is_nan() {
        return Err(ScreeningError::InvalidAxis(
            "ln LR+ must be a number".into(),
        ));
    }
    plan(log_lr, prior.value(), target, |n| {
        Ok(sequential_ppv_log_lr(log_lr, prior, n) >= target)
    })
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

    /// A test whose positive likelihood ratio is `e^log_lr`.
    fn with_log_lr(log_lr: f64) -> TestProfile {
        let a = 0.95;
        t(a, 1.0 - a / log_lr.exp())
    }

    #[test]
    fn sequential_examples() {
        let fig2 = t(0.80, 0.85);
        let one = sequential_ppv(&fig2, p(0.10), 1).unwrap();
        assert_eq!(one, ppv(&fig2, p(0.10)).unwrap().value);
        assert!((one - 16.0 / 43.0).abs() < 1e-12);

        assert!((sequential_ppv(&t(0.5, 0.5), p(0.3), 10).unwrap() - 0.3).abs() < 1e-15);

        // Continuous n at LR+ = e, φ = 0.1 lands on 0.99 at n = 6.79.
        let n = 6.79_f64;
        let cont = 1.0 / (1.0 + (0.9 / 0.1) * (-n).exp());
        assert!((cont - 0.99).abs() < 1e-4);
        let lr_e = with_log_lr(1.0);
        assert!(sequential_ppv(&lr_e, p(0.10), 7).unwrap() >= 0.99);
        assert!(sequential_ppv(&lr_e, p(0.10), 6).unwrap() < 0.99);
    }

    #[test]
    fn sequential_errors() {
        assert_eq!(
            sequential_ppv(&t(0.8, 0.85), p(0.1), 0),
            Err(ScreeningError::InvalidIterationCount)
        );
        assert_eq!(
            sequential_ppv(&t(0.8, 1.0), p(0.1), 3),
            Err(ScreeningError::SpecificityOne)
        );
        assert_eq!(
            sequential_ppv(&t(0.0, 0.5), p(1.0), 3),
            Err(ScreeningError::DegenerateTest)
        );
    }

    #[test]
    fn sequential_survives_underflow() {
        let test = t(0.01, 0.99);
        // 0.01^400 and 0.01^400 both underflow; LR+ = 1 leaves the prior.
        let v = sequential_ppv(&test, p(0.25), 400).unwrap();
        assert!((v - 0.25).abs() < 1e-9);
        let strong = t(0.02, 0.995);
        let v = sequential_ppv(&strong, p(0.001), 300).unwrap();
        assert!(v > 0.999_999);
        let huge = sequential_ppv(&t(0.9, 0.5), p(0.5), 1 << 40).unwrap();
        assert_eq!(huge, 1.0);
    }

    #[test]
    fn update_examples() {
        let fig2 = t(0.80, 0.85);
        let first = posterior_update(p(0.10), &fig2, TestResult::Positive).unwrap();
        assert!((first.value() - 16.0 / 43.0).abs() < 1e-12);
        let second = posterior_update(first, &fig2, TestResult::Positive).unwrap();
        // 0.64·0.1 / (0.64·0.1 + 0.0225·0.9) = 0.064/0.08425
        assert!((second.value() - 0.064 / 0.08425).abs() < 1e-12);
        assert!((second.value() - 0.759644).abs() < 1e-6);
        let closed = sequential_ppv(&fig2, p(0.10), 2).unwrap();
        assert!((second.value() - closed).abs() / closed < 1e-12);

        let flat = t(0.5, 0.5);
        for r in [TestResult::Positive, TestResult::Negative] {
            assert!((posterior_update(p(0.3), &flat, r).unwrap().value() - 0.3).abs() < 1e-15);
        }

        // + then −: joint probability 0.8·0.2·0.1 vs 0.15·0.85·0.9
        let neg = posterior_update(first, &fig2, TestResult::Negative).unwrap();
        let joint = (0.8 * 0.2 * 0.1) / (0.8 * 0.2 * 0.1 + 0.15 * 0.85 * 0.9);
        assert!((neg.value() - joint).abs() < 1e-12);
        assert!((neg.value() - 0.122371).abs() < 1e-6);

        assert_eq!(
            posterior_update(p(0.5), &t(1.0, 0.0), TestResult::Negative),
            Err(ScreeningError::DegenerateTest)
        );
    }

    #[test]
    fn convergence_examples() {
        assert_eq!(
            convergence_class(&t(0.98, 0.97)),
            Ok(ConvergenceClass::ConvergesToOne)
        );
        assert_eq!(
            convergence_class(&t(0.5, 0.5)),
            Ok(ConvergenceClass::StaysAtPrior)
        );
        assert_eq!(
            convergence_class(&t(0.3, 0.6)),
            Ok(ConvergenceClass::ConvergesToZero)
        );
        // Below 0.5 sensitivity but still above the false-positive rate.
        assert_eq!(
            convergence_class(&t(0.4, 0.9)),
            Ok(ConvergenceClass::ConvergesToOne)
        );
        assert_eq!(
            convergence_class(&t(0.4, 1.0)),
            Err(ScreeningError::SpecificityOne)
        );
    }

    #[test]
    fn planner_reference_cells() {
        let cases = [
            (1.00, 0.10, 0.99, 6.79, 7),
            (2.00, 0.02, 0.95, 3.42, 4),
            (0.50, 0.20, 0.50, 2.77, 3),
        ];
        for (log_lr, phi, target, raw, n_i) in cases {
            let plan = iterations_needed(&with_log_lr(log_lr), p(phi), target).unwrap();
            assert_eq!(plan.status, PlanStatus::Planned);
            assert!((plan.raw_n.unwrap() - raw).abs() < 0.005, "{plan:?}");
            assert_eq!(plan.n_i, Some(n_i));

            let by_lr = iterations_needed_log_lr(log_lr, p(phi), target).unwrap();
            assert_eq!(by_lr.n_i, Some(n_i));
            assert!((by_lr.raw_n.unwrap() - raw).abs() < 0.005);
        }
    }

    #[test]
    fn planner_statuses() {
        let test = t(0.9, 0.8);
        let met = iterations_needed(&test, p(0.3), 0.30).unwrap();
        assert_eq!(met.status, PlanStatus::AlreadyMet);
        assert_eq!(met.n_i, Some(0));
        assert_eq!(met.raw_n, Some(0.0));

        let weak = t(0.4, 0.5);
        for (phi, target) in [(0.1, 0.5), (0.5, 0.99), (0.01, 0.02)] {
            let plan = iterations_needed(&weak, p(phi), target).unwrap();
            assert_eq!(plan.status, PlanStatus::NonInformativeTest);
            assert_eq!(plan.n_i, None);
            assert_eq!(plan.raw_n, None);
        }
        let flat = iterations_needed(&t(0.3, 0.7), p(0.2), 0.5).unwrap();
        assert_eq!(flat.status, PlanStatus::NonInformativeTest);
        // Checked before the prior, even when the prior already meets the target.
        let weak_met = iterations_needed(&weak, p(0.6), 0.5).unwrap();
        assert_eq!(weak_met.status, PlanStatus::NonInformativeTest);

        assert_eq!(
            iterations_needed(&test, p(0.4), 1.0),
            Err(ScreeningError::InfeasibleTarget {
                target: 1.0,
                prior: 0.4
            })
        );
        let certain = iterations_needed(&test, p(1.0), 1.0).unwrap();
        assert_eq!(certain.status, PlanStatus::AlreadyMet);
        assert_eq!(certain.raw_n, None);
        assert!(matches!(
            iterations_needed(&test, p(0.0), 0.5),
            Err(ScreeningError::InfeasibleTarget { .. })
        ));
        for bad in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(
                iterations_needed(&test, p(0.2), bad),
                Err(ScreeningError::InvalidTarget(_))
            ));
        }
        assert_eq!(
            iterations_needed(&t(0.9, 1.0), p(0.2), 0.9),
            Err(ScreeningError::SpecificityOne)
        );
    }

    #[test]
    fn planner_small_raw_clamps_to_one() {
        // Cell (5.0, 0.2) at target 0.5: raw 0.28 still needs one test.
        let plan = iterations_needed_log_lr(5.0, p(0.2), 0.5).unwrap();
        assert!((plan.raw_n.unwrap() - 0.28).abs() < 0.005);
        assert_eq!(plan.n_i, Some(1));
        assert_eq!(
            iterations_needed_log_lr(-1.0, p(0.2), 0.5).unwrap().status,
            PlanStatus::NonInformativeTest
        );
    }

    #[test]
    fn integer_raw_is_exact_ceiling() {
        // Target chosen so that raw_n = 2 exactly in real arithmetic.
        let log_lr = 2.0_f64;
        let phi = 0.1;
        let target_odds = (phi / (1.0 - phi)) * (2.0 * log_lr).exp();
        let target = target_odds / (1.0 + target_odds);
        let plan = iterations_needed_log_lr(log_lr, p(phi), target).unwrap();
        assert!((plan.raw_n.unwrap() - 2.0).abs() < 1e-9);
        let n = plan.n_i.unwrap();
        assert!(sequential_ppv_log_lr(log_lr, p(phi), n) >= target);
        assert!(sequential_ppv_log_lr(log_lr, p(phi), n - 1) < target);
        assert!(n == 2 || n == 3);
    }

    #[test]
    fn trajectory_folds() {
        let fig2 = t(0.80, 0.85);
        let path = trajectory(
            p(0.10),
            &fig2,
            &[
                TestResult::Positive,
                TestResult::Positive,
                TestResult::Negative,
            ],
        )
        .unwrap();
        assert_eq!(path.len(), 4);
        assert_eq!(path[0].value(), 0.10);
        assert!((path[2].value() - 0.759644).abs() < 1e-6);
    }
}
