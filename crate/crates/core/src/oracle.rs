//! Monte Carlo check of the closed forms.
//!
//! Each simulated subject draws a disease status from the prior and then
//! up to `serial_depth` results that are independent given that status.
//! Subject `i` uses its own ChaCha8 stream (`seed`, stream `i`), so the
//! report does not depend on thread count or scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreeningError};
use crate::profile::{Prior, TestProfile};
use crate::sequential::sequential_ppv;

pub const DEFAULT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SIGMAS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub test: TestProfile,
    pub prior: Prior,
    pub trials: u64,
    pub seed: u64,
    pub serial_depth: u32,
}

impl SimulationConfig {
    pub fn new(
        test: TestProfile,
        prior: Prior,
        trials: u64,
        seed: u64,
        serial_depth: u32,
    ) -> Result<Self> {
        let config = Self {
            test,
            prior,
            trials,
            seed,
            serial_depth,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(ScreeningError::InvalidConfig(
                "trials must be at least 1".into(),
            ));
        }
        if self.serial_depth == 0 {
            return Err(ScreeningError::InvalidConfig(
                "serial_depth must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// A proportion estimated from `count` conditioning subjects. Both
/// `estimate` and `standard_error` are absent when `count` is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub count: u64,
}

impl Proportion {
    fn from_counts(hits: u64, count: u64) -> Self {
        if count == 0 {
            return Self {
                estimate: None,
                standard_error: None,
                count,
            };
        }
        let p = hits as f64 / count as f64;
        Self {
            estimate: Some(p),
            standard_error: Some((p * (1.0 - p) / count as f64).sqrt()),
            count,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpvEstimate {
    pub n: u32,
    /// Fraction diseased among subjects whose first `n` results are all
    /// positive; `ppv.count` is the number of such subjects.
    pub ppv: Proportion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub config: SimulationConfig,
    pub empirical_ppv_by_n: Vec<PpvEstimate>,
    /// Fraction healthy among subjects whose first result is negative.
    pub empirical_npv: Proportion,
    pub trials_used: u64,
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Tally {
    // Index k counts subjects whose first k+1 results were positive.
    run_positive: Vec<u64>,
    run_positive_diseased: Vec<u64>,
    first_negative: u64,
    first_negative_healthy: u64,
}

impl Tally {
    fn new(depth: usize) -> Self {
        Self {
            run_positive: vec![0; depth],
            run_positive_diseased: vec![0; depth],
            first_negative: 0,
            first_negative_healthy: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.run_positive.iter_mut().zip(other.run_positive) {
            *a += b;
        }
        for (a, b) in self
            .run_positive_diseased
            .iter_mut()
            .zip(other.run_positive_diseased)
        {
            *a += b;
        }
        self.first_negative += other.first_negative;
        self.first_negative_healthy += other.first_negative_healthy;
        self
    }
}

fn subject_rng(seed: u64, subject: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subject);
    rng
}

fn simulate_subject(config: &SimulationConfig, subject: u64, tally: &mut Tally) {
    let mut rng = subject_rng(config.seed, subject);
    let diseased = rng.random::<f64>() < config.prior.value();
    let p_positive = if diseased {
        config.test.sensitivity()
    } else {
        config.test.false_positive_rate()
    };
    for k in 0..config.serial_depth as usize {
        let positive = rng.random::<f64>() < p_positive;
        if !positive {
            if k == 0 {
                tally.first_negative += 1;
                tally.first_negative_healthy += u64::from(!diseased);
            }
            return;
        }
        tally.run_positive[k] += 1;
        tally.run_positive_diseased[k] += u64::from(diseased);
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<SimulationReport> {
    config.validate()?;
    let depth = config.serial_depth as usize;
    let tally = (0..config.trials)
        .into_par_iter()
        .fold(
            || Tally::new(depth),
            |mut t, subject| {
                simulate_subject(config, subject, &mut t);
                t
            },
        )
        .reduce(|| Tally::new(depth), Tally::merge);

    let empirical_ppv_by_n = (0..depth)
        .map(|k| PpvEstimate {
            n: k as u32 + 1,
            ppv: Proportion::from_counts(tally.run_positive_diseased[k], tally.run_positive[k]),
        })
        .collect();
    Ok(SimulationReport {
        config: *config,
        empirical_ppv_by_n,
        empirical_npv: Proportion::from_counts(tally.first_negative_healthy, tally.first_negative),
        trials_used: config.trials,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthCheck {
    pub n: u32,
    pub closed_form: f64,
    pub estimate: Option<f64>,
    pub standard_error: Option<f64>,
    pub delta: Option<f64>,
    /// `None` when no subject reached `n` positives; such depths do not
    /// count against the verdict.
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub tolerance_sigmas: f64,
    pub checks: Vec<DepthCheck>,
    pub passed: bool,
}

/// Compares each simulated PPV with `closed_form(n)`. A depth passes when
/// `|estimate - closed_form| <= tolerance_sigmas * standard_error`.
pub fn verify_report(
    report: &SimulationReport,
    tolerance_sigmas: f64,
    closed_form: impl Fn(u32) -> Result<f64>,
) -> Result<Verdict> {
    let mut checks = Vec::with_capacity(report.empirical_ppv_by_n.len());
    for row in &report.empirical_ppv_by_n {
        let expected = closed_form(row.n)?;
        let (delta, passed) = match (row.ppv.estimate, row.ppv.standard_error) {
            (Some(est), Some(se)) => {
                let delta = est - expected;
                (Some(delta), Some(delta.abs() <= tolerance_sigmas * se))
            }
            _ => (None, None),
        };
        checks.push(DepthCheck {
            n: row.n,
            closed_form: expected,
            estimate: row.ppv.estimate,
            standard_error: row.ppv.standard_error,
            delta,
            passed,
        });
    }
    let passed = checks.iter().all(|c| c.passed != Some(false));
    Ok(Verdict {
        tolerance_sigmas,
        checks,
        passed,
    })
}

/// Simulates `config` and checks it against [`sequential_ppv`].
pub fn verify_closed_form(config: &SimulationConfig, tolerance_sigmas: f64) -> Result<Verdict> {
    let report = simulate(config)?;
    verify_report(&report, tolerance_sigmas, |n| {
        sequential_ppv(&config.test, config.prior, u64::from(n))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(a: f64, b: f64, phi: f64, trials: u64, depth: u32) -> SimulationConfig {
        SimulationConfig::new(
            TestProfile::new(a, b).unwrap(),
            Prior::new(phi).unwrap(),
            trials,
            7,
            depth,
        )
        .unwrap()
    }

    #[test]
    fn rejects_empty_config() {
        let t = TestProfile::new(0.9, 0.9).unwrap();
        let p = Prior::new(0.1).unwrap();
        assert!(matches!(
            SimulationConfig::new(t, p, 0, 1, 3),
            Err(ScreeningError::InvalidConfig(_))
        ));
        assert!(SimulationConfig::new(t, p, 10, 1, 0).is_err());
    }

    #[test]
    fn deterministic_and_counts_shrink() {
        let c = config(0.8, 0.85, 0.2, 20_000, 5);
        let r1 = simulate(&c).unwrap();
        let r2 = simulate(&c).unwrap();
        assert_eq!(r1.to_json(), r2.to_json());
        let counts: Vec<u64> = r1.empirical_ppv_by_n.iter().map(|e| e.ppv.count).collect();
        assert!(counts.windows(2).all(|w| w[0] >= w[1]), "{counts:?}");
        let other = simulate(&SimulationConfig { seed: 8, ..c }).unwrap();
        assert_ne!(r1.to_json(), other.to_json());
    }

    #[test]
    fn absent_when_nobody_qualifies() {
        // Never positive: every depth is unconditioned.
        let r = simulate(&config(0.0, 1.0, 0.3, 1000, 2)).unwrap();
        assert!(r
            .empirical_ppv_by_n
            .iter()
            .all(|e| e.ppv.estimate.is_none()));
        assert_eq!(r.empirical_npv.count, 1000);
        let v = verify_report(&r, 3.0, |_| Ok(0.5)).unwrap();
        assert!(v.passed);
        assert!(v.checks.iter().all(|c| c.passed.is_none()));
    }

    #[test]
    fn standard_error_formula() {
        let p = Proportion::from_counts(25, 100);
        assert_eq!(p.estimate, Some(0.25));
        assert!((p.standard_error.unwrap() - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn uninformative_passes() {
        let c = config(0.5, 0.5, 0.3, 200_000, 3);
        assert!(verify_closed_form(&c, 3.0).unwrap().passed);
    }
}
