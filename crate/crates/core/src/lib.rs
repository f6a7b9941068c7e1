//! Bayesian arithmetic for binary screening tests.
//!
//! * [`predictive`]: PPV, NPV and the prevalence threshold for one test.
//! * [`sequential`]: repeated testing, Bayesian updating and the planner
//!   for how many consecutive positives reach a target PPV.
//! * [`tables`]: reference tables and surface grids of iteration counts.
//! * [`oracle`]: Monte Carlo simulation used to check the closed forms.
//!
//! All probabilities are validated when [`TestProfile`] and [`Prior`] are
//! built; the operations themselves are pure.

pub mod error;
pub mod oracle;
pub mod predictive;
pub mod profile;
pub mod sequential;
pub mod tables;

pub use error::{Result, ScreeningError};
pub use predictive::{npv, npv_curve, ppv, ppv_curve, prevalence_threshold, unit_grid};
pub use profile::{PredictiveKind, PredictiveValue, Prior, TestProfile, TestResult};
pub use sequential::{
    convergence_class, iterations_needed, iterations_needed_log_lr, posterior_update,
    raw_iterations, sequential_ppv, sequential_ppv_log_lr, trajectory, ConvergenceClass,
    IterationPlan, PlanStatus,
};
pub use tables::{
    generate_reference_table, surface_grid, AxisRange, ReferenceTable, ReferenceTableSpec,
    SurfacePoint,
};
