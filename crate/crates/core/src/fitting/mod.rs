//! Student density fit, power-law tail regression, Hill cross-check and the
//! stretched-exponential family.

mod hill;
pub mod lsq;
mod stretched;
mod student;
mod tail;

pub use hill::{hill_estimate, hill_from_sample, HillEstimate};
pub use lsq::{minimize_damped_lsq, LeastSquaresProblem, Minimization, Termination, Tolerances};
pub use stretched::{power_law_limit_pdf, stretched_exp_pdf, StretchedExpParams};
pub use student::{
    fit_student, ln_student_pdf, student_pdf, StudentFit, StudentFitOptions, StudentParams,
    MIN_FIT_BINS,
};
pub use tail::{fit_tail, search_scaling_range, ScalingRange, TailFit, MIN_RANGE_POINTS};
