//! Small divisors: Diophantine certificates, the cohomological equation and
//! the arithmetic of approximation functions.

mod arithmetic;
mod cohomology;
mod diophantine;

pub use arithmetic::{
    approximation_class_membership, check_convergence_criterion, generalized_cohomological_bound,
    generalized_constant, laplace_transform, laplace_transform_auto, ApproximationFunction, ClassMembership,
    CriterionReport, CriterionRow, LaplaceValue,
};
pub use cohomology::{cohomological_bound, cohomological_constant, solve_cohomological};
pub use diophantine::{diophantine_constant, DiophantineReport, FrequencyVector};
