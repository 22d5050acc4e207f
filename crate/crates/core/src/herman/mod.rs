//! Herman's twisted conjugacy `H = K o G + beta . r` by a Newton scheme whose
//! linear step is solved triangularly, degree by degree in the actions.

mod conjugacy;
mod run;
mod schedule;
mod step;

pub use conjugacy::{defect, normal_form_guess, TwistedConjugacy};
pub use run::{
    conjugacy_distance, lipschitz_check, run_newton, second_derivative, second_derivative_bound, theoretical_radius,
    zero_tangent, LipschitzReport, NewtonOutcome, NewtonRun, Tangent, TheoreticalRadius,
};
pub use schedule::{NewtonSchedule, NewtonTrace, QuadraticFit, TraceRecord};
pub use step::{apply_step, assembled_c_prime, newton_step, StepReport, StepWidths, TangentStep};
pub(crate) use step::k2_matrix;
