//! Invariant tori from twisted conjugacies: flatten the quadratic part,
//! translate the actions until the frequency offset vanishes, then check the
//! torus against the flow.

mod outer;
mod twist;
mod verify;

pub use outer::{
    fd_jacobian, offset_map, solve_invariant_torus, translate_actions, InvariantTorus, OffsetEvaluation, OuterConfig,
    OuterRecord,
};
pub use twist::{flatten_quadratic, quadratic_generator, quadratic_oscillation, Flattening, TwistData};
pub use verify::{
    embedding_min_jacobian, invert_point, sample_angles, verify_invariance, Embedding, VerificationReport, VerifyConfig,
};
