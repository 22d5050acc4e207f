//! The group of fibered exact symplectomorphisms of `T^n x R^n` near the
//! identity and its action on jets.

mod group;
mod lie;
mod torus_map;

pub use group::{group_compose, pullback_jet, pullback_jet_to_order, pulled_norm, ExactOneForm, FiberedSymplectomorphism};
pub use lie::lie_transform;
pub use torus_map::{
    compose_series, compose_torus_maps, eval_along, invert_torus_map, invert_torus_map_to_order, Inversion, TorusMap,
    TAIL_ABS, TAIL_TOL,
};
