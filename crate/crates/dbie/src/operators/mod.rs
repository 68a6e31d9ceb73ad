//! Discrete integral operators: 𝒮_ω, 𝓛, R, 𝒫, 𝒦 and the two-mass operators.

pub mod dirac;
pub mod dump;
pub mod layer;
pub mod resolvent;
pub mod two_mass;

pub use dirac::{
    add_identity_part, add_resolvent_product, apply_p, assemble_k, assemble_l, assemble_l_from_s, assemble_p,
    mask_for_mass, OperatorMatrix,
};
pub use layer::{assemble_s, single_layer_points, single_layer_self};
pub use resolvent::{Direction, Half, Resolvent, ResolventSpec};
pub use two_mass::{assemble_sprime, assemble_two_mass, assemble_two_mass_first, sprime_diagonal_limit, two_mass_mu, TwoMass};
