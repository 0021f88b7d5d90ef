//! Spherical and polar-jet coordinates, symbolic differentiation, and
//! constructive builders for null and parametrization-invariant Lagrangians.

pub mod builders;
pub mod spherical;
pub mod symbolic;

pub use builders::{
    angle_exprs, build_first_order_t, build_null, build_second_order_t, condition_along, critical_condition_2d,
    critical_condition_lagrangian, eta_exprs, random_first_order, random_null, random_second_order, speed_expr,
    verify_representation, Construction, RepresentationCheck,
};
pub use spherical::{
    direction_jacobian, from_polar_jet, from_spherical, polar_jet_2d, random_direction, to_polar_jet, to_spherical,
    unit_direction, PolarJet, SphericalDirection,
};
pub use symbolic::{diff, total_derivative};
