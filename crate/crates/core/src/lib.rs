//! The discrete bicycle correspondence on polygons.
//!
//! Two closed polygons `V` and `W` are in bicycle correspondence with
//! length `L` when every `V_i V_{i+1} W_{i+1} W_i` is a plane isosceles
//! trapezoid with `|V_i W_i| = L`. This crate propagates companions,
//! computes the Möbius (and Lorentz) monodromy, classifies it, and checks
//! the integrals, the rear-track chain of circles, and the special families
//! with closed-form dynamics.

pub mod dynamics;
pub mod error;
pub mod families;
pub mod geometry;
pub mod invariants;
pub mod io;
pub mod mobius;
pub mod scan;

pub use dynamics::{
    bianchi_fourth_polygon, correspondence_check, correspondence_length, propagate, recut,
    transform, transform_from_angle, transform_nd, BicyclePair, Branch, Transformation,
};
pub use error::{BicycleError, Result};
pub use geometry::{
    bicycle_step, is_darboux_butterfly, perp_bisector_reflect, reflect_in_line, Polygon,
    Tolerance, Vector,
};
pub use invariants::{area_bivector, circumcenter_of_mass, j_vector, rear_track, RearTrack};
pub use io::PolygonFile;
pub use mobius::{
    classify, fixed_directions, polygon_monodromy, trace_polynomial, Mobius2, MonodromyClass,
};
