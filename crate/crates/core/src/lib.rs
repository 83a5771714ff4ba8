//! Billiard dynamics inside the C² string table built on a regular polygon.
//!
//! The table is traced by a loop of string of length
//! `l = 2(n − 1) − 2/cos((n − 2)π/n)` pulled tight around a regular n-gon of
//! side 2; its boundary is a union of n congruent elliptical arcs with the
//! polygon vertices as foci. The crate provides the exact billiard map on that
//! boundary and the tools built on it: orbit classification, periodic-orbit
//! search, linear stability and Poincaré sections.
//!
//! Most work starts from a [`StringTable`]:
//!
//! ```
//! use string_billiard::{build_table, Frame, Vec2};
//!
//! let table = build_table(6, Frame::HexagonCanonical).unwrap();
//! assert_eq!(table.string_length, 14.0);
//! let traj = string_billiard::trace(&table, Vec2::ZERO, Vec2::new(1.0, 0.0), 4).unwrap();
//! assert_eq!(traj.bounces.len(), 4);
//! ```

pub mod classify;
pub mod dynamics;
pub mod elliptic;
mod error;
pub mod geometry;
pub mod io;
pub mod periodic;
pub mod polygon;
pub mod quadrature;
pub mod sos;
pub mod stability;
pub mod table;
mod vec2;

pub use classify::{
    chord_law, classify_orbit, classify_segment, focal_angle_of_height, focal_convergence,
    forbidden_region, is_caustic, CausticReport, FocalConvergenceSeries, ForbiddenRegion,
    OrbitClass, OrbitTag, Orientation, SegmentClass, SegmentTag,
};
pub use dynamics::{
    boundary_coordinates, reflect, trace, trace_focal, trace_from_boundary, Bounce, TableId,
    Trajectory,
};
pub use elliptic::incomplete_elliptic_e;
pub use error::{Error, Result};
pub use geometry::{BoundaryPoint, EllipseArc};
pub use periodic::{
    birkhoff_pair, canonical_form, find_periodic_orbit, find_resonant_orbit, island_profile,
    orbit_census, orbit_count, rotation_seed, same_orbit, symmetric_orbit, symmetric_orbit_from,
    symmetry_copies, IslandProfile, OrbitCensus, OrbitKey, PeriodicOrbit,
};
pub use polygon::ConvexPolygon;
pub use sos::{
    build_section, curve_thickness, focal_reference_curve, match_focal_curve, FocalCurve,
    FocalCurveMatch, Reduction, SectionDataset, SectionPoint, ThicknessReport,
};
pub use stability::{
    deviation_block, deviation_matrix, stability_class, DeviationMatrix, StabilityReport,
    StabilityTag,
};
pub use table::{build_table, curvature_range, string_length, verify_c2, Frame, StringTable};
pub use vec2::Vec2;
