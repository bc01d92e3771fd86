//! Grid homology of knots and links over GF(2)[U].
//!
//! Builds grid diagrams (torus knots, connected sums, cables, braid closures),
//! computes their grid homology and extracts the concordance invariants τ
//! and ε.

pub mod complex;
pub mod constructions;
pub mod grid_model;
pub mod homology;
pub mod invariants;
pub mod linalg;
pub mod moves;
pub mod oracle;

pub use complex::{Flavor, Guard};
pub use grid_model::GridDiagram;

/// Integer Laurent polynomials, used for Euler characteristics.
pub type IntPoly = oracle::LaurentPoly<i64>;
/// Laurent polynomials with GF(2) coefficients.
pub type Gf2Poly = oracle::LaurentPoly<oracle::Gf2>;
