//! Exact and numerical tools for simply connected solvable Lie groups
//! `U ⋊ A` with `U` unipotent and `A ≅ R^d` acting diagonalizably over Q.
//!
//! The exact layer (rationals, linear algebra, LP, weights, homology,
//! certificates, words) never rounds. The filling layer works in `f64` and
//! reports Lipschitz estimates as intervals.

pub mod algebra;
pub mod certifier;
pub mod error;
pub mod filling;
pub mod homology;
pub mod interval;
pub mod io;
pub mod linalg;
pub mod lp;
pub mod presets;
pub mod rational;
pub mod weights;
pub mod words;

pub use algebra::{GroupElement, GroupF, LieAlgebraSpec, SolvableGroup};
pub use error::{Error, Result};
pub use rational::Q;
