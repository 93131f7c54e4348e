pub mod bch;
pub mod group;
pub mod spec;

pub use group::{GroupElement, GroupF, SolvableGroup};
pub use spec::{LieAlgebraSpec, ValidationReport, Violation};
