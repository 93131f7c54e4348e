//! Lipschitz fillings of word loops.

pub mod assemble;
pub mod chain;
pub mod estimate;
pub mod export;
pub mod map;
pub mod path;
pub mod probe;
pub mod templates;

pub use assemble::{
    backtrack_fill, bounded_fill, cone_fill, cone_kappa, free_fill, gromov_fill, rectangle_fill, shear_fill,
    tame_triangle_fill, ConeFill, FillStats, Filled, FreeFill,
};
pub use chain::{merge, Chain, TameCtx};
pub use estimate::{lipschitz_estimate, lipschitz_refined, LipEstimate};
pub use map::{hconcat, vconcat, Edge, Move, MoveKind, SquareMap};
pub use path::{word_path, Path1D, SlotPath};
pub use templates::{check_distortion, sun_template, web_template, Mesh};
pub use probe::{fill_loop, span_probe, Family, Loop, Pipeline, ProbeReport};
