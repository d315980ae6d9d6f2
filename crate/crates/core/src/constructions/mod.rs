//! Closed-form examples: unbounded operators from growing full relations,
//! free-group balls and small amenable groups.

pub mod appendix;
pub mod finite;
pub mod free_group;

pub use appendix::{a_delta_matrix, unbounded_union_example, ADelta, IntervalExample, UnionExample};
pub use finite::{finite_group_suite, Preset};
pub use free_group::{free_group_ball, FreeGroupBall};
