pub mod classify;
pub mod data;
pub mod eval;
pub mod feasible;
pub mod pipeline;
pub mod plan;
pub mod slot;
pub mod track;
pub mod train;
