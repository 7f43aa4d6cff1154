// Tensor code indexes by component names; `!(d < tol)` deliberately treats NaN as failure.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod jetcalc;
pub mod exprlang;
pub mod geometry;
pub mod starprod;
pub mod morphism;
pub mod quantize;
pub mod checks;
pub mod cli;
