// NaN must fail range checks, so `!(x >= 0.0)` style guards are intentional.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod execution;
pub mod platform;
pub mod scorecard;
pub mod se3;
pub mod stages;
pub mod wrench;
