//! Sum-over-histories evaluation of quantum circuits written as netlists.

pub mod circuit;
pub mod gate;
pub mod lower;
pub mod parse;
pub mod engine;
pub mod canonical;
pub mod hermitian;
pub mod rewrite;
pub mod examples;
pub mod report;
