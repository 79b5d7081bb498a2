//! Topological pressure, Ruelle–Perron–Frobenius data and Bowen-equation
//! expansions for perturbed countable shift spaces.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::large_enum_variant)]

pub mod binom_bound;
pub mod bowen;
pub mod cli;
pub mod dd;
pub mod eigen_perturb;
pub mod error;
pub mod graph_shift;
pub mod series_comb;
pub mod special;
pub mod transfer;
pub mod weights;

pub use error::{Error, Result};
