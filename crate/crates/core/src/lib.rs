//! Lambert W × F transforms, IGMM fitting, tail-index estimation and the
//! accompanying normality and goodness-of-fit tests.
//!
//! The numerical kernels are generic over [`Real`] (`f32` or `f64`); the
//! `*64` aliases below fix the scalar to `f64`, which the Monte-Carlo
//! drivers and the CLI use throughout.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod igmm;
pub mod lambertw;
pub mod real;
pub mod sampling;
pub mod special;
pub mod stat_tests;
pub mod tail_index;
pub mod transform;

pub use error::{Error, Result};
pub use real::Real;

pub type LwfParams64 = transform::LwfParams<f64>;
pub type LwfParams32 = transform::LwfParams<f32>;
pub type InverseReport64 = transform::InverseReport<f64>;
pub type FitReport64 = igmm::FitReport<f64>;
pub type IgmmConfig64 = igmm::IgmmConfig<f64>;
pub type Sample64 = sampling::Sample<f64>;
pub type Sample32 = sampling::Sample<f32>;
pub type TailIndexPath64 = tail_index::TailIndexPath<f64>;
pub type RegimeBands64 = tail_index::RegimeBands<f64>;
pub type GuParams64 = lambertw::GuParams<f64>;
