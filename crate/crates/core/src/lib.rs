//! Predictive constructions of random sequences.
//!
//! A [`Strategy`] assigns to every finite history the law of the next
//! observation. The crate provides exchangeable, c.i.d. and stationary
//! families, a sequential sampler, exact finite-dimensional laws, and
//! checkers that verify each family's structural property.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cid;
pub mod config;
pub mod error;
pub mod exch;
pub mod finite;
pub mod measure;
pub mod stationary;
pub mod strategy;
pub mod verify;

pub use error::{Error, Result};
pub use finite::{finite_dim_law, FiniteLaw, FiniteStrategy, Scalar};
pub use measure::{Density, Event, Interval, Kernel, KernelRule, Measure, Observation, Partition, Space};
pub use strategy::{path_log_prob, predictive, simulate_path, simulate_paths, Path, Strategy};
pub use verify::{VerificationReport, Verdict};
