//! Mini-batch k-means with batch-level early stopping.
//!
//! The crate is organized bottom-up:
//!
//! - [`geometry`]: squared distances, costs, centers of mass, nearest-center assignment.
//! - [`sampling`]: the seeded [`RandomStream`](sampling::RandomStream), batch sampling,
//!   random and k-means++ initialization.
//! - [`engine`]: the mini-batch loop, learning-rate policies, stopping rules, and a
//!   full-batch Lloyd reference.
//! - [`analysis`]: batch-size recommenders, iteration bounds, and trace audits.
//! - [`oracle`]: slow reference implementations (naive cost, exhaustive optimum).
//! - [`cli`]: data ingestion and generation, experiment runs, audit reports, and the
//!   `mbk` command-line front end.

pub mod analysis;
pub mod cli;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod sampling;

pub use error::{Error, Result};
