//! Detection and role classification of misbehaving users on commenting
//! platforms.
//!
//! The pipeline reads a comment corpus, derives a 73-dimensional behavioral
//! profile per user (engagement, social, temporal and linguistic features),
//! builds report-based ground-truth datasets, and classifies users either
//! directly with a random forest or through latent behaviors found by sparse
//! nonnegative co-clustering.

pub mod cdf;
pub mod cocluster;
pub mod config;
pub mod data;
pub mod engagement;
pub mod error;
pub mod features;
pub mod groundtruth;
pub mod learn;
pub mod linguistic;
pub mod pipeline;
pub mod seed;
pub mod social;
pub mod synth;
pub mod temporal;

pub use data::{Comment, Corpus, FeatureMatrix, Role, RoleLabel};
pub use error::{Error, Result};
