//! Command-line front end for `bregman-perceptron-core`, with the IDX and
//! model file formats it reads and writes.

pub mod cli;
pub mod experiment;
pub mod gradcheck;
pub mod idx;
pub mod model_file;

pub use bregman_perceptron_core as core;
