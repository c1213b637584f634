//! Exact region carving for small feed-forward networks and desk-scale
//! loss-landscape experiments.

pub mod arrangement;
pub mod carver;
pub mod cli;
pub mod ensembles;
pub mod geometry;
pub mod linalg;
pub mod lp;
pub mod netspec;
pub mod poly;
pub mod polyland;
pub mod rational;
pub mod rng;
pub mod satlab;
pub mod spinglass;
pub mod stats;
pub mod svg;
