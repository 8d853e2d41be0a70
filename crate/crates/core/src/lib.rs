//! Total-variation regression over geometric graphs built from scattered
//! design points in the unit square.
//!
//! The central estimator is the Voronoigram: graph TV denoising over the
//! Voronoi adjacency graph with edge weights equal to shared facet lengths.
//! Its fitted values extend to a piecewise-constant function on the Voronoi
//! cells whose continuum total variation equals the discrete TV of the fit.

pub mod asymptotics;
pub mod error;
pub mod estimators;
pub mod experiments;
pub mod geometry;
pub mod graph;
pub mod io;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
