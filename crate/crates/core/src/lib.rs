//! Two-country policy-game simulator.
//!
//! Governments and central banks in two linked economies play quadratic
//! dynamic games over a linear model with wealth accumulation. Modules run
//! bottom-up: [`model`] builds the economy, [`solver`] computes
//! rational-expectations paths, [`game`] computes feedback equilibria,
//! [`scenarios`] runs experiments and [`io`] handles configs and output.

pub mod error;
pub mod model;
pub mod solver;
pub mod game;
pub mod scenarios;
pub mod io;
