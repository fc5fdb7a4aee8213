//! Numerical laboratory for one-dimensional KPZ-class stochastic growth.
//!
//! The crate has two halves that are meant to be played against each other:
//!
//! * an *exact* half — Airy functions and Gauss–Legendre rules ([`special`]),
//!   a Nyström Fredholm-determinant engine ([`fredholm`]), and the crossover
//!   kernel / Tracy–Widom layer built on top of them ([`kpz`]);
//! * a *stochastic* half — kinetic Monte Carlo for the asymmetric simple
//!   exclusion process ([`asep`]), solvers for semi-discrete and lattice
//!   stochastic heat equations ([`she`]), and an imaginary-time grid
//!   propagator for the attractive delta Bose gas used as an independent
//!   moment oracle ([`replica`]).
//!
//! The [`stats`] module compares Monte Carlo samples against exact
//! distributions; the `kpzlab` binary in the companion CLI crate drives
//! batch runs and file emission.

pub mod asep;
pub mod error;
pub mod fredholm;
pub mod kpz;
pub mod replica;
pub mod rng;
pub mod she;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
