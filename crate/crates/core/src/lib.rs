//! Outage analysis of a SWIPT-powered two-way decode-and-forward cognitive
//! relay, with a Monte Carlo simulator of the three-phase protocol to check
//! the closed forms against.

pub mod model;
pub mod specfun;
pub mod analytic;
pub mod montecarlo;
pub mod sweeps;
pub mod config_file;
pub mod selfcheck;
