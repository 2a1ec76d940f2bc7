//! Rate-equation engine for electron transport through coupled quantum dots
//! monitored by a point-contact charge detector.
//!
//! The crate describes a device as a small set of many-electron occupation
//! states connected by coherent hopping amplitudes and incoherent tunneling
//! channels. From that description it assembles the linear generator of the
//! density-matrix evolution, integrates the equations of motion or solves
//! them directly for the stationary state, and evaluates transport
//! observables: collector currents, accumulated charge, and the coherences
//! of the measured subsystem after the detector is traced out.
//!
//! | module | contents |
//! |---|---|
//! | [`model`] | state spaces, channels, couplings, generator assembly |
//! | [`solver`] | adaptive time integration and stationary-state solvers |
//! | [`observables`] | currents, charge, detector partial trace |
//! | [`scenarios`] | device presets, transcribed matrices, closed-form currents |
//! | [`config`] | JSON run specifications for the command-line front end |
//!
//! # Example
//!
//! ```
//! use qdot::scenarios::{double_dot_model, FermiRegime, ScenarioParams};
//! use qdot::solver::steady_state_direct;
//! use qdot::observables::current;
//!
//! let params = ScenarioParams::default();
//! let scenario = double_dot_model(&params, FermiRegime::Blocked);
//! let generator = scenario.model.liouvillian().unwrap();
//! let steady = steady_state_direct(&generator).unwrap();
//! let i_s = current(&steady, &scenario.system_collector).unwrap();
//! assert!((i_s - 1.0 / 3.25).abs() < 1e-10);
//! ```

pub mod config;
pub mod model;
pub mod observables;
pub mod scenarios;
pub mod solver;
