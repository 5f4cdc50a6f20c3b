//! Dynamic simulation of batch distillation columns.
//!
//! `stillsim` builds an equilibrium-stage model of a packed batch column —
//! reboiler, packing stages, condenser and a constant-holdup buffer vessel —
//! and integrates the resulting differential-algebraic system implicitly.
//! Control signals (efflux ratio, heat duty, head pressure, condenser
//! offset, withdrawal streams) can be perturbed over declared time windows
//! with linear ramps, which turns annotated plant anomalies into scripted
//! simulation scenarios. Batches of scenarios run from a pair of XML
//! configuration files and emit labeled time-series CSVs in a fixed dataset
//! layout.
//!
//! The guide under `book/` walks through the model, the numerics and the
//! file formats; its code snippets compile against this crate and run as
//! doc-tests.

pub mod anomaly;
pub mod column;
pub mod integrator;
pub mod thermo;
pub mod workflow;

pub mod cli;

mod book;
