//! Adaptive network-coding maps for physical-layer network-coded two-way
//! MIMO relaying.
//!
//! * [`psk`]: PSK signal sets and exact difference constellations.
//! * [`fadespace`]: singular fade subspaces, their keys and counts.
//! * [`latin`]: Latin rectangles, constrained completion and transforms.
//! * [`maplib`]: libraries of maps covering every removable subspace.
//! * [`relaysim`]: two-phase relay Monte Carlo simulation.

pub mod exec;
pub mod fadespace;
pub mod latin;
pub mod maplib;
pub mod psk;
pub mod relaysim;

pub use exec::Execution;
pub use fadespace::{SubspaceClass, SubspaceKey, SystemDims};
pub use psk::{DiffPoint, DiffVector, PskParams};
