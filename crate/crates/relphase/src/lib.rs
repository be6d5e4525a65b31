//! Clifford+T circuit constructions built on relative-phase Toffoli gates,
//! with an exact simulator over the ring Z[omega, 1/sqrt2].
//!
//! The crate is `no_std` and needs only `alloc`. File formats, JSON and the
//! command-line front end live in the `relphase-tools` crate.

#![no_std]

extern crate alloc;

pub mod boolfn;
pub mod circuit;
pub mod constructions;
pub mod ring;
pub mod sim;
pub mod verify;

pub use boolfn::{BooleanFn, PhasePoly};
pub use circuit::{Circuit, Event, Gate, GateKind, Release, Role};
pub use ring::RingScalar;
pub use sim::{BranchMap, SparseMatrix, State};
pub use verify::GenPerm;
