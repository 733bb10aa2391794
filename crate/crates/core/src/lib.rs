//! Non-local attention blocks viewed as third-order polynomial layers.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`]: dense row-major matrices, the kernels every block uses, and
//!   the instrumentation hooks in [`probe`].
//! * [`oracle`]: brute-force evaluators of the order-8 interaction tensor and
//!   closed-form builders showing NL and Poly-NL are instances of it.
//! * [`blocks`]: the fast forward paths behind a common [`blocks::AttentionBlock`]
//!   trait, registered by name in a [`blocks::Registry`].
//! * [`grad`]: hand-derived backward passes and a central-difference checker.
//! * [`bench`]: FLOP/peak models, the timing harness, slope fits, CSV and SVG.
//! * [`verify`]: the seeded equivalence suites driven by the `verify` command.
//! * [`cli`]: the command-line front end.

pub mod bench;
pub mod blocks;
pub mod cli;
mod error;
pub mod grad;
pub mod oracle;
pub mod probe;
pub mod rng;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
pub use tensor::{FeatureMap, Map3, Matrix, Scalar, SquareWeights};
