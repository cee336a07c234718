//! Ergodic interference alignment over finite-field interference channels.
//!
//! * [`gfq`]: prime-field arithmetic and linear algebra.
//! * [`channel`]: the IID fading model, matrix streams and rate quantities.
//! * [`schemes`]: NGJV, TDMA, JAP, JAP-B and time-shared child schemes run as
//!   state machines over a matrix stream, plus exact message decoding.
//! * [`analysis`]: delay exponents, the composition optimiser, bounds,
//!   exact enumeration oracles, Monte Carlo delay estimation and fitting.

pub mod analysis;
pub mod channel;
pub mod gfq;
pub mod schemes;

pub use channel::{ChannelMatrix, RandomStream, SlotSource};
pub use gfq::{FieldElement, FieldVector, PrimeField};
pub use schemes::Composition;
