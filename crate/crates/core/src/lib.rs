//! Coherence as a resource shared between two parties.
//!
//! * [`qmat`]: dense complex matrices, density matrices and entropies.
//! * [`states`]: named states and seeded random generators.
//! * [`measures`]: relative entropy of coherence, its quantum-incoherent
//!   variant, discord-like quantities and the coherence of assistance.
//! * [`channels`]: Kraus channels, the SI/SQI classes and local protocols.
//! * [`protocols`]: teleportation, assisted distillation, steering, the
//!   operation-class reductions, domino discrimination and state merging.
//!
//! Entropies are in bits. Subsystem `0` is the most significant index of the
//! row-major tensor layout.

pub mod channels;
pub mod error;
pub mod measures;
pub mod optim;
pub mod protocols;
pub mod qmat;
pub mod states;

pub use error::{Error, Result};
pub use qmat::{ComplexMatrix, DensityMatrix, PureState};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/states.md")]
    pub mod states {}
    #[doc = include_str!("../../../book/src/measures.md")]
    pub mod measures {}
    #[doc = include_str!("../../../book/src/operations.md")]
    pub mod operations {}
    #[doc = include_str!("../../../book/src/protocols.md")]
    pub mod protocols {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
