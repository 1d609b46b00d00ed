//! Excess energy of rank-`r` projections under additive i.i.d. noise.
//!
//! For `X = C + E`, [`zprocess`] evaluates `Z(P) = ‖PX‖² − ‖π_r X‖²` and its
//! suprema exactly, [`bounds`] holds the pathwise and in-expectation bounds,
//! [`montecarlo`] runs seeded, worker-count-independent experiments,
//! [`localization`] covers the large-`M` regime and rank selection, and
//! [`verify`] and [`report`] back the command-line tool.

pub mod bounds;
pub mod error;
pub mod linalg;
pub mod localization;
pub mod montecarlo;
pub mod randgen;
pub mod report;
pub mod verify;
pub mod zprocess;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/model.md")]
    pub struct Model;
    #[doc = include_str!("../../../book/src/randomness.md")]
    pub struct Randomness;
    #[doc = include_str!("../../../book/src/bounds.md")]
    pub struct Bounds;
    #[doc = include_str!("../../../book/src/montecarlo.md")]
    pub struct MonteCarlo;
    #[doc = include_str!("../../../book/src/localization.md")]
    pub struct Localization;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
