//! Precision of frequency estimation with qubit probes under directional dephasing.
//!
//! The crate evaluates the quantum Fisher information (QFI) of GHZ probes
//! exactly, bounds the QFI of every input state through the finite-N
//! channel-extension semidefinite program, and optimizes the single-round
//! duration `t` for each probe size. Precisions are reported as the
//! Cramér-Rao value `δω √T = (F / t)^{-1/2}`.
//!
//! Module map:
//!
//! - [`channel`]: closed-form single-qubit channel, process matrix, Kraus set.
//! - [`ghz`]: block-diagonal QFI of the evolved GHZ state and its `t`-optimum.
//! - [`brute_force`]: dense `2^N` reference evolution and QFI (N ≤ 10).
//! - [`bounds`]: closed-form bounds, channel-extension bound, asymptotes, fits.
//! - [`sdp`]: small dense primal-dual interior-point SDP solver.
//! - [`sweep`]: parameter sweeps over `N` and their CSV / JSON-lines output.
//!
//! ```
//! use noisy_metrology::{channel::ChannelParams, ghz};
//!
//! // No noise: the GHZ probe reaches the Heisenberg value N² t².
//! let p = ChannelParams::transversal(1.0, 0.0, 0.3).unwrap();
//! let f = ghz::ghz_qfi(6, &p).unwrap();
//! assert!((f - 36.0 * 0.09).abs() < 1e-12);
//! ```

pub mod bounds;
pub mod brute_force;
pub mod channel;
mod error;
pub mod ghz;
mod logpolar;
mod optimize;
pub mod sdp;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/ghz.md")]
    mod ghz {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/sdp.md")]
    mod sdp {}
    #[doc = include_str!("../../../book/src/scaling.md")]
    mod scaling {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
