//! Reconstruction of the quasiprobability distributions of a cavity field
//! from photon statistics measured after zero-temperature damping.
//!
//! The field is displaced immediately after preparation, so coherences of
//! the initial state end up in the photon-number distribution of the
//! displaced state. That distribution decays by a binomial map whose effect
//! is undone exactly by weighting level `m` with `chi(t)^m`.
//!
//! * [`fock`]: truncated number-basis states and displacement.
//! * [`dissipation`]: exact damping map, its diagonal restriction and an RK4
//!   oracle.
//! * [`reconstruction`]: weighted summation and the direct evaluation oracle.
//! * [`probe`]: cascade-atom inversion signals and their Fourier inversion.
//! * [`pipeline`]: grid scans, oracle comparison and file output.

pub mod dissipation;
pub mod error;
pub mod fock;
pub mod pipeline;
pub mod probe;
pub mod reconstruction;
pub mod summation;

pub use error::{Error, Result};
