//! Finite-dimensional quantum effect algebra.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Hermitian eigendecompositions, ranks, range bases, subspace
//!   intersections and the tolerance policy every decision is made with.
//! - [`effects`]: the effect order, contraction factorisation, weak-atom bounds,
//!   the projection lattice and support machinery.
//! - [`observables`]: discrete POVMs, coarse-grainings, tests, Naimark
//!   dilations and complementarity verdicts.
//! - [`incompat`]: joint lower bounds, binary joint measurability by cyclic
//!   projections, noise models, the qubit compatibility inequality and noise
//!   thresholds.
//! - [`models`]: position/momentum lattices, multislit, number/phase and
//!   oscillator pairs, convolution smearing and discretisation trend studies.

pub mod effects;
pub mod error;
pub mod incompat;
pub mod io;
pub mod models;
pub mod numerics;
pub mod observables;

pub use effects::{Contraction, Effect, Projection, PureOperation};
pub use error::{Error, Result};
pub use numerics::{
    CMatrix, CVector, HermitianMatrix, SpectralDecomposition, TolerancePolicy, C64,
};
pub use observables::{
    BinaryObservable, ComplementarityVerdict, DiscreteObservable, NaimarkDilation, OutcomeFamily,
};
