//! Finite-dimensional pure-state spaces equipped with a transition
//! probability and a compatible Poisson bracket.
//!
//! The library computes Born-rule and classical transition probabilities,
//! orthoplements and superposition subspaces, Poisson brackets and the
//! Hamiltonian flows they generate, and rebuilds the observable algebra
//! (Jordan and associative products) from transition-probability data alone.
//! The [`axioms`] module turns the defining properties of such spaces into
//! executable, reproducible checks.
//!
//! The numerical modules are generic over the [`Real`] scalar; the aliases at
//! the crate root fix the scalar to `f64` (the precision all checks are
//! calibrated for) or `f32`.

pub mod axioms;
pub mod error;
pub mod json;
pub mod lattice;
pub mod linalg;
pub mod poisson;
pub mod reconstruct;
pub mod rng;
pub mod scalar;
pub mod states;
pub mod tolerance;
pub mod transition;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;

pub type ComplexMatrix = linalg::ComplexMatrix<f64>;
pub type ComplexVector = linalg::ComplexVector<f64>;
pub type HermitianOperator = linalg::HermitianOperator<f64>;
pub type EigenDecomposition = linalg::EigenDecomposition<f64>;
pub type PureState = states::PureState<f64>;
pub type StateSpace = states::StateSpace<f64>;
pub type Sector = states::Sector<f64>;
pub type Observable = states::Observable<f64>;
pub type Subspace = transition::Subspace<f64>;
pub type BracketOracle = poisson::BracketOracle<f64>;
pub type FlowResult = poisson::FlowResult<f64>;
pub type SpectralResolution = reconstruct::SpectralResolution<f64>;

pub type HermitianOperatorF32 = linalg::HermitianOperator<f32>;
pub type PureStateF32 = states::PureState<f32>;
pub type StateSpaceF32 = states::StateSpace<f32>;
pub type ObservableF32 = states::Observable<f32>;
pub type SubspaceF32 = transition::Subspace<f32>;
pub type BracketOracleF32 = poisson::BracketOracle<f32>;
