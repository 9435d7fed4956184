//! Tolerances used by the verification suites. All values are for `f64`.

/// Projector max-norm distance under which two pure states are equal.
pub const STATE_EQUALITY: f64 = 1e-9;
/// Allowed excess of a transition probability above one.
pub const PROBABILITY_RANGE: f64 = 1e-12;
/// Basis-sum and trace normalization checks.
pub const BASIS_SUM: f64 = 1e-10;
/// Drift of transition probabilities under exact (unitary) flows.
pub const EXACT_FLOW_DRIFT: f64 = 1e-10;
/// Drift and exact-vs-integrated distance for RK4 flows.
pub const INTEGRATED_FLOW: f64 = 1e-6;
/// Energy conservation along exact flows.
pub const ENERGY_DRIFT: f64 = 1e-9;
/// Deviation between a superposition subspace and the qubit model.
pub const QM2_DEVIATION: f64 = 1e-9;
/// Relative singular-value threshold for tangent-space and span ranks.
pub const RANK_THRESHOLD: f64 = 1e-8;
/// Operator-level identities of the reconstructed algebra.
pub const ALGEBRA: f64 = 1e-9;
/// Nested identities (Jacobi, Leibniz, Jordan identity).
pub const NESTED_ALGEBRA: f64 = 1e-8;
/// Antisymmetry of the bracket.
pub const ANTISYMMETRY: f64 = 1e-10;
/// Agreement between operator-mode and finite-difference brackets.
pub const FINITE_DIFFERENCE: f64 = 1e-6;
/// Round trip of the inferred Planck constant (relative).
pub const HBAR_ROUND_TRIP: f64 = 1e-9;
/// Lattice identities at the projector level.
pub const LATTICE: f64 = 1e-9;
/// Canonical classical bracket through central differences.
pub const CANONICAL_BRACKET: f64 = 1e-6;
