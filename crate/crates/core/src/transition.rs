//! Orthogonality structure of a quantum sector: orthoplements, orthoclosures,
//! superposition subspaces and the two-level isomorphism check.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, inner, max_abs_diff, random_unit_vector, trace_product, ComplexMatrix,
    ComplexVector, HermitianOperator,
};
use crate::rng::SeededRng;
use crate::scalar::Real;
use crate::states::{transition_probability, PureState, StateSpace};
use crate::tolerance;

/// Residual norm (relative to the input norm) below which Gram–Schmidt
/// treats a vector as linearly dependent.
pub const SPAN_RANK_THRESHOLD: f64 = 1e-10;

/// Orthonormalize with one re-orthogonalization pass, dropping vectors whose
/// residual falls below `threshold` times their norm.
pub fn orthonormalize<R: Real>(
    seed_frame: &[ComplexVector<R>],
    vectors: &[ComplexVector<R>],
    threshold: R,
) -> Vec<ComplexVector<R>> {
    let mut basis: Vec<ComplexVector<R>> = seed_frame.to_vec();
    let start = basis.len();
    for v in vectors {
        let norm = v.norm();
        if norm <= R::zero() || !norm.is_finite() {
            continue;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(b, &w);
                w -= b * proj;
            }
        }
        let r = w.norm();
        if r > threshold * norm {
            basis.push(w.unscale(r));
        }
    }
    basis.split_off(start)
}

/// An orthoclosed subset of a quantum sector, i.e. a linear subspace of
/// `Cⁿ`, stored through its orthogonal projector and an orthonormal frame.
#[derive(Clone, Debug)]
pub struct Subspace<R: Real> {
    sector: usize,
    projector: HermitianOperator<R>,
    frame: Vec<ComplexVector<R>>,
}

impl<R: Real> Subspace<R> {
    fn from_frame(sector: usize, dim: usize, frame: Vec<ComplexVector<R>>) -> Self {
        let mut p = ComplexMatrix::zeros(dim, dim);
        for b in &frame {
            p += b * b.adjoint();
        }
        Self {
            sector,
            projector: HermitianOperator::symmetrize(p),
            frame,
        }
    }

    /// Closed linear span of `vectors`.
    pub fn span(sector: usize, dim: usize, vectors: &[ComplexVector<R>]) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let frame = orthonormalize(&[], vectors, R::tol(SPAN_RANK_THRESHOLD));
        Ok(Self::from_frame(sector, dim, frame))
    }

    /// Span of the rays of `states`, all of which must lie in `sector`.
    pub fn span_of_states(sector: usize, dim: usize, states: &[PureState<R>]) -> Result<Self> {
        let mut vectors = Vec::with_capacity(states.len());
        for s in states {
            if s.sector() != sector {
                return Err(Error::SectorMismatch {
                    expected: sector,
                    found: s.sector(),
                });
            }
            vectors.push(s.vector().ok_or(Error::ClassicalStateNotSupported)?.clone());
        }
        Self::span(sector, dim, &vectors)
    }

    pub fn zero(sector: usize, dim: usize) -> Self {
        Self::from_frame(sector, dim, Vec::new())
    }

    pub fn full(sector: usize, dim: usize) -> Self {
        let frame = (0..dim)
            .map(|k| {
                let mut e = ComplexVector::zeros(dim);
                e[k] = num_complex::Complex::new(R::one(), R::zero());
                e
            })
            .collect();
        Self::from_frame(sector, dim, frame)
    }

    /// Subspace from an orthogonal projector; the range is read off the
    /// eigenvalues above one half.
    pub fn from_projector(sector: usize, projector: &HermitianOperator<R>) -> Result<Self> {
        let eig = eig_hermitian(projector)?;
        let half = R::lit(0.5);
        let frame = eig
            .eigenvalues
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > half)
            .map(|(k, _)| eig.eigenvector(k))
            .collect();
        Ok(Self::from_frame(sector, projector.dim(), frame))
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn projector(&self) -> &HermitianOperator<R> {
        &self.projector
    }

    /// Orthonormal frame of the range.
    pub fn frame(&self) -> &[ComplexVector<R>] {
        &self.frame
    }

    /// `Tr(ρ P)`: one exactly when ρ lies in the subspace.
    pub fn weight(&self, state: &PureState<R>) -> Result<R> {
        let p = state.projector().ok_or(Error::ClassicalStateNotSupported)?;
        if state.sector() != self.sector {
            return Err(Error::SectorMismatch {
                expected: self.sector,
                found: state.sector(),
            });
        }
        if p.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.nrows(),
            });
        }
        Ok(trace_product(p, self.projector.matrix()).re)
    }

    pub fn contains(&self, state: &PureState<R>) -> Result<bool> {
        Ok(self.weight(state)? >= R::one() - R::tol(tolerance::STATE_EQUALITY))
    }

    /// `V⊥ = I − P`.
    pub fn orthoplement(&self) -> Self {
        let n = self.dim();
        let complement = ComplexMatrix::identity(n, n) - self.projector.matrix();
        Self::from_projector(self.sector, &HermitianOperator::symmetrize(complement))
            .expect("eigendecomposition of a projector converges")
    }

    /// A subspace is already orthoclosed; returns a copy.
    pub fn orthoclosure(&self) -> Self {
        self.clone()
    }

    /// Projector max-norm distance; one for subspaces of different sectors.
    pub fn distance(&self, other: &Self) -> R {
        if self.sector != other.sector || self.dim() != other.dim() {
            return R::one();
        }
        max_abs_diff(self.projector.matrix(), other.projector.matrix())
    }

    /// `‖P_W P_V − P_V‖_max ≤ tol`.
    pub fn is_subspace_of(&self, other: &Self, tol: R) -> bool {
        self.sector == other.sector
            && self.dim() == other.dim()
            && max_abs_diff(
                &(other.projector.matrix() * self.projector.matrix()),
                self.projector.matrix(),
            ) <= tol
    }

    /// `‖P² − P‖_max`.
    pub fn idempotency_defect(&self) -> R {
        let p = self.projector.matrix();
        max_abs_diff(&(p * p), p)
    }

    /// Uniform random ray inside the subspace.
    pub fn random_state<G: Rng + ?Sized>(&self, rng: &mut G) -> Result<PureState<R>> {
        if self.frame.is_empty() {
            return Err(Error::InvalidInput("zero subspace has no states".into()));
        }
        let z: ComplexVector<R> = random_unit_vector(self.rank(), rng);
        PureState::from_vector(self.sector, &self.embed(&z))
    }

    /// `Σₖ zₖ bₖ` for coordinates in the frame.
    pub fn embed(&self, coords: &ComplexVector<R>) -> ComplexVector<R> {
        let mut v = ComplexVector::zeros(self.dim());
        for (b, z) in self.frame.iter().zip(coords.iter()) {
            v += b * *z;
        }
        v
    }

    /// Coordinates `⟨bₖ|v⟩` in the frame.
    pub fn coordinates(&self, v: &ComplexVector<R>) -> ComplexVector<R> {
        ComplexVector::from_iterator(self.rank(), self.frame.iter().map(|b| inner(b, v)))
    }
}

fn check_sector<R: Real>(
    space: &StateSpace<R>,
    sector: usize,
    states: &[PureState<R>],
) -> Result<usize> {
    let dim = space.quantum_dim(sector)?;
    for s in states {
        if s.sector() != sector {
            return Err(Error::SectorMismatch {
                expected: sector,
                found: s.sector(),
            });
        }
        if s.dim() != Some(dim) {
            return Err(Error::SpaceMismatch);
        }
    }
    Ok(dim)
}

/// `Q⊥`: the states of `sector` with zero transition probability to every
/// member of `q`.
pub fn orthoplement<R: Real>(
    space: &StateSpace<R>,
    sector: usize,
    q: &[PureState<R>],
) -> Result<Subspace<R>> {
    Ok(orthoclosure(space, sector, q)?.orthoplement())
}

/// `Q⊥⊥`, the closed span of `q`.
pub fn orthoclosure<R: Real>(
    space: &StateSpace<R>,
    sector: usize,
    q: &[PureState<R>],
) -> Result<Subspace<R>> {
    let dim = check_sector(space, sector, q)?;
    Subspace::span_of_states(sector, dim, q)
}

/// `{ρ, σ}⊥⊥`.
#[derive(Clone, Debug)]
pub enum Superposition<R: Real> {
    /// Two states of one quantum sector span a two-dimensional subspace.
    Subspace(Subspace<R>),
    /// States in different sectors, or distinct classical points, admit no
    /// superpositions: the closure is the pair itself.
    Pair(PureState<R>, PureState<R>),
}

pub fn superpositions<R: Real>(
    rho: &PureState<R>,
    sigma: &PureState<R>,
) -> Result<Superposition<R>> {
    if rho.same_as(sigma) {
        return Err(Error::DegeneratePair);
    }
    if rho.sector() != sigma.sector() || !rho.is_quantum() || !sigma.is_quantum() {
        if rho.is_quantum() != sigma.is_quantum() && rho.sector() == sigma.sector() {
            return Err(Error::SpaceMismatch);
        }
        return Ok(Superposition::Pair(rho.clone(), sigma.clone()));
    }
    let dim = rho.dim().expect("quantum state");
    if sigma.dim() != Some(dim) {
        return Err(Error::SpaceMismatch);
    }
    Ok(Superposition::Subspace(Subspace::span_of_states(
        rho.sector(),
        dim,
        &[rho.clone(), sigma.clone()],
    )?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Qm2Report<R: Real> {
    pub pairs: usize,
    pub max_deviation: R,
}

/// Compare transition probabilities inside `{ρ, σ}⊥⊥` with those of the
/// qubit space after mapping each state to its frame coordinates.
///
/// Trial `k` draws from `rng.substream(k)`.
pub fn check_qm2<R: Real>(
    rho: &PureState<R>,
    sigma: &PureState<R>,
    rng: &SeededRng,
    trials: usize,
) -> Result<Qm2Report<R>> {
    if !rho.is_quantum() || !sigma.is_quantum() {
        return Err(Error::ClassicalStateNotSupported);
    }
    if rho.sector() != sigma.sector() {
        return Err(Error::SectorMismatch {
            expected: rho.sector(),
            found: sigma.sector(),
        });
    }
    let plane = match superpositions(rho, sigma)? {
        Superposition::Subspace(s) => s,
        Superposition::Pair(..) => unreachable!("same quantum sector"),
    };
    if plane.rank() != 2 {
        return Err(Error::DegeneratePair);
    }
    let image = |x: &PureState<R>| -> Result<PureState<R>> {
        let v = x.vector().expect("quantum state");
        PureState::from_vector(0, &plane.coordinates(v))
    };
    let mut worst = R::zero();
    let mut compare = |x: &PureState<R>, y: &PureState<R>| -> Result<()> {
        let inside = transition_probability(x, y)?;
        let outside = transition_probability(&image(x)?, &image(y)?)?;
        worst = worst.max((inside - outside).abs());
        Ok(())
    };
    compare(rho, sigma)?;
    for k in 0..trials {
        let mut r = rng.substream(k as u64);
        let x = plane.random_state(&mut r)?;
        let y = plane.random_state(&mut r)?;
        compare(&x, &y)?;
        compare(&x, rho)?;
    }
    Ok(Qm2Report {
        pairs: trials + 1,
        max_deviation: worst,
    })
}
