//! The lattice of orthoclosed subsets of a quantum sector.
//!
//! Elements are [`Subspace`]s. Meet is range intersection, join the closed
//! span of the union, complement the orthoplement. The checks below exercise
//! the lattice laws the reconstruction argument relies on: orthomodularity,
//! atomicity and the covering property.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{null_space, random_unit_vector, ComplexMatrix};
use crate::scalar::Real;
use crate::states::PureState;
use crate::tolerance;
use crate::transition::{orthonormalize, Subspace, SPAN_RANK_THRESHOLD};

pub type LatticeElement<R> = Subspace<R>;

/// Singular values of the stacked complements below this count as zero.
pub const MEET_THRESHOLD: f64 = 1e-8;

fn same_sector<R: Real>(v: &Subspace<R>, w: &Subspace<R>) -> Result<()> {
    if v.sector() != w.sector() {
        return Err(Error::SectorMismatch {
            expected: v.sector(),
            found: w.sector(),
        });
    }
    if v.dim() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: v.dim(),
            found: w.dim(),
        });
    }
    Ok(())
}

/// `V ∧ W`: null space of the stacked projectors `I − P_V` and `I − P_W`.
pub fn meet<R: Real>(v: &Subspace<R>, w: &Subspace<R>) -> Result<Subspace<R>> {
    same_sector(v, w)?;
    let n = v.dim();
    let id = ComplexMatrix::<R>::identity(n, n);
    let mut stacked = ComplexMatrix::zeros(2 * n, n);
    stacked
        .view_mut((0, 0), (n, n))
        .copy_from(&(&id - v.projector().matrix()));
    stacked
        .view_mut((n, 0), (n, n))
        .copy_from(&(&id - w.projector().matrix()));
    let basis = null_space(&stacked, R::lit(MEET_THRESHOLD))?;
    Subspace::span(v.sector(), n, &basis)
}

/// `V ∨ W`: closed span of both frames.
pub fn join<R: Real>(v: &Subspace<R>, w: &Subspace<R>) -> Result<Subspace<R>> {
    same_sector(v, w)?;
    let frame = orthonormalize(&[], v.frame(), R::tol(SPAN_RANK_THRESHOLD));
    let extra = orthonormalize(&frame, w.frame(), R::tol(SPAN_RANK_THRESHOLD));
    let all: Vec<_> = frame.into_iter().chain(extra).collect();
    Subspace::span(v.sector(), v.dim(), &all)
}

/// `V⊥`.
pub fn complement<R: Real>(v: &Subspace<R>) -> Subspace<R> {
    v.orthoplement()
}

/// The atom `[a]` as a lattice element.
pub fn atom<R: Real>(a: &PureState<R>) -> Result<Subspace<R>> {
    let dim = a.dim().ok_or(Error::ClassicalStateNotSupported)?;
    Subspace::span_of_states(a.sector(), dim, std::slice::from_ref(a))
}

/// For `V ⊆ W`, whether `W = V ∨ (W ∧ V⊥)`.
pub fn check_orthomodular<R: Real>(v: &Subspace<R>, w: &Subspace<R>) -> Result<bool> {
    same_sector(v, w)?;
    let tol = R::tol(tolerance::LATTICE);
    if !v.is_subspace_of(w, tol) {
        return Err(Error::NotComparable);
    }
    let rebuilt = join(v, &meet(w, &complement(v))?)?;
    Ok(rebuilt.distance(w) <= tol)
}

/// For an atom `a ∉ V`, whether `V ∨ a` covers `V`, i.e. has rank one more.
pub fn check_covering<R: Real>(a: &PureState<R>, v: &Subspace<R>) -> Result<bool> {
    let tol = R::tol(tolerance::LATTICE);
    if v.weight(a)? >= R::one() - tol {
        return Err(Error::AtomInside);
    }
    let joined = join(v, &atom(a)?)?;
    Ok(joined.rank() == v.rank() + 1 && v.is_subspace_of(&joined, tol))
}

/// Rebuild `V` as the join of `rank(V)` random atoms inside it.
pub fn check_atomicity<R: Real, G: Rng + ?Sized>(v: &Subspace<R>, rng: &mut G) -> Result<bool> {
    let mut acc = Subspace::zero(v.sector(), v.dim());
    for _ in 0..v.rank() {
        acc = join(&acc, &atom(&v.random_state(rng)?)?)?;
    }
    Ok(acc.rank() == v.rank() && acc.distance(v) <= R::tol(tolerance::LATTICE))
}

/// Span of `rank` Haar-random vectors in `Cⁿ`.
pub fn random_subspace<R: Real, G: Rng + ?Sized>(
    sector: usize,
    dim: usize,
    rank: usize,
    rng: &mut G,
) -> Result<Subspace<R>> {
    let vectors: Vec<_> = (0..rank.min(dim))
        .map(|_| random_unit_vector(dim, rng))
        .collect();
    Subspace::span(sector, dim, &vectors)
}

/// Random pair `V ⊆ W` with `rank(V) = inner_rank ≤ rank(W) = outer_rank`.
pub fn random_nested_pair<R: Real, G: Rng + ?Sized>(
    sector: usize,
    dim: usize,
    inner_rank: usize,
    outer_rank: usize,
    rng: &mut G,
) -> Result<(Subspace<R>, Subspace<R>)> {
    if inner_rank > outer_rank || outer_rank > dim {
        return Err(Error::InvalidInput(format!(
            "ranks {inner_rank} ≤ {outer_rank} ≤ {dim} violated"
        )));
    }
    let w = random_subspace(sector, dim, outer_rank, rng)?;
    let mut vectors = Vec::with_capacity(inner_rank);
    for _ in 0..inner_rank {
        let z = random_unit_vector(outer_rank, rng);
        vectors.push(w.embed(&z));
    }
    Ok((Subspace::span(sector, dim, &vectors)?, w))
}
