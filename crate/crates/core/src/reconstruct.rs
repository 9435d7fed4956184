//! The observable algebra rebuilt from transition probabilities.
//!
//! Every real observable is a combination of functions `p_ρ`. Its spectral
//! resolution `f = Σ λⱼ p_{eⱼ}` over an orthogonal frame gives the squaring map
//! `f² = Σ λⱼ² p_{eⱼ}`, from which the Jordan product follows by
//! polarization. Adding the Poisson bracket gives the associative product
//! `f · g = f ∘ g − (iħ/2){f, g}` on the complexification. Operator forms
//! are only used to check the result.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, hermitian_coordinates, max_abs, random_hermitian, ComplexMatrix, DEGENERACY_GAP,
};
use crate::poisson::{bracket_observable, shared_sector, BracketOracle};
use crate::rng::SeededRng;
use crate::scalar::{c, cr, Real};
use crate::states::{transition_probability, Observable, PureState, Sector, StateSpace, Term};
use crate::tolerance;

/// `f = Σ λⱼ p_{eⱼ}` with `p(eⱼ, eₖ) = δⱼₖ`.
#[derive(Clone, Debug)]
pub struct SpectralResolution<R: Real> {
    pub sector: usize,
    /// Descending; zero eigenvalues are kept so the frame is a basis.
    pub eigenvalues: Vec<R>,
    pub frame: Vec<PureState<R>>,
    /// Runs of eigenvalues closer than [`DEGENERACY_GAP`]; only the
    /// eigenprojector of a run is meaningful.
    pub groups: Vec<Vec<usize>>,
}

impl<R: Real> SpectralResolution<R> {
    pub fn dim(&self) -> usize {
        self.frame.len()
    }

    /// `Σ φ(λⱼ) p_{eⱼ}`.
    pub fn map(&self, phi: impl Fn(R) -> R) -> Observable<R> {
        let terms = self
            .eigenvalues
            .iter()
            .zip(&self.frame)
            .map(|(&l, e)| Term {
                coeff: cr(phi(l)),
                state: e.clone(),
            })
            .collect();
        Observable::zero_in(self.sector, self.dim())
            .add(&Observable::from_terms(terms).expect("frame states are quantum"))
    }

    pub fn eigenprojector(&self, group: usize) -> ComplexMatrix<R> {
        let n = self.dim();
        let mut p = ComplexMatrix::zeros(n, n);
        for &k in &self.groups[group] {
            p += self.frame[k].projector().expect("quantum frame");
        }
        p
    }

    /// `Σ λⱼ [eⱼ]`.
    pub fn reconstruct(&self) -> ComplexMatrix<R> {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for (l, e) in self.eigenvalues.iter().zip(&self.frame) {
            m += e.projector().expect("quantum frame") * cr(*l);
        }
        m
    }

    /// `max_{j≠k} p(eⱼ, eₖ)`.
    pub fn orthogonality_defect(&self) -> R {
        let mut worst = R::zero();
        for (j, a) in self.frame.iter().enumerate() {
            for b in &self.frame[..j] {
                worst = worst.max(transition_probability(a, b).expect("same sector"));
            }
        }
        worst
    }

    /// `Σⱼ p(ρ, eⱼ)`, which is one for every state of the sector.
    pub fn completeness(&self, rho: &PureState<R>) -> Result<R> {
        self.frame.iter().try_fold(
            R::zero(),
            |acc, e| Ok(acc + transition_probability(rho, e)?),
        )
    }
}

/// Spectral resolution of a real observable living in a single sector.
pub fn spectral_resolve<R: Real>(f: &Observable<R>) -> Result<SpectralResolution<R>> {
    if !f.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    let (sector, _) = f.single_sector()?;
    let eig = eig_hermitian(&f.hermitian_form(sector)?)?;
    let frame = (0..eig.dim())
        .map(|k| PureState::from_vector(sector, &eig.eigenvector(k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralResolution {
        sector,
        groups: eig.groups(R::lit(DEGENERACY_GAP)),
        eigenvalues: eig.eigenvalues,
        frame,
    })
}

/// `f² = Σ λⱼ² p_{eⱼ}`, sector by sector.
pub fn square<R: Real>(f: &Observable<R>) -> Result<Observable<R>> {
    if !f.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    let mut out = Observable::zero();
    for sector in f.sectors() {
        let part = spectral_resolve(&f.sector_part(sector))?;
        out = out.add(&part.map(|l| l * l));
    }
    Ok(out)
}

/// `f ∘ g = ¼((f + g)² − (f − g)²)`.
pub fn jordan<R: Real>(f: &Observable<R>, g: &Observable<R>) -> Result<Observable<R>> {
    if !f.is_real() || !g.is_real() {
        return Err(Error::ComplexCoefficients);
    }
    let plus = square(&f.add(g))?;
    let minus = square(&f.sub(g))?;
    Ok(plus.sub(&minus).scale_real(R::lit(0.25)))
}

fn star_real<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
    oracle: &BracketOracle<R>,
) -> Result<Observable<R>> {
    shared_sector(f, g)?;
    let sym = jordan(f, g)?;
    let skew = bracket_observable(f, g, oracle)?;
    Ok(sym.add(&skew.scale(c(R::zero(), -oracle.hbar() * R::lit(0.5)))))
}

/// `f · g = f ∘ g − (iħ/2){f, g}`, extended complex-bilinearly to
/// complex-coefficient observables.
pub fn star_product<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
    oracle: &BracketOracle<R>,
) -> Result<Observable<R>> {
    shared_sector(f, g)?;
    if f.is_real() && g.is_real() {
        return star_real(f, g, oracle);
    }
    let i = c(R::zero(), R::one());
    let parts = |h: &Observable<R>| {
        if h.is_real() {
            (h.clone(), None)
        } else {
            (h.real_part(), Some(h.imag_part()))
        }
    };
    let (fr, fi) = parts(f);
    let (gr, gi) = parts(g);
    let mut out = star_real(&fr, &gr, oracle)?;
    if let Some(fi) = &fi {
        out = out.add(&star_real(fi, &gr, oracle)?.scale(i));
    }
    if let Some(gi) = &gi {
        out = out.add(&star_real(&fr, gi, oracle)?.scale(i));
    }
    if let (Some(fi), Some(gi)) = (&fi, &gi) {
        out = out.sub(&star_real(fi, gi, oracle)?);
    }
    Ok(out)
}

/// `‖(f·g)·h − f·(g·h)‖_max` on operator forms.
pub fn associativity_residual<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
    h: &Observable<R>,
    oracle: &BracketOracle<R>,
) -> Result<R> {
    let left = star_product(&star_product(f, g, oracle)?, h, oracle)?;
    let right = star_product(f, &star_product(g, h, oracle)?, oracle)?;
    Ok(left.form_distance(&right))
}

#[derive(Clone, Debug)]
pub struct BlockReport<R: Real> {
    pub sector: usize,
    pub dim: usize,
    /// Real dimension of the span of the sampled `p_ρ`.
    pub span_rank: usize,
    /// Operator distance between a random `f_A` and its expansion in the
    /// sampled `p_ρ`.
    pub membership_residual: R,
}

#[derive(Clone, Debug)]
pub struct AlgebraIdentification<R: Real> {
    /// Matrix-block sizes, one per sector.
    pub blocks: Vec<usize>,
    pub reports: Vec<BlockReport<R>>,
    /// Largest Jordan product of `p_ρ`, `p_σ` taken from different sectors.
    pub cross_sector_residual: R,
}

/// Identify the reconstructed algebra as a direct sum of full matrix
/// algebras, one block per quantum sector.
pub fn identify_algebra<R: Real>(
    space: &StateSpace<R>,
    rng: &SeededRng,
) -> Result<AlgebraIdentification<R>> {
    if !space.is_all_quantum() {
        return Err(Error::InvalidSpace(
            "algebra identification needs quantum sectors".into(),
        ));
    }
    let mut reports = Vec::with_capacity(space.len());
    let mut representatives = Vec::with_capacity(space.len());
    for (sector, s) in space.sectors().iter().enumerate() {
        let Sector::Quantum { dim, .. } = *s else {
            unreachable!("checked above")
        };
        let mut r = rng.substream(sector as u64);
        let target = dim * dim;
        let states = (0..target + 4)
            .map(|_| space.random_state(sector, &mut r))
            .collect::<Result<Vec<_>>>()?;
        let columns: Vec<DVector<R>> = states
            .iter()
            .map(|s| hermitian_coordinates(s.projector().expect("quantum")))
            .collect();
        let samples = DMatrix::from_columns(&columns);
        let span_rank = crate::linalg::numerical_rank(&samples, R::lit(tolerance::RANK_THRESHOLD))?;
        if span_rank != target {
            return Err(Error::RankDeficient {
                expected: target,
                found: span_rank,
            });
        }

        // expand a random f_A in the sampled transition-probability functions
        let a = random_hermitian::<R, _>(dim, &mut r);
        let svd = SVD::try_new(samples, true, true, R::default_epsilon(), 10_000)
            .ok_or(Error::ConvergenceFailure)?;
        let mu = svd
            .solve(&hermitian_coordinates(a.matrix()), R::lit(1e-12))
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        let terms = mu
            .iter()
            .zip(&states)
            .map(|(&m, s)| Term {
                coeff: cr(m),
                state: s.clone(),
            })
            .collect();
        let expansion = Observable::from_terms(terms)?;
        let membership_residual = expansion.form_distance_to(sector, a.matrix());
        representatives.push(states[0].clone());
        reports.push(BlockReport {
            sector,
            dim,
            span_rank,
            membership_residual,
        });
    }
    let mut cross_sector_residual = R::zero();
    for (i, a) in representatives.iter().enumerate() {
        for b in &representatives[..i] {
            let prod = jordan(&Observable::p_rho(a)?, &Observable::p_rho(b)?)?;
            for s in prod.sectors() {
                cross_sector_residual = cross_sector_residual
                    .max(max_abs(prod.operator_form(s).expect("listed sector")));
            }
        }
    }
    Ok(AlgebraIdentification {
        blocks: reports.iter().map(|r| r.dim).collect(),
        reports,
        cross_sector_residual,
    })
}

/// `(ÂB̂ + B̂Â)/2`, the operator counterpart of the Jordan product.
pub fn symmetrized_product<R: Real>(
    a: &ComplexMatrix<R>,
    b: &ComplexMatrix<R>,
) -> ComplexMatrix<R> {
    (a * b + b * a) * cr(R::lit(0.5))
}
