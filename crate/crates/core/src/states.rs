//! Pure-state spaces, expectation functions and transition probabilities.
//!
//! A state space is an ordered union of sectors. A quantum sector is the
//! projective space of `Cⁿ` with a Planck constant attached; a classical
//! sector is a finite set of labelled points. Quantum states are stored as
//! rank-one projectors so that vectors differing by a phase are the same state.

use std::collections::BTreeMap;

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    self, eig_hermitian, inner, max_abs_diff, outer, trace_product, ComplexMatrix, ComplexVector,
    HermitianOperator,
};
use crate::scalar::{cr, Real};
use crate::tolerance;

#[derive(Clone, Debug, PartialEq)]
pub enum Sector<R: Real> {
    Quantum { dim: usize, hbar: R },
    Classical { points: Vec<String> },
}

impl<R: Real> Sector<R> {
    /// Quantum sector with `ħ = 1`.
    pub fn quantum(dim: usize) -> Self {
        Sector::Quantum {
            dim,
            hbar: R::one(),
        }
    }

    pub fn classical<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Self {
        Sector::Classical {
            points: points.into_iter().map(Into::into).collect(),
        }
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self, Sector::Quantum { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            Sector::Quantum { dim, .. } => Some(*dim),
            Sector::Classical { .. } => None,
        }
    }

    pub fn hbar(&self) -> Option<R> {
        match self {
            Sector::Quantum { hbar, .. } => Some(*hbar),
            Sector::Classical { .. } => None,
        }
    }
}

/// Union of sectors; sector ids are positions in the list.
#[derive(Clone, Debug, PartialEq)]
pub struct StateSpace<R: Real> {
    sectors: Vec<Sector<R>>,
}

impl<R: Real> StateSpace<R> {
    pub fn new(sectors: Vec<Sector<R>>) -> Result<Self> {
        if sectors.is_empty() {
            return Err(Error::InvalidSpace("no sectors".into()));
        }
        for (id, sector) in sectors.iter().enumerate() {
            match sector {
                Sector::Quantum { dim, hbar } => {
                    if *dim == 0 {
                        return Err(Error::InvalidSpace(format!("sector {id} has dimension 0")));
                    }
                    if !(hbar.is_finite() && *hbar > R::zero()) {
                        return Err(Error::InvalidHbar(hbar.to_f64_lossy()));
                    }
                }
                Sector::Classical { points } => {
                    if points.is_empty() {
                        return Err(Error::InvalidSpace(format!("sector {id} has no points")));
                    }
                    let mut seen = points.clone();
                    seen.sort();
                    seen.dedup();
                    if seen.len() != points.len() {
                        return Err(Error::InvalidSpace(format!(
                            "sector {id} has duplicate point labels"
                        )));
                    }
                }
            }
        }
        Ok(Self { sectors })
    }

    /// Quantum sectors of the given dimensions, all with `ħ = 1`.
    pub fn quantum(dims: &[usize]) -> Result<Self> {
        Self::new(dims.iter().map(|&d| Sector::quantum(d)).collect())
    }

    /// Quantum sectors with individual Planck constants.
    pub fn quantum_with_hbar(dims_hbar: &[(usize, R)]) -> Result<Self> {
        Self::new(
            dims_hbar
                .iter()
                .map(|&(dim, hbar)| Sector::Quantum { dim, hbar })
                .collect(),
        )
    }

    /// One classical sector holding the given points.
    pub fn classical<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(vec![Sector::classical(points)])
    }

    pub fn sectors(&self) -> &[Sector<R>] {
        &self.sectors
    }

    pub fn len(&self) -> usize {
        self.sectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn sector(&self, id: usize) -> Result<&Sector<R>> {
        self.sectors.get(id).ok_or(Error::UnknownSector(id))
    }

    pub fn quantum_dim(&self, id: usize) -> Result<usize> {
        self.sector(id)?
            .dim()
            .ok_or(Error::ClassicalStateNotSupported)
    }

    pub fn hbar(&self, id: usize) -> Result<R> {
        self.sector(id)?
            .hbar()
            .ok_or(Error::ClassicalStateNotSupported)
    }

    pub fn is_all_quantum(&self) -> bool {
        self.sectors.iter().all(Sector::is_quantum)
    }

    pub fn is_all_classical(&self) -> bool {
        self.sectors.iter().all(|s| !s.is_quantum())
    }

    /// The ray through `vector` in quantum sector `sector`.
    pub fn make_state(&self, sector: usize, vector: &[Complex<R>]) -> Result<PureState<R>> {
        let dim = self.quantum_dim(sector)?;
        if vector.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: vector.len(),
            });
        }
        PureState::from_vector(sector, &ComplexVector::from_column_slice(vector))
    }

    pub fn classical_state(&self, sector: usize, label: &str) -> Result<PureState<R>> {
        match self.sector(sector)? {
            Sector::Classical { points } if points.iter().any(|p| p == label) => {
                Ok(PureState::classical(sector, label))
            }
            Sector::Classical { .. } => Err(Error::UnknownPoint(label.to_string())),
            Sector::Quantum { .. } => Err(Error::SpaceMismatch),
        }
    }

    /// Haar-random ray in a quantum sector, uniform point in a classical one.
    pub fn random_state<G: Rng + ?Sized>(
        &self,
        sector: usize,
        rng: &mut G,
    ) -> Result<PureState<R>> {
        match self.sector(sector)? {
            Sector::Quantum { dim, .. } => {
                PureState::from_vector(sector, &linalg::random_unit_vector(*dim, rng))
            }
            Sector::Classical { points } => {
                let k = rng.random_range(0..points.len());
                Ok(PureState::classical(sector, &points[k]))
            }
        }
    }

    /// Every state of every classical sector (empty for quantum sectors).
    pub fn classical_points(&self) -> Vec<PureState<R>> {
        self.sectors
            .iter()
            .enumerate()
            .flat_map(|(id, s)| match s {
                Sector::Classical { points } => points
                    .iter()
                    .map(|p| PureState::classical(id, p))
                    .collect::<Vec<_>>(),
                Sector::Quantum { .. } => Vec::new(),
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Payload<R: Real> {
    Quantum {
        vector: ComplexVector<R>,
        projector: ComplexMatrix<R>,
    },
    Classical(String),
}

/// A point of the pure-state space.
#[derive(Clone, Debug)]
pub struct PureState<R: Real> {
    sector: usize,
    payload: Payload<R>,
}

impl<R: Real> PureState<R> {
    /// `|ψ⟩⟨ψ| / ⟨ψ|ψ⟩`.
    pub fn from_vector(sector: usize, vector: &ComplexVector<R>) -> Result<Self> {
        if vector.is_empty() {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        if vector
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::NonFinite);
        }
        let norm = vector.norm();
        if norm <= R::zero() || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        let vector = vector.unscale(norm);
        let projector = outer(&vector, &vector);
        Ok(Self {
            sector,
            payload: Payload::Quantum { vector, projector },
        })
    }

    pub fn classical(sector: usize, label: &str) -> Self {
        Self {
            sector,
            payload: Payload::Classical(label.to_string()),
        }
    }

    pub fn sector(&self) -> usize {
        self.sector
    }

    pub fn is_quantum(&self) -> bool {
        matches!(self.payload, Payload::Quantum { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        self.vector().map(|v| v.len())
    }

    /// A unit vector representative (its phase is not meaningful).
    pub fn vector(&self) -> Option<&ComplexVector<R>> {
        match &self.payload {
            Payload::Quantum { vector, .. } => Some(vector),
            Payload::Classical(_) => None,
        }
    }

    pub fn projector(&self) -> Option<&ComplexMatrix<R>> {
        match &self.payload {
            Payload::Quantum { projector, .. } => Some(projector),
            Payload::Classical(_) => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        match &self.payload {
            Payload::Classical(l) => Some(l),
            Payload::Quantum { .. } => None,
        }
    }

    pub(crate) fn quantum_parts(&self) -> Result<(&ComplexVector<R>, &ComplexMatrix<R>)> {
        match &self.payload {
            Payload::Quantum { vector, projector } => Ok((vector, projector)),
            Payload::Classical(_) => Err(Error::ClassicalStateNotSupported),
        }
    }

    /// Projector max-norm distance; 0 or 1 for classical points.
    pub fn distance(&self, other: &Self) -> R {
        if self.sector != other.sector {
            return R::one();
        }
        match (&self.payload, &other.payload) {
            (Payload::Quantum { projector: a, .. }, Payload::Quantum { projector: b, .. }) => {
                max_abs_diff(a, b)
            }
            (Payload::Classical(a), Payload::Classical(b)) if a == b => R::zero(),
            _ => R::one(),
        }
    }

    /// Equality as points of the state space.
    pub fn same_as(&self, other: &Self) -> bool {
        self.distance(other) <= R::tol(tolerance::STATE_EQUALITY)
    }

    /// The ray through `U|ψ⟩`.
    pub fn transformed(&self, u: &ComplexMatrix<R>) -> Result<Self> {
        let (v, _) = self.quantum_parts()?;
        if u.nrows() != v.len() || u.ncols() != v.len() {
            return Err(Error::DimensionMismatch {
                expected: v.len(),
                found: u.nrows(),
            });
        }
        Self::from_vector(self.sector, &(u * v))
    }
}

/// `f_A(ρ) = Tr(ρA)`.
pub fn expectation<R: Real>(a: &HermitianOperator<R>, rho: &PureState<R>) -> Result<R> {
    let (_, p) = rho.quantum_parts()?;
    if p.nrows() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: p.nrows(),
        });
    }
    Ok(trace_product(p, a.matrix()).re)
}

/// Born rule within a quantum sector, Kronecker delta within a classical one,
/// zero across sectors.
pub fn transition_probability<R: Real>(rho: &PureState<R>, sigma: &PureState<R>) -> Result<R> {
    if rho.sector != sigma.sector {
        return Ok(R::zero());
    }
    match (&rho.payload, &sigma.payload) {
        (Payload::Quantum { vector: a, .. }, Payload::Quantum { vector: b, .. }) => {
            if a.len() != b.len() {
                return Err(Error::SpaceMismatch);
            }
            // |⟨a|b⟩|² is bitwise symmetric because inner(b, a) = conj(inner(a, b))
            Ok(inner(a, b).modulus_squared())
        }
        (Payload::Classical(a), Payload::Classical(b)) => {
            Ok(if a == b { R::one() } else { R::zero() })
        }
        _ => Err(Error::SpaceMismatch),
    }
}

/// Sectors of a finite transition-probability matrix: connected components of
/// the graph with an edge wherever `p(i, j)` is positive.
pub fn decompose_sectors<R: Real>(p: &DMatrix<R>) -> Result<Vec<Vec<usize>>> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::NotATransitionProbability("matrix not square".into()));
    }
    let eps = R::tol(1e-12);
    for i in 0..n {
        if (p[(i, i)] - R::one()).abs() > eps {
            return Err(Error::NotATransitionProbability(format!(
                "diagonal entry {i} is not 1"
            )));
        }
        for j in 0..i {
            if (p[(i, j)] - p[(j, i)]).abs() > eps {
                return Err(Error::NotATransitionProbability(format!(
                    "asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let mut component = vec![usize::MAX; n];
    let mut sectors = Vec::new();
    for start in 0..n {
        if component[start] != usize::MAX {
            continue;
        }
        let id = sectors.len();
        let mut members = vec![start];
        component[start] = id;
        let mut frontier = vec![start];
        while let Some(i) = frontier.pop() {
            for j in 0..n {
                if component[j] == usize::MAX && p[(i, j)] > eps {
                    component[j] = id;
                    members.push(j);
                    frontier.push(j);
                }
            }
        }
        members.sort_unstable();
        sectors.push(members);
    }
    Ok(sectors)
}

/// One summand `μ p_ρ` of an observable.
#[derive(Clone, Debug)]
pub struct Term<R: Real> {
    pub coeff: Complex<R>,
    pub state: PureState<R>,
}

/// A finite combination `Σ μᵢ p_{ρᵢ}` of transition-probability functions,
/// together with its operator form `Σ μᵢ [ρᵢ]` in each quantum sector.
#[derive(Clone, Debug)]
pub struct Observable<R: Real> {
    terms: Vec<Term<R>>,
    forms: BTreeMap<usize, ComplexMatrix<R>>,
}

impl<R: Real> Observable<R> {
    /// The zero function with no sector attached.
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            forms: BTreeMap::new(),
        }
    }

    /// The zero function on quantum sector `sector` of dimension `dim`.
    pub fn zero_in(sector: usize, dim: usize) -> Self {
        let mut forms = BTreeMap::new();
        forms.insert(sector, ComplexMatrix::zeros(dim, dim));
        Self {
            terms: Vec::new(),
            forms,
        }
    }

    pub fn from_terms(terms: Vec<Term<R>>) -> Result<Self> {
        Self::assemble(terms, std::iter::empty())
    }

    fn assemble(
        terms: Vec<Term<R>>,
        sectors: impl Iterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut forms: BTreeMap<usize, ComplexMatrix<R>> = BTreeMap::new();
        for (sector, dim) in sectors {
            forms
                .entry(sector)
                .or_insert_with(|| ComplexMatrix::zeros(dim, dim));
        }
        for term in &terms {
            let (_, p) = term.state.quantum_parts()?;
            let n = p.nrows();
            let form = forms
                .entry(term.state.sector)
                .or_insert_with(|| ComplexMatrix::zeros(n, n));
            if form.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: form.nrows(),
                    found: n,
                });
            }
            *form += p * term.coeff;
        }
        Ok(Self { terms, forms })
    }

    fn sector_dims(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.forms.iter().map(|(&s, m)| (s, m.nrows()))
    }

    /// `p_ρ`, the transition probability to `ρ` as a function.
    pub fn p_rho(rho: &PureState<R>) -> Result<Self> {
        Self::from_terms(vec![Term {
            coeff: cr(R::one()),
            state: rho.clone(),
        }])
    }

    /// `f_A = Σ λⱼ p_{eⱼ}` from the spectral decomposition of `A`.
    pub fn from_operator(sector: usize, a: &HermitianOperator<R>) -> Result<Self> {
        let eig = eig_hermitian(a)?;
        let mut terms = Vec::with_capacity(eig.dim());
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            terms.push(Term {
                coeff: cr(lambda),
                state: PureState::from_vector(sector, &eig.eigenvector(k))?,
            });
        }
        Self::assemble(terms, std::iter::once((sector, a.dim())))
    }

    pub fn terms(&self) -> &[Term<R>] {
        &self.terms
    }

    pub fn sectors(&self) -> Vec<usize> {
        self.forms.keys().copied().collect()
    }

    pub fn operator_form(&self, sector: usize) -> Option<&ComplexMatrix<R>> {
        self.forms.get(&sector)
    }

    /// The unique sector of this observable and its dimension.
    pub fn single_sector(&self) -> Result<(usize, usize)> {
        let mut it = self.sector_dims();
        match (it.next(), it.next()) {
            (Some(sd), None) => Ok(sd),
            (None, _) => Err(Error::EmptyObservable),
            _ => Err(Error::MultiSector),
        }
    }

    /// All coefficients have zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.coeff.im == R::zero())
    }

    /// Operator form of a real observable as a Hermitian operator.
    pub fn hermitian_form(&self, sector: usize) -> Result<HermitianOperator<R>> {
        if !self.is_real() {
            return Err(Error::ComplexCoefficients);
        }
        self.forms
            .get(&sector)
            .map(|m| HermitianOperator::symmetrize(m.clone()))
            .ok_or(Error::SectorMismatch {
                expected: sector,
                found: self.forms.keys().next().copied().unwrap_or(sector),
            })
    }

    /// `Σ μᵢ p(ρᵢ, σ)` from the term list.
    pub fn evaluate(&self, sigma: &PureState<R>) -> Result<Complex<R>> {
        let mut acc = cr(R::zero());
        for t in &self.terms {
            acc += t.coeff * cr(transition_probability(&t.state, sigma)?);
        }
        Ok(acc)
    }

    /// `Tr(σ F)` from the operator form of σ's sector.
    pub fn evaluate_operator(&self, sigma: &PureState<R>) -> Result<Complex<R>> {
        let (_, p) = sigma.quantum_parts()?;
        match self.forms.get(&sigma.sector) {
            Some(f) if f.nrows() != p.nrows() => Err(Error::DimensionMismatch {
                expected: f.nrows(),
                found: p.nrows(),
            }),
            Some(f) => Ok(trace_product(p, f)),
            None => Ok(cr(R::zero())),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, cr(R::one()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -cr(R::one()))
    }

    fn combine(&self, other: &Self, factor: Complex<R>) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().map(|t| Term {
            coeff: t.coeff * factor,
            state: t.state.clone(),
        }));
        let sectors: Vec<_> = self.sector_dims().chain(other.sector_dims()).collect();
        Self::assemble(terms, sectors.into_iter()).expect("operands share sector dimensions")
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        self.map_coeffs(|c| c * s)
    }

    pub fn scale_real(&self, s: R) -> Self {
        self.scale(cr(s))
    }

    /// Observable with coefficients `Re μᵢ`.
    pub fn real_part(&self) -> Self {
        self.map_coeffs(|c| cr(c.re))
    }

    /// Observable with coefficients `Im μᵢ`.
    pub fn imag_part(&self) -> Self {
        self.map_coeffs(|c| cr(c.im))
    }

    fn map_coeffs(&self, f: impl Fn(Complex<R>) -> Complex<R>) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: f(t.coeff),
                state: t.state.clone(),
            })
            .collect();
        let sectors: Vec<_> = self.sector_dims().collect();
        Self::assemble(terms, sectors.into_iter()).expect("terms already validated")
    }

    /// Restriction to one sector.
    pub fn sector_part(&self, sector: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|t| t.state.sector == sector)
            .cloned()
            .collect();
        let dims: Vec<_> = self.sector_dims().filter(|(s, _)| *s == sector).collect();
        Self::assemble(terms, dims.into_iter()).expect("terms already validated")
    }

    /// Max-norm distance between operator forms, sector by sector; sectors
    /// missing on one side count as zero.
    pub fn form_distance(&self, other: &Self) -> R {
        let mut worst = R::zero();
        for (s, f) in &self.forms {
            let d = match other.forms.get(s) {
                Some(g) => max_abs_diff(f, g),
                None => linalg::max_abs(f),
            };
            worst = worst.max(d);
        }
        for (s, g) in &other.forms {
            if !self.forms.contains_key(s) {
                worst = worst.max(linalg::max_abs(g));
            }
        }
        worst
    }

    /// Distance between the operator form in `sector` and a reference matrix.
    pub fn form_distance_to(&self, sector: usize, m: &ComplexMatrix<R>) -> R {
        match self.forms.get(&sector) {
            Some(f) => max_abs_diff(f, m),
            None => linalg::max_abs(m),
        }
    }

    /// Largest mismatch between the operator form and the sum recomputed from
    /// the term list.
    pub fn consistency_defect(&self) -> R {
        let rebuilt = Self::assemble(
            self.terms.clone(),
            self.sector_dims().collect::<Vec<_>>().into_iter(),
        )
        .expect("terms already validated");
        self.form_distance(&rebuilt)
    }
}
