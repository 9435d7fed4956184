//! Poisson brackets, Hamiltonian flows and the quantities derived from them:
//! unitarity drift, symplectic-leaf rank and the inferred Planck constant.
//!
//! Sign convention: the flow of `f_H` is `ρ(t) = U ρ U†` with
//! `U = exp(−iĤt/ħ)`, which makes `{f_H, g}(ρ) = d/dt g(ρ(t))` at `t = 0` for
//! the bracket `{f_A, f_B} = (i/ħ) f_{[Â,B̂]}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    eig_hermitian, hermitian_basis, inner, max_abs, singular_values, unitary_from_eig,
    ComplexMatrix, ComplexVector, EigenDecomposition, HermitianOperator,
};
use crate::scalar::{c, cr, Real};
use crate::states::{transition_probability, Observable, PureState};
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BracketMode {
    /// `(i/ħ) Tr(ρ[Â, B̂])`.
    Operator,
    /// Central difference of `g` along the flow of `f`.
    FiniteDifference,
}

/// How brackets are evaluated, and the Planck constant that scales them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketOracle<R: Real> {
    mode: BracketMode,
    hbar: R,
}

impl<R: Real> BracketOracle<R> {
    pub fn new(mode: BracketMode, hbar: R) -> Result<Self> {
        if !(hbar.is_finite() && hbar > R::zero()) {
            return Err(Error::InvalidHbar(hbar.to_f64_lossy()));
        }
        Ok(Self { mode, hbar })
    }

    pub fn operator(hbar: R) -> Result<Self> {
        Self::new(BracketMode::Operator, hbar)
    }

    pub fn finite_difference(hbar: R) -> Result<Self> {
        Self::new(BracketMode::FiniteDifference, hbar)
    }

    pub fn mode(&self) -> BracketMode {
        self.mode
    }

    pub fn hbar(&self) -> R {
        self.hbar
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowMethod {
    /// Conjugation by the exact unitary.
    Exact,
    /// Fixed-step RK4 on the state vector; `steps` spans `[0, max |t|]`.
    Rk4 { steps: usize },
}

impl FlowMethod {
    pub const DEFAULT_RK4_STEPS: usize = 1000;

    pub fn rk4() -> Self {
        FlowMethod::Rk4 {
            steps: Self::DEFAULT_RK4_STEPS,
        }
    }
}

/// Sampled curve `σ(t)` of a Hamiltonian flow.
#[derive(Clone, Debug)]
pub struct FlowResult<R: Real> {
    pub trajectory: Vec<(R, PureState<R>)>,
    pub method: FlowMethod,
}

impl<R: Real> FlowResult<R> {
    pub fn states(&self) -> impl Iterator<Item = &PureState<R>> {
        self.trajectory.iter().map(|(_, s)| s)
    }

    /// Largest projector distance to another trajectory on the same grid.
    pub fn max_distance(&self, other: &Self) -> R {
        self.states()
            .zip(other.states())
            .fold(R::zero(), |acc, (a, b)| acc.max(a.distance(b)))
    }
}

/// Operator form of a real observable on `sector` (zero when the observable
/// has no part there).
pub fn operator_on<R: Real>(
    f: &Observable<R>,
    sector: usize,
    dim: usize,
) -> Result<HermitianOperator<R>> {
    if let Some(&other) = f.sectors().iter().find(|&&s| s != sector) {
        return Err(Error::SectorMismatch {
            expected: sector,
            found: other,
        });
    }
    match f.operator_form(sector) {
        Some(m) if m.nrows() != dim => Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        }),
        Some(_) => f.hermitian_form(sector),
        None => Ok(HermitianOperator::zeros(dim)),
    }
}

fn quantum_site<R: Real>(rho: &PureState<R>) -> Result<(usize, usize, &ComplexVector<R>)> {
    let v = rho.vector().ok_or(Error::ClassicalStateNotSupported)?;
    Ok((rho.sector(), v.len(), v))
}

/// `Tr(ρ[Â, B̂]) / i = 2 Im⟨Âψ|B̂ψ⟩`, antisymmetric bit for bit.
fn commutator_imag<R: Real>(
    a: &HermitianOperator<R>,
    b: &HermitianOperator<R>,
    psi: &ComplexVector<R>,
) -> R {
    let two = R::lit(2.0);
    two * inner(&(a.matrix() * psi), &(b.matrix() * psi)).im
}

/// The bracket of two expectation functions at a state.
pub fn bracket_operators<R: Real>(
    a: &HermitianOperator<R>,
    b: &HermitianOperator<R>,
    rho: &PureState<R>,
    oracle: &BracketOracle<R>,
) -> Result<R> {
    let (_, dim, psi) = quantum_site(rho)?;
    for m in [a, b] {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
    }
    match oracle.mode {
        // (i/ħ)·i·2 Im⟨Aψ|Bψ⟩
        BracketMode::Operator => Ok(-commutator_imag(a, b, psi) / oracle.hbar),
        BracketMode::FiniteDifference => {
            let eig = eig_hermitian(a)?;
            let spread = eig
                .eigenvalues
                .iter()
                .fold(R::zero(), |acc, l| acc.max(l.abs()));
            if spread == R::zero() {
                return Ok(R::zero());
            }
            // rotation angle per step ≈ 1e-4 rad
            let h = R::lit(1e-4) * oracle.hbar / spread;
            let along = |t: R| -> Result<R> {
                let u = unitary_from_eig(&eig, -t / oracle.hbar);
                Ok(b.expectation_in(&(&u * psi)))
            };
            Ok((along(h)? - along(-h)?) / (R::lit(2.0) * h))
        }
    }
}

/// `{f, g}(ρ)` for real observables supported on ρ's sector.
pub fn bracket<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
    rho: &PureState<R>,
    oracle: &BracketOracle<R>,
) -> Result<R> {
    let (sector, dim, _) = quantum_site(rho)?;
    let a = operator_on(f, sector, dim)?;
    let b = operator_on(g, sector, dim)?;
    bracket_operators(&a, &b, rho, oracle)
}

pub(crate) fn shared_sector<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
) -> Result<(usize, usize)> {
    match (f.single_sector(), g.single_sector()) {
        (Ok(a), Ok(b)) if a == b => Ok(a),
        (Ok(a), Ok(b)) => Err(Error::SectorMismatch {
            expected: a.0,
            found: b.0,
        }),
        (Ok(a), Err(Error::EmptyObservable)) | (Err(Error::EmptyObservable), Ok(a)) => Ok(a),
        (Err(e), _) | (_, Err(e)) => Err(e),
    }
}

/// `{f, g}` as an observable.
///
/// In operator mode this is the spectral resolution of `(i/ħ)[Â, B̂]`. In
/// finite-difference mode the function is sampled at `n²` tomographically
/// complete states and its operator form solved for entry by entry.
pub fn bracket_observable<R: Real>(
    f: &Observable<R>,
    g: &Observable<R>,
    oracle: &BracketOracle<R>,
) -> Result<Observable<R>> {
    let (sector, dim) = shared_sector(f, g)?;
    let a = operator_on(f, sector, dim)?;
    let b = operator_on(g, sector, dim)?;
    let form = match oracle.mode {
        BracketMode::Operator => {
            let comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
            HermitianOperator::symmetrize(comm * c(R::zero(), R::one() / oracle.hbar))
        }
        BracketMode::FiniteDifference => fit_operator(dim, |psi| {
            let rho = PureState::from_vector(sector, psi)?;
            bracket_operators(&a, &b, &rho, oracle)
        })?,
    };
    Observable::from_operator(sector, &form)
}

/// Recover a Hermitian `C` from the values `⟨ψ|C|ψ⟩` at the states `eⱼ`,
/// `(eⱼ + eₖ)/√2` and `(eⱼ + i eₖ)/√2`.
fn fit_operator<R: Real>(
    dim: usize,
    mut value: impl FnMut(&ComplexVector<R>) -> Result<R>,
) -> Result<HermitianOperator<R>> {
    let basis = |k: usize| {
        let mut e = ComplexVector::zeros(dim);
        e[k] = cr(R::one());
        e
    };
    let half = R::lit(0.5);
    let diag: Vec<R> = (0..dim).map(|k| value(&basis(k))).collect::<Result<_>>()?;
    let mut m = ComplexMatrix::zeros(dim, dim);
    for j in 0..dim {
        m[(j, j)] = cr(diag[j]);
        for k in (j + 1)..dim {
            let sym = value(&(basis(j) + basis(k)))?;
            let rot = value(&(basis(j) + basis(k) * c(R::zero(), R::one())))?;
            let mean = (diag[j] + diag[k]) * half;
            // ⟨ψ|C|ψ⟩ = ½(Cⱼⱼ + Cₖₖ) + Re Cⱼₖ, resp. ½(Cⱼⱼ + Cₖₖ) − Im Cⱼₖ
            let z = c(sym - mean, mean - rot);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    Ok(HermitianOperator::symmetrize(m))
}

fn integrate_rk4<R: Real>(
    h: &HermitianOperator<R>,
    psi: &ComplexVector<R>,
    duration: R,
    substeps: usize,
    hbar: R,
) -> ComplexVector<R> {
    let generator = h.matrix() * c(R::zero(), -R::one() / hbar);
    let dt = duration / R::from_usize(substeps).unwrap();
    let half = dt * R::lit(0.5);
    let sixth = dt / R::lit(6.0);
    let two = cr(R::lit(2.0));
    let mut y = psi.clone();
    for _ in 0..substeps {
        let k1 = &generator * &y;
        let k2 = &generator * (&y + &k1 * cr(half));
        let k3 = &generator * (&y + &k2 * cr(half));
        let k4 = &generator * (&y + &k3 * cr(dt));
        y += (k1 + k2 * two + k3 * two + k4) * cr(sixth);
        let norm = y.norm();
        y.unscale_mut(norm);
    }
    y
}

/// Flow of the Hamiltonian function `f_H` from `ρ`, sampled at `times`.
pub fn hamiltonian_flow<R: Real>(
    h: &Observable<R>,
    rho: &PureState<R>,
    times: &[R],
    oracle: &BracketOracle<R>,
    method: FlowMethod,
) -> Result<FlowResult<R>> {
    let (sector, dim, _) = quantum_site(rho)?;
    let hop = operator_on(h, sector, dim)?;
    flow_operator(&hop, rho, times, oracle.hbar, method)
}

/// [`hamiltonian_flow`] for an explicit Hamiltonian operator.
pub fn flow_operator<R: Real>(
    h: &HermitianOperator<R>,
    rho: &PureState<R>,
    times: &[R],
    hbar: R,
    method: FlowMethod,
) -> Result<FlowResult<R>> {
    let (sector, dim, psi) = quantum_site(rho)?;
    if h.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: h.dim(),
        });
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("non-finite flow time".into()));
    }
    let mut trajectory = Vec::with_capacity(times.len());
    match method {
        FlowMethod::Exact => {
            let eig: EigenDecomposition<R> = eig_hermitian(h)?;
            for &t in times {
                let u = unitary_from_eig(&eig, -t / hbar);
                trajectory.push((t, PureState::from_vector(sector, &(u * psi))?));
            }
        }
        FlowMethod::Rk4 { steps } => {
            if steps == 0 {
                return Err(Error::InvalidInput("RK4 needs at least one step".into()));
            }
            let horizon = times.iter().fold(R::zero(), |acc, t| acc.max(t.abs()));
            let step = horizon / R::from_usize(steps).unwrap();
            let mut now = R::zero();
            let mut y = psi.clone();
            for &t in times {
                let span = t - now;
                if span != R::zero() {
                    let n = (span.abs() / step).ceil().to_usize().unwrap_or(1).max(1);
                    y = integrate_rk4(h, &y, span, n, hbar);
                    now = t;
                }
                trajectory.push((t, PureState::from_vector(sector, &y)?));
            }
        }
    }
    Ok(FlowResult { trajectory, method })
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport<R: Real> {
    pub max_drift: R,
    pub initial: R,
}

/// Flow `σ₁`, `σ₂` under the Hamiltonian `p_ρ` and track the drift of
/// `p(σ₁(t), σ₂(t))`.
pub fn check_unitarity<R: Real>(
    rho: &PureState<R>,
    sigma1: &PureState<R>,
    sigma2: &PureState<R>,
    times: &[R],
    oracle: &BracketOracle<R>,
    method: FlowMethod,
) -> Result<UnitarityReport<R>> {
    let h = Observable::p_rho(rho)?;
    check_invariance(&h, rho.sector(), sigma1, sigma2, times, oracle, method)
}

/// Drift of `p(σ₁(t), σ₂(t))` under the flow of an arbitrary real observable.
pub fn check_invariance<R: Real>(
    h: &Observable<R>,
    sector: usize,
    sigma1: &PureState<R>,
    sigma2: &PureState<R>,
    times: &[R],
    oracle: &BracketOracle<R>,
    method: FlowMethod,
) -> Result<UnitarityReport<R>> {
    for s in [sigma1, sigma2] {
        if s.sector() != sector {
            return Err(Error::SectorMismatch {
                expected: sector,
                found: s.sector(),
            });
        }
    }
    let initial = transition_probability(sigma1, sigma2)?;
    let a = hamiltonian_flow(h, sigma1, times, oracle, method)?;
    let b = hamiltonian_flow(h, sigma2, times, oracle, method)?;
    let mut max_drift = R::zero();
    for (x, y) in a.states().zip(b.states()) {
        max_drift = max_drift.max((transition_probability(x, y)? - initial).abs());
    }
    Ok(UnitarityReport { max_drift, initial })
}

/// `X_{f_A}(ρ) = (−i/ħ)(Â − f_A(ρ))|ψ⟩`, orthogonal to `|ψ⟩`.
pub fn tangent_vector<R: Real>(
    a: &HermitianOperator<R>,
    psi: &ComplexVector<R>,
    hbar: R,
) -> ComplexVector<R> {
    let a_psi = a.matrix() * psi;
    let mean = inner(psi, &a_psi);
    let mut v = a_psi - psi * mean;
    // remove the residual component along ψ left by rounding
    let along = inner(psi, &v);
    v -= psi * along;
    v * c(R::zero(), -R::one() / hbar)
}

/// Real dimension of the span of Hamiltonian vector fields at `ρ`.
pub fn symplectic_leaf_rank<R: Real>(
    rho: &PureState<R>,
    probes: &[HermitianOperator<R>],
    hbar: R,
) -> Result<usize> {
    let (_, dim, psi) = quantum_site(rho)?;
    if probes.is_empty() {
        return Ok(0);
    }
    let mut cols = DMatrix::<R>::zeros(2 * dim, probes.len());
    for (j, a) in probes.iter().enumerate() {
        if a.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: a.dim(),
            });
        }
        let v = tangent_vector(a, psi, hbar);
        for i in 0..dim {
            cols[(i, j)] = v[i].re;
            cols[(dim + i, j)] = v[i].im;
        }
    }
    // measured against the probe scale too, so that rounding noise in an
    // all-zero tangent space is not counted
    let scale = probes
        .iter()
        .fold(R::zero(), |acc, a| acc.max(max_abs(a.matrix())))
        / hbar;
    let s = singular_values(&cols)?;
    let reference = s.first().copied().unwrap_or_else(R::zero).max(scale);
    let cut = R::lit(tolerance::RANK_THRESHOLD) * reference;
    Ok(s.iter().filter(|&&x| x > cut).count())
}

/// [`symplectic_leaf_rank`] over the full Hermitian basis.
pub fn leaf_rank_full<R: Real>(rho: &PureState<R>, hbar: R) -> Result<usize> {
    let dim = rho.dim().ok_or(Error::ClassicalStateNotSupported)?;
    symplectic_leaf_rank(rho, &hermitian_basis(dim), hbar)
}

/// A bracket value paired with the commutator expectation `i Tr(ρ[Â, B̂])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BracketSample<R: Real> {
    pub bracket: R,
    pub commutator: R,
}

pub fn bracket_sample<R: Real>(
    a: &HermitianOperator<R>,
    b: &HermitianOperator<R>,
    rho: &PureState<R>,
    oracle: &BracketOracle<R>,
) -> Result<BracketSample<R>> {
    let bracket = bracket_operators(a, b, rho, oracle)?;
    let (_, _, psi) = quantum_site(rho)?;
    Ok(BracketSample {
        bracket,
        commutator: -commutator_imag(a, b, psi),
    })
}

/// Brackets with magnitude below this carry no usable ratio.
pub const SIGNAL_THRESHOLD: f64 = 1e-8;
/// Relative agreement demanded between individual ratios.
pub const RATIO_AGREEMENT: f64 = 1e-6;

/// Recover `ħ` from brackets of the form `{f_A, f_B} = (i/ħ) f_{[Â,B̂]}`.
pub fn infer_hbar<R: Real>(samples: &[BracketSample<R>]) -> Result<R> {
    let threshold = R::lit(SIGNAL_THRESHOLD);
    let ratios: Vec<R> = samples
        .iter()
        .filter(|s| s.bracket.abs() > threshold)
        .map(|s| s.commutator / s.bracket)
        .collect();
    if ratios.is_empty() {
        return Err(Error::InsufficientSignal);
    }
    let mean =
        ratios.iter().fold(R::zero(), |acc, &r| acc + r) / R::from_usize(ratios.len()).unwrap();
    let spread = ratios
        .iter()
        .fold(R::zero(), |acc, &r| acc.max((r - mean).abs()));
    if !(mean.is_finite() && mean.abs() > R::zero())
        || spread > R::lit(RATIO_AGREEMENT) * mean.abs()
    {
        return Err(Error::InconsistentBracket {
            spread: (spread / mean.abs()).to_f64_lossy(),
        });
    }
    Ok(mean)
}

/// Step of the central differences in [`canonical_bracket`].
pub const CANONICAL_STEP: f64 = 1e-5;

/// `Σₖ (∂f/∂qₖ ∂g/∂pₖ − ∂f/∂pₖ ∂g/∂qₖ)` at `point = (q₁…q_d, p₁…p_d)`.
pub fn canonical_bracket<R: Real>(
    f: impl Fn(&[R]) -> R,
    g: impl Fn(&[R]) -> R,
    point: &[R],
) -> Result<R> {
    if point.is_empty() || !point.len().is_multiple_of(2) {
        return Err(Error::InvalidInput(format!(
            "phase-space point must have even length, got {}",
            point.len()
        )));
    }
    let d = point.len() / 2;
    let h = R::lit(CANONICAL_STEP);
    let partial = |func: &dyn Fn(&[R]) -> R, k: usize| -> R {
        let mut x = point.to_vec();
        x[k] = point[k] + h;
        let up = func(&x);
        x[k] = point[k] - h;
        let down = func(&x);
        (up - down) / (h + h)
    };
    let mut acc = R::zero();
    for k in 0..d {
        acc += partial(&f, k) * partial(&g, d + k) - partial(&f, d + k) * partial(&g, k);
    }
    if !acc.is_finite() {
        return Err(Error::InvalidInput(
            "bracket evaluation is not finite".into(),
        ));
    }
    Ok(acc)
}

/// `|estimate − truth| / |truth|`.
pub fn relative_error<R: Real>(estimate: R, truth: R) -> R {
    (estimate - truth).abs() / truth.abs()
}
