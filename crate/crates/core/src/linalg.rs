//! Dense complex linear algebra: Hermitian operators, their spectral
//! decomposition, the unitary group they generate, and seeded samplers.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::{c, cr, Real};

pub type ComplexMatrix<R> = DMatrix<Complex<R>>;
pub type ComplexVector<R> = DVector<Complex<R>>;

/// Allowed `‖A − A†‖_max` (relative to `max(1, ‖A‖_max)`) when building a
/// [`HermitianOperator`] from arbitrary input.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are grouped into one eigenspace.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Default algebraic tolerance for numerical checks.
pub const DEFAULT_TOL: f64 = 1e-9;

const MAX_EIGEN_ITERATIONS: usize = 10_000;

/// Largest entry modulus.
pub fn max_abs<R: Real>(m: &ComplexMatrix<R>) -> R {
    m.iter().fold(R::zero(), |acc, z| acc.max(z.modulus()))
}

/// `‖a − b‖_max`; `R::max_value()` when shapes differ.
pub fn max_abs_diff<R: Real>(a: &ComplexMatrix<R>, b: &ComplexMatrix<R>) -> R {
    if a.shape() != b.shape() {
        return R::max_value().unwrap_or_else(R::one);
    }
    a.iter()
        .zip(b.iter())
        .fold(R::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

pub fn is_finite<R: Real>(m: &ComplexMatrix<R>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace<R: Real>(m: &ComplexMatrix<R>) -> Complex<R> {
    (0..m.nrows().min(m.ncols())).fold(Complex::new(R::zero(), R::zero()), |acc, k| acc + m[(k, k)])
}

/// `Tr(a b)` without forming the product.
pub fn trace_product<R: Real>(a: &ComplexMatrix<R>, b: &ComplexMatrix<R>) -> Complex<R> {
    let n = a.nrows();
    let mut acc = cr(R::zero());
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn commutator<R: Real>(a: &ComplexMatrix<R>, b: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    a * b - b * a
}

pub fn anticommutator<R: Real>(a: &ComplexMatrix<R>, b: &ComplexMatrix<R>) -> ComplexMatrix<R> {
    a * b + b * a
}

/// `⟨a|b⟩ = Σ conj(aᵢ) bᵢ`, summed in index order so that
/// `inner(a, b) == inner(b, a).conj()` holds bit for bit.
pub fn inner<R: Real>(a: &ComplexVector<R>, b: &ComplexVector<R>) -> Complex<R> {
    let mut acc = cr(R::zero());
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x.conj() * *y;
    }
    acc
}

/// `|a⟩⟨b|`.
pub fn outer<R: Real>(a: &ComplexVector<R>, b: &ComplexVector<R>) -> ComplexMatrix<R> {
    a * b.adjoint()
}

/// `‖U U† − I‖_max`.
pub fn unitarity_defect<R: Real>(u: &ComplexMatrix<R>) -> R {
    let n = u.nrows();
    max_abs_diff(&(u * u.adjoint()), &ComplexMatrix::identity(n, n))
}

/// Complex self-adjoint square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<R: Real> {
    matrix: ComplexMatrix<R>,
}

impl<R: Real> HermitianOperator<R> {
    /// Validate and symmetrize an arbitrary square matrix.
    pub fn new(matrix: ComplexMatrix<R>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        if matrix.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if !is_finite(&matrix) {
            return Err(Error::NonFinite);
        }
        let deviation = max_abs_diff(&matrix, &matrix.adjoint());
        let scale = max_abs(&matrix).max(R::one());
        if deviation > R::tol(HERMITICITY_TOL) * scale {
            return Err(Error::NotHermitian {
                deviation: deviation.to_f64_lossy(),
            });
        }
        Ok(Self::symmetrize(matrix))
    }

    /// `(M + M†)/2` without any check; for matrices Hermitian up to rounding.
    pub fn symmetrize(matrix: ComplexMatrix<R>) -> Self {
        let half = cr(R::lit(0.5));
        let matrix = (&matrix + matrix.adjoint()) * half;
        Self { matrix }
    }

    pub fn from_real_diagonal(diag: &[R]) -> Self {
        let n = diag.len();
        let matrix = ComplexMatrix::from_fn(
            n,
            n,
            |i, j| if i == j { cr(diag[i]) } else { cr(R::zero()) },
        );
        Self { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<R> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<R> {
        self.matrix
    }

    pub fn scale(&self, s: R) -> Self {
        Self {
            matrix: &self.matrix * cr(s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    /// Conjugation `U A U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix<R>) -> Self {
        Self::symmetrize(u * &self.matrix * u.adjoint())
    }

    /// `⟨ψ|A|ψ⟩` for a unit vector.
    pub fn expectation_in(&self, psi: &ComplexVector<R>) -> R {
        inner(psi, &(&self.matrix * psi)).re
    }
}

pub fn pauli_x<R: Real>() -> HermitianOperator<R> {
    let (o, l) = (cr(R::zero()), cr(R::one()));
    HermitianOperator::symmetrize(ComplexMatrix::from_row_slice(2, 2, &[o, l, l, o]))
}

pub fn pauli_y<R: Real>() -> HermitianOperator<R> {
    let o = cr(R::zero());
    let i = c(R::zero(), R::one());
    HermitianOperator::symmetrize(ComplexMatrix::from_row_slice(2, 2, &[o, -i, i, o]))
}

pub fn pauli_z<R: Real>() -> HermitianOperator<R> {
    HermitianOperator::from_real_diagonal(&[R::one(), -R::one()])
}

/// Spectral decomposition `A = Σ λⱼ |vⱼ⟩⟨vⱼ|` with eigenvalues descending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition<R: Real> {
    pub eigenvalues: Vec<R>,
    /// Orthonormal eigenvectors as columns, eigenvalues descending.
    pub eigenvectors: ComplexMatrix<R>,
}

impl<R: Real> EigenDecomposition<R> {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> ComplexVector<R> {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix<R> {
        self.apply(|x| x)
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn apply(&self, f: impl Fn(R) -> R) -> ComplexMatrix<R> {
        let v = &self.eigenvectors;
        let scaled = ComplexMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
            v[(i, j)] * cr(f(self.eigenvalues[j]))
        });
        scaled * v.adjoint()
    }

    /// Partition of indices into runs whose neighbouring eigenvalues differ by
    /// less than `gap`.
    pub fn groups(&self, gap: R) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            match groups.last_mut() {
                Some(g) if (self.eigenvalues[*g.last().unwrap()] - lambda).abs() < gap => g.push(k),
                _ => groups.push(vec![k]),
            }
        }
        groups
    }

    /// Eigenprojectors with the mean eigenvalue of each group.
    pub fn eigenprojectors(&self, gap: R) -> Vec<(R, ComplexMatrix<R>)> {
        let n = self.dim();
        self.groups(gap)
            .into_iter()
            .map(|g| {
                let mut p = ComplexMatrix::zeros(n, n);
                let mut mean = R::zero();
                for &k in &g {
                    let v = self.eigenvector(k);
                    p += outer(&v, &v);
                    mean += self.eigenvalues[k];
                }
                (mean / R::from_usize(g.len()).unwrap(), p)
            })
            .collect()
    }
}

pub fn eig_hermitian<R: Real>(a: &HermitianOperator<R>) -> Result<EigenDecomposition<R>> {
    let n = a.dim();
    let se = SymmetricEigen::try_new(a.matrix.clone(), R::default_epsilon(), MAX_EIGEN_ITERATIONS)
        .ok_or(Error::ConvergenceFailure)?;
    if se.eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::ConvergenceFailure);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("finite eigenvalues")
    });
    let eigenvalues = order.iter().map(|&k| se.eigenvalues[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, k| se.eigenvectors[(r, order[k])]);
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(i s A)` through the spectral decomposition of `A`.
pub fn expm_skew<R: Real>(a: &HermitianOperator<R>, s: R) -> Result<ComplexMatrix<R>> {
    if !s.is_finite() {
        return Err(Error::InvalidInput("non-finite exponent scale".into()));
    }
    let eig = eig_hermitian(a)?;
    Ok(unitary_from_eig(&eig, s))
}

/// `V exp(i s Λ) V†` for an existing decomposition.
pub fn unitary_from_eig<R: Real>(eig: &EigenDecomposition<R>, s: R) -> ComplexMatrix<R> {
    let v = &eig.eigenvectors;
    let scaled = ComplexMatrix::from_fn(v.nrows(), v.ncols(), |i, j| {
        let theta = s * eig.eigenvalues[j];
        v[(i, j)] * c(theta.cos(), theta.sin())
    });
    scaled * v.adjoint()
}

/// Complex Gaussian with `E|z|² = 1`.
pub fn standard_complex_gaussian<R: Real, G: Rng + ?Sized>(rng: &mut G) -> Complex<R> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    c(R::lit(re * s), R::lit(im * s))
}

/// Haar-distributed unit vector (normalized complex Gaussian).
pub fn random_unit_vector<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> ComplexVector<R> {
    assert!(dim >= 1, "dimension must be positive");
    loop {
        let v = ComplexVector::from_fn(dim, |_, _| standard_complex_gaussian::<R, G>(rng));
        let norm = v.norm();
        if norm > R::zero() {
            return v.unscale(norm);
        }
    }
}

/// GUE-style sample `(G + G†)/2`.
pub fn random_hermitian<R: Real, G: Rng + ?Sized>(dim: usize, rng: &mut G) -> HermitianOperator<R> {
    assert!(dim >= 1, "dimension must be positive");
    let mut g = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = standard_complex_gaussian::<R, G>(rng);
        }
    }
    HermitianOperator::symmetrize(g)
}

/// Singular values of a real matrix, descending.
pub fn singular_values<R: Real>(m: &DMatrix<R>) -> Result<Vec<R>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(
        m.clone(),
        false,
        false,
        R::default_epsilon(),
        MAX_EIGEN_ITERATIONS,
    )
    .ok_or(Error::ConvergenceFailure)?;
    let mut s: Vec<R> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(s)
}

/// Number of singular values above `rel · σ_max`.
pub fn numerical_rank<R: Real>(m: &DMatrix<R>, rel: R) -> Result<usize> {
    let s = singular_values(m)?;
    let Some(&largest) = s.first() else {
        return Ok(0);
    };
    if largest <= R::zero() {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&x| x > rel * largest).count())
}

/// Orthonormal basis of `{x : M x = 0}` for a complex matrix, using singular
/// values below `threshold` (absolute).
pub fn null_space<R: Real>(m: &ComplexMatrix<R>, threshold: R) -> Result<Vec<ComplexVector<R>>> {
    let n = m.ncols();
    if m.nrows() < n {
        // pad so that V† is square
        let mut padded = ComplexMatrix::zeros(n, n);
        padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        return null_space(&padded, threshold);
    }
    let svd = SVD::try_new(
        m.clone(),
        false,
        true,
        R::default_epsilon(),
        MAX_EIGEN_ITERATIONS,
    )
    .ok_or(Error::ConvergenceFailure)?;
    let v_t = svd.v_t.ok_or(Error::ConvergenceFailure)?;
    Ok(svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s < threshold)
        .map(|(k, _)| v_t.row(k).adjoint())
        .collect())
}

/// Real coordinates of a Hermitian matrix in an orthonormal basis of the
/// `n²`-dimensional real space of Hermitian matrices (Hilbert–Schmidt inner
/// product).
pub fn hermitian_coordinates<R: Real>(m: &ComplexMatrix<R>) -> DVector<R> {
    let n = m.nrows();
    let sqrt2 = R::lit(std::f64::consts::SQRT_2);
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        out.push(m[(i, i)].re);
    }
    for i in 0..n {
        for j in (i + 1)..n {
            out.push(m[(i, j)].re * sqrt2);
            out.push(m[(i, j)].im * sqrt2);
        }
    }
    DVector::from_vec(out)
}

/// The `n²` Hermitian matrices `Eₖₖ`, `Eⱼₖ + Eₖⱼ`, `−iEⱼₖ + iEₖⱼ`.
pub fn hermitian_basis<R: Real>(n: usize) -> Vec<HermitianOperator<R>> {
    let mut basis = Vec::with_capacity(n * n);
    let one = cr(R::one());
    let i = c(R::zero(), R::one());
    for k in 0..n {
        let mut m = ComplexMatrix::zeros(n, n);
        m[(k, k)] = one;
        basis.push(HermitianOperator { matrix: m });
    }
    for j in 0..n {
        for k in (j + 1)..n {
            let mut m = ComplexMatrix::zeros(n, n);
            m[(j, k)] = one;
            m[(k, j)] = one;
            basis.push(HermitianOperator { matrix: m });
            let mut m = ComplexMatrix::zeros(n, n);
            m[(j, k)] = -i;
            m[(k, j)] = i;
            basis.push(HermitianOperator { matrix: m });
        }
    }
    basis
}
