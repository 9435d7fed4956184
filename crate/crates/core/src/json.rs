//! JSON interchange: matrices, state bundles, observables, trajectories and
//! the result documents emitted by the command-line tool.
//!
//! Everything here is `f64`. Converters validate on the way in, so a parsed
//! document always yields well-formed library values.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::axioms::SuiteReport;
use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, ComplexMatrix, ComplexVector, HermitianOperator};
use crate::poisson::FlowResult;
use crate::states::{Observable, PureState, Sector, StateSpace, Term};
use crate::C64;

/// Version of the document schemas below.
pub const SCHEMA_VERSION: &str = "1";

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// `{"rows": n, "cols": m, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix<f64>) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        let grid = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..rows)
                .map(|i| (0..cols).map(|j| f(&m[(i, j)])).collect())
                .collect()
        };
        Self {
            rows,
            cols,
            re: grid(|z| z.re),
            im: grid(|z| z.im),
        }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix<f64>> {
        let shape_ok =
            |g: &Vec<Vec<f64>>| g.len() == self.rows && g.iter().all(|r| r.len() == self.cols);
        if !shape_ok(&self.re) || !shape_ok(&self.im) {
            return Err(invalid(format!(
                "matrix entries do not match the declared {}x{} shape",
                self.rows, self.cols
            )));
        }
        let m = ComplexMatrix::from_fn(self.rows, self.cols, |i, j| {
            C64::new(self.re[i][j], self.im[i][j])
        });
        if !crate::linalg::is_finite(&m) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn to_hermitian(&self) -> Result<HermitianOperator<f64>> {
        HermitianOperator::new(self.to_matrix()?)
    }
}

/// `{"re": [..], "im": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl VectorJson {
    pub fn from_vector(v: &ComplexVector<f64>) -> Self {
        Self {
            re: v.iter().map(|z| z.re).collect(),
            im: v.iter().map(|z| z.im).collect(),
        }
    }

    pub fn to_components(&self) -> Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            return Err(Error::DimensionMismatch {
                expected: self.re.len(),
                found: self.im.len(),
            });
        }
        Ok(self
            .re
            .iter()
            .zip(&self.im)
            .map(|(&a, &b)| C64::new(a, b))
            .collect())
    }

    pub fn to_vector(&self) -> Result<ComplexVector<f64>> {
        Ok(ComplexVector::from_vec(self.to_components()?))
    }
}

fn default_hbar() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SectorJson {
    Quantum {
        dim: usize,
        #[serde(default = "default_hbar")]
        hbar: f64,
    },
    Classical {
        points: Vec<String>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum StateJson {
    Quantum { sector: usize, vector: VectorJson },
    Classical { sector: usize, label: String },
}

impl StateJson {
    pub fn from_state(s: &PureState<f64>) -> Self {
        match (s.vector(), s.label()) {
            (Some(v), _) => StateJson::Quantum {
                sector: s.sector(),
                vector: VectorJson::from_vector(v),
            },
            (None, Some(label)) => StateJson::Classical {
                sector: s.sector(),
                label: label.to_string(),
            },
            (None, None) => unreachable!("a state is quantum or classical"),
        }
    }

    /// Resolve against a space, checking sector kind, dimension and labels.
    pub fn to_state_in(&self, space: &StateSpace<f64>) -> Result<PureState<f64>> {
        match self {
            StateJson::Quantum { sector, vector } => {
                space.make_state(*sector, &vector.to_components()?)
            }
            StateJson::Classical { sector, label } => space.classical_state(*sector, label),
        }
    }

    /// Resolve without a space; quantum states only need their vector.
    pub fn to_state(&self) -> Result<PureState<f64>> {
        match self {
            StateJson::Quantum { sector, vector } => {
                PureState::from_vector(*sector, &vector.to_vector()?)
            }
            StateJson::Classical { sector, label } => Ok(PureState::classical(*sector, label)),
        }
    }
}

/// A state space plus an optional list of states in it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleJson {
    pub sectors: Vec<SectorJson>,
    #[serde(default)]
    pub states: Vec<StateJson>,
}

impl BundleJson {
    pub fn from_space(space: &StateSpace<f64>, states: &[PureState<f64>]) -> Self {
        let sectors = space
            .sectors()
            .iter()
            .map(|s| match s {
                Sector::Quantum { dim, hbar } => SectorJson::Quantum {
                    dim: *dim,
                    hbar: *hbar,
                },
                Sector::Classical { points } => SectorJson::Classical {
                    points: points.clone(),
                },
            })
            .collect();
        Self {
            sectors,
            states: states.iter().map(StateJson::from_state).collect(),
        }
    }

    pub fn to_space(&self) -> Result<StateSpace<f64>> {
        let sectors = self
            .sectors
            .iter()
            .map(|s| match s {
                SectorJson::Quantum { dim, hbar } => Sector::Quantum {
                    dim: *dim,
                    hbar: *hbar,
                },
                SectorJson::Classical { points } => Sector::Classical {
                    points: points.clone(),
                },
            })
            .collect();
        StateSpace::new(sectors)
    }

    pub fn load(&self) -> Result<(StateSpace<f64>, Vec<PureState<f64>>)> {
        let space = self.to_space()?;
        let states = self
            .states
            .iter()
            .map(|s| s.to_state_in(&space))
            .collect::<Result<Vec<_>>>()?;
        Ok((space, states))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub state: StateJson,
}

/// `Σ μᵢ p_{ρᵢ}` on one sector. `operator` may replace or accompany the
/// terms; when both are present they must agree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableJson {
    pub sector: usize,
    #[serde(default)]
    pub terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MatrixJson>,
}

impl ObservableJson {
    pub fn from_observable(f: &Observable<f64>) -> Result<Self> {
        let (sector, _) = f.single_sector()?;
        Ok(Self {
            sector,
            terms: f
                .terms()
                .iter()
                .map(|t| TermJson {
                    re: t.coeff.re,
                    im: t.coeff.im,
                    state: StateJson::from_state(&t.state),
                })
                .collect(),
            operator: f.operator_form(sector).map(MatrixJson::from_matrix),
        })
    }

    pub fn to_observable(&self) -> Result<Observable<f64>> {
        if self.terms.is_empty() {
            let op = self
                .operator
                .as_ref()
                .ok_or_else(|| invalid("observable needs terms or an operator"))?;
            return Observable::from_operator(self.sector, &op.to_hermitian()?);
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            let state = t.state.to_state()?;
            if state.sector() != self.sector {
                return Err(Error::SectorMismatch {
                    expected: self.sector,
                    found: state.sector(),
                });
            }
            terms.push(Term {
                coeff: C64::new(t.re, t.im),
                state,
            });
        }
        let f = Observable::from_terms(terms)?;
        if let (Some(op), Some(form)) = (&self.operator, f.operator_form(self.sector)) {
            let gap = max_abs_diff(&op.to_matrix()?, form);
            if gap > crate::linalg::DEFAULT_TOL {
                return Err(invalid(format!(
                    "operator disagrees with the term list by {gap:e}"
                )));
            }
        }
        Ok(f)
    }
}

/// A Hamiltonian given either as a bare matrix or as an observable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum HamiltonianJson {
    Matrix(MatrixJson),
    Observable(ObservableJson),
}

impl HamiltonianJson {
    pub fn to_operator(&self) -> Result<HermitianOperator<f64>> {
        match self {
            HamiltonianJson::Matrix(m) => m.to_hermitian(),
            HamiltonianJson::Observable(o) => {
                let f = o.to_observable()?;
                f.hermitian_form(o.sector)
            }
        }
    }
}

/// An initial state given as a bundle (first state used), a state record or
/// a bare vector in sector 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialStateJson {
    Bundle(BundleJson),
    State(StateJson),
    Vector(VectorJson),
}

impl InitialStateJson {
    pub fn to_state(&self) -> Result<PureState<f64>> {
        match self {
            InitialStateJson::Bundle(b) => {
                let (_, states) = b.load()?;
                states
                    .into_iter()
                    .next()
                    .ok_or_else(|| invalid("bundle contains no states"))
            }
            InitialStateJson::State(s) => s.to_state(),
            InitialStateJson::Vector(v) => PureState::from_vector(0, &v.to_vector()?),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub state: StateJson,
}

pub fn trajectory_json(flow: &FlowResult<f64>) -> Vec<TrajectoryPoint> {
    flow.trajectory
        .iter()
        .map(|(t, s)| TrajectoryPoint {
            t: *t,
            state: StateJson::from_state(s),
        })
        .collect()
}

/// Output of `flow --compare`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowComparisonJson {
    pub method: String,
    pub max_distance: f64,
    pub tol: f64,
    pub pass: bool,
    pub trajectory: Vec<TrajectoryPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbarSectorJson {
    pub sector: usize,
    pub true_hbar: f64,
    pub hbar_est: f64,
    pub rel_error: f64,
    pub samples: usize,
}

/// Output of `hbar`. `hbar_est` is the estimate of the first sector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HbarJson {
    pub hbar_est: f64,
    pub sectors: Vec<HbarSectorJson>,
    pub tol: f64,
    pub pass: bool,
}

/// Output of `reconstruct`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReconstructionJson {
    pub blocks: Vec<usize>,
    pub span_ranks: Vec<usize>,
    pub membership_residual: f64,
    pub assoc_residual: f64,
    pub oracle_residual: f64,
    pub cross_sector_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Output of `lattice`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeJson {
    pub dim: usize,
    pub pairs: usize,
    pub orthomodular_pass: bool,
    pub covering_pass: bool,
    pub orthomodular_failures: usize,
    pub covering_failures: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DocumentKind {
    Matrix,
    Vector,
    Bundle,
    Observable,
    Trajectory,
    FlowComparison,
    SuiteReport,
    Hbar,
    Reconstruction,
    Lattice,
}

impl DocumentKind {
    pub fn name(self) -> &'static str {
        match self {
            DocumentKind::Matrix => "matrix",
            DocumentKind::Vector => "vector",
            DocumentKind::Bundle => "bundle",
            DocumentKind::Observable => "observable",
            DocumentKind::Trajectory => "trajectory",
            DocumentKind::FlowComparison => "flow-comparison",
            DocumentKind::SuiteReport => "suite-report",
            DocumentKind::Hbar => "hbar",
            DocumentKind::Reconstruction => "reconstruction",
            DocumentKind::Lattice => "lattice",
        }
    }
}

fn strict<T: for<'de> Deserialize<'de>>(value: Value, kind: DocumentKind) -> Result<T> {
    serde_json::from_value(value)
        .map_err(|e| invalid(format!("not a valid {} document: {e}", kind.name())))
}

/// Identify a document by its keys and check it against that schema,
/// including the semantic checks the converters perform.
pub fn validate_document(text: &str) -> Result<DocumentKind> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| invalid(format!("malformed JSON: {e}")))?;
    let has = |k: &str| value.get(k).is_some();
    let kind = if value.is_array() {
        DocumentKind::Trajectory
    } else if !value.is_object() {
        return Err(invalid("expected a JSON object or array"));
    } else if has("suite") {
        DocumentKind::SuiteReport
    } else if has("rows") {
        DocumentKind::Matrix
    } else if has("sectors") && has("hbar_est") {
        DocumentKind::Hbar
    } else if has("sectors") {
        DocumentKind::Bundle
    } else if has("blocks") {
        DocumentKind::Reconstruction
    } else if has("orthomodular_pass") {
        DocumentKind::Lattice
    } else if has("max_distance") {
        DocumentKind::FlowComparison
    } else if has("terms") || has("operator") {
        DocumentKind::Observable
    } else if has("re") {
        DocumentKind::Vector
    } else {
        return Err(invalid("unrecognised document"));
    };
    match kind {
        DocumentKind::Matrix => {
            strict::<MatrixJson>(value, kind)?.to_matrix()?;
        }
        DocumentKind::Vector => {
            strict::<VectorJson>(value, kind)?.to_vector()?;
        }
        DocumentKind::Bundle => {
            strict::<BundleJson>(value, kind)?.load()?;
        }
        DocumentKind::Observable => {
            strict::<ObservableJson>(value, kind)?.to_observable()?;
        }
        DocumentKind::Trajectory => {
            for p in strict::<Vec<TrajectoryPoint>>(value, kind)? {
                p.state.to_state()?;
            }
        }
        DocumentKind::FlowComparison => {
            for p in strict::<FlowComparisonJson>(value, kind)?.trajectory {
                p.state.to_state()?;
            }
        }
        DocumentKind::SuiteReport => {
            let report: SuiteReport = strict(value, kind)?;
            if report.pass != report.checks.iter().all(|c| c.pass) {
                return Err(invalid("overall pass flag disagrees with the checks"));
            }
        }
        DocumentKind::Hbar => {
            strict::<HbarJson>(value, kind)?;
        }
        DocumentKind::Reconstruction => {
            strict::<ReconstructionJson>(value, kind)?;
        }
        DocumentKind::Lattice => {
            strict::<LatticeJson>(value, kind)?;
        }
    }
    Ok(kind)
}
