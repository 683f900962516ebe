//! Parametrized Hamiltonians H(g) = sum_j c_j(g) A_j.
//!
//! Each term pairs a scalar coefficient expression in `g` with a constant
//! Hermitian matrix, so the derivative dH/dg is exact (term-wise symbolic
//! differentiation). Models come from builtin constructors or from a JSON
//! model file; see [`parse_model`] for the file schema.

pub mod expr;

pub use expr::{CoefficientExpr, ExprError};

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Result, WorkbenchError};
use crate::operators::{
    hermiticity_defect, max_norm, pauli_x, pauli_y, pauli_z, ComplexMatrix, HermitianOperator,
};

/// One term of a model: a coefficient expression times a constant Hermitian
/// matrix.
#[derive(Debug, Clone)]
pub struct ModelTerm {
    coeff: CoefficientExpr,
    matrix: ComplexMatrix,
}

impl ModelTerm {
    pub fn coeff(&self) -> &CoefficientExpr {
        &self.coeff
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }
}

/// Parametrized Hamiltonian as a sum of coefficient-times-constant terms.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    dim: usize,
    terms: Vec<ModelTerm>,
    label: String,
}

impl ModelSpec {
    /// Term matrices must be square of the declared dimension and Hermitian
    /// within 1e-10 (relative, max-norm). They are stored as supplied, never
    /// silently symmetrized.
    pub fn new(
        dim: usize,
        terms: Vec<(CoefficientExpr, ComplexMatrix)>,
        label: impl Into<String>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(WorkbenchError::InvalidArgument(
                "model dimension must be positive".into(),
            ));
        }
        let mut checked = Vec::with_capacity(terms.len());
        for (idx, (coeff, matrix)) in terms.into_iter().enumerate() {
            if matrix.nrows() != dim || matrix.ncols() != dim {
                return Err(WorkbenchError::DimensionMismatch(format!(
                    "term {idx}: matrix is {}x{}, expected {dim}x{dim}",
                    matrix.nrows(),
                    matrix.ncols()
                )));
            }
            let defect = hermiticity_defect(&matrix);
            let tolerance = 1e-10 * max_norm(&matrix);
            if defect > tolerance {
                return Err(WorkbenchError::HermiticityViolation { defect, tolerance });
            }
            checked.push(ModelTerm { coeff, matrix });
        }
        Ok(Self {
            dim,
            terms: checked,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[ModelTerm] {
        &self.terms
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// H(g) = sum_j c_j(g) A_j.
    pub fn evaluate(&self, g: f64) -> HermitianOperator {
        assert!(g.is_finite(), "parameter must be finite");
        let mut h = ComplexMatrix::zeros(self.dim, self.dim);
        for term in &self.terms {
            let c = term.coeff.eval(g);
            h += term.matrix.map(|z| z * c);
        }
        HermitianOperator::from_validated(h)
    }

    /// Term-wise symbolic derivative; evaluating the result equals the
    /// entrywise derivative of `evaluate`.
    pub fn differentiate(&self) -> ModelSpec {
        ModelSpec {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|t| ModelTerm {
                    coeff: t.coeff.derivative(),
                    matrix: t.matrix.clone(),
                })
                .collect(),
            label: format!("d({})/dg", self.label),
        }
    }
}

#[derive(Deserialize)]
struct ModelFile {
    dim: usize,
    #[serde(default)]
    label: String,
    terms: Vec<TermFile>,
}

#[derive(Deserialize)]
struct TermFile {
    coeff: String,
    matrix: Vec<[f64; 2]>,
}

/// Parses a JSON model file.
///
/// Schema: `{"dim": d, "label": "...", "terms": [{"coeff": "<expr>",
/// "matrix": [[re, im], ...]}]}` where `matrix` lists the d*d entries in
/// row-major order as `[re, im]` pairs and `coeff` uses the grammar of
/// [`CoefficientExpr`]. Encoding is UTF-8.
pub fn parse_model(source: &str) -> Result<ModelSpec> {
    let file: ModelFile =
        serde_json::from_str(source).map_err(|e| WorkbenchError::ModelFormat {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
    if file.dim == 0 {
        return Err(WorkbenchError::InvalidArgument(
            "model dimension must be positive".into(),
        ));
    }
    if file.terms.is_empty() {
        return Err(WorkbenchError::InvalidArgument(
            "model must declare at least one term".into(),
        ));
    }
    let d = file.dim;
    let mut terms = Vec::with_capacity(file.terms.len());
    for (idx, term) in file.terms.iter().enumerate() {
        let coeff =
            CoefficientExpr::parse(&term.coeff).map_err(|e| WorkbenchError::ExpressionSyntax {
                term: Some(idx),
                position: e.position,
                message: e.message,
            })?;
        if term.matrix.len() != d * d {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "term {idx}: matrix has {} entries, expected {}",
                term.matrix.len(),
                d * d
            )));
        }
        let matrix = ComplexMatrix::from_fn(d, d, |i, j| {
            let [re, im] = term.matrix[i * d + j];
            Complex64::new(re, im)
        });
        terms.push((coeff, matrix));
    }
    let label = if file.label.is_empty() {
        "model".to_string()
    } else {
        file.label
    };
    ModelSpec::new(d, terms, label)
}

/// Spin-1/2 models used by the diagnostics suites and the CLI.
#[derive(Debug, Clone)]
pub enum BuiltinModel {
    /// H = B (cos(g) sx + sin(g) sz): estimate the field direction angle.
    SpinDirection { field: f64 },
    /// H = B n(g).sigma with a user-supplied unit direction n(g).
    SpinDirectionGeneral {
        field: f64,
        direction: [CoefficientExpr; 3],
    },
    /// H = B(g) n.sigma with a fixed unit direction n: estimate the
    /// amplitude parameter.
    SpinAmplitude {
        amplitude: CoefficientExpr,
        direction: [f64; 3],
    },
}

impl BuiltinModel {
    pub fn spin_direction(field: f64) -> Self {
        Self::SpinDirection { field }
    }

    pub fn spin_direction_general(field: f64, direction: [CoefficientExpr; 3]) -> Self {
        Self::SpinDirectionGeneral { field, direction }
    }

    /// The fixed direction must be unit-norm within 1e-8.
    pub fn spin_amplitude(amplitude: CoefficientExpr, direction: [f64; 3]) -> Result<Self> {
        let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        let defect = (norm - 1.0).abs();
        if defect > 1e-8 {
            return Err(WorkbenchError::InvalidArgument(format!(
                "fixed direction must be unit-norm: |n| deviates by {defect:.3e}"
            )));
        }
        Ok(Self::SpinAmplitude {
            amplitude,
            direction,
        })
    }

    pub fn label(&self) -> String {
        match self {
            Self::SpinDirection { field } => format!("spin-direction(B={field})"),
            Self::SpinDirectionGeneral { field, .. } => {
                format!("spin-direction-general(B={field})")
            }
            Self::SpinAmplitude { amplitude, .. } => format!("spin-amplitude(B={amplitude})"),
        }
    }

    /// Builds the term list for this model.
    pub fn spec(&self) -> Result<ModelSpec> {
        match self {
            Self::SpinDirection { field } => ModelSpec::new(
                2,
                vec![
                    (
                        CoefficientExpr::constant(*field)
                            * CoefficientExpr::cos(CoefficientExpr::parameter()),
                        pauli_x(),
                    ),
                    (
                        CoefficientExpr::constant(*field)
                            * CoefficientExpr::sin(CoefficientExpr::parameter()),
                        pauli_z(),
                    ),
                ],
                self.label(),
            ),
            Self::SpinDirectionGeneral { field, direction } => {
                let paulis = [pauli_x(), pauli_y(), pauli_z()];
                let terms = direction
                    .iter()
                    .zip(paulis)
                    .map(|(e, sigma)| (CoefficientExpr::constant(*field) * e.clone(), sigma))
                    .collect();
                ModelSpec::new(2, terms, self.label())
            }
            Self::SpinAmplitude {
                amplitude,
                direction,
            } => {
                let m = pauli_x().map(|z| z * direction[0])
                    + pauli_y().map(|z| z * direction[1])
                    + pauli_z().map(|z| z * direction[2]);
                ModelSpec::new(2, vec![(amplitude.clone(), m)], self.label())
            }
        }
    }

    /// Checks the unit-norm direction invariant at an evaluation point.
    /// Only the general-direction variant has a pointwise constraint.
    pub fn validate_at(&self, g: f64) -> Result<()> {
        if let Self::SpinDirectionGeneral { direction, .. } = self {
            let norm = direction
                .iter()
                .map(|e| e.eval(g).powi(2))
                .sum::<f64>()
                .sqrt();
            let defect = (norm - 1.0).abs();
            if defect > 1e-8 {
                return Err(WorkbenchError::DirectionNorm { g, defect });
            }
        }
        Ok(())
    }
}
