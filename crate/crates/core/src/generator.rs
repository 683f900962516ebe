//! The local parameter-translation generator h = i (dU/dg) U^dagger of the
//! evolution U(g) = exp(-i t H(g)), computed by four independent routes:
//!
//! * central finite differences on U(g) itself,
//! * adaptive Simpson quadrature of h = int_0^t e^{-i mu H} dH e^{i mu H} dmu,
//! * eigendecomposition of the commutator superoperator G -> [H, G],
//! * the closed form from the spectral data of H(g).
//!
//! The finite-difference route serves as the independent oracle for the
//! other three.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WorkbenchError};
use crate::model::ModelSpec;
use crate::operators::{
    eigendecompose, hermitian_part, hermiticity_defect, hs_inner, max_norm, ComplexMatrix,
    HermitianOperator, SpectralDecomposition, IM,
};

/// Which formula produced a [`GeneratorResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorRoute {
    FiniteDiff,
    Quadrature,
    Superoperator,
    Spectral,
    ShortTime,
}

impl std::fmt::Display for GeneratorRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::FiniteDiff => "finite_diff",
            Self::Quadrature => "quadrature",
            Self::Superoperator => "superoperator",
            Self::Spectral => "spectral",
            Self::ShortTime => "short_time",
        };
        write!(f, "{name}")
    }
}

/// Route-specific metadata attached to a generator computation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct GeneratorDiagnostics {
    /// Max-norm of h - h^dagger before any symmetrization.
    pub hermiticity_defect: f64,
    /// Central-difference step (finite-difference route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
    /// Entrywise absolute error estimate (quadrature route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_error: Option<f64>,
    /// Number of accepted panels (quadrature route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadrature_panels: Option<usize>,
    /// Number of zero modes of the superoperator (superoperator route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_mode_count: Option<usize>,
    /// Number of degeneracy clusters of H(g) (spectral route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cluster_count: Option<usize>,
    /// Cross-cluster pairs treated with the small-gap limit (spectral route).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degenerate_gap_pairs: Option<usize>,
}

/// A computed translation generator together with its provenance.
#[derive(Debug, Clone)]
pub struct GeneratorResult {
    pub h: HermitianOperator,
    pub route: GeneratorRoute,
    pub g: f64,
    pub t: f64,
    pub diagnostics: GeneratorDiagnostics,
}

/// Hermiticity budget for a generator produced by any route.
const GENERATOR_HERMITICITY_TOL: f64 = 1e-8;

/// Default central-difference step for the finite-difference route.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Default entrywise error target for the quadrature route.
pub const DEFAULT_QUADRATURE_TOL: f64 = 1e-9;

/// Panel cap for the adaptive quadrature.
pub const QUADRATURE_PANEL_LIMIT: usize = 1 << 20;

fn finish(
    route: GeneratorRoute,
    g: f64,
    t: f64,
    mat: ComplexMatrix,
    mut diagnostics: GeneratorDiagnostics,
) -> Result<GeneratorResult> {
    let defect = hermiticity_defect(&mat);
    diagnostics.hermiticity_defect = defect;
    let tolerance = GENERATOR_HERMITICITY_TOL * max_norm(&mat).max(1.0);
    if defect > tolerance {
        return Err(WorkbenchError::HermiticityViolation { defect, tolerance });
    }
    Ok(GeneratorResult {
        h: HermitianOperator::from_validated(mat),
        route,
        g,
        t,
        diagnostics,
    })
}

/// h via central differences: i [U(g+step) - U(g-step)] / (2 step) U(g)^dagger,
/// symmetrized to (h + h^dagger)/2 with the pre-symmetrization defect recorded.
pub fn generator_finite_difference(
    spec: &ModelSpec,
    g: f64,
    t: f64,
    step: f64,
) -> Result<GeneratorResult> {
    if !step.is_finite() || step <= 0.0 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let u_at = |gv: f64| -> Result<ComplexMatrix> {
        let decomp = eigendecompose(&spec.evaluate(gv), None)?;
        Ok(decomp.evolution_matrix(t))
    };
    let u_plus = u_at(g + step)?;
    let u_minus = u_at(g - step)?;
    let u = u_at(g)?;
    let du = (u_plus - u_minus).map(|z| z / (2.0 * step));
    let raw = (du * u.adjoint()).map(|z| z * IM);
    let defect = hermiticity_defect(&raw);
    let sym = hermitian_part(&raw);
    let mut result = finish(
        GeneratorRoute::FiniteDiff,
        g,
        t,
        sym,
        GeneratorDiagnostics {
            fd_step: Some(step),
            ..Default::default()
        },
    )?;
    result.diagnostics.hermiticity_defect = defect;
    Ok(result)
}

/// h = t dH, the first-order approximation valid for t << 1 (exact whenever
/// dH commutes with H).
pub fn generator_short_time(spec: &ModelSpec, g: f64, t: f64) -> GeneratorResult {
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    GeneratorResult {
        h: HermitianOperator::from_validated(d_h.map(|z| z * t)),
        route: GeneratorRoute::ShortTime,
        g,
        t,
        diagnostics: GeneratorDiagnostics::default(),
    }
}

struct SimpsonRun<'a> {
    integrand: &'a dyn Fn(f64) -> ComplexMatrix,
    panels: usize,
    error_estimate: f64,
    tol: f64,
}

impl SimpsonRun<'_> {
    fn simpson(
        fa: &ComplexMatrix,
        fm: &ComplexMatrix,
        fb: &ComplexMatrix,
        h: f64,
    ) -> ComplexMatrix {
        (fa + fm.map(|z| z * 4.0) + fb).map(|z| z * (h / 6.0))
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &mut self,
        a: f64,
        b: f64,
        fa: &ComplexMatrix,
        fm: &ComplexMatrix,
        fb: &ComplexMatrix,
        whole: &ComplexMatrix,
        tol: f64,
        depth: usize,
    ) -> Result<ComplexMatrix> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = (self.integrand)(lm);
        let frm = (self.integrand)(rm);
        let left = Self::simpson(fa, &flm, fm, m - a);
        let right = Self::simpson(fm, &frm, fb, b - m);
        let refined = &left + &right;
        let diff = max_norm(&(&refined - whole));
        if diff <= 15.0 * tol || depth >= 48 {
            self.panels += 2;
            if self.panels > QUADRATURE_PANEL_LIMIT {
                return Err(WorkbenchError::QuadratureLimit {
                    limit: QUADRATURE_PANEL_LIMIT,
                    tolerance: self.tol,
                });
            }
            if depth >= 48 && diff > 15.0 * tol {
                return Err(WorkbenchError::QuadratureLimit {
                    limit: QUADRATURE_PANEL_LIMIT,
                    tolerance: self.tol,
                });
            }
            self.error_estimate += diff / 15.0;
            // Richardson extrapolation of the composite estimate.
            return Ok(&refined + (&refined - whole).map(|z| z / 15.0));
        }
        let left_out = self.refine(a, m, fa, &flm, fm, &left, 0.5 * tol, depth + 1)?;
        let right_out = self.refine(m, b, fm, &frm, fb, &right, 0.5 * tol, depth + 1)?;
        Ok(left_out + right_out)
    }
}

/// h = int_0^t e^{-i mu H} dH e^{i mu H} dmu via adaptive composite Simpson
/// with an entrywise absolute error target.
pub fn generator_quadrature(spec: &ModelSpec, g: f64, t: f64, tol: f64) -> Result<GeneratorResult> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "quadrature tolerance must be positive, got {tol}"
        )));
    }
    let d = spec.dim();
    if t == 0.0 {
        return finish(
            GeneratorRoute::Quadrature,
            g,
            t,
            ComplexMatrix::zeros(d, d),
            GeneratorDiagnostics {
                quadrature_error: Some(0.0),
                quadrature_panels: Some(0),
                ..Default::default()
            },
        );
    }
    let decomp = eigendecompose(&spec.evaluate(g), None)?;
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let integrand = move |mu: f64| -> ComplexMatrix {
        let u = decomp.evolution_matrix(mu);
        &u * &d_h * u.adjoint()
    };
    let mut run = SimpsonRun {
        integrand: &integrand,
        panels: 0,
        error_estimate: 0.0,
        tol,
    };
    let (a, b) = (0.0, t);
    let m = 0.5 * (a + b);
    let fa = (run.integrand)(a);
    let fm = (run.integrand)(m);
    let fb = (run.integrand)(b);
    let whole = SimpsonRun::simpson(&fa, &fm, &fb, b - a);
    let result = run.refine(a, b, &fa, &fm, &fb, &whole, tol, 0)?;
    let diagnostics = GeneratorDiagnostics {
        quadrature_error: Some(run.error_estimate),
        quadrature_panels: Some(run.panels.max(1)),
        ..Default::default()
    };
    finish(GeneratorRoute::Quadrature, g, t, result, diagnostics)
}

/// The commutator map G -> [H(g), G] represented on the orthonormal basis of
/// matrix units, together with its eigensystem and the expansion coefficients
/// of dH in that eigenbasis.
#[derive(Debug, Clone)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigen_operators: Vec<ComplexMatrix>,
    coefficients: Vec<Complex64>,
}

impl Superoperator {
    /// Hilbert-space dimension d (the matrix acts on d^2 components).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The d^2 x d^2 Hermitian matrix representation.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Real eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// HS-orthonormal eigen-operators, ordered like `eigenvalues`.
    pub fn eigen_operators(&self) -> &[ComplexMatrix] {
        &self.eigen_operators
    }

    /// c_k = Tr(G_k^dagger dH).
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn spectral_range(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Default zero-mode threshold: 1e-8 of the spectral range with a small
    /// absolute floor.
    pub fn default_zero_tol(&self) -> f64 {
        let scale = self
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, l| acc.max(l.abs()))
            .max(1.0);
        1e-8 * self.spectral_range() + 1e-12 * scale
    }
}

/// Builds the superoperator of H(g) on the matrix-unit basis. With row-major
/// vectorization the matrix is kron(H, I) - kron(I, H^T), which is exactly
/// Hermitian for Hermitian H.
pub fn build_superoperator(spec: &ModelSpec, g: f64) -> Result<Superoperator> {
    let d = spec.dim();
    let h = hermitian_part(spec.evaluate(g).matrix());
    let d_h = hermitian_part(spec.differentiate().evaluate(g).matrix());
    let eye = ComplexMatrix::identity(d, d);
    let matrix = h.kronecker(&eye) - eye.kronecker(&h.transpose());

    let wrapped = HermitianOperator::from_validated(matrix.clone());
    let decomp = eigendecompose(&wrapped, None)?;
    let eigenvalues = decomp.eigenvalues().to_vec();
    let mut eigen_operators = Vec::with_capacity(d * d);
    let mut coefficients = Vec::with_capacity(d * d);
    for k in 0..d * d {
        let col = decomp.eigenvectors().column(k);
        // Row-major reshape of the length-d^2 eigenvector.
        let gamma = ComplexMatrix::from_fn(d, d, |i, j| col[i * d + j]);
        let c = hs_inner(&gamma, &d_h)?;
        eigen_operators.push(gamma);
        coefficients.push(c);
    }
    Ok(Superoperator {
        dim: d,
        matrix,
        eigenvalues,
        eigen_operators,
        coefficients,
    })
}

/// h assembled from the superoperator eigensystem:
/// t sum_{zero modes} c_k G_k - i sum_{nonzero} (1 - e^{-i l_k t})/l_k c_k G_k.
///
/// `zero_tol` separates zero modes; `None` selects
/// [`Superoperator::default_zero_tol`]. An eigenvalue in
/// (zero_tol, 10 zero_tol] is rejected as ambiguous.
pub fn generator_superoperator(
    spec: &ModelSpec,
    g: f64,
    t: f64,
    zero_tol: Option<f64>,
) -> Result<GeneratorResult> {
    if let Some(tol) = zero_tol {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(WorkbenchError::InvalidArgument(format!(
                "zero_tol must be positive, got {tol}"
            )));
        }
    }
    let superop = build_superoperator(spec, g)?;
    let ztol = zero_tol.unwrap_or_else(|| superop.default_zero_tol());
    for &lambda in superop.eigenvalues() {
        let mag = lambda.abs();
        if mag > ztol && mag <= 10.0 * ztol {
            return Err(WorkbenchError::AmbiguousZeroMode {
                value: lambda,
                lo: ztol,
                hi: 10.0 * ztol,
            });
        }
    }
    let d = superop.dim();
    let mut h = ComplexMatrix::zeros(d, d);
    let mut zero_modes = 0usize;
    for (k, &lambda) in superop.eigenvalues().iter().enumerate() {
        let c = superop.coefficients()[k];
        let weight = if lambda.abs() <= ztol {
            zero_modes += 1;
            Complex64::new(t, 0.0)
        } else {
            let lt = Complex64::new(lambda * t, 0.0);
            -IM * (Complex64::new(1.0, 0.0) - (-IM * lt).exp()) / Complex64::new(lambda, 0.0)
        };
        h += superop.eigen_operators()[k].map(|z| z * (c * weight));
    }
    finish(
        GeneratorRoute::Superoperator,
        g,
        t,
        h,
        GeneratorDiagnostics {
            zero_mode_count: Some(zero_modes),
            ..Default::default()
        },
    )
}

/// Oscillatory weight -i (1 - e^{-i l t})/l = 2 e^{-i l t / 2} sin(l t / 2)/l,
/// with analytic limit t as l -> 0.
fn oscillatory_weight(lambda: f64, t: f64) -> Complex64 {
    let half = 0.5 * lambda * t;
    let phase = (-IM * Complex64::new(half, 0.0)).exp();
    phase * (2.0 * half.sin() / lambda)
}

/// Assembles the generator from spectral data of H(g): block (k, l) of dH in
/// the eigenbasis is weighted by t inside a cluster and by the oscillatory
/// factor across clusters. Cross-cluster gaps below `gap_floor` use the
/// analytic small-gap limit t; the number of such pairs is returned.
pub fn assemble_spectral_generator(
    decomp: &SpectralDecomposition,
    d_h: &ComplexMatrix,
    t: f64,
    gap_floor: f64,
) -> (ComplexMatrix, usize) {
    let v = decomp.eigenvectors();
    let mut w = v.adjoint() * d_h * v;
    let cluster_of = decomp.cluster_index_map();
    let clusters = decomp.clusters();
    let d = decomp.dim();
    let mut degenerate_pairs = 0usize;
    for i in 0..d {
        for j in 0..d {
            let (ci, cj) = (cluster_of[i], cluster_of[j]);
            let weight = if ci == cj {
                Complex64::new(t, 0.0)
            } else {
                let gap = clusters[ci].value - clusters[cj].value;
                if gap.abs() < gap_floor {
                    degenerate_pairs += 1;
                    Complex64::new(t, 0.0)
                } else {
                    oscillatory_weight(gap, t)
                }
            };
            w[(i, j)] *= weight;
        }
    }
    (v * w * v.adjoint(), degenerate_pairs / 2)
}

/// Floor below which a cross-cluster gap is treated as degenerate.
pub fn default_gap_floor(decomp: &SpectralDecomposition) -> f64 {
    1e-7 * decomp.spectral_range()
}

/// h from the eigendecomposition of H(g): a linear-in-t part from the
/// projected diagonal blocks of dH plus oscillatory cross-cluster blocks.
pub fn generator_spectral(
    spec: &ModelSpec,
    g: f64,
    t: f64,
    cluster_tol: Option<f64>,
) -> Result<GeneratorResult> {
    let decomp = eigendecompose(&spec.evaluate(g), cluster_tol)?;
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let gap_floor = default_gap_floor(&decomp);
    let (h, degenerate_pairs) = assemble_spectral_generator(&decomp, &d_h, t, gap_floor);
    finish(
        GeneratorRoute::Spectral,
        g,
        t,
        h,
        GeneratorDiagnostics {
            cluster_count: Some(decomp.clusters().len()),
            degenerate_gap_pairs: Some(degenerate_pairs),
            ..Default::default()
        },
    )
}

/// Dispatches to the route named by `route` with its default tolerances.
pub fn generator(
    spec: &ModelSpec,
    g: f64,
    t: f64,
    route: GeneratorRoute,
) -> Result<GeneratorResult> {
    match route {
        GeneratorRoute::FiniteDiff => generator_finite_difference(spec, g, t, DEFAULT_FD_STEP),
        GeneratorRoute::Quadrature => generator_quadrature(spec, g, t, DEFAULT_QUADRATURE_TOL),
        GeneratorRoute::Superoperator => generator_superoperator(spec, g, t, None),
        GeneratorRoute::Spectral => generator_spectral(spec, g, t, None),
        GeneratorRoute::ShortTime => Ok(generator_short_time(spec, g, t)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BuiltinModel, CoefficientExpr};
    use crate::operators::{pauli_x, pauli_y, pauli_z, ComplexVector};

    fn amplitude_model() -> ModelSpec {
        BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0])
            .unwrap()
            .spec()
            .unwrap()
    }

    fn direction_model() -> ModelSpec {
        BuiltinModel::spin_direction(1.0).spec().unwrap()
    }

    #[test]
    fn finite_difference_vanishes_for_constant_hamiltonian() {
        let spec =
            ModelSpec::new(2, vec![(CoefficientExpr::constant(1.3), pauli_z())], "h0").unwrap();
        let r = generator_finite_difference(&spec, 0.4, 1.7, 1e-5).unwrap();
        assert!(max_norm(r.h.matrix()) <= 1e-9);
    }

    #[test]
    fn finite_difference_amplitude_is_t_times_sigma_z() {
        let spec = amplitude_model();
        let t = 1.5;
        let r = generator_finite_difference(&spec, 0.9, t, 1e-5).unwrap();
        let expected = pauli_z().map(|z| z * t);
        assert!(max_norm(&(r.h.matrix() - expected)) <= 1e-8);
    }

    #[test]
    fn finite_difference_matches_closed_form_in_energy_basis() {
        // For the direction model at g = 0, in the eigenbasis (|+B>, |-B>)
        // of H the generator is [[0, e^{-iBt} sin Bt], [e^{iBt} sin Bt, 0]].
        let spec = direction_model();
        let t = std::f64::consts::FRAC_PI_2;
        let r = generator_finite_difference(&spec, 0.0, t, 1e-5).unwrap();
        let half = std::f64::consts::FRAC_PI_4;
        let plus = ComplexVector::from_vec(vec![
            Complex64::new(half.cos(), 0.0),
            Complex64::new(half.sin(), 0.0),
        ]);
        let minus = ComplexVector::from_vec(vec![
            Complex64::new(half.sin(), 0.0),
            Complex64::new(-half.cos(), 0.0),
        ]);
        let mut basis = ComplexMatrix::zeros(2, 2);
        basis.set_column(0, &plus);
        basis.set_column(1, &minus);
        let in_energy_basis = basis.adjoint() * r.h.matrix() * &basis;
        let phase = (-IM * Complex64::new(t, 0.0)).exp() * t.sin();
        let expected = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                phase,
                phase.conj(),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(max_norm(&(in_energy_basis - expected)) <= 1e-8);
    }

    #[test]
    fn quadrature_at_zero_time_is_zero() {
        let r = generator_quadrature(&direction_model(), 0.3, 0.0, 1e-9).unwrap();
        assert!(max_norm(r.h.matrix()) == 0.0);
    }

    #[test]
    fn quadrature_commuting_case_is_linear() {
        let spec = amplitude_model();
        let t = 2.3;
        let r = generator_quadrature(&spec, 0.5, t, 1e-10).unwrap();
        let expected = pauli_z().map(|z| z * t);
        assert!(max_norm(&(r.h.matrix() - expected)) <= 1e-10);
    }

    #[test]
    fn quadrature_matches_finite_difference_oracle() {
        // A 3x3 model with a constant term plus a g-dependent term.
        let a = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.4, 0.0),
                Complex64::new(0.3, 0.2),
                Complex64::new(0.0, -0.1),
                Complex64::new(0.3, -0.2),
                Complex64::new(-0.5, 0.0),
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, 0.1),
                Complex64::new(0.2, 0.0),
                Complex64::new(0.1, 0.0),
            ],
        );
        let b = ComplexMatrix::from_row_slice(
            3,
            3,
            &[
                Complex64::new(0.2, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, -0.5),
                Complex64::new(0.7, 0.0),
                Complex64::new(0.3, -0.3),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.3, 0.3),
                Complex64::new(-0.2, 0.0),
            ],
        );
        let spec = ModelSpec::new(
            3,
            vec![
                (CoefficientExpr::constant(1.0), a),
                (CoefficientExpr::parse("sin(g)").unwrap(), b),
            ],
            "three-level",
        )
        .unwrap();
        let (g, t) = (0.7, 2.1);
        let quad = generator_quadrature(&spec, g, t, 1e-9).unwrap();
        let fd = generator_finite_difference(&spec, g, t, 1e-5).unwrap();
        assert!(max_norm(&(quad.h.matrix() - fd.h.matrix())) <= 1e-6);
    }

    #[test]
    fn superoperator_of_pauli_z_has_expected_spectrum() {
        let spec =
            ModelSpec::new(2, vec![(CoefficientExpr::constant(1.0), pauli_z())], "sz").unwrap();
        let s = build_superoperator(&spec, 0.0).unwrap();
        let expected = [-2.0, 0.0, 0.0, 2.0];
        for (got, want) in s.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() <= 1e-12);
        }
        assert!(hermiticity_defect(s.matrix()) <= 1e-14);
    }

    #[test]
    fn superoperator_of_identity_is_zero() {
        let spec = ModelSpec::new(
            2,
            vec![(
                CoefficientExpr::constant(2.0),
                ComplexMatrix::identity(2, 2),
            )],
            "identity",
        )
        .unwrap();
        let s = build_superoperator(&spec, 0.1).unwrap();
        assert!(max_norm(s.matrix()) == 0.0);
        assert!(s.eigenvalues().iter().all(|l| l.abs() <= 1e-14));
    }

    #[test]
    fn superoperator_eigenvalues_are_spectral_differences() {
        let m = ComplexMatrix::from_row_slice(
            4,
            4,
            &[
                Complex64::new(0.9, 0.0),
                Complex64::new(0.2, 0.1),
                Complex64::new(0.0, -0.4),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.2, -0.1),
                Complex64::new(-0.6, 0.0),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.0, 0.2),
                Complex64::new(0.0, 0.4),
                Complex64::new(0.1, 0.0),
                Complex64::new(0.4, 0.0),
                Complex64::new(-0.2, 0.1),
                Complex64::new(0.3, 0.0),
                Complex64::new(0.0, -0.2),
                Complex64::new(-0.2, -0.1),
                Complex64::new(0.05, 0.0),
            ],
        );
        let spec = ModelSpec::new(4, vec![(CoefficientExpr::parameter(), m)], "random4").unwrap();
        let g = 0.8;
        let s = build_superoperator(&spec, g).unwrap();
        let decomp = eigendecompose(&spec.evaluate(g), None).unwrap();
        let mut expected: Vec<f64> = Vec::new();
        for &ek in decomp.eigenvalues() {
            for &el in decomp.eigenvalues() {
                expected.push(ek - el);
            }
        }
        expected.sort_by(f64::total_cmp);
        for (got, want) in s.eigenvalues().iter().zip(expected) {
            assert!((got - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn superoperator_route_commuting_case() {
        let spec = amplitude_model();
        let t = 1.9;
        let r = generator_superoperator(&spec, 0.3, t, None).unwrap();
        assert!(max_norm(&(r.h.matrix() - pauli_z().map(|z| z * t))) <= 1e-10);
        assert_eq!(r.diagnostics.zero_mode_count, Some(2));
    }

    #[test]
    fn superoperator_route_matches_finite_difference() {
        let spec = direction_model();
        let (g, t) = (0.4, 2.0);
        let s = generator_superoperator(&spec, g, t, None).unwrap();
        let fd = generator_finite_difference(&spec, g, t, 1e-5).unwrap();
        assert!(max_norm(&(s.h.matrix() - fd.h.matrix())) <= 1e-7);
    }

    #[test]
    fn direction_model_zero_modes_do_not_overlap_derivative() {
        // The direction model has a g-independent spectrum, so dH has no
        // weight on the zero modes of the superoperator.
        let spec = direction_model();
        let s = build_superoperator(&spec, 0.4).unwrap();
        let ztol = s.default_zero_tol();
        for (k, &lambda) in s.eigenvalues().iter().enumerate() {
            if lambda.abs() <= ztol {
                assert!(s.coefficients()[k].norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn ambiguous_zero_band_is_rejected() {
        let spec =
            ModelSpec::new(2, vec![(CoefficientExpr::parameter(), pauli_z())], "sz").unwrap();
        // At g = 1 the superoperator eigenvalues are {-2, 0, 0, 2}; a
        // zero_tol of 0.5 puts 2 inside the ambiguous band (0.5, 5].
        assert!(matches!(
            generator_superoperator(&spec, 1.0, 1.0, Some(0.5)),
            Err(WorkbenchError::AmbiguousZeroMode { .. })
        ));
    }

    #[test]
    fn spectral_route_eigenvalues_oscillate() {
        let spec = direction_model();
        for &t in &[0.3, 1.1, 2.9] {
            let r = generator_spectral(&spec, 0.7, t, None).unwrap();
            let d = eigendecompose(&r.h, None).unwrap();
            assert!((d.eigenvalues()[0] + t.sin().abs()).abs() <= 1e-10);
            assert!((d.eigenvalues()[1] - t.sin().abs()).abs() <= 1e-10);
        }
    }

    #[test]
    fn spectral_route_matches_general_direction_closed_form() {
        // h = sin(Bt) [cos(Bt) dn - sin(Bt) dn x n] . sigma for unit n(g).
        let b = 1.0;
        let model = BuiltinModel::spin_direction_general(
            b,
            [
                CoefficientExpr::parse("cos(g)").unwrap(),
                CoefficientExpr::constant(0.0),
                CoefficientExpr::parse("sin(g)").unwrap(),
            ],
        );
        let spec = model.spec().unwrap();
        let (g, t) = (0.6, 1.4);
        let r = generator_spectral(&spec, g, t, None).unwrap();

        let n = [g.cos(), 0.0, g.sin()];
        let dn = [-g.sin(), 0.0, g.cos()];
        let cross = [
            dn[1] * n[2] - dn[2] * n[1],
            dn[2] * n[0] - dn[0] * n[2],
            dn[0] * n[1] - dn[1] * n[0],
        ];
        let bt = b * t;
        let coeff: Vec<f64> = (0..3)
            .map(|i| bt.sin() * (bt.cos() * dn[i] - bt.sin() * cross[i]))
            .collect();
        let expected = pauli_x().map(|z| z * coeff[0])
            + pauli_y().map(|z| z * coeff[1])
            + pauli_z().map(|z| z * coeff[2]);
        assert!(max_norm(&(r.h.matrix() - expected)) <= 1e-8);
    }

    #[test]
    fn spectral_route_fully_degenerate_case() {
        // H = I with dH = sx: a single cluster, so h is purely linear in t.
        let spec = ModelSpec::new(
            2,
            vec![
                (
                    CoefficientExpr::constant(1.0),
                    ComplexMatrix::identity(2, 2),
                ),
                (CoefficientExpr::parameter(), pauli_x()),
            ],
            "degenerate",
        )
        .unwrap();
        let t = 1.3;
        let r = generator_spectral(&spec, 0.0, t, None).unwrap();
        assert!(max_norm(&(r.h.matrix() - pauli_x().map(|z| z * t))) <= 1e-10);
        assert_eq!(r.diagnostics.cluster_count, Some(1));
    }

    #[test]
    fn short_time_route_basics() {
        let spec = direction_model();
        let zero = generator_short_time(&spec, 0.2, 0.0);
        assert!(max_norm(zero.h.matrix()) == 0.0);

        let amplitude = amplitude_model();
        for &t in &[0.5, 3.0] {
            let st = generator_short_time(&amplitude, 0.1, t);
            let exact = generator_spectral(&amplitude, 0.1, t, None).unwrap();
            assert!(max_norm(&(st.h.matrix() - exact.h.matrix())) <= 1e-10);
        }

        let t = 0.01;
        let st = generator_short_time(&spec, 0.0, t);
        let exact = generator_spectral(&spec, 0.0, t, None).unwrap();
        assert!(max_norm(&(st.h.matrix() - exact.h.matrix())) <= 1e-4);
    }

    #[test]
    fn negative_step_is_rejected() {
        assert!(matches!(
            generator_finite_difference(&direction_model(), 0.0, 1.0, -1e-5),
            Err(WorkbenchError::InvalidArgument(_))
        ));
    }

    #[test]
    fn parseval_identity_for_superoperator_coefficients() {
        let spec = direction_model();
        let g = 0.25;
        let s = build_superoperator(&spec, g).unwrap();
        let d_h = spec.differentiate().evaluate(g).into_matrix();
        let total: f64 = s.coefficients().iter().map(|c| c.norm_sqr()).sum();
        let trace = hs_inner(&d_h, &d_h).unwrap().re;
        assert!((total - trace).abs() <= 1e-8);
    }
}
