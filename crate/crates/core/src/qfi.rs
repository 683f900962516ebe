//! Quantum Fisher information derived from translation generators: the
//! pure-state value, the maximum over probes, upper bounds, the symmetric
//! logarithmic derivative cross-check, N-copy scaling, and the symmetry
//! probe for t^2 growth.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Result, WorkbenchError};
use crate::generator::{
    assemble_spectral_generator, default_gap_floor, generator, generator_spectral, GeneratorRoute,
};
use crate::model::ModelSpec;
use crate::operators::{
    commutator, eigendecompose, evolution_operator, hs_inner, hs_norm, max_norm, variance,
    ComplexMatrix, HermitianOperator, PureState, UnitaryOperator,
};

/// Largest total dimension accepted by [`tensor_power_model`].
pub const TENSOR_DIMENSION_CAP: usize = 64;

/// Upper bounds accompanying a QFI value. `short_time` is only populated in
/// its small-t validity window and is informational: the constant in it is
/// a factor 4 tighter than what the variance bound 2 Tr(h^2) applied to
/// h = t dH yields, so it is not asserted against exact values.
#[derive(Debug, Clone, Serialize)]
pub struct QfiBounds {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_time: Option<f64>,
    pub hilbert_schmidt: f64,
    pub spectral: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvalue_independent_ceiling: Option<f64>,
}

/// QFI of a model at one (g, t) point.
#[derive(Debug, Clone)]
pub struct QfiReport {
    pub g: f64,
    pub t: f64,
    /// QFI of the probe actually used (the optimal probe unless overridden).
    pub qfi: f64,
    /// Maximum QFI over probes.
    pub qfi_max: f64,
    /// Pre-evolution probe attaining `qfi_max`.
    pub optimal_probe: PureState,
    pub bounds: QfiBounds,
    pub route: GeneratorRoute,
}

/// F = 4 <Psi_g| (Delta h)^2 |Psi_g> with |Psi_g> = U |probe>.
pub fn qfi_pure(h: &HermitianOperator, probe: &PureState, u: &UnitaryOperator) -> Result<f64> {
    let evolved = u.apply(probe)?;
    Ok(4.0 * variance(h, &evolved)?)
}

/// (lambda_max - lambda_min)^2 and the evolved-frame probe attaining it:
/// the equal superposition of extremal eigenvectors with phase fixed to 0.
/// For a degenerate extremal eigenspace the first basis vector after
/// deterministic phase fixing is used; for h with a single cluster the value
/// is (numerically) zero and the returned state is an arbitrary eigenvector.
pub fn qfi_max(h: &HermitianOperator) -> Result<(f64, PureState)> {
    let decomp = eigendecompose(h, None)?;
    let spread = decomp.spectral_range();
    let clusters = decomp.clusters();
    let lo = clusters.first().expect("nonempty spectrum").start;
    let hi = clusters.last().expect("nonempty spectrum").start;
    let v_min = decomp.eigenvectors().column(lo).clone_owned();
    let v_max = decomp.eigenvectors().column(hi).clone_owned();
    let probe = PureState::normalized(v_max + v_min)?;
    Ok((spread * spread, probe))
}

/// QFI of a parametrized density matrix via the symmetric logarithmic
/// derivative restricted to the support of rho: L is assembled from
/// eigenpairs with eta_i + eta_j > support_tol and F = Tr(rho L^2).
///
/// Errors if d_rho has weight on the excluded (null-space) block, where the
/// QFI is formally divergent.
pub fn sld_qfi(
    rho: &HermitianOperator,
    d_rho: &HermitianOperator,
    support_tol: f64,
) -> Result<f64> {
    if rho.dim() != d_rho.dim() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "rho is {}x{} but d_rho is {}x{}",
            rho.dim(),
            rho.dim(),
            d_rho.dim(),
            d_rho.dim()
        )));
    }
    if !support_tol.is_finite() || support_tol <= 0.0 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "support_tol must be positive, got {support_tol}"
        )));
    }
    let trace_defect = (rho.matrix().trace().re - 1.0).abs();
    if trace_defect > 1e-8 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "rho must have unit trace: defect {trace_defect:.3e}"
        )));
    }
    let scale = max_norm(d_rho.matrix()).max(1.0);
    let dtrace = d_rho.matrix().trace().norm();
    if dtrace > 1e-8 * scale {
        return Err(WorkbenchError::InvalidArgument(format!(
            "d_rho must be traceless: |trace| = {dtrace:.3e}"
        )));
    }
    let decomp = eigendecompose(rho, None)?;
    let etas = decomp.eigenvalues();
    if etas[0] < -1e-8 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "rho must be positive semidefinite: smallest eigenvalue {:.3e}",
            etas[0]
        )));
    }
    let v = decomp.eigenvectors();
    let w = v.adjoint() * d_rho.matrix() * v;
    let d = rho.dim();

    let mut outside_weight = 0.0f64;
    let mut fisher = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let denom = etas[i] + etas[j];
            if denom > support_tol {
                let l_ij = 2.0 * w[(i, j)].norm() / denom;
                fisher += etas[i].max(0.0) * l_ij * l_ij;
            } else {
                outside_weight = outside_weight.max(w[(i, j)].norm());
            }
        }
    }
    if outside_weight > 1e-8 * scale {
        return Err(WorkbenchError::UnsupportedDirection {
            weight: outside_weight,
        });
    }
    Ok(fisher)
}

/// (t^2 / 2) Tr[(dH)^2]. See [`QfiBounds::short_time`] for the caveat on the
/// constant; the provable variance bound for the short-time generator is 4x
/// this value.
pub fn bound_short_time(spec: &ModelSpec, g: f64, t: f64) -> f64 {
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let trace_sq = hs_norm(&d_h).powi(2);
    0.5 * t * t * trace_sq
}

/// 2 Tr(h^2): the variance bound on QFI, with equality exactly when the
/// spectrum of h is a +-lambda pair and nothing else.
pub fn bound_hilbert_schmidt(h: &HermitianOperator) -> f64 {
    2.0 * hs_norm(h.matrix()).powi(2)
}

fn spectral_blocks(
    spec: &ModelSpec,
    g: f64,
    cluster_tol: Option<f64>,
) -> Result<(Vec<f64>, Vec<usize>, ComplexMatrix, f64)> {
    let decomp = eigendecompose(&spec.evaluate(g), cluster_tol)?;
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let v = decomp.eigenvectors();
    let w = v.adjoint() * d_h * v;
    let values: Vec<f64> = decomp.clusters().iter().map(|c| c.value).collect();
    let cluster_of = decomp.cluster_index_map();
    let gap_floor = default_gap_floor(&decomp);
    Ok((values, cluster_of, w, gap_floor))
}

/// Upper bound from spectral data:
/// 2 t^2 sum over same-cluster blocks of |dH|^2 entries plus
/// 8 sin^2(gap t / 2)/gap^2 over cross-cluster blocks. Gaps below the
/// degeneracy floor use the analytic limit, which merges continuously with
/// the linear part.
pub fn bound_spectral(spec: &ModelSpec, g: f64, t: f64, cluster_tol: Option<f64>) -> Result<f64> {
    let (values, cluster_of, w, gap_floor) = spectral_blocks(spec, g, cluster_tol)?;
    let d = cluster_of.len();
    let mut total = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let (ci, cj) = (cluster_of[i], cluster_of[j]);
            let gap = values[ci] - values[cj];
            let weight = if ci == cj || gap.abs() < gap_floor {
                2.0 * t * t
            } else {
                let s = (0.5 * gap * t).sin();
                8.0 * s * s / (gap * gap)
            };
            total += weight * w[(i, j)].norm_sqr();
        }
    }
    Ok(total)
}

/// The t-independent ceiling 8 sum over cross-cluster blocks of
/// |<E_l|dH|E_k>|^2 / (E_k - E_l)^2, valid only when the eigenvalues of H do
/// not depend on g (all same-cluster blocks of dH vanish).
pub fn bound_eigenvalue_independent_ceiling(
    spec: &ModelSpec,
    g: f64,
    cluster_tol: Option<f64>,
) -> Result<f64> {
    let (values, cluster_of, w, _) = spectral_blocks(spec, g, cluster_tol)?;
    let d = cluster_of.len();
    let scale = max_norm(&w).max(1.0);
    let mut diagonal_weight = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            if cluster_of[i] == cluster_of[j] {
                diagonal_weight = diagonal_weight.max(w[(i, j)].norm());
            }
        }
    }
    if diagonal_weight > 1e-8 * scale {
        return Err(WorkbenchError::InapplicableBound(format!(
            "eigenvalues depend on g: diagonal derivative weight {diagonal_weight:.3e}"
        )));
    }
    let mut total = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let (ci, cj) = (cluster_of[i], cluster_of[j]);
            if ci != cj {
                let gap = values[ci] - values[cj];
                total += 8.0 * w[(i, j)].norm_sqr() / (gap * gap);
            }
        }
    }
    Ok(total)
}

/// The model of N noninteracting copies: every term matrix A_j becomes the
/// sum over sites of I x ... x A_j x ... x I with the same coefficient.
pub fn tensor_power_model(spec: &ModelSpec, n: usize) -> Result<ModelSpec> {
    if n == 0 {
        return Err(WorkbenchError::InvalidArgument(
            "copy count must be at least 1".into(),
        ));
    }
    let d = spec.dim();
    let total = d.checked_pow(n as u32).unwrap_or(usize::MAX);
    if total > TENSOR_DIMENSION_CAP {
        return Err(WorkbenchError::DimensionCap {
            dim: total,
            cap: TENSOR_DIMENSION_CAP,
        });
    }
    let mut terms = Vec::new();
    for term in spec.terms() {
        for site in 0..n {
            let left = ComplexMatrix::identity(d.pow(site as u32), d.pow(site as u32));
            let right =
                ComplexMatrix::identity(d.pow((n - site - 1) as u32), d.pow((n - site - 1) as u32));
            let matrix = left.kronecker(term.matrix()).kronecker(&right);
            terms.push((term.coeff().clone(), matrix));
        }
    }
    ModelSpec::new(total, terms, format!("{} (x{n} copies)", spec.label()))
}

/// Maximum QFI of N noninteracting copies, computed on the explicit d^N
/// Hamiltonian via the spectral route.
pub fn tensor_power_qfi(spec: &ModelSpec, g: f64, t: f64, n: usize) -> Result<f64> {
    let big = tensor_power_model(spec, n)?;
    let result = generator_spectral(&big, g, t, None)?;
    Ok(qfi_max(&result.h)?.0)
}

/// Overlap Tr(Omega^dagger dH) of dH with a conserved operator Omega
/// ([H, Omega] = 0, HS-normalized). A nonzero overlap certifies a t-linear
/// part of the generator and hence t^2 growth of the QFI.
pub fn zero_mode_overlap(spec: &ModelSpec, g: f64, omega: &HermitianOperator) -> Result<Complex64> {
    let h = spec.evaluate(g);
    if omega.dim() != h.dim() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "Omega is {}x{} but the model dimension is {}",
            omega.dim(),
            omega.dim(),
            h.dim()
        )));
    }
    let norm_defect = (hs_norm(omega.matrix()) - 1.0).abs();
    if norm_defect > 1e-8 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "Omega must be HS-normalized: |norm - 1| = {norm_defect:.3e}"
        )));
    }
    let comm = commutator(h.matrix(), omega.matrix())?;
    let defect = max_norm(&comm);
    let tolerance = 1e-8 * max_norm(h.matrix()) * max_norm(omega.matrix());
    if defect > tolerance {
        return Err(WorkbenchError::NonCommuting { defect });
    }
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    hs_inner(omega.matrix(), &d_h)
}

/// Full QFI report at one (g, t) point. The probe defaults to the optimal
/// one (the extremal superposition pulled back through U^dagger).
pub fn qfi_report(
    spec: &ModelSpec,
    g: f64,
    t: f64,
    route: GeneratorRoute,
    probe: Option<&PureState>,
) -> Result<QfiReport> {
    let result = generator(spec, g, t, route)?;
    let decomp = eigendecompose(&spec.evaluate(g), None)?;
    let u = evolution_operator(&decomp, t)?;
    let (max_value, evolved_probe) = qfi_max(&result.h)?;
    let optimal_probe = u.apply_inverse(&evolved_probe)?;
    let used = probe.unwrap_or(&optimal_probe);
    let qfi = qfi_pure(&result.h, used, &u)?;

    let h_norm = max_norm(spec.evaluate(g).matrix());
    let short_time = (t.abs() * h_norm <= 0.01).then(|| bound_short_time(spec, g, t));
    let bounds = QfiBounds {
        short_time,
        hilbert_schmidt: bound_hilbert_schmidt(&result.h),
        spectral: bound_spectral(spec, g, t, None)?,
        eigenvalue_independent_ceiling: bound_eigenvalue_independent_ceiling(spec, g, None).ok(),
    };
    Ok(QfiReport {
        g,
        t,
        qfi,
        qfi_max: max_value,
        optimal_probe,
        bounds,
        route,
    })
}

/// Convenience: the spectral-route generator and the evolution operator at
/// (g, t) in one call, sharing a single eigendecomposition of H(g).
pub fn evolved_frame(
    spec: &ModelSpec,
    g: f64,
    t: f64,
) -> Result<(HermitianOperator, UnitaryOperator)> {
    let decomp = eigendecompose(&spec.evaluate(g), None)?;
    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let gap_floor = default_gap_floor(&decomp);
    let (h, _) = assemble_spectral_generator(&decomp, &d_h, t, gap_floor);
    let u = evolution_operator(&decomp, t)?;
    Ok((HermitianOperator::from_validated(h), u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BuiltinModel, CoefficientExpr};
    use crate::operators::{pauli_x, pauli_z, ComplexVector};
    use num_complex::Complex64;

    fn direction_model() -> ModelSpec {
        BuiltinModel::spin_direction(1.0).spec().unwrap()
    }

    fn amplitude_model() -> ModelSpec {
        BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0])
            .unwrap()
            .spec()
            .unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn qfi_pure_vanishes_on_eigenvectors() {
        let h = HermitianOperator::new(pauli_z()).unwrap();
        let u = UnitaryOperator::new(ComplexMatrix::identity(2, 2)).unwrap();
        let probe = PureState::basis_state(2, 0).unwrap();
        assert!(qfi_pure(&h, &probe, &u).unwrap() <= 1e-14);
    }

    #[test]
    fn qfi_pure_of_plus_state_is_four() {
        let h = HermitianOperator::new(pauli_z()).unwrap();
        let u = UnitaryOperator::new(ComplexMatrix::identity(2, 2)).unwrap();
        let probe =
            PureState::normalized(ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert!((qfi_pure(&h, &probe, &u).unwrap() - 4.0).abs() <= 1e-12);
    }

    #[test]
    fn optimal_probe_attains_maximum_at_quarter_period() {
        let spec = direction_model();
        let t = std::f64::consts::FRAC_PI_2;
        let report = qfi_report(&spec, 0.0, t, GeneratorRoute::Spectral, None).unwrap();
        assert!((report.qfi_max - 4.0).abs() <= 1e-10);
        assert!((report.qfi - 4.0).abs() <= 1e-10);
    }

    #[test]
    fn report_respects_bound_chain() {
        // 0 <= qfi <= qfi_max <= spectral and Hilbert-Schmidt bounds.
        let models = [direction_model(), amplitude_model()];
        for spec in &models {
            for &(g, t) in &[(0.3, 0.8), (0.0, 2.4), (-0.5, 1.6)] {
                let r = qfi_report(spec, g, t, GeneratorRoute::Spectral, None).unwrap();
                assert!(r.qfi >= 0.0);
                assert!(r.qfi <= r.qfi_max + 1e-10);
                assert!(r.qfi_max <= r.bounds.spectral + 1e-8);
                assert!(r.qfi_max <= r.bounds.hilbert_schmidt + 1e-8);
                if let Some(ceiling) = r.bounds.eigenvalue_independent_ceiling {
                    assert!(r.qfi_max <= ceiling + 1e-8);
                }
            }
        }
    }

    #[test]
    fn qfi_max_of_zero_operator() {
        let h = HermitianOperator::new(ComplexMatrix::zeros(2, 2)).unwrap();
        let (value, probe) = qfi_max(&h).unwrap();
        assert!(value == 0.0);
        assert!((probe.amplitudes().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn qfi_max_tracks_generator_spectrum() {
        let spec = direction_model();
        for &t in &[0.4, 1.0, 2.2] {
            let r = generator_spectral(&spec, 0.3, t, None).unwrap();
            let (value, _) = qfi_max(&r.h).unwrap();
            let expected = 4.0 * t.sin().powi(2);
            assert!((value - expected).abs() <= 1e-10, "t={t}");
        }
    }

    #[test]
    fn sld_matches_direct_formula_on_full_rank_state() {
        // rho = I/2 + eps sz has SLD L = 2 d_rho when rho is proportional to
        // the identity; cross-check F against the two-outcome classical
        // Fisher information of the induced distribution p = (1/2 + eps, 1/2 - eps).
        let eps = 0.01;
        let rho = HermitianOperator::new(
            ComplexMatrix::identity(2, 2).map(|z| z * 0.5) + pauli_z().map(|z| z * eps),
        )
        .unwrap();
        let d_rho = HermitianOperator::new(pauli_z()).unwrap();
        let got = sld_qfi(&rho, &d_rho, 1e-10).unwrap();
        // Classical two-outcome model: F = sum (dp)^2/p over p = 1/2 +- eps.
        let expected = 1.0 / (0.5 + eps) + 1.0 / (0.5 - eps);
        assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
    }

    #[test]
    fn sld_agrees_with_generator_variance_on_pure_states() {
        let spec = direction_model();
        let (g, t) = (0.2, 1.1);
        let (h, u) = evolved_frame(&spec, g, t).unwrap();
        let probe = PureState::normalized(ComplexVector::from_vec(vec![c(0.8, 0.1), c(0.3, -0.2)]))
            .unwrap();
        let evolved = u.apply(&probe).unwrap();
        let psi = evolved.amplitudes();
        let rho_mat = psi * psi.adjoint();
        let d_rho_mat =
            (h.matrix() * &rho_mat - &rho_mat * h.matrix()).map(|z| -crate::operators::IM * z);
        let rho = HermitianOperator::new(rho_mat).unwrap();
        let d_rho = HermitianOperator::new(d_rho_mat).unwrap();
        let sld = sld_qfi(&rho, &d_rho, 1e-10).unwrap();
        let direct = 4.0 * variance(&h, &evolved).unwrap();
        assert!((sld - direct).abs() <= 1e-7, "{sld} vs {direct}");
    }

    #[test]
    fn sld_of_zero_derivative_is_zero() {
        let rho = HermitianOperator::new(ComplexMatrix::identity(2, 2).map(|z| z * 0.5)).unwrap();
        let d_rho = HermitianOperator::new(ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(sld_qfi(&rho, &d_rho, 1e-10).unwrap() == 0.0);
    }

    #[test]
    fn sld_rejects_weight_outside_support() {
        let rho = HermitianOperator::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        ))
        .unwrap();
        let d_rho = HermitianOperator::new(pauli_z()).unwrap();
        assert!(matches!(
            sld_qfi(&rho, &d_rho, 1e-10),
            Err(WorkbenchError::UnsupportedDirection { .. })
        ));
    }

    #[test]
    fn short_time_bound_values() {
        let spec = ModelSpec::new(
            2,
            vec![(CoefficientExpr::constant(1.0), pauli_z())],
            "fixed",
        )
        .unwrap();
        assert!(bound_short_time(&spec, 0.3, 2.0) == 0.0);

        let amp = amplitude_model();
        let t = 0.7;
        // Tr[(sz)^2] = 2, so the stated bound is t^2.
        assert!((bound_short_time(&amp, 0.5, t) - t * t).abs() <= 1e-12);
        // The provable variance bound for h = t dH is 4x the stated value.
        let st = crate::generator::generator_short_time(&amp, 0.5, t);
        let (qmax, _) = qfi_max(&st.h).unwrap();
        assert!(qmax <= 4.0 * bound_short_time(&amp, 0.5, t) + 1e-12);

        let dir = direction_model();
        let t = 0.3;
        assert!((bound_short_time(&dir, 0.0, t) - t * t).abs() <= 1e-12);
        let st = crate::generator::generator_short_time(&dir, 0.0, t);
        let (qmax, _) = qfi_max(&st.h).unwrap();
        assert!(qmax <= 4.0 * bound_short_time(&dir, 0.0, t) + 1e-12);
    }

    #[test]
    fn hilbert_schmidt_bound_values() {
        let h = HermitianOperator::new(pauli_z()).unwrap();
        let bound = bound_hilbert_schmidt(&h);
        let (qmax, _) = qfi_max(&h).unwrap();
        // A +-1 pair in d = 2 attains equality: qfi_max = 4 = 2 Tr(sz^2).
        assert!((bound - 4.0).abs() <= 1e-12);
        assert!(qmax <= bound + 1e-12);
        assert!((qmax - bound).abs() <= 1e-12);

        let zero = HermitianOperator::new(ComplexMatrix::zeros(3, 3)).unwrap();
        assert!(bound_hilbert_schmidt(&zero) == 0.0);

        // Strict inequality once more than a +-lambda pair is present.
        let h3 = HermitianOperator::new(ComplexMatrix::from_diagonal(&ComplexVector::from_vec(
            vec![c(-1.0, 0.0), c(0.4, 0.0), c(1.0, 0.0)],
        )))
        .unwrap();
        let (qmax3, _) = qfi_max(&h3).unwrap();
        assert!(qmax3 < bound_hilbert_schmidt(&h3) - 0.1);
    }

    #[test]
    fn spectral_bound_dominates_qfi() {
        let dir = direction_model();
        for &t in &[0.0, 0.9, 2.4] {
            let bound = bound_spectral(&dir, 0.3, t, None).unwrap();
            let r = generator_spectral(&dir, 0.3, t, None).unwrap();
            let (qmax, _) = qfi_max(&r.h).unwrap();
            assert!(qmax <= bound + 1e-8, "t={t}: {qmax} vs {bound}");
            // For the direction model the bound is tight: 4 sin^2(t).
            assert!((bound - 4.0 * t.sin().powi(2)).abs() <= 1e-9);
        }
        assert!(bound_spectral(&dir, 0.3, 0.0, None).unwrap() == 0.0);

        let amp = amplitude_model();
        let t = 1.7;
        let bound = bound_spectral(&amp, 0.4, t, None).unwrap();
        // Purely linear part: 2 t^2 Tr[(dH)^2] = 4 t^2.
        assert!((bound - 4.0 * t * t).abs() <= 1e-10);
    }

    #[test]
    fn ceiling_for_direction_model_is_four() {
        let dir = direction_model();
        let ceiling = bound_eigenvalue_independent_ceiling(&dir, 0.3, None).unwrap();
        assert!((ceiling - 4.0).abs() <= 1e-10);
        // sup_t qfi_max = 4 attains the ceiling.
        let t = std::f64::consts::FRAC_PI_2;
        let r = generator_spectral(&dir, 0.3, t, None).unwrap();
        let (qmax, _) = qfi_max(&r.h).unwrap();
        assert!(qmax <= ceiling + 1e-8);
        assert!((qmax - ceiling).abs() <= 1e-8);
    }

    #[test]
    fn ceiling_rejects_g_dependent_eigenvalues() {
        assert!(matches!(
            bound_eigenvalue_independent_ceiling(&amplitude_model(), 0.4, None),
            Err(WorkbenchError::InapplicableBound(_))
        ));
    }

    #[test]
    fn ceiling_of_constant_model_is_zero() {
        let spec = ModelSpec::new(
            2,
            vec![(CoefficientExpr::constant(1.0), pauli_z())],
            "fixed",
        )
        .unwrap();
        assert!(bound_eigenvalue_independent_ceiling(&spec, 0.0, None).unwrap() == 0.0);
    }

    #[test]
    fn tensor_power_scaling() {
        let dir = direction_model();
        let t = std::f64::consts::FRAC_PI_2;
        let single = tensor_power_qfi(&dir, 0.0, t, 1).unwrap();
        assert!((single - 4.0).abs() <= 1e-9);
        let double = tensor_power_qfi(&dir, 0.0, t, 2).unwrap();
        assert!((double - 16.0).abs() / 16.0 <= 1e-6);

        let amp = amplitude_model();
        let triple = tensor_power_qfi(&amp, 0.5, 1.0, 3).unwrap();
        assert!((triple - 36.0).abs() / 36.0 <= 1e-6);
    }

    #[test]
    fn tensor_power_respects_dimension_cap() {
        assert!(matches!(
            tensor_power_qfi(&direction_model(), 0.0, 1.0, 7),
            Err(WorkbenchError::DimensionCap { dim: 128, cap: 64 })
        ));
    }

    #[test]
    fn zero_mode_overlap_detects_linear_growth() {
        let amp = amplitude_model();
        let g = 0.8;
        let h = amp.evaluate(g);
        let omega = HermitianOperator::new(h.matrix().map(|z| z / hs_norm(h.matrix()))).unwrap();
        let overlap = zero_mode_overlap(&amp, g, &omega).unwrap();
        assert!(overlap.norm() > 0.5);
    }

    #[test]
    fn zero_mode_overlap_of_identity_with_traceless_derivative() {
        let amp = amplitude_model();
        let omega =
            HermitianOperator::new(ComplexMatrix::identity(2, 2).map(|z| z / 2.0f64.sqrt()))
                .unwrap();
        let overlap = zero_mode_overlap(&amp, 0.4, &omega).unwrap();
        assert!(overlap.norm() <= 1e-12);
    }

    #[test]
    fn zero_mode_overlap_vanishes_for_direction_model() {
        let dir = direction_model();
        let g = 0.6;
        let h = dir.evaluate(g);
        let omega = HermitianOperator::new(h.matrix().map(|z| z / hs_norm(h.matrix()))).unwrap();
        let overlap = zero_mode_overlap(&dir, g, &omega).unwrap();
        assert!(overlap.norm() <= 1e-10);
    }

    #[test]
    fn zero_mode_overlap_rejects_noncommuting_operator() {
        let dir = direction_model();
        let omega = HermitianOperator::new(pauli_x().map(|z| z / 2.0f64.sqrt())).unwrap();
        assert!(matches!(
            zero_mode_overlap(&dir, 0.9, &omega),
            Err(WorkbenchError::NonCommuting { .. })
        ));
    }
}
