//! Dense complex linear algebra for small Hilbert-space dimensions.
//!
//! Everything else in the crate is built on the types here: validated
//! Hermitian and unitary operators, unit-norm pure states, and spectral
//! decompositions with explicit degeneracy clusters. All operations are
//! pure functions on immutable values.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Result, WorkbenchError};

/// Dense square complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Dense complex column vector.
pub type ComplexVector = DVector<Complex64>;

pub(crate) const IM: Complex64 = Complex64::new(0.0, 1.0);

/// Max-norm: largest entry modulus.
pub fn max_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Max-norm of M - M^dagger.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut defect = 0.0f64;
    for i in 0..n {
        for j in i..n {
            defect = defect.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    defect
}

pub(crate) fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).map(|z| 0.5 * z)
}

/// Pauli x matrix.
pub fn pauli_x() -> ComplexMatrix {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[z, o, o, z])
}

/// Pauli y matrix.
pub fn pauli_y() -> ComplexMatrix {
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[z, -IM, IM, z])
}

/// Pauli z matrix.
pub fn pauli_z() -> ComplexMatrix {
    let o = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_row_slice(2, 2, &[o, z, z, -o])
}

/// Square complex matrix validated to be Hermitian within a max-norm
/// tolerance relative to its own scale.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    mat: ComplexMatrix,
}

impl HermitianOperator {
    /// Relative hermiticity tolerance used by [`HermitianOperator::new`].
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(mat, Self::DEFAULT_TOLERANCE)
    }

    /// Validates `max_norm(M - M^dagger) <= rel_tol * max_norm(M)`.
    pub fn with_tolerance(mat: ComplexMatrix, rel_tol: f64) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = hermiticity_defect(&mat);
        let tolerance = rel_tol * max_norm(&mat);
        if defect > tolerance {
            return Err(WorkbenchError::HermiticityViolation { defect, tolerance });
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix that is Hermitian by construction.
    pub(crate) fn from_validated(mat: ComplexMatrix) -> Self {
        Self { mat }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }
}

/// Square complex matrix validated to satisfy `U U^dagger = I` within 1e-10
/// in max-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    mat: ComplexMatrix,
}

impl UnitaryOperator {
    pub const DEFAULT_TOLERANCE: f64 = 1e-10;

    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() || mat.nrows() == 0 {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let d = mat.nrows();
        let defect = max_norm(&(&mat * mat.adjoint() - ComplexMatrix::identity(d, d)));
        if defect > Self::DEFAULT_TOLERANCE {
            return Err(WorkbenchError::UnitarityViolation { defect });
        }
        Ok(Self { mat })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Applies the operator to a pure state.
    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        if state.dim() != self.dim() {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "operator dimension {} vs state dimension {}",
                self.dim(),
                state.dim()
            )));
        }
        PureState::new(&self.mat * state.amplitudes())
    }

    /// Applies the inverse (adjoint) of the operator to a pure state.
    pub fn apply_inverse(&self, state: &PureState) -> Result<PureState> {
        if state.dim() != self.dim() {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "operator dimension {} vs state dimension {}",
                self.dim(),
                state.dim()
            )));
        }
        PureState::new(self.mat.adjoint() * state.amplitudes())
    }
}

/// Unit-norm complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: ComplexVector,
}

impl PureState {
    pub const NORM_TOLERANCE: f64 = 1e-10;

    pub fn new(amps: ComplexVector) -> Result<Self> {
        if amps.is_empty() {
            return Err(WorkbenchError::DimensionMismatch(
                "state vector must be nonempty".into(),
            ));
        }
        let defect = (amps.norm() - 1.0).abs();
        if defect > Self::NORM_TOLERANCE {
            return Err(WorkbenchError::NormalizationViolation { defect });
        }
        Ok(Self { amps })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn normalized(amps: ComplexVector) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() || norm < 1e-300 {
            return Err(WorkbenchError::InvalidArgument(
                "cannot normalize a (near-)zero state vector".into(),
            ));
        }
        Ok(Self {
            amps: amps.map(|z| z / norm),
        })
    }

    /// Computational basis state |k> in dimension d.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(WorkbenchError::InvalidArgument(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut amps = ComplexVector::zeros(dim);
        amps[k] = Complex64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amps
    }
}

/// One degeneracy cluster of a spectral decomposition: `len` consecutive
/// eigenvalues (in ascending order) treated as a single level.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenCluster {
    /// Representative eigenvalue (mean of the members).
    pub value: f64,
    /// Index of the first member in the ascending eigenvalue order.
    pub start: usize,
    /// Multiplicity.
    pub len: usize,
}

impl EigenCluster {
    pub fn indices(&self) -> std::ops::Range<usize> {
        self.start..self.start + self.len
    }
}

/// Eigendecomposition of a Hermitian operator with degeneracy clusters.
///
/// Eigenvalues are ascending; eigenvectors are orthonormal columns with the
/// phase fixed so that each column's largest-magnitude component is real and
/// positive.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
    clusters: Vec<EigenCluster>,
    cluster_tol: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as matrix columns, ordered like `eigenvalues`.
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn clusters(&self) -> &[EigenCluster] {
        &self.clusters
    }

    pub fn cluster_tol(&self) -> f64 {
        self.cluster_tol
    }

    /// Largest minus smallest eigenvalue.
    pub fn spectral_range(&self) -> f64 {
        match (self.eigenvalues.first(), self.eigenvalues.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    /// Maps eigenvalue index to the index of its cluster.
    pub fn cluster_index_map(&self) -> Vec<usize> {
        let mut map = vec![0usize; self.dim()];
        for (c, cluster) in self.clusters.iter().enumerate() {
            for i in cluster.indices() {
                map[i] = c;
            }
        }
        map
    }

    /// Projector onto the eigensubspace of cluster `k`.
    pub fn projector(&self, k: usize) -> ComplexMatrix {
        let d = self.dim();
        let mut p = ComplexMatrix::zeros(d, d);
        for i in self.clusters[k].indices() {
            let v = self.eigenvectors.column(i);
            p += v * v.adjoint();
        }
        p
    }

    /// Rebuilds the operator from eigenvalues and eigenvectors.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = self.dim();
        let mut m = ComplexMatrix::zeros(d, d);
        for i in 0..d {
            let v = self.eigenvectors.column(i);
            m += (v * v.adjoint()).map(|z| z * self.eigenvalues[i]);
        }
        m
    }

    /// Copy with eigenvector k multiplied by the unit scalar `phases[k]`.
    ///
    /// Quantities assembled from projectors (evolution operators, spectral
    /// generators) are invariant under this gauge change.
    pub fn rephased(&self, phases: &[Complex64]) -> Result<Self> {
        if phases.len() != self.dim() {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "expected {} phases, got {}",
                self.dim(),
                phases.len()
            )));
        }
        for p in phases {
            if (p.norm() - 1.0).abs() > 1e-12 {
                return Err(WorkbenchError::InvalidArgument(format!(
                    "phase modulus must be 1, got {}",
                    p.norm()
                )));
            }
        }
        let mut eigenvectors = self.eigenvectors.clone();
        for (k, phase) in phases.iter().enumerate() {
            eigenvectors.column_mut(k).apply(|z| *z *= phase);
        }
        Ok(Self {
            eigenvectors,
            eigenvalues: self.eigenvalues.clone(),
            clusters: self.clusters.clone(),
            cluster_tol: self.cluster_tol,
        })
    }

    /// exp(-i t H) as a raw matrix (no unitarity validation).
    pub fn evolution_matrix(&self, t: f64) -> ComplexMatrix {
        let mut scaled = self.eigenvectors.clone();
        for (i, lambda) in self.eigenvalues.iter().enumerate() {
            let phase = (-IM * Complex64::new(t * lambda, 0.0)).exp();
            scaled.column_mut(i).apply(|z| *z *= phase);
        }
        &scaled * self.eigenvectors.adjoint()
    }
}

/// Default clustering tolerance: 1e-8 of the spectral range, with a small
/// absolute floor so that exactly degenerate spectra (range ~ 0) still
/// coalesce into one cluster.
pub fn default_cluster_tol(eigenvalues: &[f64]) -> f64 {
    let (lo, hi) = match (eigenvalues.first(), eigenvalues.last()) {
        (Some(lo), Some(hi)) => (*lo, *hi),
        _ => return 1e-12,
    };
    let scale = lo.abs().max(hi.abs()).max(1.0);
    1e-8 * (hi - lo) + 1e-12 * scale
}

/// One cyclic sweep of complex Jacobi rotations on R = V^dagger M V,
/// accumulated into V. R is expected to be nearly diagonal already, so a
/// couple of sweeps drive the off-diagonal residue (and with it the
/// eigenpair residuals) to machine precision.
fn jacobi_refine(m: &ComplexMatrix, v: &mut ComplexMatrix) -> Vec<f64> {
    let d = m.nrows();
    let mut r = v.adjoint() * m * &*v;
    let scale = max_norm(&r).max(f64::MIN_POSITIVE);
    for _ in 0..6 {
        let mut off = 0.0f64;
        for p in 0..d {
            for q in p + 1..d {
                off = off.max(r[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let b = r[(p, q)];
                let b_mag = b.norm();
                if b_mag <= 1e-300 {
                    continue;
                }
                let a = r[(p, p)].re;
                let c = r[(q, q)].re;
                let tau = (a - c) / (2.0 * b_mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let ct = 1.0 / (1.0 + t * t).sqrt();
                let st = t * ct;
                let phase = b / Complex64::new(b_mag, 0.0);
                // Columns of the rotation: p -> (ct, st e^{-i beta}),
                // q -> (-st e^{i beta}, ct), with beta the phase of b.
                let jp = Complex64::new(st, 0.0) * phase.conj();
                let jq = -Complex64::new(st, 0.0) * phase;
                for k in 0..d {
                    let rp = r[(k, p)];
                    let rq = r[(k, q)];
                    r[(k, p)] = rp * ct + rq * jp;
                    r[(k, q)] = rp * jq + rq * ct;
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * ct + vq * jp;
                    v[(k, q)] = vp * jq + vq * ct;
                }
                for k in 0..d {
                    let rp = r[(p, k)];
                    let rq = r[(q, k)];
                    r[(p, k)] = rp * ct + rq * jp.conj();
                    r[(q, k)] = rp * jq.conj() + rq * ct;
                }
                r[(p, p)] = Complex64::new((a + 2.0 * t * b_mag + t * t * c) / (1.0 + t * t), 0.0);
                r[(q, q)] = Complex64::new((t * t * a - 2.0 * t * b_mag + c) / (1.0 + t * t), 0.0);
                r[(p, q)] = Complex64::new(0.0, 0.0);
                r[(q, p)] = Complex64::new(0.0, 0.0);
            }
        }
    }
    (0..d).map(|i| r[(i, i)].re).collect()
}

/// Eigendecomposition of a Hermitian operator with eigenvalues sorted
/// ascending, deterministic eigenvector phases, and degeneracy clustering.
///
/// `cluster_tol` groups eigenvalues whose adjacent gap does not exceed it;
/// `None` selects [`default_cluster_tol`].
pub fn eigendecompose(
    op: &HermitianOperator,
    cluster_tol: Option<f64>,
) -> Result<SpectralDecomposition> {
    if let Some(tol) = cluster_tol {
        if !tol.is_finite() || tol <= 0.0 {
            return Err(WorkbenchError::InvalidArgument(format!(
                "cluster_tol must be positive, got {tol}"
            )));
        }
    }
    let d = op.dim();
    let se = op
        .matrix()
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 100_000)
        .ok_or(WorkbenchError::ConvergenceFailure { dim: d })?;

    let mut raw_vectors = se.eigenvectors;
    let raw_values = jacobi_refine(op.matrix(), &mut raw_vectors);

    // Sort ascending.
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| raw_values[a].total_cmp(&raw_values[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| raw_values[i]).collect();
    let mut eigenvectors = ComplexMatrix::zeros(d, d);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &raw_vectors.column(src));
    }

    // Fix the phase: largest-magnitude component real positive.
    for k in 0..d {
        let mut col = eigenvectors.column_mut(k);
        let mut best = 0usize;
        let mut best_mag = 0.0f64;
        for (i, z) in col.iter().enumerate() {
            let mag = z.norm();
            if mag > best_mag {
                best_mag = mag;
                best = i;
            }
        }
        if best_mag > 0.0 {
            let phase = col[best].conj() / Complex64::new(best_mag, 0.0);
            col.apply(|z| *z *= phase);
        }
    }

    let tol = cluster_tol.unwrap_or_else(|| default_cluster_tol(&eigenvalues));
    let mut clusters = Vec::new();
    let mut start = 0usize;
    for i in 1..=d {
        if i == d || eigenvalues[i] - eigenvalues[i - 1] > tol {
            let members = &eigenvalues[start..i];
            let value = members.iter().sum::<f64>() / members.len() as f64;
            clusters.push(EigenCluster {
                value,
                start,
                len: i - start,
            });
            start = i;
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        clusters,
        cluster_tol: tol,
    })
}

/// exp(-i t H) built from a spectral decomposition, validated unitary.
pub fn evolution_operator(decomp: &SpectralDecomposition, t: f64) -> Result<UnitaryOperator> {
    if !t.is_finite() {
        return Err(WorkbenchError::InvalidArgument(format!(
            "evolution time must be finite, got {t}"
        )));
    }
    UnitaryOperator::new(decomp.evolution_matrix(t))
}

fn check_same_square(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "expected equal square matrices, got {}x{} and {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// AB - BA.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_square(a, b)?;
    Ok(a * b - b * a)
}

/// Hilbert-Schmidt inner product Tr(A^dagger B).
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64> {
    check_same_square(a, b)?;
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// `<psi| M |psi>`, real for a Hermitian M.
pub fn expectation(m: &HermitianOperator, psi: &PureState) -> Result<f64> {
    if m.dim() != psi.dim() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "operator dimension {} vs state dimension {}",
            m.dim(),
            psi.dim()
        )));
    }
    let w = m.matrix() * psi.amplitudes();
    Ok(psi.amplitudes().dotc(&w).re)
}

/// `<M^2> - <M>^2`, clamped to be nonnegative.
pub fn variance(m: &HermitianOperator, psi: &PureState) -> Result<f64> {
    if m.dim() != psi.dim() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "operator dimension {} vs state dimension {}",
            m.dim(),
            psi.dim()
        )));
    }
    let w = m.matrix() * psi.amplitudes();
    let mean = psi.amplitudes().dotc(&w).re;
    let second = w.dotc(&w).re;
    Ok((second - mean * mean).max(0.0))
}
