//! End-to-end estimation pipeline: projective measurement of the evolved
//! probe, seeded outcome sampling, grid maximum-likelihood estimation, and
//! the comparison of empirical mean-square error against the Cramer-Rao
//! reference 1/(nu F).

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Result, WorkbenchError};
use crate::model::ModelSpec;
use crate::operators::{
    eigendecompose, evolution_operator, hermitian_part, max_norm, variance, ComplexMatrix,
    HermitianOperator, PureState, IM,
};
use crate::qfi::evolved_frame;

/// Probability floor below which an outcome is excluded from classical
/// Fisher information sums.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Default central-difference step for probability derivatives.
pub const DEFAULT_PROBABILITY_FD_STEP: f64 = 1e-6;

/// Classical Fisher information below this threshold is treated as an
/// identifiability failure.
pub const IDENTIFIABILITY_FLOOR: f64 = 1e-6;

/// Complete rank-1 projective measurement: d orthonormal outcome vectors.
#[derive(Debug, Clone)]
pub struct ProjectiveMeasurement {
    vectors: ComplexMatrix,
}

impl ProjectiveMeasurement {
    /// Columns are the outcome vectors; completeness (sum of projectors = I)
    /// is validated to 1e-10.
    pub fn new(vectors: ComplexMatrix) -> Result<Self> {
        if vectors.nrows() != vectors.ncols() || vectors.nrows() == 0 {
            return Err(WorkbenchError::DimensionMismatch(format!(
                "expected a square matrix of outcome columns, got {}x{}",
                vectors.nrows(),
                vectors.ncols()
            )));
        }
        let d = vectors.nrows();
        let defect = max_norm(&(&vectors * vectors.adjoint() - ComplexMatrix::identity(d, d)));
        if defect > 1e-10 {
            return Err(WorkbenchError::InvalidArgument(format!(
                "outcome projectors do not resolve the identity: defect {defect:.3e}"
            )));
        }
        Ok(Self { vectors })
    }

    /// The computational basis measurement.
    pub fn computational(dim: usize) -> Self {
        Self {
            vectors: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &ComplexMatrix {
        &self.vectors
    }
}

/// The measurement attaining the quantum Fisher information for the evolved
/// pure state: the eigenbasis of the symmetric logarithmic derivative
/// L = 2 d(rho)/dg of rho(g) = U |probe><probe| U^dagger.
pub fn sld_measurement(
    spec: &ModelSpec,
    probe: &PureState,
    g: f64,
    t: f64,
) -> Result<ProjectiveMeasurement> {
    let (h, u) = evolved_frame(spec, g, t)?;
    let evolved = u.apply(probe)?;
    let psi = evolved.amplitudes();
    let rho = psi * psi.adjoint();
    let sld = (h.matrix() * &rho - &rho * h.matrix()).map(|z| -IM * z * 2.0);
    let decomp = eigendecompose(
        &HermitianOperator::from_validated(hermitian_part(&sld)),
        None,
    )?;
    ProjectiveMeasurement::new(decomp.eigenvectors().clone())
}

/// p_m = |<m| U(g) |probe>|^2.
pub fn outcome_distribution(
    spec: &ModelSpec,
    probe: &PureState,
    meas: &ProjectiveMeasurement,
    g: f64,
    t: f64,
) -> Result<Vec<f64>> {
    if probe.dim() != spec.dim() || meas.dim() != spec.dim() {
        return Err(WorkbenchError::DimensionMismatch(format!(
            "model dimension {} vs probe {} vs measurement {}",
            spec.dim(),
            probe.dim(),
            meas.dim()
        )));
    }
    let decomp = eigendecompose(&spec.evaluate(g), None)?;
    let u = evolution_operator(&decomp, t)?;
    let evolved = u.apply(probe)?;
    let overlaps = meas.vectors().adjoint() * evolved.amplitudes();
    Ok(overlaps.iter().map(|z| z.norm_sqr()).collect())
}

/// Classical Fisher information estimate with central differences.
#[derive(Debug, Clone, Serialize)]
pub struct FisherEstimate {
    pub value: f64,
    /// Set when an outcome sits below the probability floor while its
    /// derivative does not, so the estimate may be degraded there.
    pub near_zero_warning: bool,
}

/// F_cl = sum_m (dp_m/dg)^2 / p_m with dp_m from central differences of
/// step `fd_step`. Outcomes with both p_m and |dp_m| below the floor are
/// excluded; an outcome below the floor with a live derivative only raises
/// the warning flag.
pub fn classical_fisher(
    spec: &ModelSpec,
    probe: &PureState,
    meas: &ProjectiveMeasurement,
    g: f64,
    t: f64,
    fd_step: f64,
) -> Result<FisherEstimate> {
    if !fd_step.is_finite() || fd_step <= 0.0 {
        return Err(WorkbenchError::InvalidArgument(format!(
            "finite-difference step must be positive, got {fd_step}"
        )));
    }
    let p = outcome_distribution(spec, probe, meas, g, t)?;
    let p_plus = outcome_distribution(spec, probe, meas, g + fd_step, t)?;
    let p_minus = outcome_distribution(spec, probe, meas, g - fd_step, t)?;
    let mut value = 0.0f64;
    let mut near_zero_warning = false;
    for m in 0..p.len() {
        let dp = (p_plus[m] - p_minus[m]) / (2.0 * fd_step);
        if p[m] > PROBABILITY_FLOOR {
            value += dp * dp / p[m];
        } else if dp.abs() > PROBABILITY_FLOOR {
            near_zero_warning = true;
        }
    }
    Ok(FisherEstimate {
        value,
        near_zero_warning,
    })
}

/// Outcomes of `nu` independent draws from a fixed distribution.
#[derive(Debug, Clone, Serialize)]
pub struct SampleSet {
    pub nu: usize,
    pub outcomes: Vec<u32>,
    pub seed: u64,
}

impl SampleSet {
    pub fn counts(&self, dim: usize) -> Vec<u64> {
        let mut counts = vec![0u64; dim];
        for &o in &self.outcomes {
            counts[o as usize] += 1;
        }
        counts
    }
}

fn validate_distribution(probs: &[f64]) -> Result<()> {
    if probs.is_empty() {
        return Err(WorkbenchError::InvalidDistribution(
            "empty distribution".into(),
        ));
    }
    if probs.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(WorkbenchError::InvalidDistribution(
            "probabilities must be finite and nonnegative".into(),
        ));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(WorkbenchError::InvalidDistribution(format!(
            "probabilities sum to {total}, expected 1"
        )));
    }
    Ok(())
}

fn sampler_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_outcomes(probs: &[f64], nu: usize, rng: &mut ChaCha8Rng) -> Result<Vec<u32>> {
    let weights: Vec<f64> = probs.iter().map(|p| p.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| WorkbenchError::InvalidDistribution(e.to_string()))?;
    Ok((0..nu).map(|_| dist.sample(rng) as u32).collect())
}

/// Draws `nu` outcomes reproducibly from `probs` under the given seed.
pub fn sample_outcomes(probs: &[f64], nu: usize, seed: u64) -> Result<SampleSet> {
    if nu == 0 {
        return Err(WorkbenchError::InvalidArgument(
            "sample count must be at least 1".into(),
        ));
    }
    validate_distribution(probs)?;
    let mut rng = sampler_rng(seed, 0);
    Ok(SampleSet {
        nu,
        outcomes: draw_outcomes(probs, nu, &mut rng)?,
        seed,
    })
}

/// Uniform scan grid for the likelihood.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, points: usize) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || hi <= lo || points < 3 {
            return Err(WorkbenchError::InvalidArgument(format!(
                "grid must satisfy hi > lo with at least 3 points, got [{lo}, {hi}] x {points}"
            )));
        }
        Ok(Self { lo, hi, points })
    }

    pub fn point(&self, i: usize) -> f64 {
        self.lo + (self.hi - self.lo) * i as f64 / (self.points - 1) as f64
    }
}

/// Maximum-likelihood estimate from a grid scan.
#[derive(Debug, Clone, Serialize)]
pub struct MleEstimate {
    pub g_est: f64,
    /// The log-likelihood was flat across the grid; the estimate defaulted
    /// to the lower edge.
    pub flat_likelihood: bool,
}

/// Log-likelihood lookup table over a grid, reusable across sample sets.
pub struct LikelihoodTable {
    grid: GridSpec,
    log_probs: Vec<Vec<f64>>,
}

impl LikelihoodTable {
    pub fn new(
        spec: &ModelSpec,
        probe: &PureState,
        meas: &ProjectiveMeasurement,
        t: f64,
        grid: GridSpec,
    ) -> Result<Self> {
        let mut log_probs = Vec::with_capacity(grid.points);
        for i in 0..grid.points {
            let p = outcome_distribution(spec, probe, meas, grid.point(i), t)?;
            log_probs.push(p.iter().map(|&x| x.max(0.0).ln()).collect());
        }
        Ok(Self { grid, log_probs })
    }

    /// Grid argmax of sum_m count_m log p_m(g), refined by 3-point parabolic
    /// interpolation. Ties break toward lower g; a maximum at either grid
    /// edge is a bracketing error.
    pub fn mle(&self, counts: &[u64]) -> Result<MleEstimate> {
        let loglik: Vec<f64> = self
            .log_probs
            .iter()
            .map(|row| {
                counts
                    .iter()
                    .zip(row)
                    .filter(|(&c, _)| c > 0)
                    .map(|(&c, &lp)| c as f64 * lp)
                    .sum::<f64>()
            })
            .collect();
        let finite_max = loglik.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let finite_min = loglik.iter().copied().fold(f64::INFINITY, f64::min);
        if !finite_max.is_finite() {
            return Err(WorkbenchError::Numerical(
                "log-likelihood is -inf across the whole grid".into(),
            ));
        }
        let flat_tol = 1e-12 * finite_max.abs().max(1.0);
        if finite_min.is_finite() && finite_max - finite_min <= flat_tol {
            return Ok(MleEstimate {
                g_est: self.grid.lo,
                flat_likelihood: true,
            });
        }
        let mut best = 0usize;
        for (i, &v) in loglik.iter().enumerate() {
            if v > loglik[best] {
                best = i;
            }
        }
        if best == 0 {
            return Err(WorkbenchError::MleBracket { side: "lower" });
        }
        if best == self.grid.points - 1 {
            return Err(WorkbenchError::MleBracket { side: "upper" });
        }
        let (ym, y0, yp) = (loglik[best - 1], loglik[best], loglik[best + 1]);
        let step = (self.grid.hi - self.grid.lo) / (self.grid.points - 1) as f64;
        let denom = ym - 2.0 * y0 + yp;
        let g_est = if ym.is_finite() && yp.is_finite() && denom < -1e-300 {
            self.grid.point(best) + 0.5 * step * (ym - yp) / denom
        } else {
            self.grid.point(best)
        };
        Ok(MleEstimate {
            g_est,
            flat_likelihood: false,
        })
    }
}

/// Grid maximum-likelihood estimation of g from a sample set.
pub fn mle_grid(
    samples: &SampleSet,
    spec: &ModelSpec,
    probe: &PureState,
    meas: &ProjectiveMeasurement,
    t: f64,
    grid: GridSpec,
) -> Result<MleEstimate> {
    let table = LikelihoodTable::new(spec, probe, meas, t, grid)?;
    table.mle(&samples.counts(spec.dim()))
}

/// Configuration of a Cramer-Rao comparison experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CrbConfig {
    pub g_true: f64,
    pub t: f64,
    pub nu: usize,
    pub replications: usize,
    pub seed: u64,
    /// Scan grid; `None` derives one from the classical Fisher information.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    pub fd_step: f64,
}

impl CrbConfig {
    pub fn new(g_true: f64, t: f64, nu: usize, replications: usize, seed: u64) -> Self {
        Self {
            g_true,
            t,
            nu,
            replications,
            seed,
            grid: None,
            fd_step: DEFAULT_PROBABILITY_FD_STEP,
        }
    }
}

/// Monte Carlo summary of an estimation experiment.
#[derive(Debug, Clone, Serialize)]
pub struct EstimationReport {
    pub g_true: f64,
    pub t: f64,
    pub nu: usize,
    pub replications: usize,
    pub seed: u64,
    pub g_est_mean: f64,
    pub bias: f64,
    /// Slope-normalized mean-square error of the estimator.
    pub mse: f64,
    /// Cramer-Rao reference 1/(nu F_cl).
    pub crb: f64,
    pub f_classical: f64,
    pub f_quantum: f64,
    /// d<g_est>/dg estimated by rerunning the experiment at g_true +- Delta.
    pub slope: f64,
}

/// Runs `replications` rounds of sample-and-estimate at `g_true`, reruns the
/// mean estimate at g_true +- Delta for the slope normalization, and compares
/// the slope-normalized MSE with the Cramer-Rao reference.
///
/// Each replication draws its RNG stream from (seed, replication index), so
/// any execution order gives identical reports.
pub fn crb_experiment(
    spec: &ModelSpec,
    probe: &PureState,
    meas: &ProjectiveMeasurement,
    config: &CrbConfig,
) -> Result<EstimationReport> {
    if config.nu == 0 || config.replications == 0 {
        return Err(WorkbenchError::InvalidArgument(
            "nu and replications must be at least 1".into(),
        ));
    }
    let fisher = classical_fisher(spec, probe, meas, config.g_true, config.t, config.fd_step)?;
    if fisher.value < IDENTIFIABILITY_FLOOR {
        return Err(WorkbenchError::Identifiability {
            value: fisher.value,
        });
    }
    let f_cl = fisher.value;
    let crb = 1.0 / (config.nu as f64 * f_cl);
    let sigma = crb.sqrt();
    let delta = 2.0 * sigma;
    let grid = match config.grid {
        Some(g) => g,
        None => GridSpec::new(
            config.g_true - 12.0 * sigma,
            config.g_true + 12.0 * sigma,
            241,
        )?,
    };
    let table = LikelihoodTable::new(spec, probe, meas, config.t, grid)?;

    // Offsets: 0 -> g_true, 1 -> g_true + Delta, 2 -> g_true - Delta. The
    // same per-replication stream is reused at each offset (common random
    // numbers) so the slope estimate is low-variance.
    let mut distributions = Vec::with_capacity(3);
    for offset in [0.0, delta, -delta] {
        distributions.push(outcome_distribution(
            spec,
            probe,
            meas,
            config.g_true + offset,
            config.t,
        )?);
    }
    for p in &distributions {
        validate_distribution(p)?;
    }

    let dim = spec.dim();
    let mut estimates: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for rep in 0..config.replications {
        for (slot, probs) in distributions.iter().enumerate() {
            let mut rng = sampler_rng(config.seed, rep as u64);
            let outcomes = draw_outcomes(probs, config.nu, &mut rng)?;
            let mut counts = vec![0u64; dim];
            for &o in &outcomes {
                counts[o as usize] += 1;
            }
            estimates[slot].push(table.mle(&counts)?.g_est);
        }
    }

    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let g_est_mean = mean(&estimates[0]);
    let slope = (mean(&estimates[1]) - mean(&estimates[2])) / (2.0 * delta);
    if !slope.is_finite() || slope.abs() < 1e-6 {
        return Err(WorkbenchError::Numerical(format!(
            "estimator slope {slope:.3e} is degenerate; cannot normalize the error"
        )));
    }
    let mse = estimates[0]
        .iter()
        .map(|&g_est| {
            let err = g_est / slope.abs() - config.g_true;
            err * err
        })
        .sum::<f64>()
        / estimates[0].len() as f64;

    let (h, u) = evolved_frame(spec, config.g_true, config.t)?;
    let evolved = u.apply(probe)?;
    let f_quantum = 4.0 * variance(&h, &evolved)?;

    Ok(EstimationReport {
        g_true: config.g_true,
        t: config.t,
        nu: config.nu,
        replications: config.replications,
        seed: config.seed,
        g_est_mean,
        bias: g_est_mean - config.g_true,
        mse,
        crb,
        f_classical: f_cl,
        f_quantum,
        slope,
    })
}

/// The standard probe/measurement pairing for a model at (g, t): the
/// optimal probe (pre-evolution) and the SLD-eigenbasis measurement.
pub fn optimal_setup(
    spec: &ModelSpec,
    g: f64,
    t: f64,
) -> Result<(PureState, ProjectiveMeasurement)> {
    let (h, u) = evolved_frame(spec, g, t)?;
    let (_, evolved) = crate::qfi::qfi_max(&h)?;
    let probe = u.apply_inverse(&evolved)?;
    let meas = sld_measurement(spec, &probe, g, t)?;
    Ok((probe, meas))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BuiltinModel, CoefficientExpr};
    use crate::operators::{pauli_z, ComplexVector};
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn direction_model() -> ModelSpec {
        BuiltinModel::spin_direction(1.0).spec().unwrap()
    }

    fn x_basis() -> ProjectiveMeasurement {
        let s = 1.0 / 2.0f64.sqrt();
        ProjectiveMeasurement::new(ComplexMatrix::from_row_slice(
            2,
            2,
            &[c(s, 0.0), c(s, 0.0), c(s, 0.0), c(-s, 0.0)],
        ))
        .unwrap()
    }

    #[test]
    fn delta_distribution_for_matching_probe() {
        let spec = direction_model();
        let meas = ProjectiveMeasurement::computational(2);
        let probe = PureState::basis_state(2, 1).unwrap();
        let p = outcome_distribution(&spec, &probe, &meas, 0.0, 0.0).unwrap();
        assert!((p[1] - 1.0).abs() <= 1e-12);
        assert!(p[0] <= 1e-12);
    }

    #[test]
    fn symmetric_split_at_zero_time() {
        let spec = direction_model();
        let probe = PureState::basis_state(2, 0).unwrap();
        let p = outcome_distribution(&spec, &probe, &x_basis(), 0.2, 0.0).unwrap();
        assert!((p[0] - 0.5).abs() <= 1e-12);
        assert!((p[1] - 0.5).abs() <= 1e-12);
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn optimal_setup_distribution_matches_amplitudes() {
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let (probe, meas) = optimal_setup(&spec, 0.0, t).unwrap();
        let p = outcome_distribution(&spec, &probe, &meas, 0.0, t).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
        // Direct amplitude computation.
        let decomp = eigendecompose(&spec.evaluate(0.0), None).unwrap();
        let u = evolution_operator(&decomp, t).unwrap();
        let evolved = u.apply(&probe).unwrap();
        let overlaps = meas.vectors().adjoint() * evolved.amplitudes();
        for (m, z) in overlaps.iter().enumerate() {
            assert!((p[m] - z.norm_sqr()).abs() <= 1e-12);
        }
    }

    #[test]
    fn fisher_of_g_independent_distribution_is_zero() {
        let spec = ModelSpec::new(
            2,
            vec![(CoefficientExpr::constant(1.0), pauli_z())],
            "fixed",
        )
        .unwrap();
        let probe = PureState::basis_state(2, 0).unwrap();
        let f = classical_fisher(&spec, &probe, &x_basis(), 0.3, 1.0, 1e-6).unwrap();
        assert!(f.value <= 1e-12);
    }

    #[test]
    fn sld_basis_attains_quantum_fisher_information() {
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let (g, t) = (0.4, 1.2);
        let (probe, meas) = optimal_setup(&spec, g, t).unwrap();
        let f_cl = classical_fisher(&spec, &probe, &meas, g, t, 1e-6)
            .unwrap()
            .value;
        let (h, u) = evolved_frame(&spec, g, t).unwrap();
        let f_q = 4.0 * variance(&h, &u.apply(&probe).unwrap()).unwrap();
        assert!((f_cl - f_q).abs() <= 1e-4, "{f_cl} vs {f_q}");
    }

    #[test]
    fn binomial_model_matches_analytic_fisher() {
        // H = g sz with probe |+> and X-basis measurement gives the coin
        // p(g) = cos^2(g t), whose Fisher information is (dp)^2 / (p(1-p)).
        let spec = BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0])
            .unwrap()
            .spec()
            .unwrap();
        let probe =
            PureState::normalized(ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let t = 1.0;
        for &g in &[0.3, 0.6, 1.0] {
            let f = classical_fisher(&spec, &probe, &x_basis(), g, t, 1e-6)
                .unwrap()
                .value;
            let p = (g * t).cos().powi(2);
            let dp = -2.0 * t * (g * t).cos() * (g * t).sin();
            let expected = dp * dp / (p * (1.0 - p));
            assert!((f - expected).abs() <= 1e-6 * expected.max(1.0), "g={g}");
        }
    }

    #[test]
    fn sampling_is_deterministic_and_concentrates() {
        let probs = [0.5, 0.5];
        let a = sample_outcomes(&probs, 100_000, 7).unwrap();
        let b = sample_outcomes(&probs, 100_000, 7).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        let counts = a.counts(2);
        let freq = counts[0] as f64 / a.nu as f64;
        assert!((freq - 0.5).abs() <= 0.005, "freq = {freq}");
        let tv: f64 = counts
            .iter()
            .zip(probs)
            .map(|(&cnt, p)| (cnt as f64 / a.nu as f64 - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.01);
    }

    #[test]
    fn delta_distribution_sampling() {
        let s = sample_outcomes(&[0.0, 1.0, 0.0], 50, 3).unwrap();
        assert!(s.outcomes.iter().all(|&o| o == 1));
    }

    #[test]
    fn invalid_distribution_is_rejected() {
        assert!(matches!(
            sample_outcomes(&[0.7, 0.7], 10, 0),
            Err(WorkbenchError::InvalidDistribution(_))
        ));
    }

    #[test]
    fn mle_recovers_true_parameter() {
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let (g_true, t) = (0.3, 1.0);
        let (probe, meas) = optimal_setup(&spec, g_true, t).unwrap();
        let p = outcome_distribution(&spec, &probe, &meas, g_true, t).unwrap();
        let nu = 100_000;
        let samples = sample_outcomes(&p, nu, 11).unwrap();
        let f_cl = classical_fisher(&spec, &probe, &meas, g_true, t, 1e-6)
            .unwrap()
            .value;
        let grid = GridSpec::new(g_true - 0.05, g_true + 0.05, 201).unwrap();
        let est = mle_grid(&samples, &spec, &probe, &meas, t, grid).unwrap();
        assert!(!est.flat_likelihood);
        let band = 5.0 / (nu as f64 * f_cl).sqrt();
        assert!(
            (est.g_est - g_true).abs() <= band,
            "estimate {} vs {g_true} (band {band})",
            est.g_est
        );
    }

    #[test]
    fn monotone_likelihood_hits_boundary() {
        // Samples concentrated on one outcome with p monotone over the grid
        // push the argmax to an edge.
        let spec = BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0])
            .unwrap()
            .spec()
            .unwrap();
        let probe =
            PureState::normalized(ComplexVector::from_vec(vec![c(1.0, 0.0), c(1.0, 0.0)])).unwrap();
        let samples = SampleSet {
            nu: 40,
            outcomes: vec![0; 40],
            seed: 0,
        };
        // p(outcome 0) = cos^2(g) is decreasing on [0.1, 0.5].
        let grid = GridSpec::new(0.1, 0.5, 41).unwrap();
        assert!(matches!(
            mle_grid(&samples, &spec, &probe, &x_basis(), 1.0, grid),
            Err(WorkbenchError::MleBracket { side: "lower" })
        ));
    }

    #[test]
    fn flat_likelihood_returns_lower_edge_with_warning() {
        let spec = ModelSpec::new(
            2,
            vec![(CoefficientExpr::constant(1.0), pauli_z())],
            "fixed",
        )
        .unwrap();
        let probe = PureState::basis_state(2, 0).unwrap();
        let samples = SampleSet {
            nu: 30,
            outcomes: vec![0; 15].into_iter().chain(vec![1; 15]).collect(),
            seed: 0,
        };
        let grid = GridSpec::new(-0.2, 0.2, 21).unwrap();
        let est = mle_grid(&samples, &spec, &probe, &x_basis(), 1.0, grid).unwrap();
        assert!(est.flat_likelihood);
        assert!((est.g_est + 0.2).abs() <= 1e-12);
    }

    #[test]
    fn crb_experiment_on_direction_model() {
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let t = std::f64::consts::FRAC_PI_2;
        let (probe, meas) = optimal_setup(&spec, 0.0, t).unwrap();
        let config = CrbConfig::new(0.0, t, 10_000, 200, 5);
        let report = crb_experiment(&spec, &probe, &meas, &config).unwrap();
        assert!((report.f_classical - 4.0).abs() <= 1e-4);
        assert!(report.f_classical <= report.f_quantum + 1e-6);
        let expected_crb = 1.0 / (10_000.0 * 4.0);
        assert!((report.crb - expected_crb).abs() <= 1e-9);
        assert!(
            report.mse >= 0.8 * report.crb && report.mse <= 1.6 * report.crb,
            "mse = {:.3e}, crb = {:.3e}",
            report.mse,
            report.crb
        );
    }

    #[test]
    fn mse_approaches_cramer_rao_with_sample_size() {
        // MSE * nu * F_cl -> 1 as nu grows; the band tightens with nu.
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let t = 1.1;
        let (probe, meas) = optimal_setup(&spec, 0.2, t).unwrap();
        for (nu, lo, hi) in [(1_000usize, 0.7, 1.8), (10_000, 0.8, 1.6)] {
            let config = CrbConfig::new(0.2, t, nu, 200, 31);
            let report = crb_experiment(&spec, &probe, &meas, &config).unwrap();
            let ratio = report.mse * nu as f64 * report.f_classical;
            assert!(
                ratio >= lo && ratio <= hi,
                "nu = {nu}: mse * nu * F = {ratio}"
            );
        }
    }

    #[test]
    fn crb_experiment_fails_at_zero_information_point() {
        let spec = BuiltinModel::spin_direction(1.0).spec().unwrap();
        let t_good = std::f64::consts::FRAC_PI_2;
        let (probe, meas) = optimal_setup(&spec, 0.0, t_good).unwrap();
        // At t = pi the generator vanishes (sin(pi) = 0): no information.
        let config = CrbConfig::new(0.0, std::f64::consts::PI, 1_000, 10, 1);
        assert!(matches!(
            crb_experiment(&spec, &probe, &meas, &config),
            Err(WorkbenchError::Identifiability { .. })
        ));
    }

    #[test]
    fn crb_experiment_on_amplitude_model() {
        let spec = BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0])
            .unwrap()
            .spec()
            .unwrap();
        let (g_true, t) = (0.4, 1.0);
        let (probe, meas) = optimal_setup(&spec, g_true, t).unwrap();
        let config = CrbConfig::new(g_true, t, 10_000, 200, 99);
        let report = crb_experiment(&spec, &probe, &meas, &config).unwrap();
        // F = 4 t^2 for the optimal probe, so crb = 2.5e-5 at nu = 1e4.
        assert!((report.crb - 2.5e-5).abs() <= 1e-8);
        assert!(
            report.mse >= 0.8 * report.crb && report.mse <= 1.6 * report.crb,
            "mse = {:.3e}, crb = {:.3e}",
            report.mse,
            report.crb
        );
    }
}
