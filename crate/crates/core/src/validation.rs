//! Cross-route validation on seeded random models: route equivalence of the
//! generator, superoperator structure, bound satisfaction over a time grid,
//! and the SLD consistency check. The same instance generator backs both the
//! CLI `validate` command and the test suites, so results are comparable.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::generator::{
    assemble_spectral_generator, build_superoperator, default_gap_floor,
    generator_finite_difference, generator_quadrature, generator_spectral, generator_superoperator,
    DEFAULT_FD_STEP, DEFAULT_QUADRATURE_TOL,
};
use crate::model::{BuiltinModel, CoefficientExpr, ModelSpec};
use crate::operators::{
    eigendecompose, evolution_operator, hermitian_part, hermiticity_defect, hs_inner, max_norm,
    variance, ComplexMatrix, ComplexVector, HermitianOperator, PureState, IM,
};
use crate::qfi::{
    bound_eigenvalue_independent_ceiling, bound_hilbert_schmidt, bound_spectral, qfi_max, sld_qfi,
};

/// Thresholds applied by [`check_instance`]. All values are pinned here.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationTolerances {
    /// Pairwise max-norm distance between generator routes.
    pub route_distance: f64,
    /// Hermiticity defect of any route's generator.
    pub hermiticity: f64,
    /// Hermiticity defect of the superoperator matrix.
    pub superop_hermiticity: f64,
    /// Distance between the superoperator spectrum and the pairwise
    /// eigenvalue differences of H.
    pub superop_eigenvalue: f64,
    /// Defect of sum |c_k|^2 = Tr[(dH)^2].
    pub parseval: f64,
    /// Slack added to every bound comparison.
    pub bound_slack: f64,
    /// Distance between the SLD value and 4 var(h) on the evolved state.
    pub sld: f64,
}

impl Default for ValidationTolerances {
    fn default() -> Self {
        Self {
            route_distance: 1e-6,
            hermiticity: 1e-8,
            superop_hermiticity: 1e-10,
            superop_eigenvalue: 1e-8,
            parseval: 1e-8,
            bound_slack: 1e-8,
            sld: 1e-7,
        }
    }
}

/// Number of points on the bound-check time grid.
pub const BOUND_GRID_POINTS: usize = 50;

/// Upper end of the bound-check time grid.
pub const BOUND_GRID_T_MAX: f64 = 3.0;

/// One model instance to validate: the model plus the (g, t) point and the
/// probe used for the SLD check.
#[derive(Debug, Clone)]
pub struct ValidationInstance {
    pub index: usize,
    pub spec: ModelSpec,
    pub g: f64,
    pub t: f64,
    pub probe: PureState,
}

/// Per-instance check outcome; `passed` aggregates every threshold.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceReport {
    pub index: usize,
    pub label: String,
    pub dim: usize,
    pub g: f64,
    pub t: f64,
    pub max_route_distance: f64,
    pub max_hermiticity_defect: f64,
    pub superop_hermiticity_defect: f64,
    pub superop_eigenvalue_defect: f64,
    pub parseval_defect: f64,
    pub spectral_bound_satisfied: bool,
    pub hs_bound_satisfied: bool,
    pub ceiling_applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ceiling_satisfied: Option<bool>,
    pub sld_defect: f64,
    pub passed: bool,
}

/// Aggregate over all instances.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub requested_count: usize,
    pub tolerances: ValidationTolerances,
    pub max_route_distance: f64,
    pub max_hermiticity_defect: f64,
    pub max_superop_hermiticity_defect: f64,
    pub max_superop_eigenvalue_defect: f64,
    pub max_sld_defect: f64,
    pub passed: bool,
    pub instances: Vec<InstanceReport>,
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
    let raw = ComplexMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    hermitian_part(&raw)
}

fn random_coefficient(rng: &mut ChaCha8Rng) -> CoefficientExpr {
    let scale = loop {
        let s: f64 = rng.gen_range(-1.0..1.0);
        if s.abs() > 0.2 {
            break s;
        }
    };
    let scale = CoefficientExpr::constant(scale);
    match rng.gen_range(0u8..6) {
        0 => scale,
        1 => scale * CoefficientExpr::parameter(),
        2 => scale * CoefficientExpr::pow(CoefficientExpr::parameter(), 2),
        3 => scale * CoefficientExpr::sin(CoefficientExpr::parameter()),
        4 => scale * CoefficientExpr::cos(CoefficientExpr::parameter()),
        _ => {
            scale * CoefficientExpr::sin(CoefficientExpr::parameter())
                + CoefficientExpr::constant(rng.gen_range(-0.5..0.5))
        }
    }
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> PureState {
    let v = ComplexVector::from_fn(dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    PureState::normalized(v).expect("random vector is nonzero with probability 1")
}

/// Deterministic random model for validation slot `index`: dimension cycles
/// through {2, 3, 4, 6} and the term count through 1-3.
fn random_instance(seed: u64, index: usize) -> ValidationInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let dims = [2usize, 3, 4, 6];
    let dim = dims[index % dims.len()];
    let n_terms = rng.gen_range(1..=3);
    let terms: Vec<(CoefficientExpr, ComplexMatrix)> = (0..n_terms)
        .map(|_| {
            (
                random_coefficient(&mut rng),
                random_hermitian(&mut rng, dim),
            )
        })
        .collect();
    let spec = ModelSpec::new(dim, terms, format!("random-{index}(d={dim})"))
        .expect("random Hermitian terms are valid");
    let g = rng.gen_range(-1.0..1.0);
    let t = rng.gen_range(0.3..2.5);
    let probe = random_state(&mut rng, dim);
    ValidationInstance {
        index,
        spec,
        g,
        t,
        probe,
    }
}

fn builtin_instance(seed: u64, index: usize, which: usize) -> ValidationInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let g = rng.gen_range(-1.0..1.0);
    let t = rng.gen_range(0.3..2.5);
    let builtin = match which {
        0 => BuiltinModel::spin_direction(1.0),
        1 => BuiltinModel::spin_direction_general(
            1.0,
            [
                CoefficientExpr::parse("cos(2*g)").unwrap(),
                CoefficientExpr::constant(0.0),
                CoefficientExpr::parse("sin(2*g)").unwrap(),
            ],
        ),
        _ => BuiltinModel::spin_amplitude(CoefficientExpr::parameter(), [0.0, 0.0, 1.0]).unwrap(),
    };
    let spec = builtin.spec().expect("builtin models are valid");
    let probe = random_state(&mut rng, spec.dim());
    ValidationInstance {
        index,
        spec,
        g,
        t,
        probe,
    }
}

/// The validation instance list: `count` seeded random models followed by
/// three builtin spin models, which exercise the g-independent-spectrum
/// ceiling and the commuting (t^2-growth) sector.
pub fn validation_instances(seed: u64, count: usize) -> Vec<ValidationInstance> {
    let mut instances: Vec<ValidationInstance> =
        (0..count).map(|i| random_instance(seed, i)).collect();
    for which in 0..3 {
        instances.push(builtin_instance(seed, count + which, which));
    }
    instances
}

/// Runs every check on one instance.
pub fn check_instance(
    instance: &ValidationInstance,
    tolerances: &ValidationTolerances,
) -> Result<InstanceReport> {
    let spec = &instance.spec;
    let (g, t) = (instance.g, instance.t);

    // Route equivalence.
    let fd = generator_finite_difference(spec, g, t, DEFAULT_FD_STEP)?;
    let quad = generator_quadrature(spec, g, t, DEFAULT_QUADRATURE_TOL)?;
    let superop_route = generator_superoperator(spec, g, t, None)?;
    let spectral = generator_spectral(spec, g, t, None)?;
    let routes = [&fd, &quad, &superop_route, &spectral];
    let mut max_route_distance = 0.0f64;
    for i in 0..routes.len() {
        for j in i + 1..routes.len() {
            let dist = max_norm(&(routes[i].h.matrix() - routes[j].h.matrix()));
            max_route_distance = max_route_distance.max(dist);
        }
    }
    let max_hermiticity_defect = routes
        .iter()
        .map(|r| r.diagnostics.hermiticity_defect)
        .fold(0.0f64, f64::max);

    // Superoperator structure.
    let superop = build_superoperator(spec, g)?;
    let superop_hermiticity_defect = hermiticity_defect(superop.matrix());
    let decomp = eigendecompose(&spec.evaluate(g), None)?;
    let mut differences: Vec<f64> = Vec::with_capacity(spec.dim() * spec.dim());
    for &ek in decomp.eigenvalues() {
        for &el in decomp.eigenvalues() {
            differences.push(ek - el);
        }
    }
    differences.sort_by(f64::total_cmp);
    let superop_eigenvalue_defect = superop
        .eigenvalues()
        .iter()
        .zip(&differences)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);

    let d_h = spec.differentiate().evaluate(g).into_matrix();
    let coeff_sum: f64 = superop.coefficients().iter().map(|c| c.norm_sqr()).sum();
    let trace_sq = hs_inner(&d_h, &d_h)?.re;
    let parseval_defect = (coeff_sum - trace_sq).abs() / trace_sq.max(1.0);

    // Bounds over a time grid, reusing the spectral data of H(g).
    let gap_floor = default_gap_floor(&decomp);
    let ceiling = bound_eigenvalue_independent_ceiling(spec, g, None).ok();
    let mut spectral_bound_satisfied = true;
    let mut hs_bound_satisfied = true;
    let mut ceiling_satisfied = ceiling.map(|_| true);
    for i in 1..=BOUND_GRID_POINTS {
        let tg = BOUND_GRID_T_MAX * i as f64 / BOUND_GRID_POINTS as f64;
        let (h_mat, _) = assemble_spectral_generator(&decomp, &d_h, tg, gap_floor);
        let h = HermitianOperator::from_validated(h_mat);
        let (qmax, _) = qfi_max(&h)?;
        if qmax > bound_spectral(spec, g, tg, None)? + tolerances.bound_slack {
            spectral_bound_satisfied = false;
        }
        if qmax > bound_hilbert_schmidt(&h) + tolerances.bound_slack {
            hs_bound_satisfied = false;
        }
        if let (Some(c), Some(ok)) = (ceiling, ceiling_satisfied.as_mut()) {
            if qmax > c + tolerances.bound_slack {
                *ok = false;
            }
        }
    }

    // SLD consistency on the evolved pure state.
    let (h_gen, _) = assemble_spectral_generator(&decomp, &d_h, t, gap_floor);
    let h_gen = HermitianOperator::from_validated(h_gen);
    let u = evolution_operator(&decomp, t)?;
    let evolved = u.apply(&instance.probe)?;
    let psi = evolved.amplitudes();
    let rho_mat = psi * psi.adjoint();
    let d_rho_mat = (h_gen.matrix() * &rho_mat - &rho_mat * h_gen.matrix()).map(|z| -IM * z);
    let rho = HermitianOperator::from_validated(hermitian_part(&rho_mat));
    let d_rho = HermitianOperator::from_validated(hermitian_part(&d_rho_mat));
    let sld_value = sld_qfi(&rho, &d_rho, 1e-10)?;
    let direct = 4.0 * variance(&h_gen, &evolved)?;
    let sld_defect = (sld_value - direct).abs() / direct.max(1.0);

    let passed = max_route_distance <= tolerances.route_distance
        && max_hermiticity_defect <= tolerances.hermiticity
        && superop_hermiticity_defect <= tolerances.superop_hermiticity
        && superop_eigenvalue_defect <= tolerances.superop_eigenvalue
        && parseval_defect <= tolerances.parseval
        && spectral_bound_satisfied
        && hs_bound_satisfied
        && ceiling_satisfied.unwrap_or(true)
        && sld_defect <= tolerances.sld;

    Ok(InstanceReport {
        index: instance.index,
        label: spec.label().to_string(),
        dim: spec.dim(),
        g,
        t,
        max_route_distance,
        max_hermiticity_defect,
        superop_hermiticity_defect,
        superop_eigenvalue_defect,
        parseval_defect,
        spectral_bound_satisfied,
        hs_bound_satisfied,
        ceiling_applicable: ceiling.is_some(),
        ceiling_satisfied,
        sld_defect,
        passed,
    })
}

/// Assembles the aggregate report from per-instance results.
pub fn assemble_report(
    seed: u64,
    requested_count: usize,
    tolerances: ValidationTolerances,
    instances: Vec<InstanceReport>,
) -> ValidationReport {
    let fold = |f: fn(&InstanceReport) -> f64| instances.iter().map(f).fold(0.0f64, f64::max);
    ValidationReport {
        seed,
        requested_count,
        max_route_distance: fold(|i| i.max_route_distance),
        max_hermiticity_defect: fold(|i| i.max_hermiticity_defect),
        max_superop_hermiticity_defect: fold(|i| i.superop_hermiticity_defect),
        max_superop_eigenvalue_defect: fold(|i| i.superop_eigenvalue_defect),
        max_sld_defect: fold(|i| i.sld_defect),
        passed: instances.iter().all(|i| i.passed),
        tolerances,
        instances,
    }
}

/// Serial convenience wrapper: generate, check, aggregate.
pub fn run_validation(seed: u64, count: usize) -> Result<ValidationReport> {
    let tolerances = ValidationTolerances::default();
    let mut reports = Vec::new();
    for instance in validation_instances(seed, count) {
        reports.push(check_instance(&instance, &tolerances)?);
    }
    Ok(assemble_report(seed, count, tolerances, reports))
}
