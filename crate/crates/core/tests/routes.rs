//! Cross-route validation over the full seeded model set: all four
//! generator routes agree pairwise, the superoperator has the expected
//! structure, bounds hold on a time grid, and the SLD value matches the
//! generator variance.

use qfi_workbench::validation::{run_validation, ValidationTolerances};

#[test]
fn fifty_seeded_models_validate() {
    let tolerances = ValidationTolerances::default();
    let report = run_validation(42, 50).unwrap();
    assert_eq!(report.instances.len(), 53);

    for instance in &report.instances {
        assert!(
            instance.max_route_distance <= tolerances.route_distance,
            "instance {} ({}): route distance {}",
            instance.index,
            instance.label,
            instance.max_route_distance
        );
        assert!(
            instance.max_hermiticity_defect <= tolerances.hermiticity,
            "instance {} ({}): hermiticity defect {}",
            instance.index,
            instance.label,
            instance.max_hermiticity_defect
        );
        assert!(
            instance.superop_hermiticity_defect <= tolerances.superop_hermiticity,
            "instance {}: superoperator hermiticity {}",
            instance.index,
            instance.superop_hermiticity_defect
        );
        assert!(
            instance.superop_eigenvalue_defect <= tolerances.superop_eigenvalue,
            "instance {}: superoperator eigenvalue defect {}",
            instance.index,
            instance.superop_eigenvalue_defect
        );
        assert!(
            instance.parseval_defect <= tolerances.parseval,
            "instance {}: parseval defect {}",
            instance.index,
            instance.parseval_defect
        );
        assert!(
            instance.spectral_bound_satisfied,
            "instance {}",
            instance.index
        );
        assert!(instance.hs_bound_satisfied, "instance {}", instance.index);
        if let Some(ok) = instance.ceiling_satisfied {
            assert!(ok, "instance {}: ceiling violated", instance.index);
        }
        assert!(
            instance.sld_defect <= tolerances.sld,
            "instance {}: sld defect {}",
            instance.index,
            instance.sld_defect
        );
        assert!(instance.passed);
    }
    assert!(report.passed);

    // The builtin direction models must exercise the t-independent ceiling.
    let applicable = report
        .instances
        .iter()
        .filter(|i| i.ceiling_applicable)
        .count();
    assert!(applicable >= 2, "ceiling check is vacuous");
}

#[test]
fn validation_reports_are_reproducible() {
    let a = run_validation(7, 6).unwrap();
    let b = run_validation(7, 6).unwrap();
    let ja = serde_json::to_string(&a).unwrap();
    let jb = serde_json::to_string(&b).unwrap();
    assert_eq!(ja, jb);
}
