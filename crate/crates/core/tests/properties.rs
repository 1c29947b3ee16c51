use nri_core::analytic::{denominators, response_coefficients};
use nri_core::electro::constitutive_consistency;
use nri_core::oracle::{compare, extract_linear_response, ProbeSteps};
use nri_core::scalar::relative_difference;
use nri_core::sweep::{
    detect_branch_flips, find_negative_bands, read_csv, run_sweep, write_csv, DriveGroup,
    Execution, SweepSpec,
};
use nri_core::{evaluate_point, EquationMode, FormulaMode, PipelineModes, ScaledConfig};
use proptest::prelude::*;

fn spec(points: usize, groups: Vec<DriveGroup>, from: f64, to: f64) -> SweepSpec {
    SweepSpec {
        delta_p_range: (from, to),
        points,
        groups,
        ..SweepSpec::reference_default(ScaledConfig::reference_defaults())
    }
}

fn group() -> impl Strategy<Value = DriveGroup> {
    (0.0f64..60.0, 0.0f64..25.0).prop_map(|(g, o)| DriveGroup::new(g, o))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parallel_matches_sequential(
        groups in proptest::collection::vec(group(), 1..4),
        points in 2usize..200,
        from in -3.0f64..0.0,
        width in 0.01f64..4.0,
    ) {
        let s = spec(points, groups, from, from + width);
        let a = run_sweep(&s, Execution::Sequential).unwrap();
        let b = run_sweep(&s, Execution::Parallel).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), points * s.groups.len());
    }

    #[test]
    fn csv_roundtrip_is_exact(
        groups in proptest::collection::vec(group(), 1..3),
        points in 2usize..80,
    ) {
        let s = spec(points, groups, -1.0, 1.0);
        let recs = run_sweep(&s, Execution::Sequential).unwrap();
        let mut buf = Vec::new();
        write_csv(&recs, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(&back, &recs);
        prop_assert_eq!(find_negative_bands(&back), find_negative_bands(&recs));
        prop_assert_eq!(detect_branch_flips(&back), detect_branch_flips(&recs));
    }

    #[test]
    fn bands_are_disjoint_and_negative(
        g in group(),
        points in 50usize..400,
    ) {
        let s = spec(points, vec![g], -1.0, 1.0);
        let recs = run_sweep(&s, Execution::Sequential).unwrap();
        let bands = find_negative_bands(&recs);
        for w in bands.windows(2) {
            prop_assert!(w[0].hi_index + 1 < w[1].lo_index);
        }
        for b in &bands {
            for r in &recs[b.lo_index..=b.hi_index] {
                let v = r.values.unwrap();
                prop_assert!(v.n.re < 0.0);
                prop_assert!(v.n.re >= b.min_re_n);
            }
        }
    }

    /// With no pump the ground state is exact and the adjudicated closed
    /// forms are the full linear response for any coupling strength.
    #[test]
    fn zero_pump_oracle_matches_adjudicated(
        omega_c in 0.0f64..25.0,
        dp in -1.0f64..1.0,
    ) {
        let p = ScaledConfig::reference_defaults()
            .with_group(0.0, omega_c)
            .with_delta_p(dp)
            .to_internal::<f64>()
            .unwrap();
        let c = compare(&p, ProbeSteps::default_for(&p).unwrap(), EquationMode::TracePreserving).unwrap();
        prop_assert!(c.adjudicated.relative_error[2].unwrap() < 1e-8, "{:?}", c.adjudicated.relative_error);
        prop_assert!(c.adjudicated.relative_error[1].unwrap() < 1e-8, "{:?}", c.adjudicated.relative_error);
    }

    #[test]
    fn equation_modes_agree_without_pump(omega_c in 0.0f64..25.0, dp in -1.0f64..1.0) {
        // ρ33 = 0 without pumping, so the cascade term is irrelevant.
        let p = ScaledConfig::reference_defaults()
            .with_group(0.0, omega_c)
            .with_delta_p(dp)
            .to_internal::<f64>()
            .unwrap();
        let steps = ProbeSteps::default_for(&p).unwrap();
        let a = extract_linear_response(&p, steps, EquationMode::TracePreserving).unwrap();
        let b = extract_linear_response(&p, steps, EquationMode::PaperLiteral).unwrap();
        prop_assert!(relative_difference(a.a3, b.a3) < 1e-10);
    }

    #[test]
    fn pipeline_consistency_on_random_points(g in group(), dp in -1.0f64..1.0) {
        let p = ScaledConfig::reference_defaults()
            .with_group(g.pump, g.omega_c)
            .with_delta_p(dp)
            .to_internal::<f64>()
            .unwrap();
        for mode in FormulaMode::ALL {
            let e = evaluate_point(&p, PipelineModes { formula_mode: mode, ..Default::default() }).unwrap();
            let r = constitutive_consistency(&e.polarizabilities, &p.constants).unwrap();
            prop_assert!(r.max() <= 1e-12, "{:?}", r);
        }
    }
}

#[test]
fn full_default_sweep_has_no_gaps() {
    let recs = run_sweep(
        &SweepSpec::reference_default(ScaledConfig::reference_defaults()),
        Execution::Parallel,
    )
    .unwrap();
    assert_eq!(recs.len(), 3 * 2001);
    assert!(recs.iter().all(|r| !r.degenerate()));
}

#[test]
fn literal_dipole_mode_changes_magnitudes_only_through_moments() {
    let si = ScaledConfig::reference_defaults()
        .to_internal::<f64>()
        .unwrap();
    let lit = ScaledConfig {
        dipole_mode: nri_core::DipoleMode::Literal,
        ..ScaledConfig::reference_defaults()
    }
    .to_internal::<f64>()
    .unwrap();
    let a = response_coefficients(&denominators(&si), &si, FormulaMode::PaperLiteral).unwrap();
    let b = response_coefficients(&denominators(&lit), &lit, FormulaMode::PaperLiteral).unwrap();
    // a3 ∝ d12, a2 ∝ μ34
    let r3 = b.a3 / a.a3;
    let r2 = b.a2 / a.a2;
    assert!((r3.re - lit.medium.d12 / si.medium.d12).abs() < 1e-9 * r3.re.abs());
    assert!(r3.im.abs() < 1e-9 * r3.re.abs());
    assert!((r2.re - lit.medium.mu34 / si.medium.mu34).abs() < 1e-9 * r2.re.abs());
}

#[test]
fn shipped_config_is_the_reference_set() {
    let path =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/reference.json");
    assert_eq!(
        ScaledConfig::from_path(&path).unwrap(),
        ScaledConfig::reference_defaults()
    );
}
