use proptest::prelude::*;
use pslab::asymptotics::moving_plane_check;
use pslab::field::{harmonic_parts, GridSpec, ScalarField, SolutionPair};
use pslab::fingerprint::Fingerprint;
use pslab::monotonicity::{almgren_scan, gamma_fn, linear_fit, ScanOptions};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gamma_at_first_eigenvalue_is_one(dim in 1usize..6) {
        prop_assert!((gamma_fn(dim, dim as f64 - 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_increasing(dim in 1usize..4, t in 0.0f64..50.0, dt in 1e-3f64..5.0) {
        prop_assert!(gamma_fn(dim, t + dt) > gamma_fn(dim, t));
        prop_assert!(gamma_fn(dim, t) >= 0.0);
    }

    #[test]
    fn fit_recovers_lines(a in -10.0f64..10.0, b in -10.0f64..10.0, n in 3usize..30) {
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * 0.7 - 2.0).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let (s, c, _) = linear_fit(&xs, &ys);
        prop_assert!((s - a).abs() < 1e-9 && (c - b).abs() < 1e-9);
    }

    #[test]
    fn fingerprint_depends_only_on_values(xs in prop::collection::vec(-1e9f64..1e9, 0..40)) {
        let a = Fingerprint::new().add("x", &xs).finish();
        let b = Fingerprint::new().add("x", &xs.clone()).finish();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn plane_reflection_holds_for_monotone_columns(slope in 0.1f64..3.0, lam in -3i32..=3) {
        // u increasing in x_N, v = u reflected: the plane inequality holds for every λ
        let grid = GridSpec::cube(2, -1.0, 1.0, 17).unwrap();
        let u = ScalarField::from_fn(grid.clone(), |p| (slope * p[1]).exp()).unwrap();
        let v = ScalarField::from_fn(grid, |p| (-slope * p[1]).exp()).unwrap();
        let pair = SolutionPair::new(u, v, 1.0).unwrap();
        let rep = moving_plane_check(&pair, lam as f64 * 0.25).unwrap();
        prop_assert!(rep.max_violation_u <= 0.0 && rep.max_violation_v <= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn frequency_is_amplitude_invariant(amp in 0.1f64..20.0, degree in 1u32..4) {
        let grid = GridSpec::cube(2, -1.0, 1.0, 65).unwrap();
        let base = harmonic_parts(&grid, degree, 1.0, 0.0).unwrap();
        let scaled = harmonic_parts(&grid, degree, amp, 0.0).unwrap();
        let opts = ScanOptions::for_dim(2).unwrap();
        let radii = [0.3, 0.5, 0.7];
        let a = almgren_scan(&base, &[0.0, 0.0], &radii, &opts).unwrap();
        let b = almgren_scan(&scaled, &[0.0, 0.0], &radii, &opts).unwrap();
        for i in 0..radii.len() {
            prop_assert!((b.h_values[i] / a.h_values[i] - amp * amp).abs() < 1e-9 * amp * amp);
            let (na, nb) = (a.frequency[i].unwrap(), b.frequency[i].unwrap());
            prop_assert!((na - nb).abs() < 1e-9 * na.abs().max(1.0));
        }
    }
}
