use multipin::exact::{endpoint_law_dp, sandwich_check, z_bruteforce, z_constrained_dp, z_free_dp};
use multipin::experiments::nearest_even;
use multipin::free_energy::{phi, phi_inf, regime_offset, root_residual, c_delta};
use multipin::kernels::{lambda0, q0_closed, q0_series, q1_closed, q1_series, q_closed};
use multipin::path::{parse_skeletons, skeleton_statistics, write_skeletons, FreeSampler};
use multipin::renewal::{partition_identity_check, renewal_mass, TiltedStepLaw, DEFAULT_STEP_TOLERANCE};
use multipin::rng::replica_rng;
use multipin::stats::{empirical_pmf, ks_statistic, normal_cdf, tv_distance};
use multipin::Geometry;
use proptest::prelude::*;

fn spacing(max_half: u32) -> impl Strategy<Value = u32> {
    (1..=max_half).prop_map(|h| 2 * h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_support_and_range(t in spacing(32), n in 1u64..300) {
        let q0 = q0_series(t, n).unwrap();
        let q1 = q1_series(t, n).unwrap();
        prop_assert!((-1e-15..=1.0).contains(&q0));
        prop_assert!((-1e-15..=1.0).contains(&q1));
        if n % 2 == 1 {
            prop_assert_eq!(q0, 0.0);
        }
        if (n + t as u64) % 2 == 1 || n < t as u64 {
            prop_assert!(q1.abs() < 1e-15);
        }
    }

    #[test]
    fn transform_decreasing_and_additive(t in spacing(32), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let g = Geometry::Finite(t);
        let l0 = lambda0(t).unwrap().max(-3.0);
        let x = l0 + (0.0 - l0) * a * 0.999 + 1e-6 + b;
        let y = x + 0.01 + b;
        prop_assert!(q_closed(g, x).unwrap() > q_closed(g, y).unwrap());
        let q = q_closed(g, x).unwrap();
        let parts = q0_closed(g, x).unwrap() + 2.0 * q1_closed(g, x).unwrap();
        prop_assert!((q - parts).abs() <= 1e-12 * q.abs().max(1.0));
    }

    #[test]
    fn finite_spacing_dominates_single_interface(t in spacing(64), lam in 0.0f64..3.0) {
        let fin = q_closed(Geometry::Finite(t), lam).unwrap();
        let inf = q_closed(Geometry::Infinite, lam).unwrap();
        prop_assert!(fin >= inf - 1e-13);
    }

    #[test]
    fn root_residual_small(d in -2.0f64..2.0, t in spacing(32)) {
        prop_assert!(root_residual(d, Geometry::Finite(t)).unwrap() <= 1e-12);
    }

    #[test]
    fn phi_decreases_to_single_interface(d in 0.05f64..3.0, t in spacing(30)) {
        let a = phi(d, Geometry::Finite(t)).unwrap();
        let b = phi(d, Geometry::Finite(t + 2)).unwrap();
        prop_assert!(a >= b - 1e-13);
        prop_assert!(b >= phi_inf(d) - 1e-13);
    }

    #[test]
    fn phi_convex_in_delta(d in -1.5f64..1.5, t in spacing(16)) {
        let g = Geometry::Finite(t);
        let h = 0.05;
        let second = phi(d + h, g).unwrap() - 2.0 * phi(d, g).unwrap() + phi(d - h, g).unwrap();
        prop_assert!(second >= -1e-9);
    }

    #[test]
    fn step_law_normalized(d in -1.0f64..2.0, t in spacing(16)) {
        let law = TiltedStepLaw::build(d, Geometry::Finite(t), DEFAULT_STEP_TOLERANCE).unwrap();
        let total = law.head_mass() + law.tail_mass();
        prop_assert!(total >= 1.0 - 1e-10 && law.head_mass() <= 1.0 + 1e-10);
        for n in 1..law.horizon().min(200) {
            prop_assert_eq!(law.mass(n, 1), law.mass(n, -1));
        }
    }

    #[test]
    fn renewal_mass_convolution(d in -1.0f64..2.0, t in spacing(8), n_max in 2usize..200) {
        let law = TiltedStepLaw::build(d, Geometry::Finite(t), DEFAULT_STEP_TOLERANCE).unwrap();
        let u = renewal_mass(&law, n_max);
        prop_assert_eq!(u.get(0), 1.0);
        for n in 1..=n_max {
            let v = u.get(n);
            prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            if n % 2 == 1 {
                prop_assert_eq!(v, 0.0);
            } else {
                let conv: f64 = (1..=n).map(|k| law.total(k) * u.get(n - k)).sum();
                prop_assert!((conv - v).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn renewal_identity(d in -1.0f64..2.0, t in spacing(8), half in 1u64..100) {
        let gap = partition_identity_check(d, Geometry::Finite(t), 2 * half).unwrap();
        prop_assert!(gap.gap <= 1e-8, "{:?}", gap);
    }

    #[test]
    fn dp_matches_enumeration(d in -2.0f64..2.0, t in spacing(5), n in 1u64..=12) {
        let g = Geometry::Finite(t);
        let bf = z_bruteforce(n, d, g).unwrap();
        prop_assert!((z_free_dp(n, d, g).unwrap() - bf.log_free).abs() <= 1e-12);
        if n % 2 == 0 {
            prop_assert!((z_constrained_dp(n, d, g).unwrap() - bf.log_constrained).abs() <= 1e-12);
        }
    }

    #[test]
    fn sandwich_lower_and_corrected_upper(d in -2.0f64..2.0, t in spacing(6), n in 1u64..80) {
        let s = sandwich_check(n, d, Geometry::Finite(t)).unwrap();
        prop_assert!(s.lower_ok && s.upper_ok_corrected, "{:?}", s);
        if d >= 0.0 {
            prop_assert!(s.upper_ok);
        }
    }

    #[test]
    fn endpoint_law_invariants(d in -2.0f64..2.0, t in spacing(6), n in 1u64..80) {
        let law = endpoint_law_dp(n, d, Geometry::Finite(t)).unwrap();
        let total: f64 = law.support().map(|p| p.1).sum();
        prop_assert!((total - 1.0).abs() <= 1e-10);
        for (s, p) in law.support() {
            prop_assert!((s - n as i64).rem_euclid(2) == 0 || p == 0.0);
            prop_assert!((p - law.prob(-s)).abs() <= 1e-14);
        }
    }

    #[test]
    fn sampled_skeletons_valid_and_round_trip(
        d in 0.1f64..2.0,
        t in spacing(8),
        n in 1u64..300,
        seed in any::<u64>(),
    ) {
        let sampler = FreeSampler::new(d, Geometry::Finite(t), n).unwrap();
        let sks: Vec<_> = (0..4).map(|r| sampler.sample_skeleton(&mut replica_rng(seed, r))).collect();
        for sk in &sks {
            let st = skeleton_statistics(sk).unwrap();
            prop_assert_eq!(st.s_n, sk.endpoint());
            prop_assert_eq!((st.s_n - n as i64).rem_euclid(2), 0);
            prop_assert_eq!(st.l_prime as usize, sk.marks.iter().filter(|e| **e != 0).count());
        }
        prop_assert_eq!(parse_skeletons(&write_skeletons(&sks)).unwrap(), sks);
    }

    #[test]
    fn offset_formula(d in 0.1f64..3.0, t in spacing(40), n in 10.0f64..1e8) {
        let (off, _) = regime_offset(n, t as f64, d, 1.0).unwrap();
        prop_assert!((off - (t as f64 - n.ln() / c_delta(d).unwrap())).abs() < 1e-12);
        let e = nearest_even(off.abs() + t as f64);
        prop_assert!(e >= 2 && e % 2 == 0);
    }

    #[test]
    fn distances_in_unit_interval(a in prop::collection::vec(-5i64..5, 1..50), b in prop::collection::vec(-5i64..5, 1..50)) {
        let (pa, pb) = (empirical_pmf(&a), empirical_pmf(&b));
        let d = tv_distance(&pa, &pb).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&d));
        prop_assert!((d - tv_distance(&pb, &pa).unwrap()).abs() < 1e-15);
        let xs: Vec<f64> = a.iter().map(|&v| v as f64).collect();
        let k = ks_statistic(&xs, normal_cdf).unwrap();
        prop_assert!((0.0..=1.0).contains(&k));
    }
}
