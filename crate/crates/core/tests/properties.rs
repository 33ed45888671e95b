use bosecond::collision::{cubic_sum, cubic_symmetrized, delta_phi, weak_rhs, TestFunction};
use bosecond::config::{parse_config_str, to_config_string};
use bosecond::equilibrium::{polylog, reconstruct_moments, solve_equilibrium, t_ratio};
use bosecond::kernel::{build_table, s_limits, w_hard_closed, w_quadrature, QuadConfig, WRule};
use bosecond::measure::DiscreteMeasure;
use bosecond::output::{read_csv_str, write_csv_to, RunManifest};
use bosecond::simulator::engine::clip_preserving_mass;
use bosecond::simulator::{Horizon, InitialData, SimulationConfig};
use bosecond::verifier::{check_rng, sample_measure};
use bosecond::{GridSpec, KernelModel};
use proptest::prelude::*;

fn quad() -> QuadConfig {
    QuadConfig { s_nodes: 32, theta_nodes: 32, x_nodes: 8 }
}

fn models() -> Vec<KernelModel> {
    vec![KernelModel::hard_sphere(), KernelModel::power(0.5, 1.0 / 16.0).unwrap(), KernelModel::yukawa()]
}

fn measure(seed: u64) -> DiscreteMeasure {
    sample_measure(&mut check_rng(seed, "properties"), 4.0).unwrap()
}

proptest! {
    #[test]
    fn s_interval_has_length_twice_the_smallest_root(x in 0.0f64..4.0, y in 0.0f64..4.0, z in 0.0f64..4.0) {
        prop_assume!(x < y + z);
        let xs = y + z - x;
        let (lo, hi) = s_limits(x, y, z);
        let m = x.sqrt().min(y.sqrt()).min(z.sqrt()).min(xs.sqrt());
        prop_assert!((hi - lo - 2.0 * m).abs() <= 1e-12);
    }

    #[test]
    fn hard_sphere_closed_form_is_symmetric(x in 0.01f64..4.0, y in 0.01f64..4.0, z in 0.01f64..4.0) {
        let a = w_hard_closed(x, y, z);
        let b = w_hard_closed(x, z, y);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn kernels_are_symmetric_in_the_last_two_energies(x in 0.01f64..3.0, y in 0.01f64..3.0, z in 0.01f64..3.0, k in 0usize..3) {
        let rule = WRule::new(quad()).unwrap();
        let m = &models()[k];
        let a = w_quadrature(m, x, y, z, &rule).unwrap();
        let b = w_quadrature(m, x, z, y, &rule).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((a - b).abs() <= 1e-6 * a.abs().max(1e-12), "{a} vs {b}");
    }

    #[test]
    fn cross_sections_are_symmetric_and_bounded(r in 0.0f64..50.0, rho in 0.0f64..50.0, k in 0usize..3) {
        let m = &models()[k];
        let a = m.phi(r, rho).unwrap();
        prop_assert_eq!(a, m.phi(rho, r).unwrap());
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn delta_phi_vanishes_on_affine_functions(x in 0.0f64..4.0, y in 0.0f64..4.0, z in 0.0f64..4.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        prop_assume!(x <= y + z);
        let phi = TestFunction::polynomial(vec![a, b]);
        prop_assert!(delta_phi(&phi, x, y, z).abs() <= 1e-12 * (1.0 + a.abs() + b.abs() * 8.0));
    }

    #[test]
    fn equilibrium_reproduces_its_moments(n in 0.1f64..10.0, tr in 0.05f64..4.0) {
        let e = tr * n.powf(5.0 / 3.0) / bosecond::equilibrium::t_ratio_constant();
        let st = solve_equilibrium(n, e, 1e-12).unwrap();
        let (nr, er) = reconstruct_moments(&st).unwrap();
        prop_assert!(((nr + st.condensate) - n).abs() <= 1e-9 * n);
        prop_assert!((er - e).abs() <= 1e-9 * e);
        prop_assert!(st.condensate >= 0.0 && st.condensate <= n);
        prop_assert_eq!(st.condensate == 0.0, t_ratio(n, e) >= 1.0);
    }

    #[test]
    fn polylog_is_increasing(z1 in 0.01f64..1.0, z2 in 0.01f64..1.0, s in prop_oneof![Just(1.5), Just(2.5), Just(3.0)]) {
        prop_assume!(z1 < z2);
        prop_assert!(polylog(s, z1).unwrap() < polylog(s, z2).unwrap());
    }

    #[test]
    fn clipping_keeps_mass_and_positivity(old in prop::collection::vec(0.0f64..2.0, 2..20), seed in any::<u64>()) {
        let mut rng = check_rng(seed, "clip");
        let mut new: Vec<f64> = old.iter().map(|o| o + rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let total: f64 = new.iter().sum();
        prop_assume!(total > 0.0);
        clip_preserving_mass(&old, &mut new);
        prop_assert!(new.iter().all(|v| *v >= 0.0));
        let after: f64 = new.iter().sum();
        // only meaningful when the positive increments can absorb the clip
        let pos: f64 = new.iter().zip(&old).map(|(n, o)| (n - o).max(0.0)).sum();
        if pos > 0.0 {
            prop_assert!((after - total).abs() <= 1e-12 * total.max(1.0) || after >= total);
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec(prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 3), 0..30)) {
        let cols: Vec<String> = vec!["a".into(), "b".into(), "c".into()];
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &RunManifest::new("prop", None, 1), &cols, &rows).unwrap();
        let back = read_csv_str(std::str::from_utf8(&buf).unwrap()).unwrap();
        prop_assert_eq!(back.rows, rows);
    }

    #[test]
    fn config_text_round_trips(nodes in 8usize..100, ratio in 1.05f64..2.0, x_max in 2.0f64..30.0, n in 0.1f64..10.0, e in 0.1f64..10.0, t in 1e-6f64..10.0) {
        let mut c = SimulationConfig::new(KernelModel::yukawa(), InitialData::Maxwellian { n, e }, Horizon::Absolute { t });
        c.grid = GridSpec { nodes, ratio, transition: 1.0, x_max };
        prop_assume!(c.validate().is_ok());
        let back = parse_config_str(&to_config_string(&c)).unwrap();
        prop_assert_eq!(back, c);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conserved_quantities_span_the_nullspace(seed in any::<u64>(), k in 0usize..3) {
        let f = measure(seed);
        let table = build_table(&models()[k], f.grid(), quad()).unwrap();
        let rule = WRule::new(quad()).unwrap();
        let n = f.mass();
        let scale = (n * n + n * n * n) * 50.0;
        for phi in [TestFunction::polynomial(vec![1.0]), TestFunction::polynomial(vec![0.0, 1.0])] {
            let q = weak_rhs(&table, &phi, &f, &rule).unwrap();
            prop_assert!(q.abs() <= 1e-12 * scale, "Q = {q:e}");
        }
    }

    #[test]
    fn convex_test_functions_give_nonnegative_cubic_sums(seed in any::<u64>(), k in 0usize..3, eps in 0.01f64..2.0) {
        let f = measure(seed);
        let table = build_table(&models()[k], f.grid(), quad()).unwrap();
        let phi = TestFunction::phi_eps(eps).unwrap();
        let d = cubic_symmetrized(&table, &phi, &f).unwrap();
        let plain = cubic_sum(&table, &phi, &f);
        let scale = f.mass().powi(3) * table.values().iter().fold(1.0f64, |m, v| m.max(*v));
        prop_assert!(plain >= -1e-12 * scale);
        prop_assert!(d.k1 >= -1e-12 * scale);
        prop_assert!((d.total - plain).abs() <= 1e-10 * scale);
    }
}
