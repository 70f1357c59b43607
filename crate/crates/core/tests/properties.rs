use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use ris_core::nulling::min_interference_qcqp;
use ris_core::scenario::{sample_iid_setup, steering_vector, trial_rng};
use ris_core::sumrate::{surrogate, update_omega, update_weights, zero_setting};
use ris_core::system_model::{opd_weights, power_consumption, sinr_decomposition, Noise};
use ris_core::{PowerModel, PowerModelKind, ReflectVector, ScenarioConfig};

fn reflect(n: usize, max_amp: f64) -> impl Strategy<Value = DVector<C64>> {
    prop::collection::vec((0.0f64..max_amp, 0.0f64..(2.0 * PI)), n)
        .prop_map(|v| DVector::from_iterator(v.len(), v.into_iter().map(|(r, t)| C64::from_polar(r, t))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn steering_entries_have_unit_modulus(
        az in -PI..PI,
        el in -PI / 2.0..PI / 2.0,
        q1 in 1usize..9,
        q2 in 1usize..9,
        spacing in 0.1f64..1.0,
    ) {
        let v = steering_vector(az, el, q1, q2, spacing, spacing, 1.0).unwrap();
        prop_assert_eq!(v.len(), q1 * q2);
        for x in v.iter() {
            prop_assert!((x.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cascaded_channel_reproduces_reflected_link(seed in any::<u64>(), a in reflect(5, 3.0)) {
        let ch = sample_iid_setup(5, 3, 10.0, &mut trial_rng(seed, 0)).unwrap();
        for k in 0..3 {
            for j in 0..3 {
                let direct: C64 = (0..5).map(|r| ch.h_r[(r, k)] * a[r] * ch.h_t[(r, j)]).sum();
                let via = (ch.h_b(k, j).adjoint() * &a)[(0, 0)];
                let scale = ch.h_r.column(k).norm() * ch.h_t.column(j).norm() * a.norm();
                prop_assert!((direct - via).norm() <= 1e-10 * scale.max(1e-300));
            }
        }
        for (col, &(k, j)) in ch.pairs.iter().enumerate() {
            prop_assert_eq!(ch.h_b_stack.column(col).into_owned(), ch.h_b(k, j));
            prop_assert_eq!(ch.h_d_stack[col], ch.h_d[(k, j)]);
        }
    }

    // The quadratic transform is a lower bound for every ω and tight at the
    // closed-form update.
    #[test]
    fn surrogate_lower_bounds_sum_rate(
        seed in any::<u64>(),
        a in reflect(4, 2.0),
        omega in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 3),
    ) {
        let ch = sample_iid_setup(4, 3, 5.0, &mut trial_rng(seed, 1)).unwrap();
        let d = sinr_decomposition(&ch, &[1.0, 0.5, 2.0], Noise { sigma_r_sq: 0.01, sigma_s_sq: 0.1 }).unwrap();
        let rate = d.sum_rate(&a);
        let w = DVector::from_iterator(3, omega.into_iter().map(|(re, im)| C64::new(re, im)));
        let s = surrogate(&d, &w, &a);
        prop_assert!(s.is_nan() || s <= rate + 1e-9 * rate.max(1.0));
        let tight = surrogate(&d, &update_omega(&a, &d), &a);
        prop_assert!((tight - rate).abs() <= 1e-9 * rate.max(1e-12));
    }

    #[test]
    fn weights_are_antitone_in_amplitude(a in reflect(8, 5.0), tau in 1e-6f64..1.0) {
        let beta = update_weights(&a, tau);
        for i in 0..8 {
            prop_assert!(beta[i] > 0.0 && beta[i] <= 1.0 / tau);
            for j in 0..8 {
                if a[i].norm() <= a[j].norm() {
                    prop_assert!(beta[i] >= beta[j]);
                }
            }
        }
    }

    #[test]
    fn zero_setting_only_closes_entries(a in reflect(10, 3.0), t1 in 0.0f64..3.0, t2 in 0.0f64..3.0) {
        let v = ReflectVector::new(a.clone());
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let z_lo = zero_setting(&v, lo);
        let z_hi = zero_setting(&v, hi);
        for i in 0..10 {
            prop_assert!(z_hi.a[i] == a[i] || z_hi.a[i] == C64::new(0.0, 0.0));
            prop_assert_eq!(z_hi.a[i] != C64::new(0.0, 0.0), a[i].norm() >= hi && a[i] != C64::new(0.0, 0.0));
        }
        prop_assert!(z_hi.active_count() <= z_lo.active_count());
    }

    #[test]
    fn sparse_model_never_exceeds_original(a in reflect(6, 3.0), mask in prop::collection::vec(any::<bool>(), 6)) {
        let ch = sample_iid_setup(6, 2, 10.0, &mut trial_rng(7, 0)).unwrap();
        let p = {
            let mut c = ScenarioConfig::default();
            c.k = 2;
            c.p_k_dbm = vec![20.0; 2];
            c.rate_req_bps_hz = vec![0.0; 2];
            c.resolve().unwrap()
        };
        let mut v = ReflectVector::new(a);
        for (i, m) in mask.iter().enumerate() {
            if *m {
                v.a[i] = C64::new(0.0, 0.0);
            }
        }
        let eval = |k| power_consumption(&v, &ch, &p.powers, p.sigma_r_sq, &PowerModel::from_params(k, &p));
        let sparse = eval(PowerModelKind::ActiveSparse);
        let original = eval(PowerModelKind::ActiveOriginal);
        let closed = 6 - v.active_count();
        prop_assert!((original - sparse - closed as f64 * p.opi_per_re()).abs() <= 1e-12 * original);
        prop_assert!(opd_weights(&ch, &p.powers, p.sigma_r_sq).iter().all(|w| *w >= p.sigma_r_sq));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn interference_residual_monotone_in_bound(seed in any::<u64>(), lo_db in -10.0f64..20.0, step_db in 0.5f64..15.0) {
        let ch = sample_iid_setup(10, 3, 20.0, &mut trial_rng(seed, 2)).unwrap();
        let powers = [1.0; 3];
        let lo = 10f64.powf(lo_db / 20.0);
        let hi = 10f64.powf((lo_db + step_db) / 20.0);
        let r_lo = min_interference_qcqp(&ch, &powers, lo, 1e-10).unwrap().residual_power;
        let r_hi = min_interference_qcqp(&ch, &powers, hi, 1e-10).unwrap().residual_power;
        let r0 = min_interference_qcqp(&ch, &powers, 0.0, 1e-10).unwrap().residual_power;
        prop_assert!(r_hi <= r_lo * (1.0 + 1e-6) + 1e-12 * r0);
        prop_assert!(r_lo <= r0 * (1.0 + 1e-9));
    }
}
