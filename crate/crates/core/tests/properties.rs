use asd_core::lti::{l1_gain, proper_inverse, realize, realize_controllable, StateSpaceModel, TransferFunction};
use asd_core::sim::{saturate, DelayLine, Rk4};
use proptest::prelude::*;

/// Stable first- or second-order transfer function with a proper numerator.
fn stable_tf() -> impl Strategy<Value = TransferFunction> {
    prop_oneof![
        (0.3f64..5.0, -2.0f64..2.0, -1.0f64..1.0)
            .prop_map(|(p, k, d)| TransferFunction::new(vec![d, k + d * p], vec![1.0, p]).unwrap()),
        (0.5f64..4.0, 0.2f64..1.5, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(wn, zeta, n1, n0)| {
            TransferFunction::new(vec![n1, n0], vec![1.0, 2.0 * zeta * wn, wn * wn]).unwrap()
        }),
    ]
}

fn horizon(tf: &TransferFunction) -> f64 {
    16.0 * tf.slowest_time_constant()
}

/// L1 gain of a realization via its own RK4 impulse response.
fn l1_of_model(m: &StateSpaceModel, dt: f64, horizon: f64) -> f64 {
    let n = m.order();
    let steps = (horizon / dt).round() as usize;
    let mut x: Vec<f64> = m.b_in.iter().copied().collect();
    let mut rk = Rk4::new(n);
    let mut prev = m.output(&x, 0.0).abs();
    let mut sum = 0.0;
    for k in 0..steps {
        rk.step(|_, s, dx| m.rate(s, 0.0, dx), k as f64 * dt, &mut x, dt);
        let g = m.output(&x, 0.0).abs();
        sum += 0.5 * dt * (prev + g);
        prev = g;
    }
    m.d_thru.abs() + sum
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn l1_gain_is_submultiplicative(g1 in stable_tf(), g2 in stable_tf()) {
        let prod = g1.series(&g2);
        let h = horizon(&prod).max(horizon(&g1)).max(horizon(&g2));
        let l12 = l1_gain(&prod, 1e-3, h).unwrap();
        let l1 = l1_gain(&g1, 1e-3, h).unwrap();
        let l2 = l1_gain(&g2, 1e-3, h).unwrap();
        prop_assert!(l12 <= l1 * l2 * (1.0 + 1e-6) + 1e-9, "{l12} > {l1}·{l2}");
    }

    #[test]
    fn l1_gain_does_not_depend_on_realization(g in stable_tf()) {
        let h = horizon(&g);
        let a = l1_of_model(&realize(&g).unwrap(), 1e-3, h);
        let b = l1_of_model(&realize_controllable(&g).unwrap(), 1e-3, h);
        prop_assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
        prop_assert!((a - l1_gain(&g, 1e-3, h).unwrap()).abs() <= 1e-6);
    }

    #[test]
    fn proper_inverse_round_trip(p in 0.2f64..5.0, z in 0.2f64..5.0, k in 0.5f64..3.0, fast in 5.0f64..50.0) {
        // g = k(s + z)/((s + p)(s + 1)), relative degree 1
        let g = TransferFunction::new(vec![k, k * z], vec![1.0, p + 1.0, p]).unwrap();
        let q = TransferFunction::first_order_lag(1.0 / fast);
        let inv = proper_inverse(&g, &q).unwrap();
        prop_assert!(inv.is_proper());
        for i in 0..50 {
            let w = 10f64.powf(-3.0 + 5.0 * i as f64 / 49.0);
            let lhs = g.freq_response(w) * inv.freq_response(w);
            prop_assert!((lhs - q.freq_response(w)).norm() <= 1e-6, "w={w}");
        }
    }

    #[test]
    fn saturation_is_odd_and_idempotent(x in -1e3f64..1e3, a in 1e-3f64..1e2) {
        let s = saturate(x, a);
        prop_assert_eq!(saturate(s, a), s);
        prop_assert_eq!(saturate(-x, a), -s);
        prop_assert!(s.abs() <= a);
    }

    #[test]
    fn delay_exact_on_piecewise_linear_input(slopes in prop::collection::vec(-3.0f64..3.0, 4), delay_steps in 1usize..50) {
        let dt = 1e-2;
        let tau = delay_steps as f64 * dt;
        // breakpoints on the grid, so interpolation between samples is exact
        let input = |t: f64| {
            let mut v = 0.0;
            let mut start = 0.0;
            for (i, s) in slopes.iter().enumerate() {
                let end = 0.5 * (i + 1) as f64;
                v += s * (t.min(end) - start).max(0.0);
                start = end;
            }
            v
        };
        let mut line = DelayLine::new(tau);
        for k in 0..=200 {
            let t = k as f64 * dt;
            line.push(t, input(t)).unwrap();
            let expected = if t < tau { 0.0 } else { input(t - tau) };
            prop_assert!((line.sample(t).unwrap() - expected).abs() <= 1e-12);
        }
    }
}
