mod common;

use common::{direct_ee, direct_network_power, direct_rates, Instance};
use fdran_core::netmodel::Association;
use fdran_core::powermodel::{energy_efficiency, network_power, PowerConfig, PowerModel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_assoc(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Association {
    let mut a = Association::empty(m, k);
    for bs in 0..m {
        for ue in 0..k {
            if rng.random_bool(0.35) {
                a.set(bs, ue, true);
            }
        }
    }
    a
}

#[test]
fn affine_form_matches_component_tables() {
    let cfg = PowerConfig::defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for draw in 0..100 {
        let m = rng.random_range(1..12);
        let k = rng.random_range(1..7);
        let a = random_assoc(&mut rng, m, k);
        let rates: Vec<f64> = (0..k).map(|ue| if a.ue_degree(ue) > 0 { rng.random_range(0.0..8e7) } else { 0.0 }).collect();
        let p: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.1)).collect();
        let form = PowerModel::new(&cfg, m).unwrap().affine_form(&a).unwrap();
        let direct = direct_network_power(&p, &rates, &a, &cfg);
        let lib = network_power(&p, &rates, &a, &form).unwrap().total_w;
        assert!((lib - direct).abs() <= 1e-9 * direct, "draw {draw}: {lib} vs {direct}");
        assert!((form.total(&p, &rates) - direct).abs() <= 1e-9 * direct, "draw {draw}");
    }
}

#[test]
fn component_power_is_affine_in_each_rate() {
    let cfg = PowerConfig::defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (m, k) = (8, 4);
    let a = Association::from_rows(&[
        vec![1, 0, 0, 0],
        vec![1, 1, 0, 0],
        vec![0, 1, 0, 0],
        vec![0, 0, 1, 0],
        vec![0, 0, 1, 1],
        vec![0, 0, 0, 1],
        vec![0, 0, 0, 0],
        vec![0, 0, 0, 0],
    ])
    .unwrap();
    let p: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.1)).collect();
    let h = 1e6;
    for _ in 0..20 {
        let r: Vec<f64> = (0..k).map(|_| rng.random_range(2e6..6e7)).collect();
        let base = direct_network_power(&p, &r, &a, &cfg);
        for ue in 0..k {
            let at = |d: f64| {
                let mut x = r.clone();
                x[ue] += d;
                direct_network_power(&p, &x, &a, &cfg)
            };
            let second = at(h) - 2.0 * base + at(-h);
            assert!(second.abs() <= 1e-9 * base, "ue {ue}: {second}");
        }
    }
    assert_eq!(a.num_ubs(), m);
}

#[test]
fn energy_efficiency_golden_value() {
    let inst = Instance::new(11, 6, 3, 4, 2, 0.0);
    let a = inst.strongest(2);
    let p = [0.02, 0.05, 0.08];
    let direct = direct_ee(&p, &a, &inst);
    let lib = energy_efficiency(&p, &a, &inst.tensor, &inst.frame, &inst.form(&a)).unwrap();
    assert!((lib - direct).abs() <= 1e-9 * direct);
    let golden = 1_126_735.619_531_785_6;
    assert!((direct - golden).abs() <= 1e-9 * golden, "direct EE {direct}");
    let r = direct_rates(&p, &a, &inst.tensor, &inst.frame);
    assert!(r.iter().all(|&x| x > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sleeping_never_costs_more(seed in 0u64..1000) {
        let cfg = PowerConfig::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (m, k) = (6, 3);
        let a = random_assoc(&mut rng, m, k);
        let model = PowerModel::new(&cfg, m).unwrap();
        let rates = vec![1e7; k];
        let p = vec![0.05; k];
        let asleep = network_power(&p, &rates, &a, &model.affine_form(&a).unwrap()).unwrap();
        let awake = network_power(&p, &rates, &a, &model.affine_form_with_active(&a, m).unwrap()).unwrap();
        prop_assert!(asleep.total_w <= awake.total_w);
    }

    #[test]
    fn power_rises_with_rate_and_transmit_power(seed in 0u64..1000, ue in 0usize..3) {
        let cfg = PowerConfig::defaults();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_assoc(&mut rng, 5, 3);
        let form = PowerModel::new(&cfg, 5).unwrap().affine_form(&a).unwrap();
        let r: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..5e7)).collect();
        let p: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..0.1)).collect();
        let base = form.total(&p, &r);
        let mut r2 = r.clone();
        r2[ue] += 1e6;
        let mut p2 = p.clone();
        p2[ue] += 0.01;
        prop_assert!(form.total(&p, &r2) > base);
        prop_assert!(form.total(&p2, &r) > base);
    }
}
