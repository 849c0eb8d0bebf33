use biphoton::grid::FrequencyGrid;
use biphoton::spectral::{build_joint_spectrum, eval_multiplexed, eval_single, Ensemble, MultiplexConfig, PhysicalParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn shifts() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-150.0..150.0f64, -100.0..100.0f64), 1..5)
}

fn params() -> impl Strategy<Value = PhysicalParams> {
    (1.0..20.0f64, 0.05..2.0f64).prop_map(|(g, t)| PhysicalParams::new(g, t).unwrap())
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * a.norm().max(b.norm()) + 1e-300
}

proptest! {
    #[test]
    fn linear_in_configurations(p in params(), a in shifts(), b in shifts(), s in -300.0..300.0f64, i in -300.0..300.0f64) {
        let ca = MultiplexConfig::from_shifts(&a).unwrap();
        let cb = MultiplexConfig::from_shifts(&b).unwrap();
        let sum = eval_multiplexed(&p, &ca, s, i) + eval_multiplexed(&p, &cb, s, i);
        let joint = eval_multiplexed(&p, &ca.concat(&cb), s, i);
        prop_assert!((sum - joint).norm() <= 1e-13 * (sum.norm() + 1e-300) + 1e-300);
    }

    #[test]
    fn translation_covariance(p in params(), a in shifts(), c in -50.0..50.0f64, s in -200.0..200.0f64, i in -200.0..200.0f64) {
        let cfg = MultiplexConfig::from_shifts(&a).unwrap();
        // moving every dp by c is the same as moving the idler detuning by c,
        // with dq following so the Gaussian argument is unchanged
        let moved = cfg.translated(c, c);
        prop_assert!(close(eval_multiplexed(&p, &moved, s, i), eval_multiplexed(&p, &cfg, s, i + c), 1e-10));
    }

    #[test]
    fn symmetric_configs_are_point_symmetric(p in params(), dps in prop::collection::vec(0.0..150.0f64, 1..3), odd in any::<bool>(), s in -300.0..300.0f64, i in -300.0..300.0f64) {
        let mut ens: Vec<Ensemble> = dps.iter().flat_map(|&d| [Ensemble::new(d, 0.0), Ensemble::new(-d, 0.0)]).collect();
        if odd {
            ens.push(Ensemble::new(0.0, 0.0));
        }
        let cfg = MultiplexConfig::new(ens).unwrap();
        let a = eval_multiplexed(&p, &cfg, s, i).norm();
        let b = eval_multiplexed(&p, &cfg, -s, -i).norm();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(b) + 1e-300);
    }

    #[test]
    fn single_ensemble_ridge(p in params(), i in -250.0..250.0f64, d in 0.01..50.0f64) {
        let on = eval_single(&p, -i, i).norm();
        prop_assert!(eval_single(&p, -i + d, i).norm() < on);
        prop_assert!(eval_single(&p, -i - d, i).norm() < on);
    }
}

#[test]
fn two_ensemble_spectrum_is_point_symmetric() {
    let p = PhysicalParams::default();
    let g = FrequencyGrid::midpoint(-300.0, 300.0, 256).unwrap();
    let cfg = MultiplexConfig::from_shifts(&[(30.0, 0.0), (-30.0, 0.0)]).unwrap();
    let js = build_joint_spectrum(&p, &cfg, &g, &g, true).unwrap();
    let n = g.len();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in 0..n {
            worst = worst.max((js.amplitude[[j, k]].norm_sqr() - js.amplitude[[n - 1 - j, n - 1 - k]].norm_sqr()).abs());
        }
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn normalized_amplitude_converges_with_grid() {
    let p = PhysicalParams::default();
    let cfg = MultiplexConfig::single();
    // trapezoid grids with n and 2n - 1 nodes share every coarse node
    let coarse = FrequencyGrid::trapezoid(-300.0, 300.0, 1025).unwrap();
    let fine = FrequencyGrid::trapezoid(-300.0, 300.0, 2049).unwrap();
    let a = build_joint_spectrum(&p, &cfg, &coarse, &coarse, true).unwrap();
    let b = build_joint_spectrum(&p, &cfg, &fine, &fine, true).unwrap();
    let mut worst: f64 = 0.0;
    for j in (0..1025).step_by(7) {
        for k in (0..1025).step_by(5) {
            let (x, y) = (a.amplitude[[j, k]], b.amplitude[[2 * j, 2 * k]]);
            if x.norm() > 1e-200 {
                worst = worst.max((x - y).norm() / x.norm());
            }
        }
    }
    assert!(worst < 1e-6, "{worst}");
}
