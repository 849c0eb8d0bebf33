use biphoton::grid::FrequencyGrid;
use biphoton::schmidt::{decompose, density_overlap, pair_degeneracies, DEFAULT_PAIR_TOL};
use biphoton::spectral::{build_joint_spectrum, JointSpectrum, MultiplexConfig, PhysicalParams};
use proptest::prelude::*;

fn spectrum(shifts: &[(f64, f64)], n: usize) -> JointSpectrum {
    let g = FrequencyGrid::midpoint(-300.0, 300.0, n).unwrap();
    let cfg = MultiplexConfig::from_shifts(shifts).unwrap();
    build_joint_spectrum(&PhysicalParams::default(), &cfg, &g, &g, true).unwrap()
}

fn in_window_shifts() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-150.0..150.0f64, -100.0..100.0f64), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn decomposition_invariants(shifts in in_window_shifts(), r in 1usize..24) {
        let js = spectrum(&shifts, 128);
        let full = decompose(&js, 128).unwrap();
        prop_assert!((full.eigenvalues.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(full.reconstruction_error < 1e-8);
        prop_assert!(full.orthonormality_error() < 1e-8);
        prop_assert!(full.eigenvalues.windows(2).all(|w| w[0] >= w[1]));

        let part = decompose(&js, r).unwrap();
        let kept: f64 = part.eigenvalues.iter().sum();
        prop_assert!((part.reconstruction_error.powi(2) - (1.0 - kept)).abs() < 1e-8);
        prop_assert!((part.tail_mass - (1.0 - kept)).abs() < 1e-10);
        prop_assert!(part.schmidt_number <= 128.0 + 1e-9);
        for n in 0..r {
            let col = part.signal_mode(n);
            let peak = col.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
            let z = col.iter().find(|z| z.norm_sqr() == peak).unwrap();
            prop_assert!(z.im == 0.0 && z.re > 0.0);
        }
    }
}

#[test]
fn grid_translation_invariance() {
    let p = PhysicalParams::default();
    let c = 7.3;
    let base = MultiplexConfig::from_shifts(&[(30.0, 0.0), (-30.0, 0.0)]).unwrap();
    let g = FrequencyGrid::midpoint(-300.0, 300.0, 256).unwrap();
    let a = decompose(&build_joint_spectrum(&p, &base, &g, &g, true).unwrap(), 4).unwrap();
    // dp -> dp + c moves every peak by (+c, -c)
    let gs = g.shifted(c).unwrap();
    let gi = g.shifted(-c).unwrap();
    let b = decompose(&build_joint_spectrum(&p, &base.translated(c, 0.0), &gs, &gi, true).unwrap(), 4).unwrap();
    assert!((a.entropy_bits - b.entropy_bits).abs() < 1e-6);
    assert!((a.schmidt_number - b.schmidt_number).abs() < 1e-6);
}

fn paired_count(shifts: &[(f64, f64)], top: usize) -> usize {
    let r = decompose(&spectrum(shifts, 512), top).unwrap();
    pair_degeneracies(&r.eigenvalues, DEFAULT_PAIR_TOL).pairs.len()
}

#[test]
fn symmetric_configs_pair_up() {
    assert_eq!(paired_count(&[(30.0, 0.0), (-30.0, 0.0)], 4), 2);
    assert_eq!(paired_count(&[(30.0, 0.0), (-30.0, 0.0), (90.0, 0.0), (-90.0, 0.0)], 8), 4);
    // the unshifted middle ensemble contributes unpaired modes
    assert_eq!(paired_count(&[(60.0, 0.0), (-60.0, 0.0), (0.0, 0.0)], 6), 2);
}

#[test]
fn nonsymmetric_controls_do_not_pair() {
    assert_eq!(paired_count(&[(30.0, 30.0), (-30.0, -30.0)], 4), 0);
    assert_eq!(paired_count(&[(60.0, 60.0), (-60.0, -60.0), (0.0, 0.0)], 6), 0);
    assert_eq!(paired_count(&[(30.0, 30.0), (-30.0, -30.0), (90.0, 90.0), (-90.0, -90.0)], 8), 0);
}

#[test]
fn nonsymmetric_leading_idler_mode_is_even() {
    let r = decompose(&spectrum(&[(30.0, 30.0), (-30.0, -30.0)], 512), 1).unwrap();
    let d: Vec<f64> = r.idler_mode(0).iter().map(|z| z.norm_sqr()).collect();
    let n = d.len();
    let worst = (0..n).map(|k| (d[k] - d[n - 1 - k]).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn large_shifts_separate_modes() {
    let far = decompose(&spectrum(&[(100.0, 0.0), (-100.0, 0.0)], 512), 2).unwrap();
    let o = density_overlap(&far.signal_grid, far.signal_mode(0), far.signal_mode(1));
    assert!(o < 0.1, "{o}");
    let near = decompose(&spectrum(&[(30.0, 0.0), (-30.0, 0.0)], 512), 2).unwrap();
    let o = density_overlap(&near.signal_grid, near.signal_mode(0), near.signal_mode(1));
    assert!(o > 0.5, "{o}");
}

#[test]
fn decomposition_is_reproducible() {
    let js = spectrum(&[(100.0, 0.0), (-100.0, 0.0)], 256);
    let a = decompose(&js, 6).unwrap();
    let b = decompose(&js, 6).unwrap();
    assert_eq!(a.eigenvalues, b.eigenvalues);
    assert_eq!(a.signal_modes, b.signal_modes);
    assert_eq!(a.idler_modes, b.idler_modes);
}
