use num_complex::Complex64 as C64;
use proptest::{prop_assert, proptest};

use subplanck::bessel::bessel_j0;
use subplanck::microcanonical::*;
use subplanck::overlap::{overlap_ray, Displacement};

const MILLION: usize = 1_000_000;

#[test]
fn disk_samples_are_on_the_shell_and_uniform_in_area() {
    let g = DiskBilliard::new(2.0, 1.5, 1.0).unwrap();
    let pts = sample_disk_shell(&g, 1, MILLION).unwrap();
    let (mut sx, mut sy, mut inner) = (0.0, 0.0, 0usize);
    for i in 0..pts.len() {
        let p = pts.momentum(i);
        assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() / 1.5 - 1.0).abs() < 1e-12);
        let x = pts.position(i);
        sx += x[0];
        sy += x[1];
        if (x[0] * x[0] + x[1] * x[1]).sqrt() <= 2.0 / 2f64.sqrt() {
            inner += 1;
        }
    }
    let bound = 3.0 * 1.0 / 1e3;
    assert!((sx / MILLION as f64).abs() < bound);
    assert!((sy / MILLION as f64).abs() < bound);
    assert!((inner as f64 / MILLION as f64 - 0.5).abs() < 0.002);
}

#[test]
fn gas_samples_are_on_the_shell_and_uniform_in_the_box() {
    let gas = GasBox::new(2, 3.0, 0.7, 1.0).unwrap();
    let pts = sample_box_shell(&gas, 2, MILLION).unwrap();
    let radius = 2f64.sqrt() * 0.7;
    let mut sums = [0.0; 6];
    for i in 0..pts.len() {
        let p = pts.momentum(i);
        assert!((p.iter().map(|v| v * v).sum::<f64>().sqrt() / radius - 1.0).abs() < 1e-12);
        for (s, x) in sums.iter_mut().zip(pts.position(i)) {
            assert!(x.abs() <= 1.5);
            *s += x;
        }
    }
    let bound = 3.0 * (3.0 / 12f64.sqrt()) / 1e3;
    for s in sums {
        assert!((s / MILLION as f64).abs() < bound);
    }

    let one = GasBox::new(1, 1.0, 1.0, 1.0).unwrap();
    let pts = sample_box_shell(&one, 3, MILLION).unwrap();
    let mean_z2: f64 = (0..pts.len())
        .map(|i| {
            let p = pts.momentum(i);
            p[2] * p[2] / (p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
        })
        .sum::<f64>()
        / MILLION as f64;
    assert!((mean_z2 - 1.0 / 3.0).abs() < 0.002);
}

#[test]
fn disk_monte_carlo_reproduces_j0_of_one() {
    let g = DiskBilliard::new(1.0, 1.0, 1.0).unwrap();
    let est = mc_overlap(&g, 5, MILLION, &Displacement::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap()).unwrap();
    let exact = bessel_j0(1.0);
    assert!((exact - 0.7652).abs() < 1e-4);
    assert!((est.mean.re - exact).abs() < 3.0 * est.stderr, "{est:?}");
    assert!(est.mean.im.abs() < 3.0 * est.stderr);
}

#[test]
fn disk_monte_carlo_on_a_grid() {
    let g = DiskBilliard::new(1.0, 1.0, 1.0).unwrap();
    let mut hits = 0;
    for i in 0..20 {
        let (dx, dp) = (0.6 * (i % 5) as f64, 1.1 * (i / 5) as f64);
        let (a, b) = (0.37 * i as f64, 1.9 - 0.21 * i as f64);
        let d = Displacement::new(vec![dx * a.cos(), dx * a.sin()], vec![dp * b.cos(), dp * b.sin()]).unwrap();
        let est = mc_overlap(&g, 100 + i as u64, MILLION, &d).unwrap();
        let exact = disk_overlap_analytic(&g, dx, dp).unwrap();
        if (est.mean - C64::new(exact, 0.0)).norm() < 3.0 * est.stderr || est.stderr == 0.0 && est.mean == C64::new(exact, 0.0) {
            hits += 1;
        }
    }
    assert!(hits >= 18, "{hits}/20");
}

#[test]
fn gas_monte_carlo_matches_closed_form() {
    let gas = GasBox::new(2, 1.0, 1.0, 1.0).unwrap();
    let sampler = GasSampler::new(gas).unwrap();
    let dir = Displacement::new(vec![1.0, -0.5, 0.3, 0.0, 0.8, -0.2], vec![0.0; 6]).unwrap();
    let series = mc_ray(&sampler, &dir, 4.0, 9, MILLION, 17, None).unwrap();
    for (t, est) in series.t.iter().zip(&series.estimates) {
        let exact = gas_overlap_analytic(&gas, *t, &[0.0; 6]).unwrap();
        assert!(
            (est.mean - C64::new(exact, 0.0)).norm() <= 3.0 * est.stderr + 1e-15,
            "t={t}: {est:?} vs {exact}"
        );
    }
    // A small mixed displacement.
    let d = Displacement::new(vec![0.2, 0.1, -0.3, 0.05, 0.0, 0.1], vec![0.9, -1.3, 0.4, 2.0, -0.6, 1.1]).unwrap();
    let est = mc_overlap(&sampler, 99, MILLION, &d).unwrap();
    let exact = gas_overlap_analytic(&gas, d.dx_norm(), d.dp()).unwrap();
    assert!((est.mean - C64::new(exact, 0.0)).norm() < 3.0 * est.stderr);
}

#[test]
fn monte_carlo_is_deterministic() {
    let g = DiskBilliard::new(1.0, 2.0, 1.0).unwrap();
    let d = Displacement::new(vec![0.4, 0.1], vec![0.0, 0.9]).unwrap();
    let a = mc_overlap(&g, 42, 200_000, &d).unwrap();
    let b = mc_overlap(&g, 42, 200_000, &d).unwrap();
    let c = mc_overlap(&g, 43, 200_000, &d).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.mean, c.mean);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let single = pool.install(|| mc_overlap(&g, 42, 200_000, &d).unwrap());
    assert_eq!(a, single);
}

#[test]
fn analytic_sources_start_at_one() {
    let g = DiskBilliard::new(1.0, 1.0, 1.0).unwrap();
    let s = overlap_ray(&DiskAnalytic(g), &Displacement::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap(), 10.0, 64, None).unwrap();
    assert_eq!(s.values[0], C64::new(1.0, 0.0));
    for (t, v) in s.t.iter().zip(&s.values) {
        assert!((v.re - bessel_j0(*t)).abs() < 1e-12);
    }
    let gas = GasBox::new(3, 1.0, 1.0, 1.0).unwrap();
    let dir = Displacement::new(vec![1.0; 9], vec![0.0; 9]).unwrap();
    assert_eq!(overlap_ray(&GasAnalytic(gas), &dir, 5.0, 16, None).unwrap().values[0], C64::new(1.0, 0.0));
    assert_eq!(overlap_ray(&GasGaussian(gas), &dir, 5.0, 16, None).unwrap().values[0], C64::new(1.0, 0.0));
}

proptest! {
    #[test]
    fn gas_overlap_is_bounded(n in 1usize..40, dx in 0.0f64..50.0, dp in proptest::collection::vec(-20.0f64..20.0, 120)) {
        let gas = GasBox::new(n, 1.3, 0.9, 1.0).unwrap();
        let v = gas_overlap_analytic(&gas, dx, &dp[..3 * n]).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn disk_overlap_factorizes(dx in 0.0f64..100.0, dp in 0.0f64..100.0) {
        let g = DiskBilliard::new(1.7, 0.6, 0.9).unwrap();
        let joint = disk_overlap_analytic(&g, dx, dp).unwrap();
        prop_assert!(joint == disk_overlap_analytic(&g, dx, 0.0).unwrap() * disk_overlap_analytic(&g, 0.0, dp).unwrap());
        prop_assert!(joint.abs() <= 1.0);
    }
}
