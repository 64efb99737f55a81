use subplanck::analysis::ensemble_autocorrelation;
use subplanck::rng::derive_seed;
use subplanck::statekit::{autocorrelation, random_wave_state};

/// J₀ from its power series, with terms summed until they drop below 1e-17.
fn j0(x: f64) -> f64 {
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while term.abs() > 1e-17 {
        term *= -(0.25 * x * x) / (m * m);
        sum += term;
        m += 1.0;
    }
    sum
}

fn first_j0_root() -> f64 {
    let (mut lo, mut hi) = (2.0, 3.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if j0(lo) * j0(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn ensemble_two_point_function_is_j0() {
    let k = 40.0;
    let root = first_j0_root();
    assert!((root - 2.4048).abs() < 1e-4);
    let mut seps: Vec<f64> = (0..=40).map(|i| 0.25 * i as f64 / k).collect();
    seps.push(root / k);
    let mean = ensemble_autocorrelation(k, 400, 1.0, &seps, 30, 400, 2024).unwrap();
    let worst = seps[..41]
        .iter()
        .zip(&mean)
        .map(|(s, c)| (c - j0(k * s)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "max deviation {worst}");
    assert!(mean[41].abs() < 0.05, "{}", mean[41]);
    assert_eq!(mean[0], 1.0);
}

#[test]
fn zero_separation_is_exactly_one_for_every_seed() {
    for seed in 0..20 {
        let state = random_wave_state(40.0, 400, 1.0, seed).unwrap();
        let c = autocorrelation(&state, &[0.0, 0.01], 200, seed).unwrap();
        assert_eq!(c[0], 1.0);
    }
}

#[test]
fn field_values_are_symmetric_across_the_ensemble() {
    // The sample skewness of n Gaussian values has standard deviation
    // about √(6/n); 2000 members put the 0.15 bound near 2.7σ. Fewer plane
    // waves per state keep the normalization cost down.
    let members = 2000;
    let point = [0.31, -0.17];
    let values: Vec<f64> = (0..members)
        .map(|e| random_wave_state(40.0, 100, 1.0, derive_seed(77, e)).unwrap().value_at(point))
        .collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n;
    let skew = m3 / m2.powf(1.5);
    assert!(skew.abs() < 0.15, "{skew}");
}
