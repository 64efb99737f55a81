//! The normalized Bessel kernel
//!
//! ```text
//! Λ_ν(ξ) = Γ(ν+1) (ξ/2)^(−ν) J_ν(ξ)
//! ```
//!
//! for integer and half-integer orders up to 2000 and arguments up to 1e6.
//! Λ_ν is the average of a unit plane-wave phase over the sphere of
//! dimension 2ν+2, so Λ_ν(0) = 1 and |Λ_ν| ≤ 1.
//!
//! Three regimes:
//! - ξ² ≤ 4ν + 10: the power series. Its terms never exceed a few units
//!   here, so there is no cancellation.
//! - ξ ≥ 25 and ξ ≥ 2ν² + 10: Hankel's asymptotic expansion.
//! - otherwise: Miller's backward recurrence, normalized with the Neumann
//!   sum rule (integer ν) or the closed forms of J_{±1/2} (half-integer ν).
//!
//! The last two produce ln|J_ν| and the prefactor is applied in log space,
//! so J_ν far below the f64 range (e.g. ν = 1499, ξ = 80) is no problem.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_ORDER: f64 = 2000.0;
pub const MAX_ARGUMENT: f64 = 1.0e6;

const MAX_TWICE: u32 = 4000;
const RESCALE_AT: f64 = 1.0e250;
const RESCALE_BY: f64 = 1.0e-250;

/// A non-negative integer or half-integer Bessel order, stored as 2ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BesselOrder {
    twice: u32,
}

impl BesselOrder {
    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice > MAX_TWICE {
            return Err(Error::Domain(format!(
                "Bessel order {} exceeds {MAX_ORDER}",
                twice as f64 / 2.0
            )));
        }
        Ok(BesselOrder { twice })
    }

    pub fn new(nu: f64) -> Result<Self> {
        let twice = 2.0 * nu;
        if !twice.is_finite() || twice < 0.0 || twice.fract() != 0.0 {
            return Err(Error::Domain(format!(
                "Bessel order must be a non-negative half-integer, got {nu}"
            )));
        }
        if twice > MAX_TWICE as f64 {
            return Err(Error::Domain(format!("Bessel order {nu} exceeds {MAX_ORDER}")));
        }
        Ok(BesselOrder { twice: twice as u32 })
    }

    /// Order (3N − 2)/2 belonging to N particles in three dimensions.
    pub fn for_gas(n_particles: usize) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::param("n_particles", "must be at least 1"));
        }
        let twice = 3 * n_particles - 2;
        u32::try_from(twice)
            .map_err(|_| Error::Domain(format!("N = {n_particles} is too large")))
            .and_then(Self::from_twice)
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }
}

/// ln Γ(ν + 1) for ν = twice/2, tabulated over the whole supported range.
pub fn ln_gamma_order_plus_one(order: BesselOrder) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_TWICE as usize + 1];
        // Γ(1) = 1, Γ(3/2) = √π/2
        t[0] = 0.0;
        t[1] = 0.5 * PI.ln() - 2f64.ln();
        for twice in 2..=MAX_TWICE as usize {
            let nu = twice as f64 / 2.0;
            t[twice] = t[twice - 2] + nu.ln();
        }
        t
    });
    table[order.twice as usize]
}

/// Λ_ν(ξ) with domain checks.
pub fn scaled_bessel(order: BesselOrder, xi: f64) -> Result<f64> {
    if !(0.0..=MAX_ARGUMENT).contains(&xi) {
        return Err(Error::Domain(format!(
            "scaled Bessel argument must lie in [0, {MAX_ARGUMENT:e}], got {xi}"
        )));
    }
    Ok(lambda(order, xi))
}

/// Λ_ν(ξ) for an order given as f64 (must be a half-integer).
pub fn scaled_bessel_f64(nu: f64, xi: f64) -> Result<f64> {
    scaled_bessel(BesselOrder::new(nu)?, xi)
}

/// J₀(ξ) for ξ ≥ 0.
pub fn bessel_j0(xi: f64) -> f64 {
    lambda(BesselOrder { twice: 0 }, xi.abs())
}

/// 2J₁(ξ)/ξ, the disk average of a plane wave, for ξ ≥ 0.
pub fn jinc(xi: f64) -> f64 {
    lambda(BesselOrder { twice: 2 }, xi.abs())
}

pub(crate) fn lambda(order: BesselOrder, xi: f64) -> f64 {
    if xi == 0.0 {
        return 1.0;
    }
    let nu = order.value();
    if xi * xi <= 4.0 * nu + 10.0 {
        return series(nu, xi);
    }
    let (sign, ln_j) = if xi >= 25.0 && xi >= 2.0 * nu * nu + 10.0 {
        hankel(nu, xi)
    } else {
        miller(order, xi)
    };
    if sign == 0.0 {
        return 0.0;
    }
    let ln_lambda = ln_gamma_order_plus_one(order) + nu * (2.0 / xi).ln() + ln_j;
    sign * ln_lambda.exp()
}

fn series(nu: f64, xi: f64) -> f64 {
    let x = 0.25 * xi * xi;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        term *= -x / ((k + 1.0) * (nu + k + 1.0));
        sum += term;
        k += 1.0;
        if term.abs() < 1e-17 && k > x / (nu + 1.0) {
            break;
        }
    }
    sum
}

/// Returns (sign, ln|J_ν(ξ)|) from the large-argument expansion.
fn hankel(nu: f64, xi: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let inv8x = 1.0 / (8.0 * xi);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) * inv8x / k as f64;
        let mag = term.abs();
        if mag > last {
            break;
        }
        last = mag;
        // a_k/x^k enters Q for odd k and P for even k, signs alternating in pairs
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = xi.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    let j = (2.0 / (PI * xi)).sqrt() * (p * cos_chi - q * sin_chi);
    if j == 0.0 {
        (0.0, 0.0)
    } else {
        (j.signum(), j.abs().ln())
    }
}

/// Returns (sign, ln|J_ν(ξ)|) via backward recurrence.
fn miller(order: BesselOrder, xi: f64) -> (f64, f64) {
    let nu = order.value();
    let frac = if order.is_integer() { 0.0 } else { 0.5 };
    let top = nu.max(xi);
    let start = (top + 30.0 + (160.0 * top).sqrt()).ceil();
    // orders are frac + m for integer m
    let mut m = start as u64;
    let target = (nu - frac) as u64;
    let mut f_next = 0.0; // order m + 1
    let mut f_cur = 1.0; // order m
    let mut recorded: Option<f64> = None;
    let mut ln_after = 0.0;
    let mut neumann = 0.0; // integer orders: 2 Σ f_{2k}, k ≥ 1

    loop {
        // f_cur holds order frac + m
        if order.is_integer() {
            if m >= 2 && m % 2 == 0 {
                neumann += 2.0 * f_cur;
            }
            if m == 0 {
                break;
            }
        }
        let mu = frac + m as f64;
        let f_prev = (2.0 * mu / xi) * f_cur - f_next;
        f_next = f_cur;
        f_cur = f_prev;
        if f_cur.abs() > RESCALE_AT {
            f_cur *= RESCALE_BY;
            f_next *= RESCALE_BY;
            neumann *= RESCALE_BY;
            if recorded.is_some() {
                ln_after += RESCALE_BY.ln();
            }
        }
        if m == 0 {
            // half-integer orders: f_cur is now order -1/2, f_next order 1/2
            break;
        }
        m -= 1;
        if m == target && recorded.is_none() {
            recorded = Some(f_cur);
        }
    }
    let x = recorded.expect("start order exceeds the target order");
    if x == 0.0 {
        return (0.0, 0.0);
    }
    if order.is_integer() {
        // f_cur holds order 0
        let norm = f_cur + neumann;
        let sign = x.signum() * norm.signum();
        (sign, x.abs().ln() + ln_after - norm.abs().ln())
    } else {
        let amp = (2.0 / (PI * xi)).sqrt();
        let (s, c) = xi.sin_cos();
        let (f_ref, j_ref) = if s.abs() >= c.abs() {
            (f_next, amp * s)
        } else {
            (f_cur, amp * c)
        };
        let sign = x.signum() * f_ref.signum() * j_ref.signum();
        (sign, x.abs().ln() + ln_after - f_ref.abs().ln() + j_ref.abs().ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
    fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (nodes, weights)
    }

    /// Λ_ν(ξ) = ∫ sin^{2ν}θ cos(ξ cos θ) dθ / ∫ sin^{2ν}θ dθ over [0, π],
    /// by composite 20-point Gauss-Legendre.
    fn lambda_quadrature(nu: f64, xi: f64) -> f64 {
        let (x, w) = gauss_legendre(20);
        let panels = ((xi + 10.0) * 2.0).ceil() as usize;
        let h = PI / panels as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for p in 0..panels {
            let a = p as f64 * h;
            for (xk, wk) in x.iter().zip(&w) {
                let theta = a + 0.5 * h * (xk + 1.0);
                let weight = 0.5 * h * wk * theta.sin().powf(2.0 * nu);
                num += weight * (xi * theta.cos()).cos();
                den += weight;
            }
        }
        num / den
    }

    /// Bessel's integral J₁(ξ) = (1/2π)∫ cos(θ − ξ sin θ) dθ over a full period.
    fn j1_trapezoid(xi: f64) -> f64 {
        let n = 4096;
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|i| {
                let t = i as f64 * h;
                (t - xi * t.sin()).cos()
            })
            .sum::<f64>()
            / n as f64
    }

    fn j0_series(x: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= -(x * x / 4.0) / (k as f64 * k as f64);
            sum += term;
        }
        sum
    }

    fn order(nu: f64) -> BesselOrder {
        BesselOrder::new(nu).unwrap()
    }

    #[test]
    fn unity_at_origin_for_every_order() {
        for twice in 0..=MAX_TWICE {
            assert_eq!(scaled_bessel(BesselOrder::from_twice(twice).unwrap(), 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn half_order_is_sinc() {
        for xi in [0.1, 1.0, 10.0, 3.7, 33.0, 250.0] {
            let got = scaled_bessel(order(0.5), xi).unwrap();
            assert!((got - xi.sin() / xi).abs() < 1e-12, "xi={xi}: {got}");
        }
    }

    #[test]
    fn order_one_is_jinc_against_bessel_integral() {
        for xi in [0.1, 0.5, 1.0, 2.0, 3.83, 5.0, 10.0, 20.0, 40.0] {
            let got = scaled_bessel(order(1.0), xi).unwrap();
            let want = 2.0 * j1_trapezoid(xi) / xi;
            assert!((got - want).abs() < 1e-12, "xi={xi}: {got} vs {want}");
        }
    }

    #[test]
    fn lattice_against_quadrature() {
        let orders = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 6.5, 10.0, 49.5, 200.0, 1499.0];
        for &nu in &orders {
            for &xi in &[0.5, 2.0, 3.3, 7.0, 15.0, 26.0, 40.0, 50.0] {
                let got = scaled_bessel(order(nu), xi).unwrap();
                let want = lambda_quadrature(nu, xi);
                assert!((got - want).abs() < 1e-10, "nu={nu} xi={xi}: {got} vs {want}");
            }
            for &xi in &[80.0, 200.0, 1000.0] {
                let got = scaled_bessel(order(nu), xi).unwrap();
                let want = lambda_quadrature(nu, xi);
                assert!((got - want).abs() < 1e-8, "nu={nu} xi={xi}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn hankel_and_miller_agree_where_both_apply() {
        for &nu in &[0.0, 0.5, 1.0, 3.0, 4.5] {
            let o = order(nu);
            for &xi in &[60.0, 300.0, 4000.0, 1.0e5] {
                let (sh, lh) = hankel(nu, xi);
                let (sm, lm) = miller(o, xi);
                let jh = sh * lh.exp();
                let jm = sm * lm.exp();
                let scale = (2.0 / (PI * xi)).sqrt();
                assert!((jh - jm).abs() < 1e-12 * scale.max(1e-300) * 1e2, "nu={nu} xi={xi}: {jh} vs {jm}");
            }
        }
    }

    #[test]
    fn extreme_corner_of_domain_is_finite_and_bounded() {
        for &(nu, xi) in &[(2000.0, 1.0e6), (1499.0, 1.0e6), (0.0, 1.0e6), (2000.0, 90.0), (1499.0, 80.0), (2000.0, 1e-3)] {
            let v = scaled_bessel(order(nu), xi).unwrap();
            assert!(v.is_finite() && v.abs() <= 1.0, "nu={nu} xi={xi}: {v}");
        }
        // J_1499(80) is ~1e-1750, far below f64, yet Λ is O(1): close to exp(−ξ²/4(ν+1))
        let v = scaled_bessel(order(1499.0), 80.0).unwrap();
        assert!((v - (-6400.0f64 / 6000.0).exp()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn first_roots_match_independent_series() {
        let bisect = |f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64| {
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if f(a) * f(m) <= 0.0 {
                    b = m
                } else {
                    a = m
                }
            }
            0.5 * (a + b)
        };
        let j0_root = bisect(&j0_series, 2.0, 3.0);
        assert!((j0_root - 2.404_825_557_695_773).abs() < 1e-12);
        assert!(bessel_j0(j0_root).abs() < 1e-14);
        let j1_root = bisect(&|x| j1_trapezoid(x), 3.5, 4.0);
        assert!((j1_root - 3.831_705_970_207_512).abs() < 1e-12);
        assert!(jinc(j1_root).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_domain() {
        assert!(BesselOrder::new(0.3).is_err());
        assert!(BesselOrder::new(-0.5).is_err());
        assert!(BesselOrder::new(2000.5).is_err());
        assert!(scaled_bessel(order(1.0), -1.0).is_err());
        assert!(scaled_bessel(order(1.0), 1.0e6 + 1.0).is_err());
        assert!(scaled_bessel(order(1.0), f64::NAN).is_err());
        assert_eq!(BesselOrder::for_gas(1000).unwrap().value(), 1499.0);
        assert_eq!(BesselOrder::for_gas(1).unwrap().value(), 0.5);
    }

    #[test]
    fn ln_gamma_table_matches_products() {
        assert!((ln_gamma_order_plus_one(order(4.0)) - 24f64.ln()).abs() < 1e-14);
        // Γ(5/2) = 3√π/4
        let want = (3.0 * PI.sqrt() / 4.0).ln();
        assert!((ln_gamma_order_plus_one(order(1.5)) - want).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn envelope_bounded_by_one(twice in 0u32..4000, xi in 0.0f64..2000.0) {
            let v = scaled_bessel(BesselOrder::from_twice(twice).unwrap(), xi).unwrap();
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }
}
