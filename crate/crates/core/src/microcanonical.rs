//! Uniform measures on constant-energy shells and the overlaps they imply.
//!
//! For a shell measure W ∝ δ(H − E), ⟨D⟩ is the shell average of
//! exp(i(δp·x + δx·p)/ħ). Positions and momenta decouple, so for the
//! circular billiard and the dilute hard-sphere gas the average is a product
//! of a momentum-sphere factor (a scaled Bessel function) and a position
//! factor (Bessel for the disk, sinc per coordinate for the box). The same
//! averages are estimated here by Monte Carlo.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bessel::{scaled_bessel, BesselOrder};
use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table};
use crate::overlap::{ray_step, Displacement, OverlapSource, Route, Scales};
use crate::rng::{derive_seed, stream_rng};

/// Points per RNG stream. Chunk `c` of a run always draws from stream `c`,
/// so the estimate does not depend on how chunks are scheduled.
pub const CHUNK: usize = 1 << 16;

/// Largest particle number the gas sampler accepts.
pub const MAX_SAMPLED_PARTICLES: usize = 100;

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::param(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// Circular billiard of radius L at momentum magnitude P.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskBilliard {
    radius: f64,
    momentum: f64,
    hbar: f64,
}

impl DiskBilliard {
    pub fn new(radius: f64, momentum: f64, hbar: f64) -> Result<Self> {
        positive("radius", radius)?;
        positive("momentum", momentum)?;
        positive("hbar", hbar)?;
        Ok(DiskBilliard { radius, momentum, hbar })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

/// N non-interacting particles in the box [−L/2, L/2]³, each with momentum
/// magnitude P on average (total |p| = √N·P).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GasBox {
    particles: usize,
    side: f64,
    momentum: f64,
    hbar: f64,
}

impl GasBox {
    pub fn new(particles: usize, side: f64, momentum: f64, hbar: f64) -> Result<Self> {
        if particles == 0 {
            return Err(Error::param("particles", "need at least one particle"));
        }
        positive("side", side)?;
        positive("momentum", momentum)?;
        positive("hbar", hbar)?;
        Ok(GasBox { particles, side, momentum, hbar })
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn momentum(&self) -> f64 {
        self.momentum
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn dim(&self) -> usize {
        3 * self.particles
    }

    /// ν = (3N − 2)/2.
    pub fn order(&self) -> Result<BesselOrder> {
        BesselOrder::for_gas(self.particles)
    }

    pub fn shell_radius(&self) -> f64 {
        (self.particles as f64).sqrt() * self.momentum
    }
}

/// Draws independent phase-space points from a shell.
pub trait ShellSampler: Sync {
    /// Degrees of freedom.
    fn dim(&self) -> usize;
    fn hbar(&self) -> f64;
    /// Writes one point into `x` and `p` (each of length `dim`).
    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], p: &mut [f64]);
    fn describe(&self) -> String;
}

impl ShellSampler for DiskBilliard {
    fn dim(&self) -> usize {
        2
    }

    fn hbar(&self) -> f64 {
        self.hbar
    }

    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], p: &mut [f64]) {
        let r = self.radius * rng.random::<f64>().sqrt();
        let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
        x[0] = r * c;
        x[1] = r * s;
        let (s, c) = (2.0 * PI * rng.random::<f64>()).sin_cos();
        p[0] = self.momentum * c;
        p[1] = self.momentum * s;
    }

    fn describe(&self) -> String {
        format!("disk billiard L={} P={}", self.radius, self.momentum)
    }
}

/// Gas geometry checked for the sampling regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasSampler(GasBox);

impl GasSampler {
    pub fn new(gas: GasBox) -> Result<Self> {
        if gas.particles > MAX_SAMPLED_PARTICLES {
            return Err(Error::Domain(format!(
                "sampling supports N <= {MAX_SAMPLED_PARTICLES} (got {}); use the analytic gas overlap instead",
                gas.particles
            )));
        }
        Ok(GasSampler(gas))
    }

    pub fn gas(&self) -> &GasBox {
        &self.0
    }
}

impl ShellSampler for GasSampler {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn hbar(&self) -> f64 {
        self.0.hbar
    }

    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], p: &mut [f64]) {
        let side = self.0.side;
        for xi in x.iter_mut() {
            *xi = side * (rng.random::<f64>() - 0.5);
        }
        let mut norm = 0.0;
        for pi in p.iter_mut() {
            *pi = rng.sample(StandardNormal);
            norm += *pi * *pi;
        }
        let scale = self.0.shell_radius() / norm.sqrt();
        p.iter_mut().for_each(|v| *v *= scale);
    }

    fn describe(&self) -> String {
        format!("hard-sphere gas N={} L={} P={}", self.0.particles, self.0.side, self.0.momentum)
    }
}

/// Materialized shell samples, stored point-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoints {
    dim: usize,
    seed: u64,
    positions: Vec<f64>,
    momenta: Vec<f64>,
}

impl PhasePoints {
    pub fn len(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn momentum(&self, i: usize) -> &[f64] {
        &self.momenta[i * self.dim..(i + 1) * self.dim]
    }
}

fn chunk_bounds(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n.div_ceil(CHUNK)).map(move |c| (c, CHUNK.min(n - c * CHUNK)))
}

/// Draws `n` points from `sampler`.
pub fn sample_shell(sampler: &dyn ShellSampler, seed: u64, n: usize) -> Result<PhasePoints> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    let dim = sampler.dim();
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = chunk_bounds(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(seed, c as u64);
            let mut xs = vec![0.0; len * dim];
            let mut ps = vec![0.0; len * dim];
            for (x, p) in xs.chunks_exact_mut(dim).zip(ps.chunks_exact_mut(dim)) {
                sampler.draw(&mut rng, x, p);
            }
            (xs, ps)
        })
        .collect();
    let mut positions = Vec::with_capacity(n * dim);
    let mut momenta = Vec::with_capacity(n * dim);
    for (xs, ps) in chunks {
        positions.extend(xs);
        momenta.extend(ps);
    }
    Ok(PhasePoints { dim, seed, positions, momenta })
}

/// Positions uniform in the disk, momenta uniform on |p| = P.
pub fn sample_disk_shell(geom: &DiskBilliard, seed: u64, n: usize) -> Result<PhasePoints> {
    sample_shell(geom, seed, n)
}

/// Positions uniform in the box, momenta uniform on the sphere of radius √N·P.
pub fn sample_box_shell(gas: &GasBox, seed: u64, n: usize) -> Result<PhasePoints> {
    sample_shell(&GasSampler::new(*gas)?, seed, n)
}

/// Monte Carlo estimate of a complex mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: C64,
    /// √((s²_re + s²_im)/n) with unbiased sample variances.
    pub stderr: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl Serialize for McEstimate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("McEstimate", 5)?;
        st.serialize_field("mean_re", &self.mean.re)?;
        st.serialize_field("mean_im", &self.mean.im)?;
        st.serialize_field("stderr", &self.stderr)?;
        st.serialize_field("n_samples", &self.n_samples)?;
        st.serialize_field("seed", &self.seed)?;
        st.end()
    }
}

/// Running mean and squared deviations of the real and imaginary parts.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: [f64; 2],
    m2: [f64; 2],
}

impl Moments {
    fn push(&mut self, v: [f64; 2]) {
        self.n += 1.0;
        for k in 0..2 {
            let delta = v[k] - self.mean[k];
            self.mean[k] += delta / self.n;
            self.m2[k] += delta * (v[k] - self.mean[k]);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.n == 0.0 {
            return;
        }
        let n = self.n + other.n;
        for k in 0..2 {
            let delta = other.mean[k] - self.mean[k];
            self.mean[k] += delta * other.n / n;
            self.m2[k] += other.m2[k] + delta * delta * self.n * other.n / n;
        }
        self.n = n;
    }

    fn estimate(&self, seed: u64) -> McEstimate {
        let n = self.n;
        let stderr = if n > 1.0 { ((self.m2[0] + self.m2[1]) / (n - 1.0) / n).sqrt() } else { 0.0 };
        McEstimate { mean: C64::new(self.mean[0], self.mean[1]), stderr, n_samples: n as usize, seed }
    }
}

fn phase(d: &Displacement, x: &[f64], p: &[f64], hbar: f64) -> [f64; 2] {
    let mut theta = 0.0;
    for k in 0..x.len() {
        theta += d.dp()[k] * x[k] + d.dx()[k] * p[k];
    }
    let (s, c) = (theta / hbar).sin_cos();
    [c, s]
}

/// Shell average of exp(i(δp·x + δx·p)/ħ) over `n` fresh samples.
/// Identical to sampling with [`sample_shell`] and calling
/// [`mc_overlap_points`], without holding the points in memory.
pub fn mc_overlap(sampler: &dyn ShellSampler, seed: u64, n: usize, d: &Displacement) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::param("n", "need at least one sample"));
    }
    let dim = sampler.dim();
    if d.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: d.dim() });
    }
    let hbar = sampler.hbar();
    let parts: Vec<Moments> = chunk_bounds(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = stream_rng(seed, c as u64);
            let (mut x, mut p) = (vec![0.0; dim], vec![0.0; dim]);
            let mut m = Moments::default();
            for _ in 0..len {
                sampler.draw(&mut rng, &mut x, &mut p);
                m.push(phase(d, &x, &p, hbar));
            }
            m
        })
        .collect();
    Ok(combine(&parts).estimate(seed))
}

/// Shell average over previously drawn points.
pub fn mc_overlap_points(points: &PhasePoints, d: &Displacement, hbar: f64) -> Result<McEstimate> {
    if d.dim() != points.dim {
        return Err(Error::DimensionMismatch { expected: points.dim, got: d.dim() });
    }
    let parts: Vec<Moments> = chunk_bounds(points.len())
        .map(|(c, len)| {
            let mut m = Moments::default();
            for i in c * CHUNK..c * CHUNK + len {
                m.push(phase(d, points.position(i), points.momentum(i), hbar));
            }
            m
        })
        .collect();
    Ok(combine(&parts).estimate(points.seed))
}

fn combine(parts: &[Moments]) -> Moments {
    let mut total = Moments::default();
    for m in parts {
        total.merge(m);
    }
    total
}

/// J₀(P|δx|/ħ) · 2J₁(L|δp|/ħ)/(L|δp|/ħ).
pub fn disk_overlap_analytic(geom: &DiskBilliard, dx_mag: f64, dp_mag: f64) -> Result<f64> {
    check_magnitudes(dx_mag, dp_mag)?;
    let zero = BesselOrder::from_twice(0)?;
    let one = BesselOrder::from_twice(2)?;
    Ok(scaled_bessel(zero, geom.momentum * dx_mag / geom.hbar)?
        * scaled_bessel(one, geom.radius * dp_mag / geom.hbar)?)
}

/// Λ_ν(√N·P|δx|/ħ) · Πᵢ sinc(L δpᵢ/2ħ), ν = (3N − 2)/2.
pub fn gas_overlap_analytic(gas: &GasBox, dx_mag: f64, dp: &[f64]) -> Result<f64> {
    if dp.len() != gas.dim() {
        return Err(Error::DimensionMismatch { expected: gas.dim(), got: dp.len() });
    }
    if !(dx_mag >= 0.0) || dp.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("displacement", "magnitudes must be non-negative and finite"));
    }
    let xi = gas.shell_radius() * dx_mag / gas.hbar;
    let momentum_factor = scaled_bessel(gas.order()?, xi)?;
    let position_factor: f64 = dp.iter().map(|v| sinc(gas.side * v / (2.0 * gas.hbar))).product();
    Ok(momentum_factor * position_factor)
}

/// exp(−P²|δx|²/6ħ²) · exp(−L²|δp|²/24ħ²).
pub fn gas_overlap_gaussian(gas: &GasBox, dx_mag: f64, dp_mag: f64) -> Result<f64> {
    check_magnitudes(dx_mag, dp_mag)?;
    let (p, l, h) = (gas.momentum, gas.side, gas.hbar);
    Ok((-(p * dx_mag).powi(2) / (6.0 * h * h)).exp() * (-(l * dp_mag).powi(2) / (24.0 * h * h)).exp())
}

fn check_magnitudes(dx_mag: f64, dp_mag: f64) -> Result<()> {
    if !(dx_mag >= 0.0 && dp_mag >= 0.0) || !dx_mag.is_finite() || !dp_mag.is_finite() {
        return Err(Error::param("displacement", "magnitudes must be non-negative and finite"));
    }
    Ok(())
}

/// sin(u)/u with the removable singularity filled in.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// Closed-form disk overlap as a ray source (2-D displacements).
pub struct DiskAnalytic(pub DiskBilliard);

impl OverlapSource for DiskAnalytic {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        require(d, 2)?;
        Ok(C64::new(disk_overlap_analytic(&self.0, d.dx_norm(), d.dp_norm())?, 0.0))
    }
    fn route(&self) -> Route {
        Route::Analytic
    }
    fn hbar(&self) -> f64 {
        self.0.hbar
    }
    fn describe(&self) -> String {
        format!("{} (Bessel product)", self.0.describe())
    }
}

/// Closed-form gas overlap as a ray source (3N-dimensional displacements).
pub struct GasAnalytic(pub GasBox);

impl OverlapSource for GasAnalytic {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        require(d, self.0.dim())?;
        Ok(C64::new(gas_overlap_analytic(&self.0, d.dx_norm(), d.dp())?, 0.0))
    }
    fn route(&self) -> Route {
        Route::Analytic
    }
    fn hbar(&self) -> f64 {
        self.0.hbar
    }
    fn describe(&self) -> String {
        format!("hard-sphere gas N={} L={} P={} (Bessel-sinc product)", self.0.particles, self.0.side, self.0.momentum)
    }
}

/// Large-N Gaussian form of the gas overlap as a ray source.
pub struct GasGaussian(pub GasBox);

impl OverlapSource for GasGaussian {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        require(d, self.0.dim())?;
        Ok(C64::new(gas_overlap_gaussian(&self.0, d.dx_norm(), d.dp_norm())?, 0.0))
    }
    fn route(&self) -> Route {
        Route::Analytic
    }
    fn hbar(&self) -> f64 {
        self.0.hbar
    }
    fn describe(&self) -> String {
        format!("hard-sphere gas N={} L={} P={} (Gaussian limit)", self.0.particles, self.0.side, self.0.momentum)
    }
}

/// Monte Carlo shell average as a ray source. Every displacement reuses
/// the same samples, so a ray is a smooth curve with correlated errors.
pub struct MonteCarlo<'a> {
    pub sampler: &'a dyn ShellSampler,
    pub seed: u64,
    pub samples: usize,
}

impl OverlapSource for MonteCarlo<'_> {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        Ok(mc_overlap(self.sampler, self.seed, self.samples, d)?.mean)
    }
    fn route(&self) -> Route {
        Route::MonteCarlo
    }
    fn hbar(&self) -> f64 {
        self.sampler.hbar()
    }
    fn describe(&self) -> String {
        format!("{} ({} samples, seed {})", self.sampler.describe(), self.samples, self.seed)
    }
}

fn require(d: &Displacement, dim: usize) -> Result<()> {
    if d.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: d.dim() });
    }
    Ok(())
}

/// Independent Monte Carlo estimates along a ray.
#[derive(Debug, Clone, PartialEq)]
pub struct McSeries {
    pub source: String,
    pub hbar: f64,
    pub scales: Option<Scales>,
    pub step: Displacement,
    pub seed: u64,
    pub samples: usize,
    pub t: Vec<f64>,
    pub estimates: Vec<McEstimate>,
}

/// Estimates ⟨D⟩ at t_i = i·t_max/(n−1); point i uses seed
/// `derive_seed(seed, i)` so the errors of different points are independent.
pub fn mc_ray(
    sampler: &dyn ShellSampler,
    direction: &Displacement,
    t_max: f64,
    n: usize,
    samples: usize,
    seed: u64,
    scales: Option<Scales>,
) -> Result<McSeries> {
    if n < 2 {
        return Err(Error::param("n", "need at least two ray points"));
    }
    if samples == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    require(direction, sampler.dim())?;
    let step = ray_step(direction, sampler.hbar(), scales)?;
    let t: Vec<f64> = (0..n).map(|i| i as f64 * t_max / (n - 1) as f64).collect();
    let estimates = t
        .iter()
        .enumerate()
        .map(|(i, &ti)| mc_overlap(sampler, derive_seed(seed, i as u64), samples, &step.scaled(ti)))
        .collect::<Result<Vec<_>>>()?;
    Ok(McSeries {
        source: sampler.describe(),
        hbar: sampler.hbar(),
        scales,
        step,
        seed,
        samples,
        t,
        estimates,
    })
}

impl McSeries {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "mean_re", "mean_im", "stderr"])
            .meta("source", &self.source)
            .meta("hbar", fmt_f64(self.hbar));
        if let Some(s) = self.scales {
            t = t.meta("P", fmt_f64(s.p)).meta("L", fmt_f64(s.l));
        }
        t = t.meta("seed", self.seed).meta("samples", self.samples);
        for (ti, e) in self.t.iter().zip(&self.estimates) {
            t.push(vec![*ti, e.mean.re, e.mean.im, e.stderr]);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disk() -> DiskBilliard {
        DiskBilliard::new(1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn analytic_disk_cases() {
        let g = DiskBilliard::new(2.0, 3.0, 0.5).unwrap();
        assert_eq!(disk_overlap_analytic(&g, 0.0, 0.0).unwrap(), 1.0);
        let j0_root = 2.404825557695773 * 0.5 / 3.0;
        let j1_root = 3.831705970207512 * 0.5 / 2.0;
        for other in [0.0, 0.3, 1.7] {
            assert!(disk_overlap_analytic(&g, j0_root, other).unwrap().abs() < 1e-9);
            assert!(disk_overlap_analytic(&g, other, j1_root).unwrap().abs() < 1e-9);
        }
        for (dx, dp) in [(0.4, 0.9), (2.0, 0.1), (7.5, 3.3)] {
            let joint = disk_overlap_analytic(&g, dx, dp).unwrap();
            let split = disk_overlap_analytic(&g, dx, 0.0).unwrap() * disk_overlap_analytic(&g, 0.0, dp).unwrap();
            assert_eq!(joint, split);
        }
        assert!(disk_overlap_analytic(&g, -1.0, 0.0).is_err());
    }

    #[test]
    fn analytic_gas_cases() {
        let gas = GasBox::new(1, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(gas.order().unwrap().value(), 0.5);
        assert_eq!(gas_overlap_analytic(&gas, 0.0, &[0.0; 3]).unwrap(), 1.0);
        for xi in [0.1, 1.0, 4.0, 10.0, 33.0] {
            let v = gas_overlap_analytic(&gas, xi, &[0.0; 3]).unwrap();
            assert!((v - xi.sin() / xi).abs() < 1e-12);
        }
        assert!(matches!(gas_overlap_analytic(&gas, 0.0, &[0.0; 2]), Err(Error::DimensionMismatch { .. })));

        let big = GasBox::new(1000, 1.0, 1.0, 1.0).unwrap();
        assert_eq!(big.order().unwrap().value(), 1499.0);
        assert_eq!(gas_overlap_analytic(&big, 0.0, &vec![0.0; 3000]).unwrap(), 1.0);
        let g = gas_overlap_gaussian(&big, 6f64.sqrt(), 0.0).unwrap();
        assert!((g - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(gas_overlap_gaussian(&big, 0.0, 0.0).unwrap(), 1.0);
        let component = 1.0 / (3000f64).sqrt();
        let exact = gas_overlap_analytic(&big, 0.0, &vec![component; 3000]).unwrap();
        let limit = gas_overlap_gaussian(&big, 0.0, 1.0).unwrap();
        assert!((exact - limit).abs() < 1e-2);
    }

    #[test]
    fn sinc_is_continuous_at_the_switch() {
        for u in [9.99e-5, 1e-4, 1.01e-4, -1e-4] {
            assert!((sinc(u) - (u as f64).sin() / u).abs() < 1e-15);
        }
        assert_eq!(sinc(0.0), 1.0);
    }

    #[test]
    fn zero_displacement_is_exact() {
        let est = mc_overlap(&disk(), 3, 100_000, &Displacement::zero(2)).unwrap();
        assert_eq!(est.mean, C64::new(1.0, 0.0));
        assert_eq!(est.stderr, 0.0);
        assert_eq!(est.n_samples, 100_000);
    }

    #[test]
    fn streaming_matches_materialized_points() {
        let gas = GasSampler::new(GasBox::new(2, 1.5, 0.8, 1.0).unwrap()).unwrap();
        let n = 3 * CHUNK / 2 + 17;
        let points = sample_shell(&gas, 11, n).unwrap();
        let d = Displacement::new(vec![0.3, 0.0, -0.2, 0.1, 0.0, 0.4], vec![1.0, -0.5, 0.0, 0.2, 0.7, 0.0]).unwrap();
        let a = mc_overlap(&gas, 11, n, &d).unwrap();
        let b = mc_overlap_points(&points, &d, 1.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(points.len(), n);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(mc_overlap(&disk(), 0, 10, &Displacement::zero(3)), Err(Error::DimensionMismatch { .. })));
        assert!(mc_overlap(&disk(), 0, 0, &Displacement::zero(2)).is_err());
        assert!(matches!(sample_box_shell(&GasBox::new(101, 1.0, 1.0, 1.0).unwrap(), 0, 1), Err(Error::Domain(_))));
        assert!(sample_disk_shell(&disk(), 0, 0).is_err());
        assert!(GasBox::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(DiskBilliard::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn estimate_serializes_in_field_order() {
        let est = McEstimate { mean: C64::new(0.5, -0.25), stderr: 0.01, n_samples: 10, seed: 4 };
        assert_eq!(
            serde_json::to_string(&est).unwrap(),
            r#"{"mean_re":0.5,"mean_im":-0.25,"stderr":0.01,"n_samples":10,"seed":4}"#
        );
    }
}
