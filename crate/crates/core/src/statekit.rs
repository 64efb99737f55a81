//! State construction: Gaussian packets on a uniform grid, their
//! superpositions (cat and compass states), and Berry random-wave fields.
//!
//! Packet convention: ψ(x) ∝ exp(−(x−x₀)²/4σ²)·exp(i p₀ x/ħ), so σ² is the
//! position variance.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::bessel::jinc;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::spectral::{signed_index, FftPair};

/// |ψ|² allowed at the first and last grid sample.
pub const BOUNDARY_DENSITY_LIMIT: f64 = 1e-8;

/// Default number of plane waves in a random-wave state.
pub const DEFAULT_COMPONENTS: usize = 400;

/// Uniform grid `x_i = x_min + i·Δx`, `i < n`, `Δx = (x_max − x_min)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    x_min: f64,
    x_max: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() || x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "need finite x_max > x_min, got [{x_min}, {x_max}]"
            )));
        }
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "sample count must be a power of two >= 64, got {n}"
            )));
        }
        Ok(Grid1D { x_min, x_max, n })
    }

    /// Grid on `[-half_width, half_width)`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.width() / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    /// Momentum spacing 2πħ/(nΔx) of the conjugate grid.
    pub fn dp(&self, hbar: f64) -> f64 {
        2.0 * PI * hbar / self.width()
    }

    /// Largest momentum representable on the grid, πħ/Δx.
    pub fn nyquist_momentum(&self, hbar: f64) -> f64 {
        PI * hbar / self.dx()
    }

    fn is_symmetric(&self) -> bool {
        (self.x_min + self.x_max).abs() <= 1e-12 * self.width()
    }
}

/// Complex amplitudes on a [`Grid1D`] together with ħ.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction1D {
    grid: Grid1D,
    amplitudes: Vec<C64>,
    hbar: f64,
}

impl WaveFunction1D {
    /// Normalizes `amplitudes` and checks the boundary-decay condition.
    pub fn new(grid: Grid1D, amplitudes: Vec<C64>, hbar: f64) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a {}-point grid",
                amplitudes.len(),
                grid.len()
            )));
        }
        check_hbar(hbar)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amplitudes", "contain non-finite values"));
        }
        let psi = WaveFunction1D { grid, amplitudes, hbar }.normalize()?;
        psi.check_boundary_decay()?;
        Ok(psi)
    }

    pub(crate) fn from_parts(grid: Grid1D, amplitudes: Vec<C64>, hbar: f64) -> Self {
        WaveFunction1D { grid, amplitudes, hbar }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Σ|ψᵢ|²Δx.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm_sq = self.norm_sq();
        if !(norm_sq > 1e-300) || !norm_sq.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / norm_sq.sqrt();
        Ok(WaveFunction1D {
            grid: self.grid,
            amplitudes: self.amplitudes.iter().map(|a| a * scale).collect(),
            hbar: self.hbar,
        })
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// ⟨φ|ψ⟩ = Σ φ*ψ Δx.
    pub fn inner(&self, other: &WaveFunction1D) -> Result<C64> {
        self.ensure_compatible(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            * self.grid.dx())
    }

    pub fn position_mean(&self) -> f64 {
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| self.grid.x(i) * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    pub fn position_variance(&self) -> f64 {
        let mean = self.position_mean();
        let dx = self.grid.dx();
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(i, a)| (self.grid.x(i) - mean).powi(2) * a.norm_sqr())
            .sum::<f64>()
            * dx
            / self.norm_sq()
    }

    /// ⟨p̂⟩ from the discrete momentum representation.
    pub fn momentum_mean(&self) -> f64 {
        let n = self.grid.len();
        let mut spec = self.amplitudes.clone();
        FftPair::new(n).forward(&mut spec);
        let dk = 2.0 * PI / self.grid.width();
        let (mut num, mut den) = (0.0, 0.0);
        for (j, v) in spec.iter().enumerate() {
            let w = v.norm_sqr();
            num += signed_index(j, n) as f64 * dk * w;
            den += w;
        }
        self.hbar * num / den
    }

    /// ψ(x) → ψ(−x) on a grid symmetric about the origin.
    pub fn reflect(&self) -> Result<Self> {
        if !self.grid.is_symmetric() {
            return Err(Error::InvalidGrid("reflection needs a grid symmetric about x = 0".into()));
        }
        let n = self.grid.len();
        let amplitudes = (0..n).map(|i| self.amplitudes[(n - i) % n]).collect();
        Ok(WaveFunction1D { grid: self.grid, amplitudes, hbar: self.hbar })
    }

    /// Fails when |ψ|² at either end sample reaches [`BOUNDARY_DENSITY_LIMIT`].
    pub fn check_boundary_decay(&self) -> Result<()> {
        let scale = 1.0 / self.norm_sq();
        let ends = [
            ("lower", self.amplitudes[0]),
            ("upper", self.amplitudes[self.grid.len() - 1]),
        ];
        for (side, a) in ends {
            let density = a.norm_sqr() * scale;
            if density >= BOUNDARY_DENSITY_LIMIT {
                return Err(Error::BoundaryDecay { side, density, limit: BOUNDARY_DENSITY_LIMIT });
            }
        }
        Ok(())
    }

    pub(crate) fn ensure_compatible(&self, other: &WaveFunction1D) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("states live on different grids".into()));
        }
        if self.hbar != other.hbar {
            return Err(Error::GridMismatch(format!(
                "states use different hbar ({} vs {})",
                self.hbar, other.hbar
            )));
        }
        Ok(())
    }
}

fn check_hbar(hbar: f64) -> Result<()> {
    if !(hbar > 0.0) || !hbar.is_finite() {
        return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
    }
    Ok(())
}

/// Normalized Gaussian packet centered at (x0, p0) with position spread σ.
pub fn gaussian_packet(grid: Grid1D, x0: f64, p0: f64, sigma: f64, hbar: f64) -> Result<WaveFunction1D> {
    check_hbar(hbar)?;
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    if !x0.is_finite() || !p0.is_finite() {
        return Err(Error::param("x0/p0", "must be finite"));
    }
    if x0 - 6.0 * sigma < grid.x_min() || x0 + 6.0 * sigma > grid.x_max() {
        return Err(Error::SupportViolation(format!(
            "packet support [{}, {}] leaves the grid [{}, {}]",
            x0 - 6.0 * sigma,
            x0 + 6.0 * sigma,
            grid.x_min(),
            grid.x_max()
        )));
    }
    let amplitudes = (0..grid.len())
        .map(|i| {
            let x = grid.x(i);
            let u = x - x0;
            C64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), p0 * x / hbar)
        })
        .collect();
    WaveFunction1D::new(grid, amplitudes, hbar)
}

/// Σ cᵢψᵢ without normalization.
pub fn linear_combination(states: &[WaveFunction1D], coefficients: &[C64]) -> Result<Vec<C64>> {
    let first = states
        .first()
        .ok_or_else(|| Error::param("states", "at least one state is required"))?;
    if states.len() != coefficients.len() {
        return Err(Error::param(
            "coefficients",
            format!("{} coefficients for {} states", coefficients.len(), states.len()),
        ));
    }
    for s in &states[1..] {
        first.ensure_compatible(s)?;
    }
    let mut out = vec![C64::new(0.0, 0.0); first.grid.len()];
    for (s, c) in states.iter().zip(coefficients) {
        for (o, a) in out.iter_mut().zip(&s.amplitudes) {
            *o += c * a;
        }
    }
    Ok(out)
}

/// Normalized superposition Σ cᵢψᵢ.
pub fn superpose(states: &[WaveFunction1D], coefficients: &[C64]) -> Result<WaveFunction1D> {
    if coefficients.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::ZeroNorm);
    }
    let amplitudes = linear_combination(states, coefficients)?;
    let first = &states[0];
    WaveFunction1D::new(first.grid, amplitudes, first.hbar)
}

/// Even cat state: packets at x = ±separation/2 with equal weights.
pub fn cat_state(grid: Grid1D, separation: f64, sigma: f64, hbar: f64) -> Result<WaveFunction1D> {
    let a = gaussian_packet(grid, -0.5 * separation, 0.0, sigma, hbar)?;
    let b = gaussian_packet(grid, 0.5 * separation, 0.0, sigma, hbar)?;
    superpose(&[a, b], &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)])
}

/// Cat state in momentum: packets at x = 0 with p = ±momentum.
pub fn momentum_cat_state(grid: Grid1D, momentum: f64, sigma: f64, hbar: f64) -> Result<WaveFunction1D> {
    let a = gaussian_packet(grid, 0.0, -momentum, sigma, hbar)?;
    let b = gaussian_packet(grid, 0.0, momentum, sigma, hbar)?;
    superpose(&[a, b], &[C64::new(1.0, 0.0), C64::new(1.0, 0.0)])
}

/// Compass state: packets at (±separation/2, 0) and (0, ±momentum).
pub fn compass_state(grid: Grid1D, separation: f64, momentum: f64, sigma: f64, hbar: f64) -> Result<WaveFunction1D> {
    let packets = [
        gaussian_packet(grid, -0.5 * separation, 0.0, sigma, hbar)?,
        gaussian_packet(grid, 0.5 * separation, 0.0, sigma, hbar)?,
        gaussian_packet(grid, 0.0, -momentum, sigma, hbar)?,
        gaussian_packet(grid, 0.0, momentum, sigma, hbar)?,
    ];
    superpose(&packets, &[C64::new(1.0, 0.0); 4])
}

/// One term a·cos(k d·x + φ) of a random-wave field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub direction: [f64; 2],
    pub phase: f64,
    pub amplitude: f64,
}

/// Real random-wave field ψ(x) = Σⱼ aⱼ cos(k dⱼ·x + φⱼ) on a disk of
/// radius `region_radius` centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomWaveState {
    k: f64,
    components: Vec<PlaneWave>,
    region_radius: f64,
    seed: u64,
}

impl RandomWaveState {
    /// Builds a state from explicit components, without rescaling.
    pub fn from_components(k: f64, components: Vec<PlaneWave>, region_radius: f64, seed: u64) -> Result<Self> {
        if !(k > 0.0) || !k.is_finite() {
            return Err(Error::param("k", format!("must be positive, got {k}")));
        }
        if !(region_radius > 0.0) || !region_radius.is_finite() {
            return Err(Error::param("region_radius", format!("must be positive, got {region_radius}")));
        }
        if components.is_empty() {
            return Err(Error::param("components", "at least one plane wave is required"));
        }
        Ok(RandomWaveState { k, components, region_radius, seed })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn components(&self) -> &[PlaneWave] {
        &self.components
    }

    pub fn region_radius(&self) -> f64 {
        self.region_radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn value_at(&self, point: [f64; 2]) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let arg = self.k * (c.direction[0] * point[0] + c.direction[1] * point[1]) + c.phase;
                c.amplitude * arg.cos()
            })
            .sum()
    }

    /// Same field with every amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.components.iter_mut().for_each(|c| c.amplitude *= factor);
        out
    }

    /// Exact mean of ψ² over the region disk.
    pub fn region_mean_intensity(&self) -> f64 {
        let radius = self.region_radius;
        self.pair_sum(|q, c| c.cos() * jinc(norm2(q) * radius))
    }

    /// Exact mean of ψ² over the axis-aligned square of side `side`
    /// centered at `center`.
    pub fn cell_mean_intensity(&self, center: [f64; 2], side: f64) -> f64 {
        self.pair_sum(|q, c| {
            let phase = c + q[0] * center[0] + q[1] * center[1];
            phase.cos() * sinc(0.5 * q[0] * side) * sinc(0.5 * q[1] * side)
        })
    }

    /// ½ΣⱼΣₗ aⱼaₗ [avg(cos(q₋·x + φⱼ − φₗ)) + avg(cos(q₊·x + φⱼ + φₗ))]
    /// with `avg(q, c)` the region average of cos(q·x + c).
    fn pair_sum(&self, avg: impl Fn([f64; 2], f64) -> f64) -> f64 {
        let k = self.k;
        let comps = &self.components;
        let mut total = 0.0;
        for (j, a) in comps.iter().enumerate() {
            let ka = [k * a.direction[0], k * a.direction[1]];
            // diagonal: q₋ = 0
            total += 0.5 * a.amplitude * a.amplitude * (1.0 + avg([2.0 * ka[0], 2.0 * ka[1]], 2.0 * a.phase));
            for b in &comps[j + 1..] {
                let kb = [k * b.direction[0], k * b.direction[1]];
                let diff = avg([ka[0] - kb[0], ka[1] - kb[1]], a.phase - b.phase);
                let sum = avg([ka[0] + kb[0], ka[1] + kb[1]], a.phase + b.phase);
                total += a.amplitude * b.amplitude * (diff + sum);
            }
        }
        total
    }
}

fn norm2(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

/// Berry random-wave state with `m` components: directions and phases
/// uniform, amplitudes standard normal, then rescaled so that the mean of
/// ψ² over the region disk is 1/(πR²).
pub fn random_wave_state(k: f64, m: usize, region_radius: f64, seed: u64) -> Result<RandomWaveState> {
    if m < 2 {
        return Err(Error::param("m", format!("need at least 2 components, got {m}")));
    }
    let mut rng = stream_rng(seed, 0);
    let components = (0..m)
        .map(|_| {
            let theta = rng.random_range(0.0..2.0 * PI);
            let phase = rng.random_range(0.0..2.0 * PI);
            let amplitude: f64 = rng.sample(StandardNormal);
            PlaneWave { direction: [theta.cos(), theta.sin()], phase, amplitude }
        })
        .collect();
    let raw = RandomWaveState::from_components(k, components, region_radius, seed)?;
    let area = PI * region_radius * region_radius;
    let mean = raw.region_mean_intensity();
    Ok(raw.scaled((1.0 / (area * mean)).sqrt()))
}

/// Field values at `points`.
pub fn evaluate_random_wave(state: &RandomWaveState, points: &[[f64; 2]]) -> Vec<f64> {
    points.par_iter().map(|p| state.value_at(*p)).collect()
}

/// Normalized two-point function ⟨ψ(x)ψ(x+Δe)⟩/⟨ψ(x)²⟩ estimated from
/// `n_probe` probe points uniform in the disk of radius R − max(Δ), each
/// with its own uniformly random direction e.
pub fn autocorrelation(state: &RandomWaveState, separations: &[f64], n_probe: usize, seed: u64) -> Result<Vec<f64>> {
    if n_probe == 0 {
        return Err(Error::param("n_probe", "need at least one probe point"));
    }
    let mut max_sep: f64 = 0.0;
    for &s in separations {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::param("separations", format!("must be finite and >= 0, got {s}")));
        }
        max_sep = max_sep.max(s);
    }
    if max_sep > state.region_radius {
        return Err(Error::param(
            "separations",
            format!("separation {max_sep} exceeds the region radius {}", state.region_radius),
        ));
    }
    let probe_radius = state.region_radius - max_sep;
    let mut rng = stream_rng(seed, 1);
    let probes: Vec<([f64; 2], [f64; 2])> = (0..n_probe)
        .map(|_| {
            let r = probe_radius * rng.random::<f64>().sqrt();
            let a = rng.random_range(0.0..2.0 * PI);
            let b = rng.random_range(0.0..2.0 * PI);
            ([r * a.cos(), r * a.sin()], [b.cos(), b.sin()])
        })
        .collect();
    let base: Vec<f64> = probes.par_iter().map(|(x, _)| state.value_at(*x)).collect();
    let denom: f64 = base.iter().map(|v| v * v).sum();
    let out = separations
        .par_iter()
        .map(|&s| {
            if s == 0.0 {
                return 1.0;
            }
            let num: f64 = probes
                .iter()
                .zip(&base)
                .map(|((x, e), v)| v * state.value_at([x[0] + s * e[0], x[1] + s * e[1]]))
                .sum();
            num / denom
        })
        .collect();
    Ok(out)
}
