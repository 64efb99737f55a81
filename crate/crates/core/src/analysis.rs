//! Ringing diagnostics for overlap series and the two convergence studies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table};
use crate::microcanonical::{gas_overlap_analytic, gas_overlap_gaussian, GasBox};
use crate::overlap::OverlapSeries;
use crate::rng::derive_seed;
use crate::statekit::{autocorrelation, random_wave_state};

pub const MIN_SERIES_LEN: usize = 64;
pub const MAX_IMAG_RATIO: f64 = 1e-6;
pub const MIN_PEAKS_FOR_FIT: usize = 5;
/// Peaks skipped at the start of the default fit window.
pub const DEFAULT_SKIP: usize = 2;
pub const MIN_ENSEMBLE: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroMode {
    /// Sign changes of Re⟨D⟩; the series must be effectively real.
    SignChange,
    /// Local minima of |⟨D⟩|.
    ModulusMinima,
}

/// Zeros of the series, in increasing order.
pub fn find_zeros(series: &OverlapSeries, mode: ZeroMode) -> Result<Vec<f64>> {
    if series.len() < MIN_SERIES_LEN {
        return Err(Error::param(
            "series",
            format!("need at least {MIN_SERIES_LEN} points, got {}", series.len()),
        ));
    }
    let t = &series.t;
    match mode {
        ZeroMode::SignChange => {
            let max_re = series.values.iter().fold(0.0f64, |m, v| m.max(v.re.abs()));
            let max_im = series.values.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
            let ratio = if max_re > 0.0 { max_im / max_re } else { f64::INFINITY };
            if ratio >= MAX_IMAG_RATIO {
                return Err(Error::NotReal { ratio });
            }
            Ok(sign_change_zeros(t, &series.re()))
        }
        ZeroMode::ModulusMinima => Ok(modulus_minima(t, &series.abs())),
    }
}

/// Zeros of sampled real data: exact zero samples plus one refined root per
/// strict sign change.
pub fn sign_change_zeros(t: &[f64], y: &[f64]) -> Vec<f64> {
    let mut zeros = Vec::new();
    for k in 0..y.len().saturating_sub(1) {
        if y[k] == 0.0 {
            if k > 0 && y[k - 1] != 0.0 {
                zeros.push(t[k]);
            }
        } else if y[k] * y[k + 1] < 0.0 {
            zeros.push(refine_root(t, y, k));
        }
    }
    zeros
}

/// Bisection on the cubic through the four samples around [t_k, t_{k+1}].
fn refine_root(t: &[f64], y: &[f64], k: usize) -> f64 {
    let start = k.saturating_sub(1).min(t.len().saturating_sub(4));
    let idx: Vec<usize> = (start..(start + 4).min(t.len())).collect();
    let cubic = |s: f64| -> f64 {
        let mut acc = 0.0;
        for &i in &idx {
            let mut w = y[i];
            for &j in &idx {
                if j != i {
                    w *= (s - t[j]) / (t[i] - t[j]);
                }
            }
            acc += w;
        }
        acc
    };
    let (mut lo, mut hi) = (t[k], t[k + 1]);
    let mut f_lo = y[k];
    let tol = (hi - lo) * 1e-6;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = cubic(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn modulus_minima(t: &[f64], a: &[f64]) -> Vec<f64> {
    (1..a.len().saturating_sub(1))
        .filter(|&k| a[k] < a[k - 1] && a[k] <= a[k + 1])
        .map(|k| parabola_vertex(t, a, k).0)
        .collect()
}

/// Vertex (location, value) of the parabola through samples k−1, k, k+1.
fn parabola_vertex(t: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    let (l, c, r) = (y[k - 1], y[k], y[k + 1]);
    let denom = l - 2.0 * c + r;
    if denom == 0.0 {
        return (t[k], c);
    }
    let offset = (0.5 * (l - r) / denom).clamp(-1.0, 1.0);
    let h = if offset >= 0.0 { t[k + 1] - t[k] } else { t[k] - t[k - 1] };
    (t[k] + offset * h, c - 0.25 * (l - r) * offset)
}

/// Maxima of |value| between consecutive zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peaks {
    pub locations: Vec<f64>,
    pub heights: Vec<f64>,
}

impl Peaks {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

/// One peak of |value| per inter-zero interval, refined by a parabola.
pub fn peak_envelope(series: &OverlapSeries, zeros: &[f64]) -> Result<Peaks> {
    if zeros.len() < 2 {
        return Err(Error::InsufficientRinging { found: zeros.len(), needed: 2 });
    }
    let t = &series.t;
    let a = series.abs();
    let mut peaks = Peaks { locations: Vec::new(), heights: Vec::new() };
    for pair in zeros.windows(2) {
        let best = (0..t.len())
            .filter(|&k| t[k] > pair[0] && t[k] < pair[1])
            .max_by(|&i, &j| a[i].total_cmp(&a[j]));
        let Some(k) = best else { continue };
        let (loc, height) = if k > 0 && k + 1 < t.len() {
            parabola_vertex(t, &a, k)
        } else {
            (t[k], a[k])
        };
        if height > 0.0 {
            peaks.locations.push(loc);
            peaks.heights.push(height);
        }
    }
    Ok(peaks)
}

/// Least-squares fit of log(height) = exponent·log(t) + c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub stderr: f64,
    /// Indices of the first and last peak used.
    pub first: usize,
    pub last: usize,
    /// Locations of those peaks.
    pub t_lo: f64,
    pub t_hi: f64,
}

/// Fits peaks `first..=last`; the default window starts at the third peak
/// and runs to the end.
pub fn fit_powerlaw(peaks: &Peaks, window: Option<(usize, usize)>) -> Result<PowerLawFit> {
    let n = peaks.len();
    if n < MIN_PEAKS_FOR_FIT {
        return Err(Error::InsufficientRinging { found: n, needed: MIN_PEAKS_FOR_FIT });
    }
    let (first, last) = window.unwrap_or((DEFAULT_SKIP, n - 1));
    if last >= n || first + 2 > last {
        return Err(Error::param(
            "window",
            format!("peak window {first}..={last} needs at least 3 of the {n} peaks"),
        ));
    }
    let pts: Vec<(f64, f64)> = (first..=last)
        .map(|i| {
            let (t, h) = (peaks.locations[i], peaks.heights[i]);
            if !(t > 0.0 && h > 0.0) {
                return Err(Error::param("peaks", "locations and heights must be positive"));
            }
            Ok((t.ln(), h.ln()))
        })
        .collect::<Result<_>>()?;
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let ssr: f64 = pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let stderr = (ssr / (m - 2.0) / sxx).sqrt();
    Ok(PowerLawFit {
        exponent: slope,
        stderr,
        first,
        last,
        t_lo: peaks.locations[first],
        t_hi: peaks.locations[last],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingingReport {
    pub zeros: Vec<f64>,
    pub spacings: Vec<f64>,
    pub peak_locations: Vec<f64>,
    pub peak_heights: Vec<f64>,
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub fit_window: (f64, f64),
    pub fit_peaks: (usize, usize),
}

/// Zeros, spacings, peaks and the envelope exponent of a series.
pub fn ringing_report(series: &OverlapSeries, mode: ZeroMode, window: Option<(usize, usize)>) -> Result<RingingReport> {
    let zeros = find_zeros(series, mode)?;
    let peaks = peak_envelope(series, &zeros)?;
    let fit = fit_powerlaw(&peaks, window)?;
    Ok(RingingReport {
        spacings: zeros.windows(2).map(|p| p[1] - p[0]).collect(),
        zeros,
        peak_locations: peaks.locations,
        peak_heights: peaks.heights,
        exponent: fit.exponent,
        exponent_stderr: fit.stderr,
        fit_window: (fit.t_lo, fit.t_hi),
        fit_peaks: (fit.first, fit.last),
    })
}

impl RingingReport {
    pub fn to_json(&self) -> String {
        crate::io::to_json(self)
    }
}

/// Distance of the gas overlap from its large-N Gaussian form for one N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub particles: usize,
    /// sup over P|δx|/ħ ∈ [0, t_max] of |Λ_ν(√N·P|δx|/ħ) − exp(−P²|δx|²/6ħ²)|.
    pub dx_deviation: f64,
    /// sup over |δp| ∈ [0, dp_max·ħ/L], equal components, of
    /// |Πsinc(Lδpᵢ/2ħ) − exp(−L²|δp|²/24ħ²)|.
    pub dp_deviation: f64,
}

pub const GAUSSIAN_WINDOW: f64 = 3.0;

/// Deviation of the exact gas overlap factors from the Gaussian limit for
/// each particle number in `particles`. `t_max` is in units of ħ/P
/// (at most 3), `dp_max` in units of ħ/L.
pub fn gaussian_convergence(
    side: f64,
    momentum: f64,
    hbar: f64,
    particles: &[usize],
    t_max: f64,
    dp_max: f64,
    n_points: usize,
) -> Result<Vec<ConvergenceRow>> {
    if !(t_max > 0.0 && t_max <= GAUSSIAN_WINDOW) {
        return Err(Error::param("t_max", format!("must lie in (0, {GAUSSIAN_WINDOW}], got {t_max}")));
    }
    if !(dp_max >= 0.0) || !dp_max.is_finite() {
        return Err(Error::param("dp_max", format!("must be finite and >= 0, got {dp_max}")));
    }
    if n_points < 2 {
        return Err(Error::param("n_points", "need at least two points"));
    }
    if particles.is_empty() {
        return Err(Error::param("particles", "need at least one particle number"));
    }
    particles
        .par_iter()
        .map(|&n| {
            let gas = GasBox::new(n, side, momentum, hbar)?;
            let dim = gas.dim();
            let zeros = vec![0.0; dim];
            let mut dx_dev = 0.0f64;
            let mut dp_dev = 0.0f64;
            for i in 0..n_points {
                let s = i as f64 / (n_points - 1) as f64;
                let dx = s * t_max * hbar / momentum;
                let exact = gas_overlap_analytic(&gas, dx, &zeros)?;
                dx_dev = dx_dev.max((exact - gas_overlap_gaussian(&gas, dx, 0.0)?).abs());

                let dp_mag = s * dp_max * hbar / side;
                let dp = vec![dp_mag / (dim as f64).sqrt(); dim];
                let exact = gas_overlap_analytic(&gas, 0.0, &dp)?;
                dp_dev = dp_dev.max((exact - gas_overlap_gaussian(&gas, 0.0, dp_mag)?).abs());
            }
            Ok(ConvergenceRow { particles: n, dx_deviation: dx_dev, dp_deviation: dp_dev })
        })
        .collect()
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(["N", "dx_deviation", "dp_deviation"]);
    for r in rows {
        t.push(vec![r.particles as f64, r.dx_deviation, r.dp_deviation]);
    }
    t
}

/// Fluctuation of the cell-averaged random-wave intensity for one k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    pub k: f64,
    pub mean_intensity: f64,
    pub std_intensity: f64,
    /// std / mean over the ensemble.
    pub relative_fluctuation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceSpec {
    pub ensemble: usize,
    pub cell: f64,
    pub region_radius: f64,
    pub components: usize,
    pub seed: u64,
}

/// For each k, the ensemble spread of the mean intensity over a square cell
/// centered at the origin, relative to its ensemble mean. Member e of every
/// k uses seed `derive_seed(seed, e)`.
pub fn variance_scaling(ks: &[f64], spec: &VarianceSpec) -> Result<Vec<VarianceRow>> {
    if spec.ensemble < MIN_ENSEMBLE {
        return Err(Error::param(
            "ensemble",
            format!("need at least {MIN_ENSEMBLE} members, got {}", spec.ensemble),
        ));
    }
    if ks.is_empty() {
        return Err(Error::param("k", "need at least one wavenumber"));
    }
    if ks.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::param("k", "wavenumbers must be strictly increasing"));
    }
    if !(spec.cell > 0.0) || spec.cell * std::f64::consts::FRAC_1_SQRT_2 > spec.region_radius {
        return Err(Error::param("cell", "the cell must be positive and fit inside the region"));
    }
    for &k in ks {
        if spec.cell < 2.0 * PI / k {
            return Err(Error::param(
                "cell",
                format!("cell {} is smaller than the wavelength 2π/k = {} at k = {k}", spec.cell, 2.0 * PI / k),
            ));
        }
    }
    ks.iter()
        .map(|&k| {
            let values = (0..spec.ensemble)
                .into_par_iter()
                .map(|e| {
                    let state = random_wave_state(k, spec.components, spec.region_radius, derive_seed(spec.seed, e as u64))?;
                    Ok(state.cell_mean_intensity([0.0, 0.0], spec.cell))
                })
                .collect::<Result<Vec<f64>>>()?;
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(VarianceRow {
                k,
                mean_intensity: mean,
                std_intensity: var.sqrt(),
                relative_fluctuation: var.sqrt() / mean,
            })
        })
        .collect()
}

pub fn variance_table(rows: &[VarianceRow], spec: &VarianceSpec) -> Table {
    let mut t = Table::new(["k", "mean_intensity", "std_intensity", "relative_fluctuation"])
        .meta("ensemble", spec.ensemble)
        .meta("cell", fmt_f64(spec.cell))
        .meta("region_radius", fmt_f64(spec.region_radius))
        .meta("components", spec.components)
        .meta("seed", spec.seed);
    for r in rows {
        t.push(vec![r.k, r.mean_intensity, r.std_intensity, r.relative_fluctuation]);
    }
    t
}

/// Ensemble mean of the normalized two-point function over `seeds`
/// independent random-wave states; member e uses seed `derive_seed(seed, e)`
/// for both the state and its probe points.
pub fn ensemble_autocorrelation(
    k: f64,
    components: usize,
    region_radius: f64,
    separations: &[f64],
    members: usize,
    n_probe: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if members == 0 {
        return Err(Error::param("members", "need at least one ensemble member"));
    }
    let all = (0..members)
        .into_par_iter()
        .map(|e| {
            let s = derive_seed(seed, e as u64);
            let state = random_wave_state(k, components, region_radius, s)?;
            autocorrelation(&state, separations, n_probe, s)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..separations.len())
        .map(|i| all.iter().map(|c| c[i]).sum::<f64>() / members as f64)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trend {
    StrictlyDecreasing,
    NotDecreasing,
    #[serde(rename = "n/a")]
    NotApplicable,
}

/// Whether `values` strictly decrease; "n/a" for fewer than two values.
pub fn trend(values: &[f64]) -> Trend {
    if values.len() < 2 {
        Trend::NotApplicable
    } else if values.windows(2).all(|p| p[1] < p[0]) {
        Trend::StrictlyDecreasing
    } else {
        Trend::NotDecreasing
    }
}
