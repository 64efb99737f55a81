//! Displacement operator and ⟨ψ|D(δp,δx)|ψ⟩ by three independent routes:
//! the direct inner product, the Fourier transform of W and the Wigner
//! autocorrelation (which gives |⟨D⟩|²).
//!
//! Position representation (Weyl ordering):
//! (Dψ)(x) = exp(iδp(x + δx/2)/ħ)·ψ(x + δx), so a packet moves by −δx.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table};
use crate::spectral::{shift_samples, signed_index, FftPair};
use crate::statekit::{WaveFunction1D, BOUNDARY_DENSITY_LIMIT};
use crate::wigner::WignerGrid;

/// Spectral amplitudes below this fraction of the peak count as empty when
/// deciding whether a momentum boost stays on the grid.
const SPECTRAL_FLOOR: f64 = 1e-8;

/// Minimum fraction of Σ|W| that must stay on the grid after a shift.
pub const MIN_COVERAGE: f64 = 0.9999;

/// A phase-space displacement (δx, δp) in d degrees of freedom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    dx: Vec<f64>,
    dp: Vec<f64>,
}

impl Displacement {
    pub fn new(dx: Vec<f64>, dp: Vec<f64>) -> Result<Self> {
        if dx.len() != dp.len() {
            return Err(Error::DimensionMismatch { expected: dx.len(), got: dp.len() });
        }
        if dx.is_empty() {
            return Err(Error::param("displacement", "dimension must be at least 1"));
        }
        if dx.iter().chain(&dp).any(|v| !v.is_finite()) {
            return Err(Error::param("displacement", "components must be finite"));
        }
        Ok(Displacement { dx, dp })
    }

    pub fn one(dx: f64, dp: f64) -> Self {
        Displacement { dx: vec![dx], dp: vec![dp] }
    }

    pub fn zero(dim: usize) -> Self {
        Displacement { dx: vec![0.0; dim.max(1)], dp: vec![0.0; dim.max(1)] }
    }

    pub fn dim(&self) -> usize {
        self.dx.len()
    }

    pub fn dx(&self) -> &[f64] {
        &self.dx
    }

    pub fn dp(&self) -> &[f64] {
        &self.dp
    }

    pub fn dx_norm(&self) -> f64 {
        self.dx.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dp_norm(&self) -> f64 {
        self.dp.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn neg(&self) -> Self {
        self.scaled(-1.0)
    }

    pub fn scaled(&self, t: f64) -> Self {
        Displacement {
            dx: self.dx.iter().map(|v| v * t).collect(),
            dp: self.dp.iter().map(|v| v * t).collect(),
        }
    }

    /// `self + t·step`.
    pub fn along(&self, step: &Displacement, t: f64) -> Result<Self> {
        if step.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: step.dim() });
        }
        Ok(Displacement {
            dx: self.dx.iter().zip(&step.dx).map(|(a, b)| a + t * b).collect(),
            dp: self.dp.iter().zip(&step.dp).map(|(a, b)| a + t * b).collect(),
        })
    }

    fn require_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.dim() });
        }
        Ok(())
    }
}

/// Applies D(δp, δx) with a band-limited shift.
pub fn displace(psi: &WaveFunction1D, d: &Displacement) -> Result<WaveFunction1D> {
    d.require_dim(1)?;
    let (dx, dp) = (d.dx[0], d.dp[0]);
    let grid = *psi.grid();
    let n = grid.len();
    let hbar = psi.hbar();
    let plan = FftPair::new(n);

    check_boost(psi, &plan, dp)?;

    let shifted = if dx == 0.0 {
        psi.amplitudes().to_vec()
    } else {
        let shifted = shift_samples(&plan, psi.amplitudes(), dx / grid.dx());
        // Samples whose source point x + δx lies off the grid were filled by
        // the periodic image and must be empty.
        let wrapped = (0..n)
            .filter(|&i| {
                let src = grid.x(i) + dx;
                src < grid.x_min() || src >= grid.x_max()
            })
            .map(|i| shifted[i].norm_sqr())
            .fold(0.0, f64::max);
        if wrapped >= BOUNDARY_DENSITY_LIMIT {
            return Err(Error::SupportViolation(format!(
                "shift by {dx} pulls |psi|^2 = {wrapped:e} across the grid edge"
            )));
        }
        shifted
    };

    let amplitudes = shifted
        .into_iter()
        .enumerate()
        .map(|(i, a)| a * C64::from_polar(1.0, dp * (grid.x(i) + 0.5 * dx) / hbar))
        .collect();
    let out = WaveFunction1D::from_parts(grid, amplitudes, hbar);
    out.check_boundary_decay()?;
    Ok(out)
}

/// The boosted spectrum must stay inside the grid's momentum band.
fn check_boost(psi: &WaveFunction1D, plan: &FftPair, dp: f64) -> Result<()> {
    if dp == 0.0 {
        return Ok(());
    }
    let grid = psi.grid();
    let n = grid.len();
    let mut spec = psi.amplitudes().to_vec();
    plan.forward(&mut spec);
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let step = grid.dp(psi.hbar());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (j, v) in spec.iter().enumerate() {
        if v.norm() > SPECTRAL_FLOOR * peak {
            let p = signed_index(j, n) as f64 * step;
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    let nyquist = grid.nyquist_momentum(psi.hbar());
    let limit = if dp > 0.0 { nyquist - hi - step } else { nyquist + lo - step };
    if dp.abs() > limit {
        return Err(Error::Nyquist { axis: "dp", value: dp.abs(), limit: limit.max(0.0) });
    }
    Ok(())
}

/// ⟨ψ|D|ψ⟩ = Σ ψ*(Dψ) Δx.
pub fn overlap_direct(psi: &WaveFunction1D, d: &Displacement) -> Result<C64> {
    let moved = displace(psi, d)?;
    psi.inner(&moved)
}

/// Σᵢⱼ exp(i(δp xᵢ + δx pⱼ)/ħ) W(xᵢ,pⱼ) Δx Δp.
pub fn overlap_from_wigner(w: &WignerGrid, d: &Displacement) -> Result<C64> {
    d.require_dim(1)?;
    let (dx, dp) = (d.dx[0], d.dp[0]);
    let hbar = w.hbar();
    let dp_limit = PI * hbar / w.dx();
    if dp.abs() > dp_limit {
        return Err(Error::Nyquist { axis: "dp", value: dp.abs(), limit: dp_limit });
    }
    let dx_limit = PI * hbar / w.dp();
    if dx.abs() > dx_limit {
        return Err(Error::Nyquist { axis: "dx", value: dx.abs(), limit: dx_limit });
    }
    let p_phase: Vec<C64> = w.p_points().iter().map(|p| C64::from_polar(1.0, dx * p / hbar)).collect();
    let total: C64 = w
        .values()
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let inner: C64 = row.iter().zip(&p_phase).map(|(v, e)| e * v).sum();
            inner * C64::from_polar(1.0, dp * w.x(i) / hbar)
        })
        .sum();
    Ok(total * w.dx() * w.dp())
}

/// (2πħ) Σ W(xᵢ,pⱼ)W(xᵢ+δx,pⱼ+δp) Δx Δp, the second factor evaluated by a
/// band-limited shift. Equals |⟨D⟩|² for pure states.
pub fn overlap_sq_autocorr(w: &WignerGrid, d: &Displacement) -> Result<f64> {
    d.require_dim(1)?;
    let (dx, dp) = (d.dx[0], d.dp[0]);
    let coverage = shifted_coverage(w, dx, dp);
    if coverage < MIN_COVERAGE {
        return Err(Error::Coverage { coverage });
    }
    let (nx, np) = (w.n_x(), w.n_p());
    let power = wigner_power(w);
    let (u, v) = (dx / w.dx(), dp / w.dp());
    // Σ_r W(r)W(r + d) = (1/N) Σ_k |Ŵ(k)|² e^{2πi k·d/n}
    let col_phase: Vec<C64> = (0..np)
        .map(|b| C64::from_polar(1.0, 2.0 * PI * signed_index(b, np) as f64 * v / np as f64))
        .collect();
    let total: f64 = (0..nx)
        .map(|a| {
            let row_phase = C64::from_polar(1.0, 2.0 * PI * signed_index(a, nx) as f64 * u / nx as f64);
            let row: C64 = power[a * np..(a + 1) * np].iter().zip(&col_phase).map(|(p, e)| e * p).sum();
            (row * row_phase).re
        })
        .sum();
    Ok(2.0 * PI * w.hbar() * total / (nx * np) as f64 * w.dx() * w.dp())
}

fn wigner_power(w: &WignerGrid) -> Vec<f64> {
    let (nx, np) = (w.n_x(), w.n_p());
    let mut buf: Vec<C64> = w.values().iter().map(|&v| C64::new(v, 0.0)).collect();
    let row_plan = FftPair::new(np);
    buf.par_chunks_mut(np).for_each(|row| row_plan.forward(row));
    let col_plan = FftPair::new(nx);
    let mut cols: Vec<Vec<C64>> = (0..np)
        .into_par_iter()
        .map(|b| {
            let mut col: Vec<C64> = (0..nx).map(|a| buf[a * np + b]).collect();
            col_plan.forward(&mut col);
            col
        })
        .collect();
    let mut power = vec![0.0; nx * np];
    for (b, col) in cols.iter_mut().enumerate() {
        for (a, v) in col.iter().enumerate() {
            power[a * np + b] = v.norm_sqr();
        }
    }
    power
}

/// Fraction of Σ|W| at points whose shifted partner is still on the grid.
fn shifted_coverage(w: &WignerGrid, dx: f64, dp: f64) -> f64 {
    let x_min = w.x_axis().x_min();
    let x_max = w.x_axis().x_max();
    let p_min = w.p(0);
    let p_max = w.p(w.n_p() - 1) + w.dp();
    let (mut inside, mut total) = (0.0, 0.0);
    for ((i, j), v) in w.values().indexed_iter() {
        let m = v.abs();
        total += m;
        let (x, p) = (w.x(i) + dx, w.p(j) + dp);
        if x >= x_min && x < x_max && p >= p_min && p < p_max {
            inside += m;
        }
    }
    if total == 0.0 {
        1.0
    } else {
        inside / total
    }
}

/// Which computation produced an overlap value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Direct,
    WignerFt,
    Autocorr,
    Analytic,
    MonteCarlo,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::WignerFt => "wigner-ft",
            Route::Autocorr => "autocorr",
            Route::Analytic => "analytic",
            Route::MonteCarlo => "monte-carlo",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "direct" => Route::Direct,
            "wigner-ft" => Route::WignerFt,
            "autocorr" => Route::Autocorr,
            "analytic" => Route::Analytic,
            "monte-carlo" => Route::MonteCarlo,
            other => return Err(Error::Format(format!("unknown route `{other}`"))),
        })
    }
}

/// Anything that can evaluate ⟨D⟩ at a displacement.
pub trait OverlapSource: Sync {
    fn overlap(&self, d: &Displacement) -> Result<C64>;
    fn route(&self) -> Route;
    fn hbar(&self) -> f64;
    fn describe(&self) -> String;
}

pub struct Direct<'a>(pub &'a WaveFunction1D);

impl OverlapSource for Direct<'_> {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        overlap_direct(self.0, d)
    }
    fn route(&self) -> Route {
        Route::Direct
    }
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }
    fn describe(&self) -> String {
        format!("wavefunction on {} points", self.0.grid().len())
    }
}

pub struct WignerFt<'a>(pub &'a WignerGrid);

impl OverlapSource for WignerFt<'_> {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        overlap_from_wigner(self.0, d)
    }
    fn route(&self) -> Route {
        Route::WignerFt
    }
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }
    fn describe(&self) -> String {
        format!("wigner grid {}x{}", self.0.n_x(), self.0.n_p())
    }
}

/// Reports √(autocorrelation) as a real value; it carries |⟨D⟩| only.
pub struct Autocorr<'a>(pub &'a WignerGrid);

impl OverlapSource for Autocorr<'_> {
    fn overlap(&self, d: &Displacement) -> Result<C64> {
        Ok(C64::new(overlap_sq_autocorr(self.0, d)?.max(0.0).sqrt(), 0.0))
    }
    fn route(&self) -> Route {
        Route::Autocorr
    }
    fn hbar(&self) -> f64 {
        self.0.hbar()
    }
    fn describe(&self) -> String {
        format!("wigner grid {}x{}", self.0.n_x(), self.0.n_p())
    }
}

/// Momentum and length scales used to make ray parameters dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub p: f64,
    pub l: f64,
}

/// ⟨D⟩ sampled along `origin + t·step`.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapSeries {
    pub route: Route,
    pub source: String,
    pub hbar: f64,
    pub scales: Option<Scales>,
    pub origin: Displacement,
    /// Physical displacement per unit t.
    pub step: Displacement,
    pub t: Vec<f64>,
    pub values: Vec<C64>,
}

/// Physical displacement per unit t for a direction given in the same
/// units as the displacement. The direction is normalized to unit length;
/// with scales, its dx part is measured in ħ/P and its dp part in ħ/L.
pub fn ray_step(direction: &Displacement, hbar: f64, scales: Option<Scales>) -> Result<Displacement> {
    let norm = (direction.dx_norm().powi(2) + direction.dp_norm().powi(2)).sqrt();
    if !(norm > 0.0) {
        return Err(Error::param("direction", "must be nonzero"));
    }
    let unit = direction.scaled(1.0 / norm);
    Ok(match scales {
        None => unit,
        Some(s) => Displacement {
            dx: unit.dx.iter().map(|v| v * hbar / s.p).collect(),
            dp: unit.dp.iter().map(|v| v * hbar / s.l).collect(),
        },
    })
}

/// Samples `source` at t_i = i·t_max/(n−1), i = 0..n, starting at zero
/// displacement.
pub fn overlap_ray(
    source: &dyn OverlapSource,
    direction: &Displacement,
    t_max: f64,
    n: usize,
    scales: Option<Scales>,
) -> Result<OverlapSeries> {
    if n < 16 {
        return Err(Error::param("n", format!("need at least 16 points, got {n}")));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", format!("must be positive, got {t_max}")));
    }
    if let Some(s) = scales {
        if !(s.p > 0.0 && s.l > 0.0) {
            return Err(Error::param("scales", "P and L must be positive"));
        }
    }
    let step = ray_step(direction, source.hbar(), scales)?;
    let origin = Displacement::zero(step.dim());
    let t: Vec<f64> = (0..n).map(|i| i as f64 * t_max / (n - 1) as f64).collect();
    let values = t
        .par_iter()
        .map(|&ti| source.overlap(&origin.along(&step, ti)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(OverlapSeries {
        route: source.route(),
        source: source.describe(),
        hbar: source.hbar(),
        scales,
        origin,
        step,
        t,
        values,
    })
}

impl OverlapSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "re", "im", "abs"])
            .meta("route", self.route.as_str())
            .meta("source", &self.source)
            .meta("hbar", fmt_f64(self.hbar));
        if let Some(s) = self.scales {
            t = t.meta("P", fmt_f64(s.p)).meta("L", fmt_f64(s.l));
        }
        t = t
            .meta("origin_dx", join(&self.origin.dx))
            .meta("origin_dp", join(&self.origin.dp))
            .meta("step_dx", join(&self.step.dx))
            .meta("step_dp", join(&self.step.dp));
        for (ti, v) in self.t.iter().zip(&self.values) {
            t.push(vec![*ti, v.re, v.im, v.norm()]);
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    pub fn from_table(table: &Table) -> Result<Self> {
        let col = |name: &str| {
            table
                .column(name)
                .ok_or_else(|| Error::Format(format!("overlap series lacks column `{name}`")))
        };
        let (t, re, im) = (col("t")?, col("re")?, col("im")?);
        let meta = |key: &str| table.metadata_value(key);
        let number = |key: &str| -> Result<Option<f64>> {
            meta(key)
                .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad `{key}` value `{v}`"))))
                .transpose()
        };
        let scales = match (number("P")?, number("L")?) {
            (Some(p), Some(l)) => Some(Scales { p, l }),
            _ => None,
        };
        let vector = |key: &str| -> Result<Vec<f64>> {
            match meta(key) {
                None => Ok(vec![0.0]),
                Some(v) => split(v),
            }
        };
        Ok(OverlapSeries {
            route: meta("route").map(Route::parse).transpose()?.unwrap_or(Route::Direct),
            source: meta("source").unwrap_or("").to_string(),
            hbar: number("hbar")?.unwrap_or(1.0),
            scales,
            origin: Displacement::new(vector("origin_dx")?, vector("origin_dp")?)?,
            step: Displacement::new(vector("step_dx")?, vector("step_dp")?)?,
            t,
            values: re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect(),
        })
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Out<'a> {
            route: &'static str,
            source: &'a str,
            hbar: f64,
            #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
            p: Option<f64>,
            #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
            l: Option<f64>,
            origin: &'a Displacement,
            step: &'a Displacement,
            t: &'a [f64],
            re: Vec<f64>,
            im: Vec<f64>,
            abs: Vec<f64>,
        }
        let out = Out {
            route: self.route.as_str(),
            source: &self.source,
            hbar: self.hbar,
            p: self.scales.map(|s| s.p),
            l: self.scales.map(|s| s.l),
            origin: &self.origin,
            step: &self.step,
            t: &self.t,
            re: self.re(),
            im: self.values.iter().map(|v| v.im).collect(),
            abs: self.abs(),
        };
        crate::io::to_json(&out)
    }
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(";")
}

fn split(s: &str) -> Result<Vec<f64>> {
    s.split(';')
        .map(|v| v.parse::<f64>().map_err(|_| Error::Format(format!("bad vector entry `{v}`"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statekit::{cat_state, gaussian_packet, Grid1D};
    use crate::wigner::wigner_transform;

    fn grid() -> Grid1D {
        Grid1D::symmetric(24.0, 512).unwrap()
    }

    /// ∫|ψ|² e^{iδp x} + boost terms for a Gaussian packet, Weyl ordering.
    fn gaussian_oracle(x0: f64, p0: f64, sigma: f64, hbar: f64, dx: f64, dp: f64) -> C64 {
        let modulus = (-dx * dx / (8.0 * sigma * sigma) - sigma * sigma * dp * dp / (2.0 * hbar * hbar)).exp();
        C64::from_polar(modulus, (dp * x0 + dx * p0) / hbar)
    }

    /// Even cat with packets at ±s/2, σ = ħ = 1, pure momentum kick.
    fn cat_oracle(s: f64, dp: f64) -> f64 {
        let overlap = (-s * s / 8.0).exp();
        (-dp * dp / 2.0).exp() * ((0.5 * s * dp).cos() + overlap) / (1.0 + overlap)
    }

    #[test]
    fn identity_and_inverse() {
        let psi = gaussian_packet(grid(), 1.0, 0.5, 1.0, 1.0).unwrap();
        let same = displace(&psi, &Displacement::one(0.0, 0.0)).unwrap();
        for (a, b) in same.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
        let there = displace(&psi, &Displacement::one(2.3, 0.0)).unwrap();
        let back = displace(&there, &Displacement::one(-2.3, 0.0)).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-10);
        }
        assert!((there.norm_sq() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn positive_shift_moves_packet_left() {
        let psi = gaussian_packet(grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let moved = displace(&psi, &Displacement::one(2.0, 0.0)).unwrap();
        assert!((moved.position_mean() + 2.0).abs() < 1e-8);
        let kicked = displace(&psi, &Displacement::one(0.0, 1.5)).unwrap();
        assert!((kicked.momentum_mean() - 1.5).abs() < 1e-8);
    }

    #[test]
    fn weyl_phase_composition() {
        let psi = gaussian_packet(grid(), 0.5, -0.3, 1.2, 0.7).unwrap();
        let (dx, dp) = (1.7, 0.9);
        let two_step = displace(&displace(&psi, &Displacement::one(dx, 0.0)).unwrap(), &Displacement::one(0.0, dp)).unwrap();
        let joint = displace(&psi, &Displacement::one(dx, dp)).unwrap();
        let phase = C64::from_polar(1.0, -dp * dx / (2.0 * 0.7));
        for (a, b) in two_step.amplitudes().iter().zip(joint.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-10);
        }
    }

    #[test]
    fn direct_route_against_gaussian_oracle() {
        let (x0, p0, sigma, hbar) = (1.0, -0.5, 1.0, 1.0);
        let psi = gaussian_packet(grid(), x0, p0, sigma, hbar).unwrap();
        let d = Displacement::one(2.0, 0.0);
        assert!((overlap_direct(&psi, &d).unwrap().norm() - (-0.5f64).exp()).abs() < 1e-6);
        for (dx, dp) in [(0.0, 0.0), (2.0, 0.0), (0.0, 1.3), (-1.4, 0.8), (3.0, -2.0)] {
            let got = overlap_direct(&psi, &Displacement::one(dx, dp)).unwrap();
            let want = gaussian_oracle(x0, p0, sigma, hbar, dx, dp);
            assert!((got - want).norm() < 1e-6, "({dx},{dp}): {got} vs {want}");
        }
        assert!((overlap_direct(&psi, &Displacement::zero(1)).unwrap() - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hermiticity() {
        let psi = cat_state(grid(), 8.0, 1.0, 1.0).unwrap();
        for (dx, dp) in [(1.0, 0.4), (-2.5, 1.1), (0.3, -0.7)] {
            let d = Displacement::one(dx, dp);
            let plus = overlap_direct(&psi, &d).unwrap();
            let minus = overlap_direct(&psi, &d.neg()).unwrap();
            assert!((plus - minus.conj()).norm() < 1e-10);
        }
    }

    #[test]
    fn cat_routes_match_closed_form() {
        let psi = cat_state(grid(), 8.0, 1.0, 1.0).unwrap();
        let w = wigner_transform(&psi).unwrap();
        for dp in [0.0, 0.2, 0.39, 0.8, 1.7] {
            let d = Displacement::one(0.0, dp);
            let want = cat_oracle(8.0, dp);
            assert!((overlap_direct(&psi, &d).unwrap() - want).norm() < 1e-6);
            assert!((overlap_from_wigner(&w, &d).unwrap() - want).norm() < 1e-6);
            assert!((overlap_sq_autocorr(&w, &d).unwrap() - want * want).abs() < 1e-6);
        }
    }

    #[test]
    fn routes_agree_on_gaussian_and_cat() {
        let states = [
            gaussian_packet(grid(), 0.0, 0.0, 1.0, 1.0).unwrap(),
            cat_state(grid(), 8.0, 1.0, 1.0).unwrap(),
        ];
        for psi in &states {
            let w = wigner_transform(psi).unwrap();
            assert!((overlap_from_wigner(&w, &Displacement::zero(1)).unwrap() - 1.0).norm() < 1e-6);
            assert!((overlap_sq_autocorr(&w, &Displacement::zero(1)).unwrap() - 1.0).abs() < 1e-5);
            for i in 0..21 {
                let t = i as f64 * 0.5;
                for d in [Displacement::one(t, 0.0), Displacement::one(0.0, 0.1 * t), Displacement::one(0.3 * t, 0.07 * t)] {
                    let direct = overlap_direct(psi, &d).unwrap();
                    let ft = overlap_from_wigner(&w, &d).unwrap();
                    let sq = overlap_sq_autocorr(&w, &d).unwrap();
                    assert!((direct - ft).norm() < 1e-6, "{d:?}");
                    assert!((direct.norm_sqr() - sq).abs() < 1e-5, "{d:?}");
                    assert!(sq >= -1e-9);
                    assert!((overlap_sq_autocorr(&w, &d.neg()).unwrap() - sq).abs() < 1e-10);
                    assert!(direct.norm() <= 1.0 + 1e-9);
                }
            }
        }
    }

    #[test]
    fn cat_first_zero_along_momentum() {
        let psi = cat_state(grid(), 8.0, 1.0, 1.0).unwrap();
        let w = wigner_transform(&psi).unwrap();
        let series = overlap_ray(&WignerFt(&w), &Displacement::one(0.0, 1.0), 1.0, 401, None).unwrap();
        let re = series.re();
        let k = re.windows(2).position(|p| p[0] > 0.0 && p[1] <= 0.0).unwrap();
        let (t0, t1) = (series.t[k], series.t[k + 1]);
        let zero = t0 + (t1 - t0) * re[k] / (re[k] - re[k + 1]);
        assert!((zero / (PI / 8.0) - 1.0).abs() < 0.05, "{zero}");
    }

    #[test]
    fn ray_contracts() {
        let gauss = gaussian_packet(grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let series = overlap_ray(&Direct(&gauss), &Displacement::one(1.0, 0.0), 10.0, 64, None).unwrap();
        assert!((series.values[0] - 1.0).norm() < 1e-9);
        let abs = series.abs();
        assert!(abs.windows(2).all(|p| p[1] < p[0]));

        let cat = cat_state(grid(), 8.0, 1.0, 1.0).unwrap();
        let changes = |t_max: f64| {
            let s = overlap_ray(&Direct(&cat), &Displacement::one(0.0, 1.0), t_max, 128, None).unwrap();
            s.re().windows(2).filter(|p| p[0] * p[1] < 0.0).count()
        };
        // Re⟨D⟩ ∝ cos(sδp/2) + e^{-s²/8σ²} crosses zero just before
        // 3πħ/s and just after 5πħ/s.
        assert_eq!(changes(3.0 * PI / 8.0), 2);
        assert_eq!(changes(5.0 * PI / 8.0), 2);
        assert!(changes(6.0 * PI / 8.0) >= 3);

        assert!(overlap_ray(&Direct(&gauss), &Displacement::one(1.0, 0.0), 1.0, 15, None).is_err());
        assert!(overlap_ray(&Direct(&gauss), &Displacement::one(0.0, 0.0), 1.0, 16, None).is_err());
    }

    #[test]
    fn scaled_rays_measure_t_in_natural_units() {
        let step = ray_step(&Displacement::one(3.0, 4.0), 2.0, Some(Scales { p: 4.0, l: 0.5 })).unwrap();
        assert!((step.dx()[0] - 0.6 * 2.0 / 4.0).abs() < 1e-15);
        assert!((step.dp()[0] - 0.8 * 2.0 / 0.5).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_displacements_fail() {
        let psi = gaussian_packet(grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let w = wigner_transform(&psi).unwrap();
        let nyq = PI / grid().dx();
        assert!(matches!(overlap_from_wigner(&w, &Displacement::one(0.0, nyq * 1.01)), Err(Error::Nyquist { axis: "dp", .. })));
        assert!(matches!(overlap_from_wigner(&w, &Displacement::one(24.5, 0.0)), Err(Error::Nyquist { axis: "dx", .. })));
        assert!(matches!(displace(&psi, &Displacement::one(0.0, nyq)), Err(Error::Nyquist { .. })));
        assert!(matches!(displace(&psi, &Displacement::one(20.0, 0.0)), Err(Error::SupportViolation(_))));
        assert!(matches!(overlap_sq_autocorr(&w, &Displacement::one(22.0, 0.0)), Err(Error::Coverage { .. })));
        let two_d = Displacement::new(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(overlap_direct(&psi, &two_d), Err(Error::DimensionMismatch { .. })));
        assert!(Displacement::new(vec![1.0], vec![]).is_err());
    }

    #[test]
    fn translation_covariance_of_wigner() {
        let psi = gaussian_packet(grid(), 0.0, 0.7, 1.0, 1.0).unwrap();
        let w = wigner_transform(&psi).unwrap();
        for shift in [3.0, 1.37] {
            let moved = wigner_transform(&displace(&psi, &Displacement::one(shift, 0.0)).unwrap()).unwrap();
            let mut worst = 0.0f64;
            for i in 0..w.n_x() {
                for j in 0..w.n_p() {
                    let (x, p) = (w.x(i) + shift, w.p(j) - 0.7);
                    let exact = (-x * x / 2.0 - 2.0 * p * p).exp() / PI;
                    worst = worst.max((moved.values()[[i, j]] - exact).abs());
                }
            }
            assert!(worst < 1e-6, "{worst}");
        }
        // Whole-sample shifts are index shifts.
        let moved = wigner_transform(&displace(&psi, &Displacement::one(3.0, 0.0)).unwrap()).unwrap();
        let k = (3.0 / grid().dx()).round() as usize;
        for i in 0..w.n_x() - k {
            for j in 0..w.n_p() {
                assert!((moved.values()[[i, j]] - w.values()[[i + k, j]]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn series_round_trips() {
        let psi = gaussian_packet(grid(), 0.0, 0.0, 1.0, 1.0).unwrap();
        let series = overlap_ray(&Direct(&psi), &Displacement::one(1.0, 1.0), 2.0, 16, Some(Scales { p: 2.0, l: 3.0 })).unwrap();
        let csv = series.to_csv();
        let back = OverlapSeries::from_table(&Table::parse_csv(&csv).unwrap()).unwrap();
        assert_eq!(back.to_csv(), csv);
        assert_eq!(back.scales, series.scales);
        assert_eq!(back.step, series.step);
        let json: serde_json::Value = serde_json::from_str(&series.to_json()).unwrap();
        assert_eq!(json["route"], "direct");
        assert_eq!(json["t"].as_array().unwrap().len(), 16);
    }
}
