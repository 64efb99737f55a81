//! Grid-based Wigner functions of one-dimensional pure states.
//!
//! For each x-row the two-point product ψ*(x+s/2)ψ(x−s/2) is formed on the
//! separation lattice s = jΔx. Half-grid values of ψ come from two-fold
//! band-limited upsampling. The product is folded modulo n and transformed,
//! which gives W exactly at p_k = kΔp, Δp = 2πħ/(nΔx), k ∈ [−n/2, n/2).

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::io::{fmt_f64, Table};
use crate::spectral::{check_band_limit, upsample2, FftPair};
use crate::statekit::{Grid1D, WaveFunction1D};

/// States must carry no momentum content beyond this fraction of the grid's
/// Nyquist momentum; W(x,p) has twice the x-bandwidth of ψ.
pub const BAND_FRACTION: f64 = 0.5;
pub const BAND_TOLERANCE: f64 = 1e-8;

pub const BINARY_MAGIC: &[u8; 4] = b"WGR1";
pub const BINARY_HEADER_LEN: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    x_axis: Grid1D,
    hbar: f64,
    /// `values[[i, j]] = W(x_i, p_j)`
    values: Array2<f64>,
    imag_residue: f64,
}

impl WignerGrid {
    pub fn x_axis(&self) -> &Grid1D {
        &self.x_axis
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn n_x(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_p(&self) -> usize {
        self.values.ncols()
    }

    pub fn dx(&self) -> f64 {
        self.x_axis.dx()
    }

    pub fn dp(&self) -> f64 {
        self.x_axis.dp(self.hbar)
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_axis.x(i)
    }

    pub fn p(&self, j: usize) -> f64 {
        (j as f64 - (self.n_p() / 2) as f64) * self.dp()
    }

    pub fn p_points(&self) -> Vec<f64> {
        (0..self.n_p()).map(|j| self.p(j)).collect()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Largest |Im W| relative to the largest |Re W| before truncation.
    pub fn imag_residue(&self) -> f64 {
        self.imag_residue
    }

    /// Σ W ΔxΔp.
    pub fn normalization(&self) -> f64 {
        self.values.sum() * self.dx() * self.dp()
    }

    /// (2πħ) Σ W² ΔxΔp.
    pub fn purity(&self) -> f64 {
        2.0 * PI * self.hbar * self.values.iter().map(|w| w * w).sum::<f64>() * self.dx() * self.dp()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Rows `x, p, W` in x-major order.
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["x", "p", "W"])
            .meta("hbar", fmt_f64(self.hbar))
            .meta("n_x", self.n_x())
            .meta("n_p", self.n_p())
            .meta("x_min", fmt_f64(self.x_axis.x_min()))
            .meta("x_max", fmt_f64(self.x_axis.x_max()));
        t.rows.reserve(self.n_x() * self.n_p());
        let ps = self.p_points();
        for i in 0..self.n_x() {
            let x = self.x(i);
            for (j, p) in ps.iter().enumerate() {
                t.rows.push(vec![x, *p, self.values[[i, j]]]);
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        self.to_table().to_csv()
    }

    /// 32-byte header (`WGR1`, 4 zero bytes, n_x and n_p as u64, ħ as f64,
    /// all little-endian) followed by row-major f64 values.
    pub fn to_binary(&self) -> Vec<u8> {
        WignerMatrix {
            n_x: self.n_x(),
            n_p: self.n_p(),
            hbar: self.hbar,
            values: self.values.iter().copied().collect(),
        }
        .to_bytes()
    }
}

/// Contents of the binary Wigner file. Axis positions are not part of the
/// format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerMatrix {
    pub n_x: usize,
    pub n_p: usize,
    pub hbar: f64,
    pub values: Vec<f64>,
}

impl WignerMatrix {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.extend_from_slice(&[0u8; 4]);
        out.extend_from_slice(&(self.n_x as u64).to_le_bytes());
        out.extend_from_slice(&(self.n_p as u64).to_le_bytes());
        out.extend_from_slice(&self.hbar.to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < BINARY_HEADER_LEN || &bytes[..4] != BINARY_MAGIC {
            return Err(Error::Format("not a WGR1 Wigner file".into()));
        }
        let word = |at: usize| -> [u8; 8] { bytes[at..at + 8].try_into().expect("8-byte slice") };
        let n_x = u64::from_le_bytes(word(8)) as usize;
        let n_p = u64::from_le_bytes(word(16)) as usize;
        let hbar = f64::from_le_bytes(word(24));
        let expected = n_x
            .checked_mul(n_p)
            .and_then(|c| c.checked_mul(8))
            .ok_or_else(|| Error::Format("header dimensions overflow".into()))?;
        if bytes.len() - BINARY_HEADER_LEN != expected {
            return Err(Error::Format(format!(
                "payload is {} bytes, header promises {expected}",
                bytes.len() - BINARY_HEADER_LEN
            )));
        }
        let values = bytes[BINARY_HEADER_LEN..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(WignerMatrix { n_x, n_p, hbar, values })
    }
}

/// Wigner function of a normalized pure state.
pub fn wigner_transform(psi: &WaveFunction1D) -> Result<WignerGrid> {
    let norm = psi.norm_sq();
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::param("psi", format!("must be normalized, norm is {norm}")));
    }
    psi.check_boundary_decay()?;
    check_band_limit(psi.amplitudes(), BAND_FRACTION, BAND_TOLERANCE)?;

    let grid = *psi.grid();
    let n = grid.len();
    let hbar = psi.hbar();
    let fine = upsample2(psi.amplitudes());
    let plan = FftPair::new(n);
    let prefactor = grid.dx() / (2.0 * PI * hbar);
    let half = n / 2;

    let rows: Vec<(Vec<f64>, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut folded = vec![C64::new(0.0, 0.0); n];
            let centre = 2 * i as i64;
            let two_n = 2 * n as i64;
            let reach = centre.min(two_n - 1 - centre);
            for j in -reach..=reach {
                let a = (centre + j) as usize;
                let b = (centre - j) as usize;
                folded[j.rem_euclid(n as i64) as usize] += fine[a].conj() * fine[b];
            }
            plan.inverse_unnormalized(&mut folded);
            let mut row = vec![0.0; n];
            let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
            for (jo, out) in row.iter_mut().enumerate() {
                let v = folded[(jo + half) % n] * prefactor;
                *out = v.re;
                max_re = max_re.max(v.re.abs());
                max_im = max_im.max(v.im.abs());
            }
            (row, max_re, max_im)
        })
        .collect();

    let mut values = Array2::zeros((n, n));
    let (mut max_re, mut max_im) = (0.0f64, 0.0f64);
    for (i, (row, re, im)) in rows.into_iter().enumerate() {
        max_re = max_re.max(re);
        max_im = max_im.max(im);
        values.row_mut(i).iter_mut().zip(row).for_each(|(d, s)| *d = s);
    }
    let imag_residue = if max_re > 0.0 { max_im / max_re } else { 0.0 };
    if imag_residue > 1e-10 {
        return Err(Error::Domain(format!("Wigner transform left an imaginary residue of {imag_residue:e}")));
    }
    Ok(WignerGrid { x_axis: grid, hbar, values, imag_residue })
}

/// Position density Σⱼ W(xᵢ,pⱼ)Δp.
pub fn marginal_x(w: &WignerGrid) -> Vec<f64> {
    let dp = w.dp();
    w.values.rows().into_iter().map(|r| r.sum() * dp).collect()
}

/// Momentum density Σᵢ W(xᵢ,pⱼ)Δx.
pub fn marginal_p(w: &WignerGrid) -> Vec<f64> {
    let dx = w.dx();
    w.values.columns().into_iter().map(|c| c.sum() * dx).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    P,
}

/// Closed phase-space rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: (f64, f64),
    pub p: (f64, f64),
}

/// Dominant oscillation period of W along `axis` inside `window`, from the
/// peak of the mean power spectrum of the windowed slices.
pub fn fringe_wavelength(w: &WignerGrid, axis: Axis, window: Window) -> Result<f64> {
    let xs: Vec<usize> = (0..w.n_x()).filter(|&i| in_range(w.x(i), window.x)).collect();
    let ps: Vec<usize> = (0..w.n_p()).filter(|&j| in_range(w.p(j), window.p)).collect();
    if xs.is_empty() || ps.is_empty() {
        return Err(Error::param("window", "contains no grid points"));
    }
    let (across, along, step) = match axis {
        Axis::P => (&xs, &ps, w.dp()),
        Axis::X => (&ps, &xs, w.dx()),
    };
    let slice = |c: usize| -> Vec<f64> {
        along
            .iter()
            .map(|&a| match axis {
                Axis::P => w.values[[c, a]],
                Axis::X => w.values[[a, c]],
            })
            .collect()
    };
    let central = slice(across[across.len() / 2]);
    let sign_changes = central.windows(2).filter(|p| p[0] * p[1] < 0.0).count();
    if sign_changes < 4 {
        return Err(Error::NoFringes { sign_changes });
    }

    let len = along.len();
    let nfft = (64 * len).next_power_of_two().max(8192);
    let plan = FftPair::new(nfft);
    let mut power = vec![0.0; nfft / 2 + 1];
    for &c in across.iter() {
        let s = slice(c);
        let mean = s.iter().sum::<f64>() / len as f64;
        let mut buf = vec![C64::new(0.0, 0.0); nfft];
        for (b, v) in buf.iter_mut().zip(&s) {
            *b = C64::new(v - mean, 0.0);
        }
        plan.forward(&mut buf);
        for (p, b) in power.iter_mut().zip(&buf) {
            *p += b.norm_sqr();
        }
    }
    let peak = (1..power.len())
        .max_by(|&a, &b| power[a].total_cmp(&power[b]))
        .expect("non-empty spectrum");
    let offset = if peak + 1 < power.len() {
        let (l, c, r) = (power[peak - 1], power[peak], power[peak + 1]);
        let denom = l - 2.0 * c + r;
        if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 }
    } else {
        0.0
    };
    let freq = (peak as f64 + offset) / (nfft as f64 * step);
    Ok(1.0 / freq)
}

fn in_range(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo.min(hi) && v <= lo.max(hi)
}
