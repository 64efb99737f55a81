//! FFT plumbing shared by the grid-based modules: band-limited shifts,
//! two-fold spectral upsampling and momentum-band checks.
//!
//! Index conventions follow the usual DFT ordering: bin `j` carries the
//! signed frequency `j` for `j < n/2`, `j - n` above, and `n/2` is the
//! Nyquist bin, which is always treated as the symmetric average of
//! `+n/2` and `-n/2`.

use num_complex::Complex64 as C64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Forward and inverse plans of one length. Inverse is unnormalized.
pub struct FftPair {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Inverse transform including the 1/n factor.
    pub fn inverse_normalized(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let scale = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn inverse_unnormalized(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
    }
}

/// Signed frequency index of DFT bin `j` (Nyquist reported as `-n/2`).
pub fn signed_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Multiplies a spectrum in place so that its inverse is the input sampled
/// at `i + shift` (in samples), i.e. `out[i] = f(i + shift)`.
pub fn apply_shift_phase(spectrum: &mut [C64], shift: f64) {
    let n = spectrum.len();
    for (j, v) in spectrum.iter_mut().enumerate() {
        if n % 2 == 0 && j == n / 2 {
            *v *= (PI * shift).cos();
        } else {
            let theta = 2.0 * PI * signed_index(j, n) as f64 * shift / n as f64;
            *v *= C64::from_polar(1.0, theta);
        }
    }
}

/// Periodic band-limited evaluation of `values` at `i + shift` for every `i`.
pub fn shift_samples(plan: &FftPair, values: &[C64], shift: f64) -> Vec<C64> {
    let mut buf = values.to_vec();
    plan.forward(&mut buf);
    apply_shift_phase(&mut buf, shift);
    plan.inverse_normalized(&mut buf);
    buf
}

/// Band-limited interpolation onto a grid with half the spacing. Output
/// sample `2i` reproduces input sample `i`.
pub fn upsample2(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut spec = values.to_vec();
    FftPair::new(n).forward(&mut spec);
    let m = 2 * n;
    let mut padded = vec![C64::new(0.0, 0.0); m];
    for j in 0..n / 2 {
        padded[j] = spec[j];
    }
    for j in n / 2 + 1..n {
        padded[j + n] = spec[j];
    }
    let nyq = spec[n / 2] * 0.5;
    padded[n / 2] = nyq;
    padded[m - n / 2] = nyq;
    let plan = FftPair::new(m);
    plan.inverse_unnormalized(&mut padded);
    let scale = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= scale);
    padded
}

/// Largest spectral amplitude at or beyond `fraction` of the Nyquist
/// frequency, relative to the peak amplitude.
pub fn outer_band_amplitude(values: &[C64], fraction: f64) -> f64 {
    let n = values.len();
    let mut spec = values.to_vec();
    FftPair::new(n).forward(&mut spec);
    let peak = spec.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let cutoff = fraction * (n / 2) as f64;
    spec.iter()
        .enumerate()
        .filter(|(j, _)| signed_index(*j, n).unsigned_abs() as f64 >= cutoff)
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max)
        / peak
}

/// Rejects states whose momentum content reaches `fraction` of the Nyquist
/// band above `tolerance` (relative amplitude).
pub fn check_band_limit(values: &[C64], fraction: f64, tolerance: f64) -> Result<()> {
    let amplitude = outer_band_amplitude(values, fraction);
    if amplitude > tolerance {
        return Err(Error::MomentumAliasing { fraction, amplitude });
    }
    Ok(())
}
