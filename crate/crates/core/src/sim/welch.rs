//! Welch spectral estimation with the crate's single-sided angular-frequency
//! PSD convention: a real white series with per-sample variance S/(2 dt) has
//! single-sided PSD S, flat over [0, pi/dt).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Error;
use crate::Result;

/// Segment window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    Rect,
}

impl Window {
    fn values(self, n: usize) -> Vec<f64> {
        match self {
            Window::Rect => vec![1.0; n],
            Window::Hann => (0..n)
                .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos()))
                .collect(),
        }
    }
}

/// Single-sided PSD on an angular frequency grid.
#[derive(Debug, Clone)]
pub struct Psd {
    /// Omega_k = 2 pi k / (segment_len dt), rad/s.
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

/// One-sided Welch estimate with 50% overlap.
///
/// `segment_len` must not exceed a quarter of the series so that at least a
/// handful of segments are averaged. Normalization: a unit-PSD white input
/// yields a flat estimate of 1 within segment statistics.
pub fn welch_psd(series: &[f64], segment_len: usize, window: Window, dt: f64) -> Result<Psd> {
    if segment_len < 8 {
        return Err(Error::SeriesTooShort(format!(
            "segment length {segment_len} below minimum 8"
        )));
    }
    if segment_len > series.len() / 4 {
        return Err(Error::SeriesTooShort(format!(
            "segment length {segment_len} exceeds a quarter of the series ({})",
            series.len()
        )));
    }
    let mut acc = WelchAccumulator::new(segment_len, window);
    acc.push(series);
    acc.finalize(dt)
}

/// Single-shot periodogram of the whole series (used for deterministic
/// transients, where segment averaging makes no sense).
pub fn periodogram(series: &[f64], window: Window, dt: f64) -> Result<Psd> {
    if series.len() < 8 {
        return Err(Error::SeriesTooShort(format!(
            "periodogram needs at least 8 samples, got {}",
            series.len()
        )));
    }
    let mut acc = WelchAccumulator::new(series.len(), window);
    acc.push(series);
    acc.finalize(dt)
}

/// Streaming Welch accumulator: push samples in arbitrary chunks, finalize
/// once the run ends. Holds one segment of history.
pub struct WelchAccumulator {
    segment_len: usize,
    hop: usize,
    window: Vec<f64>,
    window_power: f64,
    fft: Arc<dyn Fft<f64>>,
    pending: Vec<f64>,
    acc: Vec<f64>,
    segments: usize,
    scratch: Vec<Complex64>,
}

impl WelchAccumulator {
    pub fn new(segment_len: usize, window: Window) -> Self {
        let w = window.values(segment_len);
        let window_power = w.iter().map(|v| v * v).sum();
        let fft = FftPlanner::new().plan_fft_forward(segment_len);
        WelchAccumulator {
            segment_len,
            hop: (segment_len / 2).max(1),
            window: w,
            window_power,
            fft,
            pending: Vec::with_capacity(2 * segment_len),
            acc: vec![0.0; segment_len / 2 + 1],
            segments: 0,
            scratch: vec![Complex64::new(0.0, 0.0); segment_len],
        }
    }

    pub fn push(&mut self, samples: &[f64]) {
        self.pending.extend_from_slice(samples);
        while self.pending.len() >= self.segment_len {
            for (i, s) in self.scratch.iter_mut().enumerate() {
                *s = Complex64::new(self.pending[i] * self.window[i], 0.0);
            }
            self.fft.process(&mut self.scratch);
            for (k, a) in self.acc.iter_mut().enumerate() {
                *a += self.scratch[k].norm_sqr();
            }
            self.segments += 1;
            self.pending.drain(..self.hop);
        }
    }

    /// Window and accumulate one pre-assembled full segment (used by the
    /// streaming estimator, which carves out its own overlapping segments).
    pub fn accumulate_segment(&mut self, segment: &[f64]) {
        assert_eq!(segment.len(), self.segment_len);
        for (i, s) in self.scratch.iter_mut().enumerate() {
            *s = Complex64::new(segment[i] * self.window[i], 0.0);
        }
        self.fft.process(&mut self.scratch);
        for (k, a) in self.acc.iter_mut().enumerate() {
            *a += self.scratch[k].norm_sqr();
        }
        self.segments += 1;
    }

    pub fn segments(&self) -> usize {
        self.segments
    }

    /// Average the accumulated periodograms into a one-sided PSD.
    pub fn finalize(&self, dt: f64) -> Result<Psd> {
        if self.segments == 0 {
            return Err(Error::SeriesTooShort(
                "no complete segment accumulated".into(),
            ));
        }
        let n = self.segment_len;
        let norm = dt / (self.window_power * self.segments as f64);
        let omegas: Vec<f64> = (0..=n / 2)
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / (n as f64 * dt))
            .collect();
        let values: Vec<f64> = self
            .acc
            .iter()
            .enumerate()
            .map(|(k, a)| {
                // interior bins carry the doubled one-sided weight
                let fold = if k == 0 || (n % 2 == 0 && k == n / 2) {
                    1.0
                } else {
                    2.0
                };
                fold * a * norm
            })
            .collect();
        Ok(Psd { omegas, values })
    }
}

/// Largest 5-smooth integer not exceeding `n` (FFT-friendly segment sizes).
pub fn round_to_smooth(n: usize) -> usize {
    let mut best = 1usize;
    let mut p2 = 1usize;
    while p2 <= n {
        let mut p23 = p2;
        while p23 <= n {
            let mut p235 = p23;
            while p235 <= n {
                best = best.max(p235);
                match p235.checked_mul(5) {
                    Some(v) => p235 = v,
                    None => break,
                }
            }
            match p23.checked_mul(3) {
                Some(v) => p23 = v,
                None => break,
            }
        }
        match p2.checked_mul(2) {
            Some(v) => p2 = v,
            None => break,
        }
    }
    best
}
