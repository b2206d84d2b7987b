use std::f64::consts::PI;

use rustfft::FftPlanner;

use crate::spinops::C64;
use crate::{Error, Result};

/// One-sided periodogram on a uniform ω̄ grid starting at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub omega_bar: Vec<f64>,
    pub power: Vec<f64>,
}

impl Spectrum {
    pub fn bin_width(&self) -> f64 {
        self.omega_bar[1] - self.omega_bar[0]
    }

    /// Total power in bins with ω̄ ∈ [lo, hi].
    pub fn power_in(&self, lo: f64, hi: f64) -> f64 {
        self.omega_bar
            .iter()
            .zip(&self.power)
            .filter(|(w, _)| **w >= lo && **w <= hi)
            .map(|(_, p)| p)
            .sum()
    }

    /// Largest bin inside [lo, hi], refined by a parabola through its
    /// neighbours; returns (ω̄, height).
    pub fn peak_in(&self, lo: f64, hi: f64) -> Option<(f64, f64)> {
        let (k, _) = self
            .omega_bar
            .iter()
            .zip(&self.power)
            .enumerate()
            .filter(|(_, (w, _))| **w >= lo && **w <= hi)
            .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))?;
        Some(refine_peak(&self.omega_bar, &self.power, k))
    }
}

fn refine_peak(x: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= y.len() {
        return (x[k], y[k]);
    }
    let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return (x[k], b);
    }
    let p = 0.5 * (a - c) / den;
    (x[k] + p * (x[1] - x[0]), b - 0.25 * (a - c) * p)
}

pub(crate) fn padded_len(n: usize, factor: usize) -> usize {
    (n * factor.max(1)).next_power_of_two()
}

/// |FFT|² of `values` (sampled every `dt` in t̄) zero-padded to the next
/// power of two ≥ `zero_pad_factor`·N; rectangular window, one-sided.
pub fn power_spectrum(values: &[f64], dt: f64, zero_pad_factor: usize) -> Result<Spectrum> {
    if values.len() < 2 {
        return Err(Error::TimeGrid("need at least 2 samples".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::TimeGrid(format!("step {dt} must be positive")));
    }
    let n = padded_len(values.len(), zero_pad_factor);
    let mut buf: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    buf.resize(n, C64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let dw = 2.0 * PI / (n as f64 * dt);
    Ok(Spectrum {
        omega_bar: (0..=n / 2).map(|k| k as f64 * dw).collect(),
        power: buf[..=n / 2].iter().map(|z| z.norm_sqr()).collect(),
    })
}

/// Period (in t̄) of the strongest non-DC modulation of `envelope`.
pub fn modulation_period(envelope: &[f64], dt: f64) -> Option<f64> {
    let mean = envelope.iter().sum::<f64>() / envelope.len() as f64;
    let centered: Vec<f64> = envelope.iter().map(|v| v - mean).collect();
    let spec = power_spectrum(&centered, dt, 16).ok()?;
    // skip the DC lobe: first bin past the first local minimum
    let start = (1..spec.power.len() - 1).find(|&k| spec.power[k] <= spec.power[k + 1])?;
    let hi = *spec.omega_bar.last()?;
    let (w, h) = spec.peak_in(spec.omega_bar[start], hi)?;
    (h > 0.0 && w > 0.0).then(|| 2.0 * PI / w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(w: f64, dt: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| (w * k as f64 * dt).cos()).collect()
    }

    #[test]
    fn single_tone_peak_within_one_bin() {
        let s = power_spectrum(&tone(0.5, 0.25, 3000), 0.25, 2).unwrap();
        let k = (0..s.power.len())
            .max_by(|&a, &b| s.power[a].total_cmp(&s.power[b]))
            .unwrap();
        assert!((s.omega_bar[k] - 0.5).abs() <= s.bin_width());
        assert!(s.power.iter().all(|&p| p >= 0.0));
        let dw = s.bin_width();
        assert!(s
            .omega_bar
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dw).abs() < 1e-12));
    }

    #[test]
    fn two_equal_tones_give_equal_peaks() {
        let (dt, n) = (0.25, 4000);
        let x: Vec<f64> = tone(0.5, dt, n)
            .iter()
            .zip(tone(1.0, dt, n))
            .map(|(a, b)| a + b)
            .collect();
        let s = power_spectrum(&x, dt, 4).unwrap();
        let (w1, p1) = s.peak_in(0.4, 0.6).unwrap();
        let (w2, p2) = s.peak_in(0.9, 1.1).unwrap();
        assert!((w1 - 0.5).abs() < 0.2 * s.bin_width() + 1e-3);
        assert!((w2 - 1.0).abs() < 0.2 * s.bin_width() + 1e-3);
        assert!((p1 / p2 - 1.0).abs() < 0.01, "{p1} {p2}");
    }

    #[test]
    fn modulation_period_of_beating_envelope() {
        let dt = 0.5;
        let env: Vec<f64> = (0..4000)
            .map(|k| 1.0 + 0.3 * (0.02 * k as f64 * dt).cos())
            .collect();
        let p = modulation_period(&env, dt).unwrap();
        assert!((p / (2.0 * PI / 0.02) - 1.0).abs() < 0.01, "{p}");
        assert!(modulation_period(&vec![1.0; 100], 1.0).is_none());
    }
}
