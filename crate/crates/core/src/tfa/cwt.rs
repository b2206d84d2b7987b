use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use rustfft::FftPlanner;

use super::spectrum::padded_len;
use super::TimeFrequencyMap;
use crate::lattice::fmt17;
use crate::spinops::C64;
use crate::{Error, Result};

/// Bump wavelet φ̂(aω) = exp(1 − 1/(1 − (aω − μ)²/σ²)) on |aω − μ| < σ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub mu: f64,
    pub sigma: f64,
    pub voices: usize,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams {
            mu: 5.0,
            sigma: 0.6,
            voices: 32,
        }
    }
}

impl BumpParams {
    pub fn new(mu: f64, sigma: f64, voices: usize) -> Result<Self> {
        let p = BumpParams { mu, sigma, voices };
        p.validate()?;
        Ok(p)
    }

    /// μ > σ > 0 keeps ω = 0 outside the support (zero mean).
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(
                "sigma",
                format!("{} must be positive", self.sigma),
            ));
        }
        if !(self.mu > self.sigma && self.mu.is_finite()) {
            return Err(Error::param(
                "mu",
                format!("{} must exceed sigma = {}", self.mu, self.sigma),
            ));
        }
        if self.voices == 0 {
            return Err(Error::param("voices", "need at least one voice per octave"));
        }
        Ok(())
    }

    /// Support of φ̂ in the variable aω.
    pub fn support(&self) -> (f64, f64) {
        (self.mu - self.sigma, self.mu + self.sigma)
    }

    pub fn kernel(&self, a_omega: f64) -> f64 {
        let u = (a_omega - self.mu) / self.sigma;
        if u.abs() < 1.0 {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        } else {
            0.0
        }
    }
}

/// Range of wavelet center frequencies μ/a (ω̄ units) to analyze.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleRange {
    pub omega_min: f64,
    pub omega_max: f64,
}

impl ScaleRange {
    /// Periods from 2Δt (Nyquist) to a quarter of the series duration.
    pub fn auto(dt: f64, samples: usize) -> Self {
        let duration = dt * (samples.max(2) - 1) as f64;
        ScaleRange {
            omega_min: 8.0 * PI / duration,
            omega_max: PI / dt,
        }
    }

    /// Log-spaced scales a = μ/ω, ascending (center frequency descending),
    /// `voices` per octave starting at the highest frequency.
    pub fn scales(&self, params: &BumpParams) -> Vec<f64> {
        let a_min = params.mu / self.omega_max;
        let octaves = (self.omega_max / self.omega_min).log2();
        let n = (octaves * params.voices as f64 + 1e-9).floor() as usize + 1;
        (0..n)
            .map(|j| a_min * 2f64.powf(j as f64 / params.voices as f64))
            .collect()
    }
}

/// Bump-wavelet CWT W(a, b): rows are scales (ascending, so frequency
/// descending), columns are the input samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub params: BumpParams,
    pub dt: f64,
    pub scales: Vec<f64>,
    /// μ/a per row, ω̄.
    pub center_freqs: Vec<f64>,
    pub times: Vec<f64>,
    pub coeffs: DMatrix<C64>,
    /// ∂_b W from the spectral derivative.
    pub deriv: DMatrix<C64>,
    /// Half-width (t̄) of the edge region influenced by zero extension,
    /// per row: 2a/σ.
    pub coi: Vec<f64>,
}

impl Scalogram {
    /// Log-scale step Δa of row `r`.
    pub fn delta_a(&self, r: usize) -> f64 {
        self.scales[r] * std::f64::consts::LN_2 / self.params.voices as f64
    }

    /// Whether sample `col` of row `r` lies inside the cone of influence.
    pub fn in_coi(&self, r: usize, col: usize) -> bool {
        let t = self.times[col];
        let end = *self.times.last().unwrap_or(&0.0);
        t < self.coi[r] || end - t < self.coi[r]
    }
}

impl TimeFrequencyMap for Scalogram {
    fn kind(&self) -> &'static str {
        "cwt"
    }
    fn frequencies(&self) -> &[f64] {
        &self.center_freqs
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }
    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("mu".into(), fmt17(self.params.mu)),
            ("sigma".into(), fmt17(self.params.sigma)),
            ("voices".into(), self.params.voices.to_string()),
            ("dt".into(), fmt17(self.dt)),
            ("scales".into(), join(&self.scales)),
            ("coi_half_width".into(), join(&self.coi)),
        ]
    }
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join(" ")
}

/// Bump-wavelet transform of a real series sampled every `dt` (t̄),
/// computed per scale in the Fourier domain on the analytic half-spectrum.
pub fn cwt_bump(x: &[f64], dt: f64, params: &BumpParams, range: &ScaleRange) -> Result<Scalogram> {
    params.validate()?;
    let n = x.len();
    if n < 2 {
        return Err(Error::TimeGrid("need at least 2 samples".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::TimeGrid(format!("step {dt} must be positive")));
    }
    if !(range.omega_min > 0.0 && range.omega_max >= range.omega_min && range.omega_max.is_finite())
    {
        return Err(Error::ScaleRange(format!(
            "need 0 < omega_min <= omega_max, got [{}, {}]",
            range.omega_min, range.omega_max
        )));
    }
    let npad = padded_len(n, 2);
    let dw = 2.0 * PI / (npad as f64 * dt);
    let nyquist = PI / dt;
    let (lo, hi) = params.support();
    let scales = range.scales(params);
    // the extreme rows must see at least one positive-frequency bin
    let a_min = scales[0];
    let a_max = *scales.last().unwrap();
    if lo / a_min >= nyquist {
        return Err(Error::ScaleRange(format!(
            "support of the smallest scale starts at ω̄ = {} above Nyquist {nyquist}",
            lo / a_min
        )));
    }
    if hi / a_max <= dw {
        return Err(Error::ScaleRange(format!(
            "support of the largest scale ends at ω̄ = {} below the frequency step {dw}",
            hi / a_max
        )));
    }

    let mut spectrum: Vec<C64> = x.iter().map(|&v| C64::new(v, 0.0)).collect();
    spectrum.resize(npad, C64::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(npad).process(&mut spectrum);
    let inverse = planner.plan_fft_inverse(npad);
    let norm = 1.0 / npad as f64;

    let rows: Vec<(Vec<C64>, Vec<C64>)> = scales
        .par_iter()
        .map(|&a| {
            let mut w = vec![C64::new(0.0, 0.0); npad];
            let mut dw_buf = vec![C64::new(0.0, 0.0); npad];
            let k_lo = ((lo / a) / dw).floor().max(1.0) as usize;
            let k_hi = (((hi / a) / dw).ceil() as usize).min(npad / 2);
            let sqrt_a = a.sqrt();
            for k in k_lo..=k_hi {
                let omega = k as f64 * dw;
                let psi = sqrt_a * params.kernel(a * omega) * norm;
                if psi == 0.0 {
                    continue;
                }
                let v = spectrum[k] * psi;
                w[k] = v;
                dw_buf[k] = v * C64::new(0.0, omega);
            }
            inverse.process(&mut w);
            inverse.process(&mut dw_buf);
            w.truncate(n);
            dw_buf.truncate(n);
            (w, dw_buf)
        })
        .collect();

    let coeffs = DMatrix::from_fn(scales.len(), n, |r, c| rows[r].0[c]);
    let deriv = DMatrix::from_fn(scales.len(), n, |r, c| rows[r].1[c]);
    Ok(Scalogram {
        params: *params,
        dt,
        center_freqs: scales.iter().map(|a| params.mu / a).collect(),
        coi: scales.iter().map(|a| 2.0 * a / params.sigma).collect(),
        scales,
        times: (0..n).map(|k| k as f64 * dt).collect(),
        coeffs,
        deriv,
    })
}
