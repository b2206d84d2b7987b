use nalgebra::DMatrix;
use rayon::prelude::*;

use super::cwt::{join, Scalogram};
use super::TimeFrequencyMap;
use crate::lattice::fmt17;
use crate::spinops::C64;
use crate::{Error, Result};

/// Default relative modulus threshold below which CWT cells are discarded.
pub const DEFAULT_SST_GAMMA: f64 = 1e-4;

/// Synchrosqueezed transform T(w, b) on the scalogram's log-spaced
/// frequency grid (descending, like the scalogram rows).
#[derive(Debug, Clone, PartialEq)]
pub struct SstMap {
    pub freq_bins: Vec<f64>,
    pub times: Vec<f64>,
    pub coeffs: DMatrix<C64>,
    pub threshold_gamma: f64,
    pub voices: usize,
}

impl TimeFrequencyMap for SstMap {
    fn kind(&self) -> &'static str {
        "sst"
    }
    fn frequencies(&self) -> &[f64] {
        &self.freq_bins
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn coeffs(&self) -> &DMatrix<C64> {
        &self.coeffs
    }
    fn metadata(&self) -> Vec<(String, String)> {
        vec![
            ("threshold_gamma".into(), fmt17(self.threshold_gamma)),
            ("voices".into(), self.voices.to_string()),
            ("freq_bins".into(), join(&self.freq_bins)),
        ]
    }
}

/// Reassigns each CWT cell with |W| > γ·max|W| to the bin nearest (in log
/// frequency) its instantaneous frequency Im(∂_bW / W), carrying the mass
/// W·a^{−3/2}·Δa. Cells whose frequency is non-positive or falls more than
/// half a bin outside the grid are dropped.
pub fn synchrosqueeze(w: &Scalogram, gamma: f64) -> Result<SstMap> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::param(
            "sst_threshold",
            format!("{gamma} must be non-negative"),
        ));
    }
    let rows = w.scales.len();
    let cols = w.times.len();
    let voices = w.params.voices as f64;
    let top = w.center_freqs[0];
    let max_mod = w.coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    let cut = gamma * max_mod;
    let measure: Vec<f64> = (0..rows)
        .map(|r| w.scales[r].powf(-1.5) * w.delta_a(r))
        .collect();

    let columns: Vec<Vec<C64>> = (0..cols)
        .into_par_iter()
        .map(|c| {
            let mut out = vec![C64::new(0.0, 0.0); rows];
            for r in 0..rows {
                let z = w.coeffs[(r, c)];
                let m = z.norm();
                if !(m > cut) || m == 0.0 {
                    continue;
                }
                let freq = (w.deriv[(r, c)] / z).im;
                if !(freq > 0.0) {
                    continue;
                }
                let pos = voices * (top / freq).log2();
                let bin = pos.round();
                if bin < 0.0 || bin > (rows - 1) as f64 {
                    continue;
                }
                out[bin as usize] += z * measure[r];
            }
            out
        })
        .collect();
    Ok(SstMap {
        freq_bins: w.center_freqs.clone(),
        times: w.times.clone(),
        coeffs: DMatrix::from_fn(rows, cols, |r, c| columns[c][r]),
        threshold_gamma: gamma,
        voices: w.params.voices,
    })
}
