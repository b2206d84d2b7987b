//! Time-frequency analysis of correlation series: normalization, the
//! periodogram, bump-wavelet scalograms and synchrosqueezing.
//!
//! Frequencies are angular and in units of Ā (ω̄ = ω/Ā), times in t̄ = t·Ā.

mod cwt;
mod export;
mod spectrum;
mod sst;

pub use cwt::{cwt_bump, BumpParams, ScaleRange, Scalogram};
pub use export::{write_long_table, write_modulus_binary, write_sidecar};
pub use spectrum::{modulation_period, power_spectrum, Spectrum};
pub use sst::{synchrosqueeze, SstMap, DEFAULT_SST_GAMMA};

use nalgebra::DMatrix;

use crate::cce::{CorrelationSeries, SeriesMeta};
use crate::spinops::C64;
use crate::{Error, Result};

/// Relative size of C(0) − ⟨C⟩ below which a series counts as constant.
const DEGENERATE_TOL: f64 = 1e-14;

/// C̄ = (C − ⟨C⟩_t)/(C(0) − ⟨C⟩_t), so that C̄(0) = 1 and ⟨C̄⟩_t = 0.
pub fn normalize_correlation(series: &CorrelationSeries) -> Result<CorrelationSeries> {
    if series.is_empty() {
        return Err(Error::DegenerateSeries);
    }
    // The baseline cancels; work on the oscillating part only.
    let mean = series.values.iter().sum::<f64>() / series.len() as f64;
    let denom = series.values[0] - mean;
    let c0 = series.c0();
    if !(denom.abs() > DEGENERATE_TOL * c0.abs()) || denom == 0.0 {
        return Err(Error::DegenerateSeries);
    }
    let mut values: Vec<f64> = series.values.iter().map(|v| (v - mean) / denom).collect();
    values[0] = 1.0;
    Ok(CorrelationSeries {
        grid: series.grid,
        baseline: 0.0,
        values,
        meta: SeriesMeta {
            normalized: true,
            c0,
            time_mean: series.baseline + mean,
            max_imag: series.meta.max_imag,
            ..series.meta.clone()
        },
    })
}

/// Common view of scalograms and synchrosqueezed maps: a frequency axis
/// (rows, ω̄), a time axis (columns, t̄) and complex coefficients.
pub trait TimeFrequencyMap {
    fn kind(&self) -> &'static str;
    fn frequencies(&self) -> &[f64];
    fn times(&self) -> &[f64];
    fn coeffs(&self) -> &DMatrix<C64>;
    /// Extra `key = value` metadata for the text sidecar.
    fn metadata(&self) -> Vec<(String, String)>;
}

/// Per-time-sample Σ|coeff| over rows whose frequency lies in [lo, hi].
pub fn band_amplitude<M: TimeFrequencyMap + ?Sized>(
    map: &M,
    omega_lo: f64,
    omega_hi: f64,
) -> Result<Vec<f64>> {
    if !(omega_lo <= omega_hi) {
        return Err(Error::param(
            "band",
            format!("[{omega_lo}, {omega_hi}] is reversed"),
        ));
    }
    let rows: Vec<usize> = map
        .frequencies()
        .iter()
        .enumerate()
        .filter(|(_, &f)| f >= omega_lo && f <= omega_hi)
        .map(|(r, _)| r)
        .collect();
    if rows.is_empty() {
        return Err(Error::EmptyBand {
            lo: omega_lo,
            hi: omega_hi,
        });
    }
    let c = map.coeffs();
    Ok((0..c.ncols())
        .map(|col| rows.iter().map(|&r| c[(r, col)].norm()).sum())
        .collect())
}

/// Σ over time of [`band_amplitude`].
pub fn band_mass<M: TimeFrequencyMap + ?Sized>(
    map: &M,
    omega_lo: f64,
    omega_hi: f64,
) -> Result<f64> {
    Ok(band_amplitude(map, omega_lo, omega_hi)?.iter().sum())
}

/// The default 0Q, 1Q and 2Q channel bands.
pub const DEFAULT_BANDS: [(&str, f64, f64); 3] =
    [("0Q", 0.0, 0.1), ("1Q", 0.4, 0.6), ("2Q", 0.9, 1.1)];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cce::TimeGrid;

    fn series(values: Vec<f64>, baseline: f64, dt: f64) -> CorrelationSeries {
        CorrelationSeries {
            grid: TimeGrid::new(dt, values.len()).unwrap(),
            baseline,
            values,
            meta: SeriesMeta::external(1.0),
        }
    }

    #[test]
    fn normalized_starts_at_one_with_zero_mean() {
        let v: Vec<f64> = (0..500)
            .map(|k| 1e-8 * ((k as f64 * 0.3).cos() + 0.4 * (k as f64 * 0.07).sin()))
            .collect();
        let n = normalize_correlation(&series(v, 3.0, 0.1)).unwrap();
        assert_eq!(n.values[0], 1.0);
        let mean = n.values.iter().sum::<f64>() / n.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!(n.meta.normalized);
        assert_eq!(n.baseline, 0.0);
        assert!((n.meta.c0 - (3.0 + 1e-8 * 1.0)).abs() < 1e-15);
    }

    #[test]
    fn constant_series_is_degenerate() {
        let s = series(vec![0.0; 64], 2.0, 0.1);
        assert!(matches!(
            normalize_correlation(&s),
            Err(Error::DegenerateSeries)
        ));
        let tiny: Vec<f64> = (0..64).map(|k| if k == 0 { 1e-15 } else { 0.0 }).collect();
        assert!(matches!(
            normalize_correlation(&series(tiny, 1.0, 0.1)),
            Err(Error::DegenerateSeries)
        ));
    }

    #[test]
    fn whole_period_cosine_unchanged() {
        let n = 400;
        let w = 2.0 * std::f64::consts::PI * 5.0 / n as f64;
        let v: Vec<f64> = (0..n).map(|k| (w * k as f64).cos()).collect();
        let out = normalize_correlation(&series(v.clone(), 0.0, 1.0)).unwrap();
        for (a, b) in out.values.iter().zip(&v) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
