//! Cluster correlation expansion of the Overhauser-field autocorrelation
//! C(t) = ⟨βᶻ(t)βᶻ(0)⟩ in the infinite-temperature bath ensemble.
//!
//! Each cluster ζ is diagonalized exactly, H = V·diag(E)·V†, and with
//! B = V†βᶻV its correlation is
//!
//! ```text
//! C_ζ(t) = (1/d) Σ_{m,n} |B_mn|² e^{i(E_m − E_n)t},   d = (2I+1)^|ζ|
//! ```
//!
//! Irreducible contributions follow C̃_ζ = C_ζ − Σ_{ζ'⊂ζ} C̃_ζ', and the
//! truncated expansion is C(t) = Σ_{|ζ|≤M} C̃_ζ(t).

mod clusters;
mod io;

pub use clusters::{enumerate_clusters, ClusterSet};

use rayon::prelude::*;

use crate::hamiltonian::{bath_operator_diagonal, cluster_hamiltonian, EffectiveParams, TermMask};
use crate::lattice::BathRealization;
use crate::spinops::{CMatrix, C64};
use crate::{Error, Result};

/// Largest Hilbert space handled by [`exact_bath_correlation`].
pub const EXACT_DIM_CAP: usize = 4096;

/// Clusters per work unit in the parallel reduction. Fixed so that the
/// summation order, and therefore the output bits, do not depend on the
/// number of threads.
const CHUNK: usize = 64;
/// Work units reduced per parallel batch (bounds peak memory).
const BATCH: usize = 64;
/// Phasors are recomputed exactly every this many samples.
const RESEED: usize = 256;

/// Uniform grid of normalized times t̄ = t·Ā starting at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub samples: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, samples: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::TimeGrid(format!("step {dt} must be positive")));
        }
        if samples < 2 {
            return Err(Error::TimeGrid(format!(
                "{samples} samples, need at least 2"
            )));
        }
        Ok(TimeGrid { dt, samples })
    }

    /// `samples` points spanning [0, t_max].
    pub fn spanning(t_max: f64, samples: usize) -> Result<Self> {
        if samples < 2 {
            return Err(Error::TimeGrid(format!(
                "{samples} samples, need at least 2"
            )));
        }
        TimeGrid::new(t_max / (samples - 1) as f64, samples)
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.samples).map(|k| self.time(k)).collect()
    }

    pub fn duration(&self) -> f64 {
        self.time(self.samples - 1)
    }
}

impl Default for TimeGrid {
    /// 4096 samples over t̄ ∈ [0, 200].
    fn default() -> Self {
        TimeGrid {
            dt: 200.0 / 4095.0,
            samples: 4096,
        }
    }
}

/// Where a series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesSource {
    Cce {
        order: usize,
    },
    Exact,
    /// Read from a file or built by hand.
    External,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesMeta {
    pub a_bar: f64,
    pub source: SeriesSource,
    pub mask: TermMask,
    pub c_hf: f64,
    /// Largest |Im C(t)| seen before the imaginary part was dropped.
    pub max_imag: f64,
    pub normalized: bool,
    /// Raw C(0) and time average used by normalization (zero if raw).
    pub c0: f64,
    pub time_mean: f64,
}

impl SeriesMeta {
    pub fn external(a_bar: f64) -> Self {
        SeriesMeta {
            a_bar,
            source: SeriesSource::External,
            mask: TermMask::FULL,
            c_hf: 0.5,
            max_imag: 0.0,
            normalized: false,
            c0: 0.0,
            time_mean: 0.0,
        }
    }
}

/// Real-valued correlation samples on a [`TimeGrid`]:
/// C(t̄_k) = `baseline` + `values[k]`.
///
/// The time-independent part of C is carried in `baseline` so that the
/// oscillating part, often eight orders of magnitude smaller, keeps full
/// precision in `values`. Normalized series have a zero baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub grid: TimeGrid,
    pub baseline: f64,
    pub values: Vec<f64>,
    pub meta: SeriesMeta,
}

impl CorrelationSeries {
    fn from_complex(grid: TimeGrid, baseline: f64, values: &[C64], meta: SeriesMeta) -> Self {
        let max_imag = values.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
        CorrelationSeries {
            grid,
            baseline,
            values: values.iter().map(|z| z.re).collect(),
            meta: SeriesMeta { max_imag, ..meta },
        }
    }

    /// C(t̄_k)
    pub fn value(&self, k: usize) -> f64 {
        self.baseline + self.values[k]
    }

    pub fn c0(&self) -> f64 {
        self.value(0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// One pair of eigenlevels m > n with gap ω = E_m − E_n ≥ 0 (rad/s).
/// `forward` multiplies e^{+iωt}, `backward` e^{−iωt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub omega: f64,
    pub forward: f64,
    pub backward: f64,
}

impl Transition {
    pub fn weight(&self) -> f64 {
        self.forward + self.backward
    }
}

/// Spectral decomposition of a cluster correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSpectrum {
    /// Σ_m |B_mm|²/d, the time-independent part.
    pub constant: f64,
    pub transitions: Vec<Transition>,
}

/// Relative weight below which a transition is treated as exactly zero.
const WEIGHT_FLOOR: f64 = 1e-22;

pub fn cluster_spectrum(
    cluster: &[usize],
    bath: &BathRealization,
    params: &EffectiveParams,
    mask: TermMask,
) -> Result<ClusterSpectrum> {
    let h = cluster_hamiltonian(cluster, bath, params, mask)?;
    let eig = h.eigh()?;
    let b = bath_operator_diagonal(cluster, bath)?;
    Ok(spectrum_from_eigen(&eig.values, &eig.vectors, &b))
}

fn spectrum_from_eigen(values: &[f64], vectors: &CMatrix, b_diag: &[f64]) -> ClusterSpectrum {
    let d = values.len();
    // B' = V† diag(b) V
    let mut scaled = vectors.clone();
    for (r, &bk) in b_diag.iter().enumerate() {
        for c in 0..d {
            scaled[(r, c)] *= bk;
        }
    }
    let bp = vectors.adjoint() * scaled;
    let inv_d = 1.0 / d as f64;
    let total: f64 = bp.iter().map(|z| z.norm_sqr()).sum::<f64>() * inv_d;
    let floor = WEIGHT_FLOOR * total;
    let mut constant = 0.0;
    for m in 0..d {
        constant += bp[(m, m)].norm_sqr() * inv_d;
    }
    let mut transitions = Vec::new();
    for m in 0..d {
        for n in 0..m {
            let forward = bp[(m, n)].norm_sqr() * inv_d;
            let backward = bp[(n, m)].norm_sqr() * inv_d;
            if forward + backward > floor {
                transitions.push(Transition {
                    omega: values[m] - values[n],
                    forward,
                    backward,
                });
            }
        }
    }
    ClusterSpectrum {
        constant,
        transitions,
    }
}

impl ClusterSpectrum {
    /// `acc[k] += scale · C(t̄_k)` with t = t̄/Ā.
    pub fn accumulate(&self, grid: &TimeGrid, a_bar: f64, scale: f64, acc: &mut [C64]) {
        let base = scale * self.constant;
        for v in acc.iter_mut() {
            v.re += base;
        }
        self.accumulate_oscillating(grid, a_bar, scale, acc);
    }

    /// Like [`ClusterSpectrum::accumulate`] without the constant part.
    pub fn accumulate_oscillating(&self, grid: &TimeGrid, a_bar: f64, scale: f64, acc: &mut [C64]) {
        debug_assert_eq!(acc.len(), grid.samples);
        let n = self.transitions.len();
        if n == 0 {
            return;
        }
        let steps: Vec<f64> = self
            .transitions
            .iter()
            .map(|t| t.omega / a_bar * grid.dt)
            .collect();
        let even: Vec<f64> = self
            .transitions
            .iter()
            .map(|t| scale * (t.forward + t.backward))
            .collect();
        let odd: Vec<f64> = self
            .transitions
            .iter()
            .map(|t| scale * (t.forward - t.backward))
            .collect();
        let rot: Vec<(f64, f64)> = steps.iter().map(|s| s.sin_cos()).collect();
        let mut cur_re = vec![0.0; n];
        let mut cur_im = vec![0.0; n];
        for (k, out) in acc.iter_mut().enumerate() {
            if k % RESEED == 0 {
                for l in 0..n {
                    let (s, c) = (k as f64 * steps[l]).sin_cos();
                    cur_re[l] = c;
                    cur_im[l] = s;
                }
            }
            let mut re = 0.0;
            let mut im = 0.0;
            for l in 0..n {
                re += even[l] * cur_re[l];
                im += odd[l] * cur_im[l];
            }
            out.re += re;
            out.im += im;
            for l in 0..n {
                let (s, c) = rot[l];
                let r = cur_re[l] * c - cur_im[l] * s;
                cur_im[l] = cur_re[l] * s + cur_im[l] * c;
                cur_re[l] = r;
            }
        }
    }
}

/// Complex correlation C_ζ(t̄_k) of one cluster (times in units of 1/Ā of
/// the whole bath).
pub fn cluster_correlation(
    cluster: &[usize],
    bath: &BathRealization,
    params: &EffectiveParams,
    mask: TermMask,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    let spec = cluster_spectrum(cluster, bath, params, mask)?;
    let mut out = vec![C64::new(0.0, 0.0); grid.samples];
    spec.accumulate(grid, bath.a_bar, 1.0, &mut out);
    Ok(out)
}

/// Σ_i A_i²·I(I+1)/3, the exact value of C(0).
pub fn sum_rule(bath: &BathRealization) -> f64 {
    let cas = bath.species.spin.casimir();
    bath.hf_couplings.iter().map(|a| a * a * cas / 3.0).sum()
}

/// Combines per-cluster correlations (indexed like `set.clusters()`) by the
/// subtraction recursion and sums every irreducible contribution.
pub fn cce_combine(
    correlations: &[Vec<C64>],
    set: &ClusterSet,
    grid: &TimeGrid,
    meta: SeriesMeta,
) -> Result<CorrelationSeries> {
    if correlations.len() != set.len() {
        return Err(Error::MissingSubcluster(format!(
            "{} correlations for {} clusters",
            correlations.len(),
            set.len()
        )));
    }
    if let Some((k, _)) = correlations
        .iter()
        .enumerate()
        .find(|(_, c)| c.len() != grid.samples)
    {
        return Err(Error::TimeGrid(format!(
            "cluster {k} is not on the common grid"
        )));
    }
    set.validate()?;
    let mut tilde: Vec<Vec<C64>> = Vec::with_capacity(set.len());
    let mut total = vec![C64::new(0.0, 0.0); grid.samples];
    for k in 0..set.len() {
        let mut t = correlations[k].clone();
        for &s in set.subclusters(k) {
            for (a, b) in t.iter_mut().zip(&tilde[s]) {
                *a -= b;
            }
        }
        for (a, b) in total.iter_mut().zip(&t) {
            *a += b;
        }
        tilde.push(t);
    }
    Ok(CorrelationSeries::from_complex(*grid, 0.0, &total, meta))
}

/// CCE-M correlation for each requested order, evaluating every cluster
/// once. Clusters run in parallel; the reduction order is fixed.
pub fn cce_correlation_orders(
    bath: &BathRealization,
    set: &ClusterSet,
    params: &EffectiveParams,
    mask: TermMask,
    grid: &TimeGrid,
    orders: &[usize],
) -> Result<Vec<CorrelationSeries>> {
    if bath.is_empty() {
        return Err(Error::EmptyBath);
    }
    if let Some(&bad) = orders.iter().find(|&&m| m == 0 || m > set.max_order()) {
        return Err(Error::param(
            "cce_order",
            format!("order {bad} outside 1..={}", set.max_order()),
        ));
    }
    let weights: Vec<Vec<i64>> = orders.iter().map(|&m| set.expansion_weights(m)).collect();
    let active: Vec<usize> = (0..set.len())
        .filter(|&k| weights.iter().any(|w| w[k] != 0))
        .collect();
    let n_orders = orders.len();
    let zero = || vec![vec![C64::new(0.0, 0.0); grid.samples]; n_orders];
    let mut totals = zero();
    let mut baselines = vec![0.0f64; n_orders];

    let chunks: Vec<&[usize]> = active.chunks(CHUNK).collect();
    for batch in chunks.chunks(BATCH) {
        let partials: Vec<Result<(Vec<f64>, Vec<Vec<C64>>)>> = batch
            .par_iter()
            .map(|chunk| {
                let mut acc = zero();
                let mut base = vec![0.0f64; n_orders];
                let mut scratch = vec![C64::new(0.0, 0.0); grid.samples];
                for &k in chunk.iter() {
                    let spec = cluster_spectrum(set.cluster(k), bath, params, mask)?;
                    scratch.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
                    spec.accumulate_oscillating(grid, bath.a_bar, 1.0, &mut scratch);
                    for (o, w) in weights.iter().enumerate() {
                        if w[k] != 0 {
                            let s = w[k] as f64;
                            base[o] += s * spec.constant;
                            for (a, z) in acc[o].iter_mut().zip(&scratch) {
                                *a += z * s;
                            }
                        }
                    }
                }
                Ok((base, acc))
            })
            .collect();
        for part in partials {
            let (base, part) = part?;
            for (b, p) in baselines.iter_mut().zip(base) {
                *b += p;
            }
            for (tot, p) in totals.iter_mut().zip(part) {
                for (a, b) in tot.iter_mut().zip(p) {
                    *a += b;
                }
            }
        }
    }
    Ok(orders
        .iter()
        .zip(totals)
        .zip(baselines)
        .map(|((&order, values), baseline)| {
            let meta = SeriesMeta {
                a_bar: bath.a_bar,
                source: SeriesSource::Cce { order },
                mask,
                c_hf: params.c_hf(),
                max_imag: 0.0,
                normalized: false,
                c0: 0.0,
                time_mean: 0.0,
            };
            CorrelationSeries::from_complex(*grid, baseline, &values, meta)
        })
        .collect())
}

/// CCE-M correlation of a bath.
pub fn cce_correlation(
    bath: &BathRealization,
    set: &ClusterSet,
    params: &EffectiveParams,
    mask: TermMask,
    grid: &TimeGrid,
    order: usize,
) -> Result<CorrelationSeries> {
    let mut out = cce_correlation_orders(bath, set, params, mask, grid, &[order])?;
    Ok(out.remove(0))
}

/// Irreducible contribution C̃_ζ of cluster `k` of the set.
pub fn irreducible_correlation(
    k: usize,
    bath: &BathRealization,
    set: &ClusterSet,
    params: &EffectiveParams,
    mask: TermMask,
    grid: &TimeGrid,
) -> Result<Vec<C64>> {
    let mut out = vec![C64::new(0.0, 0.0); grid.samples];
    for (idx, coef) in set.irreducible_expansion(k) {
        cluster_spectrum(set.cluster(idx), bath, params, mask)?.accumulate(
            grid,
            bath.a_bar,
            coef as f64,
            &mut out,
        );
    }
    Ok(out)
}

/// Whole-bath correlation by full diagonalization (reference for small N).
pub fn exact_bath_correlation(
    bath: &BathRealization,
    params: &EffectiveParams,
    mask: TermMask,
    grid: &TimeGrid,
) -> Result<CorrelationSeries> {
    if bath.is_empty() {
        return Err(Error::EmptyBath);
    }
    let d = bath.species.spin.dim();
    let dim = (d as f64).powi(bath.len() as i32);
    if dim > EXACT_DIM_CAP as f64 {
        return Err(Error::DimensionCap {
            dim: dim.min(usize::MAX as f64) as usize,
            cap: EXACT_DIM_CAP,
        });
    }
    let all: Vec<usize> = (0..bath.len()).collect();
    let spec = cluster_spectrum(&all, bath, params, mask)?;
    let mut values = vec![C64::new(0.0, 0.0); grid.samples];
    spec.accumulate_oscillating(grid, bath.a_bar, 1.0, &mut values);
    let meta = SeriesMeta {
        a_bar: bath.a_bar,
        source: SeriesSource::Exact,
        mask,
        c_hf: params.c_hf(),
        max_imag: 0.0,
        normalized: false,
        c0: 0.0,
        time_mean: 0.0,
    };
    Ok(CorrelationSeries::from_complex(
        *grid,
        spec.constant,
        &values,
        meta,
    ))
}
