use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use spinbeat_core::cce::{
    cce_correlation, cce_correlation_orders, enumerate_clusters, exact_bath_correlation,
    CorrelationSeries, TimeGrid,
};
use spinbeat_core::hamiltonian::TermMask;
use spinbeat_core::lattice::BathRealization;
use spinbeat_core::tfa::{
    band_amplitude, cwt_bump, normalize_correlation, power_spectrum, synchrosqueeze,
    write_long_table, write_modulus_binary, write_sidecar, Scalogram, Spectrum, SstMap,
    DEFAULT_BANDS,
};
use spinbeat_core::Error;

use crate::config::{AnalysisConfig, AxisSpec, BathSource, Reference, RunConfig};
use crate::manifest::{Derived, Recorder, RunManifest};
use crate::CliError;

/// |ΔC̄| level whose first crossing is reported by [`compare_orders`].
const DEVIATION_MARK: f64 = 0.05;

pub struct BandTrace {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// `None` when no analyzed frequency falls inside the band.
    pub amplitude: Option<Vec<f64>>,
}

pub struct Analysis {
    pub spectrum: Spectrum,
    pub cwt: Scalogram,
    pub sst: SstMap,
    pub bands: Vec<BandTrace>,
}

impl Analysis {
    fn unresolved(&self) -> Vec<String> {
        self.bands
            .iter()
            .filter(|b| b.amplitude.is_none())
            .map(|b| b.name.clone())
            .collect()
    }
}

pub fn load_bath(cfg: &RunConfig) -> Result<BathRealization, CliError> {
    let bath = match &cfg.bath {
        BathSource::Generate(spec) => {
            let axis = cfg.hf_axis.unwrap_or(AxisSpec::Miller(0, 0, 1)).vector();
            BathRealization::generate(spec, axis)
        }
        BathSource::File(path) => {
            let f =
                File::open(path).map_err(CliError::io(format!("opening {}", path.display())))?;
            BathRealization::read_from(BufReader::new(f)).and_then(|b| match cfg.hf_axis {
                Some(axis) => b.with_hf_axis(axis.vector()),
                None => Ok(b),
            })
        }
    };
    bath.map_err(CliError::stage("bath"))
}

fn bath_derived(bath: &BathRealization) -> Derived {
    let axis = bath.hf_axis();
    Derived {
        n_spinful: Some(bath.len()),
        a_bar: Some(bath.a_bar),
        sigma_hf: Some(bath.sigma_hf),
        e_dd: Some(bath.e_dd),
        hf_axis: Some([axis.x, axis.y, axis.z]),
        ..Derived::default()
    }
}

/// Raw CCE correlation of the configured order (clamped to the bath size)
/// and the cluster counts by size.
pub fn simulate_series(
    cfg: &RunConfig,
    bath: &BathRealization,
    mask: TermMask,
) -> Result<(CorrelationSeries, Vec<usize>), CliError> {
    let stage = CliError::stage;
    let grid = TimeGrid::spanning(cfg.t_max, cfg.samples).map_err(stage("cce"))?;
    let set = enumerate_clusters(bath, cfg.rc * bath.lattice_constant, cfg.cce_order)
        .map_err(stage("cce"))?;
    let series = cce_correlation(bath, &set, &cfg.params, mask, &grid, set.max_order())
        .map_err(stage("cce"))?;
    Ok((series, set.counts_by_size()))
}

/// Spectrum, scalogram, synchrosqueezed map and default band traces of a
/// normalized series.
pub fn analyze(a: &AnalysisConfig, series: &CorrelationSeries) -> Result<Analysis, CliError> {
    let stage = CliError::stage;
    let dt = series.grid.dt;
    let spectrum = power_spectrum(&series.values, dt, a.zero_pad).map_err(stage("spectrum"))?;
    let range = a.scale_range(dt, series.len());
    let cwt = cwt_bump(&series.values, dt, &a.bump, &range).map_err(stage("cwt"))?;
    let sst = synchrosqueeze(&cwt, a.sst_gamma).map_err(stage("sst"))?;
    let mut bands = Vec::new();
    for (name, lo, hi) in DEFAULT_BANDS {
        let amplitude = match band_amplitude(&sst, lo, hi) {
            Ok(v) => Some(v),
            Err(Error::EmptyBand { .. }) => None,
            Err(e) => return Err(stage("bands")(e)),
        };
        bands.push(BandTrace {
            name: name.to_string(),
            lo,
            hi,
            amplitude,
        });
    }
    Ok(Analysis {
        spectrum,
        cwt,
        sst,
        bands,
    })
}

fn to_bytes(
    f: impl FnOnce(&mut Vec<u8>) -> spinbeat_core::Result<()>,
) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(CliError::stage("write"))?;
    Ok(buf)
}

fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

fn spectrum_bytes(s: &Spectrum, title: &str) -> Vec<u8> {
    let mut out = format!("# {title}\n# columns = omega_bar power\n");
    for (w, p) in s.omega_bar.iter().zip(&s.power) {
        out.push_str(&format!("{} {}\n", f17(*w), f17(*p)));
    }
    out.into_bytes()
}

fn bands_bytes(a: &Analysis) -> Vec<u8> {
    let mut out =
        String::from("# spinbeat band amplitudes: per-sample sum of |SST| over each band\n");
    let resolved: Vec<&BandTrace> = a.bands.iter().filter(|b| b.amplitude.is_some()).collect();
    for b in &a.bands {
        let tag = if b.amplitude.is_some() {
            "band"
        } else {
            "unresolved"
        };
        out.push_str(&format!("# {tag} {} = [{}, {}]\n", b.name, b.lo, b.hi));
    }
    out.push_str("# columns = t_bar");
    for b in &resolved {
        out.push(' ');
        out.push_str(&b.name);
    }
    out.push('\n');
    for (k, t) in a.sst.times.iter().enumerate() {
        out.push_str(&f17(*t));
        for b in &resolved {
            out.push(' ');
            out.push_str(&f17(b.amplitude.as_ref().unwrap()[k]));
        }
        out.push('\n');
    }
    out.into_bytes()
}

fn write_analysis(
    rec: &mut Recorder,
    dir: &str,
    a: &Analysis,
    cfg: &AnalysisConfig,
) -> Result<(), CliError> {
    let path = |f: &str| {
        if dir.is_empty() {
            f.to_string()
        } else {
            format!("{dir}/{f}")
        }
    };
    rec.write(
        &path("spectrum.txt"),
        &spectrum_bytes(&a.spectrum, "power spectrum of the normalized correlation"),
    )?;
    rec.write(
        &path("cwt.bin"),
        &to_bytes(|b| write_modulus_binary(&a.cwt, b))?,
    )?;
    rec.write(
        &path("cwt.txt"),
        &to_bytes(|b| write_sidecar(&a.cwt, "cwt.bin", b))?,
    )?;
    rec.write(
        &path("sst.bin"),
        &to_bytes(|b| write_modulus_binary(&a.sst, b))?,
    )?;
    rec.write(
        &path("sst.txt"),
        &to_bytes(|b| write_sidecar(&a.sst, "sst.bin", b))?,
    )?;
    rec.write(&path("bands.txt"), &bands_bytes(a))?;
    if cfg.long_table {
        let stride = cfg.long_table_stride;
        rec.write(
            &path("cwt_long.txt"),
            &to_bytes(|b| write_long_table(&a.cwt, stride, b))?,
        )?;
        rec.write(
            &path("sst_long.txt"),
            &to_bytes(|b| write_long_table(&a.sst, stride, b))?,
        )?;
    }
    Ok(())
}

fn write_realization(rec: &mut Recorder, bath: &BathRealization) -> Result<(), CliError> {
    rec.write("realization.csv", &to_bytes(|b| bath.write_to(b))?)
}

fn normalize(series: &CorrelationSeries) -> Result<CorrelationSeries, CliError> {
    normalize_correlation(series).map_err(CliError::stage("normalize"))
}

/// `generate-bath`: the realization file only.
pub fn generate_bath(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut rec = Recorder::new(&cfg.output_dir())?;
    let bath = load_bath(cfg)?;
    rec.lap("bath");
    write_realization(&mut rec, &bath)?;
    rec.lap("write");
    rec.finish("generate-bath", cfg.echo.clone(), bath_derived(&bath))
}

/// `simulate`: realization plus raw and normalized correlation series.
pub fn simulate(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut rec = Recorder::new(&cfg.output_dir())?;
    let bath = load_bath(cfg)?;
    rec.lap("bath");
    let (raw, counts) = simulate_series(cfg, &bath, cfg.mask)?;
    rec.lap("cce");
    let norm = normalize(&raw)?;
    write_realization(&mut rec, &bath)?;
    rec.write("correlation_raw.txt", &to_bytes(|b| raw.write_to(b))?)?;
    rec.write("correlation.txt", &to_bytes(|b| norm.write_to(b))?)?;
    rec.lap("write");
    let derived = Derived {
        cluster_counts: Some(counts),
        ..bath_derived(&bath)
    };
    rec.finish("simulate", cfg.echo.clone(), derived)
}

/// `run`: every stage, every product.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunManifest, CliError> {
    let mut rec = Recorder::new(&cfg.output_dir())?;
    let bath = load_bath(cfg)?;
    rec.lap("bath");
    let (raw, counts) = simulate_series(cfg, &bath, cfg.mask)?;
    rec.lap("cce");
    let norm = normalize(&raw)?;
    let analysis = analyze(&cfg.analysis, &norm)?;
    rec.lap("tfa");
    write_realization(&mut rec, &bath)?;
    rec.write("correlation_raw.txt", &to_bytes(|b| raw.write_to(b))?)?;
    rec.write("correlation.txt", &to_bytes(|b| norm.write_to(b))?)?;
    write_analysis(&mut rec, "", &analysis, &cfg.analysis)?;
    rec.lap("write");
    let derived = Derived {
        cluster_counts: Some(counts),
        unresolved_bands: analysis.unresolved(),
        ..bath_derived(&bath)
    };
    rec.finish("run", cfg.echo.clone(), derived)
}

/// `analyze`: time-frequency products of an exported series. Normalized
/// input is used as is, so the products match those of `run` bit for bit.
pub fn analyze_file(
    a: &AnalysisConfig,
    echo: BTreeMap<String, String>,
    output: &Path,
    input: &Path,
) -> Result<RunManifest, CliError> {
    let mut rec = Recorder::new(output)?;
    let f = File::open(input).map_err(CliError::io(format!("opening {}", input.display())))?;
    let series =
        CorrelationSeries::read_from(BufReader::new(f)).map_err(CliError::stage("load"))?;
    let norm = if series.meta.normalized {
        series
    } else {
        normalize(&series)?
    };
    rec.lap("load");
    let analysis = analyze(a, &norm)?;
    rec.lap("tfa");
    write_analysis(&mut rec, "", &analysis, a)?;
    rec.lap("write");
    let mut echo = echo;
    echo.insert("input".into(), input.display().to_string());
    let derived = Derived {
        unresolved_bands: analysis.unresolved(),
        ..Derived::default()
    };
    rec.finish("analyze", echo, derived)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderDeviation {
    pub order: usize,
    /// Order actually evaluated (the request clamped to the bath size).
    pub effective_order: usize,
    pub max_abs: f64,
    pub rms: f64,
    /// First t̄ in the window where |ΔC̄| exceeds 0.05.
    pub first_exceed: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DeviationReport {
    pub reference: String,
    pub window: (f64, f64),
    pub rows: Vec<OrderDeviation>,
    /// Normalized curves by label (`cce-M`, `exact`).
    pub curves: Vec<(String, CorrelationSeries)>,
}

impl DeviationReport {
    fn table(&self) -> String {
        let mut out = format!(
            "# deviation of normalized correlation from {} over t_bar in [{}, {}]\n# columns = order max_abs rms first_t_bar_above_{DEVIATION_MARK}\n",
            self.reference, self.window.0, self.window.1
        );
        for r in &self.rows {
            let first = r.first_exceed.map_or_else(|| "none".to_string(), f17);
            out.push_str(&format!(
                "{} {} {} {}\n",
                r.order,
                f17(r.max_abs),
                f17(r.rms),
                first
            ));
        }
        out
    }

    fn curves_table(&self) -> String {
        let mut out = String::from("# normalized correlation by order\n# columns = t_bar");
        for (label, _) in &self.curves {
            out.push(' ');
            out.push_str(label);
        }
        out.push('\n');
        let grid = self.curves[0].1.grid;
        for k in 0..grid.samples {
            out.push_str(&f17(grid.time(k)));
            for (_, s) in &self.curves {
                out.push(' ');
                out.push_str(&f17(s.values[k]));
            }
            out.push('\n');
        }
        out
    }
}

fn deviation(
    a: &CorrelationSeries,
    reference: &CorrelationSeries,
    window: (f64, f64),
) -> (f64, f64, Option<f64>) {
    let mut max_abs = 0.0f64;
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut first = None;
    for k in 0..a.len() {
        let t = a.grid.time(k);
        if t < window.0 || t > window.1 {
            continue;
        }
        let d = (a.values[k] - reference.values[k]).abs();
        max_abs = max_abs.max(d);
        sum_sq += d * d;
        count += 1;
        if first.is_none() && d > DEVIATION_MARK {
            first = Some(t);
        }
    }
    (max_abs, (sum_sq / count.max(1) as f64).sqrt(), first)
}

/// `compare-orders`: normalized curves for each order and their deviation
/// from the highest order (or the exact whole-bath result).
pub fn compare_orders(
    cfg: &RunConfig,
    orders: &[usize],
) -> Result<(DeviationReport, RunManifest), CliError> {
    if orders.len() < 2 {
        return Err(CliError::Usage(
            "compare-orders needs at least two orders".into(),
        ));
    }
    if orders.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::Usage(format!(
            "orders {orders:?} must be strictly ascending"
        )));
    }
    if orders[0] == 0 || *orders.last().unwrap() > 6 {
        return Err(CliError::Usage(format!(
            "orders {orders:?} must lie in 1..=6"
        )));
    }
    let stage = CliError::stage;
    let mut rec = Recorder::new(&cfg.output_dir())?;
    let bath = load_bath(cfg)?;
    rec.lap("bath");
    let grid = TimeGrid::spanning(cfg.t_max, cfg.samples).map_err(stage("cce"))?;
    let top = *orders.last().unwrap();
    let set =
        enumerate_clusters(&bath, cfg.rc * bath.lattice_constant, top).map_err(stage("cce"))?;
    let effective: Vec<usize> = orders.iter().map(|&m| m.min(set.max_order())).collect();
    let raw = cce_correlation_orders(&bath, &set, &cfg.params, cfg.mask, &grid, &effective)
        .map_err(stage("cce"))?;
    let mut curves: Vec<(String, CorrelationSeries)> = Vec::new();
    for (m, s) in orders.iter().zip(&raw) {
        curves.push((format!("cce-{m}"), normalize(s)?));
    }
    let (reference_label, reference) = match cfg.reference {
        Reference::HighestOrder => (format!("cce-{top}"), curves.last().unwrap().1.clone()),
        Reference::Exact => {
            let exact = exact_bath_correlation(&bath, &cfg.params, cfg.mask, &grid)
                .map_err(stage("exact"))?;
            let exact = normalize(&exact)?;
            curves.push(("exact".into(), exact.clone()));
            ("exact".to_string(), exact)
        }
    };
    rec.lap("cce");
    let window = cfg.deviation_window.unwrap_or((0.0, grid.duration()));
    let rows = orders
        .iter()
        .zip(&effective)
        .zip(&curves)
        .map(|((&order, &effective_order), (_, s))| {
            let (max_abs, rms, first_exceed) = deviation(s, &reference, window);
            OrderDeviation {
                order,
                effective_order,
                max_abs,
                rms,
                first_exceed,
            }
        })
        .collect();
    let report = DeviationReport {
        reference: reference_label,
        window,
        rows,
        curves,
    };
    write_realization(&mut rec, &bath)?;
    rec.write("orders_curves.txt", report.curves_table().as_bytes())?;
    rec.write("deviation_report.txt", report.table().as_bytes())?;
    rec.lap("write");
    let derived = Derived {
        cluster_counts: Some(set.counts_by_size()),
        ..bath_derived(&bath)
    };
    let manifest = rec.finish("compare-orders", cfg.echo.clone(), derived)?;
    Ok((report, manifest))
}

/// Channel masks for the per-axis decomposition; 𝒜 is always kept since it
/// only shifts levels.
const CHANNELS: [(&str, TermMask); 3] = [
    (
        "B",
        TermMask {
            a: true,
            b: true,
            cd: false,
            ef: false,
        },
    ),
    (
        "CD",
        TermMask {
            a: true,
            b: false,
            cd: true,
            ef: false,
        },
    ),
    (
        "EF",
        TermMask {
            a: true,
            b: false,
            cd: false,
            ef: true,
        },
    ),
];

/// `sweep-axis`: one realization (written once), the full pipeline per
/// axis under `axis<k>_<label>/`, and optionally per-channel spectra scaled
/// by the full run's normalization.
pub fn sweep_hf_axis(cfg: &RunConfig, axes: &[AxisSpec]) -> Result<RunManifest, CliError> {
    if axes.is_empty() {
        return Err(CliError::Usage("sweep-axis needs at least one axis".into()));
    }
    let mut rec = Recorder::new(&cfg.output_dir())?;
    let bath = load_bath(cfg)?;
    write_realization(&mut rec, &bath)?;
    rec.lap("bath");
    let mut counts = None;
    let mut unresolved = Vec::new();
    for (k, axis) in axes.iter().enumerate() {
        let dir = format!("axis{k}_{}", axis.label());
        let rotated = bath
            .with_hf_axis(axis.vector())
            .map_err(CliError::stage("bath"))?;
        let (raw, c) = simulate_series(cfg, &rotated, cfg.mask)?;
        counts.get_or_insert(c);
        let norm = normalize(&raw)?;
        let analysis = analyze(&cfg.analysis, &norm)?;
        rec.write(
            &format!("{dir}/correlation.txt"),
            &to_bytes(|b| norm.write_to(b))?,
        )?;
        write_analysis(&mut rec, &dir, &analysis, &cfg.analysis)?;
        for b in analysis.unresolved() {
            let tag = format!("{dir}:{b}");
            if !unresolved.contains(&tag) {
                unresolved.push(tag);
            }
        }
        if cfg.channels {
            let mean = raw.values.iter().sum::<f64>() / raw.len() as f64;
            let denom = raw.values[0] - mean;
            for (name, mask) in CHANNELS {
                let (ch, _) = simulate_series(cfg, &rotated, mask)?;
                let ch_mean = ch.values.iter().sum::<f64>() / ch.len() as f64;
                let scaled: Vec<f64> = ch.values.iter().map(|v| (v - ch_mean) / denom).collect();
                let spec = power_spectrum(&scaled, ch.grid.dt, cfg.analysis.zero_pad)
                    .map_err(CliError::stage("spectrum"))?;
                let title = format!(
                    "power spectrum of channel {name} (mask {mask}), scaled like the full run"
                );
                rec.write(
                    &format!("{dir}/channel_{name}.txt"),
                    &spectrum_bytes(&spec, &title),
                )?;
            }
        }
        rec.lap(&format!("axis {axis}"));
    }
    let derived = Derived {
        cluster_counts: counts,
        unresolved_bands: unresolved,
        ..bath_derived(&bath)
    };
    rec.finish("sweep-axis", cfg.echo.clone(), derived)
}
