//! Flat `key = value` run configuration. `#` starts a comment; unknown or
//! repeated keys are rejected; every error names the offending key.

use std::collections::BTreeMap;
use std::path::PathBuf;

use spinbeat_core::constants::{A0_DIAMOND, A0_SILICON, GAMMA_C13, GAMMA_SI29};
use spinbeat_core::hamiltonian::{EffectiveParams, TermMask};
use spinbeat_core::lattice::{
    axis_from_angles, miller_direction, LatticeSpec, SiteSelection, SpeciesParams, Vec3,
};
use spinbeat_core::spinops::Spin;
use spinbeat_core::tfa::{BumpParams, ScaleRange, DEFAULT_SST_GAMMA};

use crate::ConfigError;

/// Environment variable that overrides the `output` key.
pub const OUTPUT_ENV: &str = "SPINBEAT_OUTPUT_DIR";

pub const KEYS: &[&str] = &[
    "lattice",
    "a0",
    "box",
    "spin",
    "gamma",
    "L0",
    "A0_over_Edd",
    "abundance",
    "seed",
    "sites",
    "realization",
    "hf_axis",
    "cce_order",
    "rc",
    "mask",
    "secular",
    "c_hf",
    "t_max",
    "samples",
    "mu",
    "sigma",
    "voices",
    "sst_gamma",
    "omega_min",
    "omega_max",
    "zero_pad",
    "output",
    "long_table",
    "long_table_stride",
    "orders",
    "reference",
    "deviation_window",
    "axes",
    "channels",
];

/// Hyperfine axis as written in the config.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AxisSpec {
    Miller(i32, i32, i32),
    /// Polar and azimuthal angles in degrees, crystal frame.
    Angles {
        theta: f64,
        phi: f64,
    },
}

impl AxisSpec {
    pub fn vector(&self) -> Vec3 {
        match *self {
            AxisSpec::Miller(h, k, l) => {
                miller_direction(h, k, l).expect("validated at parse time")
            }
            AxisSpec::Angles { theta, phi } => axis_from_angles(theta, phi),
        }
    }

    /// File-name friendly label, e.g. `111` or `t54.7_p45`.
    pub fn label(&self) -> String {
        match *self {
            AxisSpec::Miller(h, k, l) => format!("{h}{k}{l}").replace('-', "m"),
            AxisSpec::Angles { theta, phi } => format!("t{theta}_p{phi}"),
        }
    }
}

impl std::fmt::Display for AxisSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            AxisSpec::Miller(h, k, l) => write!(f, "[{h}{k}{l}]"),
            AxisSpec::Angles { theta, phi } => write!(f, "{theta},{phi}"),
        }
    }
}

/// `[111]`, `[1-10]` or `theta,phi` in degrees.
pub fn parse_axis(s: &str) -> Result<AxisSpec, String> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
        let mut digits = Vec::new();
        let mut neg = false;
        for ch in inner.chars() {
            match ch {
                '-' if !neg => neg = true,
                c if c.is_ascii_digit() => {
                    let d = c.to_digit(10).unwrap() as i32;
                    digits.push(if neg { -d } else { d });
                    neg = false;
                }
                c if c.is_whitespace() => {}
                _ => return Err(format!("bad Miller direction `{s}`")),
            }
        }
        if digits.len() != 3 || neg {
            return Err(format!("Miller direction `{s}` needs three indices"));
        }
        miller_direction(digits[0], digits[1], digits[2]).map_err(|e| e.to_string())?;
        return Ok(AxisSpec::Miller(digits[0], digits[1], digits[2]));
    }
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("`{s}` is neither [hkl] nor theta,phi"));
    }
    let theta: f64 = parts[0]
        .parse()
        .map_err(|e| format!("theta `{}`: {e}", parts[0]))?;
    let phi: f64 = parts[1]
        .parse()
        .map_err(|e| format!("phi `{}`: {e}", parts[1]))?;
    if !(theta.is_finite() && phi.is_finite()) {
        return Err("angles must be finite".into());
    }
    Ok(AxisSpec::Angles { theta, phi })
}

#[derive(Debug, Clone, PartialEq)]
pub enum BathSource {
    Generate(LatticeSpec),
    /// A realization file written by `generate-bath`.
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    HighestOrder,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bath: BathSource,
    /// `None`: [001] for generated baths, the file's axis for loaded ones.
    pub hf_axis: Option<AxisSpec>,
    pub cce_order: usize,
    /// Cluster cutoff in units of a0.
    pub rc: f64,
    pub mask: TermMask,
    pub params: EffectiveParams,
    pub t_max: f64,
    pub samples: usize,
    pub analysis: AnalysisConfig,
    pub output: PathBuf,
    pub orders: Vec<usize>,
    pub reference: Reference,
    pub deviation_window: Option<(f64, f64)>,
    pub axes: Vec<AxisSpec>,
    pub channels: bool,
    /// Every key with its resolved value, defaults included.
    pub echo: BTreeMap<String, String>,
}

impl RunConfig {
    /// Output directory after the environment override.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.clone(),
        }
    }
}

fn err(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    }
}

struct Raw {
    map: BTreeMap<String, String>,
    echo: BTreeMap<String, String>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn num<T: std::str::FromStr>(
        &mut self,
        key: &str,
        default: Option<T>,
    ) -> Result<Option<T>, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.take(key) {
            Some(v) => {
                let parsed = v
                    .parse::<T>()
                    .map_err(|e| err(key, format!("`{v}`: {e}")))?;
                self.echo.insert(key.into(), v);
                Ok(Some(parsed))
            }
            None => Ok(default),
        }
    }

    fn positive(&mut self, key: &str, default: Option<f64>) -> Result<Option<f64>, ConfigError> {
        let v = self.num::<f64>(key, default)?;
        if let Some(x) = v {
            if !(x > 0.0 && x.is_finite()) {
                return Err(err(key, format!("{x} must be positive")));
            }
            self.echo.entry(key.into()).or_insert_with(|| x.to_string());
        }
        Ok(v)
    }

    fn flag(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let v = match self.take(key).as_deref() {
            None => default,
            Some("true" | "yes" | "on" | "1") => true,
            Some("false" | "no" | "off" | "0") => false,
            Some(other) => return Err(err(key, format!("`{other}` is not a boolean"))),
        };
        self.echo.insert(key.into(), v.to_string());
        Ok(v)
    }

    fn required<T>(&self, key: &str, v: Option<T>) -> Result<T, ConfigError> {
        v.ok_or_else(|| err(key, "missing required key"))
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| err(key, format!("`{s}`: {e}"))))
        .collect()
}

fn parse_spin(key: &str, v: &str) -> Result<Spin, ConfigError> {
    let value = match v.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n
                .trim()
                .parse()
                .map_err(|e| err(key, format!("`{v}`: {e}")))?;
            let d: f64 = d
                .trim()
                .parse()
                .map_err(|e| err(key, format!("`{v}`: {e}")))?;
            n / d
        }
        None => v.parse().map_err(|e| err(key, format!("`{v}`: {e}")))?,
    };
    Spin::new(value).map_err(|e| err(key, e.to_string()))
}

/// Splits the text into key/value pairs, rejecting unknown and repeated keys.
fn tokenize(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(err(line, format!("line {}: expected `key = value`", n + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(err(k, format!("line {}: unknown key", n + 1)));
        }
        if v.is_empty() {
            return Err(err(k, format!("line {}: empty value", n + 1)));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(err(k, format!("line {}: repeated key", n + 1)));
        }
    }
    Ok(map)
}

/// Parses and validates a configuration, filling defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw {
        map: tokenize(text)?,
        echo: BTreeMap::new(),
    };

    let bath = parse_bath(&mut raw)?;

    let hf_axis = match raw.take("hf_axis") {
        Some(v) => Some(parse_axis(&v).map_err(|e| err("hf_axis", e))?),
        None => None,
    };
    let axis_echo = match (&hf_axis, &bath) {
        (Some(a), _) => a.to_string(),
        (None, BathSource::Generate(_)) => "[001]".into(),
        (None, BathSource::File(_)) => "from realization".into(),
    };
    raw.echo.insert("hf_axis".into(), axis_echo);

    let cce_order = raw.num::<usize>("cce_order", None)?;
    let cce_order = raw.required("cce_order", cce_order)?;
    if !(1..=6).contains(&cce_order) {
        return Err(err("cce_order", format!("{cce_order} outside 1..=6")));
    }
    let rc = raw.positive("rc", Some(2.5))?.unwrap();

    let secular = raw.flag("secular", false)?;
    let mask = match raw.take("mask") {
        Some(v) => {
            let m: TermMask = v
                .parse()
                .map_err(|e: spinbeat_core::Error| err("mask", e.to_string()))?;
            if secular && m != TermMask::SECULAR {
                return Err(err("mask", format!("`{v}` conflicts with secular = true")));
            }
            m
        }
        None if secular => TermMask::SECULAR,
        None => TermMask::FULL,
    };
    raw.echo.insert("mask".into(), mask.to_string());

    let c_hf = raw.num::<f64>("c_hf", Some(0.5))?.unwrap();
    let params = EffectiveParams::with_c_hf(c_hf).map_err(|e| err("c_hf", e.to_string()))?;
    raw.echo.insert("c_hf".into(), c_hf.to_string());

    let t_max = raw.positive("t_max", Some(200.0))?.unwrap();
    let samples = raw.num::<usize>("samples", Some(4096))?.unwrap();
    if samples < 16 {
        return Err(err("samples", format!("{samples} is too few (minimum 16)")));
    }
    raw.echo.insert("samples".into(), samples.to_string());

    let analysis = parse_analysis(&mut raw)?;
    let output = parse_output(&mut raw);

    let orders = match raw.take("orders") {
        Some(v) => {
            let o: Vec<usize> = parse_list("orders", &v)?;
            raw.echo.insert("orders".into(), v);
            o
        }
        None => Vec::new(),
    };
    let reference = match raw.take("reference").as_deref() {
        None | Some("highest") => Reference::HighestOrder,
        Some("exact") => Reference::Exact,
        Some(other) => {
            return Err(err(
                "reference",
                format!("`{other}` is not `highest` or `exact`"),
            ))
        }
    };
    let label = if reference == Reference::Exact {
        "exact"
    } else {
        "highest"
    };
    raw.echo.insert("reference".into(), label.into());
    let deviation_window = match raw.take("deviation_window") {
        Some(v) => {
            let w: Vec<f64> = parse_list("deviation_window", &v)?;
            if w.len() != 2 || !(w[0] < w[1]) || w[0] < 0.0 {
                return Err(err(
                    "deviation_window",
                    "expected `from, to` with 0 <= from < to",
                ));
            }
            raw.echo.insert("deviation_window".into(), v);
            Some((w[0], w[1]))
        }
        None => None,
    };
    let axes = match raw.take("axes") {
        Some(v) => {
            let a = v
                .split(';')
                .map(|s| parse_axis(s).map_err(|e| err("axes", e)))
                .collect::<Result<Vec<_>, _>>()?;
            raw.echo.insert("axes".into(), v);
            a
        }
        None => Vec::new(),
    };
    let channels = raw.flag("channels", false)?;

    debug_assert!(raw.map.is_empty(), "unconsumed keys: {:?}", raw.map.keys());
    Ok(RunConfig {
        bath,
        hf_axis,
        cce_order,
        rc,
        mask,
        params,
        t_max,
        samples,
        analysis,
        output,
        orders,
        reference,
        deviation_window,
        axes,
        channels,
        echo: raw.echo,
    })
}

/// Settings of the time-frequency stage.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub bump: BumpParams,
    pub sst_gamma: f64,
    /// Explicit wavelet center-frequency bounds; the other bound, or
    /// both, default to [`ScaleRange::auto`] for the analyzed grid.
    pub omega_min: Option<f64>,
    pub omega_max: Option<f64>,
    pub zero_pad: usize,
    pub long_table: bool,
    pub long_table_stride: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bump: BumpParams::default(),
            sst_gamma: DEFAULT_SST_GAMMA,
            omega_min: None,
            omega_max: None,
            zero_pad: 4,
            long_table: false,
            long_table_stride: 1,
        }
    }
}

impl AnalysisConfig {
    pub fn scale_range(&self, dt: f64, samples: usize) -> ScaleRange {
        let auto = ScaleRange::auto(dt, samples);
        ScaleRange {
            omega_min: self.omega_min.unwrap_or(auto.omega_min),
            omega_max: self.omega_max.unwrap_or(auto.omega_max),
        }
    }
}

const ANALYSIS_KEYS: &[&str] = &[
    "mu",
    "sigma",
    "voices",
    "sst_gamma",
    "omega_min",
    "omega_max",
    "zero_pad",
    "long_table",
    "long_table_stride",
    "output",
];

/// Configuration for `analyze`: only the analysis keys and `output`.
pub fn parse_analysis_config(
    text: &str,
) -> Result<(AnalysisConfig, PathBuf, BTreeMap<String, String>), ConfigError> {
    let map = tokenize(text)?;
    if let Some(k) = map.keys().find(|k| !ANALYSIS_KEYS.contains(&k.as_str())) {
        return Err(err(k, "not used when analyzing an existing series"));
    }
    let mut raw = Raw {
        map,
        echo: BTreeMap::new(),
    };
    let analysis = parse_analysis(&mut raw)?;
    let output = parse_output(&mut raw);
    Ok((analysis, output, raw.echo))
}

fn parse_output(raw: &mut Raw) -> PathBuf {
    let output = PathBuf::from(raw.take("output").unwrap_or_else(|| "spinbeat-out".into()));
    raw.echo
        .insert("output".into(), output.display().to_string());
    output
}

fn parse_analysis(raw: &mut Raw) -> Result<AnalysisConfig, ConfigError> {
    let mu = raw.positive("mu", Some(5.0))?.unwrap();
    let sigma = raw.positive("sigma", Some(0.6))?.unwrap();
    let voices = raw.num::<usize>("voices", Some(32))?.unwrap();
    raw.echo.insert("voices".into(), voices.to_string());
    let bump = BumpParams::new(mu, sigma, voices).map_err(|e| match e {
        spinbeat_core::Error::InvalidParameter { name, reason } => err(name, reason),
        other => err("mu", other.to_string()),
    })?;
    let sst_gamma = raw
        .num::<f64>("sst_gamma", Some(DEFAULT_SST_GAMMA))?
        .unwrap();
    if !(sst_gamma >= 0.0 && sst_gamma.is_finite()) {
        return Err(err(
            "sst_gamma",
            format!("{sst_gamma} must be non-negative"),
        ));
    }
    raw.echo.insert("sst_gamma".into(), sst_gamma.to_string());
    let omega_min = raw.positive("omega_min", None)?;
    let omega_max = raw.positive("omega_max", None)?;
    if let (Some(lo), Some(hi)) = (omega_min, omega_max) {
        if lo > hi {
            return Err(err("omega_min", "must not exceed omega_max"));
        }
    }
    let zero_pad = raw.num::<usize>("zero_pad", Some(4))?.unwrap();
    if zero_pad == 0 {
        return Err(err("zero_pad", "must be at least 1"));
    }
    raw.echo.insert("zero_pad".into(), zero_pad.to_string());

    let long_table = raw.flag("long_table", false)?;
    let long_table_stride = raw.num::<usize>("long_table_stride", Some(1))?.unwrap();
    if long_table_stride == 0 {
        return Err(err("long_table_stride", "must be at least 1"));
    }
    raw.echo
        .insert("long_table_stride".into(), long_table_stride.to_string());

    Ok(AnalysisConfig {
        bump,
        sst_gamma,
        omega_min,
        omega_max,
        zero_pad,
        long_table,
        long_table_stride,
    })
}

const LATTICE_KEYS: &[&str] = &[
    "lattice",
    "a0",
    "box",
    "spin",
    "gamma",
    "L0",
    "A0_over_Edd",
    "abundance",
    "seed",
    "sites",
];

fn parse_bath(raw: &mut Raw) -> Result<BathSource, ConfigError> {
    if let Some(path) = raw.take("realization") {
        if let Some(k) = LATTICE_KEYS.iter().find(|k| raw.map.contains_key(**k)) {
            return Err(err(k, "cannot be combined with `realization`"));
        }
        raw.echo.insert("realization".into(), path.clone());
        return Ok(BathSource::File(PathBuf::from(path)));
    }
    let lattice = raw.take("lattice");
    let lattice = raw.required("lattice", lattice)?;
    let (a0_default, gamma_default) = match lattice.as_str() {
        "silicon" => (A0_SILICON, GAMMA_SI29),
        "diamond" => (A0_DIAMOND, GAMMA_C13),
        other => {
            return Err(err(
                "lattice",
                format!("`{other}` is not `silicon` or `diamond`"),
            ))
        }
    };
    raw.echo.insert("lattice".into(), lattice);
    let a0 = raw.positive("a0", Some(a0_default * 1e10))?.unwrap() * 1e-10;
    let box_dims = match raw.take("box") {
        Some(v) => {
            let d: Vec<usize> = parse_list("box", &v.replace('x', " "))?;
            if d.len() != 3 || d.contains(&0) {
                return Err(err("box", format!("`{v}` needs three positive integers")));
            }
            [d[0], d[1], d[2]]
        }
        None => [10, 10, 7],
    };
    raw.echo.insert(
        "box".into(),
        format!("{} {} {}", box_dims[0], box_dims[1], box_dims[2]),
    );
    let spin = match raw.take("spin") {
        Some(v) => parse_spin("spin", &v)?,
        None => Spin::HALF,
    };
    raw.echo.insert("spin".into(), spin.to_string());
    let gamma = raw.num::<f64>("gamma", Some(gamma_default))?.unwrap();
    if !(gamma != 0.0 && gamma.is_finite()) {
        return Err(err("gamma", "must be finite and nonzero"));
    }
    raw.echo.insert("gamma".into(), gamma.to_string());
    let l0 = raw.positive("L0", Some(3.4))?.unwrap() * 1e-9;
    let ratio = raw.positive("A0_over_Edd", Some(1e4))?.unwrap();
    let species = SpeciesParams::with_peak_ratio(spin, gamma, l0, ratio, a0)
        .map_err(|e| err("A0_over_Edd", e.to_string()))?;

    let seed = raw.num::<u64>("seed", None)?;
    let sites = match raw.take("sites") {
        Some(v) => {
            if seed.is_some() {
                return Err(err("sites", "cannot be combined with `seed`"));
            }
            let list: Vec<usize> = parse_list("sites", &v)?;
            let total = 8 * box_dims.iter().product::<usize>();
            if let Some(bad) = list.iter().find(|&&i| i >= total) {
                return Err(err(
                    "sites",
                    format!("index {bad} outside the {total}-site box"),
                ));
            }
            raw.echo.insert("sites".into(), v);
            Some(SiteSelection::Explicit(list))
        }
        None => None,
    };
    let abundance = raw.num::<f64>("abundance", None)?;
    let (abundance, sites) = match sites {
        Some(s) => (abundance.unwrap_or(0.0), s),
        None => {
            let rho = raw.required("abundance", abundance)?;
            let seed = seed.unwrap_or(1);
            raw.echo.insert("seed".into(), seed.to_string());
            (rho, SiteSelection::Seeded(seed))
        }
    };
    if !(0.0..=1.0).contains(&abundance) {
        return Err(err("abundance", format!("{abundance} outside [0, 1]")));
    }
    raw.echo.insert("abundance".into(), abundance.to_string());
    Ok(BathSource::Generate(LatticeSpec {
        lattice_constant: a0,
        box_dims,
        species,
        abundance,
        sites,
    }))
}
