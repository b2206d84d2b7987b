//! Two-column text export of a [`CorrelationSeries`]: a `#` metadata block
//! of `key = value` lines, then `t̄ value` rows with 17 significant digits.
//! The value column excludes `baseline`, which is zero for normalized C̄.

use std::io::{BufRead, Write};

use super::{CorrelationSeries, SeriesMeta, SeriesSource, TimeGrid};
use crate::lattice::fmt17;
use crate::{Error, Result};

impl CorrelationSeries {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let m = &self.meta;
        let source = match m.source {
            SeriesSource::Cce { order } => format!("cce-{order}"),
            SeriesSource::Exact => "exact".to_string(),
            SeriesSource::External => "external".to_string(),
        };
        writeln!(w, "# spinbeat correlation series")?;
        writeln!(w, "# source = {source}")?;
        writeln!(w, "# mask = {}", m.mask)?;
        writeln!(w, "# a_bar = {}", fmt17(m.a_bar))?;
        writeln!(w, "# c_hf = {}", fmt17(m.c_hf))?;
        writeln!(w, "# baseline = {}", fmt17(self.baseline))?;
        writeln!(w, "# normalized = {}", m.normalized)?;
        writeln!(w, "# c0 = {}", fmt17(m.c0))?;
        writeln!(w, "# time_mean = {}", fmt17(m.time_mean))?;
        writeln!(w, "# max_imag = {}", fmt17(m.max_imag))?;
        writeln!(w, "# dt = {}", fmt17(self.grid.dt))?;
        writeln!(w, "# samples = {}", self.grid.samples)?;
        writeln!(w, "# columns = t_bar value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(w, "{} {}", fmt17(self.grid.time(k)), fmt17(*v))?;
        }
        Ok(())
    }

    /// Reads the format written by [`CorrelationSeries::write_to`]. The time
    /// grid is rebuilt from `dt` and `samples`; the time column is checked
    /// against it.
    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut meta = SeriesMeta::external(1.0);
        let mut baseline = 0.0;
        let mut dt = None;
        let mut samples = None;
        let mut values = Vec::new();
        for (n, line) in r.lines().enumerate() {
            let line = line?;
            let line_no = n + 1;
            let err = |reason: String| Error::Parse {
                line: line_no,
                reason,
            };
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix('#') {
                let Some((key, value)) = rest.split_once('=') else {
                    continue;
                };
                let (key, value) = (key.trim(), value.trim());
                let num = || value.parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
                match key {
                    "source" => {
                        meta.source = match value {
                            "exact" => SeriesSource::Exact,
                            v => match v.strip_prefix("cce-").and_then(|o| o.parse().ok()) {
                                Some(order) => SeriesSource::Cce { order },
                                None => SeriesSource::External,
                            },
                        }
                    }
                    "mask" => meta.mask = value.parse().map_err(|e: Error| err(e.to_string()))?,
                    "a_bar" => meta.a_bar = num()?,
                    "c_hf" => meta.c_hf = num()?,
                    "baseline" => baseline = num()?,
                    "normalized" => meta.normalized = value == "true",
                    "c0" => meta.c0 = num()?,
                    "time_mean" => meta.time_mean = num()?,
                    "max_imag" => meta.max_imag = num()?,
                    "dt" => dt = Some(num()?),
                    "samples" => {
                        samples = Some(
                            value
                                .parse::<usize>()
                                .map_err(|e| err(format!("samples: {e}")))?,
                        )
                    }
                    _ => {}
                }
                continue;
            }
            let mut cols = trimmed.split_whitespace();
            let (Some(t), Some(v), None) = (cols.next(), cols.next(), cols.next()) else {
                return Err(err("expected two columns".into()));
            };
            let t: f64 = t.parse().map_err(|e| err(format!("time: {e}")))?;
            let v: f64 = v.parse().map_err(|e| err(format!("value: {e}")))?;
            values.push((line_no, t, v));
        }
        let dt = dt.ok_or(Error::Parse {
            line: 0,
            reason: "missing `dt` header".into(),
        })?;
        let samples = samples.unwrap_or(values.len());
        if samples != values.len() {
            return Err(Error::Parse {
                line: 0,
                reason: format!("header says {samples} samples, found {}", values.len()),
            });
        }
        let grid = TimeGrid::new(dt, samples)?;
        for (k, &(line, t, _)) in values.iter().enumerate() {
            if (t - grid.time(k)).abs() > 1e-9 * grid.duration().max(dt) {
                return Err(Error::Parse {
                    line,
                    reason: format!("time {t} off the uniform grid"),
                });
            }
        }
        Ok(CorrelationSeries {
            grid,
            baseline,
            values: values.into_iter().map(|(_, _, v)| v).collect(),
            meta,
        })
    }
}
