//! Map exports: a little-endian f64 matrix of moduli (row-major,
//! frequency × time), a text sidecar with the grids, and a long-form
//! `omega_bar t_bar modulus` table.

use std::io::Write;

use super::cwt::join;
use super::TimeFrequencyMap;
use crate::lattice::fmt17;
use crate::Result;

pub fn write_modulus_binary<M: TimeFrequencyMap + ?Sized, W: Write>(
    map: &M,
    mut w: W,
) -> Result<()> {
    let c = map.coeffs();
    let mut row = Vec::with_capacity(c.ncols() * 8);
    for r in 0..c.nrows() {
        row.clear();
        for col in 0..c.ncols() {
            row.extend_from_slice(&c[(r, col)].norm().to_le_bytes());
        }
        w.write_all(&row)?;
    }
    Ok(())
}

/// `binary` names the matrix file the sidecar describes.
pub fn write_sidecar<M: TimeFrequencyMap + ?Sized, W: Write>(
    map: &M,
    binary: &str,
    mut w: W,
) -> Result<()> {
    let c = map.coeffs();
    writeln!(w, "# spinbeat time-frequency map")?;
    writeln!(w, "kind = {}", map.kind())?;
    writeln!(w, "matrix = {binary}")?;
    writeln!(w, "layout = row-major f64 little-endian, |coeff|")?;
    writeln!(w, "rows = {}", c.nrows())?;
    writeln!(w, "cols = {}", c.ncols())?;
    for (k, v) in map.metadata() {
        writeln!(w, "{k} = {v}")?;
    }
    writeln!(w, "omega_bar = {}", join(map.frequencies()))?;
    writeln!(w, "t_bar = {}", join(map.times()))?;
    Ok(())
}

/// One line per cell; `stride` > 1 keeps every stride-th time sample.
pub fn write_long_table<M: TimeFrequencyMap + ?Sized, W: Write>(
    map: &M,
    stride: usize,
    mut w: W,
) -> Result<()> {
    let c = map.coeffs();
    writeln!(w, "# omega_bar t_bar modulus")?;
    for (r, f) in map.frequencies().iter().enumerate() {
        for (col, t) in map.times().iter().enumerate().step_by(stride.max(1)) {
            writeln!(
                w,
                "{} {} {}",
                fmt17(*f),
                fmt17(*t),
                fmt17(c[(r, col)].norm())
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tfa::{cwt_bump, BumpParams, ScaleRange};

    #[test]
    fn binary_is_row_major_moduli() {
        let x: Vec<f64> = (0..128).map(|k| (0.9 * k as f64 * 0.2).cos()).collect();
        let s = cwt_bump(
            &x,
            0.2,
            &BumpParams::new(5.0, 0.6, 4).unwrap(),
            &ScaleRange::auto(0.2, 128),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_modulus_binary(&s, &mut buf).unwrap();
        assert_eq!(buf.len(), s.coeffs.nrows() * s.coeffs.ncols() * 8);
        let (r, c) = (2, 17);
        let at = (r * s.coeffs.ncols() + c) * 8;
        let v = f64::from_le_bytes(buf[at..at + 8].try_into().unwrap());
        assert_eq!(v, s.coeffs[(r, c)].norm());

        let mut side = Vec::new();
        write_sidecar(&s, "cwt.bin", &mut side).unwrap();
        let text = String::from_utf8(side).unwrap();
        assert!(text.contains("kind = cwt"));
        assert!(text.contains(&format!("rows = {}", s.coeffs.nrows())));

        let mut table = Vec::new();
        write_long_table(&s, 4, &mut table).unwrap();
        let lines = String::from_utf8(table).unwrap().lines().count();
        assert_eq!(lines, 1 + s.coeffs.nrows() * 32);
    }
}
