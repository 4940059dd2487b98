//! Plain-text snapshots of spectral coefficients.
//!
//! A snapshot is written to `run-<tag>/snap-<step>.csv`. The header holds the
//! grid and physical parameters; each row is
//! `k1,k2,omega_re,omega_im,e1_re,e1_im,e2_re,e2_im,b_re,b_im`.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{EmError, Result};
use crate::solver::NormalEMState;
use crate::spectral::{signed_index, Field, Grid, PhysParams};

pub fn snapshot_path(root: &Path, tag: &str, step: usize) -> PathBuf {
    root.join(format!("run-{tag}"))
        .join(format!("snap-{step:06}.csv"))
}

pub fn write_snapshot(
    root: &Path,
    tag: &str,
    step: usize,
    state: &NormalEMState,
    params: &PhysParams,
) -> Result<PathBuf> {
    let path = snapshot_path(root, tag, step);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let g = state.grid();
    let mut w = BufWriter::new(fs::File::create(&path)?);
    writeln!(
        w,
        "# N={} L={:e} c={:e} sigma={:e} nu={:e} time={:e}",
        g.n(),
        g.length(),
        params.c,
        params.sigma,
        params.nu,
        state.time
    )?;
    writeln!(w, "k1,k2,omega_re,omega_im,e1_re,e1_im,e2_re,e2_im,b_re,b_im")?;
    let n = g.n();
    let cols = [
        state.omega.comp(0),
        state.e.comp(0),
        state.e.comp(1),
        state.b.comp(0),
    ];
    for idx in 0..g.len() {
        write!(w, "{},{}", signed_index(idx / n, n), signed_index(idx % n, n))?;
        for c in &cols {
            write!(w, ",{:e},{:e}", c[idx].re, c[idx].im)?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(path)
}

fn header_value(header: &str, key: &str) -> Result<f64> {
    header
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .ok_or_else(|| EmError::Config(format!("snapshot header lacks {key}")))?
        .parse()
        .map_err(|_| EmError::Config(format!("bad {key} in snapshot header")))
}

/// Read a snapshot back; returns the state and the header parameters.
pub fn read_snapshot(path: &Path) -> Result<(NormalEMState, PhysParams)> {
    let mut lines = BufReader::new(fs::File::open(path)?).lines();
    let header = lines
        .next()
        .ok_or_else(|| EmError::Config("empty snapshot".into()))??;
    let n = header_value(&header, "N")? as usize;
    let grid = Grid::new(n, header_value(&header, "L")?)?;
    let mut params = PhysParams::new(header_value(&header, "c")?, header_value(&header, "sigma")?);
    params.nu = header_value(&header, "nu")?;
    let time = header_value(&header, "time")?;
    lines.next();
    let mut cols = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; 4];
    for line in lines {
        let line = line?;
        let v: Vec<&str> = line.split(',').collect();
        if v.len() != 10 {
            return Err(EmError::Config(format!("bad snapshot row: {line}")));
        }
        let num =
            |s: &str| -> Result<f64> { s.parse().map_err(|_| EmError::Config(format!("bad number {s}"))) };
        let idx = grid.index_of(num(v[0])? as i64, num(v[1])? as i64);
        for (c, col) in cols.iter_mut().enumerate() {
            col[idx] = Complex64::new(num(v[2 + 2 * c])?, num(v[3 + 2 * c])?);
        }
    }
    let b = cols.pop().unwrap_or_default();
    let e2 = cols.pop().unwrap_or_default();
    let e1 = cols.pop().unwrap_or_default();
    let om = cols.pop().unwrap_or_default();
    let state = NormalEMState::new(
        Field::scalar(&grid, om)?,
        Field::vector(&grid, e1, e2)?,
        Field::scalar(&grid, b)?,
        time,
    )?;
    Ok((state, params))
}
