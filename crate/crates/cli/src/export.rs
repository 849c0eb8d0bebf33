//! CSV and JSON writers. Floats go out with 17 significant digits so that
//! repeated runs can be compared byte for byte.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use biphoton::{JointSpectrum, SchmidtResult, SweepRow, TimeModes};
use ndarray::ArrayView2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::CliError;

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write_with(&self, name: &str, f: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::io(&path, e))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let text = serde_json::to_string_pretty(value).expect("report serializes");
        self.write_with(name, |w| writeln!(w, "{text}"))
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_spectrum(w: &mut dyn Write, js: &JointSpectrum) -> std::io::Result<()> {
    writeln!(w, "dws,dwi,re,im,abs2")?;
    for (row, &ws) in js.amplitude.outer_iter().zip(js.signal_grid.nodes()) {
        for (a, &wi) in row.iter().zip(js.idler_grid.nodes()) {
            writeln!(w, "{},{},{},{},{}", num(ws), num(wi), num(a.re), num(a.im), num(a.norm_sqr()))?;
        }
    }
    Ok(())
}

fn write_mode_table(w: &mut dyn Write, nodes: &[f64], modes: ArrayView2<'_, Complex64>) -> std::io::Result<()> {
    write!(w, "omega")?;
    for n in 1..=modes.ncols() {
        write!(w, ",re_psi_{n},im_psi_{n}")?;
    }
    writeln!(w)?;
    for (row, &x) in modes.outer_iter().zip(nodes) {
        write!(w, "{}", num(x))?;
        for z in row {
            write!(w, ",{},{}", num(z.re), num(z.im))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_signal_modes(w: &mut dyn Write, r: &SchmidtResult) -> std::io::Result<()> {
    write_mode_table(w, r.signal_grid.nodes(), r.signal_modes.view())
}

pub fn write_idler_modes(w: &mut dyn Write, r: &SchmidtResult) -> std::io::Result<()> {
    write_mode_table(w, r.idler_grid.nodes(), r.idler_modes.view())
}

pub fn write_time_densities(w: &mut dyn Write, times: &[f64], modes: ArrayView2<'_, Complex64>) -> std::io::Result<()> {
    write!(w, "t")?;
    for n in 1..=modes.ncols() {
        write!(w, ",abs2_mode{n}")?;
    }
    writeln!(w)?;
    for (row, &t) in modes.outer_iter().zip(times) {
        write!(w, "{}", num(t))?;
        for z in row {
            write!(w, ",{}", num(z.norm_sqr()))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_time_modes(w: &mut dyn Write, tm: &TimeModes, idler: bool) -> std::io::Result<()> {
    let modes = if idler { tm.idler.view() } else { tm.signal.view() };
    write_time_densities(w, &tm.times(), modes)
}

pub fn write_sweep(w: &mut dyn Write, rows: &[SweepRow]) -> std::io::Result<()> {
    write!(w, "dp1,S_bits,K")?;
    let width = rows.first().map_or(0, |r| r.lambdas.len());
    for n in 1..=width {
        write!(w, ",lambda{n}")?;
    }
    writeln!(w, ",in_window")?;
    for r in rows {
        write!(w, "{},{},{}", num(r.dp1), num(r.entropy_bits), num(r.schmidt_number))?;
        for &l in &r.lambdas {
            write!(w, ",{}", num(l))?;
        }
        writeln!(w, ",{}", r.in_window)?;
    }
    Ok(())
}

/// Decomposition summary; pair indices are 1-based.
#[derive(Debug, Serialize)]
pub struct DecomposeReport {
    pub n_mp: usize,
    pub rank: usize,
    pub eigenvalues: Vec<f64>,
    pub entropy_bits: f64,
    pub schmidt_number: f64,
    pub pairs: Vec<(usize, usize, f64)>,
    pub reconstruction_error: f64,
    pub tail_mass: f64,
}

impl DecomposeReport {
    pub fn new(n_mp: usize, r: &SchmidtResult) -> Self {
        Self {
            n_mp,
            rank: r.rank(),
            eigenvalues: r.eigenvalues.clone(),
            entropy_bits: r.entropy_bits,
            schmidt_number: r.schmidt_number,
            pairs: r.pairs.iter().map(|p| (p.first + 1, p.second + 1, p.gap)).collect(),
            reconstruction_error: r.reconstruction_error,
            tail_mass: r.tail_mass,
        }
    }
}
