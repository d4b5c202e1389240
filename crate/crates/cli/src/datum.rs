//! Initial data: named radial profiles or sampled CSV tables.

use crate::config::{DatumSpec, Profile};
use crate::CliError;
use cone_schrodinger::cutoff::bump;
use cone_schrodinger::hankel::{tail_estimate, BOUNDARY_TOLERANCE, TAIL_TOLERANCE};
use cone_schrodinger::{Error, ModeField, RadialGrid, SpectrumTable};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

#[derive(Debug, Serialize, Deserialize)]
struct DatumRow {
    entry: usize,
    ell: u32,
    r: f64,
    re: f64,
    im: f64,
}

fn profile_fn(profile: &Profile) -> Result<Box<dyn Fn(f64) -> f64>, CliError> {
    match *profile {
        Profile::Gaussian { center, width } => {
            if !(width > 0.0) || !center.is_finite() {
                return Err(CliError::Config(format!("gaussian needs width > 0; got width = {width}")));
            }
            Ok(Box::new(move |r| (-0.5 * ((r - center) / width).powi(2)).exp()))
        }
        Profile::Bump { center, width } => {
            if !(width > 0.0) || !center.is_finite() {
                return Err(CliError::Config(format!("bump needs width > 0; got width = {width}")));
            }
            if center - width <= 0.0 {
                return Err(Error::TipSupport(format!(
                    "bump on [{}, {}] reaches r = 0",
                    center - width,
                    center + width
                ))
                .into());
            }
            // The unit bump lives on [1, 2].
            Ok(Box::new(move |r| bump(1.5 + (r - center) / (2.0 * width))))
        }
        Profile::Csv { .. } => unreachable!("csv data are read, not sampled"),
    }
}

/// Builds the field described by `spec` and certifies that it stays away
/// from both ends of the grid.
pub fn load_datum(spec: &DatumSpec, table: Arc<SpectrumTable>, grid: Arc<RadialGrid>) -> Result<ModeField, CliError> {
    let field = match &spec.profile {
        Profile::Csv { path } => read_csv(path, table, grid)?,
        profile => {
            let f = profile_fn(profile)?;
            let mut field = ModeField::zeros(table, grid);
            if spec.modes.is_empty() {
                return Err(CliError::Config("datum needs at least one mode".into()));
            }
            for &(entry, ell) in &spec.modes {
                let pos = field.mode_position(entry, ell).ok_or_else(|| {
                    CliError::Config(format!("datum mode (entry {entry}, ell {ell}) is not in the spectrum table"))
                })?;
                field.data[pos] = field.grid.nodes.iter().map(|&r| Complex64::new(f(r), 0.0)).collect();
            }
            field
        }
    };
    certify(&field)?;
    Ok(field)
}

fn certify(field: &ModeField) -> Result<(), CliError> {
    for m in field.active_modes() {
        let d = &field.data[m];
        let peak = d.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if d[0].norm() > BOUNDARY_TOLERANCE * peak {
            return Err(Error::TipSupport(format!(
                "mode {m}: value {:e} at r = {:e} is not negligible against the peak {peak:e}",
                d[0].norm(),
                field.grid.nodes[0]
            ))
            .into());
        }
        let tail = tail_estimate(d, &field.grid);
        if tail > TAIL_TOLERANCE {
            return Err(Error::Tail(format!(
                "mode {m}: relative mass {tail:e} near r_max = {} exceeds {TAIL_TOLERANCE:e}",
                field.grid.r_max
            ))
            .into());
        }
    }
    Ok(())
}

/// Writes every nonzero mode as rows (entry, ell, r, re, im).
pub fn save_csv(field: &ModeField, path: &Path) -> Result<(), CliError> {
    let mut w = crate::output::csv_writer(path)?;
    for m in field.active_modes() {
        let idx = field.modes[m];
        for (r, c) in field.grid.nodes.iter().zip(&field.data[m]) {
            w.serialize(DatumRow {
                entry: idx.entry,
                ell: idx.ell,
                r: *r,
                re: c.re,
                im: c.im,
            })
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
    }
    w.flush().map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_csv(path: &Path, table: Arc<SpectrumTable>, grid: Arc<RadialGrid>) -> Result<ModeField, CliError> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read datum {}: {e}", path.display())))?;
    let mut field = ModeField::zeros(table, grid);
    let mut filled = vec![0usize; field.data.len()];
    for (line, row) in rdr.deserialize::<DatumRow>().enumerate() {
        let row = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let pos = field.mode_position(row.entry, row.ell).ok_or_else(|| {
            Error::Shape(format!(
                "{} row {}: mode (entry {}, ell {}) is not in the spectrum table",
                path.display(),
                line + 2,
                row.entry,
                row.ell
            ))
        })?;
        let i = filled[pos];
        let node = field.grid.nodes.get(i).copied();
        if node.is_none_or(|x| (x - row.r).abs() > 1e-12 * x) {
            return Err(Error::Shape(format!(
                "{} row {}: r = {} does not match grid node {} ({:?})",
                path.display(),
                line + 2,
                row.r,
                i,
                node
            ))
            .into());
        }
        if !row.re.is_finite() || !row.im.is_finite() {
            return Err(Error::Domain(format!("{} row {}: non-finite value", path.display(), line + 2)).into());
        }
        field.data[pos][i] = Complex64::new(row.re, row.im);
        filled[pos] += 1;
    }
    let n = field.grid.len();
    if let Some(pos) = filled.iter().position(|&k| k != 0 && k != n) {
        return Err(Error::Shape(format!(
            "{}: mode {pos} has {} rows for a grid of {n} nodes",
            path.display(),
            filled[pos]
        ))
        .into());
    }
    if filled.iter().all(|&k| k == 0) {
        return Err(CliError::Config(format!("{}: no data rows", path.display())));
    }
    Ok(field)
}
