//! CSV writers for experiment results.
//!
//! Every file starts with `#`-prefixed comment lines that echo the resolved
//! run configuration, so a figure can always be traced back to the exact
//! run that produced it. Values are written with 15 significant digits;
//! identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Error;
use crate::experiments::{ConvergenceReport, RadiusTrace};
use crate::sav::EnergyRecord;
use crate::spectral::Field;

fn open_with_comments(path: &Path, comments: &[String]) -> Result<BufWriter<File>, Error> {
    let mut w = BufWriter::new(File::create(path)?);
    for line in comments {
        writeln!(w, "# {line}")?;
    }
    Ok(w)
}

/// Four columns: step count, largest step size, error, observed order.
/// The order cell is empty on the first row.
pub fn write_convergence(
    path: &Path,
    report: &ConvergenceReport,
    comments: &[String],
) -> Result<(), Error> {
    let mut w = open_with_comments(path, comments)?;
    writeln!(w, "m,tau_max,error,order")?;
    for row in &report.rows {
        let order = row.order.map_or(String::new(), |p| format!("{p:.15e}"));
        writeln!(w, "{},{:.15e},{:.15e},{order}", row.m, row.tau_max, row.error)?;
    }
    Ok(w.flush()?)
}

/// Energy trace: one row per recorded step.
pub fn write_energies(
    path: &Path,
    records: &[EnergyRecord],
    comments: &[String],
) -> Result<(), Error> {
    let mut w = open_with_comments(path, comments)?;
    writeln!(w, "step,t,energy,modified_energy,r")?;
    for rec in records {
        writeln!(
            w,
            "{},{:.15e},{:.15e},{:.15e},{:.15e}",
            rec.step, rec.t, rec.e, rec.e_mod, rec.r
        )?;
    }
    Ok(w.flush()?)
}

/// Interface radius history in original (unscaled) units.
pub fn write_radius(path: &Path, trace: &RadiusTrace, comments: &[String]) -> Result<(), Error> {
    let mut w = open_with_comments(path, comments)?;
    writeln!(w, "t,radius,radius_squared")?;
    for row in &trace.rows {
        writeln!(w, "{:.15e},{:.15e},{:.15e}", row.t, row.r, row.r_sq)?;
    }
    Ok(w.flush()?)
}

/// Nodal field dump, one `x,y,value` row per grid point, row-major in x.
pub fn write_field(path: &Path, field: &Field, comments: &[String]) -> Result<(), Error> {
    let grid = field.grid();
    let mut w = open_with_comments(path, comments)?;
    let (x0, x1, y0, y1) = grid.domain();
    writeln!(
        w,
        "# nx={} ny={} domain=[{x0},{x1}]x[{y0},{y1}] bc={}",
        grid.nx(),
        grid.ny(),
        grid.bc()
    )?;
    writeln!(w, "x,y,value")?;
    for i in 0..grid.nx() {
        for j in 0..grid.ny() {
            writeln!(
                w,
                "{:.15e},{:.15e},{:.15e}",
                grid.x(i),
                grid.y(j),
                field.values()[i * grid.ny() + j]
            )?;
        }
    }
    Ok(w.flush()?)
}
