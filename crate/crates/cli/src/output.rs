//! CSV plumbing: every subcommand writes a header row and `.`-decimal numbers.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use ruin_core::pide::{BoundaryData, Grid, RuinedValue, SolutionField};

use crate::CliError;

/// Writer to `path`, or stdout when absent.
pub fn writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>, CliError> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| CliError::io(p, e))?)),
        None => Box::new(io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// `t,u,psi` rows in time-major order.
pub fn write_field(field: &SolutionField, path: Option<&Path>) -> Result<(), CliError> {
    let mut w = writer(path)?;
    w.write_record(["t", "u", "psi"])?;
    let g = field.grid();
    for (i, t) in g.t_nodes().iter().enumerate() {
        for (j, u) in g.u_nodes().iter().enumerate() {
            w.write_record([t.to_string(), u.to_string(), field.value(i, j).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Rebuild a field from `t,u,psi` rows covering a full tensor grid.
pub fn read_field(path: &Path, ruined: RuinedValue) -> Result<SolutionField, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| CliError::Field(format!("missing column `{name}`")))
    };
    let (ct, cu, cp) = (col("t")?, col("u")?, col("psi")?);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let num = |c: usize| {
            rec[c].trim().parse::<f64>().map_err(|e| CliError::Field(format!("bad number `{}`: {e}", &rec[c])))
        };
        rows.push((num(ct)?, num(cu)?, num(cp)?));
    }
    let distinct = |key: fn(&(f64, f64, f64)) -> f64| {
        let mut v: Vec<f64> = rows.iter().map(key).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (ts, us) = (distinct(|r| r.0), distinct(|r| r.1));
    if ts.len() * us.len() != rows.len() {
        return Err(CliError::Field(format!(
            "{} rows do not form a {} x {} tensor grid",
            rows.len(),
            ts.len(),
            us.len()
        )));
    }
    let mut values = vec![f64::NAN; rows.len()];
    for &(t, u, psi) in &rows {
        let i = ts.binary_search_by(|x| x.total_cmp(&t)).expect("t taken from rows");
        let j = us.binary_search_by(|x| x.total_cmp(&u)).expect("u taken from rows");
        values[i * us.len() + j] = psi;
    }
    if values.iter().any(|v| v.is_nan()) {
        return Err(CliError::Field("duplicate (t, u) rows".into()));
    }
    let n = us.len();
    let data = BoundaryData {
        terminal: values[(ts.len() - 1) * n..].to_vec(),
        lower: (0..ts.len()).map(|i| values[i * n]).collect(),
        upper: (0..ts.len()).map(|i| values[i * n + n - 1]).collect(),
    };
    let grid = Grid::from_nodes(us, ts)?;
    Ok(SolutionField::from_parts(grid, values, data, ruined)?)
}
